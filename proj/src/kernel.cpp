#include "csa/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace csa {

std::string_view to_string(Interaction mode) {
    switch (mode) {
        case Interaction::A1: return "A1";
        case Interaction::A2: return "A2";
        case Interaction::A3: return "A3";
    }
    return "?";
}

Interaction parse_interaction(std::string_view text) {
    if (text == "A1" || text == "a1") return Interaction::A1;
    if (text == "A2" || text == "a2") return Interaction::A2;
    if (text == "A3" || text == "a3") return Interaction::A3;
    throw std::invalid_argument("unknown interaction mode '" + std::string(text) + "' (expected A1, A2 or A3)");
}

ModelSpec ModelSpec::make(std::size_t sites, Rational beta, Interaction mode, bool allow_two_sites) {
    beta.canonicalize();
    if (beta <= 0) throw std::invalid_argument("beta must be positive, got " + beta.get_str());
    const std::size_t min_sites = allow_two_sites ? 2 : 3;
    if (sites < min_sites) {
        throw std::invalid_argument("torus needs at least " + std::to_string(min_sites) + " sites, got " +
                                    std::to_string(sites));
    }
    return ModelSpec{sites, std::move(beta), mode};
}

std::vector<std::size_t> neighbourhood(const ModelSpec& spec, std::size_t i) {
    const std::size_t n = spec.sites;
    if (i >= n) throw std::out_of_range("site index out of range");
    std::vector<std::size_t> u;
    switch (spec.mode) {
        case Interaction::A1: u = {i}; break;
        case Interaction::A2: u = {i, (i + 1) % n}; break;
        case Interaction::A3: u = {(i + n - 1) % n, i, (i + 1) % n}; break;
    }
    // On a two-site torus the window wraps onto itself; U_i is a set.
    std::vector<std::size_t> unique;
    for (auto j : u) {
        if (std::find(unique.begin(), unique.end(), j) == unique.end()) unique.push_back(j);
    }
    return unique;
}

PotentialState potentials(const ModelSpec& spec, const HeightState& xi) {
    if (xi.size() != spec.sites) throw std::invalid_argument("state length does not match the torus");
    PotentialState u{std::vector<std::int64_t>(spec.sites, 0)};
    for (std::size_t i = 0; i < spec.sites; ++i) {
        for (auto j : neighbourhood(spec, i)) u[i] += xi[j];
    }
    return u;
}

Rational SiteDistribution::total() const {
    Rational s = 0;
    for (const auto& p : probs) s += p;
    return s;
}

SiteDistribution distribution_from_exponents(const Rational& beta, std::span<const std::int64_t> exponents,
                                             std::int64_t cap) {
    if (exponents.empty()) throw std::invalid_argument("empty exponent list");
    for (auto e : exponents) {
        if (e > cap || e < -cap) {
            throw ExponentCapError("exponent " + std::to_string(e) + " exceeds the exact-mode cap " +
                                   std::to_string(cap));
        }
    }
    // Shifting by the minimum keeps every power a nonnegative one.
    const auto lowest = *std::min_element(exponents.begin(), exponents.end());
    SiteDistribution d;
    d.probs.reserve(exponents.size());
    Rational z = 0;
    for (auto e : exponents) {
        d.probs.push_back(pow(beta, e - lowest));
        z += d.probs.back();
    }
    for (auto& p : d.probs) p /= z;
    return d;
}

SiteDistribution transition_distribution(const ModelSpec& spec, const HeightState& xi, std::int64_t cap) {
    const auto u = potentials(spec, xi);
    return distribution_from_exponents(spec.beta, u.view(), cap);
}

double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

namespace {

double log_of(const mpz_class& z) {
    long exp2 = 0;
    const double mant = mpz_get_d_2exp(&exp2, z.get_mpz_t());
    return std::log(mant) + static_cast<double>(exp2) * std::log(2.0);
}

}  // namespace

LogDomainWeights::LogDomainWeights(const Rational& beta) {
    if (beta <= 0) throw std::invalid_argument("beta must be positive");
    const double log_beta = log_of(beta.get_num()) - log_of(beta.get_den());
    if (beta == 1) {
        orientation_ = 0;
        table_ = {1.0};
        return;
    }
    orientation_ = beta > 1 ? 1 : -1;
    const double step = std::abs(log_beta);
    // exp(-x) is zero in double precision beyond x ~ 745.
    const double reach = std::ceil(746.0 / step) + 1.0;
    const auto size = static_cast<std::size_t>(std::min(reach, static_cast<double>(std::size_t{1} << 22)));
    table_.resize(size);
    for (std::size_t g = 0; g < size; ++g) table_[g] = std::exp(-static_cast<double>(g) * step);
}

std::size_t LogDomainWeights::sample(std::span<const std::int64_t> exponents, Rng& rng,
                                     std::vector<double>& scratch) const {
    const std::size_t n = exponents.size();
    scratch.resize(n);
    const double u = uniform01(rng);
    if (orientation_ == 0) return std::min(n - 1, static_cast<std::size_t>(u * static_cast<double>(n)));
    const auto [lo, hi] = std::minmax_element(exponents.begin(), exponents.end());
    const std::int64_t ref = orientation_ > 0 ? *hi : *lo;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto gap = static_cast<std::uint64_t>(orientation_ > 0 ? ref - exponents[i] : exponents[i] - ref);
        total += at_gap(gap);
        scratch[i] = total;
    }
    const double target = u * total;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (target < scratch[i]) return i;
        if (i == 0 ? scratch[0] > 0.0 : scratch[i] > scratch[i - 1]) last_positive = i;
    }
    return last_positive;
}

std::size_t sample_exact(const SiteDistribution& dist, Rng& rng) {
    std::vector<Rational> cumulative;
    cumulative.reserve(dist.probs.size());
    Rational acc = 0;
    for (const auto& p : dist.probs) {
        acc += p;
        cumulative.push_back(acc);
    }
    if (acc != 1) throw std::invalid_argument("distribution does not sum to one");

    mpz_class numerator = 0;
    mpz_class scale = 1;
    for (;;) {
        const std::uint64_t bits = rng();
        mpz_class chunk;
        mpz_import(chunk.get_mpz_t(), 1, 1, sizeof bits, 0, 0, &bits);
        numerator <<= 64;
        numerator += chunk;
        scale <<= 64;
        const Rational lo(numerator, scale);
        const Rational hi(numerator + 1, scale);
        // First cell whose right end lies strictly beyond lo.
        const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), lo);
        if (it != cumulative.end() && hi <= *it) return static_cast<std::size_t>(it - cumulative.begin());
    }
}

StepResult step(const ModelSpec& spec, const HeightState& xi, Rng& rng, SamplingMode sampling,
                std::int64_t cap) {
    std::size_t site = 0;
    if (sampling == SamplingMode::Exact) {
        site = sample_exact(transition_distribution(spec, xi, cap), rng);
    } else {
        const auto u = potentials(spec, xi);
        std::vector<double> scratch;
        site = LogDomainWeights(spec.beta).sample(u.view(), rng, scratch);
    }
    HeightState next = xi;
    next[site] += 1;
    return {site, std::move(next)};
}

Chain::Chain(ModelSpec spec, HeightState initial, std::uint64_t seed, SamplingMode sampling, std::int64_t cap)
    : spec_(std::move(spec)),
      state_(std::move(initial)),
      rng_(seed),
      sampling_(sampling),
      cap_(cap),
      weights_(spec_.beta) {
    potentials_ = csa::potentials(spec_, state_);
    touched_by_.resize(spec_.sites);
    for (std::size_t i = 0; i < spec_.sites; ++i) {
        for (auto j : neighbourhood(spec_, i)) touched_by_[j].push_back(i);
    }
}

std::size_t Chain::step() {
    std::size_t site = 0;
    if (sampling_ == SamplingMode::Exact) {
        site = sample_exact(distribution_from_exponents(spec_.beta, potentials_.view(), cap_), rng_);
    } else {
        site = weights_.sample(potentials_.view(), rng_, scratch_);
    }
    state_[site] += 1;
    for (auto i : touched_by_[site]) potentials_[i] += 1;
    ++time_;
    return site;
}

HeightState run(Chain& chain, std::uint64_t steps, const StepObserver& observer) {
    for (std::uint64_t s = 0; s < steps; ++s) {
        const auto site = chain.step();
        if (observer) observer(chain.time(), site, chain.state());
    }
    return chain.state();
}

Trajectory simulate(const ModelSpec& spec, const HeightState& initial, std::uint64_t steps, std::uint64_t seed,
                    std::uint64_t thinning, const StepObserver& observer, SamplingMode sampling) {
    Chain chain(spec, initial, seed, sampling);
    Trajectory traj;
    traj.sites.reserve(steps);
    for (std::uint64_t s = 0; s < steps; ++s) {
        const auto site = chain.step();
        traj.sites.push_back(site);
        if (thinning != 0 && chain.time() % thinning == 0) {
            traj.snapshots.push_back({chain.time(), site, chain.state()});
        }
        if (observer) observer(chain.time(), site, chain.state());
    }
    traj.final_state = chain.state();
    return traj;
}

HeightState flat_state(std::size_t sites, std::int64_t level) {
    return HeightState(std::vector<std::int64_t>(sites, level));
}

}  // namespace csa
