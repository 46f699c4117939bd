#include "csa/derived.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace csa {

DiffState diff_state(const HeightState& xi) {
    if (xi.size() < 2) throw std::invalid_argument("need at least two sites");
    const auto last = xi[xi.size() - 1];
    DiffState zeta{std::vector<std::int64_t>(xi.size() - 1)};
    for (std::size_t i = 0; i + 1 < xi.size(); ++i) zeta[i] = xi[i] - last;
    return zeta;
}

EtaState eta_state(const HeightState& xi) {
    const std::size_t n = xi.size();
    EtaState eta{std::vector<std::int64_t>(n)};
    for (std::size_t i = 0; i < n; ++i) eta[i] = xi[i] - xi[(i + n - 1) % n];
    return eta;
}

VState v_state(const PotentialState& u) {
    if (u.size() < 2) throw std::invalid_argument("need at least two sites");
    const auto last = u[u.size() - 1];
    VState v{std::vector<std::int64_t>(u.size() - 1)};
    for (std::size_t i = 0; i + 1 < u.size(); ++i) v[i] = u[i] - last;
    return v;
}

HeightState heights_from_diff(const DiffState& zeta) {
    HeightState xi(zeta.values);
    xi.values.push_back(0);
    return xi;
}

HeightState heights_from_eta(const EtaState& eta) {
    if (std::accumulate(eta.begin(), eta.end(), std::int64_t{0}) != 0) {
        throw std::invalid_argument("eta state must sum to zero");
    }
    const std::size_t n = eta.size();
    HeightState xi{std::vector<std::int64_t>(n, 0)};
    std::int64_t running = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        running += eta[i];
        xi[i] = running;
    }
    return xi;
}

std::string_view to_string(Process process) {
    switch (process) {
        case Process::Zeta: return "zeta";
        case Process::Eta: return "eta";
        case Process::U: return "u";
        case Process::V: return "v";
    }
    return "?";
}

Process parse_process(std::string_view text) {
    if (text == "zeta") return Process::Zeta;
    if (text == "eta") return Process::Eta;
    if (text == "u") return Process::U;
    if (text == "v") return Process::V;
    throw std::invalid_argument("unknown process '" + std::string(text) + "' (expected zeta, eta, u or v)");
}

std::int64_t Move::exponent(std::span<const std::int64_t> x) const {
    std::int64_t e = exponent_offset;
    for (std::size_t i = 0; i < x.size(); ++i) e += exponent_coeffs[i] * x[i];
    return e;
}

bool LinearKernel::admits(std::span<const std::int64_t> x) const {
    if (x.size() != dimension) return false;
    if (process == Process::Eta) return std::accumulate(x.begin(), x.end(), std::int64_t{0}) == 0;
    return true;
}

std::vector<std::int64_t> LinearKernel::exponents(std::span<const std::int64_t> x) const {
    if (!admits(x)) throw std::invalid_argument("state is not in the state space of the " +
                                                std::string(to_string(process)) + " chain");
    std::vector<std::int64_t> e(moves.size());
    for (std::size_t k = 0; k < moves.size(); ++k) e[k] = moves[k].exponent(x);
    return e;
}

std::vector<std::int64_t> LinearKernel::apply(std::span<const std::int64_t> x, std::size_t move) const {
    std::vector<std::int64_t> next(x.begin(), x.end());
    const auto& d = moves.at(move).delta;
    for (std::size_t i = 0; i < next.size(); ++i) next[i] += d[i];
    return next;
}

namespace {

void require_mode(const ModelSpec& spec, Interaction mode, Process process) {
    if (spec.mode != mode) {
        throw ModeError(std::string("the ") + std::string(to_string(process)) + " chain is defined for mode " +
                        std::string(to_string(mode)) + " only, got " + std::string(to_string(spec.mode)));
    }
}

bool contains(const std::vector<std::size_t>& set, std::size_t j) {
    return std::find(set.begin(), set.end(), j) != set.end();
}

}  // namespace

LinearKernel make_kernel(const ModelSpec& spec, Process process) {
    const std::size_t n = spec.sites;
    const std::size_t N = n - 1;
    LinearKernel kernel{process, spec, 0, {}};
    switch (process) {
        case Process::Zeta: {
            kernel.dimension = N;
            for (std::size_t k = 0; k < n; ++k) {
                Move m;
                m.exponent_coeffs.assign(N, 0);
                for (auto j : neighbourhood(spec, k)) {
                    if (j < N) m.exponent_coeffs[j] = 1;  // zeta_{N+1} is identically 0
                }
                m.delta.assign(N, k < N ? 0 : -1);
                if (k < N) m.delta[k] = 1;
                kernel.moves.push_back(std::move(m));
            }
            break;
        }
        case Process::Eta: {
            require_mode(spec, Interaction::A2, process);
            kernel.dimension = n;
            for (std::size_t i = 0; i < n; ++i) {
                Move m;
                m.exponent_coeffs.assign(n, 0);
                if (i + 1 < n) {
                    // u_i = xi_i + xi_{i+1} with xi_{N+1} pinned at 0.
                    for (std::size_t j = 0; j <= i; ++j) m.exponent_coeffs[j] = 2;
                    m.exponent_coeffs[i + 1] += 1;
                } else {
                    // u_{N+1} = xi_{N+1} + xi_1 = eta_1.
                    m.exponent_coeffs[0] = 1;
                }
                m.delta.assign(n, 0);
                m.delta[i] += 1;
                m.delta[(i + 1) % n] -= 1;
                kernel.moves.push_back(std::move(m));
            }
            break;
        }
        case Process::U: {
            require_mode(spec, Interaction::A3, process);
            kernel.dimension = n;
            for (std::size_t k = 0; k < n; ++k) {
                Move m;
                m.exponent_coeffs.assign(n, 0);
                m.exponent_coeffs[k] = 1;
                m.delta.assign(n, 0);
                for (auto j : neighbourhood(spec, k)) m.delta[j] += 1;
                kernel.moves.push_back(std::move(m));
            }
            break;
        }
        case Process::V: {
            require_mode(spec, Interaction::A3, process);
            kernel.dimension = N;
            for (std::size_t k = 0; k < n; ++k) {
                const auto window = neighbourhood(spec, k);
                const std::int64_t reference_moves = contains(window, N) ? 1 : 0;
                Move m;
                m.exponent_coeffs.assign(N, 0);
                if (k < N) m.exponent_coeffs[k] = 1;
                m.delta.assign(N, 0);
                for (std::size_t j = 0; j < N; ++j) {
                    m.delta[j] = (contains(window, j) ? 1 : 0) - reference_moves;
                }
                kernel.moves.push_back(std::move(m));
            }
            break;
        }
    }
    return kernel;
}

SiteDistribution kernel_distribution(const LinearKernel& kernel, std::span<const std::int64_t> x,
                                     std::int64_t cap) {
    const auto e = kernel.exponents(x);
    return distribution_from_exponents(kernel.spec.beta, e, cap);
}

SiteDistribution zeta_transition_distribution(const ModelSpec& spec, const DiffState& zeta, std::int64_t cap) {
    return kernel_distribution(make_kernel(spec, Process::Zeta), zeta.view(), cap);
}

SiteDistribution eta_transition_distribution(const ModelSpec& spec, const EtaState& eta, std::int64_t cap) {
    return kernel_distribution(make_kernel(spec, Process::Eta), eta.view(), cap);
}

SiteDistribution u_transition_distribution(const ModelSpec& spec, const PotentialState& u, std::int64_t cap) {
    return kernel_distribution(make_kernel(spec, Process::U), u.view(), cap);
}

SiteDistribution v_transition_distribution(const ModelSpec& spec, const VState& v, std::int64_t cap) {
    return kernel_distribution(make_kernel(spec, Process::V), v.view(), cap);
}

std::vector<std::int64_t> project(const ModelSpec& spec, Process process, const HeightState& xi) {
    switch (process) {
        case Process::Zeta: return diff_state(xi).values;
        case Process::Eta: return eta_state(xi).values;
        case Process::U: return potentials(spec, xi).values;
        case Process::V: return v_state(potentials(spec, xi)).values;
    }
    return {};
}

ProcessChain::ProcessChain(LinearKernel kernel, std::vector<std::int64_t> initial, std::uint64_t seed)
    : kernel_(std::move(kernel)), state_(std::move(initial)), rng_(seed), weights_(kernel_.spec.beta) {
    if (!kernel_.admits(state_)) throw std::invalid_argument("initial state outside the chain's state space");
}

std::size_t ProcessChain::step() {
    exponents_.resize(kernel_.moves.size());
    for (std::size_t k = 0; k < kernel_.moves.size(); ++k) exponents_[k] = kernel_.moves[k].exponent(state_);
    const auto move = weights_.sample(exponents_, rng_, scratch_);
    const auto& d = kernel_.moves[move].delta;
    for (std::size_t i = 0; i < state_.size(); ++i) state_[i] += d[i];
    return move;
}

}  // namespace csa
