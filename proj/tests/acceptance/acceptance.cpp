// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Seeds are seed_base + replica with seed_base = 1000.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "csa/classify.hpp"
#include "csa/derived.hpp"
#include "csa/dynamics.hpp"
#include "csa/lyapunov.hpp"
#include "csa/scan.hpp"

using namespace csa;

namespace {

// Thresholds fixed from pilot batches (seed_base 1000, 50 seeds each).
struct Thresholds {
    std::uint64_t seed_base = 1000;
    std::size_t seeds = 50;
    std::uint64_t horizon = 1000000;
    double recurrent_fraction = 0.90;   // pilot 50/50
    std::uint64_t escape_after = 100000;
    double escaped_fraction = 0.95;     // pilot 50/50
    double transient_fraction = 0.80;   // pilot 50/50
    std::uint64_t spiral_burn_in = 10000;
    double spiral_fraction = 0.90;      // pilot 50/50 clean, 50/50 tie-free
    std::uint64_t ties_horizon = 500000;
    double ties_ratio_lo = 1.4, ties_ratio_hi = 2.6;  // pilot 2.004
    double winner_fraction = 0.95;      // pilot 50/50
    double winner_residual = 0.2;       // pilot median 0.0022
    std::size_t extreme_runs = 200;
    std::uint64_t extreme_horizon = 1000, extreme_window = 100;
};

const Thresholds kT;

struct Outcome {
    bool pass = false;
    std::string detail;
};

template <class... Args>
std::string fmt(const char* f, Args... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::vector<std::int64_t> zeta_of(const HeightState& xi) { return diff_state(xi).values; }

// Each seed's chain is independent; a callback sees every step.
template <class Observer>
void run_seeds(const ModelSpec& spec, std::uint64_t steps, std::size_t seeds, Observer&& make_and_run) {
    for (std::size_t s = 0; s < seeds; ++s) {
        Chain chain(spec, flat_state(spec.sites), kT.seed_base + s);
        make_and_run(s, chain, steps);
    }
}

Outcome c1_normalization() {
    Rng rng(kT.seed_base);
    const std::size_t sizes[] = {3, 4, 5, 8};
    const Rational betas[] = {Rational(1, 2), Rational(9, 10), Rational(2)};
    std::uint64_t states = 0, mismatches = 0;
    for (auto mode : {Interaction::A1, Interaction::A2, Interaction::A3}) {
        std::vector<Process> processes{Process::Zeta};
        if (mode == Interaction::A2) processes.push_back(Process::Eta);
        if (mode == Interaction::A3) processes.insert(processes.end(), {Process::U, Process::V});
        for (int i = 0; i < 10000; ++i) {
            const auto n = sizes[i % 4];
            auto spec = ModelSpec::make(n, betas[(i / 4) % 3], mode);
            HeightState xi = flat_state(n);
            std::uniform_int_distribution<std::int64_t> h(-30, 30);
            for (std::size_t k = 0; k < n; ++k) xi[k] = h(rng);
            const auto p = transition_distribution(spec, xi);
            ++states;
            if (p.total() != 1) ++mismatches;
            for (auto process : processes) {
                const auto k = make_kernel(spec, process);
                const auto x = project(spec, process, xi);
                if (kernel_distribution(k, x).probs != p.probs) ++mismatches;
            }
        }
    }
    return {mismatches == 0, fmt("%lu states, %lu mismatches", states, mismatches)};
}

Outcome c2_quadratic() {
    std::uint64_t checked = 0, mismatches = 0;
    bool origin_ok = true;
    for (std::size_t n : {2u, 3u}) {
        for (const auto& beta : {Rational(1, 2), Rational(9, 10), Rational(2)}) {
            auto spec = ModelSpec::make(n + 1, beta, Interaction::A1);
            std::vector<std::int64_t> x(n, -30);
            for (bool more = true; more;) {
                if (quadratic_drift_closed_form(spec, x) != drift(spec, Process::Zeta, quadratic(), x).drift) ++mismatches;
                ++checked;
                more = false;
                for (std::size_t c = 0; c < n; ++c) {
                    if (x[c] < 30) {
                        ++x[c];
                        more = true;
                        break;
                    }
                    x[c] = -30;
                }
            }
            std::vector<std::int64_t> zero(n, 0);
            origin_ok = origin_ok && drift(spec, Process::Zeta, quadratic(), zero).drift == Rational(2 * static_cast<long>(n)) / static_cast<long>(n + 1);
        }
    }
    return {mismatches == 0 && origin_ok,
            fmt("%lu states, %lu mismatches, origin value 2N/(N+1) %s", checked, mismatches, origin_ok ? "ok" : "WRONG")};
}

Outcome c3_identity() {
    std::uint64_t checked = 0, nonzero = 0;
    for (const auto& beta : {Rational(1, 2), Rational(9, 10)}) {
        std::vector<std::int64_t> x(2);
        for (x[0] = -15; x[0] <= 15; ++x[0])
            for (x[1] = -15; x[1] <= 15; ++x[1]) {
                ++checked;
                if (exp_sum_identity_residual(beta, x) != 0) ++nonzero;
            }
    }
    return {nonzero == 0, fmt("%lu states, %lu nonzero residuals", checked, nonzero)};
}

Outcome c4_ergodicity() {
    auto k = make_kernel(ModelSpec::make(4, Rational(1, 2), Interaction::A1), Process::Zeta);
    const Rational eps(1, 10);
    const auto box = foster_ergodicity_scan(k, quadratic(), Region{Box::cube(3, 25)}, eps);
    const auto b = box.max_violation_l1;
    const bool bounded = box.verdict == Verdict::Pass && box.max_violation_linf < 25;
    Region annulus{Box::cube(3, 75)};
    annulus.band = NormBand{Norm::L1, b + 1, 75};
    const auto band = foster_ergodicity_scan(k, quadratic(), annulus, eps);
    return {bounded && band.verdict == Verdict::Pass && band.violations.empty(),
            fmt("%zu violations in [-25,25]^3, B = %ld; annulus %ld < |x|_1 <= 75: %zu violations over %lu states",
                box.violations.size(), b, b, band.violations.size(), band.states_scanned)};
}

Outcome c5_annulus() {
    const Rational beta(9, 10);
    auto k = make_kernel(ModelSpec::make(3, beta, Interaction::A2), Process::Zeta);
    const Rational eps = 1 - beta;
    const auto a = find_violation_free_annulus(k, exp_sum_a2(), eps, 15, 100);
    const auto wider = find_violation_free_annulus(k, exp_sum_a2(), eps, 25, 100);
    const bool ok = a.radius >= 0 && a.band_report.verdict == Verdict::Pass && a.radius == wider.radius &&
                    wider.band_report.verdict == Verdict::Pass;
    return {ok, fmt("R = %ld for width 15, R = %ld for width 25", a.radius, wider.radius)};
}

Outcome c6_transience() {
    std::ostringstream detail;
    bool ok = true;
    auto record = [&](const std::string& tag, const ScanReport& r) {
        ok = ok && r.verdict == Verdict::Pass;
        detail << tag << " " << to_string(r.verdict);
        if (r.inf_over_exceptional) detail << " inf_M=" << r.inf_over_exceptional->get_d();
        detail << "; ";
    };
    for (std::size_t sites : {3u, 4u}) {
        auto k = make_kernel(ModelSpec::make(sites, Rational(2), Interaction::A2), Process::Eta);
        record("eta N+1=" + std::to_string(sites),
               foster_transience_scan(k, reciprocal_max(), ExceptionalSet::max_norm_ball(3), Region::for_kernel(k, 40)));
    }
    for (std::size_t n : {3u, 5u}) {
        auto k = make_kernel(ModelSpec::make(n + 1, Rational(2), Interaction::A3), Process::V);
        record("v N=" + std::to_string(n),
               foster_transience_scan(k, v_gap_function(n), ExceptionalSet::outside_v_gap_region(n, 2),
                                      Region::for_kernel(k, 40)));
    }
    return {ok, detail.str()};
}

Outcome c7_recurrence_escape() {
    const auto T = kT.horizon;
    std::size_t recurrent = 0, escaped = 0, transient = 0;
    run_seeds(ModelSpec::make(3, Rational(1, 2), Interaction::A1), T, kT.seeds, [&](std::size_t, Chain& c, std::uint64_t steps) {
        RecurrenceProbe p(steps);
        for (std::uint64_t t = 1; t <= steps; ++t) {
            c.step();
            p.observe(t, zeta_of(c.state()));
        }
        const auto s = p.summary();
        if (s.returns_first_half > 0 && s.returns_second_half > 0) ++recurrent;
    });
    run_seeds(ModelSpec::make(3, Rational(2), Interaction::A1), T, kT.seeds, [&](std::size_t, Chain& c, std::uint64_t steps) {
        RecurrenceProbe p(steps, kT.escape_after);
        for (std::uint64_t t = 1; t <= steps; ++t) {
            c.step();
            p.observe(t, zeta_of(c.state()));
        }
        if (p.summary().verdict == RecurrenceVerdict::Escaped) ++escaped;
    });
    run_seeds(ModelSpec::make(6, Rational(1, 2), Interaction::A3), T, kT.seeds, [&](std::size_t, Chain& c, std::uint64_t steps) {
        EscapeProbe p(default_burn_in(steps));
        for (std::uint64_t t = 1; t <= steps; ++t) {
            c.step();
            p.observe(t, zeta_of(c.state()));
        }
        if (p.summary().verdict == EscapeVerdict::TransientLike) ++transient;
    });
    const double n = static_cast<double>(kT.seeds);
    const bool ok = recurrent >= kT.recurrent_fraction * n && escaped >= kT.escaped_fraction * n &&
                    transient >= kT.transient_fraction * n;
    return {ok, fmt("returns in both halves %zu/%zu; escaped after 1e5 %zu/%zu; TRANSIENT-LIKE %zu/%zu", recurrent,
                    kT.seeds, escaped, kT.seeds, transient, kT.seeds)};
}

Outcome c8_spiral() {
    std::size_t clean = 0, tie_free = 0;
    run_seeds(ModelSpec::make(3, Rational(2), Interaction::A2), kT.horizon, kT.seeds, [&](std::size_t, Chain& c, std::uint64_t steps) {
        WindingTracker w(kT.spiral_burn_in);
        TieCounter ties;
        for (std::uint64_t t = 1; t <= steps; ++t) {
            c.step();
            const auto z = zeta_of(c.state());
            w.observe(t, z);
            ties.observe(t, z);
        }
        const auto s = w.summary();
        if (s.clean && s.violations == 0 && s.radii_nondecreasing) ++clean;
        if (ties.count_after(kT.spiral_burn_in) == 0) ++tie_free;
    });
    const double n = static_cast<double>(kT.seeds);
    return {clean >= kT.spiral_fraction * n && tie_free >= kT.spiral_fraction * n,
            fmt("clean clockwise %zu/%zu; zero ties after burn-in %zu/%zu", clean, kT.seeds, tie_free, kT.seeds)};
}

Outcome c9_ties() {
    const auto T = kT.ties_horizon;
    std::uint64_t at_t = 0, at_2t = 0;
    run_seeds(ModelSpec::make(3, Rational(9, 10), Interaction::A2), 2 * T, kT.seeds, [&](std::size_t, Chain& c, std::uint64_t steps) {
        TieCounter ties;
        for (std::uint64_t t = 1; t <= steps; ++t) {
            c.step();
            ties.observe(t, zeta_of(c.state()));
        }
        at_t += ties.count_up_to(T);
        at_2t += ties.count();
    });
    const double ratio = at_t ? static_cast<double>(at_2t) / static_cast<double>(at_t) : 0.0;
    return {ratio >= kT.ties_ratio_lo && ratio <= kT.ties_ratio_hi,
            fmt("count(2T)/count(T) = %lu/%lu = %.3f", at_2t, at_t, ratio)};
}

Outcome c10_winner() {
    const auto spec = ModelSpec::make(5, Rational(2), Interaction::A3);
    std::size_t resolved = 0;
    std::vector<double> residuals;
    run_seeds(spec, kT.horizon, kT.seeds, [&](std::size_t, Chain& c, std::uint64_t steps) {
        WinnerDetect wd(spec, steps, steps / 2);
        for (std::uint64_t t = 1; t <= steps; ++t) wd.observe(t, c.step());
        const auto r = wd.finish(c.state());
        if (r.verdict == WinnerVerdict::Resolved) {
            ++resolved;
            residuals.push_back(r.residual);
        }
    });
    std::sort(residuals.begin(), residuals.end());
    const double median = residuals.empty() ? 1e9 : residuals[residuals.size() / 2];
    return {resolved >= kT.winner_fraction * static_cast<double>(kT.seeds) && median <= kT.winner_residual,
            fmt("resolved %zu/%zu; median residual %.4f", resolved, kT.seeds, median)};
}

Outcome c11_extreme() {
    auto spec = ModelSpec::make(4, Rational(1, 2), Interaction::A3);
    std::size_t locked = 0;
    for (std::size_t r = 0; r < kT.extreme_runs; ++r) {
        const auto h = simulate_extreme(spec, flat_state(4), kT.extreme_horizon, ExtremeMode::Min, kT.seed_base + r);
        const auto v = detect_absorbing_support(h.sites, 4, kT.extreme_window).verdict;
        if (v == ParityVerdict::AllEven || v == ParityVerdict::AllOdd) ++locked;
    }
    return {locked == kT.extreme_runs, fmt("ALL-EVEN or ALL-ODD in %zu/%zu runs", locked, kT.extreme_runs)};
}

Outcome c12_neutral() {
    std::uint64_t checked = 0, nonzero = 0;
    for (std::size_t n : {2u, 3u}) {
        auto k = make_kernel(ModelSpec::make(n + 1, Rational(1), Interaction::A1), Process::Zeta);
        std::vector<std::int64_t> x(n, -10);
        for (bool more = true; more;) {
            const auto d = kernel_distribution(k, x);
            for (std::size_t c = 0; c < n; ++c) {
                Rational mean = 0;
                for (std::size_t m = 0; m < k.moves.size(); ++m) mean += d.probs[m] * k.moves[m].delta[c];
                if (mean != 0) ++nonzero;
            }
            ++checked;
            more = false;
            for (std::size_t c = 0; c < n; ++c) {
                if (x[c] < 10) {
                    ++x[c];
                    more = true;
                    break;
                }
                x[c] = -10;
            }
        }
    }
    return {nonzero == 0, fmt("%lu states, %lu nonzero coordinate drifts", checked, nonzero)};
}

struct Criterion {
    const char* label;
    double budget_seconds;
    std::function<Outcome()> run;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {"C1  exact normalization and pushforward", 60, c1_normalization},
        {"C2  quadratic drift closed form", 120, c2_quadratic},
        {"C3  exp-sum polynomial identity", 60, c3_identity},
        {"C4  Foster ergodicity, A1 beta=1/2", 300, c4_ergodicity},
        {"C5  violation-free annulus, beta=9/10", 300, c5_annulus},
        {"C6  transience certificates, beta=2", 600, c6_transience},
        {"C7  recurrence vs escape", 1800, c7_recurrence_escape},
        {"C8  clockwise spiral, A2 beta=2", 900, c8_spiral},
        {"C9  tie growth, A2 beta=9/10", 900, c9_ties},
        {"C10 adjacent winner, A3 beta=2", 1200, c10_winner},
        {"C11 MIN-mode parity lock", 60, c11_extreme},
        {"C12 neutral zeta drift", 60, c12_neutral},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& ex) {
            o = {false, std::string("exception: ") + ex.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs <= c.budget_seconds;
        const bool pass = o.pass && in_time;
        if (!pass) ++failures;
        std::printf("%s %s: %s [%.1f s / %.0f s%s]\n", pass ? "PASS" : "FAIL", c.label, o.detail.c_str(), secs,
                    c.budget_seconds, in_time ? "" : " OVER BUDGET");
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
