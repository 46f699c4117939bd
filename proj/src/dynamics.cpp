#include "csa/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace csa {

double vector_field(double u, double v) {
    if (u == 0.0) throw SingularityError("vector field is singular at u = 0");
    if (v == 1.0) throw SingularityError("vector field is singular at v = 1");
    return v * (u - v) / (u * (1.0 - v));
}

Point2 tangent(Point2 p) { return {p.u * (1.0 - p.v), p.v * (p.u - p.v)}; }

std::string_view to_string(Termination t) {
    switch (t) {
        case Termination::StepCap: return "step-cap";
        case Termination::DomainExit: return "domain-exit";
        case Termination::Equilibrium: return "equilibrium";
        case Termination::Singularity: return "singularity";
    }
    return "?";
}

namespace {

Point2 unit_tangent(Point2 p, int direction) {
    const auto t = tangent(p);
    const double n = std::hypot(t.u, t.v);
    if (n == 0.0) return {0.0, 0.0};
    return {direction * t.u / n, direction * t.v / n};
}

Point2 rk4(Point2 p, double h, int direction) {
    const auto k1 = unit_tangent(p, direction);
    const auto k2 = unit_tangent({p.u + 0.5 * h * k1.u, p.v + 0.5 * h * k1.v}, direction);
    const auto k3 = unit_tangent({p.u + 0.5 * h * k2.u, p.v + 0.5 * h * k2.v}, direction);
    const auto k4 = unit_tangent({p.u + h * k3.u, p.v + h * k3.v}, direction);
    return {p.u + h / 6.0 * (k1.u + 2 * k2.u + 2 * k3.u + k4.u), p.v + h / 6.0 * (k1.v + 2 * k2.v + 2 * k3.v + k4.v)};
}

double distance_to_equilibrium(Point2 p) { return std::hypot(p.u - 1.0, p.v - 1.0); }

}  // namespace

Streamline integrate_streamline(Point2 start, const StreamlineOptions& options) {
    if (!(start.u > 0.0) || !(start.v > 0.0)) throw std::invalid_argument("streamline start must have u > 0, v > 0");
    if (!(options.h > 0.0)) throw std::invalid_argument("step size must be positive");
    if (options.direction != 1 && options.direction != -1) throw std::invalid_argument("direction must be +1 or -1");

    Streamline line;
    line.points.push_back(start);
    if (distance_to_equilibrium(start) < options.equilibrium_tol) {
        line.reason = Termination::Equilibrium;
        return line;
    }
    Point2 p = start;
    for (std::size_t s = 1; s <= options.max_steps; ++s) {
        const Point2 q = rk4(p, options.h, options.direction);
        if (!(q.u > 0.0) || !(q.v > 0.0) || q.u > options.domain_bound || q.v > options.domain_bound ||
            !std::isfinite(q.u) || !std::isfinite(q.v)) {
            line.reason = Termination::DomainExit;
            return line;
        }
        line.points.push_back(q);

        const double a = p.v - 1.0, b = q.v - 1.0;
        if ((a < 0) != (b < 0) || std::abs(b) < options.singular_tol) {
            ++line.singular_crossings;
            if (options.stop_at_singular) {
                line.reason = Termination::Singularity;
                return line;
            }
        }
        const double da = p.v - p.u, db = q.v - q.u;
        if ((da < 0 && db >= 0) || (da > 0 && db <= 0)) {
            const double w = da / (da - db);
            const Point2 at{p.u + w * (q.u - p.u), p.v + w * (q.v - p.v)};
            line.ray_crossings.push_back({s, at, distance_to_equilibrium(at)});
        }
        p = q;
        if (distance_to_equilibrium(p) < options.equilibrium_tol) {
            line.reason = Termination::Equilibrium;
            return line;
        }
    }
    line.reason = Termination::StepCap;
    return line;
}

// ---------------------------------------------------------------------------

std::string_view to_string(ExtremeMode mode) { return mode == ExtremeMode::Min ? "MIN" : "MAX"; }

ExtremeMode parse_extreme_mode(std::string_view text) {
    if (text == "MIN" || text == "min") return ExtremeMode::Min;
    if (text == "MAX" || text == "max") return ExtremeMode::Max;
    throw std::invalid_argument("extreme mode must be MIN or MAX, got '" + std::string(text) + "'");
}

std::vector<std::size_t> extreme_candidates(const ModelSpec& spec, const HeightState& xi, ExtremeMode mode) {
    const auto u = potentials(spec, xi);
    const auto target = mode == ExtremeMode::Min ? *std::min_element(u.begin(), u.end())
                                                 : *std::max_element(u.begin(), u.end());
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (u[i] == target) out.push_back(i);
    }
    return out;
}

StepResult extreme_step(const ModelSpec& spec, const HeightState& xi, ExtremeMode mode, Rng& rng) {
    const auto candidates = extreme_candidates(spec, xi, mode);
    auto pick = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(candidates.size()));
    pick = std::min(pick, candidates.size() - 1);
    StepResult r{candidates[pick], xi};
    ++r.state[r.site];
    return r;
}

AllocationHistory simulate_extreme(const ModelSpec& spec, const HeightState& initial, std::uint64_t steps,
                                   ExtremeMode mode, std::uint64_t seed) {
    if (initial.size() != spec.sites) throw std::invalid_argument("initial state has the wrong number of sites");
    Rng rng(seed);
    AllocationHistory h;
    h.sites.reserve(steps);
    HeightState xi = initial;
    for (std::uint64_t t = 0; t < steps; ++t) {
        auto r = extreme_step(spec, xi, mode, rng);
        h.sites.push_back(r.site);
        xi = std::move(r.state);
    }
    h.final_state = std::move(xi);
    return h;
}

std::string_view to_string(ParityVerdict v) {
    switch (v) {
        case ParityVerdict::AllEven: return "ALL-EVEN";
        case ParityVerdict::AllOdd: return "ALL-ODD";
        case ParityVerdict::Mixed: return "MIXED";
        case ParityVerdict::NoParityClaim: return "NO-PARITY-CLAIM";
    }
    return "?";
}

AbsorbingSupport detect_absorbing_support(const std::vector<std::size_t>& sites, std::size_t torus_size,
                                          std::size_t window) {
    if (window == 0) throw std::invalid_argument("window must be positive");
    if (sites.size() < 2 * window) throw std::invalid_argument("trajectory must span at least two windows");
    AbsorbingSupport out;
    for (std::size_t t = sites.size() - window; t < sites.size(); ++t) {
        if (sites[t] >= torus_size) throw std::out_of_range("site index outside the torus");
        out.support.insert(sites[t]);
    }
    if (torus_size % 2 == 1) {
        out.verdict = ParityVerdict::NoParityClaim;
        return out;
    }
    const bool all_even = std::all_of(out.support.begin(), out.support.end(), [](auto i) { return (i + 1) % 2 == 0; });
    const bool all_odd = std::all_of(out.support.begin(), out.support.end(), [](auto i) { return (i + 1) % 2 == 1; });
    out.verdict = all_even ? ParityVerdict::AllEven : all_odd ? ParityVerdict::AllOdd : ParityVerdict::Mixed;
    return out;
}

}  // namespace csa
