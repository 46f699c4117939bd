#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <string_view>
#include <vector>

#include "csa/kernel.hpp"

namespace csa {

// ---------------------------------------------------------------------------
// Planar ODE  du/ds = u(1 - v),  dv/ds = v(u - v)

struct Point2 {
    double u = 0.0;
    double v = 0.0;
};

class SingularityError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// dv/du = v(u - v) / (u(1 - v)). Throws SingularityError at v = 1 or u = 0.
double vector_field(double u, double v);

/// Unnormalised tangent (u(1 - v), v(u - v)); defined everywhere.
Point2 tangent(Point2 p);

enum class Termination { StepCap, DomainExit, Equilibrium, Singularity };
std::string_view to_string(Termination t);

struct StreamlineOptions {
    double h = 1e-3;             // arclength step
    std::size_t max_steps = 100000;
    int direction = 1;           // -1 integrates backwards in time
    double singular_tol = 1e-9;  // |v - 1| below this counts as touching the singular line
    bool stop_at_singular = false;
    double equilibrium_tol = 1e-6;  // distance to (1,1) that ends the run
    double domain_bound = 1e6;      // u or v above this is a domain exit
};

struct RayCrossing {
    std::size_t step;  // crossing lies between points step-1 and step
    Point2 at;         // linear interpolation onto v = u
    double radius;     // distance from (1,1)
};

struct Streamline {
    std::vector<Point2> points;
    Termination reason = Termination::StepCap;
    std::size_t singular_crossings = 0;  // sign changes of v - 1 (or touches within tol)
    std::vector<RayCrossing> ray_crossings;
};

/// Fixed-step RK4 on the unit tangent, so vertical slopes at v = 1 are
/// harmless. Requires start with u > 0, v > 0.
Streamline integrate_streamline(Point2 start, const StreamlineOptions& options = {});

// ---------------------------------------------------------------------------
// Extreme allocation dynamics (beta -> 0 and beta -> infinity)

enum class ExtremeMode { Min, Max };
std::string_view to_string(ExtremeMode mode);
ExtremeMode parse_extreme_mode(std::string_view text);

/// Sites attaining the min (resp. max) potential, 0-based and sorted.
std::vector<std::size_t> extreme_candidates(const ModelSpec& spec, const HeightState& xi, ExtremeMode mode);

StepResult extreme_step(const ModelSpec& spec, const HeightState& xi, ExtremeMode mode, Rng& rng);

struct AllocationHistory {
    std::vector<std::size_t> sites;  // chosen site at t = 1..T
    HeightState final_state;
};

AllocationHistory simulate_extreme(const ModelSpec& spec, const HeightState& initial, std::uint64_t steps,
                                   ExtremeMode mode, std::uint64_t seed);

enum class ParityVerdict { AllEven, AllOdd, Mixed, NoParityClaim };
std::string_view to_string(ParityVerdict v);

struct AbsorbingSupport {
    std::set<std::size_t> support;  // 0-based sites hit in the final window
    ParityVerdict verdict = ParityVerdict::Mixed;
};

/// Parity uses the 1-based labels: site index i is "even" when i+1 is even.
/// Odd tori get NoParityClaim. Needs at least 2W recorded steps.
AbsorbingSupport detect_absorbing_support(const std::vector<std::size_t>& sites, std::size_t torus_size,
                                          std::size_t window);

}  // namespace csa
