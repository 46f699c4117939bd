#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "csa/derived.hpp"
#include "csa/lyapunov.hpp"

namespace csa {

/// Axis-aligned integer box, bounds inclusive.
struct Box {
    std::vector<std::int64_t> lo;
    std::vector<std::int64_t> hi;

    static Box cube(std::size_t dimension, std::int64_t radius);
    std::size_t dimension() const { return lo.size(); }
    bool on_boundary(std::span<const std::int64_t> x) const;
};

enum class Norm { Max, L1 };

std::int64_t norm(std::span<const std::int64_t> x, Norm kind);

/// Inclusive shell {x : min <= |x| <= max}.
struct NormBand {
    Norm norm = Norm::Max;
    std::int64_t min = 0;
    std::int64_t max = 0;
};

struct Region {
    Box box;
    bool sum_zero = false;  // eta chains live on the hyperplane sum x = 0
    std::optional<NormBand> band;

    /// Region matching the state space of `kernel`: sum-zero for eta.
    static Region for_kernel(const LinearKernel& kernel, std::int64_t radius);

    bool contains(std::span<const std::int64_t> x) const;
    std::string describe() const;
};

/// The exceptional set M of a Foster criterion, as a predicate.
struct ExceptionalSet {
    std::string description;
    std::function<bool(std::span<const std::int64_t>)> contains;

    static ExceptionalSet none();
    static ExceptionalSet max_norm_ball(std::int64_t radius);
    static ExceptionalSet l1_ball(std::int64_t radius);
    /// Complement of the region where the v-gap function is a
    /// supermartingale: for N = 3 that region is {y2 > a}; for N >= 4 it is
    /// {y1 > a, y2 - yk > a for k = 4..N}.
    static ExceptionalSet outside_v_gap_region(std::size_t dimension, std::int64_t a);
};

enum class Verdict { Pass, Fail };
std::string_view to_string(Verdict v);

struct Violation {
    std::vector<std::int64_t> state;
    Rational drift;
};

struct ScanOptions {
    /// Certify clear-cut states in double precision and recompute only the
    /// ones inside a 1e-9 relative guard band exactly. Verdicts do not depend
    /// on this flag.
    bool float_filter = true;
    std::size_t workers = 0;
    std::int64_t cap = kDefaultExponentCap;
};

struct ScanReport {
    std::string kind;  // "ergodicity", "transience", "drift"
    std::string function;
    std::string process;
    std::string region;
    std::string exceptional;
    Rational threshold;  // a violation is drift > threshold
    std::uint64_t states_scanned = 0;
    std::uint64_t exact_evaluations = 0;
    std::vector<Violation> violations;
    std::int64_t max_violation_linf = -1;  // -1 when there are no violations
    std::int64_t max_violation_l1 = -1;
    Verdict verdict = Verdict::Fail;
    std::string note;

    // Transience scans only.
    std::optional<Rational> inf_over_exceptional;  // over M intersected with the region
    std::optional<std::vector<std::int64_t>> witness;
    std::optional<Rational> witness_value;
    bool positive_on_region = true;
};

/// Lists every state of region \ exceptional with drift > threshold.
/// Verdict: Pass iff there are no violations.
ScanReport scan_drift(const LinearKernel& kernel, const LyapunovFn& f, const Region& region,
                      const Rational& threshold, const ExceptionalSet& exceptional = ExceptionalSet::none(),
                      const ScanOptions& options = {});

/// Violations are states with drift > -epsilon. For a band region the
/// verdict is Pass iff the band is violation-free; for a plain box it is Pass
/// iff no violation touches the box boundary. That only reports geometry: a
/// larger box could still add violations.
ScanReport foster_ergodicity_scan(const LinearKernel& kernel, const LyapunovFn& f, const Region& region,
                                  const Rational& epsilon, const ScanOptions& options = {});

/// Checks drift <= 0 on region \ M, positivity of f, and looks for a state
/// outside M with f below inf_{M ∩ region} f. The infimum is over the
/// scanned part of M only, so it is a lower-bound certificate for M ∩ region.
ScanReport foster_transience_scan(const LinearKernel& kernel, const LyapunovFn& f,
                                  const ExceptionalSet& exceptional, const Region& region,
                                  const ScanOptions& options = {});

struct AnnulusSearch {
    std::int64_t radius = -1;  // smallest R with [R, R + width] violation-free; -1 if none found
    std::int64_t width = 0;
    std::int64_t search_radius = 0;
    ScanReport band_report;  // independent rescan of the band [R, R + width]
};

/// Scans the max-norm cube of `search_radius` once, then picks the smallest
/// R such that the band [R, R + width] holds no state with drift > -epsilon
/// and still fits in the cube.
AnnulusSearch find_violation_free_annulus(const LinearKernel& kernel, const LyapunovFn& f,
                                          const Rational& epsilon, std::int64_t width,
                                          std::int64_t search_radius, const ScanOptions& options = {});

/// Precomputed exact and filtered drift evaluation for one kernel and one
/// function. One instance per thread.
class DriftEvaluator {
public:
    DriftEvaluator(const LinearKernel& kernel, const LyapunovFn& f, std::int64_t cap = kDefaultExponentCap);

    enum class Sign { Above, AtOrBelow, Unknown };

    /// Sign of drift(x) - threshold decided in double precision, or Unknown
    /// inside the guard band (or when a power leaves the double range).
    Sign filtered_compare(std::span<const std::int64_t> x, double threshold);

    Rational exact(std::span<const std::int64_t> x);

    /// f(x) in double precision; nullopt when out of range.
    std::optional<double> value_double(std::span<const std::int64_t> x);
    Rational value_exact(std::span<const std::int64_t> x);
    /// Bound on |value_double(x) - f(x)| for values near v.
    double value_slack(std::span<const std::int64_t> x, double v) const;

    /// f(x) in double from the last filtered_compare call, if it got that far.
    std::optional<double> last_value() const { return last_value_; }

private:
    std::optional<double> power_double(std::int64_t k) const {
        if (orientation_ == 0) return 1.0;
        if (k < -reach_ || k > reach_) return std::nullopt;
        return power_table_[static_cast<std::size_t>(k + reach_)];
    }
    std::optional<double> f_double(std::span<const std::int64_t> x, std::size_t move);

    const LinearKernel& kernel_;
    const LyapunovFn& f_;
    std::int64_t cap_;
    PowerTable powers_;
    std::vector<double> power_table_;  // beta^k for k in [-reach, reach]
    std::int64_t reach_ = 0;
    int orientation_ = 0;
    std::vector<std::int64_t> move_coeffs_;  // row-major, one row per move
    std::vector<std::int64_t> term_coeffs_;  // row-major, one row per exp-sum term
    std::vector<std::vector<std::int64_t>> term_shift_;  // exp-sum: <a_t, delta_k>
    std::vector<std::int64_t> exps_;
    std::vector<std::int64_t> term_base_;
    std::vector<std::int64_t> scratch_;
    std::optional<double> last_value_;
};

}  // namespace csa
