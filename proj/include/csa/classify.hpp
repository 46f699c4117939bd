#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "csa/kernel.hpp"

namespace csa {

// Online diagnostics. Each observer is fed once per step with the step
// time t = 1..T and the relevant observable, and summarised at the end.

/// Default burn-in: 1% of the horizon, at least 1000 steps.
std::uint64_t default_burn_in(std::uint64_t horizon);

bool is_origin(std::span<const std::int64_t> zeta);

class TieCounter {
public:
    void observe(std::uint64_t t, std::span<const std::int64_t> zeta);

    std::uint64_t count() const { return hits_.size(); }
    /// Number of hits with time <= t.
    std::uint64_t count_up_to(std::uint64_t t) const;
    /// Number of hits with time > t.
    std::uint64_t count_after(std::uint64_t t) const { return count() - count_up_to(t); }
    const std::vector<std::uint64_t>& hit_times() const { return hits_; }

private:
    std::vector<std::uint64_t> hits_;
};

enum class RecurrenceVerdict { RecurrentLike, Escaped, Inconclusive };
std::string_view to_string(RecurrenceVerdict v);

struct RecurrenceSummary {
    std::uint64_t returns = 0;  // visits to the origin
    std::vector<std::uint64_t> return_times;  // gaps between consecutive visits
    double mean_return_time = 0.0;
    std::uint64_t returns_first_half = 0;
    std::uint64_t returns_second_half = 0;
    double mean_first_half = 0.0;   // over gaps that end in the first half
    double mean_second_half = 0.0;
    std::optional<std::uint64_t> last_return;
    RecurrenceVerdict verdict = RecurrenceVerdict::Inconclusive;
};

/// RECURRENT-LIKE: visits in both halves and half-sample mean return times
/// within a factor 2. ESCAPED: no visit after `escape_after`.
class RecurrenceProbe {
public:
    explicit RecurrenceProbe(std::uint64_t horizon, std::optional<std::uint64_t> escape_after = std::nullopt);

    void observe(std::uint64_t t, std::span<const std::int64_t> zeta);
    RecurrenceSummary summary() const;

private:
    std::uint64_t horizon_;
    std::uint64_t escape_after_;
    std::vector<std::uint64_t> visits_;
};

enum class EscapeVerdict { TransientLike, NotTransient, Insufficient };
std::string_view to_string(EscapeVerdict v);

struct EscapeWindow {
    std::uint64_t start;  // 2^j
    std::uint64_t end;    // last observed time in the window
    std::int64_t min_sq_norm;
};

struct EscapeSummary {
    std::vector<EscapeWindow> windows;
    EscapeVerdict verdict = EscapeVerdict::Insufficient;
};

/// min |zeta(t)|^2 over dyadic windows [2^j, 2^{j+1}). TRANSIENT-LIKE when the
/// windows starting at or after burn-in (at least `min_windows` of them) are
/// all positive and strictly increasing.
class EscapeProbe {
public:
    explicit EscapeProbe(std::uint64_t burn_in, std::size_t min_windows = 3);

    void observe(std::uint64_t t, std::span<const std::int64_t> zeta);
    EscapeSummary summary() const;

private:
    std::uint64_t burn_in_;
    std::size_t min_windows_;
    std::vector<EscapeWindow> windows_;
};

// Axis labels of the plane, clockwise from the positive x-axis.
enum class Axis { E, S, W, N };
std::string_view to_string(Axis a);

enum class SpiralVerdict { Clockwise, Counterclockwise, Mixed, None };
std::string_view to_string(SpiralVerdict v);

struct Crossing {
    std::uint64_t t;
    Axis axis;
    int direction;       // +1 clockwise, -1 counterclockwise, 0 ambiguous (passed the origin)
    std::int64_t radius;  // distance from the origin along the axis
};

struct WindingSummary {
    std::vector<Crossing> crossings;
    std::uint64_t violations = 0;  // after burn-in: reversals, ambiguous jumps, origin visits
    std::uint64_t origin_visits = 0;  // after burn-in
    std::optional<std::uint64_t> last_irregular;  // time of the last such event, burn-in included
    std::size_t settled_crossings = 0;  // crossings after last_irregular, all clockwise
    std::vector<std::int64_t> e_radii;  // E crossings among the settled ones
    bool radii_nondecreasing = true;
    std::uint64_t clockwise_after_burn_in = 0;
    SpiralVerdict verdict = SpiralVerdict::None;  // over crossings after burn-in
    /// No violation after burn-in, at least one settled crossing and
    /// nondecreasing E radii along the settled sequence.
    bool clean = false;
};

/// Follows a planar lattice path around the origin on the cyclic order of
/// axes and open quadrants E, SE, S, SW, W, NW, N, NE, and emits an axis
/// label each time the unwrapped position reaches a new axis.
class WindingTracker {
public:
    explicit WindingTracker(std::uint64_t burn_in = 0);

    void observe(std::uint64_t t, std::span<const std::int64_t> zeta);
    WindingSummary summary() const;

private:
    std::uint64_t burn_in_;
    bool started_ = false;
    std::int64_t position_ = 0;  // unwrapped slot, 8 per turn
    std::int64_t last_level_ = 0;
    bool has_level_ = false;
    WindingSummary s_;

    void irregular(std::uint64_t t, bool counted);
};

/// Cyclic slot of a nonzero planar point: E=0, SE=1, S=2, ..., NE=7.
int slot_of(std::int64_t x, std::int64_t y);

enum class WinnerVerdict { Resolved, Unresolved };
std::string_view to_string(WinnerVerdict v);

struct WinnerRecord {
    WinnerVerdict verdict = WinnerVerdict::Unresolved;
    std::set<std::size_t> growing;  // 0-based sites fed in the final window
    std::size_t k = 0;               // 0-based; the pair is {k-1, k}
    std::int64_t c = 0;              // xi_{k+1} - xi_{k-2}
    double ratio = 0.0;              // xi_k / xi_{k-1}
    double residual = 0.0;           // |log(ratio) / log(beta) - c|
};

/// Counts arrivals in the final `window` steps of a run of `horizon` steps.
class WinnerDetect {
public:
    WinnerDetect(const ModelSpec& spec, std::uint64_t horizon, std::uint64_t window);

    void observe(std::uint64_t t, std::size_t site);
    WinnerRecord finish(const HeightState& final_state) const;

private:
    ModelSpec spec_;
    std::uint64_t window_start_;
    std::set<std::size_t> growing_;
};

/// Winner record from a final state and the set of sites still growing.
WinnerRecord winner_from(const ModelSpec& spec, const HeightState& final_state, const std::set<std::size_t>& growing);

enum class ProfileVerdict { EvenAlternating, OddAlternating, OddTorusAlternating, NotAlternating };
std::string_view to_string(ProfileVerdict v);

struct ProfileSummary {
    std::vector<double> rates;       // arrivals per step over the final half
    std::vector<bool> frozen;        // no arrival in the final half
    ProfileVerdict verdict = ProfileVerdict::NotAlternating;
    std::optional<std::size_t> rotation;  // odd torus: 0-based position of the shared pair
};

/// Even torus 2M: one parity class at rate near 1/M, the other frozen.
/// Odd torus 2M+1: up to rotation, a pair at 1/(2M), every other site after
/// it at 1/M and the rest frozen. Rates must be within tolerance/M.
class AlternatingProfile {
public:
    AlternatingProfile(std::size_t sites, std::uint64_t horizon, double tolerance = 0.25);

    void observe(std::uint64_t t, std::size_t site);
    ProfileSummary summary() const;

private:
    std::size_t sites_;
    std::uint64_t window_start_;
    std::uint64_t window_length_;
    double tolerance_;
    std::vector<std::uint64_t> counts_;
};

ProfileSummary classify_profile(std::span<const std::uint64_t> counts, std::uint64_t window_length,
                                double tolerance = 0.25);

}  // namespace csa
