#include "csa/classify.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace csa {

std::uint64_t default_burn_in(std::uint64_t horizon) { return std::max<std::uint64_t>(1000, horizon / 100); }

bool is_origin(std::span<const std::int64_t> zeta) {
    return std::all_of(zeta.begin(), zeta.end(), [](auto v) { return v == 0; });
}

// ---------------------------------------------------------------------------

void TieCounter::observe(std::uint64_t t, std::span<const std::int64_t> zeta) {
    if (is_origin(zeta)) hits_.push_back(t);
}

std::uint64_t TieCounter::count_up_to(std::uint64_t t) const {
    return static_cast<std::uint64_t>(std::upper_bound(hits_.begin(), hits_.end(), t) - hits_.begin());
}

// ---------------------------------------------------------------------------

std::string_view to_string(RecurrenceVerdict v) {
    switch (v) {
        case RecurrenceVerdict::RecurrentLike: return "RECURRENT-LIKE";
        case RecurrenceVerdict::Escaped: return "ESCAPED";
        case RecurrenceVerdict::Inconclusive: return "INCONCLUSIVE";
    }
    return "?";
}

RecurrenceProbe::RecurrenceProbe(std::uint64_t horizon, std::optional<std::uint64_t> escape_after)
    : horizon_(horizon), escape_after_(escape_after.value_or(horizon / 10)) {
    if (horizon == 0) throw std::invalid_argument("horizon must be positive");
}

void RecurrenceProbe::observe(std::uint64_t t, std::span<const std::int64_t> zeta) {
    if (is_origin(zeta)) visits_.push_back(t);
}

RecurrenceSummary RecurrenceProbe::summary() const {
    RecurrenceSummary s;
    const std::uint64_t half = horizon_ / 2;
    double sum1 = 0, sum2 = 0;
    std::uint64_t n1 = 0, n2 = 0;
    for (std::size_t i = 0; i < visits_.size(); ++i) {
        const auto t = visits_[i];
        if (t >= 1) {
            ++s.returns;
            (t <= half ? s.returns_first_half : s.returns_second_half) += 1;
        }
        if (i == 0) continue;
        const auto gap = t - visits_[i - 1];
        s.return_times.push_back(gap);
        if (t <= half) {
            sum1 += static_cast<double>(gap);
            ++n1;
        } else {
            sum2 += static_cast<double>(gap);
            ++n2;
        }
    }
    if (!s.return_times.empty()) s.mean_return_time = (sum1 + sum2) / static_cast<double>(s.return_times.size());
    if (n1) s.mean_first_half = sum1 / static_cast<double>(n1);
    if (n2) s.mean_second_half = sum2 / static_cast<double>(n2);
    if (!visits_.empty()) s.last_return = visits_.back();

    if (s.returns_first_half > 0 && s.returns_second_half > 0 && n1 > 0 && n2 > 0) {
        const double hi = std::max(s.mean_first_half, s.mean_second_half);
        const double lo = std::min(s.mean_first_half, s.mean_second_half);
        if (hi <= 2.0 * lo) {
            s.verdict = RecurrenceVerdict::RecurrentLike;
            return s;
        }
    }
    if (!s.last_return || *s.last_return <= escape_after_) s.verdict = RecurrenceVerdict::Escaped;
    return s;
}

// ---------------------------------------------------------------------------

std::string_view to_string(EscapeVerdict v) {
    switch (v) {
        case EscapeVerdict::TransientLike: return "TRANSIENT-LIKE";
        case EscapeVerdict::NotTransient: return "NOT-TRANSIENT";
        case EscapeVerdict::Insufficient: return "INSUFFICIENT";
    }
    return "?";
}

EscapeProbe::EscapeProbe(std::uint64_t burn_in, std::size_t min_windows)
    : burn_in_(burn_in), min_windows_(std::max<std::size_t>(2, min_windows)) {}

void EscapeProbe::observe(std::uint64_t t, std::span<const std::int64_t> zeta) {
    if (t == 0) return;
    std::int64_t sq = 0;
    for (auto v : zeta) sq += v * v;
    const std::uint64_t start = std::uint64_t{1} << (63 - std::countl_zero(t));
    if (windows_.empty() || windows_.back().start != start) {
        windows_.push_back({start, t, sq});
    } else {
        auto& w = windows_.back();
        w.end = t;
        w.min_sq_norm = std::min(w.min_sq_norm, sq);
    }
}

EscapeSummary EscapeProbe::summary() const {
    EscapeSummary s;
    s.windows = windows_;
    std::vector<std::int64_t> tail;
    for (const auto& w : windows_) {
        if (w.start >= burn_in_) tail.push_back(w.min_sq_norm);
    }
    if (tail.size() < min_windows_) {
        s.verdict = EscapeVerdict::Insufficient;
        return s;
    }
    bool ok = tail.front() > 0;
    for (std::size_t i = 1; i < tail.size() && ok; ++i) ok = tail[i] > tail[i - 1];
    s.verdict = ok ? EscapeVerdict::TransientLike : EscapeVerdict::NotTransient;
    return s;
}

// ---------------------------------------------------------------------------

std::string_view to_string(Axis a) {
    switch (a) {
        case Axis::E: return "E";
        case Axis::S: return "S";
        case Axis::W: return "W";
        case Axis::N: return "N";
    }
    return "?";
}

std::string_view to_string(SpiralVerdict v) {
    switch (v) {
        case SpiralVerdict::Clockwise: return "CLOCKWISE";
        case SpiralVerdict::Counterclockwise: return "COUNTERCLOCKWISE";
        case SpiralVerdict::Mixed: return "MIXED";
        case SpiralVerdict::None: return "NONE";
    }
    return "?";
}

int slot_of(std::int64_t x, std::int64_t y) {
    if (x == 0 && y == 0) throw std::invalid_argument("the origin has no slot");
    if (y == 0) return x > 0 ? 0 : 4;
    if (x == 0) return y < 0 ? 2 : 6;
    if (x > 0) return y < 0 ? 1 : 7;
    return y < 0 ? 3 : 5;
}

WindingTracker::WindingTracker(std::uint64_t burn_in) : burn_in_(burn_in) {}

void WindingTracker::irregular(std::uint64_t t, bool counted) {
    s_.last_irregular = t;
    if (counted) ++s_.violations;
}

void WindingTracker::observe(std::uint64_t t, std::span<const std::int64_t> zeta) {
    if (zeta.size() != 2) throw std::invalid_argument("winding tracker needs a planar path");
    const bool counted = t > burn_in_;
    if (zeta[0] == 0 && zeta[1] == 0) {
        if (counted) ++s_.origin_visits;
        irregular(t, counted);
        return;
    }
    const int slot = slot_of(zeta[0], zeta[1]);
    if (!started_) {
        started_ = true;
        position_ = slot;
        if (slot % 2 == 0) {
            last_level_ = slot;
            has_level_ = true;
        }
        return;
    }
    auto delta = static_cast<int>(((slot - position_) % 8 + 8) % 8);
    if (delta > 4) delta -= 8;
    if (delta == 0) return;
    const bool ambiguous = delta == 4;
    position_ += delta;
    if (ambiguous) irregular(t, counted);
    if (position_ % 2 != 0) return;
    if (has_level_ && position_ == last_level_) return;
    const bool same_label = has_level_ && (position_ - last_level_) % 8 == 0;
    last_level_ = position_;
    has_level_ = true;
    if (same_label) return;

    const int direction = ambiguous ? 0 : (delta > 0 ? 1 : -1);
    if (direction < 0) irregular(t, counted);
    const std::int64_t radius = std::abs(zeta[0]) + std::abs(zeta[1]);
    s_.crossings.push_back({t, static_cast<Axis>(slot / 2), direction, radius});
}

WindingSummary WindingTracker::summary() const {
    WindingSummary s = s_;
    std::uint64_t ccw = 0;
    for (const auto& c : s.crossings) {
        if (c.t > burn_in_) {
            if (c.direction > 0) ++s.clockwise_after_burn_in;
            if (c.direction < 0) ++ccw;
        }
        if (s.last_irregular && c.t <= *s.last_irregular) continue;
        ++s.settled_crossings;
        if (c.axis == Axis::E) {
            if (!s.e_radii.empty() && c.radius < s.e_radii.back()) s.radii_nondecreasing = false;
            s.e_radii.push_back(c.radius);
        }
    }
    const auto cw = s.clockwise_after_burn_in;
    if (cw == 0 && ccw == 0) {
        s.verdict = SpiralVerdict::None;
    } else if (ccw == 0) {
        s.verdict = SpiralVerdict::Clockwise;
    } else if (cw == 0) {
        s.verdict = SpiralVerdict::Counterclockwise;
    } else {
        s.verdict = SpiralVerdict::Mixed;
    }
    s.clean = s.violations == 0 && s.settled_crossings > 0 && s.radii_nondecreasing;
    return s;
}

// ---------------------------------------------------------------------------

std::string_view to_string(WinnerVerdict v) { return v == WinnerVerdict::Resolved ? "RESOLVED" : "UNRESOLVED"; }

namespace {

void require_winner_regime(const ModelSpec& spec) {
    if (spec.mode != Interaction::A3) throw ModeError("winner detection needs the symmetric interaction A3");
    if (!(spec.beta > 1)) throw std::invalid_argument("winner detection needs beta > 1");
}

}  // namespace

WinnerRecord winner_from(const ModelSpec& spec, const HeightState& final_state, const std::set<std::size_t>& growing) {
    require_winner_regime(spec);
    const std::size_t n = spec.sites;
    if (final_state.size() != n) throw std::invalid_argument("final state has the wrong number of sites");
    WinnerRecord r;
    r.growing = growing;
    if (growing.size() != 2) return r;
    const auto a = *growing.begin(), b = *growing.rbegin();
    std::size_t lower;
    if (b == a + 1) {
        lower = a;
    } else if (a == 0 && b == n - 1) {
        lower = n - 1;
    } else {
        return r;
    }
    const std::size_t k = (lower + 1) % n;
    const auto hk = final_state[k], hk1 = final_state[lower];
    if (hk <= 0 || hk1 <= 0) return r;
    r.k = k;
    r.c = final_state[(k + 1) % n] - final_state[(k + n - 2) % n];
    r.ratio = static_cast<double>(hk) / static_cast<double>(hk1);
    r.residual = std::abs(std::log(r.ratio) / std::log(spec.beta.get_d()) - static_cast<double>(r.c));
    r.verdict = WinnerVerdict::Resolved;
    return r;
}

WinnerDetect::WinnerDetect(const ModelSpec& spec, std::uint64_t horizon, std::uint64_t window)
    : spec_(spec), window_start_(horizon >= window ? horizon - window + 1 : 1) {
    require_winner_regime(spec);
    if (window == 0) throw std::invalid_argument("window must be positive");
}

void WinnerDetect::observe(std::uint64_t t, std::size_t site) {
    if (t >= window_start_) growing_.insert(site);
}

WinnerRecord WinnerDetect::finish(const HeightState& final_state) const {
    return winner_from(spec_, final_state, growing_);
}

// ---------------------------------------------------------------------------

std::string_view to_string(ProfileVerdict v) {
    switch (v) {
        case ProfileVerdict::EvenAlternating: return "EVEN-ALTERNATING";
        case ProfileVerdict::OddAlternating: return "ODD-ALTERNATING";
        case ProfileVerdict::OddTorusAlternating: return "ODD-TORUS-ALTERNATING";
        case ProfileVerdict::NotAlternating: return "NOT-ALTERNATING";
    }
    return "?";
}

ProfileSummary classify_profile(std::span<const std::uint64_t> counts, std::uint64_t window_length,
                                double tolerance) {
    if (window_length == 0) throw std::invalid_argument("window length must be positive");
    const std::size_t n = counts.size();
    ProfileSummary s;
    for (auto c : counts) {
        s.rates.push_back(static_cast<double>(c) / static_cast<double>(window_length));
        s.frozen.push_back(c == 0);
    }
    auto near = [&](std::size_t i, double expected) {
        return std::abs(s.rates[i] - expected) <= tolerance * expected;
    };
    const auto m = static_cast<double>(n / 2);
    if (n % 2 == 0) {
        // growing_label_parity: 0 means even 1-based labels grow.
        for (int parity = 0; parity < 2; ++parity) {
            bool ok = true;
            for (std::size_t i = 0; i < n && ok; ++i) {
                const bool grows = (i + 1) % 2 == static_cast<std::size_t>(parity);
                ok = grows ? near(i, 1.0 / m) : s.frozen[i];
            }
            if (ok) {
                s.verdict = parity == 0 ? ProfileVerdict::EvenAlternating : ProfileVerdict::OddAlternating;
                return s;
            }
        }
        return s;
    }
    for (std::size_t r = 0; r < n; ++r) {
        bool ok = near(r, 0.5 / m) && near((r + 1) % n, 0.5 / m);
        for (std::size_t label = 3; label <= n && ok; ++label) {
            const std::size_t i = (r + label - 1) % n;
            ok = label % 2 == 0 ? near(i, 1.0 / m) : s.frozen[i];
        }
        if (ok) {
            s.verdict = ProfileVerdict::OddTorusAlternating;
            s.rotation = r;
            return s;
        }
    }
    return s;
}

AlternatingProfile::AlternatingProfile(std::size_t sites, std::uint64_t horizon, double tolerance)
    : sites_(sites),
      window_start_(horizon / 2 + 1),
      window_length_(horizon - horizon / 2),
      tolerance_(tolerance),
      counts_(sites, 0) {
    if (sites < 3) throw std::invalid_argument("alternating profile needs at least three sites");
    if (horizon < 2) throw std::invalid_argument("horizon too short");
}

void AlternatingProfile::observe(std::uint64_t t, std::size_t site) {
    if (t >= window_start_) ++counts_.at(site);
}

ProfileSummary AlternatingProfile::summary() const { return classify_profile(counts_, window_length_, tolerance_); }

}  // namespace csa
