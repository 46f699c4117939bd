#include "csa/scan.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <sstream>

#include "csa/parallel.hpp"

namespace csa {

Box Box::cube(std::size_t dimension, std::int64_t radius) {
    return Box{std::vector<std::int64_t>(dimension, -radius), std::vector<std::int64_t>(dimension, radius)};
}

bool Box::on_boundary(std::span<const std::int64_t> x) const {
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] == lo[i] || x[i] == hi[i]) return true;
    }
    return false;
}

std::int64_t norm(std::span<const std::int64_t> x, Norm kind) {
    std::int64_t r = 0;
    for (auto v : x) r = kind == Norm::Max ? std::max(r, std::abs(v)) : r + std::abs(v);
    return r;
}

Region Region::for_kernel(const LinearKernel& kernel, std::int64_t radius) {
    Region r{Box::cube(kernel.dimension, radius), kernel.process == Process::Eta, std::nullopt};
    return r;
}

bool Region::contains(std::span<const std::int64_t> x) const {
    if (x.size() != box.dimension()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] < box.lo[i] || x[i] > box.hi[i]) return false;
    }
    if (sum_zero && std::accumulate(x.begin(), x.end(), std::int64_t{0}) != 0) return false;
    if (band) {
        const auto n = norm(x, band->norm);
        if (n < band->min || n > band->max) return false;
    }
    return true;
}

std::string Region::describe() const {
    std::ostringstream os;
    os << "box";
    for (std::size_t i = 0; i < box.dimension(); ++i) os << (i ? "x" : " ") << "[" << box.lo[i] << "," << box.hi[i] << "]";
    if (sum_zero) os << " on sum=0";
    if (band) os << " with " << (band->norm == Norm::Max ? "max" : "l1") << "-norm in [" << band->min << "," << band->max << "]";
    return os.str();
}

ExceptionalSet ExceptionalSet::none() {
    return {"empty", [](std::span<const std::int64_t>) { return false; }};
}

ExceptionalSet ExceptionalSet::max_norm_ball(std::int64_t radius) {
    return {"max-norm <= " + std::to_string(radius),
            [radius](std::span<const std::int64_t> x) { return norm(x, Norm::Max) <= radius; }};
}

ExceptionalSet ExceptionalSet::l1_ball(std::int64_t radius) {
    return {"l1-norm <= " + std::to_string(radius),
            [radius](std::span<const std::int64_t> x) { return norm(x, Norm::L1) <= radius; }};
}

ExceptionalSet ExceptionalSet::outside_v_gap_region(std::size_t dimension, std::int64_t a) {
    if (dimension < 3) throw std::invalid_argument("v-gap region needs N >= 3");
    if (dimension == 3) {
        return {"complement of {y2 > " + std::to_string(a) + "}",
                [a](std::span<const std::int64_t> y) { return !(y[1] > a); }};
    }
    return {"complement of {y1 > " + std::to_string(a) + ", y2 - yk > " + std::to_string(a) + " (k=4.." +
                std::to_string(dimension) + ")}",
            [a](std::span<const std::int64_t> y) {
                if (!(y[0] > a)) return true;
                for (std::size_t k = 3; k < y.size(); ++k) {
                    if (!(y[1] - y[k] > a)) return true;
                }
                return false;
            }};
}

std::string_view to_string(Verdict v) { return v == Verdict::Pass ? "PASS" : "FAIL"; }

// ---------------------------------------------------------------------------
// DriftEvaluator

namespace {

constexpr double kGuard = 1e-9;
constexpr double kValueGuard = 1e-11;

double log_rational(const Rational& q) {
    auto log_z = [](const mpz_class& z) {
        long e = 0;
        const double m = mpz_get_d_2exp(&e, z.get_mpz_t());
        return std::log(m) + static_cast<double>(e) * std::log(2.0);
    };
    return log_z(q.get_num()) - log_z(q.get_den());
}

[[noreturn, gnu::noinline]] void cap_exceeded(std::int64_t e, std::int64_t cap) {
    throw ExponentCapError("exponent " + std::to_string(e) + " exceeds the exact-mode cap " + std::to_string(cap));
}

inline void check_cap(std::int64_t e, std::int64_t cap) {
    if (e > cap || e < -cap) [[unlikely]] cap_exceeded(e, cap);
}

inline std::int64_t dot(const std::int64_t* c, std::span<const std::int64_t> x) {
    std::int64_t e = 0;
    for (std::size_t i = 0; i < x.size(); ++i) e += c[i] * x[i];
    return e;
}

}  // namespace

DriftEvaluator::DriftEvaluator(const LinearKernel& kernel, const LyapunovFn& f, std::int64_t cap)
    : kernel_(kernel), f_(f), cap_(cap), powers_(kernel.spec.beta) {
    const auto& beta = kernel.spec.beta;
    if (beta == 1) {
        orientation_ = 0;
        reach_ = std::numeric_limits<std::int64_t>::max();
    } else {
        orientation_ = beta > 1 ? 1 : -1;
        const double lb = log_rational(beta);
        // Lookups never go past the cap, so a failed lookup is where the cap check happens.
        reach_ = static_cast<std::int64_t>(std::min(700.0 / std::abs(lb), static_cast<double>(1 << 20)));
        reach_ = std::min(reach_, cap_);
        power_table_.resize(static_cast<std::size_t>(2 * reach_ + 1));
        for (std::int64_t k = -reach_; k <= reach_; ++k) {
            power_table_[static_cast<std::size_t>(k + reach_)] = std::exp(static_cast<double>(k) * lb);
        }
    }
    for (const auto& m : kernel.moves) move_coeffs_.insert(move_coeffs_.end(), m.exponent_coeffs.begin(), m.exponent_coeffs.end());
    if (const auto* s = std::get_if<ExpSum>(&f.form)) {
        for (const auto& t : s->terms) {
            if (t.coeffs.size() != kernel.dimension) throw std::invalid_argument("exp-sum dimension mismatch");
            term_coeffs_.insert(term_coeffs_.end(), t.coeffs.begin(), t.coeffs.end());
            std::vector<std::int64_t> shifts;
            for (const auto& m : kernel.moves) {
                std::int64_t d = 0;
                for (std::size_t i = 0; i < m.delta.size(); ++i) d += t.coeffs[i] * m.delta[i];
                shifts.push_back(d);
            }
            term_shift_.push_back(std::move(shifts));
        }
    }
    exps_.resize(kernel.moves.size());
    scratch_.resize(kernel.dimension);
}

std::optional<double> DriftEvaluator::f_double(std::span<const std::int64_t> x, std::size_t move) {
    const bool shifted = move < kernel_.moves.size();
    auto coord = [&](std::size_t i) { return x[i] + (shifted ? kernel_.moves[move].delta[i] : 0); };
    switch (f_.form.index()) {
        case 0: {  // ExpSum, term_base_ already filled for x
            double total = 0.0;
            for (std::size_t t = 0; t < term_base_.size(); ++t) {
                const auto e = term_base_[t] + (shifted ? term_shift_[t][move] : 0);
                if (orientation_ == 0) check_cap(e, cap_);
                const auto p = power_double(e);
                if (!p) {
                    check_cap(e, cap_);
                    return std::nullopt;
                }
                total += *p;
            }
            return total;
        }
        case 1: {
            double total = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                const auto c = static_cast<double>(coord(i));
                total += c * c;
            }
            return total;
        }
        case 2: {
            const auto& m = std::get<MaxAffine>(f_.form);
            double best = -std::numeric_limits<double>::infinity();
            for (const auto& form : m.forms) {
                double v = form.offset.get_d();
                for (std::size_t i = 0; i < x.size(); ++i) v += form.coeffs[i].get_d() * static_cast<double>(coord(i));
                best = std::max(best, v);
            }
            return best;
        }
        case 3: {
            std::int64_t mx = 0;
            for (std::size_t i = 0; i < x.size(); ++i) mx = std::max(mx, std::abs(coord(i)));
            return mx == 0 ? 1.0 : 1.0 / static_cast<double>(mx);
        }
    }
    return std::nullopt;
}

std::optional<double> DriftEvaluator::value_double(std::span<const std::int64_t> x) {
    if (const auto* s = std::get_if<ExpSum>(&f_.form)) {
        term_base_.resize(s->terms.size());
        const std::size_t d = x.size();
        for (std::size_t t = 0; t < s->terms.size(); ++t) {
            term_base_[t] = dot(&term_coeffs_[t * d], x) + s->terms[t].offset;
        }
    }
    return f_double(x, kernel_.moves.size());
}

Rational DriftEvaluator::value_exact(std::span<const std::int64_t> x) { return eval(f_, x, powers_, cap_); }

double DriftEvaluator::value_slack(std::span<const std::int64_t> x, double v) const {
    // Table powers carry about 2e-13 relative error and the other forms one
    // rounding per operation, so 1e-11 relative is a safe margin. Max-affine
    // values can cancel to zero, so their slack scales with the inputs.
    if (std::holds_alternative<MaxAffine>(f_.form)) {
        double scale = 1.0;
        for (auto c : x) scale += std::abs(static_cast<double>(c));
        return kGuard * (std::abs(v) + scale);
    }
    return kValueGuard * std::abs(v) + 1e-300;
}

DriftEvaluator::Sign DriftEvaluator::filtered_compare(std::span<const std::int64_t> x, double threshold) {
    last_value_.reset();
    const std::size_t moves = kernel_.moves.size();
    std::int64_t ref = 0;
    for (std::size_t k = 0; k < moves; ++k) {
        exps_[k] = dot(&move_coeffs_[k * x.size()], x) + kernel_.moves[k].exponent_offset;
        check_cap(exps_[k], cap_);
        if (k == 0 || (orientation_ > 0 ? exps_[k] > ref : exps_[k] < ref)) ref = exps_[k];
    }
    last_value_.reset();
    const auto fx = value_double(x);
    last_value_ = fx;
    if (!fx) return Sign::Unknown;
    double num = 0.0, mag = 0.0, total = 0.0;
    for (std::size_t k = 0; k < moves; ++k) {
        const auto w = power_double(exps_[k] - ref);
        if (!w) return Sign::Unknown;
        const auto fk = f_double(x, k);
        if (!fk) return Sign::Unknown;
        num += *w * (*fk - *fx);
        mag += *w * (std::abs(*fk) + std::abs(*fx));
        total += *w;
    }
    const double d = num / total;
    const double tol = kGuard * (mag / total + std::abs(threshold)) + 1e-300;
    if (!std::isfinite(d) || !std::isfinite(tol)) return Sign::Unknown;
    if (d - threshold > tol) return Sign::Above;
    if (d - threshold < -tol) return Sign::AtOrBelow;
    return Sign::Unknown;
}

Rational DriftEvaluator::exact(std::span<const std::int64_t> x) {
    const std::size_t moves = kernel_.moves.size();
    std::int64_t lowest = 0;
    for (std::size_t k = 0; k < moves; ++k) {
        exps_[k] = kernel_.moves[k].exponent(x);
        check_cap(exps_[k], cap_);
        if (k == 0 || exps_[k] < lowest) lowest = exps_[k];
    }
    const Rational fx = eval(f_, x, powers_, cap_);
    Rational num = 0, total = 0;
    for (std::size_t k = 0; k < moves; ++k) {
        const auto& d = kernel_.moves[k].delta;
        for (std::size_t i = 0; i < x.size(); ++i) scratch_[i] = x[i] + d[i];
        const auto& w = powers_(exps_[k] - lowest);
        num += w * (eval(f_, scratch_, powers_, cap_) - fx);
        total += w;
    }
    return num / total;
}

// ---------------------------------------------------------------------------
// Scanning

namespace {

/// Double-precision bracket on the minimum of f over the states offered:
/// each one has f(x) within `slack` of its double value, or is flagged.
struct MinBracket {
    double lower = std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    bool unknown = false;

    void offer(std::optional<double> fd, double slack) {
        if (!fd) {
            unknown = true;
            return;
        }
        lower = std::min(lower, *fd - slack);
        upper = std::min(upper, *fd + slack);
    }
    void merge(const MinBracket& other) {
        lower = std::min(lower, other.lower);
        upper = std::min(upper, other.upper);
        unknown = unknown || other.unknown;
    }
};

/// Exact minimum; the first state offered wins ties.
struct ExactMin {
    std::optional<Rational> best;
    std::vector<std::int64_t> argmin;

    void offer(Rational v, std::span<const std::int64_t> x) {
        if (!best || v < *best) {
            best = std::move(v);
            argmin.assign(x.begin(), x.end());
        }
    }
    void merge(const ExactMin& other) {
        if (other.best && (!best || *other.best < *best)) {
            best = other.best;
            argmin = other.argmin;
        }
    }
};

struct ChunkResult {
    std::uint64_t scanned = 0;
    std::uint64_t exact = 0;
    std::vector<Violation> violations;
    MinBracket inside;  // over M
    MinBracket outside;  // over region \ M
    ExactMin inside_exact;
    ExactMin outside_exact;
};

/// Calls visit(x) for every point of the region whose first coordinate is
/// `first`.
template <class Visit>
void for_each_in_slice(const Region& region, std::int64_t first, std::vector<std::int64_t>& x, Visit&& visit) {
    const auto& box = region.box;
    const std::size_t d = box.dimension();
    const std::size_t free = region.sum_zero ? d - 1 : d;
    x.assign(d, 0);
    x[0] = first;
    for (std::size_t i = 1; i < free; ++i) x[i] = box.lo[i];
    for (;;) {
        bool ok = true;
        if (region.sum_zero) {
            std::int64_t s = 0;
            for (std::size_t i = 0; i + 1 < d; ++i) s += x[i];
            x[d - 1] = -s;
            ok = x[d - 1] >= box.lo[d - 1] && x[d - 1] <= box.hi[d - 1];
        }
        if (ok && region.band) {
            const auto n = norm(x, region.band->norm);
            ok = n >= region.band->min && n <= region.band->max;
        }
        if (ok) visit(std::span<const std::int64_t>(x));
        std::size_t i = 1;
        for (; i < free; ++i) {
            if (++x[i] <= box.hi[i]) break;
            x[i] = box.lo[i];
        }
        if (i >= free) return;
    }
}

ScanReport run_scan(const LinearKernel& kernel, const LyapunovFn& f, const Region& region, const Rational& threshold,
                    const ExceptionalSet& exceptional, const ScanOptions& options, bool track_minima) {
    if (region.box.dimension() != kernel.dimension) throw std::invalid_argument("region dimension mismatch");
    if (kernel.process == Process::Eta && !region.sum_zero) {
        throw std::invalid_argument("eta scans must be restricted to the sum-zero hyperplane");
    }
    const auto first_lo = region.box.lo[0];
    const auto chunks = static_cast<std::size_t>(region.box.hi[0] - first_lo + 1);
    std::vector<ChunkResult> results(chunks);
    const double threshold_d = threshold.get_d();

    parallel_for(
        chunks,
        [&](std::size_t c) {
            DriftEvaluator eval(kernel, f, options.cap);
            ChunkResult& out = results[c];
            std::vector<std::int64_t> x;
            for_each_in_slice(region, first_lo + static_cast<std::int64_t>(c), x, [&](std::span<const std::int64_t> p) {
                ++out.scanned;
                if (exceptional.contains(p)) {
                    if (track_minima) {
                        const auto fd = options.float_filter ? eval.value_double(p) : std::nullopt;
                        out.inside.offer(fd, fd ? eval.value_slack(p, *fd) : 0.0);
                    }
                    return;
                }
                auto sign = options.float_filter ? eval.filtered_compare(p, threshold_d) : DriftEvaluator::Sign::Unknown;
                if (track_minima) {
                    const auto fd = options.float_filter ? eval.last_value() : std::nullopt;
                    out.outside.offer(fd, fd ? eval.value_slack(p, *fd) : 0.0);
                }
                if (sign == DriftEvaluator::Sign::AtOrBelow) return;
                ++out.exact;
                auto value = eval.exact(p);
                if (value > threshold) out.violations.push_back({std::vector<std::int64_t>(p.begin(), p.end()), value});
            });
        },
        options.workers);

    if (track_minima) {
        // Any state whose lower bound exceeds the smallest upper bound cannot
        // be a minimiser, so only the remaining ones are evaluated exactly.
        MinBracket inside, outside;
        for (const auto& r : results) {
            inside.merge(r.inside);
            outside.merge(r.outside);
        }
        auto relevant = [](const MinBracket& chunk, const MinBracket& all) {
            return chunk.unknown || chunk.lower <= all.upper;
        };
        std::vector<std::size_t> revisit;
        for (std::size_t c = 0; c < chunks; ++c) {
            if (relevant(results[c].inside, inside) || relevant(results[c].outside, outside)) revisit.push_back(c);
        }
        parallel_for(
            revisit.size(),
            [&](std::size_t i) {
                const std::size_t c = revisit[i];
                DriftEvaluator eval(kernel, f, options.cap);
                ChunkResult& out = results[c];
                std::vector<std::int64_t> x;
                for_each_in_slice(region, first_lo + static_cast<std::int64_t>(c), x, [&](std::span<const std::int64_t> p) {
                    const bool in_m = exceptional.contains(p);
                    const auto& bound = in_m ? inside : outside;
                    const auto fd = options.float_filter ? eval.value_double(p) : std::nullopt;
                    if (fd && *fd - eval.value_slack(p, *fd) > bound.upper) return;
                    ++out.exact;
                    (in_m ? out.inside_exact : out.outside_exact).offer(eval.value_exact(p), p);
                });
            },
            options.workers);
    }

    ScanReport report;
    report.function = f.name;
    report.process = std::string(to_string(kernel.process));
    report.region = region.describe();
    report.exceptional = exceptional.description;
    report.threshold = threshold;
    ExactMin inside, outside;
    for (auto& r : results) {
        report.states_scanned += r.scanned;
        report.exact_evaluations += r.exact;
        for (auto& v : r.violations) {
            report.max_violation_linf = std::max(report.max_violation_linf, norm(v.state, Norm::Max));
            report.max_violation_l1 = std::max(report.max_violation_l1, norm(v.state, Norm::L1));
            report.violations.push_back(std::move(v));
        }
        inside.merge(r.inside_exact);
        outside.merge(r.outside_exact);
    }
    if (track_minima) {
        if (inside.best) report.inf_over_exceptional = inside.best;
        if (outside.best) {
            report.witness = outside.argmin;
            report.witness_value = outside.best;
        }
        const bool pos_in = !inside.best || *inside.best > 0;
        const bool pos_out = !outside.best || *outside.best > 0;
        report.positive_on_region = pos_in && pos_out;
    }
    report.verdict = report.violations.empty() ? Verdict::Pass : Verdict::Fail;
    return report;
}

}  // namespace

ScanReport scan_drift(const LinearKernel& kernel, const LyapunovFn& f, const Region& region, const Rational& threshold,
                      const ExceptionalSet& exceptional, const ScanOptions& options) {
    auto report = run_scan(kernel, f, region, threshold, exceptional, options, false);
    report.kind = "drift";
    return report;
}

ScanReport foster_ergodicity_scan(const LinearKernel& kernel, const LyapunovFn& f, const Region& region,
                                  const Rational& epsilon, const ScanOptions& options) {
    if (epsilon <= 0) throw std::invalid_argument("epsilon must be positive");
    auto report = run_scan(kernel, f, region, -epsilon, ExceptionalSet::none(), options, false);
    report.kind = "ergodicity";
    if (region.band) {
        report.verdict = report.violations.empty() ? Verdict::Pass : Verdict::Fail;
        report.note = "band must be violation-free";
    } else {
        const bool touches = std::any_of(report.violations.begin(), report.violations.end(),
                                         [&](const Violation& v) { return region.box.on_boundary(v.state); });
        report.verdict = touches ? Verdict::Fail : Verdict::Pass;
        report.note = "violations must stay off the box boundary; geometry only, not a proof of finiteness";
    }
    return report;
}

ScanReport foster_transience_scan(const LinearKernel& kernel, const LyapunovFn& f, const ExceptionalSet& exceptional,
                                  const Region& region, const ScanOptions& options) {
    auto report = run_scan(kernel, f, region, Rational(0), exceptional, options, true);
    report.kind = "transience";
    bool witness_ok = false;
    if (report.witness_value) {
        witness_ok = !report.inf_over_exceptional || *report.witness_value < *report.inf_over_exceptional;
    }
    report.verdict =
        report.violations.empty() && witness_ok && report.positive_on_region ? Verdict::Pass : Verdict::Fail;
    report.note = "inf over M is taken over M intersected with the scanned region (lower-bound certificate)";
    return report;
}

AnnulusSearch find_violation_free_annulus(const LinearKernel& kernel, const LyapunovFn& f, const Rational& epsilon,
                                          std::int64_t width, std::int64_t search_radius,
                                          const ScanOptions& options) {
    AnnulusSearch out;
    out.width = width;
    out.search_radius = search_radius;
    const auto whole = Region{Box::cube(kernel.dimension, search_radius), kernel.process == Process::Eta, std::nullopt};
    const auto full = run_scan(kernel, f, whole, -epsilon, ExceptionalSet::none(), options, false);
    std::vector<bool> dirty(static_cast<std::size_t>(search_radius + 1), false);
    for (const auto& v : full.violations) dirty[static_cast<std::size_t>(norm(v.state, Norm::Max))] = true;
    for (std::int64_t r = 0; r + width <= search_radius; ++r) {
        bool clean = true;
        for (std::int64_t s = r; s <= r + width && clean; ++s) clean = !dirty[static_cast<std::size_t>(s)];
        if (clean) {
            out.radius = r;
            break;
        }
    }
    if (out.radius >= 0) {
        Region band = whole;
        band.box = Box::cube(kernel.dimension, out.radius + width);
        band.band = NormBand{Norm::Max, out.radius, out.radius + width};
        out.band_report = foster_ergodicity_scan(kernel, f, band, epsilon, options);
    } else {
        out.band_report = full;
        out.band_report.kind = "ergodicity";
        out.band_report.verdict = Verdict::Fail;
        out.band_report.note = "no violation-free band of this width inside the search cube";
    }
    return out;
}

}  // namespace csa
