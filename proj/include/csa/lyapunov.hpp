#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "csa/derived.hpp"
#include "csa/rational.hpp"

namespace csa {

/// beta^{<coeffs, x> + offset}
struct ExpTerm {
    std::vector<std::int64_t> coeffs;
    std::int64_t offset = 0;

    std::int64_t exponent(std::span<const std::int64_t> x) const;
};

struct ExpSum {
    std::vector<ExpTerm> terms;
};

/// sum_i x_i^2
struct Quadratic {};

struct AffineForm {
    std::vector<Rational> coeffs;
    Rational offset = 0;
};

struct MaxAffine {
    std::vector<AffineForm> forms;
};

/// 1 at the origin, 1 / max_i |x_i| elsewhere.
struct ReciprocalMax {};

struct LyapunovFn {
    std::string name;
    std::variant<ExpSum, Quadratic, MaxAffine, ReciprocalMax> form;
};

LyapunovFn quadratic();
LyapunovFn reciprocal_max();

/// Planar certificate for the asymmetric (A2, N=2) difference chain with beta < 1:
///   beta^{1-x1-x2} + beta^{-3x1+x2} + beta^{3x1-4x2} + beta^{x1+4x2}
LyapunovFn exp_sum_a2();

/// Piecewise-linear alternative for the same chain:
///   max{(x1+x2)/10, (8x1-3x2)/25, (8x1-7x2)/20, (-x1-3x2)/7}
LyapunovFn max_affine_a2();

/// Transience certificate for the potential-difference chain (A3, beta > 1).
/// N = 3: beta^{-y2}. N >= 4: beta^{-y1} + sum_{k=4..N} beta^{-y2+yk}.
LyapunovFn v_gap_function(std::size_t dimension);

/// Name lookup used by the CLI: quadratic, reciprocal-max, exp-sum-a2,
/// max-affine-a2, v-gap (needs the dimension).
LyapunovFn lyapunov_by_name(const std::string& name, std::size_t dimension);

Rational eval(const LyapunovFn& f, std::span<const std::int64_t> x, const Rational& beta,
              std::int64_t cap = kDefaultExponentCap);
Rational eval(const LyapunovFn& f, std::span<const std::int64_t> x, PowerTable& powers,
              std::int64_t cap = kDefaultExponentCap);

struct Contribution {
    std::size_t move;
    Rational probability;
    Rational delta_f;  // f(x') - f(x)
};

struct DriftReport {
    std::vector<std::int64_t> state;
    Rational drift;
    std::vector<Contribution> contributions;
};

/// E[f(X_{t+1}) - f(X_t) | X_t = x], exact over every outcome of the kernel.
/// Throws ExponentCapError instead of falling back to floating point.
DriftReport drift(const LinearKernel& kernel, const LyapunovFn& f, std::span<const std::int64_t> x,
                  std::int64_t cap = kDefaultExponentCap);
DriftReport drift(const ModelSpec& spec, Process process, const LyapunovFn& f,
                  std::span<const std::int64_t> x, std::int64_t cap = kDefaultExponentCap);

/// Quadratic drift of the A1 difference chain in closed form:
///   sum_i (2 x_i (beta^{x_i} - 1) + 1 + beta^{x_i}) / (1 + sum_i beta^{x_i})
Rational quadratic_drift_closed_form(const ModelSpec& spec, std::span<const std::int64_t> x);

/// The polynomial A(u, v) whose sign controls the exp_sum_a2 drift, term
/// by term as displayed in the closed-form identity.
Rational a_polynomial(const Rational& beta, const Rational& u, const Rational& v);

/// Right side of the exp_sum_a2 drift identity at x with u = beta^{x1},
/// v = beta^{x2}:
///   -(1 - beta) A(u,v) / (beta^5 v^4 u^3 (u + v + uv))
/// The last factor is the partition function of the A2 difference kernel.
Rational exp_sum_identity_rhs(const Rational& beta, std::span<const std::int64_t> x);

/// (drift + 1 - beta) - rhs, computed with drift() on the A2, N=2 chain.
/// Zero wherever the identity holds.
Rational exp_sum_identity_residual(const Rational& beta, std::span<const std::int64_t> x);

}  // namespace csa
