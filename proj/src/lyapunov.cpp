#include "csa/lyapunov.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>

namespace csa {

std::int64_t ExpTerm::exponent(std::span<const std::int64_t> x) const {
    std::int64_t e = offset;
    for (std::size_t i = 0; i < x.size(); ++i) e += coeffs[i] * x[i];
    return e;
}

LyapunovFn quadratic() { return {"quadratic", Quadratic{}}; }

LyapunovFn reciprocal_max() { return {"reciprocal-max", ReciprocalMax{}}; }

LyapunovFn exp_sum_a2() {
    ExpSum s;
    s.terms = {
        {{-1, -1}, 1},
        {{-3, 1}, 0},
        {{3, -4}, 0},
        {{1, 4}, 0},
    };
    return {"exp-sum-a2", s};
}

LyapunovFn max_affine_a2() {
    auto form = [](long a, long b, long den) {
        return AffineForm{{Rational(mpz_class(a), mpz_class(den)), Rational(mpz_class(b), mpz_class(den))}, 0};
    };
    MaxAffine m;
    m.forms = {form(1, 1, 10), form(8, -3, 25), form(8, -7, 20), form(-1, -3, 7)};
    for (auto& f : m.forms) {
        for (auto& c : f.coeffs) c.canonicalize();
    }
    return {"max-affine-a2", m};
}

LyapunovFn v_gap_function(std::size_t dimension) {
    if (dimension < 3) throw std::invalid_argument("v-gap function needs N >= 3");
    ExpSum s;
    auto unit = [&](std::size_t i, std::int64_t sign) {
        std::vector<std::int64_t> c(dimension, 0);
        c[i] = sign;
        return c;
    };
    if (dimension == 3) {
        s.terms.push_back({unit(1, -1), 0});
    } else {
        s.terms.push_back({unit(0, -1), 0});
        for (std::size_t k = 3; k < dimension; ++k) {
            auto c = unit(1, -1);
            c[k] = 1;
            s.terms.push_back({c, 0});
        }
    }
    return {"v-gap", s};
}

LyapunovFn lyapunov_by_name(const std::string& name, std::size_t dimension) {
    if (name == "quadratic") return quadratic();
    if (name == "reciprocal-max") return reciprocal_max();
    if (name == "exp-sum-a2") return exp_sum_a2();
    if (name == "max-affine-a2") return max_affine_a2();
    if (name == "v-gap") return v_gap_function(dimension);
    throw std::invalid_argument("unknown Lyapunov function '" + name + "'");
}

namespace {

void check_cap(std::int64_t e, std::int64_t cap) {
    if (e > cap || e < -cap) {
        throw ExponentCapError("exponent " + std::to_string(e) + " exceeds the exact-mode cap " + std::to_string(cap));
    }
}

struct Evaluator {
    std::span<const std::int64_t> x;
    PowerTable& powers;
    std::int64_t cap;

    Rational operator()(const ExpSum& s) const {
        Rational total = 0;
        for (const auto& t : s.terms) {
            if (t.coeffs.size() != x.size()) throw std::invalid_argument("exp-sum dimension mismatch");
            const auto e = t.exponent(x);
            check_cap(e, cap);
            total += powers(e);
        }
        return total;
    }
    Rational operator()(const Quadratic&) const {
        Rational total = 0;
        for (auto v : x) total += Rational(v) * v;
        return total;
    }
    Rational operator()(const MaxAffine& m) const {
        if (m.forms.empty()) throw std::invalid_argument("max-affine function without forms");
        Rational best;
        for (std::size_t k = 0; k < m.forms.size(); ++k) {
            const auto& form = m.forms[k];
            if (form.coeffs.size() != x.size()) throw std::invalid_argument("max-affine dimension mismatch");
            Rational value = form.offset;
            for (std::size_t i = 0; i < x.size(); ++i) value += form.coeffs[i] * x[i];
            if (k == 0 || value > best) best = value;
        }
        return best;
    }
    Rational operator()(const ReciprocalMax&) const {
        std::int64_t m = 0;
        for (auto v : x) m = std::max(m, std::abs(v));
        return m == 0 ? Rational(1) : Rational(mpz_class(1), mpz_class(static_cast<long>(m)));
    }
};

}  // namespace

Rational eval(const LyapunovFn& f, std::span<const std::int64_t> x, PowerTable& powers, std::int64_t cap) {
    return std::visit(Evaluator{x, powers, cap}, f.form);
}

Rational eval(const LyapunovFn& f, std::span<const std::int64_t> x, const Rational& beta, std::int64_t cap) {
    PowerTable powers(beta);
    return eval(f, x, powers, cap);
}

DriftReport drift(const LinearKernel& kernel, const LyapunovFn& f, std::span<const std::int64_t> x,
                  std::int64_t cap) {
    PowerTable powers(kernel.spec.beta);
    const auto e = kernel.exponents(x);
    for (auto v : e) check_cap(v, cap);
    const auto lowest = *std::min_element(e.begin(), e.end());

    DriftReport report;
    report.state.assign(x.begin(), x.end());
    const Rational fx = eval(f, x, powers, cap);
    Rational z = 0;
    for (std::size_t k = 0; k < kernel.moves.size(); ++k) {
        const auto next = kernel.apply(x, k);
        report.contributions.push_back({k, powers(e[k] - lowest), eval(f, next, powers, cap) - fx});
        z += report.contributions.back().probability;
    }
    report.drift = 0;
    for (auto& c : report.contributions) {
        c.probability /= z;
        report.drift += c.probability * c.delta_f;
    }
    return report;
}

DriftReport drift(const ModelSpec& spec, Process process, const LyapunovFn& f, std::span<const std::int64_t> x,
                  std::int64_t cap) {
    return drift(make_kernel(spec, process), f, x, cap);
}

Rational quadratic_drift_closed_form(const ModelSpec& spec, std::span<const std::int64_t> x) {
    if (spec.mode != Interaction::A1) throw ModeError("closed-form quadratic drift is for mode A1");
    if (x.size() != spec.dimension()) throw std::invalid_argument("state dimension mismatch");
    PowerTable powers(spec.beta);
    Rational numerator = 0;
    Rational denominator = 1;
    for (auto xi : x) {
        const auto& b = powers(xi);
        numerator += 2 * Rational(xi) * (b - 1) + 1 + b;
        denominator += b;
    }
    return numerator / denominator;
}

Rational a_polynomial(const Rational& beta, const Rational& u, const Rational& v) {
    PowerTable b(beta);
    PowerTable up(u);
    PowerTable vp(v);
    Rational a = 0;
    a += (b(7) + b(6)) * vp(3) * up(3);
    a += (b(6) + b(5)) * vp(5) * u;
    a += (b(8) + b(5) + b(6) + b(7)) * vp(9) * up(4);
    a += ((b(7) + b(5) + b(6)) * u - (beta + b(2) + b(3) + b(4))) * v * up(6);
    a += vp(6) * b(5);
    a += b(5) * up(7);
    a += b(5) * vp(9) * up(5);
    a -= b(5) * vp(4) * up(3);
    a -= (1 + up(2) + u * v + up(2) * v) * up(2) * vp(4) * b(5);
    a -= (1 + beta + b(2) + b(3) + b(4)) * up(5) * vp(8);
    a -= (b(2) + b(4) + b(3)) * u * vp(6);
    return a;
}

Rational exp_sum_identity_rhs(const Rational& beta, std::span<const std::int64_t> x) {
    if (x.size() != 2) throw std::invalid_argument("identity is planar");
    const Rational u = pow(beta, x[0]);
    const Rational v = pow(beta, x[1]);
    const Rational partition = u + v + u * v;
    return -(1 - beta) * a_polynomial(beta, u, v) / (pow(beta, 5) * pow(v, 4) * pow(u, 3) * partition);
}

Rational exp_sum_identity_residual(const Rational& beta, std::span<const std::int64_t> x) {
    const auto spec = ModelSpec::make(3, beta, Interaction::A2);
    const auto report = drift(spec, Process::Zeta, exp_sum_a2(), x);
    return (report.drift + 1 - beta) - exp_sum_identity_rhs(beta, x);
}

}  // namespace csa
