#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace csa {

using Rational = mpq_class;

/// Parses "p/q" or "p" into a canonical rational. Throws std::invalid_argument
/// on anything else (decimals are rejected on purpose: "0.9" is ambiguous).
Rational parse_rational(std::string_view text);

/// Exact integer power; negative exponents require a nonzero base.
Rational pow(const Rational& base, std::int64_t exponent);

std::string to_string(const Rational& value);

/// Memoized exact powers base^k for a fixed base. References stay valid as the
/// table grows. Not thread-safe; keep one per worker.
class PowerTable {
public:
    explicit PowerTable(Rational base);

    const Rational& operator()(std::int64_t exponent);
    const Rational& base() const { return base_; }

private:
    Rational base_;
    Rational inverse_;
    std::deque<Rational> nonnegative_;  // base^0, base^1, ...
    std::deque<Rational> negative_;     // base^-1, base^-2, ...
};

}  // namespace csa
