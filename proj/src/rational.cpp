#include "csa/rational.hpp"

#include <cctype>
#include <stdexcept>

namespace csa {

namespace {

bool is_integer_literal(std::string_view s) {
    if (s.empty()) return false;
    std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    }
    return true;
}

}  // namespace

Rational parse_rational(std::string_view text) {
    const auto slash = text.find('/');
    const auto num = text.substr(0, slash);
    const auto den = slash == std::string_view::npos ? std::string_view{"1"} : text.substr(slash + 1);
    if (!is_integer_literal(num) || !is_integer_literal(den) || den[0] == '-' || den[0] == '+') {
        throw std::invalid_argument("not a rational literal: '" + std::string(text) + "'");
    }
    mpz_class n(std::string(num[0] == '+' ? num.substr(1) : num), 10);
    mpz_class d(std::string(den), 10);
    if (d == 0) throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
    Rational r(n, d);
    r.canonicalize();
    return r;
}

Rational pow(const Rational& base, std::int64_t exponent) {
    if (exponent == 0) return Rational(1);
    if (base == 0) {
        if (exponent < 0) throw std::domain_error("negative power of zero");
        return Rational(0);
    }
    const auto e = static_cast<unsigned long>(exponent < 0 ? -exponent : exponent);
    mpz_class num, den;
    mpz_pow_ui(num.get_mpz_t(), base.get_num_mpz_t(), e);
    mpz_pow_ui(den.get_mpz_t(), base.get_den_mpz_t(), e);
    Rational r = exponent > 0 ? Rational(num, den) : Rational(den, num);
    r.canonicalize();
    return r;
}

std::string to_string(const Rational& value) { return value.get_str(); }

PowerTable::PowerTable(Rational base) : base_(std::move(base)) {
    if (base_ <= 0) throw std::invalid_argument("PowerTable base must be positive");
    inverse_ = 1 / base_;
    nonnegative_.push_back(Rational(1));
}

const Rational& PowerTable::operator()(std::int64_t exponent) {
    if (exponent >= 0) {
        const auto k = static_cast<std::size_t>(exponent);
        while (nonnegative_.size() <= k) nonnegative_.push_back(nonnegative_.back() * base_);
        return nonnegative_[k];
    }
    const auto k = static_cast<std::size_t>(-exponent) - 1;
    if (negative_.empty()) negative_.push_back(inverse_);
    while (negative_.size() <= k) negative_.push_back(negative_.back() * inverse_);
    return negative_[k];
}

}  // namespace csa
