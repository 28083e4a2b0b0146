#include "dirac/rational.hpp"

#include <cctype>
#include <ostream>

#include "dirac/error.hpp"

namespace dirac {

Rational::Rational(long n, long d) : Rational(mpz_class(n), mpz_class(d)) {}

Rational::Rational(const mpz_class& n, const mpz_class& d) {
    if (d == 0) throw DenominatorVanishes("rational with zero denominator");
    v_ = mpq_class(n, d);
    v_.canonicalize();
}

Rational& Rational::operator/=(const Rational& o) {
    if (o.is_zero()) throw DenominatorVanishes("division by zero rational");
    v_ /= o.v_;
    return *this;
}

Rational Rational::pow(unsigned e) const {
    mpz_class n, d;
    mpz_pow_ui(n.get_mpz_t(), v_.get_num_mpz_t(), e);
    mpz_pow_ui(d.get_mpz_t(), v_.get_den_mpz_t(), e);
    return Rational(n, d);
}

Rational Rational::parse(std::string_view text) {
    auto is_int = [](std::string_view s) {
        std::size_t i = 0;
        if (!s.empty() && (s[0] == '-' || s[0] == '+')) ++i;
        if (i == s.size()) return false;
        for (; i < s.size(); ++i)
            if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
        return true;
    };
    auto trim = [](std::string_view s) {
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
        return s;
    };
    text = trim(text);
    const auto slash = text.find('/');
    const std::string_view num = trim(text.substr(0, slash));
    const std::string_view den = slash == std::string_view::npos ? "1" : trim(text.substr(slash + 1));
    if (!is_int(num) || !is_int(den) || den[0] == '-')
        throw ParseError("malformed rational literal '" + std::string(text) + "'");
    std::string n(num), d(den);
    if (n[0] == '+') n.erase(0, 1);
    if (d[0] == '+') d.erase(0, 1);
    mpz_class zd(d);
    if (zd == 0) throw ParseError("rational literal with zero denominator");
    return Rational(mpz_class(n), zd);
}

std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

}  // namespace dirac
