#ifndef ATTRITION_RATIONAL_HPP
#define ATTRITION_RATIONAL_HPP

#include <gmpxx.h>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace attrition {

// Exact rational number. All probabilities, payoffs and chain solves in this
// library are carried as rationals end to end; doubles appear only in output
// formatting and in Monte Carlo standard errors.
using Rat = mpq_class;

inline Rat ratio(long num, long den) {
    if (den == 0) throw std::invalid_argument("ratio: zero denominator");
    Rat r(num, den);
    r.canonicalize();
    return r;
}

/// Parses "3", "-3", "2/7", "0.125" (decimal expansions are exact) into a
/// rational. Throws std::invalid_argument on anything else.
inline Rat parse_rational(const std::string& text) {
    const auto bad = [&] {
        return std::invalid_argument("not a rational literal: '" + text + "'");
    };
    if (text.empty()) throw bad();

    std::string s = text;
    bool negative = false;
    if (s[0] == '+' || s[0] == '-') {
        negative = s[0] == '-';
        s.erase(0, 1);
    }
    if (s.empty()) throw bad();

    const auto digits_only = [](const std::string& t) {
        if (t.empty()) return false;
        for (char c : t)
            if (c < '0' || c > '9') return false;
        return true;
    };

    Rat value;
    if (auto slash = s.find('/'); slash != std::string::npos) {
        const std::string num = s.substr(0, slash);
        const std::string den = s.substr(slash + 1);
        if (!digits_only(num) || !digits_only(den)) throw bad();
        mpz_class d(den);
        if (d == 0) throw std::invalid_argument("zero denominator in '" + text + "'");
        value = Rat(mpz_class(num), d);
        value.canonicalize();
    } else if (auto dot = s.find('.'); dot != std::string::npos) {
        const std::string whole = s.substr(0, dot);
        const std::string frac = s.substr(dot + 1);
        if ((!whole.empty() && !digits_only(whole)) || !digits_only(frac)) throw bad();
        mpz_class scale = 1;
        for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
        value = Rat(mpz_class(whole.empty() ? "0" : whole) * scale + mpz_class(frac), scale);
        value.canonicalize();
    } else {
        if (!digits_only(s)) throw bad();
        value = Rat(mpz_class(s));
    }
    return negative ? Rat(-value) : value;
}

/// Integer power with negative exponents allowed (base must be nonzero then).
inline Rat rat_pow(const Rat& base, long exp) {
    if (exp < 0) {
        if (base == 0) throw std::invalid_argument("rat_pow: 0 to a negative power");
        return 1 / rat_pow(base, -exp);
    }
    Rat acc = 1, b = base;
    for (long e = exp; e > 0; e >>= 1) {
        if (e & 1) acc *= b;
        b *= b;
    }
    return acc;
}

/// Nearest double, ties to even. mpq_get_d truncates toward zero, which
/// shifts printed approximations like 2/5 off the value people expect, so the
/// rounding is done by hand on the integer quotient.
inline double to_double(const Rat& r) {
    const mpz_class& num = r.get_num();
    const mpz_class& den = r.get_den();
    if (num == 0) return 0.0;
    const bool negative = num < 0;
    const mpz_class n = abs(num);

    const long nbits = static_cast<long>(mpz_sizeinbase(n.get_mpz_t(), 2));
    const long dbits = static_cast<long>(mpz_sizeinbase(den.get_mpz_t(), 2));
    // Scale so q = floor(n * 2^shift / den) has 53 or 54 bits; the exact
    // remainder then decides the rounding.
    const long shift = 53 - (nbits - dbits);
    mpz_class nn = n, dd = den;
    if (shift >= 0)
        nn <<= static_cast<unsigned long>(shift);
    else
        dd <<= static_cast<unsigned long>(-shift);
    mpz_class q, rem;
    mpz_fdiv_qr(q.get_mpz_t(), rem.get_mpz_t(), nn.get_mpz_t(), dd.get_mpz_t());

    long exp = -shift;
    if (mpz_sizeinbase(q.get_mpz_t(), 2) > 53) {
        // 54 bits: fold the dropped low bit into the rounding decision.
        const bool low = mpz_odd_p(q.get_mpz_t()) != 0;
        q >>= 1;
        exp += 1;
        if (low && (rem > 0 || mpz_odd_p(q.get_mpz_t()))) q += 1;
    } else {
        const mpz_class twice = 2 * rem;
        if (twice > dd || (twice == dd && mpz_odd_p(q.get_mpz_t()))) q += 1;
    }
    const double mag = std::ldexp(q.get_d(), static_cast<int>(exp));
    return negative ? -mag : mag;
}

/// Canonical "num/den" (or "num" when den == 1) form, round-trippable through
/// parse_rational.
inline std::string to_string(const Rat& r) { return r.get_str(); }

inline bool is_probability(const Rat& r) { return r >= 0 && r <= 1; }

inline void require_probability(const Rat& r, const char* what) {
    if (!is_probability(r))
        throw std::invalid_argument(std::string(what) + " must lie in [0,1], got " + to_string(r));
}

}  // namespace attrition

#endif
