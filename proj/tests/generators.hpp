#pragma once

// Fixed-seed random generators for property tests.

#include <random>

#include "superhodge/superforms.hpp"

namespace gen {

using namespace superhodge;

inline std::mt19937& rng()
{
    static std::mt19937 r(20240917u);
    return r;
}

inline int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng()); }

inline Scalar scalar(const Field& f, int bound = 5)
{
    int num = uniform(-bound, bound);
    if (f.is_rational() && uniform(0, 2) == 0) return f.from_rational(mpq_class(num, uniform(1, 4)));
    return f.from_int(num);
}

inline Scalar nonzero_scalar(const Field& f, int bound = 5)
{
    for (;;) {
        Scalar s = scalar(f, bound);
        if (!s.is_zero()) return s;
    }
}

inline SuperMonomial monomial(const ChartSignature& sig, int max_exp = 2)
{
    SuperMonomial m;
    for (int i = 0; i < sig.n_even(); ++i)
        m.exps[static_cast<std::size_t>(i)] = static_cast<std::int16_t>(uniform(sig.is_inverted(i) ? -max_exp : 0, max_exp));
    for (int j = 0; j < sig.n_odd(); ++j)
        if (uniform(0, 1)) m.odd |= 1u << j;
    return m;
}

inline SuperPolynomial polynomial(const SignaturePtr& sig, const Field& f, int terms = 3)
{
    SuperPolynomial p(sig, f);
    for (int t = 0; t < terms; ++t) p.add_term(monomial(*sig), scalar(f));
    return p;
}

/// Homogeneous-parity polynomial.
inline SuperPolynomial polynomial_of_parity(const SignaturePtr& sig, const Field& f, int parity, int terms = 3)
{
    SuperPolynomial p(sig, f);
    for (int t = 0; t < 8 * terms && static_cast<int>(p.terms().size()) < terms; ++t) {
        SuperMonomial m = monomial(*sig);
        if (m.parity() == parity) p.add_term(m, scalar(f));
    }
    return p;
}

inline FormMonomial form_monomial(const ChartSignature& sig, int max_dtheta = 2)
{
    FormMonomial m;
    m.fn = monomial(sig);
    for (int i = 0; i < sig.n_even(); ++i)
        if (uniform(0, 2) == 0) m.dx |= 1u << i;
    for (int j = 0; j < sig.n_odd(); ++j) m.dtheta[static_cast<std::size_t>(j)] = static_cast<std::uint8_t>(uniform(0, max_dtheta));
    return m;
}

inline FormElement form(const SignaturePtr& sig, const Field& f, int terms = 3)
{
    FormElement a(sig, f);
    for (int t = 0; t < terms; ++t) a.add_term(form_monomial(*sig), scalar(f));
    return a;
}

/// Homogeneous in degree and parity.
inline FormElement homogeneous_form(const SignaturePtr& sig, const Field& f, int degree, int parity, int terms = 3)
{
    FormElement a(sig, f);
    for (int t = 0; t < 200 && static_cast<int>(a.terms().size()) < terms; ++t) {
        FormMonomial m = form_monomial(*sig);
        if (m.degree() == degree && m.parity() == parity) a.add_term(m, nonzero_scalar(f));
    }
    return a;
}

}  // namespace gen
