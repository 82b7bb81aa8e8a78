#pragma once

// The de Rham algebra of a chart. Forms are bigraded by cohomological degree
// and parity; homogeneous elements commute up to (-1)^{deg*deg + par*par}.
// dx has degree 1 and even parity, dtheta degree 1 and odd parity, so the
// dx's anticommute while the dtheta's generate a symmetric algebra.

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "superhodge/superring.hpp"

namespace superhodge {

/// x^a theta_S dx_I dtheta^m in normal order.
struct FormMonomial {
    SuperMonomial fn;
    std::uint32_t dx = 0;                      // sorted subset of even coordinates
    std::array<std::uint8_t, kMaxOdd> dtheta{};  // multidegree in the dtheta's

    int dtheta_degree() const;
    int degree() const { return __builtin_popcount(dx) + dtheta_degree(); }
    int parity() const { return (fn.odd_degree() + dtheta_degree()) & 1; }
    /// Number of theta and dtheta factors (the Euler weight).
    int odd_weight() const { return fn.odd_degree() + dtheta_degree(); }

    friend auto operator<=>(const FormMonomial&, const FormMonomial&) = default;
    friend bool operator==(const FormMonomial&, const FormMonomial&) = default;
};

struct FormMonomialHash {
    std::size_t operator()(const FormMonomial& m) const noexcept;
};

bool form_monomial_conforms(const ChartSignature& sig, const FormMonomial& m);
std::string form_monomial_to_string(const ChartSignature& sig, const FormMonomial& m);

class FormElement {
public:
    using TermMap = std::map<FormMonomial, Scalar>;

    FormElement() = default;
    FormElement(SignaturePtr sig, Field f) : sig_(std::move(sig)), field_(f) {}

    static FormElement from_function(const SuperPolynomial& f);
    static FormElement monomial(SignaturePtr sig, const FormMonomial& m, const Scalar& c);
    static FormElement dx(SignaturePtr sig, Field f, int i);
    static FormElement dtheta(SignaturePtr sig, Field f, int j);

    const SignaturePtr& signature() const { return sig_; }
    const Field& field() const { return field_; }
    const TermMap& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    void add_term(const FormMonomial& m, const Scalar& c);

    /// Common degree of all terms, or -1 when inhomogeneous (0 for the zero form).
    int degree() const;
    /// 0, 1, or -1 when mixed.
    int parity() const;

    FormElement& operator+=(const FormElement& o);
    FormElement& operator-=(const FormElement& o);
    friend FormElement operator+(FormElement a, const FormElement& b) { return a += b; }
    friend FormElement operator-(FormElement a, const FormElement& b) { return a -= b; }
    FormElement operator-() const;
    FormElement scaled(const Scalar& c) const;
    FormElement relocalized(const SignaturePtr& sig) const;

    std::string to_string() const;

    friend bool operator==(const FormElement& a, const FormElement& b);
    friend bool operator!=(const FormElement& a, const FormElement& b) { return !(a == b); }

private:
    SignaturePtr sig_;
    Field field_;
    TermMap terms_;
};

/// Vector field sum f_i d/dx_i + g_j d/dtheta_j with a parity tag. The
/// coefficient of d/dx_i has the field's parity, that of d/dtheta_j the
/// opposite parity.
struct VectorField {
    std::vector<SuperPolynomial> even_coeffs;
    std::vector<SuperPolynomial> odd_coeffs;
    int parity = 0;

    static VectorField zero(const SignaturePtr& sig, Field f, int parity = 0);
    /// sum_j theta_j d/dtheta_j
    static VectorField euler(const SignaturePtr& sig, Field f);

    /// Empty when coefficient parities are consistent.
    std::string check() const;
};

SuperPolynomial apply_vector_field(const VectorField& v, const SuperPolynomial& f);
/// Left derivative d/dtheta_j.
SuperPolynomial odd_partial(const SuperPolynomial& f, int j);
SuperPolynomial even_partial(const SuperPolynomial& f, int i);

FormElement wedge(const FormElement& a, const FormElement& b);
FormElement d(const FormElement& a);
FormElement contract(const VectorField& v, const FormElement& a);
FormElement lie_derivative(const VectorField& v, const FormElement& a);

/// Algebra homomorphism on forms induced by h (chain rule for dx, dtheta).
class FormPullback {
public:
    explicit FormPullback(SuperHomomorphism h);

    const SuperHomomorphism& homomorphism() const { return h_; }
    FormElement operator()(const FormMonomial& m);
    FormElement operator()(const FormElement& a);

private:
    const FormElement& dtheta_power(int j, int k);
    const FormElement& function_power(int i, int e);

    SuperHomomorphism h_;
    std::vector<FormElement> dx_images_;
    std::vector<FormElement> dtheta_images_;
    std::map<std::pair<int, int>, FormElement> dtheta_powers_;
    std::map<std::pair<int, int>, FormElement> function_powers_;
};

FormElement pullback_form(const SuperHomomorphism& h, const FormElement& a);

/// Monomials of Omega^p with even exponents in [0, window] (or [-window,
/// window] for inverted coordinates). Sorted, duplicate-free.
std::vector<FormMonomial> form_basis(const ChartSignature& sig, int p, int window);

/// Decomposition into eigencomponents of L_xi. Throws std::invalid_argument
/// when L_xi does not act diagonally on the monomials of a.
std::map<long, FormElement> weight_split(const FormElement& a, const VectorField& xi);

FormElement parse_form(std::string_view text, const SignaturePtr& sig, Field f);

}  // namespace superhodge
