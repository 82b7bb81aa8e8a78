#pragma once

// Supercommutative Laurent polynomial rings k[x^{(+-)}] (x) Lambda[theta] and
// homomorphisms between them.

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "superhodge/exactfield.hpp"

namespace superhodge {

inline constexpr int kMaxEven = 8;
inline constexpr int kMaxOdd = 8;

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t position)
        : std::runtime_error(what + " at position " + std::to_string(position)), position_(position) {}
    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

class SignatureMismatch : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class NotAUnit : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Coordinates of one chart: even names, odd names, and the set of even
/// coordinates that are inverted (the overlap localization).
struct ChartSignature {
    std::vector<std::string> even;
    std::vector<std::string> odd;
    std::uint32_t inverted = 0;  // bitmask over even coordinates

    ChartSignature() = default;
    ChartSignature(std::vector<std::string> even_names, std::vector<std::string> odd_names, std::uint32_t inv = 0);

    int n_even() const { return static_cast<int>(even.size()); }
    int n_odd() const { return static_cast<int>(odd.size()); }
    bool is_inverted(int i) const { return (inverted >> i) & 1u; }
    int even_index(std::string_view name) const;
    int odd_index(std::string_view name) const;

    /// Same coordinates with additional inverted coordinates.
    ChartSignature localized(std::uint32_t extra) const;

    friend bool operator==(const ChartSignature& a, const ChartSignature& b)
    {
        return a.inverted == b.inverted && a.even == b.even && a.odd == b.odd;
    }
    friend bool operator!=(const ChartSignature& a, const ChartSignature& b) { return !(a == b); }
};

using SignaturePtr = std::shared_ptr<const ChartSignature>;

SignaturePtr make_signature(std::vector<std::string> even, std::vector<std::string> odd, std::uint32_t inverted = 0);
SignaturePtr localize(const SignaturePtr& sig, std::uint32_t extra);

/// x^a theta_S with S stored as a bitmask (ascending order implied).
struct SuperMonomial {
    std::array<std::int16_t, kMaxEven> exps{};
    std::uint32_t odd = 0;

    int odd_degree() const { return __builtin_popcount(odd); }
    int parity() const { return odd_degree() & 1; }
    bool is_one() const;

    friend auto operator<=>(const SuperMonomial&, const SuperMonomial&) = default;
    friend bool operator==(const SuperMonomial&, const SuperMonomial&) = default;
};

/// Sign of theta_A * theta_B after sorting (0 if they share an index).
int odd_product_sign(std::uint32_t a, std::uint32_t b);

/// Finite sum of coefficient * SuperMonomial over one signature.
class SuperPolynomial {
public:
    using TermMap = std::map<SuperMonomial, Scalar>;

    SuperPolynomial() = default;
    SuperPolynomial(SignaturePtr sig, Field f) : sig_(std::move(sig)), field_(f) {}

    static SuperPolynomial constant(SignaturePtr sig, const Scalar& c);
    static SuperPolynomial monomial(SignaturePtr sig, const SuperMonomial& m, const Scalar& c);
    static SuperPolynomial even_coordinate(SignaturePtr sig, Field f, int i);
    static SuperPolynomial odd_coordinate(SignaturePtr sig, Field f, int j);

    const SignaturePtr& signature() const { return sig_; }
    const Field& field() const { return field_; }
    const TermMap& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    /// Adds c * m, validating the monomial against the signature.
    void add_term(const SuperMonomial& m, const Scalar& c);

    /// 0 (even), 1 (odd) or -1 (mixed). The zero polynomial reports 0.
    int parity() const;

    SuperPolynomial& operator+=(const SuperPolynomial& o);
    SuperPolynomial& operator-=(const SuperPolynomial& o);
    friend SuperPolynomial operator+(SuperPolynomial a, const SuperPolynomial& b) { return a += b; }
    friend SuperPolynomial operator-(SuperPolynomial a, const SuperPolynomial& b) { return a -= b; }
    SuperPolynomial operator-() const;
    SuperPolynomial scaled(const Scalar& c) const;

    /// Reinterpret in a larger localization of the same chart.
    SuperPolynomial relocalized(const SignaturePtr& sig) const;

    /// Part with no odd content (the image modulo the odd ideal).
    SuperPolynomial body() const;

    std::string to_string() const;

    friend bool operator==(const SuperPolynomial& a, const SuperPolynomial& b);
    friend bool operator!=(const SuperPolynomial& a, const SuperPolynomial& b) { return !(a == b); }

private:
    SignaturePtr sig_;
    Field field_;
    TermMap terms_;
};

void check_same_signature(const SignaturePtr& a, const SignaturePtr& b);
bool monomial_conforms(const ChartSignature& sig, const SuperMonomial& m);

SuperPolynomial multiply(const SuperPolynomial& a, const SuperPolynomial& b);
inline SuperPolynomial operator*(const SuperPolynomial& a, const SuperPolynomial& b) { return multiply(a, b); }
SuperPolynomial power(const SuperPolynomial& a, int k);

/// Inverse of c x^b (1 + nilpotent) with x^b invertible in the localization.
/// Throws NotAUnit otherwise.
SuperPolynomial unit_inverse(const SuperPolynomial& u);
bool is_unit(const SuperPolynomial& u);

std::pair<SuperPolynomial, SuperPolynomial> decompose_parity(const SuperPolynomial& f);

/// Ring homomorphism given on coordinates: images of the source even and odd
/// coordinates in the target ring.
class SuperHomomorphism {
public:
    SuperHomomorphism() = default;
    SuperHomomorphism(SignaturePtr source, SignaturePtr target, std::vector<SuperPolynomial> even_images,
                      std::vector<SuperPolynomial> odd_images);

    static SuperHomomorphism identity(const SignaturePtr& sig, Field f);

    const SignaturePtr& source() const { return source_; }
    const SignaturePtr& target() const { return target_; }
    const std::vector<SuperPolynomial>& even_images() const { return even_; }
    const std::vector<SuperPolynomial>& odd_images() const { return odd_; }
    const Field& field() const { return field_; }

    /// Parity preservation and unit images of inverted coordinates. Empty string when valid.
    std::string check() const;

    /// Images of inverted source coordinates raised to -1 (cached).
    const SuperPolynomial& inverse_image(int i) const;

    /// Same maps with the target reinterpreted in a larger localization.
    SuperHomomorphism with_target(const SignaturePtr& target) const;

private:
    SignaturePtr source_;
    SignaturePtr target_;
    Field field_;
    std::vector<SuperPolynomial> even_;
    std::vector<SuperPolynomial> odd_;
    mutable std::vector<std::shared_ptr<SuperPolynomial>> inverse_cache_;
};

SuperPolynomial substitute(const SuperHomomorphism& h, const SuperPolynomial& f);
/// h2 after h1: source(h1) -> target(h2); requires target(h1) == source(h2) up to localization.
SuperHomomorphism compose(const SuperHomomorphism& h2, const SuperHomomorphism& h1);

/// Inverse of an automorphism congruent to the identity modulo nilpotents.
SuperHomomorphism invert_unipotent(const SuperHomomorphism& h);

/// Text syntax: identifiers, integer or a/b coefficients, '^' powers (negative
/// only on inverted coordinates), '*' products, '+'/'-' sums, parentheses.
SuperPolynomial parse_polynomial(std::string_view text, const SignaturePtr& sig, Field f);

std::string monomial_to_string(const ChartSignature& sig, const SuperMonomial& m);

}  // namespace superhodge
