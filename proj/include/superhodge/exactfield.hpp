#pragma once

// Exact scalars (Q and F_p) and sparse linear algebra over them.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <gmpxx.h>

namespace superhodge {

class Scalar;

/// Ground field descriptor: the rationals or a prime field F_p.
class Field {
public:
    Field() = default;

    static Field rational() { return Field(0); }
    /// Throws std::invalid_argument unless p is a prime below 2^31.
    static Field modular(std::uint32_t p);

    bool is_rational() const { return modulus_ == 0; }
    std::uint32_t modulus() const { return modulus_; }
    std::uint32_t characteristic() const { return modulus_; }

    Scalar zero() const;
    Scalar one() const;
    Scalar from_int(long long v) const;
    Scalar from_rational(const mpq_class& q) const;

    std::string name() const;

    friend bool operator==(const Field& a, const Field& b) { return a.modulus_ == b.modulus_; }
    friend bool operator!=(const Field& a, const Field& b) { return !(a == b); }

private:
    explicit Field(std::uint32_t p) : modulus_(p) {}
    std::uint32_t modulus_ = 0;
};

class FieldMismatch : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Element of a Field. Rational values are kept canonical by GMP
/// (denominator > 0, gcd 1); residues satisfy 0 <= r < p.
class Scalar {
public:
    Scalar() = default;  // rational zero

    const Field& field() const { return field_; }
    bool is_zero() const;
    bool is_one() const;

    Scalar operator-() const;
    Scalar& operator+=(const Scalar& o);
    Scalar& operator-=(const Scalar& o);
    Scalar& operator*=(const Scalar& o);
    Scalar& operator/=(const Scalar& o);
    friend Scalar operator+(Scalar a, const Scalar& b) { return a += b; }
    friend Scalar operator-(Scalar a, const Scalar& b) { return a -= b; }
    friend Scalar operator*(Scalar a, const Scalar& b) { return a *= b; }
    friend Scalar operator/(Scalar a, const Scalar& b) { return a /= b; }

    /// Throws std::domain_error on zero.
    Scalar inverse() const;

    friend bool operator==(const Scalar& a, const Scalar& b);
    friend bool operator!=(const Scalar& a, const Scalar& b) { return !(a == b); }
    /// Total order used for canonical printing only (not a field order).
    friend bool operator<(const Scalar& a, const Scalar& b);

    /// Rational value (requires a rational field).
    const mpq_class& rational() const { return q_; }
    /// Residue (requires a prime field).
    std::uint32_t residue() const { return r_; }

    std::string to_string() const;

private:
    friend class Field;
    void check_same(const Scalar& o) const {
        if (field_ != o.field_) throw FieldMismatch("scalar arithmetic across different fields");
    }

    Field field_;
    mpq_class q_;
    std::uint32_t r_ = 0;
};

/// Dense vector.
using Vector = std::vector<Scalar>;

/// Sparse vector: entries sorted by strictly increasing index, no zeros.
class SparseVec {
public:
    using Entry = std::pair<int, Scalar>;

    SparseVec() = default;

    bool empty() const { return entries_.empty(); }
    std::size_t nnz() const { return entries_.size(); }
    const std::vector<Entry>& entries() const { return entries_; }

    /// Appends an entry; index must exceed every stored index. Zero values are skipped.
    void push_back(int index, Scalar value);
    /// Adds value at index (any order).
    void add(int index, const Scalar& value);
    Scalar get(int index, const Field& f) const;

    int low() const { return entries_.back().first; }
    const Scalar& low_value() const { return entries_.back().second; }

    /// this += c * other
    void axpy(const Scalar& c, const SparseVec& other);
    void scale(const Scalar& c);

    Vector to_dense(std::size_t n, const Field& f) const;
    static SparseVec from_dense(const Vector& v);

    friend bool operator==(const SparseVec& a, const SparseVec& b) { return a.entries_ == b.entries_; }

private:
    std::vector<Entry> entries_;
};

/// Rectangular matrix over one field, stored column-sparse.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, Field f);

    static Matrix identity(std::size_t n, Field f);
    static Matrix from_rows(const std::vector<std::vector<long long>>& rows, Field f);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_.size(); }
    const Field& field() const { return field_; }

    Scalar at(std::size_t r, std::size_t c) const;
    void set(std::size_t r, std::size_t c, const Scalar& v);
    void add_to(std::size_t r, std::size_t c, const Scalar& v);

    const SparseVec& column(std::size_t c) const { return cols_[c]; }
    void set_column(std::size_t c, SparseVec v) { cols_[c] = std::move(v); }

    Matrix transpose() const;
    Matrix operator*(const Matrix& o) const;
    Matrix operator+(const Matrix& o) const;
    Matrix operator-(const Matrix& o) const;
    Matrix scaled(const Scalar& c) const;
    Vector apply(const Vector& v) const;
    SparseVec apply(const SparseVec& v) const;

    bool is_zero() const;
    std::size_t nnz() const;

    /// Submatrix with the given row and column index lists.
    Matrix select(const std::vector<std::size_t>& row_idx, const std::vector<std::size_t>& col_idx) const;

    friend bool operator==(const Matrix& a, const Matrix& b);

private:
    std::size_t rows_ = 0;
    Field field_;
    std::vector<SparseVec> cols_;
};

/// Incremental Gaussian elimination on sparse column vectors. Stored vectors
/// have pairwise distinct lows (largest index) and low value 1. Each stored
/// vector may carry a "combination" vector that records how it was built.
class Reducer {
public:
    explicit Reducer(Field f) : field_(f) {}

    /// Eliminates lows of v against stored vectors until v is zero or has a
    /// fresh low. The same operations are applied to *comb when given.
    void reduce(SparseVec& v, SparseVec* comb = nullptr) const;
    /// Stores v (nonzero, already reduced) after normalizing its low to 1.
    void insert(SparseVec v, SparseVec comb = {});
    /// reduce + insert if nonzero. Returns true when v was independent.
    bool add(SparseVec v, SparseVec comb = {});

    bool in_span(SparseVec v) const;
    std::size_t rank() const { return vecs_.size(); }
    const std::vector<SparseVec>& vectors() const { return vecs_; }
    const std::vector<SparseVec>& combinations() const { return combs_; }
    const Field& field() const { return field_; }

private:
    Field field_;
    std::vector<SparseVec> vecs_;
    std::vector<SparseVec> combs_;
    std::unordered_map<int, std::size_t> low_index_;
};

std::size_t rank(const Matrix& m);
std::vector<Vector> kernel_basis(const Matrix& m);
std::vector<Vector> image_basis(const Matrix& m);

/// dim span(Z) - dim span(B). Throws std::invalid_argument when B is not
/// contained in span(Z).
std::size_t subquotient_dim(const std::vector<Vector>& z, const std::vector<Vector>& b, std::size_t ambient_dim);

/// Some x with m x = rhs, or nullopt when the system is inconsistent.
std::optional<Vector> solve_linear(const Matrix& m, const Vector& rhs);

/// Sparse helpers used by the page engine.
std::vector<SparseVec> sparse_kernel(const std::vector<SparseVec>& columns, const Field& f);
std::size_t sparse_rank(const std::vector<SparseVec>& vecs, const Field& f);

}  // namespace superhodge
