#include "superhodge/exactfield.hpp"

#include <algorithm>
#include <sstream>

namespace superhodge {

namespace {

bool is_prime(std::uint32_t p)
{
    if (p < 2) return false;
    for (std::uint64_t d = 2; d * d <= p; ++d)
        if (p % d == 0) return false;
    return true;
}

std::uint32_t mod_pow(std::uint64_t b, std::uint64_t e, std::uint64_t p)
{
    std::uint64_t r = 1;
    b %= p;
    while (e) {
        if (e & 1) r = r * b % p;
        b = b * b % p;
        e >>= 1;
    }
    return static_cast<std::uint32_t>(r);
}

}  // namespace

// ---------------------------------------------------------------- Field

Field Field::modular(std::uint32_t p)
{
    if (p >= (1u << 31) || !is_prime(p))
        throw std::invalid_argument("modulus " + std::to_string(p) + " is not a supported prime");
    return Field(p);
}

Scalar Field::zero() const
{
    Scalar s;
    s.field_ = *this;
    return s;
}

Scalar Field::one() const { return from_int(1); }

Scalar Field::from_int(long long v) const
{
    Scalar s;
    s.field_ = *this;
    if (is_rational()) {
        s.q_ = static_cast<long>(v);
    } else {
        long long m = v % static_cast<long long>(modulus_);
        if (m < 0) m += modulus_;
        s.r_ = static_cast<std::uint32_t>(m);
    }
    return s;
}

Scalar Field::from_rational(const mpq_class& q) const
{
    if (is_rational()) {
        Scalar s;
        s.field_ = *this;
        s.q_ = q;
        s.q_.canonicalize();
        return s;
    }
    mpz_class p(modulus_);
    mpz_class num = q.get_num() % p;
    mpz_class den = q.get_den() % p;
    if (den == 0) throw std::domain_error("denominator vanishes modulo " + std::to_string(modulus_));
    if (num < 0) num += p;
    Scalar n = from_int(num.get_si());
    Scalar d = from_int(den.get_si());
    return n / d;
}

std::string Field::name() const
{
    return is_rational() ? std::string("Q") : "F_" + std::to_string(modulus_);
}

// ---------------------------------------------------------------- Scalar

bool Scalar::is_zero() const { return field_.is_rational() ? sgn(q_) == 0 : r_ == 0; }

bool Scalar::is_one() const { return field_.is_rational() ? q_ == 1 : r_ == 1; }

Scalar Scalar::operator-() const
{
    Scalar s = *this;
    if (field_.is_rational())
        s.q_ = -q_;
    else
        s.r_ = r_ == 0 ? 0 : field_.modulus() - r_;
    return s;
}

Scalar& Scalar::operator+=(const Scalar& o)
{
    check_same(o);
    if (field_.is_rational()) {
        q_ += o.q_;
    } else {
        std::uint64_t v = std::uint64_t(r_) + o.r_;
        if (v >= field_.modulus()) v -= field_.modulus();
        r_ = static_cast<std::uint32_t>(v);
    }
    return *this;
}

Scalar& Scalar::operator-=(const Scalar& o)
{
    check_same(o);
    if (field_.is_rational()) {
        q_ -= o.q_;
    } else {
        r_ = r_ >= o.r_ ? r_ - o.r_ : r_ + field_.modulus() - o.r_;
    }
    return *this;
}

Scalar& Scalar::operator*=(const Scalar& o)
{
    check_same(o);
    if (field_.is_rational())
        q_ *= o.q_;
    else
        r_ = static_cast<std::uint32_t>(std::uint64_t(r_) * o.r_ % field_.modulus());
    return *this;
}

Scalar& Scalar::operator/=(const Scalar& o)
{
    check_same(o);
    return *this *= o.inverse();
}

Scalar Scalar::inverse() const
{
    if (is_zero()) throw std::domain_error("division by zero");
    Scalar s = *this;
    if (field_.is_rational())
        s.q_ = 1 / q_;
    else
        s.r_ = mod_pow(r_, field_.modulus() - 2, field_.modulus());
    return s;
}

bool operator==(const Scalar& a, const Scalar& b)
{
    if (a.field_ != b.field_) return false;
    return a.field_.is_rational() ? a.q_ == b.q_ : a.r_ == b.r_;
}

bool operator<(const Scalar& a, const Scalar& b)
{
    a.check_same(b);
    return a.field_.is_rational() ? a.q_ < b.q_ : a.r_ < b.r_;
}

std::string Scalar::to_string() const
{
    return field_.is_rational() ? q_.get_str() : std::to_string(r_);
}

// ---------------------------------------------------------------- SparseVec

void SparseVec::push_back(int index, Scalar value)
{
    if (value.is_zero()) return;
    if (!entries_.empty() && entries_.back().first >= index)
        throw std::logic_error("SparseVec::push_back out of order");
    entries_.emplace_back(index, std::move(value));
}

void SparseVec::add(int index, const Scalar& value)
{
    if (value.is_zero()) return;
    auto it = std::lower_bound(entries_.begin(), entries_.end(), index,
                               [](const Entry& e, int i) { return e.first < i; });
    if (it != entries_.end() && it->first == index) {
        it->second += value;
        if (it->second.is_zero()) entries_.erase(it);
    } else {
        entries_.insert(it, Entry(index, value));
    }
}

Scalar SparseVec::get(int index, const Field& f) const
{
    auto it = std::lower_bound(entries_.begin(), entries_.end(), index,
                               [](const Entry& e, int i) { return e.first < i; });
    if (it != entries_.end() && it->first == index) return it->second;
    return f.zero();
}

void SparseVec::axpy(const Scalar& c, const SparseVec& other)
{
    if (c.is_zero() || other.entries_.empty()) return;
    std::vector<Entry> out;
    out.reserve(entries_.size() + other.entries_.size());
    auto a = entries_.begin();
    auto b = other.entries_.begin();
    while (a != entries_.end() || b != other.entries_.end()) {
        if (b == other.entries_.end() || (a != entries_.end() && a->first < b->first)) {
            out.push_back(std::move(*a));
            ++a;
        } else if (a == entries_.end() || b->first < a->first) {
            out.emplace_back(b->first, c * b->second);
            ++b;
        } else {
            Scalar v = std::move(a->second);
            v += c * b->second;
            if (!v.is_zero()) out.emplace_back(a->first, std::move(v));
            ++a;
            ++b;
        }
    }
    entries_ = std::move(out);
}

void SparseVec::scale(const Scalar& c)
{
    if (c.is_zero()) {
        entries_.clear();
        return;
    }
    for (auto& e : entries_) e.second *= c;
}

Vector SparseVec::to_dense(std::size_t n, const Field& f) const
{
    Vector v(n, f.zero());
    for (const auto& [i, x] : entries_) v.at(static_cast<std::size_t>(i)) = x;
    return v;
}

SparseVec SparseVec::from_dense(const Vector& v)
{
    SparseVec s;
    for (std::size_t i = 0; i < v.size(); ++i) s.push_back(static_cast<int>(i), v[i]);
    return s;
}

// ---------------------------------------------------------------- Matrix

Matrix::Matrix(std::size_t rows, std::size_t cols, Field f) : rows_(rows), field_(f), cols_(cols) {}

Matrix Matrix::identity(std::size_t n, Field f)
{
    Matrix m(n, n, f);
    for (std::size_t i = 0; i < n; ++i) m.cols_[i].push_back(static_cast<int>(i), f.one());
    return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<long long>>& rows, Field f)
{
    std::size_t nc = rows.empty() ? 0 : rows.front().size();
    Matrix m(rows.size(), nc, f);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != nc) throw std::invalid_argument("ragged matrix rows");
        for (std::size_t c = 0; c < nc; ++c) m.cols_[c].push_back(static_cast<int>(r), f.from_int(rows[r][c]));
    }
    return m;
}

Scalar Matrix::at(std::size_t r, std::size_t c) const { return cols_.at(c).get(static_cast<int>(r), field_); }

void Matrix::set(std::size_t r, std::size_t c, const Scalar& v)
{
    auto& col = cols_.at(c);
    Scalar cur = col.get(static_cast<int>(r), field_);
    col.add(static_cast<int>(r), v - cur);
}

void Matrix::add_to(std::size_t r, std::size_t c, const Scalar& v)
{
    if (r >= rows_) throw std::out_of_range("Matrix::add_to row");
    cols_.at(c).add(static_cast<int>(r), v);
}

Matrix Matrix::transpose() const
{
    Matrix t(cols(), rows_, field_);
    for (std::size_t c = 0; c < cols(); ++c)
        for (const auto& [r, v] : cols_[c].entries()) t.cols_[static_cast<std::size_t>(r)].push_back(static_cast<int>(c), v);
    return t;
}

SparseVec Matrix::apply(const SparseVec& v) const
{
    SparseVec out;
    for (const auto& [c, x] : v.entries()) out.axpy(x, cols_.at(static_cast<std::size_t>(c)));
    return out;
}

Vector Matrix::apply(const Vector& v) const
{
    if (v.size() != cols()) throw std::invalid_argument("Matrix::apply dimension mismatch");
    return apply(SparseVec::from_dense(v)).to_dense(rows_, field_);
}

Matrix Matrix::operator*(const Matrix& o) const
{
    if (cols() != o.rows_) throw std::invalid_argument("Matrix product dimension mismatch");
    Matrix m(rows_, o.cols(), field_);
    for (std::size_t c = 0; c < o.cols(); ++c) m.cols_[c] = apply(o.cols_[c]);
    return m;
}

Matrix Matrix::operator+(const Matrix& o) const
{
    if (rows_ != o.rows_ || cols() != o.cols()) throw std::invalid_argument("Matrix sum dimension mismatch");
    Matrix m = *this;
    for (std::size_t c = 0; c < cols(); ++c) m.cols_[c].axpy(field_.one(), o.cols_[c]);
    return m;
}

Matrix Matrix::operator-(const Matrix& o) const { return *this + o.scaled(-field_.one()); }

Matrix Matrix::scaled(const Scalar& c) const
{
    Matrix m = *this;
    for (auto& col : m.cols_) col.scale(c);
    return m;
}

bool Matrix::is_zero() const
{
    return std::all_of(cols_.begin(), cols_.end(), [](const SparseVec& c) { return c.empty(); });
}

std::size_t Matrix::nnz() const
{
    std::size_t n = 0;
    for (const auto& c : cols_) n += c.nnz();
    return n;
}

Matrix Matrix::select(const std::vector<std::size_t>& row_idx, const std::vector<std::size_t>& col_idx) const
{
    std::vector<int> row_map(rows_, -1);
    for (std::size_t i = 0; i < row_idx.size(); ++i) row_map.at(row_idx[i]) = static_cast<int>(i);
    Matrix m(row_idx.size(), col_idx.size(), field_);
    for (std::size_t j = 0; j < col_idx.size(); ++j) {
        for (const auto& [r, v] : cols_.at(col_idx[j]).entries()) {
            int nr = row_map[static_cast<std::size_t>(r)];
            if (nr >= 0) m.cols_[j].add(nr, v);
        }
    }
    return m;
}

bool operator==(const Matrix& a, const Matrix& b)
{
    return a.rows_ == b.rows_ && a.field_ == b.field_ && a.cols_ == b.cols_;
}

// ---------------------------------------------------------------- Reducer

void Reducer::reduce(SparseVec& v, SparseVec* comb) const
{
    while (!v.empty()) {
        auto it = low_index_.find(v.low());
        if (it == low_index_.end()) return;
        Scalar c = -v.low_value();
        v.axpy(c, vecs_[it->second]);
        if (comb) comb->axpy(c, combs_[it->second]);
    }
}

void Reducer::insert(SparseVec v, SparseVec comb)
{
    if (v.empty()) throw std::logic_error("Reducer::insert of zero vector");
    Scalar inv = v.low_value().inverse();
    if (!inv.is_one()) {
        v.scale(inv);
        comb.scale(inv);
    }
    low_index_.emplace(v.low(), vecs_.size());
    vecs_.push_back(std::move(v));
    combs_.push_back(std::move(comb));
}

bool Reducer::add(SparseVec v, SparseVec comb)
{
    reduce(v, &comb);
    if (v.empty()) return false;
    insert(std::move(v), std::move(comb));
    return true;
}

bool Reducer::in_span(SparseVec v) const
{
    reduce(v);
    return v.empty();
}

// ---------------------------------------------------------------- free functions

std::vector<SparseVec> sparse_kernel(const std::vector<SparseVec>& columns, const Field& f)
{
    Reducer red(f);
    std::vector<SparseVec> kernel;
    for (std::size_t j = 0; j < columns.size(); ++j) {
        SparseVec v = columns[j];
        SparseVec comb;
        comb.push_back(static_cast<int>(j), f.one());
        red.reduce(v, &comb);
        if (v.empty())
            kernel.push_back(std::move(comb));
        else
            red.insert(std::move(v), std::move(comb));
    }
    return kernel;
}

std::size_t sparse_rank(const std::vector<SparseVec>& vecs, const Field& f)
{
    Reducer red(f);
    for (const auto& v : vecs) red.add(v);
    return red.rank();
}

std::size_t rank(const Matrix& m)
{
    Reducer red(m.field());
    for (std::size_t j = 0; j < m.cols(); ++j) red.add(m.column(j));
    return red.rank();
}

std::vector<Vector> kernel_basis(const Matrix& m)
{
    std::vector<SparseVec> cols;
    cols.reserve(m.cols());
    for (std::size_t j = 0; j < m.cols(); ++j) cols.push_back(m.column(j));
    std::vector<Vector> out;
    for (const auto& k : sparse_kernel(cols, m.field())) out.push_back(k.to_dense(m.cols(), m.field()));
    return out;
}

std::vector<Vector> image_basis(const Matrix& m)
{
    Reducer red(m.field());
    std::vector<Vector> out;
    for (std::size_t j = 0; j < m.cols(); ++j) {
        if (red.add(m.column(j))) out.push_back(m.column(j).to_dense(m.rows(), m.field()));
    }
    return out;
}

std::size_t subquotient_dim(const std::vector<Vector>& z, const std::vector<Vector>& b, std::size_t ambient_dim)
{
    auto check = [ambient_dim](const Vector& v) {
        if (v.size() != ambient_dim) throw std::invalid_argument("subquotient_dim: vector length differs from ambient dimension");
    };
    if (z.empty() && b.empty()) return 0;
    Field f = !z.empty() ? z.front().front().field() : b.front().front().field();
    Reducer zr(f);
    for (const auto& v : z) {
        check(v);
        zr.add(SparseVec::from_dense(v));
    }
    Reducer br(f);
    for (const auto& v : b) {
        check(v);
        SparseVec s = SparseVec::from_dense(v);
        if (!zr.in_span(s)) throw std::invalid_argument("subquotient_dim: B is not contained in span(Z)");
        br.add(std::move(s));
    }
    return zr.rank() - br.rank();
}

std::optional<Vector> solve_linear(const Matrix& m, const Vector& rhs)
{
    if (rhs.size() != m.rows()) throw std::invalid_argument("solve_linear: rhs length differs from row count");
    const Field& f = m.field();
    Reducer red(f);
    for (std::size_t j = 0; j < m.cols(); ++j) {
        SparseVec comb;
        comb.push_back(static_cast<int>(j), f.one());
        red.add(m.column(j), std::move(comb));
    }
    SparseVec v = SparseVec::from_dense(rhs);
    SparseVec comb;
    red.reduce(v, &comb);
    if (!v.empty()) return std::nullopt;
    // rhs + comb-combination of columns reduced to zero, so x = -comb.
    comb.scale(-f.one());
    return comb.to_dense(m.cols(), f);
}

}  // namespace superhodge
