#include <gtest/gtest.h>

#include <algorithm>

#include "superhodge/koszul.hpp"

using namespace superhodge;

namespace {

const Field Q = Field::rational();
const Field F5 = Field::modular(5);

std::size_t binom(int n, int k)
{
    if (k < 0 || k > n) return 0;
    std::size_t r = 1;
    for (int j = 1; j <= k; ++j) r = r * static_cast<std::size_t>(n - k + j) / static_cast<std::size_t>(j);
    return r;
}

Matrix scalar_id(std::size_t n, const Scalar& c)
{
    return Matrix::identity(n, c.field()).scaled(c);
}

// e_a (x) e_b ^ e_c  ->  e_a e_b e_c - e_a e_c e_b in V^{(x)3}
Vector embed(const Vector& x, int n)
{
    const Field f = x.empty() ? Q : x[0].field();
    Vector out(static_cast<std::size_t>(n * n * n), f.zero());
    int k = 0;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = b + 1; c < n; ++c, ++k) {
                const Scalar& v = x[static_cast<std::size_t>(k)];
                out[static_cast<std::size_t>((a * n + b) * n + c)] += v;
                out[static_cast<std::size_t>((a * n + c) * n + b)] -= v;
            }
    return out;
}

}  // namespace

TEST(Koszul, Examples)
{
    KoszulComplex k11 = build_koszul(1, 1);
    EXPECT_EQ(k11.dims(), (std::vector<std::size_t>{1, 1}));
    EXPECT_EQ(rank(k11.differentials[0]), 1u);

    EXPECT_EQ(build_koszul(2, 2).dims(), (std::vector<std::size_t>{1, 4, 3}));

    KoszulComplex k00 = build_koszul(0, 0);
    EXPECT_EQ(k00.dims(), (std::vector<std::size_t>{1}));
    EXPECT_TRUE(k00.differentials.empty());

    EXPECT_THROW(weight_exactness(3, 0), std::invalid_argument);
    EXPECT_THROW(build_koszul(-1, 2), std::invalid_argument);
}

TEST(Koszul, DimensionsAreBinomial)
{
    for (int w = 0; w <= 5; ++w)
        for (int k = 0; k <= 5; ++k) {
            KoszulComplex cx = build_koszul(w, k);
            for (const auto& t : cx.terms) EXPECT_EQ(t.dim(), binom(w, t.a) * (t.b == 0 ? 1 : binom(w + t.b - 1, t.b)));
        }
}

TEST(Koszul, SquareZeroAndHomotopy)
{
    for (const Field& f : {Q, F5})
        for (int w = 1; w <= 4; ++w)
            for (int k = 1; k <= 5; ++k) {
                KoszulComplex cx = build_koszul(w, k, f);
                for (std::size_t j = 0; j + 1 < cx.differentials.size(); ++j) EXPECT_TRUE((cx.differentials[j + 1] * cx.differentials[j]).is_zero());
                for (std::size_t j = 0; j < cx.terms.size(); ++j) {
                    Matrix sum(cx.terms[j].dim(), cx.terms[j].dim(), f);
                    if (j < cx.differentials.size()) sum = sum + cx.homotopy[j] * cx.differentials[j];
                    if (j > 0) sum = sum + cx.differentials[j - 1] * cx.homotopy[j - 1];
                    EXPECT_EQ(sum, scalar_id(cx.terms[j].dim(), f.from_int(k))) << "w=" << w << " k=" << k << " term " << j;
                }
            }
}

TEST(Koszul, ExactnessSweep)
{
    EXPECT_TRUE(weight_exactness(1, 1));
    for (int w = 1; w <= 4; ++w)
        for (int k = 1; k <= 5; ++k) EXPECT_TRUE(weight_exactness(w, k)) << w << "," << k;
}

TEST(Koszul, ExactInSmallCharacteristic)
{
    // the homotopy degenerates when p divides k, exactness does not
    for (std::uint32_t p : {2u, 3u})
        for (int w = 1; w <= 3; ++w)
            for (int k = 1; k <= 4; ++k) EXPECT_TRUE(weight_exactness(w, k, Field::modular(p))) << p << ": " << w << "," << k;
}

TEST(Filtration, Examples)
{
    SignaturePtr s01 = make_signature({}, {"t"});
    FiltrationPiece f10 = filtration_piece(s01, 1, 0, 0);
    ASSERT_EQ(f10.basis.size(), 1u);
    EXPECT_EQ(f10.element(f10.basis[0]), parse_form("t", s01, Q));

    FiltrationPiece f11 = filtration_piece(s01, 1, 1, 0);
    EXPECT_EQ(f11.basis.size(), 2u);
    EXPECT_EQ(f11.ambient.size(), 2u);  // d(t), t*d(t)

    SignaturePtr s11 = make_signature({"x"}, {"t"});
    FiltrationPiece f21 = filtration_piece(s11, 2, 1, 2);
    Reducer r(Q);
    for (const auto& v : f21.basis) r.add(v);
    auto member = [&](const std::string& text) {
        SparseVec v;
        FormElement e = parse_form(text, s11, Q);
        for (const auto& [m, c] : e.terms())
            v.push_back(static_cast<int>(std::find(f21.ambient.begin(), f21.ambient.end(), m) - f21.ambient.begin()), c);
        return r.in_span(v);
    };
    EXPECT_TRUE(member("t*d(t)"));
    EXPECT_TRUE(member("x^2*t*d(t)"));
    EXPECT_FALSE(member("d(t)"));
    EXPECT_FALSE(member("t*d(x)"));
}

TEST(Filtration, EqualsOddWeightSpan)
{
    // F^i is spanned by the monomials with at least i theta and dtheta factors.
    SignaturePtr s = make_signature({"x"}, {"t1", "t2"});
    for (int i = 0; i <= 4; ++i)
        for (int p = 0; p <= 3; ++p) {
            FiltrationPiece fp = filtration_piece(s, i, p, 2);
            std::size_t count = 0;
            for (const auto& m : fp.ambient) count += m.odd_weight() >= i;
            EXPECT_EQ(fp.basis.size(), count) << i << "," << p;
            for (const auto& v : fp.basis)
                for (const auto& [k, c] : v.entries()) EXPECT_GE(fp.ambient[static_cast<std::size_t>(k)].odd_weight(), i);
            std::size_t exact_i = 0;
            for (const auto& m : fp.ambient) exact_i += m.odd_weight() == i;
            EXPECT_EQ(fp.graded.size(), exact_i);
        }
}

TEST(Filtration, NestedAndDStable)
{
    SignaturePtr s = make_signature({"x", "y"}, {"t"});
    for (int i = 0; i <= 3; ++i)
        for (int p = 0; p <= 2; ++p) {
            FiltrationPiece fi = filtration_piece(s, i, p, 2), fnext = filtration_piece(s, i + 1, p, 2), target = filtration_piece(s, i, p + 1, 2);
            Reducer big(Q);
            for (const auto& v : fi.basis) big.add(v);
            for (const auto& v : fnext.basis) EXPECT_TRUE(big.in_span(v));
            Reducer tgt(Q);
            for (const auto& v : target.basis) tgt.add(v);
            std::map<FormMonomial, int> index;
            for (std::size_t k = 0; k < target.ambient.size(); ++k) index.emplace(target.ambient[k], static_cast<int>(k));
            for (const auto& v : fi.basis) {
                FormElement dv = d(fi.element(v));
                SparseVec w;
                for (const auto& [m, c] : dv.terms()) w.push_back(index.at(m), c);
                EXPECT_TRUE(tgt.in_span(w));
            }
        }
}

TEST(Filtration, GradedZeroIsBosonicModel)
{
    SignaturePtr s = make_signature({"x"}, {"t1", "t2"});
    SignaturePtr s0 = make_signature({"x"}, {});
    GradedCohomology g0 = graded_cohomology(s, 0, 3, 3);
    for (int p = 0; p <= 3; ++p) EXPECT_EQ(g0.dims[static_cast<std::size_t>(p)], form_basis(*s0, p, 3).size());
    // the bosonic de Rham complex of the line, truncated: constants survive
    EXPECT_EQ(g0.cohomology[0], 1u);
}

TEST(Filtration, GradedPiecesAreExact)
{
    SignaturePtr s = make_signature({"x"}, {"t1", "t2"});
    for (int i = 1; i <= 3; ++i) {
        GradedCohomology g = graded_cohomology(s, i, 3, 4);
        EXPECT_TRUE(g.exact()) << "gr^" << i;
        std::size_t total = 0;
        for (auto v : g.dims) total += v;
        EXPECT_GT(total, 0u);
    }
}

TEST(Tau, MatchesDefiningFormula)
{
    for (int n = 2; n <= 4; ++n) {
        Matrix t = tau_matrix(n);
        const std::size_t dim = t.cols();
        std::vector<std::tuple<int, int, int>> basis;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int c = b + 1; c < n; ++c) basis.emplace_back(a, b, c);
        ASSERT_EQ(basis.size(), dim);
        for (std::size_t col = 0; col < dim; ++col) {
            auto [a, b, c] = basis[col];
            // v3 (x) v1 ^ v2 - v2 (x) v1 ^ v3 with (v1, v2, v3) = (e_a, e_b, e_c), in V^{(x)3}
            Vector expect(static_cast<std::size_t>(n * n * n), Q.zero());
            auto put = [&](int x, int y, int z, int sign) {
                expect[static_cast<std::size_t>((x * n + y) * n + z)] += Q.from_int(sign);
                expect[static_cast<std::size_t>((x * n + z) * n + y)] -= Q.from_int(sign);
            };
            put(c, a, b, 1);
            put(b, a, c, -1);
            Vector unit(dim, Q.zero());
            unit[col] = Q.one();
            EXPECT_EQ(embed(t.apply(unit), n), expect) << "n=" << n << " col " << col;
        }
    }
    // dim 2: tau = -id
    EXPECT_EQ(tau_matrix(2), scalar_id(2, Q.from_int(-1)));
    EXPECT_THROW(tau_matrix(1), std::invalid_argument);
}

TEST(Tau, EigenvaluesAndProjector)
{
    for (const Field& f : {Q, F5}) {
        const int n = 3;
        Matrix t = tau_matrix(n, f);
        ASSERT_EQ(t.rows(), 9u);
        Matrix id = Matrix::identity(9, f);
        EXPECT_TRUE(((t - id.scaled(f.from_int(2))) * (t + id)).is_zero()) << f.name();
        EXPECT_EQ(rank(t), 9u) << f.name();

        // pi = (1/3) comultiplication o wedge through Lambda^3 V
        Matrix mu(1, 9, f), delta(9, 1, f);
        // e_a (x) e_b ^ e_c -> e_a ^ e_b ^ e_c = sign * e0^e1^e2
        int k = 0;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int c = b + 1; c < n; ++c, ++k) {
                    if (a == b || a == c) continue;
                    int inversions = (a > b) + (a > c);
                    mu.set(0, static_cast<std::size_t>(k), f.from_int(inversions % 2 ? -1 : 1));
                }
        // e0^e1^e2 -> e0 (x) e1^e2 - e1 (x) e0^e2 + e2 (x) e0^e1
        delta.set(0 * 3 + 2, 0, f.one());
        delta.set(1 * 3 + 1, 0, f.from_int(-1));
        delta.set(2 * 3 + 0, 0, f.one());
        Matrix pi = (delta * mu).scaled(f.from_int(3).inverse());
        EXPECT_EQ(pi * pi, pi);
        EXPECT_EQ(t, pi.scaled(f.from_int(3)) - id);
    }
}
