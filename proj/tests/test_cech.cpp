#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "superhodge/cech.hpp"

using namespace superhodge;

namespace {

const Field Q = Field::rational();

// Naive dense elimination, independent of the library's sparse reducer.
std::size_t dense_rank(const Matrix& m)
{
    std::vector<std::vector<mpq_class>> a(m.rows(), std::vector<mpq_class>(m.cols()));
    for (std::size_t c = 0; c < m.cols(); ++c)
        for (const auto& [r, v] : m.column(c).entries()) a[static_cast<std::size_t>(r)][c] = v.rational();
    std::size_t rank = 0;
    for (std::size_t c = 0; c < m.cols() && rank < m.rows(); ++c) {
        std::size_t piv = rank;
        while (piv < m.rows() && a[piv][c] == 0) ++piv;
        if (piv == m.rows()) continue;
        std::swap(a[piv], a[rank]);
        for (std::size_t r = 0; r < m.rows(); ++r) {
            if (r == rank || a[r][c] == 0) continue;
            mpq_class f = a[r][c] / a[rank][c];
            for (std::size_t k = c; k < m.cols(); ++k) a[r][k] -= f * a[rank][k];
        }
        ++rank;
    }
    return rank;
}

// dim H^q of column p restricted to one parity, from the Cech matrices.
std::size_t column_cohomology(const Bicomplex& b, int p, int q, int parity)
{
    std::size_t h = 0;
    for (const auto& blk : b.blocks()) {
        if (blk.parity != parity) continue;
        std::size_t dim = blk.dim(p, q);
        std::size_t out = q < b.q_max() ? rank(blk.delta[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)]) : 0;
        std::size_t in = q > 0 ? rank(blk.delta[static_cast<std::size_t>(p)][static_cast<std::size_t>(q - 1)]) : 0;
        h += dim - out - in;
    }
    return h;
}

void expect_bicomplex_identities(const Bicomplex& b)
{
    const int P = b.max_column(), Q = b.q_max();
    for (const auto& blk : b.blocks()) {
        for (int p = 0; p <= P; ++p)
            for (int q = 0; q <= Q; ++q) {
                const Matrix& d = blk.d[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)];
                if (p + 1 <= P) EXPECT_TRUE((blk.d[static_cast<std::size_t>(p + 1)][static_cast<std::size_t>(q)] * d).is_zero()) << "d^2 at " << p << "," << q;
                if (q < Q) {
                    Matrix lhs = blk.delta[static_cast<std::size_t>(p + 1)][static_cast<std::size_t>(q)] * d;
                    Matrix rhs = blk.d[static_cast<std::size_t>(p)][static_cast<std::size_t>(q + 1)] * blk.delta[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)];
                    EXPECT_EQ(lhs, rhs) << "d delta at " << p << "," << q;
                }
            }
        for (int p = 0; p <= P + 1; ++p)
            for (int q = 0; q + 1 < Q; ++q)
                EXPECT_TRUE((blk.delta[static_cast<std::size_t>(p)][static_cast<std::size_t>(q + 1)] * blk.delta[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)]).is_zero())
                    << "delta^2 at " << p << "," << q;
    }
}

void expect_quotient_properties(const Bicomplex& b)
{
    const Bicomplex& b0 = b.bosonization();
    const int P = b.max_column(), Q = b.q_max();
    std::vector<std::vector<std::size_t>> image_rank(static_cast<std::size_t>(P + 2), std::vector<std::size_t>(static_cast<std::size_t>(Q + 1), 0));
    for (std::size_t bi = 0; bi < b.blocks().size(); ++bi) {
        int tb = b.quotient_block(bi);
        if (tb < 0) continue;
        const Block& src = b.blocks()[bi];
        const Block& tgt = b0.blocks()[static_cast<std::size_t>(tb)];
        EXPECT_EQ(src.weight, tgt.weight);
        for (int p = 0; p <= P + 1; ++p)
            for (int q = 0; q <= Q; ++q) {
                Matrix pi = b.quotient_map(bi, p, q);
                image_rank[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)] += rank(pi);
                if (p <= P)
                    EXPECT_EQ(b.quotient_map(bi, p + 1, q) * src.d[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)],
                              tgt.d[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)] * pi);
                if (q < Q)
                    EXPECT_EQ(b.quotient_map(bi, p, q + 1) * src.delta[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)],
                              tgt.delta[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)] * pi);
                if (p == 0) {
                    // kernel in column 0 is spanned by the monomials with odd content
                    std::size_t odd_content = 0;
                    for (const auto& e : src.cells[0][static_cast<std::size_t>(q)]) odd_content += e.mono.fn.odd != 0;
                    EXPECT_EQ(src.dim(0, q) - rank(pi), odd_content);
                }
            }
    }
    for (int p = 0; p <= P + 1; ++p)
        for (int q = 0; q <= Q; ++q) EXPECT_EQ(image_rank[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)], b0.cell_dim(p, q)) << "surjectivity at " << p << "," << q;
}

}  // namespace

TEST(OverlapSections, Examples)
{
    Atlas p1 = build_projective_superspace(1, 0);
    SectionSpace s = overlap_sections(p1, {0, 1}, 0, 2);
    ASSERT_EQ(s.basis.size(), 5u);
    for (int k = 0; k < 5; ++k) {
        EXPECT_EQ(s.basis[static_cast<std::size_t>(k)].fn.exps[0], k - 2);
        EXPECT_EQ(s.basis[static_cast<std::size_t>(k)].fn.odd, 0u);
    }

    Atlas pt = build_projective_superspace(0, 1);
    SectionSpace d1 = overlap_sections(pt, {0}, 1, 0);
    ASSERT_EQ(d1.basis.size(), 2u);
    std::set<std::string> names;
    for (const auto& m : d1.basis) names.insert(form_monomial_to_string(*d1.sig, m));
    EXPECT_EQ(names, (std::set<std::string>{"d(t1)", "t1*d(t1)"}));

    Atlas p11 = build_projective_superspace(1, 1);
    SectionSpace s11 = overlap_sections(p11, {0, 1}, 0, 1);
    EXPECT_EQ(s11.basis.size(), 6u);
    EXPECT_TRUE(std::is_sorted(s11.basis.begin(), s11.basis.end()));
    EXPECT_TRUE(std::adjacent_find(s11.basis.begin(), s11.basis.end()) == s11.basis.end());
    for (const auto& m : s11.basis) EXPECT_TRUE(form_monomial_conforms(*s11.sig, m));

    EXPECT_THROW(overlap_sections(build_split(SplitBase::P1xP1, {}), {0, 1, 2, 5}, 0, 1), std::invalid_argument);
}

TEST(RestrictionMatrix, P1)
{
    Atlas p1 = build_projective_superspace(1, 0);
    const int N = 2;
    SectionSpace u0 = overlap_sections(p1, {0}, 0, N), u1 = overlap_sections(p1, {1}, 0, N), u01 = overlap_sections(p1, {0, 1}, 0, N);
    auto index_of = [](const SectionSpace& s, int e) {
        for (std::size_t k = 0; k < s.basis.size(); ++k)
            if (s.basis[k].fn.exps[0] == e) return k;
        return s.basis.size();
    };
    Matrix r0 = restriction_matrix(p1, {0}, {0, 1}, 0, N);
    Matrix r1 = restriction_matrix(p1, {1}, {0, 1}, 0, N);
    // 1 -> 1, z -> z, w -> z^-1
    EXPECT_EQ(r0.at(index_of(u01, 0), index_of(u0, 0)), Q.one());
    EXPECT_EQ(r0.at(index_of(u01, 1), index_of(u0, 1)), Q.one());
    EXPECT_EQ(r1.at(index_of(u01, -1), index_of(u1, 1)), Q.one());
    EXPECT_EQ(r1.column(index_of(u1, 1)).nnz(), 1u);
}

TEST(Bicomplex, CellDimensions)
{
    Bicomplex pt = Bicomplex::assemble(build_projective_superspace(0, 1), 3, 0);
    EXPECT_EQ(pt.q_max(), 0);
    for (int p = 0; p <= 3; ++p) EXPECT_EQ(pt.cell_dim(p, 0), 2u);

    // P1, N = 3: z^0..z^3 and w^0..w^3; z^-3..z^3; dz z^0..z^2 and dw w^0..w^2; z^-4..z^2 dz
    Bicomplex p1 = Bicomplex::assemble(build_projective_superspace(1, 0), 2, 3);
    EXPECT_EQ(p1.cell_dim(0, 0), 8u);
    EXPECT_EQ(p1.cell_dim(0, 1), 7u);
    EXPECT_EQ(p1.cell_dim(1, 0), 6u);
    EXPECT_EQ(p1.cell_dim(1, 1), 7u);
    EXPECT_EQ(p1.cell_dim(2, 0), 0u);
}

TEST(Bicomplex, MatrixIdentities)
{
    std::vector<Atlas> atlases = {
        build_projective_superspace(1, 1),
        build_projective_superspace(1, 2),
        build_projective_superspace(2, 1),
        build_split(SplitBase::P1xP1, {{-1, 0}, {0, -2}}),
        build_glued({{-1, -3}, "z^-1*t1*t2", {}}),
        build_projective_superspace(1, 2, Field::modular(2)),
    };
    for (const auto& a : atlases) {
        SCOPED_TRACE(a.name);
        Bicomplex b = Bicomplex::assemble(a, 3, 2);
        expect_bicomplex_identities(b);
        expect_bicomplex_identities(b.bosonization());
        expect_quotient_properties(b);
    }
}

TEST(Bicomplex, GrassmannianQuotientCommutes)
{
    Bicomplex b = Bicomplex::assemble(build_supergrassmannian_1122(), 3, 2);
    expect_bicomplex_identities(b);
    expect_quotient_properties(b);
}

TEST(Bicomplex, ParityIsPreserved)
{
    Bicomplex b = Bicomplex::assemble(build_projective_superspace(1, 2), 3, 2);
    for (const auto& blk : b.blocks())
        for (const auto& column : blk.cells)
            for (const auto& cell : column)
                for (const auto& e : cell) EXPECT_EQ(e.mono.parity(), blk.parity);
    // both parities occur in column 1 (dt is even of cohomological degree 1)
    EXPECT_GT(b.cell_dim(1, 0, 0), 0u);
    EXPECT_GT(b.cell_dim(1, 0, 1), 0u);
    EXPECT_EQ(b.cell_dim(1, 0, 0) + b.cell_dim(1, 0, 1), b.cell_dim(1, 0));
}

TEST(Bicomplex, LineBundleCohomology)
{
    // Odd part of column 0 of the split atlas with one odd coordinate is O(d).
    for (int deg = -4; deg <= 4; ++deg) {
        for (int N : {std::abs(deg) + 1, std::abs(deg) + 2}) {
            Bicomplex b = Bicomplex::assemble(build_split(SplitBase::P1, {{deg}}), 1, N, false);
            EXPECT_EQ(column_cohomology(b, 0, 0, 1), static_cast<std::size_t>(std::max(deg + 1, 0))) << "d=" << deg << " N=" << N;
            EXPECT_EQ(column_cohomology(b, 0, 1, 1), static_cast<std::size_t>(std::max(-deg - 1, 0))) << "d=" << deg << " N=" << N;
        }
    }
}

TEST(Bicomplex, P1xP1HodgeDiamond)
{
    Bicomplex b = Bicomplex::assemble(build_split(SplitBase::P1xP1, {}), 2, 3, false);
    const std::size_t h[3][4] = {{1, 0, 0, 0}, {0, 2, 0, 0}, {0, 0, 1, 0}};
    for (int p = 0; p <= 2; ++p)
        for (int q = 0; q <= b.q_max(); ++q) EXPECT_EQ(column_cohomology(b, p, q, 0), h[p][q]) << p << "," << q;
}

TEST(Bicomplex, CoboundaryOfMinusTwoIsInjective)
{
    Bicomplex b = Bicomplex::assemble(build_split(SplitBase::P1, {{-2}}), 1, 3, false);
    std::size_t c0 = 0, img = 0, brute = 0;
    for (const auto& blk : b.blocks()) {
        if (blk.parity != 1) continue;
        c0 += blk.dim(0, 0);
        img += image_basis(blk.delta[0][0]).size();
        brute += dense_rank(blk.delta[0][0]);
    }
    EXPECT_GT(c0, 0u);
    EXPECT_EQ(img, c0);
    EXPECT_EQ(brute, c0);
}

TEST(Bicomplex, PurelyEvenBosonizationIsSelf)
{
    Bicomplex b = Bicomplex::assemble(build_projective_superspace(1, 0), 2, 2);
    EXPECT_EQ(&b.bosonization(), &b);
    for (std::size_t bi = 0; bi < b.blocks().size(); ++bi) {
        EXPECT_EQ(b.quotient_block(bi), static_cast<int>(bi));
        EXPECT_EQ(b.quotient_map(bi, 0, 0), Matrix::identity(b.blocks()[bi].dim(0, 0), Q));
    }
}
