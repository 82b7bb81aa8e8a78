#include <gtest/gtest.h>

#include "generators.hpp"
#include "superhodge/atlas.hpp"
#include "superhodge/superforms.hpp"

using namespace superhodge;

namespace {

const Field Q = Field::rational();

SuperPolynomial image(const Atlas& a, int i, int j, bool odd, int k)
{
    const auto& t = a.transitions.at({i, j});
    return odd ? t.odd[static_cast<std::size_t>(k)] : t.even[static_cast<std::size_t>(k)];
}

SuperPolynomial poly(const Atlas& a, int i, int j, const std::string& text)
{
    return parse_polynomial(text, localize(a.charts[static_cast<std::size_t>(i)].sig, a.transitions.at({i, j}).inverted), a.field);
}

}  // namespace

TEST(ProjectiveSuperspace, P1)
{
    Atlas a = build_projective_superspace(1, 0);
    EXPECT_EQ(a.n_charts(), 2);
    EXPECT_EQ(image(a, 0, 1, false, 0), poly(a, 0, 1, "z^-1"));
    EXPECT_EQ(image(a, 1, 0, false, 0), poly(a, 1, 0, "w^-1"));
    EXPECT_TRUE(validate_atlas(a).ok());
}

TEST(ProjectiveSuperspace, P11TransitionsAndSubstitution)
{
    Atlas a = build_projective_superspace(1, 1);
    EXPECT_EQ(image(a, 0, 1, true, 0), poly(a, 0, 1, "z^-1*t1"));
    EXPECT_EQ(image(a, 1, 0, true, 0), poly(a, 1, 0, "w^-1*s1"));
    auto h = a.transition(1, 0, 0b1, 0b1);
    auto zt = parse_polynomial("z*t1", localize(a.charts[0].sig, 1), Q);
    EXPECT_EQ(substitute(h, zt), parse_polynomial("w^-2*s1", localize(a.charts[1].sig, 1), Q));
    EXPECT_TRUE(validate_atlas(a).ok()) << validate_atlas(a).summary();
}

TEST(ProjectiveSuperspace, SuperpointAndP2)
{
    Atlas pt = build_projective_superspace(0, 3);
    EXPECT_EQ(pt.n_charts(), 1);
    EXPECT_EQ(pt.n_odd(), 3);
    EXPECT_TRUE(validate_atlas(pt).ok());
    Atlas p2 = build_projective_superspace(2, 1);
    EXPECT_EQ(p2.n_charts(), 3);
    EXPECT_EQ(p2.subsets_of_size(3).size(), 1u);
    auto rep = validate_atlas(p2);
    EXPECT_TRUE(rep.ok()) << rep.summary();
    EXPECT_GT(rep.checks, 12);
}

TEST(Validation, DetectsCorruptedTransition)
{
    Atlas a = build_projective_superspace(1, 1);
    a.transitions.at({0, 1}).odd[0] = poly(a, 0, 1, "t1");
    auto rep = validate_atlas(a);
    EXPECT_FALSE(rep.ok());
    Atlas b = build_projective_superspace(1, 1);
    b.transitions.at({0, 1}).even[0] = poly(b, 0, 1, "2*z^-1");
    EXPECT_FALSE(validate_atlas(b).ok());
}

TEST(Validation, DetectsBrokenCocycle)
{
    Atlas a = build_projective_superspace(2, 0);
    // Rescale one coordinate on one side only: inverses still hold pairwise
    // after rescaling both directions consistently, the triple fails.
    a.transitions.at({0, 1}).even[1] = a.transitions.at({0, 1}).even[1].scaled(Q.from_int(2));
    auto rep = validate_atlas(a);
    EXPECT_FALSE(rep.ok());
}

TEST(Split, P1Twists)
{
    Atlas a = build_split(SplitBase::P1, {{-1}, {-3}});
    EXPECT_EQ(image(a, 0, 1, true, 0), poly(a, 0, 1, "z^-1*t1"));
    EXPECT_EQ(image(a, 0, 1, true, 1), poly(a, 0, 1, "z^-3*t2"));
    EXPECT_TRUE(validate_atlas(a).ok());
    Atlas p1 = build_split(SplitBase::P1, {});
    EXPECT_EQ(p1.n_odd(), 0);
    EXPECT_TRUE(validate_atlas(p1).ok());
}

TEST(Split, BosonizationIsBase)
{
    Atlas a = build_split(SplitBase::P1xP1, {{-1, -1}, {-1, -1}});
    Atlas b = bosonize(a);
    Atlas base = build_split(SplitBase::P1xP1, {});
    ASSERT_EQ(b.n_charts(), base.n_charts());
    EXPECT_TRUE(validate_atlas(b).ok());
    for (const auto& [key, t] : base.transitions)
        for (std::size_t k = 0; k < t.even.size(); ++k) EXPECT_EQ(b.transitions.at(key).even[k], t.even[k]);
}

TEST(Grassmannian, TransitionsAndValidity)
{
    Atlas g = build_supergrassmannian_1122();
    EXPECT_EQ(g.n_charts(), 4);
    EXPECT_EQ(g.n_even(), 2);
    EXPECT_EQ(g.n_odd(), 2);
    // chart (1,1) -> (2,1): x' = 1/x, xi' = xi/x, eta' = -eta/x, y' = y + xi*eta/x
    EXPECT_EQ(image(g, 0, 2, false, 0), poly(g, 0, 2, "x^-1"));
    EXPECT_EQ(image(g, 0, 2, true, 0), poly(g, 0, 2, "x^-1*xi"));
    EXPECT_EQ(image(g, 0, 2, true, 1), poly(g, 0, 2, "-x^-1*eta"));
    EXPECT_EQ(image(g, 0, 2, false, 1), poly(g, 0, 2, "y + x^-1*xi*eta"));
    // chart (1,1) -> (1,2): x' = x - xi*eta/y, xi' = -xi/y, eta' = eta/y, y' = 1/y
    EXPECT_EQ(image(g, 0, 1, false, 0), poly(g, 0, 1, "x - y^-1*xi*eta"));
    EXPECT_EQ(image(g, 0, 1, true, 0), poly(g, 0, 1, "-y^-1*xi"));
    EXPECT_EQ(image(g, 0, 1, true, 1), poly(g, 0, 1, "y^-1*eta"));
    EXPECT_EQ(image(g, 0, 1, false, 1), poly(g, 0, 1, "y^-1"));
    auto rep = validate_atlas(g);
    EXPECT_TRUE(rep.ok()) << rep.summary();
}

TEST(Grassmannian, BosonizationIsP1xP1)
{
    Atlas b = bosonize(build_supergrassmannian_1122());
    Atlas base = build_split(SplitBase::P1xP1, {});
    for (const auto& [key, t] : base.transitions)
        for (std::size_t k = 0; k < t.even.size(); ++k) EXPECT_EQ(b.transitions.at(key).even[k].to_string(), t.even[k].to_string());
}

TEST(Grassmannian, FormPullbackCommutesWithD)
{
    Atlas g = build_supergrassmannian_1122();
    auto h = g.transition(0, 3, 0b11, 0b11);
    FormPullback pb(h);
    for (int t = 0; t < 20; ++t) {
        auto a = gen::form(h.source(), Q, 2);
        EXPECT_EQ(pb(d(a)), d(pb(a)));
    }
}

TEST(Glued, ZeroCocycleIsSplit)
{
    Atlas s = build_split(SplitBase::P1, {{-1}, {-3}});
    Atlas g = build_glued({{-1, -3}, "0", {}});
    for (const auto& [key, t] : s.transitions) {
        for (std::size_t k = 0; k < t.even.size(); ++k) EXPECT_EQ(g.transitions.at(key).even[k], t.even[k]);
        for (std::size_t k = 0; k < t.odd.size(); ++k) EXPECT_EQ(g.transitions.at(key).odd[k], t.odd[k]);
    }
}

TEST(Glued, Rank2Nonsplit)
{
    Atlas g = build_glued({{-1, -3}, "z^-1*t1*t2", {}});
    EXPECT_TRUE(validate_atlas(g).ok());
    // alpha(z) = z + v(z) with v = z^-1 t1 t2 d/dz, composed with w -> 1/z.
    EXPECT_EQ(image(g, 0, 1, false, 0), poly(g, 0, 1, "z^-1 - z^-3*t1*t2"));
    EXPECT_EQ(g.charts[0].odd_weights[0], Weight{1});
    EXPECT_EQ(g.charts[0].odd_weights[1], Weight{1});
    EXPECT_EQ(g.charts[1].odd_weights[1], Weight{-2});
}

TEST(Glued, Rank3)
{
    Atlas g = build_glued({{-1, -1, -1}, "z^-1*t1*t2", {"", "", "z^-2*t1*t2*t3"}});
    auto rep = validate_atlas(g);
    EXPECT_TRUE(rep.ok()) << rep.summary();
    EXPECT_THROW(build_glued({{-1, -1, -1}, "z^-1*t1", {}}), std::invalid_argument);
    EXPECT_THROW(build_glued({{-1, -1, -1}, "z^-1*t1*t2", {"z*t1"}}), std::invalid_argument);
}
