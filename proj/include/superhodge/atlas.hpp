#pragma once

// Atlases of supervarieties: charts, pairwise localizations, transition
// homomorphisms and a torus grading. Every atlas carries integer weight
// vectors on all coordinates; transitions are homogeneous, so the Cech-de
// Rham bicomplex splits into finite weight blocks.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "superhodge/superring.hpp"

namespace superhodge {

using Weight = std::vector<int>;

struct Chart {
    SignaturePtr sig;                // no inverted coordinates
    std::vector<Weight> even_weights;  // one per even coordinate
    std::vector<Weight> odd_weights;   // one per odd coordinate
};

/// phi_ij: chart-j coordinates as functions on chart i localized at `inverted`.
struct Transition {
    std::uint32_t inverted = 0;  // mask over chart-i even coordinates
    std::vector<SuperPolynomial> even;
    std::vector<SuperPolynomial> odd;
};

class Atlas {
public:
    std::string name;
    Field field;
    int torus_rank = 0;
    std::vector<Chart> charts;
    std::map<std::pair<int, int>, Transition> transitions;  // (i, j), i != j
    std::vector<std::vector<int>> lattice;                  // overlapping chart subsets, sorted

    int n_charts() const { return static_cast<int>(charts.size()); }
    int n_even() const { return charts.empty() ? 0 : charts[0].sig->n_even(); }
    int n_odd() const { return charts.empty() ? 0 : charts[0].sig->n_odd(); }

    bool overlaps(const std::vector<int>& subset) const;
    /// Lattice members of size k, in lexicographic order.
    std::vector<std::vector<int>> subsets_of_size(int k) const;

    /// Localization mask of chart i on the intersection of `subset` (which contains i).
    std::uint32_t inverted_on(int i, const std::vector<int>& subset) const;
    /// Coordinates of the least chart of `subset`, localized on the intersection.
    SignaturePtr local_signature(const std::vector<int>& subset) const;

    /// phi_ij with source chart j localized at `source_mask` and target chart i
    /// localized at `target_mask`.
    SuperHomomorphism transition(int i, int j, std::uint32_t source_mask, std::uint32_t target_mask) const;
    /// Restriction of functions from U_small to U_large (small a subset of large),
    /// between their local signatures.
    SuperHomomorphism restriction(const std::vector<int>& small, const std::vector<int>& large) const;

    /// Weight of a monomial on chart c.
    Weight weight(int chart, const SuperMonomial& m) const;
    Weight even_weight(int chart, const std::array<std::int16_t, kMaxEven>& exps) const;

    /// Fills lattice with every nonempty subset of charts.
    void set_full_lattice();
};

struct ValidationReport {
    std::vector<std::string> failures;
    int checks = 0;
    bool ok() const { return failures.empty(); }
    std::string summary() const;
};

ValidationReport validate_atlas(const Atlas& a);
/// Throws std::invalid_argument with the report summary when validation fails.
void require_valid(const Atlas& a);

Atlas bosonize(const Atlas& a);
/// gr(X): even images reduced to their body, odd images to their odd-linear part.
Atlas associated_graded(const Atlas& a);

Atlas build_projective_superspace(int n, int m, Field f = Field::rational());

enum class SplitBase { P1, P1xP1 };
/// Split atlas Lambda(E) with E a sum of line bundles: O(a) on P1 (twists[k]
/// has one entry) or O(a,b) on P1xP1 (two entries).
Atlas build_split(SplitBase base, const std::vector<std::vector<int>>& twists, Field f = Field::rational());

Atlas build_supergrassmannian_1122(Field f = Field::rational());

/// Nonsplit gluing over P1 of the split atlas with twists a_1 >= ... >= a_r.
/// `v01` is the d/dz coefficient of the even cocycle on U0 n U1 (chart-0
/// coordinates z, t1..tr, z inverted); `phi01[k]` is the correction added to
/// t_{k+1} (zero polynomials or an empty vector for none).
struct GluingData {
    std::vector<int> twists;
    std::string v01;
    std::vector<std::string> phi01;
};

Atlas build_glued(const GluingData& g, Field f = Field::rational());

}  // namespace superhodge
