#pragma once

// Koszul complexes of a vector space W, the odd filtration F^i of the local
// de Rham algebra, and the operator tau_V on V (x) Lambda^2 V.

#include <cstdint>
#include <vector>

#include "superhodge/exactfield.hpp"
#include "superhodge/superforms.hpp"

namespace superhodge {

struct KoszulTerm {
    int a = 0;  // exterior degree
    int b = 0;  // symmetric degree
    std::vector<std::uint32_t> wedge_basis;    // subsets of size a
    std::vector<std::vector<int>> sym_basis;   // exponent vectors of total b
    std::size_t dim() const { return wedge_basis.size() * sym_basis.size(); }
};

/// Weight-k part of Lambda(W) (x) S(W), terms ordered by a descending, with
/// kappa(e_I (x) m) = sum_j (-1)^j e_{I - i_j} (x) x_{i_j} m.
struct KoszulComplex {
    int w = 0;
    int k = 0;
    Field field;
    std::vector<KoszulTerm> terms;
    std::vector<Matrix> differentials;  // terms[j] -> terms[j+1]
    std::vector<Matrix> homotopy;       // terms[j+1] -> terms[j]: e_i wedge, d/dx_i

    std::vector<std::size_t> dims() const;
};

KoszulComplex build_koszul(int w, int k, Field f = Field::rational());

/// Exactness of the weight-k complex by ranks. Requires k >= 1.
bool weight_exactness(int w, int k, Field f = Field::rational());

struct FiltrationPiece {
    SignaturePtr sig;
    int i = 0;
    int p = 0;
    int window = 0;
    Field field;
    std::vector<FormMonomial> ambient;  // form_basis(sig, p, window)
    std::vector<SparseVec> basis;       // F^i in Omega^p
    std::vector<SparseVec> graded;      // lifts of a basis of F^i / F^{i+1}

    FormElement element(const SparseVec& v) const;
};

/// F^i in Omega^p on one chart, generated as an ideal by theta_S dtheta^K with
/// |S| + |K| = i and closed under multiplication by window monomials.
FiltrationPiece filtration_piece(const SignaturePtr& sig, int i, int p, int window, Field f = Field::rational());

struct GradedCohomology {
    std::vector<std::size_t> dims;        // dim gr^i in Omega^p, p = 0..p_max
    std::vector<std::size_t> cohomology;  // p = 0..p_max
    bool exact() const;
};

GradedCohomology graded_cohomology(const SignaturePtr& sig, int i, int window, int p_max, Field f = Field::rational());

/// Matrix of tau(v1 (x) v2^v3) = v3 (x) v1^v2 - v2 (x) v1^v3 on e_a (x) e_b^e_c,
/// b < c, index a * C(n,2) + pair index. Requires dim_v >= 2.
Matrix tau_matrix(int dim_v, Field f = Field::rational());

}  // namespace superhodge
