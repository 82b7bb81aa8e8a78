#pragma once

// Pages of the spectral sequence of the column filtration F^p = sum_{p' >= p}
// on the total complex D = delta + (-1)^q d. Each (weight, parity) block is
// reduced once into elementary pairs (x, Dx) with Dx leading in column
// p(x) + s; the pair lives on E_r exactly for r <= s, unpaired cycles live
// forever. The truncated complex (columns <= P+1) is a quotient of the full
// one; cell (p,q) of E_r is reliable iff p + r <= P, and E_inf at (p,q) is
// read at r*(q) = max(q+2, q_max-q+2) and reliable iff p + r*(q) <= P.

#include <map>
#include <string>
#include <vector>

#include "superhodge/cech.hpp"

namespace superhodge {

inline constexpr int kInfinity = -1;

struct PageCell {
    int p = 0;
    int q = 0;
    std::size_t dim = 0;
    std::size_t even = 0;
    std::size_t odd = 0;
    bool reliable = false;
};

struct Page {
    int r = 0;  // kInfinity for E_inf
    int max_column = 0;
    int q_max = 0;
    std::map<std::pair<int, int>, PageCell> cells;  // p in [0, P+1], q in [0, q_max]
    /// d_r out of cell (p,q) into (p+r, q-r+1), in the page bases (finite r only).
    std::map<std::pair<int, int>, Matrix> differentials;

    const PageCell& cell(int p, int q) const { return cells.at({p, q}); }
};

/// One element of an adapted basis: a chain of the total complex of one block.
struct Representative {
    std::size_t block = 0;
    int degree = 0;
    SparseVec chain;  // coordinates in the block's Tot^degree basis
};

class SpectralSequence {
public:
    explicit SpectralSequence(const Bicomplex& b);

    const Bicomplex& bicomplex() const { return *b_; }
    int max_column() const { return b_->max_column(); }
    int q_max() const { return b_->q_max(); }

    int r_star(int q) const;
    bool reliable(int p, int q, int r) const;

    Page page(int r) const;
    Page e_infinity() const;

    /// dim H^n(Tot) for n <= n_max; requires n_max <= P - 1.
    std::vector<std::size_t> total_de_rham(int n_max) const;

    /// Basis of E_r^{p,q} (r = kInfinity for E_inf) as total-complex chains.
    std::vector<Representative> representatives(int p, int q, int r) const;

    /// Coordinates of the class of `chain` (a Z_r representative in column p)
    /// in the basis returned by representatives(p, q, r) restricted to `block`.
    Vector page_coordinates(std::size_t block, int p, int q, int r, const SparseVec& chain) const;

    /// Tot^n basis of a block: (p, q, index within cell), p descending.
    struct TotEntry {
        int p, q;
        std::size_t index;
    };
    const std::vector<TotEntry>& tot_basis(std::size_t block, int n) const { return data_[block].basis[static_cast<std::size_t>(n)]; }
    /// Total differential Tot^n -> Tot^{n+1} of a block.
    Matrix total_differential(std::size_t block, int n) const;
    int max_degree() const { return max_column() + 1 + q_max(); }

private:
    enum class Role { Essential, Source, Target };
    struct Element {
        Role role = Role::Essential;
        int gap = 0;       // filtration jump for paired elements
        int partner = -1;  // index in degree n+1 (source) or n-1 (target)
        SparseVec vec;     // adapted basis vector
    };
    struct BlockData {
        std::vector<std::vector<TotEntry>> basis;            // [n]
        std::vector<std::vector<std::size_t>> cell_offset;   // [p][q] offset in Tot^{p+q}
        std::vector<std::vector<Element>> elements;          // [n][index]
    };

    bool alive(const Element& e, int r_eff) const;
    int effective_r(int q, int r) const { return r == kInfinity ? r_star(q) : r; }

    const Bicomplex* b_;
    std::vector<BlockData> data_;
};

/// Rank of E_r^{p,q}(X) -> E_r^{p,q}(X_0) induced by the quotient onto the bosonization.
std::size_t induced_quotient_rank(const SpectralSequence& x, const SpectralSequence& x0, int p, int q, int r);

struct DeltaTable {
    std::map<std::pair<int, int>, long> values;  // reliable cells only
    long at(int p, int q) const;                  // 0 outside q >= 0; throws on missing reliable data
};

/// delta_pq = dim coker(H^q(Omega^p_X) -> H^q(Omega^p_X0)) on cells with p + 1 <= P.
DeltaTable delta_invariant(const SpectralSequence& x, const SpectralSequence& x0);

struct CheckItem {
    std::string name;
    bool pass = true;
    std::string detail;
};

struct CheckReport {
    std::vector<CheckItem> items;
    bool pass() const;
    void add(std::string name, bool ok, std::string detail = {});
};

/// Odd dimension 2, characteristic 0: dim E2^{pq} = h^{pq}(X0) + delta_{p+1,q-1} - delta_{pq},
/// (E2)_- = 0 and E2 = E_inf on reliable cells.
CheckReport check_n2_formula(const SpectralSequence& x, const SpectralSequence& x0);

/// E2^{00} = H^0_dR(X0), E2^{10} -> H^0(Omega^1_X0) injective, the skewness
/// inequality, surjectivity of E_inf^{0,m}(X) -> E_inf^{0,m}(X0), the de Rham
/// comparison, and in characteristic 2 the vanishing of (E2)_-.
CheckReport check_general_invariants(const SpectralSequence& x, const SpectralSequence& x0);

/// Cell-wise page equality at windows N and N+1 on reliable cells of pages 1..r_max and E_inf.
struct StabilityReport {
    bool stable = true;
    std::vector<std::string> differences;
};
StabilityReport stability_probe(const Atlas& a, int P, int window, int r_max);

}  // namespace superhodge
