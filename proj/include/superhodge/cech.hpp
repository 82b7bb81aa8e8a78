#pragma once

// Cech-de Rham bicomplex C^{p,q} = prod_{|I|=q+1} Omega^p(U_I) of an atlas,
// split into torus-weight and parity blocks. Each block is an exact direct
// summand; the window N keeps the weights chi with |chi|_inf <= N.
//
// Conventions: cochains on strictly increasing chart tuples, alternating
// signs in delta, sections expressed in the least chart of the tuple.

#include <map>
#include <memory>
#include <vector>

#include "superhodge/atlas.hpp"
#include "superhodge/superforms.hpp"

namespace superhodge {

struct SectionSpace {
    std::vector<int> subset;
    int p = 0;
    int window = 0;
    SignaturePtr sig;
    std::vector<FormMonomial> basis;  // sorted
};

/// Window-truncated Omega^p(U_I), all weights of the box.
SectionSpace overlap_sections(const Atlas& a, const std::vector<int>& subset, int p, int window);

/// Restriction Omega^p(U_I) -> Omega^p(U_J) on window bases (I a subset of J).
Matrix restriction_matrix(const Atlas& a, const std::vector<int>& small, const std::vector<int>& large, int p, int window);

struct CellEntry {
    int subset;  // index into Bicomplex::subsets[q]
    FormMonomial mono;
    friend auto operator<=>(const CellEntry&, const CellEntry&) = default;
    friend bool operator==(const CellEntry&, const CellEntry&) = default;
};

struct Block {
    Weight weight;
    int parity = 0;
    std::vector<std::vector<std::vector<CellEntry>>> cells;  // [p][q], p in [0, P+1]
    std::vector<std::vector<Matrix>> d;                     // [p][q]: C^{p,q} -> C^{p+1,q}, p in [0, P]
    std::vector<std::vector<Matrix>> delta;                 // [p][q]: C^{p,q} -> C^{p,q+1}

    std::size_t dim(int p, int q) const { return cells[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)].size(); }
    std::size_t total_dim() const;
};

class Bicomplex {
public:
    /// Builds columns p in [0, P+1] (one guard column) and all Cech degrees.
    /// With `with_bosonization`, also assembles the bicomplex of bosonize(a)
    /// and the quotient maps onto it.
    static Bicomplex assemble(const Atlas& a, int P, int window, bool with_bosonization = true);

    const Atlas& atlas() const { return *atlas_; }
    int max_column() const { return P_; }
    int window() const { return N_; }
    int q_max() const { return static_cast<int>(subsets_.size()) - 1; }
    const Field& field() const { return atlas_->field; }
    const std::vector<std::vector<std::vector<int>>>& subsets() const { return subsets_; }
    const std::vector<Block>& blocks() const { return blocks_; }

    /// Dimension of C^{p,q} summed over blocks, optionally per parity (-1 for both).
    std::size_t cell_dim(int p, int q, int parity = -1) const;

    bool has_bosonization() const { return static_cast<bool>(boson_); }
    /// The bicomplex of the bosonization (itself for purely even atlases).
    const Bicomplex& bosonization() const { return boson_ ? *boson_ : *this; }
    /// Block of bosonization() receiving block b, or -1 (odd blocks map to zero).
    int quotient_block(std::size_t b) const;
    /// Quotient map C^{p,q}(block b) -> C^{p,q}(bosonization block).
    Matrix quotient_map(std::size_t b, int p, int q) const;

private:
    std::shared_ptr<const Atlas> atlas_;
    int P_ = 0;
    int N_ = 0;
    std::vector<std::vector<std::vector<int>>> subsets_;  // [q] -> chart tuples of size q+1
    std::vector<Block> blocks_;
    std::shared_ptr<const Bicomplex> boson_;
    std::vector<int> boson_block_;
};

}  // namespace superhodge
