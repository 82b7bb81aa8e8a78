#include "superhodge/cech.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>
#include <unordered_map>

namespace superhodge {

namespace {

// Solves a . W = r for the exponent row vector a, with W the (invertible)
// even weight matrix of a chart: a = r . adj / det.
class WeightSolver {
public:
    explicit WeightSolver(const std::vector<Weight>& rows)
    {
        n_ = rows.size();
        if (n_ == 0) return;
        std::vector<std::vector<mpq_class>> m(n_, std::vector<mpq_class>(2 * n_));
        for (std::size_t r = 0; r < n_; ++r) {
            for (std::size_t c = 0; c < n_; ++c) m[r][c] = rows[r][c];
            m[r][n_ + r] = 1;
        }
        mpq_class det = 1;
        for (std::size_t c = 0; c < n_; ++c) {
            std::size_t piv = c;
            while (piv < n_ && m[piv][c] == 0) ++piv;
            if (piv == n_) throw std::invalid_argument("chart weight matrix is singular");
            if (piv != c) {
                std::swap(m[piv], m[c]);
                det = -det;
            }
            det *= m[c][c];
            mpq_class inv = 1 / m[c][c];
            for (auto& x : m[c]) x *= inv;
            for (std::size_t r = 0; r < n_; ++r) {
                if (r == c || m[r][c] == 0) continue;
                mpq_class f = m[r][c];
                for (std::size_t k = 0; k < 2 * n_; ++k) m[r][k] -= f * m[c][k];
            }
        }
        det_ = det.get_num().get_si();
        adj_.assign(n_, std::vector<long>(n_));
        for (std::size_t r = 0; r < n_; ++r)
            for (std::size_t c = 0; c < n_; ++c) {
                mpq_class v = m[r][n_ + c] * det;
                adj_[r][c] = v.get_num().get_si();
            }
    }

    /// Exponents of weight r, or false when r is not in the lattice.
    bool solve(const Weight& r, std::array<std::int16_t, kMaxEven>& out) const
    {
        out.fill(0);
        for (std::size_t i = 0; i < n_; ++i) {
            long s = 0;
            for (std::size_t k = 0; k < n_; ++k) s += r[k] * adj_[k][i];
            if (s % det_ != 0) return false;
            out[i] = static_cast<std::int16_t>(s / det_);
        }
        return true;
    }

private:
    std::size_t n_ = 0;
    long det_ = 1;
    std::vector<std::vector<long>> adj_;
};

std::vector<Weight> weight_box(int rank, int window)
{
    std::vector<Weight> out{Weight{}};
    for (int t = 0; t < rank; ++t) {
        std::vector<Weight> next;
        for (const auto& w : out)
            for (int v = -window; v <= window; ++v) {
                Weight x = w;
                x.push_back(v);
                next.push_back(x);
            }
        out.swap(next);
    }
    return out;
}

struct Shape {
    FormMonomial mono;  // exponents zero
    Weight weight;
};

std::vector<Shape> form_shapes(const Atlas& a, int chart, int p)
{
    const Chart& c = a.charts[static_cast<std::size_t>(chart)];
    const int n = c.sig->n_even(), m = c.sig->n_odd(), T = a.torus_rank;
    std::vector<Shape> out;
    std::vector<std::array<std::uint8_t, kMaxOdd>> degs;
    std::function<void(int, int, std::array<std::uint8_t, kMaxOdd>&, int)> rec = [&](int j, int left,
                                                                                   std::array<std::uint8_t, kMaxOdd>& cur, int) {
        if (j == m) {
            if (left == 0) degs.push_back(cur);
            return;
        }
        for (int k = 0; k <= left; ++k) {
            cur[static_cast<std::size_t>(j)] = static_cast<std::uint8_t>(k);
            rec(j + 1, left - k, cur, 0);
        }
        cur[static_cast<std::size_t>(j)] = 0;
    };
    for (std::uint32_t dx = 0; dx < (1u << n); ++dx) {
        int k = p - __builtin_popcount(dx);
        if (k < 0 || (m == 0 && k > 0)) continue;
        degs.clear();
        std::array<std::uint8_t, kMaxOdd> cur{};
        rec(0, k, cur, 0);
        for (const auto& dt : degs)
            for (std::uint32_t S = 0; S < (1u << m); ++S) {
                Shape s;
                s.mono.fn.odd = S;
                s.mono.dx = dx;
                s.mono.dtheta = dt;
                s.weight.assign(static_cast<std::size_t>(T), 0);
                for (int t = 0; t < T; ++t) {
                    int w = 0;
                    for (int i = 0; i < n; ++i)
                        if ((dx >> i) & 1u) w += c.even_weights[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)];
                    for (int j = 0; j < m; ++j) {
                        int mult = ((S >> j) & 1u) + dt[static_cast<std::size_t>(j)];
                        w += mult * c.odd_weights[static_cast<std::size_t>(j)][static_cast<std::size_t>(t)];
                    }
                    s.weight[static_cast<std::size_t>(t)] = w;
                }
                out.push_back(s);
            }
    }
    return out;
}

// Calls emit(weight, monomial) for every window monomial of Omega^p(U_I).
void enumerate_sections(const Atlas& a, const std::vector<int>& subset, int p, int window,
                        const std::function<void(const Weight&, const FormMonomial&)>& emit)
{
    int chart = subset.front();
    std::uint32_t inv = a.inverted_on(chart, subset);
    WeightSolver solver(a.charts[static_cast<std::size_t>(chart)].even_weights);
    const int n = a.n_even();
    auto box = weight_box(a.torus_rank, window);
    for (const auto& shape : form_shapes(a, chart, p))
        for (const auto& chi : box) {
            Weight r = chi;
            for (std::size_t t = 0; t < r.size(); ++t) r[t] -= shape.weight[t];
            FormMonomial m = shape.mono;
            if (!solver.solve(r, m.fn.exps)) continue;
            bool ok = true;
            for (int i = 0; i < n && ok; ++i)
                if (m.fn.exps[static_cast<std::size_t>(i)] < 0 && !((inv >> i) & 1u)) ok = false;
            if (ok) emit(chi, m);
        }
}

struct EntryHash {
    std::size_t operator()(const std::pair<int, FormMonomial>& e) const noexcept
    {
        return FormMonomialHash{}(e.second) * 31u + static_cast<std::size_t>(e.first);
    }
};

using EntryIndex = std::unordered_map<std::pair<int, FormMonomial>, int, EntryHash>;

EntryIndex index_cell(const std::vector<CellEntry>& cell)
{
    EntryIndex idx;
    idx.reserve(cell.size());
    for (std::size_t k = 0; k < cell.size(); ++k) idx.emplace(std::pair{cell[k].subset, cell[k].mono}, static_cast<int>(k));
    return idx;
}

SparseVec to_column(const FormElement& f, int subset, const EntryIndex& idx, int sign)
{
    std::map<int, Scalar> acc;
    for (const auto& [m, c] : f.terms()) {
        auto it = idx.find({subset, m});
        if (it == idx.end())
            throw std::logic_error("image monomial " + form_monomial_to_string(*f.signature(), m) +
                                   " outside its weight block; transitions are not homogeneous");
        acc.emplace(it->second, sign < 0 ? -c : c);
    }
    SparseVec v;
    for (auto& [k, c] : acc) v.push_back(k, c);
    return v;
}

}  // namespace

std::size_t Block::total_dim() const
{
    std::size_t s = 0;
    for (const auto& col : cells)
        for (const auto& c : col) s += c.size();
    return s;
}

SectionSpace overlap_sections(const Atlas& a, const std::vector<int>& subset, int p, int window)
{
    if (!a.overlaps(subset)) throw std::invalid_argument("chart subset is not in the intersection lattice");
    SectionSpace s;
    s.subset = subset;
    s.p = p;
    s.window = window;
    s.sig = a.local_signature(subset);
    enumerate_sections(a, subset, p, window, [&s](const Weight&, const FormMonomial& m) { s.basis.push_back(m); });
    std::sort(s.basis.begin(), s.basis.end());
    return s;
}

Matrix restriction_matrix(const Atlas& a, const std::vector<int>& small, const std::vector<int>& large, int p, int window)
{
    if (!std::includes(large.begin(), large.end(), small.begin(), small.end()))
        throw std::invalid_argument("restriction needs a subset of the target tuple");
    SectionSpace src = overlap_sections(a, small, p, window);
    SectionSpace dst = overlap_sections(a, large, p, window);
    std::vector<CellEntry> cell;
    for (const auto& m : dst.basis) cell.push_back({0, m});
    EntryIndex idx = index_cell(cell);
    FormPullback pb(a.restriction(small, large));
    Matrix out(dst.basis.size(), src.basis.size(), a.field);
    for (std::size_t c = 0; c < src.basis.size(); ++c) out.set_column(c, to_column(pb(src.basis[c]), 0, idx, 1));
    return out;
}

Bicomplex Bicomplex::assemble(const Atlas& a, int P, int window, bool with_bosonization)
{
    if (P < 0) throw std::invalid_argument("max column must be nonnegative");
    if (window < 0) throw std::invalid_argument("window must be nonnegative");
    require_valid(a);
    Bicomplex b;
    b.atlas_ = std::make_shared<const Atlas>(a);
    b.P_ = P;
    b.N_ = window;
    for (int k = 1; k <= a.n_charts(); ++k) {
        auto s = a.subsets_of_size(k);
        if (s.empty()) break;
        b.subsets_.push_back(s);
    }
    const int Q = b.q_max();
    const Field f = a.field;

    // cells
    std::map<std::pair<Weight, int>, Block> blocks;
    for (int q = 0; q <= Q; ++q)
        for (std::size_t si = 0; si < b.subsets_[static_cast<std::size_t>(q)].size(); ++si)
            for (int p = 0; p <= P + 1; ++p)
                enumerate_sections(a, b.subsets_[static_cast<std::size_t>(q)][si], p, window, [&](const Weight& chi, const FormMonomial& m) {
                    auto key = std::pair{chi, m.parity()};
                    auto it = blocks.find(key);
                    if (it == blocks.end()) {
                        Block blk;
                        blk.weight = chi;
                        blk.parity = m.parity();
                        blk.cells.assign(static_cast<std::size_t>(P + 2), std::vector<std::vector<CellEntry>>(static_cast<std::size_t>(Q + 1)));
                        it = blocks.emplace(key, std::move(blk)).first;
                    }
                    it->second.cells[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)].push_back({static_cast<int>(si), m});
                });

    // restriction pullbacks, one per (I, J) face pair
    std::vector<std::vector<SignaturePtr>> sigs(static_cast<std::size_t>(Q + 1));
    for (int q = 0; q <= Q; ++q)
        for (const auto& s : b.subsets_[static_cast<std::size_t>(q)]) sigs[static_cast<std::size_t>(q)].push_back(a.local_signature(s));
    std::map<std::tuple<int, int, int>, std::unique_ptr<FormPullback>> pullbacks;  // (q, small idx, large idx)
    auto pullback_for = [&](int q, int si, int li) -> FormPullback& {
        auto key = std::tuple{q, si, li};
        auto it = pullbacks.find(key);
        if (it == pullbacks.end()) {
            const auto& small = b.subsets_[static_cast<std::size_t>(q)][static_cast<std::size_t>(si)];
            const auto& large = b.subsets_[static_cast<std::size_t>(q + 1)][static_cast<std::size_t>(li)];
            it = pullbacks.emplace(key, std::make_unique<FormPullback>(a.restriction(small, large))).first;
        }
        return *it->second;
    };
    // faces[q][si] = (large index, sign) for each J containing subset si with |J| = q+2
    std::vector<std::vector<std::vector<std::pair<int, int>>>> faces(static_cast<std::size_t>(Q + 1));
    for (int q = 0; q < Q; ++q) {
        const auto& smalls = b.subsets_[static_cast<std::size_t>(q)];
        faces[static_cast<std::size_t>(q)].resize(smalls.size());
        const auto& larges = b.subsets_[static_cast<std::size_t>(q + 1)];
        for (std::size_t li = 0; li < larges.size(); ++li)
            for (std::size_t k = 0; k < larges[li].size(); ++k) {
                auto small = larges[li];
                small.erase(small.begin() + static_cast<long>(k));
                auto pos = std::lower_bound(smalls.begin(), smalls.end(), small) - smalls.begin();
                faces[static_cast<std::size_t>(q)][static_cast<std::size_t>(pos)].push_back({static_cast<int>(li), (k % 2) ? -1 : 1});
            }
    }

    for (auto& [key, blk] : blocks) {
        for (auto& col : blk.cells)
            for (auto& cell : col) std::sort(cell.begin(), cell.end());
        std::vector<std::vector<EntryIndex>> idx(static_cast<std::size_t>(P + 2), std::vector<EntryIndex>(static_cast<std::size_t>(Q + 1)));
        for (int p = 0; p <= P + 1; ++p)
            for (int q = 0; q <= Q; ++q) idx[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)] = index_cell(blk.cells[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)]);

        blk.d.assign(static_cast<std::size_t>(P + 1), std::vector<Matrix>(static_cast<std::size_t>(Q + 1)));
        blk.delta.assign(static_cast<std::size_t>(P + 2), std::vector<Matrix>(static_cast<std::size_t>(Q)));
        for (int p = 0; p <= P + 1; ++p)
            for (int q = 0; q <= Q; ++q) {
                const auto& cell = blk.cells[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)];
                if (p <= P) {
                    const auto& tgt = blk.cells[static_cast<std::size_t>(p + 1)][static_cast<std::size_t>(q)];
                    Matrix m(tgt.size(), cell.size(), f);
                    for (std::size_t c = 0; c < cell.size(); ++c) {
                        const auto& e = cell[c];
                        FormElement img = d(FormElement::monomial(sigs[static_cast<std::size_t>(q)][static_cast<std::size_t>(e.subset)], e.mono, f.one()));
                        m.set_column(c, to_column(img, e.subset, idx[static_cast<std::size_t>(p + 1)][static_cast<std::size_t>(q)], 1));
                    }
                    blk.d[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)] = std::move(m);
                }
                if (q < Q) {
                    const auto& tgt = blk.cells[static_cast<std::size_t>(p)][static_cast<std::size_t>(q + 1)];
                    const auto& tidx = idx[static_cast<std::size_t>(p)][static_cast<std::size_t>(q + 1)];
                    Matrix m(tgt.size(), cell.size(), f);
                    for (std::size_t c = 0; c < cell.size(); ++c) {
                        const auto& e = cell[c];
                        std::map<int, Scalar> acc;
                        for (auto [li, sign] : faces[static_cast<std::size_t>(q)][static_cast<std::size_t>(e.subset)]) {
                            FormElement img = pullback_for(q, e.subset, li)(e.mono);
                            SparseVec part = to_column(img, li, tidx, sign);
                            for (const auto& [k, v] : part.entries()) {
                                auto [it, ins] = acc.emplace(k, v);
                                if (!ins) it->second += v;
                            }
                        }
                        SparseVec col;
                        for (auto& [k, v] : acc)
                            if (!v.is_zero()) col.push_back(k, v);
                        m.set_column(c, std::move(col));
                    }
                    blk.delta[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)] = std::move(m);
                }
            }
        b.blocks_.push_back(std::move(blk));
    }

    if (with_bosonization && a.n_odd() > 0) {
        auto boson = std::make_shared<Bicomplex>(assemble(bosonize(a), P, window, false));
        std::map<Weight, int> by_weight;
        for (std::size_t k = 0; k < boson->blocks_.size(); ++k) by_weight[boson->blocks_[k].weight] = static_cast<int>(k);
        for (const auto& blk : b.blocks_) {
            auto it = by_weight.find(blk.weight);
            b.boson_block_.push_back(blk.parity == 0 && it != by_weight.end() ? it->second : -1);
        }
        b.boson_ = std::move(boson);
    } else {
        for (std::size_t k = 0; k < b.blocks_.size(); ++k) b.boson_block_.push_back(a.n_odd() == 0 ? static_cast<int>(k) : -1);
    }
    return b;
}

std::size_t Bicomplex::cell_dim(int p, int q, int parity) const
{
    std::size_t s = 0;
    for (const auto& blk : blocks_)
        if (parity < 0 || blk.parity == parity) s += blk.dim(p, q);
    return s;
}

int Bicomplex::quotient_block(std::size_t b) const { return boson_block_.at(b); }

Matrix Bicomplex::quotient_map(std::size_t b, int p, int q) const
{
    const Block& src = blocks_.at(b);
    const auto& scell = src.cells[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)];
    int tb = quotient_block(b);
    if (tb < 0) return Matrix(0, scell.size(), field());
    const Block& dst = bosonization().blocks()[static_cast<std::size_t>(tb)];
    const auto& dcell = dst.cells[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)];
    if (!boson_) return Matrix::identity(scell.size(), field());
    EntryIndex idx = index_cell(dcell);
    Matrix m(dcell.size(), scell.size(), field());
    for (std::size_t c = 0; c < scell.size(); ++c) {
        const FormMonomial& mono = scell[c].mono;
        if (mono.fn.odd != 0 || mono.dtheta_degree() != 0) continue;
        auto it = idx.find({scell[c].subset, mono});
        if (it == idx.end()) throw std::logic_error("even monomial missing from the bosonization cell");
        m.set(static_cast<std::size_t>(it->second), c, field().one());
    }
    return m;
}

}  // namespace superhodge
