#include "superhodge/specseq.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace superhodge {

// ---------------------------------------------------------------- reduction

SpectralSequence::SpectralSequence(const Bicomplex& b) : b_(&b)
{
    const int P = b.max_column(), Q = b.q_max(), top = max_degree();
    for (std::size_t bi = 0; bi < b.blocks().size(); ++bi) {
        const Block& blk = b.blocks()[bi];
        BlockData data;
        data.basis.resize(static_cast<std::size_t>(top + 2));
        data.cell_offset.assign(static_cast<std::size_t>(P + 2), std::vector<std::size_t>(static_cast<std::size_t>(Q + 1), 0));
        for (int n = 0; n <= top; ++n)
            for (int p = std::min(n, P + 1); p >= std::max(0, n - Q); --p) {
                int q = n - p;
                data.cell_offset[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)] = data.basis[static_cast<std::size_t>(n)].size();
                for (std::size_t k = 0; k < blk.dim(p, q); ++k) data.basis[static_cast<std::size_t>(n)].push_back({p, q, k});
            }
        data.elements.resize(static_cast<std::size_t>(top + 2));
        for (int n = 0; n <= top + 1; ++n) data.elements[static_cast<std::size_t>(n)].resize(data.basis[static_cast<std::size_t>(n)].size());
        data_.push_back(std::move(data));

        BlockData& dd = data_.back();
        std::vector<char> is_target;  // for the current degree
        for (int n = 0; n <= top; ++n) {
            auto& elems = dd.elements[static_cast<std::size_t>(n)];
            const auto& basis = dd.basis[static_cast<std::size_t>(n)];
            is_target.assign(basis.size(), 0);
            for (std::size_t j = 0; j < basis.size(); ++j)
                if (elems[j].role == Role::Target) is_target[j] = 1;
            Matrix D = total_differential(bi, n);
            std::unordered_map<int, std::size_t> pivot;
            std::vector<SparseVec> R(basis.size()), V(basis.size());
            const auto& next_basis = dd.basis[static_cast<std::size_t>(n + 1)];
            auto& next = dd.elements[static_cast<std::size_t>(n + 1)];
            for (std::size_t j = 0; j < basis.size(); ++j) {
                if (is_target[j]) continue;
                SparseVec r = D.column(j);
                SparseVec v;
                v.push_back(static_cast<int>(j), b.field().one());
                while (!r.empty()) {
                    auto it = pivot.find(r.low());
                    if (it == pivot.end()) break;
                    Scalar c = r.low_value();
                    r.axpy(-c, R[it->second]);
                    v.axpy(-c, V[it->second]);
                }
                Element& e = elems[j];
                if (r.empty()) {
                    e.role = Role::Essential;
                    e.vec = std::move(v);
                    continue;
                }
                Scalar inv = r.low_value().inverse();
                r.scale(inv);
                v.scale(inv);
                int low = r.low();
                pivot.emplace(low, j);
                e.role = Role::Source;
                e.partner = low;
                e.gap = next_basis[static_cast<std::size_t>(low)].p - basis[j].p;
                e.vec = v;
                Element& t = next[static_cast<std::size_t>(low)];
                t.role = Role::Target;
                t.partner = static_cast<int>(j);
                t.gap = e.gap;
                t.vec = r;
                R[j] = std::move(r);
                V[j] = std::move(v);
            }
        }
    }
}

Matrix SpectralSequence::total_differential(std::size_t block, int n) const
{
    const Block& blk = b_->blocks()[block];
    const BlockData& dd = data_[block];
    const auto& src = dd.basis[static_cast<std::size_t>(n)];
    std::size_t rows = static_cast<std::size_t>(n + 1) < dd.basis.size() ? dd.basis[static_cast<std::size_t>(n + 1)].size() : 0;
    Matrix D(rows, src.size(), b_->field());
    const int P = b_->max_column(), Q = b_->q_max();
    for (std::size_t j = 0; j < src.size(); ++j) {
        auto [p, q, k] = src[j];
        std::map<int, Scalar> acc;
        if (q < Q) {
            std::size_t off = dd.cell_offset[static_cast<std::size_t>(p)][static_cast<std::size_t>(q + 1)];
            for (const auto& [r, v] : blk.delta[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)].column(k).entries())
                acc.emplace(static_cast<int>(off) + r, v);
        }
        if (p <= P) {
            std::size_t off = dd.cell_offset[static_cast<std::size_t>(p + 1)][static_cast<std::size_t>(q)];
            for (const auto& [r, v] : blk.d[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)].column(k).entries())
                acc.emplace(static_cast<int>(off) + r, (q % 2) ? -v : v);
        }
        SparseVec col;
        for (auto& [r, v] : acc) col.push_back(r, v);
        D.set_column(j, std::move(col));
    }
    return D;
}

// ---------------------------------------------------------------- pages

int SpectralSequence::r_star(int q) const { return std::max(q + 2, q_max() - q + 2); }

bool SpectralSequence::reliable(int p, int q, int r) const
{
    int reff = effective_r(q, r);
    return p + reff <= max_column();
}

bool SpectralSequence::alive(const Element& e, int r_eff) const
{
    return e.role == Role::Essential || e.gap >= r_eff;
}

Page SpectralSequence::page(int r) const
{
    if (r < 0 && r != kInfinity) throw std::invalid_argument("page index must be nonnegative");
    Page pg;
    pg.r = r;
    pg.max_column = max_column();
    pg.q_max = q_max();
    for (int p = 0; p <= max_column() + 1; ++p)
        for (int q = 0; q <= q_max(); ++q) pg.cells[{p, q}] = PageCell{p, q, 0, 0, 0, reliable(p, q, r)};

    // position of each alive element in its cell basis
    std::map<std::tuple<std::size_t, int, int>, std::size_t> position;
    for (std::size_t bi = 0; bi < data_.size(); ++bi) {
        const BlockData& dd = data_[bi];
        int parity = b_->blocks()[bi].parity;
        for (std::size_t n = 0; n < dd.elements.size(); ++n)
            for (std::size_t i = 0; i < dd.elements[n].size(); ++i) {
                const auto& te = dd.basis[n][i];
                if (!alive(dd.elements[n][i], effective_r(te.q, r))) continue;
                PageCell& c = pg.cells.at({te.p, te.q});
                position[{bi, static_cast<int>(n), static_cast<int>(i)}] = c.dim;
                ++c.dim;
                ++(parity ? c.odd : c.even);
            }
    }
    if (r == kInfinity) return pg;
    for (int p = 0; p <= max_column() + 1; ++p)
        for (int q = 0; q <= q_max(); ++q) {
            int tp = p + r, tq = q - r + 1;
            if (tp > max_column() + 1 || tq < 0 || tq > q_max()) continue;
            pg.differentials[{p, q}] = Matrix(pg.cells.at({tp, tq}).dim, pg.cells.at({p, q}).dim, b_->field());
        }
    for (std::size_t bi = 0; bi < data_.size(); ++bi) {
        const BlockData& dd = data_[bi];
        for (std::size_t n = 0; n < dd.elements.size(); ++n)
            for (std::size_t i = 0; i < dd.elements[n].size(); ++i) {
                const Element& e = dd.elements[n][i];
                if (e.role != Role::Source || e.gap != r) continue;
                const auto& te = dd.basis[n][i];
                auto it = pg.differentials.find({te.p, te.q});
                if (it == pg.differentials.end()) continue;
                std::size_t col = position.at({bi, static_cast<int>(n), static_cast<int>(i)});
                std::size_t row = position.at({bi, static_cast<int>(n + 1), e.partner});
                it->second.set(row, col, b_->field().one());
            }
    }
    return pg;
}

Page SpectralSequence::e_infinity() const { return page(kInfinity); }

std::vector<std::size_t> SpectralSequence::total_de_rham(int n_max) const
{
    if (n_max > max_column() - 1) throw std::invalid_argument("total de Rham degree exceeds P - 1");
    std::vector<std::size_t> out(static_cast<std::size_t>(std::max(n_max + 1, 0)), 0);
    for (const auto& dd : data_)
        for (int n = 0; n <= n_max; ++n)
            for (const auto& e : dd.elements[static_cast<std::size_t>(n)])
                if (e.role == Role::Essential) ++out[static_cast<std::size_t>(n)];
    return out;
}

std::vector<Representative> SpectralSequence::representatives(int p, int q, int r) const
{
    std::vector<Representative> out;
    int n = p + q;
    for (std::size_t bi = 0; bi < data_.size(); ++bi) {
        const BlockData& dd = data_[bi];
        if (static_cast<std::size_t>(n) >= dd.elements.size()) continue;
        for (std::size_t i = 0; i < dd.elements[static_cast<std::size_t>(n)].size(); ++i) {
            const auto& te = dd.basis[static_cast<std::size_t>(n)][i];
            if (te.p != p) continue;
            const Element& e = dd.elements[static_cast<std::size_t>(n)][i];
            if (alive(e, effective_r(q, r))) out.push_back({bi, n, e.vec});
        }
    }
    return out;
}

Vector SpectralSequence::page_coordinates(std::size_t block, int p, int q, int r, const SparseVec& chain) const
{
    const BlockData& dd = data_.at(block);
    int n = p + q;
    const auto& elems = dd.elements.at(static_cast<std::size_t>(n));
    std::map<int, Scalar> coef;
    SparseVec v = chain;
    while (!v.empty()) {
        int i = v.low();
        const Element& e = elems[static_cast<std::size_t>(i)];
        Scalar c = v.low_value() / e.vec.low_value();
        v.axpy(-c, e.vec);
        coef.emplace(i, c);
    }
    Vector out;
    for (std::size_t i = 0; i < elems.size(); ++i) {
        const auto& te = dd.basis[static_cast<std::size_t>(n)][i];
        if (te.p != p || !alive(elems[i], effective_r(q, r))) continue;
        auto it = coef.find(static_cast<int>(i));
        out.push_back(it == coef.end() ? b_->field().zero() : it->second);
    }
    return out;
}

// ---------------------------------------------------------------- induced maps

namespace {

std::size_t induced_rank(const SpectralSequence& x, const SpectralSequence& x0, int p, int q, int r_x, int r_x0)
{
    const Bicomplex& bx = x.bicomplex();
    std::size_t total = 0;
    int n = p + q;
    auto reps = x.representatives(p, q, r_x);
    std::map<std::size_t, std::vector<const Representative*>> by_block;
    for (const auto& rep : reps) by_block[rep.block].push_back(&rep);
    for (const auto& [bi, list] : by_block) {
        int tb = bx.quotient_block(bi);
        if (tb < 0) continue;
        const auto& src_basis = x.tot_basis(bi, n);
        const auto& dst_basis = x0.tot_basis(static_cast<std::size_t>(tb), n);
        // offsets of each (p', q') cell in the target Tot^n
        std::map<std::pair<int, int>, std::size_t> dst_offset;
        for (std::size_t k = 0; k < dst_basis.size(); ++k) dst_offset.emplace(std::pair{dst_basis[k].p, dst_basis[k].q}, k);
        std::map<std::pair<int, int>, Matrix> qmaps;
        std::vector<Vector> columns;
        for (const auto* rep : list) {
            std::map<int, Scalar> acc;
            for (const auto& [idx, val] : rep->chain.entries()) {
                const auto& te = src_basis[static_cast<std::size_t>(idx)];
                auto key = std::pair{te.p, te.q};
                auto it = qmaps.find(key);
                if (it == qmaps.end()) it = qmaps.emplace(key, bx.quotient_map(bi, te.p, te.q)).first;
                for (const auto& [row, c] : it->second.column(te.index).entries()) {
                    int target = static_cast<int>(dst_offset.at(key)) + row;
                    auto [jt, ins] = acc.emplace(target, val * c);
                    if (!ins) jt->second += val * c;
                }
            }
            SparseVec img;
            for (auto& [k, c] : acc)
                if (!c.is_zero()) img.push_back(k, c);
            columns.push_back(x0.page_coordinates(static_cast<std::size_t>(tb), p, q, r_x0, img));
        }
        if (columns.empty() || columns[0].empty()) continue;
        Matrix m(columns[0].size(), columns.size(), bx.field());
        for (std::size_t c = 0; c < columns.size(); ++c) m.set_column(c, SparseVec::from_dense(columns[c]));
        total += rank(m);
    }
    return total;
}

}  // namespace

std::size_t induced_quotient_rank(const SpectralSequence& x, const SpectralSequence& x0, int p, int q, int r)
{
    return induced_rank(x, x0, p, q, r, r);
}

long DeltaTable::at(int p, int q) const
{
    if (p < 0 || q < 0) return 0;
    auto it = values.find({p, q});
    if (it == values.end()) throw std::out_of_range("delta(" + std::to_string(p) + "," + std::to_string(q) + ") is not reliable");
    return it->second;
}

DeltaTable delta_invariant(const SpectralSequence& x, const SpectralSequence& x0)
{
    DeltaTable t;
    Page e1 = x0.page(1);
    for (int p = 0; p + 1 <= x.max_column(); ++p)
        for (int q = 0; q <= x.q_max(); ++q) {
            std::size_t h = e1.cell(p, q).dim;
            t.values[{p, q}] = static_cast<long>(h) - static_cast<long>(induced_quotient_rank(x, x0, p, q, 1));
        }
    return t;
}

// ---------------------------------------------------------------- checks

bool CheckReport::pass() const
{
    return std::all_of(items.begin(), items.end(), [](const CheckItem& c) { return c.pass; });
}

void CheckReport::add(std::string name, bool ok, std::string detail)
{
    items.push_back({std::move(name), ok, std::move(detail)});
}

namespace {

std::string cell_name(int p, int q) { return "(" + std::to_string(p) + "," + std::to_string(q) + ")"; }

}  // namespace

CheckReport check_n2_formula(const SpectralSequence& x, const SpectralSequence& x0)
{
    CheckReport rep;
    const Atlas& a = x.bicomplex().atlas();
    if (a.n_odd() != 2 || !a.field.is_rational()) {
        rep.add("n2_applicable", false, "requires odd dimension 2 over the rationals");
        return rep;
    }
    Page e2 = x.page(2), einf = x.e_infinity(), h = x0.page(1);
    DeltaTable delta = delta_invariant(x, x0);
    std::ostringstream formula_detail, odd_detail, degen_detail;
    bool formula_ok = true, odd_ok = true, degen_ok = true;
    int compared = 0;
    for (const auto& [key, c] : e2.cells) {
        auto [p, q] = key;
        if (!c.reliable) continue;
        long rhs = static_cast<long>(h.cell(p, q).dim) + delta.at(p + 1, q - 1) - delta.at(p, q);
        ++compared;
        if (static_cast<long>(c.dim) != rhs) {
            formula_ok = false;
            formula_detail << cell_name(p, q) << ": E2=" << c.dim << " formula=" << rhs << "; ";
        }
        if (c.odd != 0) {
            odd_ok = false;
            odd_detail << cell_name(p, q) << " odd=" << c.odd << "; ";
        }
        const PageCell& ci = einf.cell(p, q);
        if (ci.reliable && ci.dim != c.dim) {
            degen_ok = false;
            degen_detail << cell_name(p, q) << ": E2=" << c.dim << " Einf=" << ci.dim << "; ";
        }
    }
    rep.add("n2_dimension_formula", formula_ok, formula_ok ? std::to_string(compared) + " reliable cells" : formula_detail.str());
    rep.add("n2_odd_part_vanishes", odd_ok, odd_detail.str());
    rep.add("n2_degenerates_at_E2", degen_ok, degen_detail.str());
    return rep;
}

CheckReport check_general_invariants(const SpectralSequence& x, const SpectralSequence& x0)
{
    CheckReport rep;
    const int P = x.max_column(), Q = x.q_max();
    const Atlas& a = x.bicomplex().atlas();
    Page e2 = x.page(2), e2b = x0.page(2), hb = x0.page(1), einf = x.e_infinity(), einfb = x0.e_infinity();

    // E2^{00}
    {
        std::size_t dx = e2.cell(0, 0).dim, db = e2b.cell(0, 0).dim;
        std::size_t rk = induced_quotient_rank(x, x0, 0, 0, 2);
        bool ok = dx == 1 && db == 1 && rk == 1;
        rep.add("E2_00_is_H0dR_X0", ok, "dim E2^00=" + std::to_string(dx) + " H0dR(X0)=" + std::to_string(db) + " rank=" + std::to_string(rk));
    }
    // E2^{10} -> H^0(Omega^1_X0)
    if (x.reliable(1, 0, 2)) {
        std::size_t dx = e2.cell(1, 0).dim;
        std::size_t rk = induced_rank(x, x0, 1, 0, 2, 1);
        std::size_t h10 = hb.cell(1, 0).dim;
        rep.add("E2_10_injects", rk == dx && dx <= h10,
                "dim E2^10=" + std::to_string(dx) + " rank=" + std::to_string(rk) + " h10(X0)=" + std::to_string(h10));
    }
    // skewness inequality
    {
        bool ok = true;
        int tested = 0;
        std::ostringstream det;
        for (int m = 0; m <= P + Q; ++m) {
            bool all = true;
            for (int i = std::max(0, m - Q); i <= m; ++i) all = all && i <= P + 1 && einf.cell(i, m - i).reliable;
            if (!all) continue;
            for (int p = 0; p <= m; ++p) {
                std::size_t lhs = 0, rhs = 0;
                for (int i = std::max(p, m - Q); i <= m; ++i) {
                    lhs += einf.cell(i, m - i).dim;
                    rhs += hb.cell(i, m - i).dim;
                }
                ++tested;
                if (lhs > rhs) {
                    ok = false;
                    det << "m=" << m << " p=" << p << ": " << lhs << ">" << rhs << "; ";
                }
            }
        }
        rep.add("skewness_inequality", ok, ok ? std::to_string(tested) + " inequalities" : det.str());
    }
    // surjectivity on E_inf^{0,m}
    {
        bool ok = true;
        std::ostringstream det;
        for (int m = 0; m <= Q; ++m) {
            if (!x.reliable(0, m, kInfinity)) continue;
            std::size_t rk = induced_quotient_rank(x, x0, 0, m, kInfinity);
            std::size_t target = einfb.cell(0, m).dim;
            if (rk != target) {
                ok = false;
                det << "m=" << m << ": rank " << rk << " of " << target << "; ";
            }
        }
        rep.add("Einf_0m_surjective", ok, det.str());
    }
    // de Rham comparison with the bosonization
    {
        int n_max = P - 1;
        auto hx = x.total_de_rham(n_max), hb0 = x0.total_de_rham(n_max);
        bool ok = hx == hb0;
        std::ostringstream det;
        for (int n = 0; n <= n_max; ++n) {
            bool all = true;
            std::size_t sum = 0;
            for (int p = std::max(0, n - Q); p <= n; ++p) {
                all = all && einf.cell(p, n - p).reliable;
                sum += einf.cell(p, n - p).dim;
            }
            if (all && sum != hx[static_cast<std::size_t>(n)]) {
                ok = false;
                det << "n=" << n << ": sum Einf=" << sum << " H=" << hx[static_cast<std::size_t>(n)] << "; ";
            }
            if (hx[static_cast<std::size_t>(n)] != hb0[static_cast<std::size_t>(n)])
                det << "n=" << n << ": H(X)=" << hx[static_cast<std::size_t>(n)] << " H(X0)=" << hb0[static_cast<std::size_t>(n)] << "; ";
        }
        rep.add("de_Rham_matches_X0", ok, det.str());
    }
    if (a.field.is_rational()) {
        DeltaTable delta = delta_invariant(x, x0);
        bool ok = true;
        for (int q = 0; q <= Q; ++q) ok = ok && delta.at(0, q) == 0;
        rep.add("delta_0q_vanishes", ok);
    }
    if (a.field.characteristic() == 2) {
        bool ok = true;
        std::ostringstream det;
        for (const auto& [key, c] : e2.cells)
            if (c.reliable && c.odd != 0) {
                ok = false;
                det << cell_name(key.first, key.second) << " odd=" << c.odd << "; ";
            }
        rep.add("char2_odd_E2_vanishes", ok, det.str());
    }
    return rep;
}

StabilityReport stability_probe(const Atlas& a, int P, int window, int r_max)
{
    StabilityReport rep;
    Bicomplex b1 = Bicomplex::assemble(a, P, window, false);
    Bicomplex b2 = Bicomplex::assemble(a, P, window + 1, false);
    SpectralSequence s1(b1), s2(b2);
    std::vector<int> pages;
    for (int r = 1; r <= r_max; ++r) pages.push_back(r);
    pages.push_back(kInfinity);
    for (int r : pages) {
        Page p1 = s1.page(r), p2 = s2.page(r);
        for (const auto& [key, c] : p1.cells) {
            if (!c.reliable) continue;
            const PageCell& c2 = p2.cell(key.first, key.second);
            if (c.dim != c2.dim || c.odd != c2.odd) {
                rep.stable = false;
                std::ostringstream os;
                os << "E" << (r == kInfinity ? std::string("inf") : std::to_string(r)) << cell_name(key.first, key.second) << ": " << c.dim
                   << " at N=" << window << ", " << c2.dim << " at N=" << window + 1;
                rep.differences.push_back(os.str());
            }
        }
    }
    if (P >= 1) {
        auto t1 = s1.total_de_rham(P - 1), t2 = s2.total_de_rham(P - 1);
        if (t1 != t2) {
            rep.stable = false;
            rep.differences.push_back("total de Rham differs between windows");
        }
    }
    return rep;
}

}  // namespace superhodge
