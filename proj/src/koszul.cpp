#include "superhodge/koszul.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace superhodge {

namespace {

std::vector<std::uint32_t> subsets_of_size(int n, int a)
{
    std::vector<std::uint32_t> out;
    for (std::uint32_t s = 0; s < (1u << n); ++s)
        if (__builtin_popcount(s) == a) out.push_back(s);
    return out;
}

void compositions(int n, int total, std::vector<int>& cur, std::vector<std::vector<int>>& out)
{
    if (static_cast<int>(cur.size()) == n) {
        if (total == 0) out.push_back(cur);
        return;
    }
    for (int e = total; e >= 0; --e) {
        cur.push_back(e);
        compositions(n, total - e, cur, out);
        cur.pop_back();
    }
}

std::vector<std::vector<int>> monomials_of_degree(int n, int b)
{
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    if (n == 0) {
        if (b == 0) out.push_back({});
        return out;
    }
    compositions(n, b, cur, out);
    std::sort(out.begin(), out.end());
    return out;
}

int bits_below(std::uint32_t mask, int i) { return __builtin_popcount(mask & ((1u << i) - 1u)); }

struct TermIndex {
    std::map<std::uint32_t, std::size_t> wedge;
    std::map<std::vector<int>, std::size_t> sym;
    std::size_t n_sym = 0;

    explicit TermIndex(const KoszulTerm& t) : n_sym(t.sym_basis.size())
    {
        for (std::size_t k = 0; k < t.wedge_basis.size(); ++k) wedge.emplace(t.wedge_basis[k], k);
        for (std::size_t k = 0; k < t.sym_basis.size(); ++k) sym.emplace(t.sym_basis[k], k);
    }
    std::size_t at(std::uint32_t s, const std::vector<int>& m) const { return wedge.at(s) * n_sym + sym.at(m); }
};

}  // namespace

std::vector<std::size_t> KoszulComplex::dims() const
{
    std::vector<std::size_t> out;
    for (const auto& t : terms) out.push_back(t.dim());
    return out;
}

KoszulComplex build_koszul(int w, int k, Field f)
{
    if (w < 0 || k < 0) throw std::invalid_argument("Koszul complex needs w >= 0 and k >= 0");
    if (w > 16) throw std::invalid_argument("Koszul complex dimension too large");
    KoszulComplex cx;
    cx.w = w;
    cx.k = k;
    cx.field = f;
    for (int a = std::min(w, k); a >= 0; --a) {
        KoszulTerm t;
        t.a = a;
        t.b = k - a;
        t.wedge_basis = subsets_of_size(w, a);
        t.sym_basis = monomials_of_degree(w, t.b);
        cx.terms.push_back(std::move(t));
    }
    for (std::size_t j = 0; j + 1 < cx.terms.size(); ++j) {
        const KoszulTerm& src = cx.terms[j];
        const KoszulTerm& tgt = cx.terms[j + 1];
        TermIndex si(src), ti(tgt);
        Matrix kappa(tgt.dim(), src.dim(), f), h(src.dim(), tgt.dim(), f);
        for (std::uint32_t s : src.wedge_basis)
            for (const auto& m : src.sym_basis)
                for (int i = 0; i < w; ++i) {
                    if (!(s >> i & 1u)) continue;
                    std::vector<int> mm = m;
                    ++mm[static_cast<std::size_t>(i)];
                    Scalar sign = f.from_int(bits_below(s, i) % 2 ? -1 : 1);
                    kappa.add_to(ti.at(s & ~(1u << i), mm), si.at(s, m), sign);
                }
        for (std::uint32_t s : tgt.wedge_basis)
            for (const auto& m : tgt.sym_basis)
                for (int i = 0; i < w; ++i) {
                    if ((s >> i & 1u) || m[static_cast<std::size_t>(i)] == 0) continue;
                    std::vector<int> mm = m;
                    --mm[static_cast<std::size_t>(i)];
                    Scalar c = f.from_int(m[static_cast<std::size_t>(i)] * (bits_below(s, i) % 2 ? -1 : 1));
                    h.add_to(si.at(s | (1u << i), mm), ti.at(s, m), c);
                }
        cx.differentials.push_back(std::move(kappa));
        cx.homotopy.push_back(std::move(h));
    }
    return cx;
}

bool weight_exactness(int w, int k, Field f)
{
    if (k < 1) throw std::invalid_argument("weight exactness is stated for k >= 1");
    KoszulComplex cx = build_koszul(w, k, f);
    std::vector<std::size_t> ranks;
    for (const auto& m : cx.differentials) ranks.push_back(rank(m));
    for (std::size_t j = 0; j < cx.terms.size(); ++j) {
        std::size_t out = j < ranks.size() ? ranks[j] : 0;
        std::size_t in = j > 0 ? ranks[j - 1] : 0;
        if (cx.terms[j].dim() != out + in) return false;
    }
    return true;
}

// ---------------------------------------------------------------- filtration

namespace {

void multisets(int n, int size, int start, std::vector<std::uint8_t>& cur, std::vector<std::vector<std::uint8_t>>& out)
{
    if (size == 0) {
        out.push_back(cur);
        return;
    }
    for (int j = start; j < n; ++j) {
        ++cur[static_cast<std::size_t>(j)];
        multisets(n, size - 1, j, cur, out);
        --cur[static_cast<std::size_t>(j)];
    }
}

SparseVec to_vec(const FormElement& e, const std::map<FormMonomial, int>& index)
{
    SparseVec v;
    for (const auto& [m, c] : e.terms()) v.push_back(index.at(m), c);
    return v;
}

}  // namespace

FormElement FiltrationPiece::element(const SparseVec& v) const
{
    FormElement e(sig, field);
    for (const auto& [k, c] : v.entries()) e.add_term(ambient[static_cast<std::size_t>(k)], c);
    return e;
}

FiltrationPiece filtration_piece(const SignaturePtr& sig, int i, int p, int window, Field f)
{
    if (i < 0 || p < 0 || window < 0) throw std::invalid_argument("filtration piece needs i, p, window >= 0");
    FiltrationPiece fp;
    fp.sig = sig;
    fp.i = i;
    fp.p = p;
    fp.window = window;
    fp.field = f;
    fp.ambient = form_basis(*sig, p, window);
    std::map<FormMonomial, int> index;
    for (std::size_t k = 0; k < fp.ambient.size(); ++k) index.emplace(fp.ambient[k], static_cast<int>(k));

    auto close = [&](int level) {
        const int m = sig->n_odd();
        Reducer red(f);
        for (int j = 0; j <= std::min(level, m); ++j) {
            int kdeg = level - j;
            if (kdeg > p || (m == 0 && kdeg > 0)) continue;
            std::vector<std::vector<std::uint8_t>> ks;
            std::vector<std::uint8_t> cur(static_cast<std::size_t>(m), 0);
            multisets(m, kdeg, 0, cur, ks);
            for (std::uint32_t s = 0; s < (1u << m); ++s) {
                if (__builtin_popcount(s) != j) continue;
                for (const auto& kk : ks) {
                    FormMonomial g;
                    g.fn.odd = s;
                    std::copy(kk.begin(), kk.end(), g.dtheta.begin());
                    FormElement gen = FormElement::monomial(sig, g, f.one());
                    for (const auto& mu : form_basis(*sig, p - kdeg, window)) {
                        FormElement prod = wedge(gen, FormElement::monomial(sig, mu, f.one()));
                        if (!prod.is_zero()) red.add(to_vec(prod, index));
                    }
                }
            }
        }
        return red;
    };
    Reducer fi = close(i), fnext = close(i + 1);
    fp.basis = fi.vectors();
    for (const auto& v : fp.basis)
        if (fnext.add(v)) fp.graded.push_back(v);
    return fp;
}

bool GradedCohomology::exact() const
{
    return std::all_of(cohomology.begin(), cohomology.end(), [](std::size_t h) { return h == 0; });
}

GradedCohomology graded_cohomology(const SignaturePtr& sig, int i, int window, int p_max, Field f)
{
    std::vector<FiltrationPiece> fi, fnext;
    for (int p = 0; p <= p_max + 1; ++p) {
        fi.push_back(filtration_piece(sig, i, p, window, f));
        fnext.push_back(filtration_piece(sig, i + 1, p, window, f));
    }
    // rank of d: gr_p -> gr_{p+1}
    std::vector<std::size_t> ranks;
    for (int p = 0; p <= p_max; ++p) {
        const FiltrationPiece& tgt = fi[static_cast<std::size_t>(p + 1)];
        std::map<FormMonomial, int> index;
        for (std::size_t k = 0; k < tgt.ambient.size(); ++k) index.emplace(tgt.ambient[k], static_cast<int>(k));
        Reducer red(f);
        for (const auto& v : fnext[static_cast<std::size_t>(p + 1)].basis) red.add(v);
        std::size_t base = red.rank();
        for (const auto& v : fi[static_cast<std::size_t>(p)].graded) red.add(to_vec(d(fi[static_cast<std::size_t>(p)].element(v)), index));
        ranks.push_back(red.rank() - base);
    }
    GradedCohomology out;
    for (int p = 0; p <= p_max; ++p) {
        std::size_t dim = fi[static_cast<std::size_t>(p)].graded.size();
        out.dims.push_back(dim);
        std::size_t in = p > 0 ? ranks[static_cast<std::size_t>(p - 1)] : 0;
        out.cohomology.push_back(dim - ranks[static_cast<std::size_t>(p)] - in);
    }
    return out;
}

// ---------------------------------------------------------------- tau

Matrix tau_matrix(int dim_v, Field f)
{
    if (dim_v < 2) throw std::invalid_argument("tau needs dim V >= 2");
    const int n = dim_v;
    std::map<std::pair<int, int>, int> pair_index;
    for (int b = 0; b < n; ++b)
        for (int c = b + 1; c < n; ++c) pair_index.emplace(std::pair{b, c}, static_cast<int>(pair_index.size()));
    const int np = static_cast<int>(pair_index.size());
    auto index = [&](int a, int b, int c) { return static_cast<std::size_t>(a * np + pair_index.at({b, c})); };
    // coefficient and index of e_x (x) e_y ^ e_z
    auto add = [&](Matrix& m, std::size_t col, int x, int y, int z, int sign) {
        if (y == z) return;
        if (y > z) {
            std::swap(y, z);
            sign = -sign;
        }
        m.add_to(index(x, y, z), col, f.from_int(sign));
    };
    Matrix t(static_cast<std::size_t>(n * np), static_cast<std::size_t>(n * np), f);
    for (int a = 0; a < n; ++a)
        for (const auto& [bc, k] : pair_index) {
            auto [b, c] = bc;
            std::size_t col = index(a, b, c);
            add(t, col, c, a, b, 1);
            add(t, col, b, a, c, -1);
        }
    return t;
}

}  // namespace superhodge
