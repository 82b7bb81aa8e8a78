#include "superhodge/atlas.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "superhodge/superforms.hpp"

namespace superhodge {

// ---------------------------------------------------------------- Atlas

bool Atlas::overlaps(const std::vector<int>& subset) const
{
    return std::binary_search(lattice.begin(), lattice.end(), subset);
}

std::vector<std::vector<int>> Atlas::subsets_of_size(int k) const
{
    std::vector<std::vector<int>> out;
    for (const auto& s : lattice)
        if (static_cast<int>(s.size()) == k) out.push_back(s);
    return out;
}

std::uint32_t Atlas::inverted_on(int i, const std::vector<int>& subset) const
{
    std::uint32_t mask = 0;
    for (int j : subset)
        if (j != i) mask |= transitions.at({i, j}).inverted;
    return mask;
}

SignaturePtr Atlas::local_signature(const std::vector<int>& subset) const
{
    int i = subset.front();
    return localize(charts.at(static_cast<std::size_t>(i)).sig, inverted_on(i, subset));
}

SuperHomomorphism Atlas::transition(int i, int j, std::uint32_t source_mask, std::uint32_t target_mask) const
{
    SignaturePtr src = localize(charts.at(static_cast<std::size_t>(j)).sig, source_mask);
    SignaturePtr tgt = localize(charts.at(static_cast<std::size_t>(i)).sig, target_mask);
    if (i == j) {
        SuperHomomorphism id = SuperHomomorphism::identity(tgt, field);
        return SuperHomomorphism(src, tgt, id.even_images(), id.odd_images());
    }
    const Transition& t = transitions.at({i, j});
    std::vector<SuperPolynomial> ev, od;
    for (const auto& p : t.even) ev.push_back(p.relocalized(tgt));
    for (const auto& p : t.odd) od.push_back(p.relocalized(tgt));
    return SuperHomomorphism(src, tgt, std::move(ev), std::move(od));
}

SuperHomomorphism Atlas::restriction(const std::vector<int>& small, const std::vector<int>& large) const
{
    int j = small.front(), i = large.front();
    return transition(i, j, inverted_on(j, small), inverted_on(i, large));
}

Weight Atlas::even_weight(int chart, const std::array<std::int16_t, kMaxEven>& exps) const
{
    Weight w(static_cast<std::size_t>(torus_rank), 0);
    const Chart& c = charts.at(static_cast<std::size_t>(chart));
    for (std::size_t i = 0; i < c.even_weights.size(); ++i)
        for (int t = 0; t < torus_rank; ++t) w[static_cast<std::size_t>(t)] += exps[i] * c.even_weights[i][static_cast<std::size_t>(t)];
    return w;
}

Weight Atlas::weight(int chart, const SuperMonomial& m) const
{
    Weight w = even_weight(chart, m.exps);
    const Chart& c = charts.at(static_cast<std::size_t>(chart));
    for (std::size_t j = 0; j < c.odd_weights.size(); ++j)
        if ((m.odd >> j) & 1u)
            for (int t = 0; t < torus_rank; ++t) w[static_cast<std::size_t>(t)] += c.odd_weights[j][static_cast<std::size_t>(t)];
    return w;
}

void Atlas::set_full_lattice()
{
    lattice.clear();
    int n = n_charts();
    for (std::uint32_t s = 1; s < (1u << n); ++s) {
        std::vector<int> v;
        for (int i = 0; i < n; ++i)
            if ((s >> i) & 1u) v.push_back(i);
        lattice.push_back(v);
    }
    std::sort(lattice.begin(), lattice.end());
}

// ---------------------------------------------------------------- validation

std::string ValidationReport::summary() const
{
    std::ostringstream os;
    os << (ok() ? "valid" : "invalid") << " (" << checks << " checks";
    if (!ok()) os << ", " << failures.size() << " failures";
    os << ")";
    for (const auto& f : failures) os << "\n  " << f;
    return os.str();
}

namespace {

std::string subset_label(const std::vector<int>& s)
{
    std::string out = "{";
    for (std::size_t k = 0; k < s.size(); ++k) out += (k ? "," : "") + std::to_string(s[k]);
    return out + "}";
}

std::string pair_label(int i, int j) { return "phi_" + std::to_string(i) + std::to_string(j); }

// Rank of an integer matrix over Q.
int integer_rank(const std::vector<Weight>& rows, int cols)
{
    Field q = Field::rational();
    Matrix m(rows.size(), static_cast<std::size_t>(cols), q);
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (int c = 0; c < cols; ++c) m.set(r, static_cast<std::size_t>(c), q.from_int(rows[r][static_cast<std::size_t>(c)]));
    return static_cast<int>(rank(m));
}

bool same_images(const SuperHomomorphism& a, const SuperHomomorphism& b)
{
    for (std::size_t i = 0; i < a.even_images().size(); ++i)
        if (a.even_images()[i] != b.even_images()[i]) return false;
    for (std::size_t j = 0; j < a.odd_images().size(); ++j)
        if (a.odd_images()[j] != b.odd_images()[j]) return false;
    return true;
}

}  // namespace

ValidationReport validate_atlas(const Atlas& a)
{
    ValidationReport rep;
    auto fail = [&rep](const std::string& s) { rep.failures.push_back(s); };
    ++rep.checks;
    if (a.charts.empty()) {
        fail("atlas has no charts");
        return rep;
    }
    const int n = a.n_even(), m = a.n_odd(), T = a.torus_rank;

    // dimensions and gradings
    for (int c = 0; c < a.n_charts(); ++c) {
        const Chart& ch = a.charts[static_cast<std::size_t>(c)];
        ++rep.checks;
        if (ch.sig->n_even() != n || ch.sig->n_odd() != m)
            fail("chart " + std::to_string(c) + " has dimension " + std::to_string(ch.sig->n_even()) + "|" +
                 std::to_string(ch.sig->n_odd()));
        if (ch.sig->inverted != 0) fail("chart " + std::to_string(c) + " declares inverted coordinates");
        ++rep.checks;
        bool shapes = static_cast<int>(ch.even_weights.size()) == ch.sig->n_even() &&
                      static_cast<int>(ch.odd_weights.size()) == ch.sig->n_odd();
        for (const auto& w : ch.even_weights) shapes = shapes && static_cast<int>(w.size()) == T;
        for (const auto& w : ch.odd_weights) shapes = shapes && static_cast<int>(w.size()) == T;
        if (!shapes) {
            fail("chart " + std::to_string(c) + " weight vectors do not match the torus rank");
            continue;
        }
        ++rep.checks;
        if (T != ch.sig->n_even() || integer_rank(ch.even_weights, T) != T)
            fail("chart " + std::to_string(c) + " even weights are not an invertible square matrix");
    }
    if (!rep.ok()) return rep;

    // lattice
    ++rep.checks;
    if (!std::is_sorted(a.lattice.begin(), a.lattice.end())) fail("intersection lattice is not sorted");
    for (int c = 0; c < a.n_charts(); ++c)
        if (!a.overlaps({c})) fail("chart " + std::to_string(c) + " missing from the lattice");
    for (const auto& s : a.lattice) {
        ++rep.checks;
        if (!std::is_sorted(s.begin(), s.end()) || std::adjacent_find(s.begin(), s.end()) != s.end() || s.front() < 0 ||
            s.back() >= a.n_charts()) {
            fail("malformed lattice member " + subset_label(s));
            continue;
        }
        for (std::size_t k = 0; k < s.size() && s.size() > 1; ++k) {
            auto t = s;
            t.erase(t.begin() + static_cast<long>(k));
            if (!a.overlaps(t)) fail("lattice not closed under subsets: " + subset_label(t) + " of " + subset_label(s));
        }
        if (s.size() == 2)
            for (auto [i, j] : {std::pair{s[0], s[1]}, std::pair{s[1], s[0]}})
                if (!a.transitions.count({i, j})) fail("missing transition " + pair_label(i, j));
    }
    for (const auto& [key, t] : a.transitions) {
        if (key.first == key.second) fail("transition " + pair_label(key.first, key.second) + " must not be declared");
        std::vector<int> s{std::min(key.first, key.second), std::max(key.first, key.second)};
        if (!a.overlaps(s)) fail("transition " + pair_label(key.first, key.second) + " between non-overlapping charts");
    }
    if (!rep.ok()) return rep;

    // individual transitions: parity, units, homogeneity
    for (const auto& [key, t] : a.transitions) {
        auto [i, j] = key;
        ++rep.checks;
        if (static_cast<int>(t.even.size()) != n || static_cast<int>(t.odd.size()) != m) {
            fail(pair_label(i, j) + " has the wrong number of images");
            continue;
        }
        SuperHomomorphism h;
        try {
            h = a.transition(i, j, a.transitions.at({j, i}).inverted, t.inverted);
        } catch (const std::exception& e) {
            fail(pair_label(i, j) + ": " + e.what());
            continue;
        }
        std::string err = h.check();
        if (!err.empty()) fail(pair_label(i, j) + ": " + err);
        const Chart& cj = a.charts[static_cast<std::size_t>(j)];
        auto homogeneous = [&](const SuperPolynomial& p, const Weight& w, const std::string& what) {
            ++rep.checks;
            for (const auto& [mono, c] : p.terms())
                if (a.weight(i, mono) != w) {
                    fail(pair_label(i, j) + ": image of " + what + " is not homogeneous of the declared weight");
                    return;
                }
        };
        for (int k = 0; k < n; ++k)
            homogeneous(h.even_images()[static_cast<std::size_t>(k)], cj.even_weights[static_cast<std::size_t>(k)], cj.sig->even[static_cast<std::size_t>(k)]);
        for (int k = 0; k < m; ++k)
            homogeneous(h.odd_images()[static_cast<std::size_t>(k)], cj.odd_weights[static_cast<std::size_t>(k)], cj.sig->odd[static_cast<std::size_t>(k)]);
    }
    if (!rep.ok()) return rep;

    // mutual inverses
    for (const auto& [key, t] : a.transitions) {
        auto [i, j] = key;
        ++rep.checks;
        try {
            std::uint32_t mi = t.inverted, mj = a.transitions.at({j, i}).inverted;
            auto c = compose(a.transition(i, j, mj, mi), a.transition(j, i, mi, mj));
            if (!same_images(c, a.transition(i, i, mi, mi))) fail(pair_label(i, j) + " o " + pair_label(j, i) + " is not the identity");
        } catch (const std::exception& e) {
            fail(pair_label(i, j) + " inverse check: " + e.what());
        }
    }

    // cocycle condition on triple overlaps
    for (const auto& s : a.subsets_of_size(3)) {
        std::vector<int> perm = s;
        do {
            int i = perm[0], j = perm[1], k = perm[2];
            ++rep.checks;
            try {
                std::uint32_t mi = a.inverted_on(i, s), mj = a.inverted_on(j, s), mk = a.inverted_on(k, s);
                auto lhs = compose(a.transition(i, j, mj, mi), a.transition(j, k, mk, mj));
                auto rhs = a.transition(i, k, mk, mi);
                if (!same_images(lhs, rhs))
                    fail("cocycle " + pair_label(i, j) + " o " + pair_label(j, k) + " != " + pair_label(i, k));
            } catch (const std::exception& e) {
                fail("cocycle on " + subset_label(s) + ": " + e.what());
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
    return rep;
}

void require_valid(const Atlas& a)
{
    auto rep = validate_atlas(a);
    if (!rep.ok()) throw std::invalid_argument("atlas " + a.name + " " + rep.summary());
}

// ---------------------------------------------------------------- bosonization

namespace {

SuperPolynomial drop_odd(const SuperPolynomial& p, const SignaturePtr& even_sig)
{
    SuperPolynomial out(even_sig, p.field());
    for (const auto& [m, c] : p.terms())
        if (m.odd == 0) out.add_term(m, c);
    return out;
}

}  // namespace

Atlas bosonize(const Atlas& a)
{
    Atlas b;
    b.name = "bosonization of " + a.name;
    b.field = a.field;
    b.torus_rank = a.torus_rank;
    b.lattice = a.lattice;
    for (const auto& c : a.charts) b.charts.push_back({make_signature(c.sig->even, {}), c.even_weights, {}});
    for (const auto& [key, t] : a.transitions) {
        Transition bt;
        bt.inverted = t.inverted;
        SignaturePtr tgt = localize(b.charts[static_cast<std::size_t>(key.first)].sig, t.inverted);
        for (const auto& p : t.even) bt.even.push_back(drop_odd(p, tgt));
        b.transitions.emplace(key, std::move(bt));
    }
    return b;
}

Atlas associated_graded(const Atlas& a)
{
    Atlas g = a;
    g.name = "associated graded of " + a.name;
    for (auto& [key, t] : g.transitions) {
        for (auto& p : t.even) p = p.body();
        for (auto& p : t.odd) {
            SuperPolynomial lin(p.signature(), p.field());
            for (const auto& [m, c] : p.terms())
                if (m.odd_degree() == 1) lin.add_term(m, c);
            p = std::move(lin);
        }
    }
    return g;
}

// ---------------------------------------------------------------- toric builder

namespace {

using IntMatrix = std::vector<std::vector<int>>;

// Charts whose even coordinates are torus monomials t^{A_c[l]} and whose odd
// coordinates are t^{B_c[k]} psi_k. A_c must be unimodular.
struct ToricSpec {
    std::string name;
    int n = 0;
    std::vector<IntMatrix> A;
    std::vector<IntMatrix> B;
    std::vector<std::vector<std::string>> even_names;
    std::vector<std::vector<std::string>> odd_names;
};

IntMatrix unimodular_inverse(const IntMatrix& a)
{
    std::size_t n = a.size();
    std::vector<std::vector<mpq_class>> m(n, std::vector<mpq_class>(2 * n));
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) m[r][c] = a[r][c];
        m[r][n + r] = 1;
    }
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        while (piv < n && m[piv][c] == 0) ++piv;
        if (piv == n) throw std::invalid_argument("toric chart matrix is singular");
        std::swap(m[piv], m[c]);
        mpq_class inv = 1 / m[c][c];
        for (auto& x : m[c]) x *= inv;
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c || m[r][c] == 0) continue;
            mpq_class f = m[r][c];
            for (std::size_t k = 0; k < 2 * n; ++k) m[r][k] -= f * m[c][k];
        }
    }
    IntMatrix out(n, std::vector<int>(n));
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) {
            const mpq_class& v = m[r][n + c];
            if (v.get_den() != 1) throw std::invalid_argument("toric chart matrix is not unimodular");
            out[r][c] = static_cast<int>(v.get_num().get_si());
        }
    return out;
}

std::vector<int> row_times(const std::vector<int>& v, const IntMatrix& m)
{
    std::vector<int> out(m.empty() ? 0 : m[0].size(), 0);
    for (std::size_t r = 0; r < v.size(); ++r)
        for (std::size_t c = 0; c < out.size(); ++c) out[c] += v[r] * m[r][c];
    return out;
}

Atlas build_toric(const ToricSpec& spec, Field f)
{
    Atlas a;
    a.name = spec.name;
    a.field = f;
    a.torus_rank = spec.n;
    std::size_t nc = spec.A.size();
    std::vector<IntMatrix> inv;
    for (std::size_t c = 0; c < nc; ++c) {
        a.charts.push_back({make_signature(spec.even_names[c], spec.odd_names[c]), spec.A[c], spec.B[c]});
        inv.push_back(unimodular_inverse(spec.A[c]));
    }
    for (std::size_t i = 0; i < nc; ++i)
        for (std::size_t j = 0; j < nc; ++j) {
            if (i == j) continue;
            std::vector<std::vector<int>> even_exps, odd_exps;
            std::uint32_t mask = 0;
            for (const auto& row : spec.A[j]) even_exps.push_back(row_times(row, inv[i]));
            for (std::size_t k = 0; k < spec.B[j].size(); ++k) {
                std::vector<int> diff(static_cast<std::size_t>(spec.n));
                for (int t = 0; t < spec.n; ++t)
                    diff[static_cast<std::size_t>(t)] = spec.B[j][k][static_cast<std::size_t>(t)] - spec.B[i][k][static_cast<std::size_t>(t)];
                odd_exps.push_back(row_times(diff, inv[i]));
            }
            for (const auto* group : {&even_exps, &odd_exps})
                for (const auto& e : *group)
                    for (std::size_t l = 0; l < e.size(); ++l)
                        if (e[l] < 0) mask |= 1u << l;
            SignaturePtr tgt = localize(a.charts[i].sig, mask);
            Transition t;
            t.inverted = mask;
            for (const auto& e : even_exps) {
                SuperMonomial mono;
                for (std::size_t l = 0; l < e.size(); ++l) mono.exps[l] = static_cast<std::int16_t>(e[l]);
                t.even.push_back(SuperPolynomial::monomial(tgt, mono, f.one()));
            }
            for (std::size_t k = 0; k < odd_exps.size(); ++k) {
                SuperMonomial mono;
                for (std::size_t l = 0; l < odd_exps[k].size(); ++l) mono.exps[l] = static_cast<std::int16_t>(odd_exps[k][l]);
                mono.odd = 1u << k;
                t.odd.push_back(SuperPolynomial::monomial(tgt, mono, f.one()));
            }
            a.transitions.emplace(std::pair{static_cast<int>(i), static_cast<int>(j)}, std::move(t));
        }
    a.set_full_lattice();
    return a;
}

std::vector<std::string> numbered(const std::string& stem, int count, int first = 1)
{
    std::vector<std::string> out;
    for (int k = 0; k < count; ++k) out.push_back(stem + std::to_string(first + k));
    return out;
}

std::vector<int> unit(int n, int k, int scale = 1)
{
    std::vector<int> v(static_cast<std::size_t>(n), 0);
    v[static_cast<std::size_t>(k)] = scale;
    return v;
}

}  // namespace

Atlas build_projective_superspace(int n, int m, Field f)
{
    if (n < 0 || m < 0) throw std::invalid_argument("projective superspace needs n >= 0 and m >= 0");
    if (n > kMaxEven || m > kMaxOdd) throw std::invalid_argument("projective superspace dimension exceeds the supported range");
    ToricSpec spec;
    spec.name = "P^" + std::to_string(n) + "|" + std::to_string(m);
    spec.n = n;
    for (int c = 0; c <= n; ++c) {
        IntMatrix A, B;
        std::vector<std::string> names;
        // X_k / X_c for k != c, with t_k = X_k / X_0 (t_0 = 1).
        for (int k = 0; k <= n; ++k) {
            if (k == c) continue;
            std::vector<int> row(static_cast<std::size_t>(n), 0);
            if (k > 0) row[static_cast<std::size_t>(k - 1)] += 1;
            if (c > 0) row[static_cast<std::size_t>(c - 1)] -= 1;
            A.push_back(row);
            names.push_back(n == 1 ? (c == 0 ? "z" : "w") : "x" + std::to_string(k));
        }
        for (int k = 0; k < m; ++k) B.push_back(c > 0 ? unit(n, c - 1, -1) : std::vector<int>(static_cast<std::size_t>(n), 0));
        spec.A.push_back(A);
        spec.B.push_back(B);
        spec.even_names.push_back(names);
        spec.odd_names.push_back(numbered(n == 1 && c == 1 ? "s" : "t", m));
    }
    Atlas a = build_toric(spec, f);
    require_valid(a);
    return a;
}

Atlas build_split(SplitBase base, const std::vector<std::vector<int>>& twists, Field f)
{
    ToricSpec spec;
    std::size_t need = base == SplitBase::P1 ? 1 : 2;
    for (const auto& t : twists)
        if (t.size() != need) throw std::invalid_argument("split twist has the wrong number of entries for the base");
    if (twists.size() > static_cast<std::size_t>(kMaxOdd)) throw std::invalid_argument("too many odd coordinates");
    int m = static_cast<int>(twists.size());
    std::ostringstream name;
    name << "split " << (base == SplitBase::P1 ? "P1" : "P1xP1") << " [";
    for (std::size_t k = 0; k < twists.size(); ++k) {
        name << (k ? ", " : "");
        if (need == 1)
            name << twists[k][0];
        else
            name << "(" << twists[k][0] << "," << twists[k][1] << ")";
    }
    name << "]";
    spec.name = name.str();
    if (base == SplitBase::P1) {
        spec.n = 1;
        for (int c = 0; c < 2; ++c) {
            spec.A.push_back({{c == 0 ? 1 : -1}});
            IntMatrix B;
            for (const auto& t : twists) B.push_back({c == 0 ? 0 : t[0]});
            spec.B.push_back(B);
            spec.even_names.push_back({c == 0 ? "z" : "w"});
            spec.odd_names.push_back(numbered(c == 0 ? "t" : "s", m));
        }
    } else {
        spec.n = 2;
        for (int s1 = 0; s1 < 2; ++s1)
            for (int s2 = 0; s2 < 2; ++s2) {
                spec.A.push_back({{s1 ? -1 : 1, 0}, {0, s2 ? -1 : 1}});
                IntMatrix B;
                for (const auto& t : twists) B.push_back({s1 * t[0], s2 * t[1]});
                spec.B.push_back(B);
                spec.even_names.push_back({"x", "y"});
                spec.odd_names.push_back(numbered("t", m));
            }
    }
    Atlas a = build_toric(spec, f);
    require_valid(a);
    return a;
}

// ---------------------------------------------------------------- G(1|1,2|2)

namespace {

// 2x2 supermatrix with rows (even pivot row, odd pivot row) and columns
// (even column, odd column): [[A, B], [C, D]], A and D even, B and C odd.
struct Super2 {
    SuperPolynomial A, B, C, D;
};

Super2 super_inverse(const Super2& m)
{
    SuperPolynomial Ainv = unit_inverse(m.A), Dinv = unit_inverse(m.D);
    SuperPolynomial SA = m.A - m.B * Dinv * m.C;
    SuperPolynomial SD = m.D - m.C * Ainv * m.B;
    SuperPolynomial SAinv = unit_inverse(SA), SDinv = unit_inverse(SD);
    return {SAinv, -(Ainv * m.B * SDinv), -(Dinv * m.C * SAinv), SDinv};
}

}  // namespace

Atlas build_supergrassmannian_1122(Field f)
{
    Atlas a;
    a.name = "G(1|1,2|2)";
    a.field = f;
    a.torus_rank = 2;
    // column weights: e1, e2 | f1, f2
    const Weight tw[2] = {{0, 0}, {1, 0}};
    const Weight sw[2] = {{0, 0}, {0, 1}};
    auto sub = [](const Weight& x, const Weight& y) { return Weight{x[0] - y[0], x[1] - y[1]}; };
    std::vector<std::pair<int, int>> labels;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) labels.push_back({i, j});
    for (auto [i, j] : labels) {
        int ip = 1 - i, jp = 1 - j;
        Chart c;
        c.sig = make_signature({"x", "y"}, {"xi", "eta"});
        c.even_weights = {sub(tw[ip], tw[i]), sub(sw[jp], sw[j])};
        c.odd_weights = {sub(sw[jp], tw[i]), sub(tw[ip], sw[j])};
        a.charts.push_back(c);
    }
    // Coordinate matrix of chart (i,j) in its own coordinates on signature sig;
    // entries indexed [row][column] with columns e1 e2 f1 f2.
    auto matrix_of = [&](int chart, const SignaturePtr& sig) {
        auto [i, j] = labels[static_cast<std::size_t>(chart)];
        std::vector<std::vector<SuperPolynomial>> M(2, std::vector<SuperPolynomial>(4, SuperPolynomial(sig, f)));
        M[0][static_cast<std::size_t>(i)] = SuperPolynomial::constant(sig, f.one());
        M[0][static_cast<std::size_t>(1 - i)] = SuperPolynomial::even_coordinate(sig, f, 0);
        M[0][static_cast<std::size_t>(3 - j)] = SuperPolynomial::odd_coordinate(sig, f, 0);
        M[1][static_cast<std::size_t>(1 - i)] = SuperPolynomial::odd_coordinate(sig, f, 1);
        M[1][static_cast<std::size_t>(2 + j)] = SuperPolynomial::constant(sig, f.one());
        M[1][static_cast<std::size_t>(3 - j)] = SuperPolynomial::even_coordinate(sig, f, 1);
        return M;
    };
    for (int ca = 0; ca < 4; ++ca)
        for (int cb = 0; cb < 4; ++cb) {
            if (ca == cb) continue;
            auto [ia, ja] = labels[static_cast<std::size_t>(ca)];
            auto [ib, jb] = labels[static_cast<std::size_t>(cb)];
            std::uint32_t mask = (ia != ib ? 1u : 0u) | (ja != jb ? 2u : 0u);
            SignaturePtr sig = localize(a.charts[static_cast<std::size_t>(ca)].sig, mask);
            auto M = matrix_of(ca, sig);
            std::size_t ce = static_cast<std::size_t>(ib), cf = static_cast<std::size_t>(2 + jb);
            Super2 g = super_inverse({M[0][ce], M[0][cf], M[1][ce], M[1][cf]});
            auto row = [&](int r, std::size_t col) {
                return r == 0 ? g.A * M[0][col] + g.B * M[1][col] : g.C * M[0][col] + g.D * M[1][col];
            };
            std::size_t xe = static_cast<std::size_t>(1 - ib), yf = static_cast<std::size_t>(3 - jb);
            Transition t;
            t.inverted = mask;
            t.even = {row(0, xe), row(1, yf)};
            t.odd = {row(0, yf), row(1, xe)};
            a.transitions.emplace(std::pair{ca, cb}, std::move(t));
        }
    a.set_full_lattice();
    require_valid(a);
    return a;
}

// ---------------------------------------------------------------- glued atlases

namespace {

bool in_ideal_power(const SuperPolynomial& p, int k)
{
    for (const auto& [m, c] : p.terms())
        if (m.odd_degree() < k) return false;
    return true;
}

}  // namespace

Atlas build_glued(const GluingData& g, Field f)
{
    int r = static_cast<int>(g.twists.size());
    if (r < 1) throw std::invalid_argument("gluing needs at least one odd coordinate");
    if (!std::is_sorted(g.twists.rbegin(), g.twists.rend())) throw std::invalid_argument("gluing twists must be non-increasing");
    std::vector<std::vector<int>> tw;
    for (int a : g.twists) tw.push_back({a});
    Atlas base = build_split(SplitBase::P1, tw, f);

    const Chart& c0 = base.charts[0];
    SignaturePtr loc0 = localize(c0.sig, base.transitions.at({0, 1}).inverted);
    SuperPolynomial v = parse_polynomial(g.v01.empty() ? "0" : g.v01, loc0, f);
    if (v.parity() != 0) throw std::invalid_argument("gluing cocycle coefficient must be even");
    if (!in_ideal_power(v, 2)) throw std::invalid_argument("gluing cocycle coefficient must lie in the square of the odd ideal");
    std::vector<SuperPolynomial> phi;
    for (int k = 0; k < r; ++k) {
        std::string text = k < static_cast<int>(g.phi01.size()) && !g.phi01[static_cast<std::size_t>(k)].empty()
                               ? g.phi01[static_cast<std::size_t>(k)]
                               : "0";
        SuperPolynomial p = parse_polynomial(text, loc0, f);
        if (!p.is_zero() && p.parity() != 1) throw std::invalid_argument("odd gluing correction must be odd");
        if (!in_ideal_power(p, 2)) throw std::invalid_argument("odd gluing correction must lie in the square of the odd ideal");
        phi.push_back(p);
    }
    if (static_cast<int>(g.phi01.size()) > r) throw std::invalid_argument("more odd corrections than odd coordinates");

    // alpha: z -> z + v, t_k -> t_k + phi_k on the localized chart 0.
    std::vector<SuperPolynomial> ev{SuperPolynomial::even_coordinate(loc0, f, 0) + v}, od;
    for (int k = 0; k < r; ++k) od.push_back(SuperPolynomial::odd_coordinate(loc0, f, k) + phi[static_cast<std::size_t>(k)]);
    SuperHomomorphism alpha(loc0, loc0, ev, od);

    // Twisted Leibniz rule: alpha(h s) - h s = h phi(s) + v(h) s for h in {z, 1/z}, s = t_k.
    VectorField vf = VectorField::zero(loc0, f, 0);
    vf.even_coeffs[0] = v;
    for (const char* htext : {"z", "z^-1"}) {
        SuperPolynomial h = parse_polynomial(htext, loc0, f);
        for (int k = 0; k < r; ++k) {
            SuperPolynomial s = SuperPolynomial::odd_coordinate(loc0, f, k);
            SuperPolynomial lhs = substitute(alpha, h * s) - h * s;
            SuperPolynomial rhs = h * phi[static_cast<std::size_t>(k)] + apply_vector_field(vf, h) * s;
            if (lhs != rhs) throw std::invalid_argument("odd gluing correction violates the twisted Leibniz rule");
        }
    }

    SuperHomomorphism alpha_inv = invert_unipotent(alpha);
    std::uint32_t m01 = base.transitions.at({0, 1}).inverted, m10 = base.transitions.at({1, 0}).inverted;
    SuperHomomorphism s01 = base.transition(0, 1, m10, m01);
    SuperHomomorphism s10 = base.transition(1, 0, m01, m10);
    SuperHomomorphism phi01 = compose(alpha, s01);
    SuperHomomorphism phi10 = compose(s10, alpha_inv);

    Atlas a = base;
    std::ostringstream name;
    name << "glued P1 [";
    for (int k = 0; k < r; ++k) name << (k ? "," : "") << g.twists[static_cast<std::size_t>(k)];
    name << "] v=" << v.to_string();
    for (int k = 0; k < r; ++k)
        if (!phi[static_cast<std::size_t>(k)].is_zero()) name << " phi(t" << k + 1 << ")=" << phi[static_cast<std::size_t>(k)].to_string();
    a.name = name.str();
    a.transitions.at({0, 1}).even = phi01.even_images();
    a.transitions.at({0, 1}).odd = phi01.odd_images();
    a.transitions.at({1, 0}).even = phi10.even_images();
    a.transitions.at({1, 0}).odd = phi10.odd_images();

    // Odd weights making the gluing homogeneous: the smallest shift c with
    // chart-0 weights c_k and chart-1 weights a_k + c_k.
    if (r > 4) throw std::invalid_argument("odd weight inference supports at most 4 odd coordinates");
    std::vector<std::vector<int>> candidates;
    std::vector<int> cur(static_cast<std::size_t>(r), -6);
    for (;;) {
        candidates.push_back(cur);
        int k = 0;
        while (k < r && cur[static_cast<std::size_t>(k)] == 6) cur[static_cast<std::size_t>(k++)] = -6;
        if (k == r) break;
        ++cur[static_cast<std::size_t>(k)];
    }
    std::stable_sort(candidates.begin(), candidates.end(), [](const auto& x, const auto& y) {
        auto key = [](const std::vector<int>& c) {
            int sum = 0, top = 0;
            for (int v1 : c) {
                sum += std::abs(v1);
                top = std::max(top, std::abs(v1));
            }
            return std::pair{sum, top};
        };
        if (key(x) != key(y)) return key(x) < key(y);
        return x > y;
    });
    for (const auto& c : candidates) {
        for (int k = 0; k < r; ++k) {
            a.charts[0].odd_weights[static_cast<std::size_t>(k)] = {c[static_cast<std::size_t>(k)]};
            a.charts[1].odd_weights[static_cast<std::size_t>(k)] = {g.twists[static_cast<std::size_t>(k)] + c[static_cast<std::size_t>(k)]};
        }
        if (validate_atlas(a).ok()) return a;
    }
    throw std::invalid_argument("gluing data admits no torus grading with odd weights in [-6, 6]");
}

}  // namespace superhodge
