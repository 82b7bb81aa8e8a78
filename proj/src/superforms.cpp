#include "superhodge/superforms.hpp"

#include <functional>

#include "expr_parser.hpp"

namespace superhodge {

// ---------------------------------------------------------------- monomials

int FormMonomial::dtheta_degree() const
{
    int s = 0;
    for (auto k : dtheta) s += k;
    return s;
}

std::size_t FormMonomialHash::operator()(const FormMonomial& m) const noexcept
{
    std::size_t h = 1469598103934665603ull;
    auto mix = [&h](std::uint64_t v) {
        h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    };
    for (auto e : m.fn.exps) mix(static_cast<std::uint16_t>(e));
    mix(m.fn.odd);
    mix(m.dx);
    for (auto k : m.dtheta) mix(k);
    return h;
}

bool form_monomial_conforms(const ChartSignature& sig, const FormMonomial& m)
{
    if (!monomial_conforms(sig, m.fn)) return false;
    if (sig.n_even() < 32 && (m.dx >> sig.n_even()) != 0) return false;
    for (int j = sig.n_odd(); j < kMaxOdd; ++j)
        if (m.dtheta[static_cast<std::size_t>(j)] != 0) return false;
    return true;
}

std::string form_monomial_to_string(const ChartSignature& sig, const FormMonomial& m)
{
    std::string out = m.fn.is_one() ? std::string() : monomial_to_string(sig, m.fn);
    auto append = [&out](const std::string& s) {
        if (!out.empty()) out += '*';
        out += s;
    };
    for (int i = 0; i < sig.n_even(); ++i)
        if ((m.dx >> i) & 1u) append("d(" + sig.even[i] + ")");
    for (int j = 0; j < sig.n_odd(); ++j) {
        int k = m.dtheta[static_cast<std::size_t>(j)];
        if (k == 0) continue;
        append(k == 1 ? "d(" + sig.odd[j] + ")" : "d(" + sig.odd[j] + ")^" + std::to_string(k));
    }
    return out.empty() ? "1" : out;
}

// ---------------------------------------------------------------- FormElement

FormElement FormElement::from_function(const SuperPolynomial& f)
{
    FormElement a(f.signature(), f.field());
    for (const auto& [m, c] : f.terms()) {
        FormMonomial fm;
        fm.fn = m;
        a.terms_.emplace(fm, c);
    }
    return a;
}

FormElement FormElement::monomial(SignaturePtr sig, const FormMonomial& m, const Scalar& c)
{
    FormElement a(std::move(sig), c.field());
    a.add_term(m, c);
    return a;
}

FormElement FormElement::dx(SignaturePtr sig, Field f, int i)
{
    FormMonomial m;
    m.dx = 1u << i;
    return monomial(std::move(sig), m, f.one());
}

FormElement FormElement::dtheta(SignaturePtr sig, Field f, int j)
{
    FormMonomial m;
    m.dtheta.at(static_cast<std::size_t>(j)) = 1;
    return monomial(std::move(sig), m, f.one());
}

void FormElement::add_term(const FormMonomial& m, const Scalar& c)
{
    if (c.is_zero()) return;
    if (!form_monomial_conforms(*sig_, m))
        throw std::invalid_argument("form monomial " + form_monomial_to_string(*sig_, m) + " does not conform to the chart");
    auto [it, inserted] = terms_.try_emplace(m, c);
    if (!inserted) {
        it->second += c;
        if (it->second.is_zero()) terms_.erase(it);
    }
}

int FormElement::degree() const
{
    int deg = -2;
    for (const auto& [m, c] : terms_) {
        int k = m.degree();
        if (deg == -2)
            deg = k;
        else if (deg != k)
            return -1;
    }
    return deg == -2 ? 0 : deg;
}

int FormElement::parity() const
{
    int par = -2;
    for (const auto& [m, c] : terms_) {
        int k = m.parity();
        if (par == -2)
            par = k;
        else if (par != k)
            return -1;
    }
    return par == -2 ? 0 : par;
}

FormElement& FormElement::operator+=(const FormElement& o)
{
    check_same_signature(sig_, o.sig_);
    for (const auto& [m, c] : o.terms_) {
        auto [it, inserted] = terms_.try_emplace(m, c);
        if (!inserted) {
            it->second += c;
            if (it->second.is_zero()) terms_.erase(it);
        }
    }
    return *this;
}

FormElement& FormElement::operator-=(const FormElement& o) { return *this += -o; }

FormElement FormElement::operator-() const
{
    FormElement a = *this;
    for (auto& [m, c] : a.terms_) c = -c;
    return a;
}

FormElement FormElement::scaled(const Scalar& c) const
{
    FormElement a(sig_, field_);
    if (c.is_zero()) return a;
    a.terms_ = terms_;
    for (auto& [m, v] : a.terms_) v *= c;
    return a;
}

FormElement FormElement::relocalized(const SignaturePtr& sig) const
{
    if (sig->even != sig_->even || sig->odd != sig_->odd)
        throw SignatureMismatch("relocalization must keep the chart coordinates");
    FormElement a(sig, field_);
    for (const auto& [m, c] : terms_) a.add_term(m, c);
    return a;
}

std::string FormElement::to_string() const
{
    if (terms_.empty()) return "0";
    std::string out;
    bool first = true;
    for (const auto& [m, c] : terms_) {
        bool neg = field_.is_rational() && sgn(c.rational()) < 0;
        Scalar a = neg ? -c : c;
        if (first)
            out += neg ? "-" : "";
        else
            out += neg ? " - " : " + ";
        first = false;
        std::string mono = form_monomial_to_string(*sig_, m);
        bool trivial = m.fn.is_one() && m.dx == 0 && m.dtheta_degree() == 0;
        if (a.is_one())
            out += mono;
        else if (trivial)
            out += a.to_string();
        else
            out += a.to_string() + "*" + mono;
    }
    return out;
}

bool operator==(const FormElement& a, const FormElement& b)
{
    if (a.sig_ != b.sig_ && (!a.sig_ || !b.sig_ || *a.sig_ != *b.sig_)) return false;
    return a.terms_ == b.terms_;
}

// ---------------------------------------------------------------- vector fields

VectorField VectorField::zero(const SignaturePtr& sig, Field f, int parity)
{
    VectorField v;
    v.parity = parity;
    v.even_coeffs.assign(static_cast<std::size_t>(sig->n_even()), SuperPolynomial(sig, f));
    v.odd_coeffs.assign(static_cast<std::size_t>(sig->n_odd()), SuperPolynomial(sig, f));
    return v;
}

VectorField VectorField::euler(const SignaturePtr& sig, Field f)
{
    VectorField v = zero(sig, f, 0);
    for (int j = 0; j < sig->n_odd(); ++j) v.odd_coeffs[static_cast<std::size_t>(j)] = SuperPolynomial::odd_coordinate(sig, f, j);
    return v;
}

std::string VectorField::check() const
{
    std::string err;
    for (const auto& c : even_coeffs)
        if (!c.is_zero() && c.parity() != parity) err += "d/dx coefficient with wrong parity; ";
    for (const auto& c : odd_coeffs)
        if (!c.is_zero() && c.parity() != (parity ^ 1)) err += "d/dtheta coefficient with wrong parity; ";
    return err;
}

SuperPolynomial even_partial(const SuperPolynomial& f, int i)
{
    SuperPolynomial out(f.signature(), f.field());
    for (const auto& [m, c] : f.terms()) {
        int e = m.exps[static_cast<std::size_t>(i)];
        if (e == 0) continue;
        SuperMonomial n = m;
        n.exps[static_cast<std::size_t>(i)] = static_cast<std::int16_t>(e - 1);
        out.add_term(n, c * f.field().from_int(e));
    }
    return out;
}

SuperPolynomial odd_partial(const SuperPolynomial& f, int j)
{
    SuperPolynomial out(f.signature(), f.field());
    std::uint32_t bit = 1u << j;
    for (const auto& [m, c] : f.terms()) {
        if (!(m.odd & bit)) continue;
        SuperMonomial n = m;
        n.odd &= ~bit;
        bool neg = __builtin_popcount(m.odd & (bit - 1)) & 1;
        out.add_term(n, neg ? -c : c);
    }
    return out;
}

SuperPolynomial apply_vector_field(const VectorField& v, const SuperPolynomial& f)
{
    SuperPolynomial out(f.signature(), f.field());
    for (std::size_t i = 0; i < v.even_coeffs.size(); ++i)
        if (!v.even_coeffs[i].is_zero()) out += v.even_coeffs[i] * even_partial(f, static_cast<int>(i));
    for (std::size_t j = 0; j < v.odd_coeffs.size(); ++j)
        if (!v.odd_coeffs[j].is_zero()) out += v.odd_coeffs[j] * odd_partial(f, static_cast<int>(j));
    return out;
}

// ---------------------------------------------------------------- wedge and d

namespace {

int dtheta_total(const std::array<std::uint8_t, kMaxOdd>& m)
{
    int s = 0;
    for (auto k : m) s += k;
    return s;
}

// Product of two normal-form monomials; returns sign (0 when it vanishes).
int monomial_product(const FormMonomial& a, const FormMonomial& b, FormMonomial& out)
{
    int s1 = odd_product_sign(a.fn.odd, b.fn.odd);
    if (s1 == 0) return 0;
    int s2 = odd_product_sign(a.dx, b.dx);
    if (s2 == 0) return 0;
    int am = dtheta_total(a.dtheta);
    int swaps = (b.fn.odd_degree() * am + __builtin_popcount(b.dx) * am) & 1;
    for (int i = 0; i < kMaxEven; ++i) out.fn.exps[i] = static_cast<std::int16_t>(a.fn.exps[i] + b.fn.exps[i]);
    out.fn.odd = a.fn.odd | b.fn.odd;
    out.dx = a.dx | b.dx;
    for (int j = 0; j < kMaxOdd; ++j) {
        int k = a.dtheta[j] + b.dtheta[j];
        if (k > 255) throw std::overflow_error("dtheta degree exceeds 255");
        out.dtheta[j] = static_cast<std::uint8_t>(k);
    }
    int s = s1 * s2;
    return swaps ? -s : s;
}

}  // namespace

FormElement wedge(const FormElement& a, const FormElement& b)
{
    check_same_signature(a.signature(), b.signature());
    FormElement out(a.signature(), a.field());
    for (const auto& [ma, ca] : a.terms()) {
        for (const auto& [mb, cb] : b.terms()) {
            FormMonomial m;
            int s = monomial_product(ma, mb, m);
            if (s == 0) continue;
            Scalar c = ca * cb;
            out.add_term(m, s < 0 ? -c : c);
        }
    }
    return out;
}

FormElement d(const FormElement& a)
{
    FormElement out(a.signature(), a.field());
    const ChartSignature& sig = *a.signature();
    for (const auto& [m, c] : a.terms()) {
        // d(x^a) theta_S dx_I dtheta^m
        for (int i = 0; i < sig.n_even(); ++i) {
            int e = m.fn.exps[static_cast<std::size_t>(i)];
            if (e == 0) continue;
            int s = odd_product_sign(1u << i, m.dx);
            if (s == 0) continue;
            FormMonomial n = m;
            n.fn.exps[static_cast<std::size_t>(i)] = static_cast<std::int16_t>(e - 1);
            n.dx |= 1u << i;
            Scalar v = c * a.field().from_int(e);
            out.add_term(n, s < 0 ? -v : v);
        }
        // x^a d(theta_S) dx_I dtheta^m
        int k = m.fn.odd_degree();
        int dxdeg = __builtin_popcount(m.dx);
        int pos = 0;
        for (int j = 0; j < sig.n_odd(); ++j) {
            if (!((m.fn.odd >> j) & 1u)) continue;
            ++pos;
            FormMonomial n = m;
            n.fn.odd &= ~(1u << j);
            n.dtheta[static_cast<std::size_t>(j)] = static_cast<std::uint8_t>(n.dtheta[static_cast<std::size_t>(j)] + 1);
            bool neg = ((k - pos) + dxdeg) & 1;
            out.add_term(n, neg ? -c : c);
        }
    }
    return out;
}

// i_v on a product of generators g_1 ... g_n: sum_k eps_k g_1..g_{k-1} i_v(g_k) g_{k+1}..g_n
// with eps_k = prod_{l<k} (-1)^{deg g_l + par g_l * par v}.
FormElement contract(const VectorField& v, const FormElement& a)
{
    const SignaturePtr& sig = a.signature();
    const Field& f = a.field();
    FormElement out(sig, f);
    for (const auto& [m, c] : a.terms()) {
        struct Gen {
            bool is_dx;
            int index;
        };
        std::vector<Gen> gens;
        for (int i = 0; i < sig->n_even(); ++i)
            if ((m.dx >> i) & 1u) gens.push_back({true, i});
        for (int j = 0; j < sig->n_odd(); ++j)
            for (int t = 0; t < m.dtheta[static_cast<std::size_t>(j)]; ++t) gens.push_back({false, j});
        if (gens.empty()) continue;

        FormMonomial head;
        head.fn = m.fn;
        FormElement prefix = FormElement::monomial(sig, head, c);
        int sign_exp = m.fn.parity() * v.parity;  // passing the function part
        std::vector<FormElement> gen_forms;
        for (const auto& g : gens)
            gen_forms.push_back(g.is_dx ? FormElement::dx(sig, f, g.index) : FormElement::dtheta(sig, f, g.index));

        for (std::size_t k = 0; k < gens.size(); ++k) {
            const SuperPolynomial& coeff =
                gens[k].is_dx ? v.even_coeffs[static_cast<std::size_t>(gens[k].index)] : v.odd_coeffs[static_cast<std::size_t>(gens[k].index)];
            if (!coeff.is_zero()) {
                FormElement term = wedge(prefix, FormElement::from_function(coeff));
                for (std::size_t l = k + 1; l < gens.size(); ++l) term = wedge(term, gen_forms[l]);
                out += (sign_exp & 1) ? -term : term;
            }
            int par = gens[k].is_dx ? 0 : 1;
            sign_exp += 1 + par * v.parity;
            prefix = wedge(prefix, gen_forms[k]);
        }
    }
    return out;
}

FormElement lie_derivative(const VectorField& v, const FormElement& a)
{
    return d(contract(v, a)) + contract(v, d(a));
}

// ---------------------------------------------------------------- pullback

FormPullback::FormPullback(SuperHomomorphism h) : h_(std::move(h))
{
    for (const auto& p : h_.even_images()) dx_images_.push_back(d(FormElement::from_function(p)));
    for (const auto& p : h_.odd_images()) dtheta_images_.push_back(d(FormElement::from_function(p)));
}

const FormElement& FormPullback::dtheta_power(int j, int k)
{
    auto key = std::make_pair(j, k);
    auto it = dtheta_powers_.find(key);
    if (it != dtheta_powers_.end()) return it->second;
    FormElement v = k == 1 ? dtheta_images_[static_cast<std::size_t>(j)]
                           : wedge(dtheta_power(j, k - 1), dtheta_images_[static_cast<std::size_t>(j)]);
    return dtheta_powers_.emplace(key, std::move(v)).first->second;
}

const FormElement& FormPullback::function_power(int i, int e)
{
    auto key = std::make_pair(i, e);
    auto it = function_powers_.find(key);
    if (it != function_powers_.end()) return it->second;
    FormElement v;
    if (e == 1)
        v = FormElement::from_function(h_.even_images()[static_cast<std::size_t>(i)]);
    else if (e == -1)
        v = FormElement::from_function(h_.inverse_image(i));
    else
        v = wedge(function_power(i, e > 0 ? e - 1 : e + 1), function_power(i, e > 0 ? 1 : -1));
    return function_powers_.emplace(key, std::move(v)).first->second;
}

FormElement FormPullback::operator()(const FormMonomial& m)
{
    const Field& f = h_.field();
    FormElement t = FormElement::from_function(SuperPolynomial::constant(h_.target(), f.one()));
    const ChartSignature& src = *h_.source();
    for (int i = 0; i < src.n_even(); ++i) {
        int e = m.fn.exps[static_cast<std::size_t>(i)];
        if (e != 0) t = wedge(t, function_power(i, e));
    }
    for (int j = 0; j < src.n_odd(); ++j)
        if ((m.fn.odd >> j) & 1u) t = wedge(t, FormElement::from_function(h_.odd_images()[static_cast<std::size_t>(j)]));
    for (int i = 0; i < src.n_even(); ++i)
        if ((m.dx >> i) & 1u) t = wedge(t, dx_images_[static_cast<std::size_t>(i)]);
    for (int j = 0; j < src.n_odd(); ++j) {
        int k = m.dtheta[static_cast<std::size_t>(j)];
        if (k) t = wedge(t, dtheta_power(j, k));
    }
    return t;
}

FormElement FormPullback::operator()(const FormElement& a)
{
    if (a.signature()->even != h_.source()->even || a.signature()->odd != h_.source()->odd)
        throw SignatureMismatch("form does not live on the homomorphism source");
    FormElement out(h_.target(), h_.field());
    for (const auto& [m, c] : a.terms()) out += (*this)(m).scaled(c);
    return out;
}

FormElement pullback_form(const SuperHomomorphism& h, const FormElement& a)
{
    FormPullback pb(h);
    return pb(a);
}

// ---------------------------------------------------------------- bases

std::vector<FormMonomial> form_basis(const ChartSignature& sig, int p, int window)
{
    if (window < 0) throw std::invalid_argument("form_basis: negative window");
    std::vector<FormMonomial> out;
    int n = sig.n_even();
    int m = sig.n_odd();
    // function exponents
    std::vector<std::array<std::int16_t, kMaxEven>> exps(1);
    for (int i = 0; i < n; ++i) {
        int lo = sig.is_inverted(i) ? -window : 0;
        std::vector<std::array<std::int16_t, kMaxEven>> next;
        for (const auto& e : exps)
            for (int a = lo; a <= window; ++a) {
                auto x = e;
                x[static_cast<std::size_t>(i)] = static_cast<std::int16_t>(a);
                next.push_back(x);
            }
        exps.swap(next);
    }
    // dtheta multidegrees of total k
    std::function<void(int, int, std::array<std::uint8_t, kMaxOdd>&, std::vector<std::array<std::uint8_t, kMaxOdd>>&)> rec =
        [&](int j, int left, std::array<std::uint8_t, kMaxOdd>& cur, std::vector<std::array<std::uint8_t, kMaxOdd>>& acc) {
            if (j == m) {
                if (left == 0) acc.push_back(cur);
                return;
            }
            for (int k = 0; k <= left; ++k) {
                cur[static_cast<std::size_t>(j)] = static_cast<std::uint8_t>(k);
                rec(j + 1, left - k, cur, acc);
            }
            cur[static_cast<std::size_t>(j)] = 0;
        };
    for (std::uint32_t dxm = 0; dxm < (1u << n); ++dxm) {
        int k = p - __builtin_popcount(dxm);
        if (k < 0) continue;
        if (m == 0 && k > 0) continue;
        std::vector<std::array<std::uint8_t, kMaxOdd>> degs;
        std::array<std::uint8_t, kMaxOdd> cur{};
        rec(0, k, cur, degs);
        for (const auto& dt : degs)
            for (std::uint32_t S = 0; S < (1u << m); ++S)
                for (const auto& e : exps) {
                    FormMonomial fm;
                    fm.fn.exps = e;
                    fm.fn.odd = S;
                    fm.dx = dxm;
                    fm.dtheta = dt;
                    out.push_back(fm);
                }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::map<long, FormElement> weight_split(const FormElement& a, const VectorField& xi)
{
    std::map<long, FormElement> out;
    const Field& f = a.field();
    for (const auto& [m, c] : a.terms()) {
        FormElement mono = FormElement::monomial(a.signature(), m, f.one());
        FormElement l = lie_derivative(xi, mono);
        Scalar lambda = f.zero();
        if (!l.is_zero()) {
            if (l.terms().size() != 1 || l.terms().begin()->first != m)
                throw std::invalid_argument("vector field does not act diagonally on " + mono.to_string());
            lambda = l.terms().begin()->second;
        }
        long key;
        if (f.is_rational()) {
            if (lambda.rational().get_den() != 1) throw std::invalid_argument("non-integral weight");
            key = lambda.rational().get_num().get_si();
        } else {
            key = lambda.residue();
        }
        auto it = out.find(key);
        if (it == out.end()) it = out.emplace(key, FormElement(a.signature(), f)).first;
        it->second.add_term(m, c);
    }
    return out;
}

// ---------------------------------------------------------------- parsing

namespace {

struct FormOps {
    SignaturePtr sig;
    Field field;

    FormElement constant(const mpq_class& q)
    {
        return FormElement::from_function(SuperPolynomial::constant(sig, field.from_rational(q)));
    }
    FormElement coordinate(std::string_view name, std::size_t pos)
    {
        int i = sig->even_index(name);
        if (i >= 0) return FormElement::from_function(SuperPolynomial::even_coordinate(sig, field, i));
        int j = sig->odd_index(name);
        if (j >= 0) return FormElement::from_function(SuperPolynomial::odd_coordinate(sig, field, j));
        throw ParseError("unknown coordinate '" + std::string(name) + "'", pos);
    }
    FormElement differential(std::string_view name, std::size_t pos)
    {
        int i = sig->even_index(name);
        if (i >= 0) return FormElement::dx(sig, field, i);
        int j = sig->odd_index(name);
        if (j >= 0) return FormElement::dtheta(sig, field, j);
        throw ParseError("unknown coordinate '" + std::string(name) + "'", pos);
    }
    FormElement add(FormElement a, const FormElement& b) { return a += b; }
    FormElement mul(const FormElement& a, const FormElement& b) { return wedge(a, b); }
    FormElement neg(const FormElement& a) { return -a; }
    FormElement pow(const FormElement& a, int e, std::size_t pos)
    {
        if (e < 0) {
            if (a.degree() != 0) throw ParseError("negative power of a form of positive degree", pos);
            SuperPolynomial p(sig, field);
            for (const auto& [m, c] : a.terms()) p.add_term(m.fn, c);
            try {
                return FormElement::from_function(power(p, e));
            } catch (const NotAUnit&) {
                throw ParseError("negative power of a non-invertible expression", pos);
            }
        }
        FormElement r = constant(mpq_class(1));
        for (int k = 0; k < e; ++k) r = wedge(r, a);
        return r;
    }
};

}  // namespace

FormElement parse_form(std::string_view text, const SignaturePtr& sig, Field f)
{
    FormOps ops{sig, f};
    detail::ExprParser<FormOps> parser(text, ops);
    return parser.parse();
}

}  // namespace superhodge
