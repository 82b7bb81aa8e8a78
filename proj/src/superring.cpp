#include "superhodge/superring.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "expr_parser.hpp"

namespace superhodge {

// ---------------------------------------------------------------- signatures

ChartSignature::ChartSignature(std::vector<std::string> even_names, std::vector<std::string> odd_names,
                               std::uint32_t inv)
    : even(std::move(even_names)), odd(std::move(odd_names)), inverted(inv)
{
    if (n_even() > kMaxEven || n_odd() > kMaxOdd)
        throw std::invalid_argument("chart has more coordinates than supported (8 even, 8 odd)");
    std::set<std::string> seen;
    for (const auto& n : even)
        if (!seen.insert(n).second) throw std::invalid_argument("duplicate coordinate name " + n);
    for (const auto& n : odd)
        if (!seen.insert(n).second) throw std::invalid_argument("duplicate coordinate name " + n);
    if (seen.count("d")) throw std::invalid_argument("'d' is reserved and cannot name a coordinate");
    if (n_even() < 32 && (inverted >> n_even()) != 0)
        throw std::invalid_argument("inverted set must be a subset of the even coordinates");
}

int ChartSignature::even_index(std::string_view name) const
{
    for (int i = 0; i < n_even(); ++i)
        if (even[i] == name) return i;
    return -1;
}

int ChartSignature::odd_index(std::string_view name) const
{
    for (int j = 0; j < n_odd(); ++j)
        if (odd[j] == name) return j;
    return -1;
}

ChartSignature ChartSignature::localized(std::uint32_t extra) const
{
    ChartSignature s = *this;
    s.inverted |= extra;
    return s;
}

SignaturePtr make_signature(std::vector<std::string> even, std::vector<std::string> odd, std::uint32_t inverted)
{
    return std::make_shared<const ChartSignature>(std::move(even), std::move(odd), inverted);
}

SignaturePtr localize(const SignaturePtr& sig, std::uint32_t extra)
{
    if ((sig->inverted | extra) == sig->inverted) return sig;
    return std::make_shared<const ChartSignature>(sig->localized(extra));
}

void check_same_signature(const SignaturePtr& a, const SignaturePtr& b)
{
    if (a == b) return;
    if (!a || !b || *a != *b) throw SignatureMismatch("operands live on different chart signatures");
}

bool monomial_conforms(const ChartSignature& sig, const SuperMonomial& m)
{
    for (int i = 0; i < kMaxEven; ++i) {
        if (i >= sig.n_even()) {
            if (m.exps[i] != 0) return false;
        } else if (m.exps[i] < 0 && !sig.is_inverted(i)) {
            return false;
        }
    }
    return sig.n_odd() >= 32 || (m.odd >> sig.n_odd()) == 0;
}

// ---------------------------------------------------------------- monomials

bool SuperMonomial::is_one() const
{
    return odd == 0 && std::all_of(exps.begin(), exps.end(), [](std::int16_t e) { return e == 0; });
}

int odd_product_sign(std::uint32_t a, std::uint32_t b)
{
    if (a & b) return 0;
    int swaps = 0;
    for (std::uint32_t rest = b; rest; rest &= rest - 1) {
        int j = __builtin_ctz(rest);
        swaps += __builtin_popcount(a >> (j + 1));
    }
    return (swaps & 1) ? -1 : 1;
}

std::string monomial_to_string(const ChartSignature& sig, const SuperMonomial& m)
{
    std::string out;
    auto append = [&out](const std::string& s) {
        if (!out.empty()) out += '*';
        out += s;
    };
    for (int i = 0; i < sig.n_even(); ++i) {
        if (m.exps[i] == 0) continue;
        append(m.exps[i] == 1 ? sig.even[i] : sig.even[i] + "^" + std::to_string(m.exps[i]));
    }
    for (int j = 0; j < sig.n_odd(); ++j)
        if ((m.odd >> j) & 1u) append(sig.odd[j]);
    return out.empty() ? "1" : out;
}

// ---------------------------------------------------------------- polynomials

SuperPolynomial SuperPolynomial::constant(SignaturePtr sig, const Scalar& c)
{
    SuperPolynomial p(std::move(sig), c.field());
    p.add_term(SuperMonomial{}, c);
    return p;
}

SuperPolynomial SuperPolynomial::monomial(SignaturePtr sig, const SuperMonomial& m, const Scalar& c)
{
    SuperPolynomial p(std::move(sig), c.field());
    p.add_term(m, c);
    return p;
}

SuperPolynomial SuperPolynomial::even_coordinate(SignaturePtr sig, Field f, int i)
{
    SuperMonomial m;
    m.exps.at(static_cast<std::size_t>(i)) = 1;
    return monomial(std::move(sig), m, f.one());
}

SuperPolynomial SuperPolynomial::odd_coordinate(SignaturePtr sig, Field f, int j)
{
    SuperMonomial m;
    m.odd = 1u << j;
    return monomial(std::move(sig), m, f.one());
}

void SuperPolynomial::add_term(const SuperMonomial& m, const Scalar& c)
{
    if (c.is_zero()) return;
    if (c.field() != field_) throw FieldMismatch("coefficient field differs from polynomial field");
    if (!monomial_conforms(*sig_, m))
        throw std::invalid_argument("monomial " + monomial_to_string(*sig_, m) + " does not conform to the chart signature");
    auto [it, inserted] = terms_.try_emplace(m, c);
    if (!inserted) {
        it->second += c;
        if (it->second.is_zero()) terms_.erase(it);
    }
}

int SuperPolynomial::parity() const
{
    int par = -2;
    for (const auto& [m, c] : terms_) {
        int p = m.parity();
        if (par == -2)
            par = p;
        else if (par != p)
            return -1;
    }
    return par == -2 ? 0 : par;
}

SuperPolynomial& SuperPolynomial::operator+=(const SuperPolynomial& o)
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

SuperPolynomial& SuperPolynomial::operator-=(const SuperPolynomial& o) { return *this += -o; }

SuperPolynomial SuperPolynomial::operator-() const
{
    SuperPolynomial p = *this;
    for (auto& [m, c] : p.terms_) c = -c;
    return p;
}

SuperPolynomial SuperPolynomial::scaled(const Scalar& c) const
{
    SuperPolynomial p(sig_, field_);
    if (c.is_zero()) return p;
    p.terms_ = terms_;
    for (auto& [m, v] : p.terms_) v *= c;
    return p;
}

SuperPolynomial SuperPolynomial::relocalized(const SignaturePtr& sig) const
{
    if (sig->even != sig_->even || sig->odd != sig_->odd)
        throw SignatureMismatch("relocalization must keep the chart coordinates");
    SuperPolynomial p(sig, field_);
    for (const auto& [m, c] : terms_) p.add_term(m, c);
    return p;
}

SuperPolynomial SuperPolynomial::body() const
{
    SuperPolynomial p(sig_, field_);
    for (const auto& [m, c] : terms_)
        if (m.odd == 0) p.terms_.emplace(m, c);
    return p;
}

std::string SuperPolynomial::to_string() const
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
        std::string mono = monomial_to_string(*sig_, m);
        if (a.is_one())
            out += mono;
        else if (m.is_one())
            out += a.to_string();
        else
            out += a.to_string() + "*" + mono;
    }
    return out;
}

bool operator==(const SuperPolynomial& a, const SuperPolynomial& b)
{
    if (a.sig_ != b.sig_ && (!a.sig_ || !b.sig_ || *a.sig_ != *b.sig_)) return false;
    return a.terms_ == b.terms_;
}

SuperPolynomial multiply(const SuperPolynomial& a, const SuperPolynomial& b)
{
    check_same_signature(a.signature(), b.signature());
    SuperPolynomial out(a.signature(), a.field());
    for (const auto& [ma, ca] : a.terms()) {
        for (const auto& [mb, cb] : b.terms()) {
            int s = odd_product_sign(ma.odd, mb.odd);
            if (s == 0) continue;
            SuperMonomial m;
            for (int i = 0; i < kMaxEven; ++i) m.exps[i] = static_cast<std::int16_t>(ma.exps[i] + mb.exps[i]);
            m.odd = ma.odd | mb.odd;
            Scalar c = ca * cb;
            out.add_term(m, s < 0 ? -c : c);
        }
    }
    return out;
}

SuperPolynomial power(const SuperPolynomial& a, int k)
{
    if (k < 0) return power(unit_inverse(a), -k);
    SuperPolynomial result = SuperPolynomial::constant(a.signature(), a.field().one());
    SuperPolynomial base = a;
    while (k) {
        if (k & 1) result = result * base;
        k >>= 1;
        if (k) base = base * base;
    }
    return result;
}

namespace {

// Splits u into its leading invertible monomial and the nilpotent remainder ratio.
bool unit_parts(const SuperPolynomial& u, SuperMonomial& lead, Scalar& coeff)
{
    const ChartSignature& sig = *u.signature();
    int count = 0;
    for (const auto& [m, c] : u.terms()) {
        if (m.odd != 0) continue;
        ++count;
        lead = m;
        coeff = c;
    }
    if (count != 1) return false;
    for (int i = 0; i < sig.n_even(); ++i)
        if (lead.exps[i] != 0 && !sig.is_inverted(i)) return false;
    return true;
}

}  // namespace

bool is_unit(const SuperPolynomial& u)
{
    SuperMonomial lead;
    Scalar c;
    return unit_parts(u, lead, c);
}

SuperPolynomial unit_inverse(const SuperPolynomial& u)
{
    SuperMonomial lead;
    Scalar c;
    if (!unit_parts(u, lead, c)) throw NotAUnit("not a unit in the localized ring: " + u.to_string());
    SuperMonomial inv_lead;
    for (int i = 0; i < kMaxEven; ++i) inv_lead.exps[i] = static_cast<std::int16_t>(-lead.exps[i]);
    SuperPolynomial lead_inv = SuperPolynomial::monomial(u.signature(), inv_lead, c.inverse());
    // u = lead * (1 + nu), nu nilpotent.
    SuperPolynomial nu = lead_inv * u - SuperPolynomial::constant(u.signature(), u.field().one());
    SuperPolynomial sum = SuperPolynomial::constant(u.signature(), u.field().one());
    SuperPolynomial term = sum;
    SuperPolynomial minus_nu = -nu;
    for (int k = 1; k <= kMaxOdd + 1; ++k) {
        term = term * minus_nu;
        if (term.is_zero()) break;
        sum += term;
    }
    return lead_inv * sum;
}

std::pair<SuperPolynomial, SuperPolynomial> decompose_parity(const SuperPolynomial& f)
{
    SuperPolynomial even(f.signature(), f.field());
    SuperPolynomial odd(f.signature(), f.field());
    for (const auto& [m, c] : f.terms()) (m.parity() ? odd : even).add_term(m, c);
    return {even, odd};
}

// ---------------------------------------------------------------- homomorphisms

SuperHomomorphism::SuperHomomorphism(SignaturePtr source, SignaturePtr target, std::vector<SuperPolynomial> even_images,
                                     std::vector<SuperPolynomial> odd_images)
    : source_(std::move(source)), target_(std::move(target)), even_(std::move(even_images)), odd_(std::move(odd_images))
{
    if (static_cast<int>(even_.size()) != source_->n_even() || static_cast<int>(odd_.size()) != source_->n_odd())
        throw std::invalid_argument("homomorphism needs one image per source coordinate");
    bool have_field = false;
    for (auto* list : {&even_, &odd_}) {
        for (auto& p : *list) {
            check_same_signature(p.signature(), target_);
            if (!have_field) {
                field_ = p.field();
                have_field = true;
            } else if (p.field() != field_) {
                throw FieldMismatch("homomorphism images over different fields");
            }
        }
    }
    inverse_cache_.resize(even_.size());
}

SuperHomomorphism SuperHomomorphism::identity(const SignaturePtr& sig, Field f)
{
    std::vector<SuperPolynomial> ev, od;
    for (int i = 0; i < sig->n_even(); ++i) ev.push_back(SuperPolynomial::even_coordinate(sig, f, i));
    for (int j = 0; j < sig->n_odd(); ++j) od.push_back(SuperPolynomial::odd_coordinate(sig, f, j));
    SuperHomomorphism h(sig, sig, std::move(ev), std::move(od));
    h.field_ = f;
    return h;
}

std::string SuperHomomorphism::check() const
{
    std::ostringstream err;
    for (std::size_t i = 0; i < even_.size(); ++i)
        if (even_[i].parity() != 0) err << "image of " << source_->even[i] << " is not even; ";
    for (std::size_t j = 0; j < odd_.size(); ++j)
        if (odd_[j].parity() != 1 && !odd_[j].is_zero()) err << "image of " << source_->odd[j] << " is not odd; ";
    for (int i = 0; i < source_->n_even(); ++i)
        if (source_->is_inverted(i) && !is_unit(even_[static_cast<std::size_t>(i)]))
            err << "image of inverted " << source_->even[static_cast<std::size_t>(i)] << " is not a unit; ";
    return err.str();
}

const SuperPolynomial& SuperHomomorphism::inverse_image(int i) const
{
    auto& slot = inverse_cache_.at(static_cast<std::size_t>(i));
    if (!slot) slot = std::make_shared<SuperPolynomial>(unit_inverse(even_[static_cast<std::size_t>(i)]));
    return *slot;
}

SuperHomomorphism SuperHomomorphism::with_target(const SignaturePtr& target) const
{
    std::vector<SuperPolynomial> ev, od;
    for (const auto& p : even_) ev.push_back(p.relocalized(target));
    for (const auto& p : odd_) od.push_back(p.relocalized(target));
    SuperHomomorphism h(source_, target, std::move(ev), std::move(od));
    h.field_ = field_;
    return h;
}

SuperPolynomial substitute(const SuperHomomorphism& h, const SuperPolynomial& f)
{
    if (f.signature()->even != h.source()->even || f.signature()->odd != h.source()->odd)
        throw SignatureMismatch("polynomial does not live on the homomorphism source");
    const Field& fld = f.field();
    SuperPolynomial out(h.target(), fld);
    const SuperPolynomial one = SuperPolynomial::constant(h.target(), fld.one());
    for (const auto& [m, c] : f.terms()) {
        SuperPolynomial t = one.scaled(c);
        for (int i = 0; i < h.source()->n_even(); ++i) {
            int e = m.exps[static_cast<std::size_t>(i)];
            if (e > 0)
                t = t * power(h.even_images()[static_cast<std::size_t>(i)], e);
            else if (e < 0)
                t = t * power(h.inverse_image(i), -e);
        }
        for (int j = 0; j < h.source()->n_odd(); ++j)
            if ((m.odd >> j) & 1u) t = t * h.odd_images()[static_cast<std::size_t>(j)];
        out += t;
    }
    return out;
}

SuperHomomorphism compose(const SuperHomomorphism& h2, const SuperHomomorphism& h1)
{
    std::vector<SuperPolynomial> ev, od;
    for (const auto& p : h1.even_images()) ev.push_back(substitute(h2, p));
    for (const auto& p : h1.odd_images()) od.push_back(substitute(h2, p));
    return SuperHomomorphism(h1.source(), h2.target(), std::move(ev), std::move(od));
}

SuperHomomorphism invert_unipotent(const SuperHomomorphism& h)
{
    const SignaturePtr& sig = h.target();
    Field f = h.field();
    SuperHomomorphism id = SuperHomomorphism::identity(sig, f);
    SuperHomomorphism beta = id;
    for (int iter = 0; iter <= kMaxOdd + 1; ++iter) {
        // h o beta should be the identity; subtract the defect.
        SuperHomomorphism hb = compose(h.with_target(sig), beta);
        bool done = true;
        std::vector<SuperPolynomial> ev, od;
        for (std::size_t i = 0; i < beta.even_images().size(); ++i) {
            SuperPolynomial defect = hb.even_images()[i] - id.even_images()[i];
            if (!defect.is_zero()) done = false;
            ev.push_back(beta.even_images()[i] - defect);
        }
        for (std::size_t j = 0; j < beta.odd_images().size(); ++j) {
            SuperPolynomial defect = hb.odd_images()[j] - id.odd_images()[j];
            if (!defect.is_zero()) done = false;
            od.push_back(beta.odd_images()[j] - defect);
        }
        if (done) return beta;
        beta = SuperHomomorphism(sig, sig, std::move(ev), std::move(od));
    }
    throw std::runtime_error("automorphism is not unipotent modulo nilpotents");
}

// ---------------------------------------------------------------- parsing

namespace {

struct PolyOps {
    SignaturePtr sig;
    Field field;

    SuperPolynomial constant(const mpq_class& q) { return SuperPolynomial::constant(sig, field.from_rational(q)); }
    SuperPolynomial coordinate(std::string_view name, std::size_t pos)
    {
        int i = sig->even_index(name);
        if (i >= 0) return SuperPolynomial::even_coordinate(sig, field, i);
        int j = sig->odd_index(name);
        if (j >= 0) return SuperPolynomial::odd_coordinate(sig, field, j);
        throw ParseError("unknown coordinate '" + std::string(name) + "'", pos);
    }
    SuperPolynomial differential(std::string_view, std::size_t pos)
    {
        throw ParseError("differentials are not allowed in a function", pos);
    }
    SuperPolynomial add(SuperPolynomial a, const SuperPolynomial& b) { return a += b; }
    SuperPolynomial mul(const SuperPolynomial& a, const SuperPolynomial& b) { return a * b; }
    SuperPolynomial neg(const SuperPolynomial& a) { return -a; }
    SuperPolynomial pow(const SuperPolynomial& a, int e, std::size_t pos)
    {
        try {
            return power(a, e);
        } catch (const NotAUnit&) {
            throw ParseError("negative power of a non-invertible expression", pos);
        }
    }
};

}  // namespace

SuperPolynomial parse_polynomial(std::string_view text, const SignaturePtr& sig, Field f)
{
    PolyOps ops{sig, f};
    detail::ExprParser<PolyOps> parser(text, ops);
    return parser.parse();
}

}  // namespace superhodge
