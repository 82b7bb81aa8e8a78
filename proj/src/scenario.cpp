#include "superhodge/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <fstream>
#include <iomanip>
#include <memory>
#include <set>
#include <sstream>

#include "json.hpp"
#include "superhodge/koszul.hpp"

namespace superhodge {

// ---------------------------------------------------------------- parsing

ScenarioError::ScenarioError(const std::string& where, int line, const std::string& what)
    : std::runtime_error(where + ":" + std::to_string(line) + ": " + what), line_(line)
{
}

namespace {

const std::set<std::string> kChecks = {"validate", "pages", "total_de_rham", "delta", "n2_formula", "general", "stability", "koszul", "graded", "tau"};

std::string trim(const std::string& s)
{
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) {
        cur = trim(cur);
        if (!cur.empty()) out.push_back(cur);
    }
    return out;
}

std::vector<std::string> words(const std::string& s)
{
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string w;
    while (in >> w) out.push_back(w);
    return out;
}

struct LineContext {
    const std::string& source;
    int line;
    [[noreturn]] void fail(const std::string& what) const { throw ScenarioError(source, line, what); }

    int integer(const std::string& v) const
    {
        try {
            std::size_t used = 0;
            int x = std::stoi(v, &used);
            if (used != v.size()) fail("expected an integer, got '" + v + "'");
            return x;
        } catch (const std::logic_error&) {
            fail("expected an integer, got '" + v + "'");
        }
    }

    std::vector<int> integers(const std::string& v) const
    {
        std::vector<int> out;
        std::string t = v;
        std::replace(t.begin(), t.end(), ',', ' ');
        for (const auto& w : words(t)) out.push_back(integer(w));
        return out;
    }
};

Field parse_field(const LineContext& ctx, const std::string& v)
{
    auto w = words(v);
    if (w.size() == 1 && (w[0] == "rational" || w[0] == "Q")) return Field::rational();
    if (w.size() == 2 && w[0] == "mod") {
        int p = ctx.integer(w[1]);
        if (p < 2) ctx.fail("field modulus must be a prime >= 2");
        for (int d = 2; d * d <= p; ++d)
            if (p % d == 0) ctx.fail("field modulus " + w[1] + " is not prime");
        return Field::modular(static_cast<std::uint32_t>(p));
    }
    ctx.fail("field must be 'rational' or 'mod <prime>'");
}

}  // namespace

bool Scenario::has_check(const std::string& c) const { return std::find(checks.begin(), checks.end(), c) != checks.end(); }

bool Scenario::needs_atlas() const { return !variety.empty() && variety != "none"; }

Scenario parse_scenario(const std::string& text, const std::string& source)
{
    Scenario s;
    s.source = source;
    s.field = Field::rational();
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    enum class Section { Top, Chart, Transition } section = Section::Top;
    int chart_id = -1;
    InlineTransition* tr = nullptr;
    bool saw_variety = false;
    while (std::getline(in, raw)) {
        ++line_no;
        LineContext ctx{source, line_no};
        std::string line = raw;
        if (auto hash = line.find('#'); hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') ctx.fail("unterminated section header");
            auto w = words(line.substr(1, line.size() - 2));
            if (w.size() == 2 && w[0] == "chart") {
                section = Section::Chart;
                chart_id = ctx.integer(w[1]);
                if (chart_id < 0) ctx.fail("chart index must be nonnegative");
                if (s.charts.count(chart_id)) ctx.fail("duplicate chart " + w[1]);
                s.charts[chart_id];
            } else if (w.size() == 3 && w[0] == "transition") {
                section = Section::Transition;
                s.transitions.push_back({ctx.integer(w[1]), ctx.integer(w[2]), {}, {}});
                tr = &s.transitions.back();
                if (tr->i == tr->j) ctx.fail("transition needs two distinct charts");
            } else {
                ctx.fail("unknown section '" + line + "'");
            }
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) ctx.fail("expected 'key = value'");
        std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        if (key.empty()) ctx.fail("empty key");

        if (section == Section::Chart) {
            InlineChart& c = s.charts[chart_id];
            if (key == "even") c.even = words(value);
            else if (key == "odd") c.odd = words(value);
            else if (key.rfind("weight.", 0) == 0) {
                std::string name = key.substr(7);
                auto ev = std::find(c.even.begin(), c.even.end(), name);
                auto od = std::find(c.odd.begin(), c.odd.end(), name);
                if (ev != c.even.end()) {
                    c.even_weights.resize(c.even.size());
                    c.even_weights[static_cast<std::size_t>(ev - c.even.begin())] = ctx.integers(value);
                } else if (od != c.odd.end()) {
                    c.odd_weights.resize(c.odd.size());
                    c.odd_weights[static_cast<std::size_t>(od - c.odd.begin())] = ctx.integers(value);
                } else {
                    ctx.fail("weight for unknown coordinate '" + name + "' (declare even/odd first)");
                }
            } else {
                ctx.fail("unknown chart key '" + key + "'");
            }
            continue;
        }
        if (section == Section::Transition) {
            if (key == "inverted") tr->inverted = words(value);
            else tr->images.emplace_back(key, value);
            continue;
        }

        s.echo.emplace_back(key, value);
        if (key.rfind("expect.", 0) == 0) {
            s.expectations.push_back({key.substr(7), value, line_no});
        } else if (key == "name") {
            s.name = value;
        } else if (key == "field") {
            s.field = parse_field(ctx, value);
            s.field_text = value;
        } else if (key == "variety") {
            s.variety = value;
            saw_variety = true;
        } else if (key == "transform") {
            if (value != "associated_graded" && value != "bosonize") ctx.fail("transform must be associated_graded or bosonize");
            s.transform = value;
        } else if (key == "twists") {
            s.twists = ctx.integers(value);
        } else if (key == "v01") {
            s.v01 = value;
        } else if (key == "phi01") {
            s.phi01.clear();
            for (const auto& part : split(value, ';')) s.phi01.push_back(part == "0" ? "" : part);
        } else if (key == "max_column") {
            s.max_column = ctx.integer(value);
            if (s.max_column < 2) ctx.fail("max_column must be >= 2");
        } else if (key == "window") {
            s.window = ctx.integer(value);
            if (s.window < 1) ctx.fail("window must be >= 1");
        } else if (key == "slack") {
            s.slack = ctx.integer(value);
        } else if (key == "r_max") {
            s.r_max = ctx.integer(value);
            if (s.r_max < 1) ctx.fail("r_max must be >= 1");
        } else if (key == "checks") {
            s.checks = split(value, ',');
            for (const auto& c : s.checks)
                if (!kChecks.count(c)) ctx.fail("unknown check '" + c + "'");
        } else if (key == "de_rham_max") {
            s.de_rham_max = ctx.integer(value);
        } else if (key == "koszul.w_max") {
            s.koszul_w_max = ctx.integer(value);
        } else if (key == "koszul.k_max") {
            s.koszul_k_max = ctx.integer(value);
        } else if (key == "graded.even") {
            s.graded_even = value;
        } else if (key == "graded.odd") {
            s.graded_odd = value;
        } else if (key == "graded.window") {
            s.graded_window = ctx.integer(value);
        } else if (key == "graded.i_max") {
            s.graded_i_max = ctx.integer(value);
        } else if (key == "tau.dim") {
            s.tau_dim = ctx.integer(value);
            if (s.tau_dim < 2) ctx.fail("tau.dim must be >= 2");
        } else {
            ctx.fail("unknown key '" + key + "'");
        }
    }
    if (!saw_variety) throw ScenarioError(source, line_no, "missing 'variety'");
    if (s.variety == "inline" && s.charts.empty()) throw ScenarioError(source, line_no, "inline variety without [chart] sections");
    return s;
}

Scenario load_scenario(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ScenarioError(path, 0, "cannot open scenario file");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path);
}

// ---------------------------------------------------------------- atlases

namespace {

Atlas build_inline(const Scenario& s)
{
    Atlas a;
    a.name = s.name.empty() ? "inline atlas" : s.name;
    a.field = s.field;
    int expected = 0;
    for (const auto& [id, c] : s.charts) {
        if (id != expected++) throw std::invalid_argument("inline charts must be numbered 0, 1, 2, ...");
        if (c.even_weights.size() != c.even.size() || c.odd_weights.size() != c.odd.size())
            throw std::invalid_argument("chart " + std::to_string(id) + ": every coordinate needs a weight");
        a.charts.push_back({make_signature(c.even, c.odd), c.even_weights, c.odd_weights});
    }
    a.torus_rank = a.charts.empty() || a.charts[0].even_weights.empty() ? 0 : static_cast<int>(a.charts[0].even_weights[0].size());
    for (const auto& t : s.transitions) {
        if (t.i < 0 || t.j < 0 || t.i >= a.n_charts() || t.j >= a.n_charts()) throw std::invalid_argument("transition refers to a missing chart");
        const auto& ci = s.charts.at(t.i);
        const auto& cj = s.charts.at(t.j);
        Transition out;
        for (const auto& name : t.inverted) {
            auto it = std::find(ci.even.begin(), ci.even.end(), name);
            if (it == ci.even.end()) throw std::invalid_argument("cannot invert '" + name + "': not an even coordinate of chart " + std::to_string(t.i));
            out.inverted |= 1u << (it - ci.even.begin());
        }
        SignaturePtr tgt = localize(a.charts[static_cast<std::size_t>(t.i)].sig, out.inverted);
        auto image_of = [&](const std::string& name) {
            for (const auto& [k, v] : t.images)
                if (k == name) return parse_polynomial(v, tgt, a.field);
            throw std::invalid_argument("transition " + std::to_string(t.i) + " " + std::to_string(t.j) + " lacks an image for '" + name + "'");
        };
        for (const auto& [k, v] : t.images)
            if (std::find(cj.even.begin(), cj.even.end(), k) == cj.even.end() && std::find(cj.odd.begin(), cj.odd.end(), k) == cj.odd.end())
                throw std::invalid_argument("'" + k + "' is not a coordinate of chart " + std::to_string(t.j));
        for (const auto& name : cj.even) out.even.push_back(image_of(name));
        for (const auto& name : cj.odd) out.odd.push_back(image_of(name));
        a.transitions.emplace(std::pair{t.i, t.j}, std::move(out));
    }
    a.set_full_lattice();
    return a;
}

Atlas build_named(const Scenario& s)
{
    auto w = words(s.variety);
    if (w.empty()) throw std::invalid_argument("empty variety");
    const std::string& kind = w[0];
    auto arg = [&](std::size_t k) {
        if (k >= w.size()) throw std::invalid_argument("variety '" + kind + "' needs more arguments");
        return std::stoi(w[k]);
    };
    if (kind == "projective") return build_projective_superspace(arg(1), arg(2), s.field);
    if (kind == "superpoint") return build_projective_superspace(0, arg(1), s.field);
    if (kind == "grassmannian_1122") return build_supergrassmannian_1122(s.field);
    if (kind == "split_p1") {
        std::vector<std::vector<int>> tw;
        for (std::size_t k = 1; k < w.size(); ++k) tw.push_back({arg(k)});
        return build_split(SplitBase::P1, tw, s.field);
    }
    if (kind == "split_p1xp1") {
        std::vector<std::vector<int>> tw;
        for (std::size_t k = 1; k < w.size(); ++k) {
            auto parts = split(w[k], ',');
            if (parts.size() != 2) throw std::invalid_argument("split_p1xp1 twists are written a,b");
            tw.push_back({std::stoi(parts[0]), std::stoi(parts[1])});
        }
        return build_split(SplitBase::P1xP1, tw, s.field);
    }
    if (kind == "glued") return build_glued({s.twists, s.v01, s.phi01}, s.field);
    if (kind == "inline") return build_inline(s);
    throw std::invalid_argument("unknown variety '" + kind + "'");
}

}  // namespace

Atlas build_atlas(const Scenario& s)
{
    Atlas a = build_named(s);
    if (s.transform == "associated_graded") a = associated_graded(a);
    else if (s.transform == "bosonize") a = bosonize(a);
    if (!s.name.empty()) a.name = s.name;
    return a;
}

// ---------------------------------------------------------------- running

const char* status_name(Status s)
{
    switch (s) {
    case Status::Pass: return "pass";
    case Status::Fail: return "fail";
    case Status::Unreliable: return "unreliable";
    }
    return "?";
}

bool Report::ok() const
{
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.status == Status::Pass; });
}

const Page* Report::page(int r) const
{
    for (const auto& p : pages)
        if (p.r == r) return &p;
    return nullptr;
}

namespace {

using Clock = std::chrono::steady_clock;

struct CellSpec {
    int p = 0;
    int q = -1;  // -1 = every q
    long value = 0;
};

// "(p,q)=v ... rest=0"; q may be '*'
std::pair<std::vector<CellSpec>, std::optional<long>> parse_cells(const Expectation& e, const std::string& source)
{
    std::vector<CellSpec> cells;
    std::optional<long> rest;
    for (const auto& tok : words(e.value)) {
        auto eq = tok.find('=');
        if (eq == std::string::npos) throw ScenarioError(source, e.line, "expected (p,q)=value, got '" + tok + "'");
        std::string lhs = tok.substr(0, eq), rhs = tok.substr(eq + 1);
        long v = std::stol(rhs);
        if (lhs == "rest") {
            rest = v;
            continue;
        }
        if (lhs.size() < 5 || lhs.front() != '(' || lhs.back() != ')') throw ScenarioError(source, e.line, "expected (p,q), got '" + lhs + "'");
        auto parts = split(lhs.substr(1, lhs.size() - 2), ',');
        if (parts.size() != 2) throw ScenarioError(source, e.line, "expected (p,q), got '" + lhs + "'");
        cells.push_back({std::stoi(parts[0]), parts[1] == "*" ? -1 : std::stoi(parts[1]), v});
    }
    return {cells, rest};
}

int parse_page_index(const std::string& t)
{
    if (t == "inf") return kInfinity;
    int r = std::stoi(t);
    if (r < 0) throw std::invalid_argument("negative page index");
    return r;
}

std::string page_name(int r) { return r == kInfinity ? "Einf" : "E" + std::to_string(r); }
std::string cell_name(int p, int q) { return "(" + std::to_string(p) + "," + std::to_string(q) + ")"; }

class Runner {
public:
    Runner(const Scenario& s, const RunOptions& opt) : s_(s), opt_(opt) { report_.scenario = s; }

    Report run()
    {
        int window = opt_.window_override.value_or(s_.window);
        report_.scenario.window = window;
        if (opt_.window_override) report_.scenario.echo.emplace_back("window_override", std::to_string(window));
        if (s_.checks.empty() && s_.expectations.empty() && !opt_.force_probe) return std::move(report_);
        if (s_.needs_atlas()) {
            auto t0 = Clock::now();
            atlas_ = std::make_unique<Atlas>(build_atlas(s_));
            ValidationReport v = validate_atlas(*atlas_);
            stage("validate", t0);
            add("validate", v.ok() ? Status::Pass : Status::Fail, v.ok() ? std::to_string(v.checks) + " checks" : v.summary());
            if (!v.ok()) return std::move(report_);
            if (needs_spectral()) {
                t0 = Clock::now();
                bc_ = std::make_unique<Bicomplex>(Bicomplex::assemble(*atlas_, s_.max_column, window));
                stage("assemble", t0);
                t0 = Clock::now();
                x_ = std::make_unique<SpectralSequence>(*bc_);
                x0_ = std::make_unique<SpectralSequence>(bc_->bosonization());
                stage("reduce", t0);
                t0 = Clock::now();
                for (int r = 1; r <= s_.r_max; ++r) report_.pages.push_back(x_->page(r));
                report_.pages.push_back(x_->e_infinity());
                stage("pages", t0);
            }
        }
        auto t0 = Clock::now();
        run_checks(window);
        run_expectations();
        stage("checks", t0);
        return std::move(report_);
    }

private:
    bool needs_spectral() const
    {
        for (const auto& c : s_.checks)
            if (c != "validate" && c != "koszul" && c != "graded" && c != "tau") return true;
        for (const auto& e : s_.expectations)
            if (e.key != "koszul" && e.key != "graded" && e.key != "tau") return true;
        return false;
    }

    void stage(const std::string& name, Clock::time_point t0)
    {
        report_.timing.emplace_back(name, std::chrono::duration<double>(Clock::now() - t0).count());
    }

    void add(std::string name, Status st, std::string detail = {}) { report_.checks.push_back({std::move(name), st, std::move(detail)}); }

    void require_spectral(const std::string& what) const
    {
        if (!x_) throw ScenarioError(s_.source, 0, what + " needs a variety");
    }

    void run_checks(int window)
    {
        for (const auto& c : s_.checks) {
            if (c == "validate" || c == "pages") continue;  // always done / always emitted
            if (c == "total_de_rham") {
                require_spectral(c);
                int n = s_.de_rham_max < 0 ? s_.max_column - 1 : s_.de_rham_max;
                if (n > s_.max_column - 1) {
                    add(c, Status::Unreliable, "n_max " + std::to_string(n) + " exceeds P - 1 = " + std::to_string(s_.max_column - 1));
                    continue;
                }
                report_.total_de_rham = x_->total_de_rham(n);
                report_.total_de_rham_x0 = x0_->total_de_rham(n);
                add(c, Status::Pass, "n <= " + std::to_string(n));
            } else if (c == "delta") {
                require_spectral(c);
                report_.delta = delta_invariant(*x_, *x0_).values;
                add(c, Status::Pass, std::to_string(report_.delta.size()) + " reliable cells");
            } else if (c == "n2_formula" || c == "general") {
                require_spectral(c);
                CheckReport rep = c == "general" ? check_general_invariants(*x_, *x0_) : check_n2_formula(*x_, *x0_);
                for (const auto& item : rep.items) add(c + "." + item.name, item.pass ? Status::Pass : Status::Fail, item.detail);
            } else if (c == "stability") {
                continue;  // below
            } else if (c == "koszul") {
                bool ok = true;
                std::string bad;
                for (int w = 1; w <= s_.koszul_w_max; ++w)
                    for (int k = 1; k <= s_.koszul_k_max; ++k)
                        if (!weight_exactness(w, k, s_.field)) {
                            ok = false;
                            bad += "(" + std::to_string(w) + "," + std::to_string(k) + ") ";
                        }
                add(c, ok ? Status::Pass : Status::Fail,
                    ok ? "exact for w <= " + std::to_string(s_.koszul_w_max) + ", 1 <= k <= " + std::to_string(s_.koszul_k_max) : "not exact at " + bad);
            } else if (c == "graded") {
                SignaturePtr sig = make_signature(words(s_.graded_even), words(s_.graded_odd));
                for (int i = 1; i <= s_.graded_i_max; ++i) {
                    GradedCohomology g = graded_cohomology(sig, i, s_.graded_window, std::max(4, i + 1), s_.field);
                    std::ostringstream det;
                    det << "dims";
                    for (auto d : g.dims) det << " " << d;
                    add("graded.gr" + std::to_string(i), g.exact() ? Status::Pass : Status::Fail, det.str());
                }
            } else if (c == "tau") {
                std::uint32_t ch = s_.field.characteristic();
                if (ch == 2 || ch == 3) {
                    add(c, Status::Fail, "tau is only claimed invertible away from characteristic 2 and 3");
                    continue;
                }
                Matrix t = tau_matrix(s_.tau_dim, s_.field);
                Matrix id = Matrix::identity(t.rows(), s_.field);
                bool quad = ((t - id.scaled(s_.field.from_int(2))) * (t + id)).is_zero();
                std::size_t rk = rank(t);
                add("tau.eigenvalues", quad ? Status::Pass : Status::Fail, "(tau - 2)(tau + 1) " + std::string(quad ? "= 0" : "!= 0"));
                add("tau.invertible", rk == t.rows() ? Status::Pass : Status::Fail, "rank " + std::to_string(rk) + " of " + std::to_string(t.rows()));
            }
        }
        if (s_.has_check("stability") || opt_.force_probe) {
            require_spectral("stability");
            auto t0 = Clock::now();
            StabilityReport st = stability_probe(*atlas_, s_.max_column, window, s_.r_max);
            stage("stability", t0);
            std::string det = "N=" + std::to_string(window) + " vs N=" + std::to_string(window + 1);
            for (const auto& d : st.differences) det += "; " + d;
            add("stability", st.stable ? Status::Pass : Status::Fail, det);
        }
    }

    const Page& need_page(int r, const Expectation& e)
    {
        if (r == kInfinity) return report_.pages.back();
        if (const Page* p = report_.page(r)) return *p;
        extra_pages_.push_back(x_->page(r));
        (void)e;
        return extra_pages_.back();
    }

    void run_expectations()
    {
        for (const auto& e : s_.expectations) {
            std::string name = "expect." + e.key;
            try {
                evaluate(e, name);
            } catch (const ScenarioError&) {
                throw;
            } catch (const std::exception& ex) {
                throw ScenarioError(s_.source, e.line, std::string("bad expectation: ") + ex.what());
            }
        }
    }

    void evaluate(const Expectation& e, const std::string& name)
    {
        auto parts = split(e.key, '.');
        if (parts.empty()) throw ScenarioError(s_.source, e.line, "empty expectation");
        const std::string& what = parts[0];
        if (what == "page") {
            require_spectral(name);
            if (parts.size() < 2) throw ScenarioError(s_.source, e.line, "expect.page needs a page index");
            int r = parse_page_index(parts[1]);
            const Page& pg = need_page(r, e);
            bool odd = parts.size() == 3 && parts[2] == "odd";
            if (parts.size() == 3 && !odd) throw ScenarioError(s_.source, e.line, "unknown page field '" + parts[2] + "'");
            if (odd) {
                long want = std::stol(e.value);
                std::string det;
                for (const auto& [key, c] : pg.cells)
                    if (c.reliable && static_cast<long>(c.odd) != want) det += cell_name(key.first, key.second) + " odd=" + std::to_string(c.odd) + " ";
                add(name, det.empty() ? Status::Pass : Status::Fail, det.empty() ? "odd part " + e.value + " on every reliable cell" : det);
                return;
            }
            auto [cells, rest] = parse_cells(e, s_.source);
            std::set<std::pair<int, int>> named;
            Status st = Status::Pass;
            std::string det;
            for (const auto& cs : cells) {
                for (int q = 0; q <= pg.q_max; ++q) {
                    if (cs.q >= 0 && q != cs.q) continue;
                    auto it = pg.cells.find({cs.p, q});
                    if (it == pg.cells.end()) throw ScenarioError(s_.source, e.line, "cell " + cell_name(cs.p, q) + " is outside the page");
                    named.insert({cs.p, q});
                    if (!it->second.reliable) {
                        if (cs.q >= 0) {
                            st = Status::Unreliable;
                            det += cell_name(cs.p, q) + " unreliable ";
                        }
                        continue;
                    }
                    if (static_cast<long>(it->second.dim) != cs.value) {
                        if (st == Status::Pass) st = Status::Fail;
                        det += cell_name(cs.p, q) + "=" + std::to_string(it->second.dim) + " ";
                    }
                }
            }
            if (rest)
                for (const auto& [key, c] : pg.cells)
                    if (c.reliable && !named.count(key) && static_cast<long>(c.dim) != *rest) {
                        if (st == Status::Pass) st = Status::Fail;
                        det += cell_name(key.first, key.second) + "=" + std::to_string(c.dim) + " ";
                    }
            add(name, st, det.empty() ? page_name(r) + " matches" : det);
        } else if (what == "total_de_rham") {
            require_spectral(name);
            if (report_.total_de_rham.empty()) throw ScenarioError(s_.source, e.line, "expect.total_de_rham needs the total_de_rham check");
            std::vector<std::size_t> want;
            if (trim(e.value) == "bosonization") {
                want = report_.total_de_rham_x0;
            } else {
                for (const auto& w : words(e.value)) want.push_back(static_cast<std::size_t>(std::stoul(w)));
            }
            std::ostringstream got;
            for (auto v : report_.total_de_rham) got << v << " ";
            bool ok = want == report_.total_de_rham;
            add(name, ok ? Status::Pass : Status::Fail, "computed " + trim(got.str()));
        } else if (what == "delta") {
            require_spectral(name);
            if (!s_.has_check("delta")) throw ScenarioError(s_.source, e.line, "expect.delta needs the delta check");
            auto [cells, rest] = parse_cells(e, s_.source);
            if (rest) throw ScenarioError(s_.source, e.line, "rest= is not supported for delta");
            Status st = Status::Pass;
            std::string det;
            for (const auto& cs : cells)
                for (int q = 0; q <= x_->q_max(); ++q) {
                    if (cs.q >= 0 && q != cs.q) continue;
                    auto it = report_.delta.find({cs.p, q});
                    if (it == report_.delta.end()) {
                        if (cs.q >= 0) {
                            st = Status::Unreliable;
                            det += "delta" + cell_name(cs.p, q) + " unreliable ";
                        }
                        continue;
                    }
                    if (it->second != cs.value) {
                        if (st == Status::Pass) st = Status::Fail;
                        det += "delta" + cell_name(cs.p, q) + "=" + std::to_string(it->second) + " ";
                    }
                }
            add(name, st, det.empty() ? "delta matches" : det);
        } else if (what == "degenerate") {
            require_spectral(name);
            int r = parse_page_index(e.value);
            const Page& pg = need_page(r, e);
            const Page& inf = report_.pages.back();
            std::string det;
            for (const auto& [key, c] : pg.cells)
                if (c.reliable && inf.cell(key.first, key.second).reliable && c.dim != inf.cell(key.first, key.second).dim)
                    det += cell_name(key.first, key.second) + " " + std::to_string(c.dim) + " vs " + std::to_string(inf.cell(key.first, key.second).dim) + " ";
            add(name, det.empty() ? Status::Pass : Status::Fail, det.empty() ? page_name(r) + " = Einf on reliable cells" : det);
        } else if (what == "hodge_of_bosonization") {
            require_spectral(name);
            int r = parse_page_index(e.value);
            const Page& pg = need_page(r, e);
            Page h = x0_->page(1);
            std::string det;
            for (const auto& [key, c] : pg.cells)
                if (c.reliable && c.dim != h.cell(key.first, key.second).dim)
                    det += cell_name(key.first, key.second) + " " + std::to_string(c.dim) + " vs h=" + std::to_string(h.cell(key.first, key.second).dim) + " ";
            add(name, det.empty() ? Status::Pass : Status::Fail, det.empty() ? page_name(r) + " = h(X0) on reliable cells" : det);
        } else {
            throw ScenarioError(s_.source, e.line, "unknown expectation '" + e.key + "'");
        }
    }

    const Scenario& s_;
    RunOptions opt_;
    Report report_;
    std::unique_ptr<Atlas> atlas_;
    std::unique_ptr<Bicomplex> bc_;
    std::unique_ptr<SpectralSequence> x_, x0_;
    std::deque<Page> extra_pages_;
};

}  // namespace

Report run_scenario(const Scenario& s, const RunOptions& opt) { return Runner(s, opt).run(); }

// ---------------------------------------------------------------- emitting

Format parse_format(const std::string& s)
{
    if (s == "text") return Format::Text;
    if (s == "json") return Format::Json;
    if (s == "csv") return Format::Csv;
    throw std::invalid_argument("format must be text, json or csv");
}

namespace {

std::string r_label(int r) { return r == kInfinity ? "inf" : std::to_string(r); }

std::string emit_text(const Report& r, bool with_timing)
{
    std::ostringstream out;
    out << "scenario " << (r.scenario.name.empty() ? r.scenario.source : r.scenario.name) << "\n";
    std::size_t kw = 0;
    for (const auto& [k, v] : r.scenario.echo) kw = std::max(kw, k.size());
    for (const auto& [k, v] : r.scenario.echo) out << "  " << std::left << std::setw(static_cast<int>(kw)) << k << " = " << v << "\n";
    for (const auto& pg : r.pages) {
        out << "\n" << page_name(pg.r) << "   (dim, '?' = unreliable; rows q descending, columns p)\n";
        out << "  q\\p";
        for (int p = 0; p <= pg.max_column + 1; ++p) out << std::right << std::setw(6) << (std::to_string(p) + " ");
        out << "\n";
        for (int q = pg.q_max; q >= 0; --q) {
            out << "  " << std::left << std::setw(3) << q;
            for (int p = 0; p <= pg.max_column + 1; ++p) {
                const PageCell& c = pg.cell(p, q);
                out << std::right << std::setw(6) << (std::to_string(c.dim) + (c.reliable ? " " : "?"));
            }
            out << "\n";
        }
    }
    if (!r.total_de_rham.empty()) {
        out << "\ntotal de Rham     ";
        for (auto v : r.total_de_rham) out << " " << v;
        out << "\nbosonization      ";
        for (auto v : r.total_de_rham_x0) out << " " << v;
        out << "\n";
    }
    if (!r.delta.empty()) {
        out << "\ndelta";
        for (const auto& [k, v] : r.delta) out << " " << cell_name(k.first, k.second) << "=" << v;
        out << "\n";
    }
    if (!r.checks.empty()) {
        out << "\n";
        std::size_t nw = 0;
        for (const auto& c : r.checks) nw = std::max(nw, c.name.size());
        for (const auto& c : r.checks)
            out << std::left << std::setw(11) << (std::string("[") + status_name(c.status) + "]") << std::setw(static_cast<int>(nw)) << c.name << "  " << c.detail
                << "\n";
    }
    if (with_timing) {
        out << "\ntiming";
        for (const auto& [k, v] : r.timing) out << " " << k << "=" << std::fixed << std::setprecision(3) << v << "s";
        out << "\n";
    }
    out << "\nresult " << (r.ok() ? "PASS" : "FAIL") << "\n";
    return out.str();
}

std::string emit_json(const Report& r, bool with_timing)
{
    using nlohmann::ordered_json;
    ordered_json j;
    ordered_json echo = ordered_json::object();
    for (const auto& [k, v] : r.scenario.echo) echo[k] = v;
    j["scenario"] = echo;
    ordered_json pages = ordered_json::array();
    for (const auto& pg : r.pages) {
        ordered_json cells = ordered_json::array();
        for (const auto& [key, c] : pg.cells)
            cells.push_back({{"p", c.p}, {"q", c.q}, {"dim", c.dim}, {"even", c.even}, {"odd", c.odd}, {"reliable", c.reliable}});
        pages.push_back({{"r", r_label(pg.r)}, {"cells", cells}});
    }
    j["pages"] = pages;
    j["total_de_rham"] = r.total_de_rham;
    j["total_de_rham_bosonization"] = r.total_de_rham_x0;
    ordered_json delta = ordered_json::array();
    for (const auto& [k, v] : r.delta) delta.push_back({{"p", k.first}, {"q", k.second}, {"value", v}});
    j["delta"] = delta;
    ordered_json checks = ordered_json::array();
    for (const auto& c : r.checks) checks.push_back({{"name", c.name}, {"status", status_name(c.status)}, {"detail", c.detail}});
    j["checks"] = checks;
    j["result"] = r.ok() ? "pass" : "fail";
    if (with_timing) {
        ordered_json t = ordered_json::object();
        for (const auto& [k, v] : r.timing) t[k] = v;
        j["timing"] = t;
    }
    return j.dump(2) + "\n";
}

std::string emit_csv(const Report& r)
{
    std::ostringstream out;
    out << "r,p,q,dim,even,odd,reliable\n";
    for (const auto& pg : r.pages)
        for (const auto& [key, c] : pg.cells)
            out << r_label(pg.r) << "," << c.p << "," << c.q << "," << c.dim << "," << c.even << "," << c.odd << "," << (c.reliable ? "true" : "false") << "\n";
    return out.str();
}

}  // namespace

std::string emit_report(const Report& r, Format f, bool with_timing)
{
    switch (f) {
    case Format::Text: return emit_text(r, with_timing);
    case Format::Json: return emit_json(r, with_timing);
    case Format::Csv: return emit_csv(r);
    }
    return {};
}

}  // namespace superhodge
