#pragma once

// Scenario files and reports. A scenario is a line-oriented text file:
//
//   # comment
//   key = value
//   [chart 0]              inline atlases only
//   [transition 0 1]
//
// See README.md for the full grammar. Reports are deterministic: identical
// scenarios produce byte-identical documents (timing is opt-in).

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "superhodge/atlas.hpp"
#include "superhodge/specseq.hpp"

namespace superhodge {

class ScenarioError : public std::runtime_error {
public:
    ScenarioError(const std::string& where, int line, const std::string& what);
    int line() const { return line_; }

private:
    int line_;
};

struct Expectation {
    std::string key;    // text after "expect."
    std::string value;
    int line = 0;
};

struct InlineChart {
    std::vector<std::string> even, odd;
    std::vector<Weight> even_weights, odd_weights;
};

struct InlineTransition {
    int i = 0, j = 0;
    std::vector<std::string> inverted;                            // chart-i even names
    std::vector<std::pair<std::string, std::string>> images;      // chart-j name -> polynomial
};

struct Scenario {
    std::string source;  // file name or "<string>"
    std::string name;
    Field field;
    std::string field_text = "rational";
    std::string variety;                // constructor expression
    std::string transform;              // "", "associated_graded", "bosonize"
    std::vector<int> twists;            // glued
    std::string v01 = "0";              // glued
    std::vector<std::string> phi01;     // glued
    std::map<int, InlineChart> charts;  // inline
    std::vector<InlineTransition> transitions;
    int max_column = 4;
    int window = 2;
    int slack = 0;
    int r_max = 2;
    std::vector<std::string> checks;
    int de_rham_max = -1;               // total_de_rham(n_max); -1 = P - 1
    int koszul_w_max = 4, koszul_k_max = 5;
    std::string graded_even = "x", graded_odd = "t1 t2";
    int graded_window = 3, graded_i_max = 3;
    int tau_dim = 3;
    std::vector<Expectation> expectations;
    std::vector<std::pair<std::string, std::string>> echo;  // key/value pairs as read

    bool has_check(const std::string& c) const;
    bool needs_atlas() const;
};

Scenario parse_scenario(const std::string& text, const std::string& source = "<string>");
Scenario load_scenario(const std::string& path);

/// Builds (and validates) the atlas of a scenario.
Atlas build_atlas(const Scenario& s);

enum class Status { Pass, Fail, Unreliable };
const char* status_name(Status s);

struct CheckResult {
    std::string name;
    Status status = Status::Pass;
    std::string detail;
};

struct Report {
    Scenario scenario;
    std::vector<CheckResult> checks;
    std::vector<Page> pages;                     // r = 1..r_max then E_inf
    std::vector<std::size_t> total_de_rham;
    std::vector<std::size_t> total_de_rham_x0;
    std::map<std::pair<int, int>, long> delta;
    std::vector<std::pair<std::string, double>> timing;  // seconds per stage

    bool ok() const;
    const Page* page(int r) const;
};

struct RunOptions {
    std::optional<int> window_override;
    bool force_probe = false;
};

Report run_scenario(const Scenario& s, const RunOptions& opt = {});

enum class Format { Text, Json, Csv };
Format parse_format(const std::string& s);
std::string emit_report(const Report& r, Format f, bool with_timing = false);

}  // namespace superhodge
