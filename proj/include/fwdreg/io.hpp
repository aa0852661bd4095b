#pragma once

#include "fwdreg/bounds.hpp"
#include "fwdreg/error.hpp"
#include "fwdreg/forward_select.hpp"
#include "fwdreg/simulate.hpp"
#include "fwdreg/sparse_eig.hpp"
#include "fwdreg/types.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fwdreg {

using json = nlohmann::json;

inline constexpr const char* kSchemaVersion = "1";

// ---------------------------------------------------------------------------
// CSV

/// Covariate table read from CSV: header row, numeric cells, optional "y".
struct CsvTable
{
    std::vector<std::string> names;  // covariate names in header order
    Matrix x;
    std::optional<Vector> y;
};

namespace detail {

inline std::vector<std::string> split_row(const std::string& line)
{
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

inline std::string trim(std::string s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline double parse_number(const std::string& cell, std::size_t row, std::size_t col)
{
    const std::string t = trim(cell);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) {
        throw Error(ErrorCode::malformed_input, "row " + std::to_string(row) + ", column " +
                                                    std::to_string(col + 1) +
                                                    ": not a finite number: '" + t + "'");
    }
    return v;
}

} // namespace detail

/**
 * Parses comma-separated numeric data with a header row. The column named
 * "y" (if any) becomes the response; all others are covariates in header
 * order.
 */
inline CsvTable parse_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::malformed_input, "empty CSV");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    std::vector<std::string> header = detail::split_row(line);
    for (auto& h : header) h = detail::trim(h);

    std::optional<std::size_t> y_col;
    CsvTable table;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c].empty()) throw Error(ErrorCode::malformed_input, "empty header name");
        if (header[c] == "y") {
            if (y_col) throw Error(ErrorCode::malformed_input, "duplicate 'y' column");
            y_col = c;
        } else {
            table.names.push_back(header[c]);
        }
    }

    std::vector<std::vector<double>> rows;
    std::size_t row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split_row(line);
        if (cells.size() != header.size()) {
            throw Error(ErrorCode::malformed_input,
                        "row " + std::to_string(row_no) + " has " + std::to_string(cells.size()) +
                            " cells, header has " + std::to_string(header.size()));
        }
        std::vector<double> values(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            values[c] = detail::parse_number(cells[c], row_no, c);
        }
        rows.push_back(std::move(values));
    }
    if (rows.empty()) throw Error(ErrorCode::malformed_input, "CSV has no data rows");

    const auto n = static_cast<Eigen::Index>(rows.size());
    table.x.resize(n, static_cast<Eigen::Index>(table.names.size()));
    if (y_col) table.y = Vector(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Index j = 0;
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (y_col && c == *y_col) {
                (*table.y)(i) = rows[static_cast<std::size_t>(i)][c];
            } else {
                table.x(i, j++) = rows[static_cast<std::size_t>(i)][c];
            }
        }
    }
    return table;
}

inline CsvTable read_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::malformed_input, "cannot open '" + path + "'");
    return parse_csv(in);
}

/// Shortest decimal text that parses back to exactly `v`.
inline std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

/// Writes covariates then y, one row per observation.
inline void write_csv(std::ostream& out, const std::vector<std::string>& names, const Matrix& x,
                      const Vector& y)
{
    for (const auto& name : names) out << name << ',';
    out << "y\n";
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) out << format_double(x(i, j)) << ',';
        out << format_double(y(i)) << '\n';
    }
}

inline std::vector<std::string> default_names(std::size_t p)
{
    std::vector<std::string> names;
    for (std::size_t j = 0; j < p; ++j) names.push_back("x" + std::to_string(j + 1));
    return names;
}

// ---------------------------------------------------------------------------
// JSON

NLOHMANN_JSON_SERIALIZE_ENUM(DesignKind, {
    {DesignKind::independent, "independent"},
    {DesignKind::equicorrelated, "equicorrelated"},
    {DesignKind::toeplitz, "toeplitz"},
})

NLOHMANN_JSON_SERIALIZE_ENUM(ThetaKind, {
    {ThetaKind::constant, "constant"},
    {ThetaKind::decaying, "decaying"},
    {ThetaKind::signed_alternating, "signed_alternating"},
})

NLOHMANN_JSON_SERIALIZE_ENUM(EigMethod, {
    {EigMethod::exact, "exact"},
    {EigMethod::sampled, "sampled"},
})

inline void to_json(json& j, const Design& d)
{
    j = json{{"kind", d.kind}};
    if (d.kind != DesignKind::independent) j["rho"] = d.rho;
}

inline void from_json(const json& j, Design& d)
{
    j.at("kind").get_to(d.kind);
    d.rho = j.value("rho", 0.0);
}

inline void to_json(json& j, const ThetaPattern& t)
{
    j = json{{"kind", t.kind}, {"c", t.c}};
    if (t.kind == ThetaKind::decaying) j["rate"] = t.rate;
}

inline void from_json(const json& j, ThetaPattern& t)
{
    j.at("kind").get_to(t.kind);
    t.c = j.value("c", 1.0);
    t.rate = j.value("rate", 1.0);
}

inline void to_json(json& j, const SimConfig& c)
{
    j = json{{"n", c.n},           {"p", c.p},
             {"s0", c.s0},         {"design", c.design},
             {"theta_pattern", c.theta_pattern}, {"noise_sd", c.noise_sd},
             {"seed", c.seed}};
}

/// Missing fields keep their SimConfig defaults; unknown or mistyped fields throw.
inline void from_json(const json& j, SimConfig& c)
{
    static const std::vector<std::string> known = {"n", "p", "s0", "design", "theta_pattern",
                                                   "noise_sd", "seed"};
    for (const auto& [key, _] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw Error(ErrorCode::malformed_input, "unknown SimConfig field '" + key + "'");
        }
    }
    c.n = j.value("n", c.n);
    c.p = j.value("p", c.p);
    c.s0 = j.value("s0", c.s0);
    if (j.contains("design")) j.at("design").get_to(c.design);
    if (j.contains("theta_pattern")) j.at("theta_pattern").get_to(c.theta_pattern);
    c.noise_sd = j.value("noise_sd", c.noise_sd);
    c.seed = j.value("seed", c.seed);
}

inline SimConfig parse_sim_config(const std::string& text)
{
    try {
        return json::parse(text).get<SimConfig>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::malformed_input, std::string("SimConfig: ") + e.what());
    }
}

inline SimConfig read_sim_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::malformed_input, "cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_sim_config(buf.str());
}

inline json to_json_vector(const Vector& v)
{
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

/// Zero-based indices rendered as one-based column positions.
inline json one_based(const IndexSet& s)
{
    json arr = json::array();
    for (std::size_t j : s) arr.push_back(j + 1);
    return arr;
}

inline json names_of(const IndexSet& s, const std::vector<std::string>& names)
{
    json arr = json::array();
    for (std::size_t j : s) arr.push_back(names.at(j));
    return arr;
}

inline json report_json(const SparseEigReport& r, const std::vector<std::string>& names)
{
    return json{{"s", r.s},
                {"value", r.value},
                {"method", r.method},
                {"is_upper_bound", r.method == EigMethod::sampled},
                {"witness", one_based(r.witness)},
                {"witness_names", names_of(r.witness, names)},
                {"subsets_examined", r.subsets_examined}};
}

inline json trace_json(const SelectionTrace& tr, const std::vector<std::string>& names)
{
    json steps = json::array();
    for (const auto& st : tr.steps) {
        steps.push_back(json{{"column", st.index + 1},
                             {"name", names.at(st.index)},
                             {"gain", st.gain},
                             {"loss_after", st.loss_after}});
    }
    return json{{"threshold", tr.threshold}, {"initial_loss", tr.initial_loss}, {"steps", steps}};
}

inline const char* to_string(StopReason r)
{
    return r == StopReason::threshold ? "threshold" : "step_budget";
}

inline json bound_json(const BoundReport& b)
{
    json c2 = json::array();
    for (const auto& e : b.c2_of_m) {
        c2.push_back(json{{"m", e.m}, {"phi", e.phi}, {"c2", e.c2}, {"holds", e.holds}});
    }
    return json{{"s_hat", b.s_hat},
                {"s0", b.s0},
                {"false_selections", b.false_selections},
                {"noise_sup", b.noise_sup},
                {"phi_pred", b.phi_pred},
                {"c1", b.c1},
                {"pred_error_norm", b.pred_error_norm},
                {"pred_bound_holds", b.pred_bound_holds},
                {"c2_of_m", c2},
                {"count_claims_vacuous", b.count_claims_vacuous()},
                {"count_bound_holds", b.count_bound_holds()},
                {"threshold_ok", b.threshold_ok},
                {"eig_method", b.eig_method},
                {"caveat", b.caveat}};
}

inline void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::malformed_input, "cannot write '" + path + "'");
    out << text;
}

} // namespace fwdreg
