#include "udw/harvest/output.hpp"

#include <cstdio>
#include <optional>

#include <json.hpp>

namespace udw::harvest {

namespace {

struct Cell {
    std::optional<double> value;
    std::optional<double> error;  // empty means exact
};

Cell measured(double v, double e) { return {v, e}; }
Cell exact(double v) { return {v, std::nullopt}; }
Cell absent() { return {}; }

std::vector<Cell> cells(const ResultRow& r) {
    const auto& kf = r.kf;
    const auto& d = r.derived;
    const auto& sp = r.spec;
    std::vector<Cell> c;
    c.push_back(exact(r.n));
    c.push_back(measured(kf.I_A, kf.error.I_A));
    c.push_back(r.pair ? measured(kf.I_B, kf.error.I_B) : absent());
    c.push_back(measured(kf.f_A, d.f_A));
    c.push_back(r.pair ? measured(kf.f_B, d.f_B) : absent());
    c.push_back(r.pair ? measured(kf.theta, d.theta) : absent());
    c.push_back(r.pair ? measured(kf.omega, d.omega) : absent());
    c.push_back(r.vacuum ? exact(kf.C_A) : measured(kf.C_A, kf.error.C_A));
    if (r.pair)
        c.push_back(r.vacuum ? exact(kf.C_B) : measured(kf.C_B, kf.error.C_B));
    else
        c.push_back(absent());
    for (int i = 0; i < 4; ++i) {
        if (r.pair)
            c.push_back(measured(sp.eig_pair[i], d.eig[i]));
        else
            c.push_back(i < 2 ? measured(sp.eig_single[i], d.eig[i]) : absent());
    }
    for (int i = 0; i < 4; ++i) c.push_back(r.pair ? measured(sp.eig_pt[i], d.eig_pt[i]) : absent());
    c.push_back(r.pair ? measured(sp.negativity, d.negativity) : absent());
    c.push_back(measured(sp.entropy_single, d.entropy));
    c.push_back(r.pair ? measured(sp.gamma_minus, d.gamma_minus) : absent());
    c.push_back(r.pair ? measured(sp.gamma_plus, d.gamma_plus) : absent());
    c.push_back(exact(sp.residual_closed_vs_numeric));
    c.push_back(r.resid_pert ? exact(*r.resid_pert) : absent());
    c.push_back(r.resid_oracle ? exact(*r.resid_oracle) : absent());
    c.push_back(exact(r.err_estimate));
    return c;
}

std::string number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_text(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

}  // namespace

const std::vector<std::string>& csv_columns() {
    static const std::vector<std::string> cols{
        "scenario_id", "n",        "I_A",      "I_B",      "f_A",        "f_B",         "theta",
        "omega",       "C_A",      "C_B",      "eig1",     "eig2",       "eig3",        "eig4",
        "eigpt1",      "eigpt2",   "eigpt3",   "eigpt4",   "negativity", "entropy",     "gamma_minus",
        "gamma_plus",  "resid_closed_numeric", "resid_pert", "resid_oracle", "err_estimate"};
    return cols;
}

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
    const auto& cols = csv_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << '\n';
    for (const auto& r : rows) {
        out << csv_text(r.scenario_id);
        for (const auto& c : cells(r)) {
            out << ',';
            if (c.value) out << number(*c.value);
        }
        out << '\n';
    }
}

void write_json(std::ostream& out, const std::vector<ResultRow>& rows, const std::string& units) {
    using nlohmann::ordered_json;
    ordered_json doc;
    doc["schema"] = schema_version;
    doc["units"] = units;
    doc["rows"] = ordered_json::array();
    const auto& cols = csv_columns();
    for (const auto& r : rows) {
        ordered_json row;
        row["scenario_id"] = r.scenario_id;
        const auto cs = cells(r);
        for (std::size_t i = 0; i < cs.size(); ++i) {
            const auto& c = cs[i];
            if (!c.value) {
                row[cols[i + 1]] = nullptr;
                continue;
            }
            ordered_json cell;
            cell["value"] = *c.value;
            if (c.error)
                cell["error"] = *c.error;
            else
                cell["error"] = "exact";
            row[cols[i + 1]] = cell;
        }
        row["b_first"] = r.kf.b_first;
        row["f_flushed"] = r.kf.f_flushed;
        if (r.resid_oracle) row["oracle_tail"] = r.oracle_tail;
        row["notes"] = r.notes;
        doc["rows"].push_back(std::move(row));
    }
    out << doc.dump(2) << '\n';
}

}  // namespace udw::harvest
