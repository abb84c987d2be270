#include "udw/harvest/scenario.hpp"

#include <cmath>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace udw::harvest {

namespace {

std::string located(const std::string& field, int line, const std::string& message) {
    std::ostringstream s;
    if (line > 0) s << "line " << line << ": ";
    if (!field.empty()) s << field << ": ";
    s << message;
    return s.str();
}

int line_of(const YAML::Node& n) {
    const auto m = n.Mark();
    return m.is_null() ? 0 : m.line + 1;
}

class Reader {
public:
    explicit Reader(std::string source) : source_(std::move(source)) {}

    [[noreturn]] void fail(const std::string& field, const YAML::Node& at, const std::string& msg) const {
        throw ConfigError(field, line_of(at), msg);
    }

    void expect_map(const YAML::Node& n, const std::string& field) const {
        if (!n.IsMap()) fail(field, n, "expected a mapping");
    }

    void allow_keys(const YAML::Node& n, const std::string& field, const std::set<std::string>& keys) const {
        expect_map(n, field);
        for (const auto& kv : n) {
            const auto key = kv.first.as<std::string>();
            if (!keys.count(key)) fail(field.empty() ? key : field + "." + key, kv.first, "unknown key");
        }
    }

    double number(const YAML::Node& n, const std::string& field) const {
        if (!n.IsScalar()) fail(field, n, "expected a number");
        try {
            const double v = n.as<double>();
            if (!std::isfinite(v)) fail(field, n, "value must be finite");
            return v;
        } catch (const YAML::BadConversion&) {
            fail(field, n, "expected a number, got '" + n.Scalar() + "'");
        }
    }

    int integer(const YAML::Node& n, const std::string& field) const {
        if (!n.IsScalar()) fail(field, n, "expected an integer");
        try {
            return n.as<int>();
        } catch (const YAML::BadConversion&) {
            fail(field, n, "expected an integer, got '" + n.Scalar() + "'");
        }
    }

    std::string text(const YAML::Node& n, const std::string& field) const {
        if (!n.IsScalar()) fail(field, n, "expected a string");
        return n.Scalar();
    }

    bool boolean(const YAML::Node& n, const std::string& field) const {
        if (!n.IsScalar()) fail(field, n, "expected true or false");
        try {
            return n.as<bool>();
        } catch (const YAML::BadConversion&) {
            fail(field, n, "expected true or false");
        }
    }

    std::vector<double> vec(const YAML::Node& n, const std::string& field, int len) const {
        if (!n.IsSequence()) fail(field, n, "expected a list of numbers");
        if (len >= 0 && static_cast<int>(n.size()) != len)
            fail(field, n, "expected " + std::to_string(len) + " components, got " + std::to_string(n.size()));
        std::vector<double> out;
        for (std::size_t i = 0; i < n.size(); ++i) out.push_back(number(n[i], field + "[" + std::to_string(i) + "]"));
        return out;
    }

    SmearingProfile smearing(const YAML::Node& n, const std::string& field) const {
        allow_keys(n, field, {"family", "width"});
        if (!n["family"]) fail(field + ".family", n, "missing required key");
        const auto fam = text(n["family"], field + ".family");
        if (fam == "pointlike") {
            if (n["width"]) fail(field + ".width", n["width"], "pointlike smearing takes no width");
            return SmearingProfile::pointlike();
        }
        if (fam != "gaussian" && fam != "tophat")
            fail(field + ".family", n["family"], "expected pointlike, gaussian or tophat");
        if (!n["width"]) fail(field + ".width", n, "missing required key");
        const double w = number(n["width"], field + ".width");
        if (!(w > 0.0)) fail(field + ".width", n["width"], "width must be positive");
        return fam == "gaussian" ? SmearingProfile::gaussian(w) : SmearingProfile::tophat(w);
    }

    DetectorParams detector(const YAML::Node& n, const std::string& field, DetectorLabel label, int dim) const {
        allow_keys(n, field, {"coupling", "switch_weight", "switch_time", "gap", "position", "smearing"});
        DetectorParams d;
        d.label = label;
        if (!n["coupling"]) fail(field + ".coupling", n, "missing required key");
        d.coupling = number(n["coupling"], field + ".coupling");
        if (n["switch_weight"]) {
            d.switch_weight = number(n["switch_weight"], field + ".switch_weight");
            if (!(d.switch_weight > 0.0)) fail(field + ".switch_weight", n["switch_weight"], "must be positive");
        }
        if (n["switch_time"]) d.switch_time = number(n["switch_time"], field + ".switch_time");
        if (n["gap"]) d.gap = number(n["gap"], field + ".gap");
        d.position = n["position"] ? vec(n["position"], field + ".position", dim) : std::vector<double>(dim, 0.0);
        if (!n["smearing"]) fail(field + ".smearing", n, "missing required key");
        d.smearing = smearing(n["smearing"], field + ".smearing");
        return d;
    }

    GaussianPacket packet(const YAML::Node& n, const std::string& field, int dim) const {
        allow_keys(n, field, {"peak", "center", "spread", "phase", "offset"});
        GaussianPacket p;
        for (const char* key : {"peak", "center", "spread"})
            if (!n[key]) fail(field + "." + key, n, "missing required key");
        p.peak = number(n["peak"], field + ".peak");
        p.center = vec(n["center"], field + ".center", dim);
        p.spread = number(n["spread"], field + ".spread");
        if (!(p.spread > 0.0)) fail(field + ".spread", n["spread"], "spread must be positive");
        if (n["phase"]) p.phase = number(n["phase"], field + ".phase");
        p.offset = n["offset"] ? vec(n["offset"], field + ".offset", dim) : std::vector<double>(dim, 0.0);
        return p;
    }

    CoherentAmplitude amplitude(const YAML::Node& n, int dim) const {
        allow_keys(n, "amplitude", {"family", "packets"});
        if (!n["family"]) fail("amplitude.family", n, "missing required key");
        const auto fam = text(n["family"], "amplitude.family");
        if (fam == "vacuum") {
            if (n["packets"]) fail("amplitude.packets", n["packets"], "vacuum takes no packets");
            return CoherentAmplitude::vacuum();
        }
        if (fam != "gaussian_packet" && fam != "superposition")
            fail("amplitude.family", n["family"], "expected vacuum, gaussian_packet or superposition");
        const auto ps = n["packets"];
        if (!ps || !ps.IsSequence() || ps.size() == 0) fail("amplitude.packets", ps ? ps : n, "expected a non-empty list");
        if (fam == "gaussian_packet" && ps.size() != 1)
            fail("amplitude.packets", ps, "gaussian_packet takes exactly one packet");
        std::vector<GaussianPacket> out;
        for (std::size_t i = 0; i < ps.size(); ++i)
            out.push_back(packet(ps[i], "amplitude.packets[" + std::to_string(i) + "]", dim));
        if (fam == "gaussian_packet") return CoherentAmplitude::packet(std::move(out.front()));
        return CoherentAmplitude::superposition(std::move(out));
    }

    QuadratureConfig quadrature(const YAML::Node& n) const {
        allow_keys(n, "quadrature",
                   {"rel_tol", "abs_tol", "max_subdivisions", "radial_map_scale", "ir_cutoff", "uv_cutoff"});
        QuadratureConfig q;
        if (n["rel_tol"]) q.rel_tol = number(n["rel_tol"], "quadrature.rel_tol");
        if (n["abs_tol"]) q.abs_tol = number(n["abs_tol"], "quadrature.abs_tol");
        if (n["max_subdivisions"]) q.max_subdivisions = integer(n["max_subdivisions"], "quadrature.max_subdivisions");
        if (n["radial_map_scale"]) q.radial_map_scale = number(n["radial_map_scale"], "quadrature.radial_map_scale");
        if (n["ir_cutoff"]) q.ir_cutoff = number(n["ir_cutoff"], "quadrature.ir_cutoff");
        if (n["uv_cutoff"]) q.uv_cutoff = number(n["uv_cutoff"], "quadrature.uv_cutoff");
        try {
            q.validate();
        } catch (const InvalidArgument& e) {
            fail("quadrature", n, e.what());
        }
        return q;
    }

    oracle::ModeGrid oracle_grid(const YAML::Node& n, int dim) const {
        allow_keys(n, "oracle", {"truncation", "budget", "modes", "radial"});
        oracle::ModeGrid g;
        if (n["truncation"]) g.truncation = integer(n["truncation"], "oracle.truncation");
        if (g.truncation < 1) fail("oracle.truncation", n["truncation"], "must be at least 1");
        if (n["budget"]) {
            const int b = integer(n["budget"], "oracle.budget");
            if (b < 1) fail("oracle.budget", n["budget"], "must be positive");
            g.budget = static_cast<std::size_t>(b);
        }
        if (n["modes"] && n["radial"]) fail("oracle", n, "give either modes or radial, not both");
        if (n["modes"]) {
            const auto ms = n["modes"];
            if (!ms.IsSequence() || ms.size() == 0) fail("oracle.modes", ms, "expected a non-empty list");
            for (std::size_t i = 0; i < ms.size(); ++i) {
                const std::string f = "oracle.modes[" + std::to_string(i) + "]";
                allow_keys(ms[i], f, {"k", "weight"});
                if (!ms[i]["k"] || !ms[i]["weight"]) fail(f, ms[i], "needs k and weight");
                oracle::Mode m;
                m.k = vec(ms[i]["k"], f + ".k", dim);
                m.weight = number(ms[i]["weight"], f + ".weight");
                if (!(m.weight > 0.0)) fail(f + ".weight", ms[i]["weight"], "must be positive");
                g.modes.push_back(std::move(m));
            }
        } else if (n["radial"]) {
            const auto r = n["radial"];
            allow_keys(r, "oracle.radial", {"k_min", "k_max", "nodes", "directions"});
            for (const char* key : {"k_min", "k_max", "nodes", "directions"})
                if (!r[key]) fail(std::string("oracle.radial.") + key, r, "missing required key");
            const double lo = number(r["k_min"], "oracle.radial.k_min");
            const double hi = number(r["k_max"], "oracle.radial.k_max");
            const int nodes = integer(r["nodes"], "oracle.radial.nodes");
            if (!(lo >= 0.0 && hi > lo)) fail("oracle.radial", r, "need 0 <= k_min < k_max");
            if (nodes < 1) fail("oracle.radial.nodes", r["nodes"], "must be positive");
            const auto ds = r["directions"];
            if (!ds.IsSequence() || ds.size() == 0) fail("oracle.radial.directions", ds, "expected a non-empty list");
            std::vector<std::vector<double>> dirs;
            for (std::size_t i = 0; i < ds.size(); ++i)
                dirs.push_back(vec(ds[i], "oracle.radial.directions[" + std::to_string(i) + "]", dim));
            const int trunc = g.truncation;
            const auto budget = g.budget;
            g = oracle::radial_mode_grid(dim, lo, hi, nodes, dirs, trunc);
            g.budget = budget;
        } else {
            fail("oracle", n, "needs modes or radial");
        }
        try {
            g.validate();
        } catch (const Error& e) {
            fail("oracle", n, e.what());
        }
        return g;
    }

    SweepAxis sweep(const YAML::Node& n) const {
        allow_keys(n, "sweep", {"path", "values", "from", "to", "count"});
        SweepAxis ax;
        if (!n["path"]) fail("sweep.path", n, "missing required key");
        ax.path = text(n["path"], "sweep.path");
        if (n["values"]) {
            if (n["from"] || n["to"] || n["count"]) fail("sweep", n, "give either values or from/to/count");
            ax.values = vec(n["values"], "sweep.values", -1);
        } else {
            for (const char* key : {"from", "to", "count"})
                if (!n[key]) fail(std::string("sweep.") + key, n, "missing required key");
            const double a = number(n["from"], "sweep.from"), b = number(n["to"], "sweep.to");
            const int c = integer(n["count"], "sweep.count");
            if (c < 1) fail("sweep.count", n["count"], "must be positive");
            for (int i = 0; i < c; ++i) ax.values.push_back(c == 1 ? a : a + (b - a) * i / (c - 1));
        }
        if (ax.values.empty()) fail("sweep.values", n, "sweep needs at least one value");
        return ax;
    }

    Scenario scenario(const YAML::Node& root) const {
        if (!root || root.IsNull()) throw ConfigError("", 0, source_ + " is empty");
        allow_keys(root, "", {"schema", "units", "id", "dimension", "detectors", "amplitude", "quadrature", "oracle",
                              "sweep", "perturbative"});
        Scenario s;
        if (!root["schema"]) fail("schema", root, "missing schema version");
        const int ver = integer(root["schema"], "schema");
        if (ver != schema_version)
            fail("schema", root["schema"], "unsupported schema version " + std::to_string(ver) + " (expected " +
                                               std::to_string(schema_version) + ")");
        if (!root["units"]) fail("units", root, "missing units declaration");
        s.units = text(root["units"], "units");
        if (s.units.empty()) fail("units", root["units"], "units must name the base length unit");
        if (root["id"]) s.id = text(root["id"], "id");
        if (!root["dimension"]) fail("dimension", root, "missing required key");
        s.n = integer(root["dimension"], "dimension");
        if (s.n < 1 || s.n > 3) fail("dimension", root["dimension"], "must be 1, 2 or 3");

        const auto dets = root["detectors"];
        if (!dets) fail("detectors", root, "missing required key");
        allow_keys(dets, "detectors", {"A", "B"});
        if (!dets["A"]) fail("detectors.A", dets, "detector A is required");
        s.detectors.push_back(detector(dets["A"], "detectors.A", DetectorLabel::A, s.n));
        if (dets["B"]) s.detectors.push_back(detector(dets["B"], "detectors.B", DetectorLabel::B, s.n));

        if (root["amplitude"]) s.amplitude = amplitude(root["amplitude"], s.n);
        if (root["quadrature"]) s.quadrature = quadrature(root["quadrature"]);
        if (root["oracle"]) s.oracle = oracle_grid(root["oracle"], s.n);
        if (root["perturbative"]) s.perturbative = boolean(root["perturbative"], "perturbative");
        if (root["sweep"]) {
            s.sweep = sweep(root["sweep"]);
            Scenario probe = s;
            try {
                set_parameter(probe, s.sweep->path, s.sweep->values.front());
            } catch (const ConfigError& e) {
                fail("sweep.path", root["sweep"]["path"], e.what());
            }
        }
        if (s.is_pair() && s.detectors[0].switch_time == s.detectors[1].switch_time)
            s.warnings.push_back("detectors switch at the same instant; the A-then-B ordering is used");
        if (s.n == 1 && !s.quadrature.ir_cutoff)
            s.warnings.push_back("n = 1 without ir_cutoff: normalised smearings diverge in the infrared");
        return s;
    }

private:
    std::string source_;
};

int parse_index(const std::string& token, std::string& name) {
    static const std::regex re(R"(^([a-z_]+)(?:\[(\d+)\])?$)");
    std::smatch m;
    if (!std::regex_match(token, m, re)) return -2;
    name = m[1];
    return m[2].matched ? std::stoi(m[2]) : -1;
}

}  // namespace

ConfigError::ConfigError(const std::string& f, int l, const std::string& message)
    : Error(located(f, l, message)), field(f), line(l) {}

Scenario parse_scenario(const std::string& text, const std::string& source) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError("", e.mark.is_null() ? 0 : e.mark.line + 1, "malformed scenario file: " + e.msg);
    }
    return Reader(source).scenario(root);
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", 0, "cannot open scenario file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str(), path);
}

void set_parameter(Scenario& s, const std::string& path, double value) {
    std::vector<std::string> tokens;
    std::stringstream ss(path);
    for (std::string t; std::getline(ss, t, '.');) tokens.push_back(t);
    auto bad = [&](const std::string& why) { throw ConfigError(path, 0, why); };
    if (tokens.size() < 2) bad("unknown parameter path");
    if (!std::isfinite(value)) bad("sweep values must be finite");

    auto component = [&](std::vector<double>& v, int idx) -> double& {
        if (v.empty()) v.assign(s.n, 0.0);
        if (idx < 0 || idx >= static_cast<int>(v.size())) bad("component index out of range");
        return v[idx];
    };

    std::string name;
    if (tokens[0] == "detectors") {
        if (tokens.size() < 3) bad("unknown parameter path");
        int which = tokens[1] == "A" ? 0 : (tokens[1] == "B" ? 1 : -1);
        if (which < 0 || which >= static_cast<int>(s.detectors.size())) bad("no such detector");
        DetectorParams& d = s.detectors[which];
        const int idx = parse_index(tokens[2], name);
        if (tokens.size() == 4 && name == "smearing" && tokens[3] == "width" && idx == -1) {
            if (d.smearing.family == SmearingFamily::pointlike) bad("pointlike smearing has no width");
            d.smearing.width = value;
            return;
        }
        if (tokens.size() != 3) bad("unknown parameter path");
        if (name == "position" && idx >= 0) {
            component(d.position, idx) = value;
            return;
        }
        if (idx != -1) bad("unknown parameter path");
        if (name == "coupling") d.coupling = value;
        else if (name == "switch_weight") d.switch_weight = value;
        else if (name == "switch_time") d.switch_time = value;
        else if (name == "gap") d.gap = value;
        else bad("unknown detector parameter");
        return;
    }
    if (tokens[0] == "amplitude") {
        if (tokens.size() != 3) bad("unknown parameter path");
        const int pi = parse_index(tokens[1], name);
        if (name != "packets" || pi < 0) bad("expected amplitude.packets[i].<field>");
        if (pi >= static_cast<int>(s.amplitude.packets.size())) bad("no such packet");
        GaussianPacket& p = s.amplitude.packets[pi];
        const int idx = parse_index(tokens[2], name);
        if (idx >= 0) {
            if (name == "center") component(p.center, idx) = value;
            else if (name == "offset") component(p.offset, idx) = value;
            else bad("unknown packet parameter");
            return;
        }
        if (idx != -1) bad("unknown parameter path");
        if (name == "peak") p.peak = value;
        else if (name == "spread") p.spread = value;
        else if (name == "phase") p.phase = value;
        else bad("unknown packet parameter");
        return;
    }
    if (tokens[0] == "quadrature") {
        if (tokens.size() != 2) bad("unknown parameter path");
        auto& q = s.quadrature;
        if (tokens[1] == "rel_tol") q.rel_tol = value;
        else if (tokens[1] == "abs_tol") q.abs_tol = value;
        else if (tokens[1] == "radial_map_scale") q.radial_map_scale = value;
        else if (tokens[1] == "ir_cutoff") q.ir_cutoff = value;
        else if (tokens[1] == "uv_cutoff") q.uv_cutoff = value;
        else bad("unknown quadrature parameter");
        return;
    }
    bad("unknown parameter path");
}

}  // namespace udw::harvest
