#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <utility>

#include <CLI11.hpp>
#include <json.hpp>

#include "udw/harvest/output.hpp"
#include "udw/harvest/run.hpp"
#include "udw/harvest/scenario.hpp"
#include "udw/harvest/verify.hpp"

namespace {

enum Exit { ok = 0, config_error = 1, compute_error = 2, verification_failed = 3 };

struct Options {
    std::string file;
    std::string out;
    std::string format = "csv";
    int jobs = 1;
    std::optional<double> tol;
    bool quiet = false;
    std::string suite;
    std::uint64_t seed = 42;
};

void emit(const Options& opt, const std::string& text) {
    if (opt.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(opt.out, std::ios::binary);
    if (!f) throw udw::harvest::ConfigError("--out", 0, "cannot write " + opt.out);
    f << text;
}

int run_scenario(const std::string& mode, const Options& opt) {
    using namespace udw::harvest;
    Scenario s = load_scenario(opt.file);
    if (opt.tol) s.quadrature.rel_tol = *opt.tol;
    if (mode == "single" && s.is_pair()) throw ConfigError("detectors", 0, "single expects one detector; use pair");
    if (mode == "pair" && !s.is_pair()) throw ConfigError("detectors", 0, "pair expects detectors A and B");
    if (mode == "sweep" && !s.sweep) throw ConfigError("sweep", 0, "scenario has no sweep block");
    if (mode == "oracle" && !s.oracle) throw ConfigError("oracle", 0, "scenario has no oracle block");
    if ((mode == "single" || mode == "pair") && s.sweep) {
        s.warnings.push_back("sweep block ignored; use the sweep subcommand");
        s.sweep.reset();
    }
    const bool with_oracle = s.oracle.has_value();
    const auto rows = run_sweep(s, opt.jobs, with_oracle);
    if (!opt.quiet) {
        for (const auto& w : s.warnings) std::cerr << "warning: " << w << '\n';
        for (const auto& r : rows)
            for (std::size_t i = s.warnings.size(); i < r.notes.size(); ++i)
                std::cerr << "note: " << r.scenario_id << ": " << r.notes[i] << '\n';
    }
    std::ostringstream text;
    if (opt.format == "json")
        write_json(text, rows, s.units);
    else
        write_csv(text, rows);
    emit(opt, text.str());
    return ok;
}

int run_verify(const Options& opt) {
    using namespace udw::harvest;
    const auto rep = run_suite(opt.suite, opt.seed);
    if (opt.format == "json") {
        nlohmann::ordered_json doc;
        doc["suite"] = rep.suite;
        doc["seed"] = rep.seed;
        doc["passed"] = rep.passed();
        doc["checks"] = nlohmann::ordered_json::array();
        for (const auto& c : rep.checks) {
            doc["checks"].push_back({{"suite", c.suite},
                                     {"name", c.name},
                                     {"passed", c.passed},
                                     {"worst", c.worst},
                                     {"tolerance", c.tolerance},
                                     {"bound", c.upper ? "upper" : "lower"},
                                     {"cases", c.cases},
                                     {"detail", c.detail}});
        }
        emit(opt, doc.dump(2) + "\n");
    } else if (!opt.quiet || !rep.passed()) {
        emit(opt, format_report(rep));
    }
    return rep.passed() ? ok : verification_failed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Delta-coupled detector pairs in coherent field states"};
    app.require_subcommand(1);
    app.fallthrough();
    Options opt;
    app.add_option("--out", opt.out, "Write output to this path instead of stdout");
    app.add_option("--format", opt.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--jobs", opt.jobs, "Concurrent sweep points")->check(CLI::PositiveNumber);
    app.add_option("--tol", opt.tol, "Override the quadrature relative tolerance")->check(CLI::PositiveNumber);
    app.add_flag("--quiet", opt.quiet, "Suppress warnings and notes");

    std::string mode;
    const std::pair<const char*, const char*> modes[] = {
        {"single", "Evaluate one detector"},
        {"pair", "Evaluate a detector pair"},
        {"sweep", "Evaluate every point of the scenario's sweep"},
        {"oracle", "Evaluate and compare against the truncated Fock oracle"}};
    for (const auto& [name, help] : modes) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("file", opt.file, "Scenario file")->required();
        sub->callback([&mode, name] { mode = name; });
    }
    auto* verify = app.add_subcommand("verify", "Run a seeded invariant suite");
    std::vector<std::string> suites = udw::harvest::suite_names();
    suites.push_back("all");
    verify->add_option("suite", opt.suite, "Suite name")->required()->check(CLI::IsMember(suites));
    verify->add_option("--seed", opt.seed, "Generator seed");
    verify->callback([&mode] { mode = "verify"; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }

    try {
        if (mode == "verify") return run_verify(opt);
        return run_scenario(mode, opt);
    } catch (const udw::harvest::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const udw::harvest::ComputeError& e) {
        std::cerr << "compute error: " << e.what() << '\n';
        return compute_error;
    } catch (const udw::InvalidArgument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const std::exception& e) {
        std::cerr << "compute error: " << e.what() << '\n';
        return compute_error;
    }
}
