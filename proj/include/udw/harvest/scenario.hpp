#pragma once

#include <optional>
#include <string>
#include <vector>

#include "udw/errors.hpp"
#include "udw/fock_oracle.hpp"
#include "udw/momentum_kernel.hpp"

namespace udw::harvest {

constexpr int schema_version = 1;

class ConfigError : public Error {
public:
    ConfigError(const std::string& field, int line, const std::string& message);
    std::string field;
    int line;  // 1-based, 0 when unknown
};

// Wraps a module error with the scenario that produced it.
class ComputeError : public Error {
public:
    ComputeError(const std::string& scenario_id, const std::string& message)
        : Error(scenario_id + ": " + message), scenario(scenario_id) {}
    std::string scenario;
};

struct SweepAxis {
    std::string path;
    std::vector<double> values;
};

struct Scenario {
    std::string id = "scenario";
    std::string units;
    int n = 3;
    std::vector<DetectorParams> detectors;
    CoherentAmplitude amplitude;
    QuadratureConfig quadrature;
    std::optional<oracle::ModeGrid> oracle;
    std::optional<SweepAxis> sweep;
    bool perturbative = true;
    std::vector<std::string> warnings;

    bool is_pair() const { return detectors.size() == 2; }
};

Scenario parse_scenario(const std::string& text, const std::string& source = "<string>");
Scenario load_scenario(const std::string& path);

// Sets a numeric parameter addressed by a dotted path such as
// "detectors.B.switch_time", "detectors.A.position[0]" or
// "amplitude.packets[1].phase".
void set_parameter(Scenario& s, const std::string& path, double value);

}  // namespace udw::harvest
