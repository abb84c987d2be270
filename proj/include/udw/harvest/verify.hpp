#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace udw::harvest {

struct CheckResult {
    std::string suite;
    std::string name;
    double tolerance = 0.0;
    double worst = 0.0;  // worst value found, compared against tolerance
    bool upper = true;   // worst < tolerance when true, worst > tolerance otherwise
    bool passed = false;
    int cases = 0;
    std::string detail;
};

struct SuiteReport {
    std::string suite;
    std::uint64_t seed = 0;
    std::vector<CheckResult> checks;
    double seconds = 0.0;
    bool passed() const;
};

// theorem1, theorem2, theorem3, gamma, factorization, perturbative, oracle, overlaps.
const std::vector<std::string>& suite_names();

// Runs one suite, or every suite for "all". Failures are report content;
// only an unknown suite name throws.
SuiteReport run_suite(const std::string& name, std::uint64_t seed = 42);

std::string format_report(const SuiteReport& report);

}  // namespace udw::harvest
