#pragma once

#include <stdexcept>
#include <string>

namespace udw {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Adaptive subdivision ran out of budget before meeting the tolerance.
class NonConvergence : public Error {
public:
    NonConvergence(const std::string& what, double achieved)
        : Error(what), achieved_error(achieved) {}
    double achieved_error;
};

// Dyadic shell sums toward k -> 0 or k -> infinity failed to decay.
class DivergenceDetected : public Error {
public:
    enum class Region { infrared, ultraviolet };
    DivergenceDetected(const std::string& what, Region r) : Error(what), region(r) {}
    Region region;
};

class UnsupportedDimension : public Error {
public:
    explicit UnsupportedDimension(int n)
        : Error("spatial dimension " + std::to_string(n) + " not supported (n must be 1, 2 or 3)"), n(n) {}
    int n;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class TraceViolation : public Error {
public:
    TraceViolation(const std::string& what, double dev) : Error(what), deviation(dev) {}
    double deviation;
};

class FactorizationMismatch : public Error {
public:
    FactorizationMismatch(const std::string& what, double res) : Error(what), residual(res) {}
    double residual;
};

class NotHermitian : public Error {
public:
    NotHermitian(const std::string& what, double dev) : Error(what), deviation(dev) {}
    double deviation;
};

class BudgetExceeded : public Error {
public:
    BudgetExceeded(const std::string& what, std::size_t need, std::size_t cap)
        : Error(what), required(need), budget(cap) {}
    std::size_t required;
    std::size_t budget;
};

}  // namespace udw
