#pragma once

#include <stdexcept>
#include <string>

namespace mfluid {

/// Failure categories surfaced by the solvers and the scenario layer.
/// The command-line tool maps each one onto a distinct exit code.
enum class ErrorKind { config, positivity, blow_up, iteration, io };

class SimulationError : public std::runtime_error {
public:
    SimulationError(ErrorKind kind, const std::string& what, double time = 0.0)
        : std::runtime_error(what), kind_(kind), time_(time) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }
    /// Simulation time at which the failure was detected (0 for non-temporal errors).
    [[nodiscard]] double time() const noexcept { return time_; }

private:
    ErrorKind kind_;
    double time_;
};

/// Schema violation or a breached well-posedness hypothesis on the input data.
class ConfigError : public SimulationError {
public:
    explicit ConfigError(const std::string& what) : SimulationError(ErrorKind::config, what) {}
};

/// A density dropped to (or below) the configured floor.
class PositivityError : public SimulationError {
public:
    PositivityError(const std::string& what, double time)
        : SimulationError(ErrorKind::positivity, what, time) {}
};

/// Non-finite fields or an energy increase that the dynamics forbid.
class BlowUpError : public SimulationError {
public:
    BlowUpError(const std::string& what, double time)
        : SimulationError(ErrorKind::blow_up, what, time) {}
};

/// Fixed-point iteration failed to converge or diverged.
class IterationError : public SimulationError {
public:
    IterationError(const std::string& what, double time)
        : SimulationError(ErrorKind::iteration, what, time) {}
};

class IoError : public SimulationError {
public:
    explicit IoError(const std::string& what) : SimulationError(ErrorKind::io, what) {}
};

}  // namespace mfluid
