#pragma once

#include <stdexcept>
#include <string>

namespace xorsim {

// Bad configuration or bad command-line input. The CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Anything that goes wrong while simulating. The CLI maps it to exit code 1.
class SimulationError : public std::runtime_error {
public:
    explicit SimulationError(const std::string& what) : std::runtime_error(what) {}
};

class GenerationExhausted : public SimulationError {
public:
    explicit GenerationExhausted(const std::string& what) : SimulationError(what) {}
};

class EpisodeFinished : public SimulationError {
public:
    explicit EpisodeFinished(const std::string& what) : SimulationError(what) {}
};

class ContractViolation : public SimulationError {
public:
    explicit ContractViolation(const std::string& what) : SimulationError(what) {}
};

class PolicyFault : public SimulationError {
public:
    explicit PolicyFault(const std::string& what) : SimulationError(what) {}
};

} // namespace xorsim
