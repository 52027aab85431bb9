#pragma once

#include <stdexcept>
#include <string>

namespace esbgk {

/// Base class for all solver failures. Carries enough context to locate
/// the offending cell/step from the message alone.
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

class NonpositiveDensity : public SolverError {
public:
    explicit NonpositiveDensity(const std::string& msg) : SolverError(msg) {}
};

class NonpositiveTemperature : public SolverError {
public:
    explicit NonpositiveTemperature(const std::string& msg) : SolverError(msg) {}
};

class NonSPDTensor : public SolverError {
public:
    explicit NonSPDTensor(const std::string& msg) : SolverError(msg) {}
};

class StencilOutOfRange : public SolverError {
public:
    explicit StencilOutOfRange(const std::string& msg) : SolverError(msg) {}
};

class SingularGram : public SolverError {
public:
    explicit SingularGram(const std::string& msg) : SolverError(msg) {}
};

class InsufficientHistory : public SolverError {
public:
    explicit InsufficientHistory(const std::string& msg) : SolverError(msg) {}
};

class FluidVacuum : public SolverError {
public:
    explicit FluidVacuum(const std::string& msg) : SolverError(msg) {}
};

class InvalidConfig : public SolverError {
public:
    explicit InvalidConfig(const std::string& msg) : SolverError(msg) {}
};

} // namespace esbgk
