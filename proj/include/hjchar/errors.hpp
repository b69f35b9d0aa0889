#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace hjchar {

/// Base class for every failure the solvers can raise. Catching this is
/// enough to map any numerical failure to a nonzero exit code.
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

/// A characteristic left the trusted region (|u| or |p| above the blow-up
/// guard) before reaching the requested time.
class BlowUpError : public SolverError {
public:
    using SolverError::SolverError;
};

/// An iteration (step-size control, root polish, Newton solve) failed to
/// reach its tolerance within its iteration budget.
class NoConvergenceError : public SolverError {
public:
    using SolverError::SolverError;
};

/// A boundary-value scan found no admissible root even after widening the
/// momentum window as far as allowed.
class EmptyRootSetError : public SolverError {
public:
    using SolverError::SolverError;
};

/// The requested horizon is below the shortest time the two-point solver
/// accepts; the scan degenerates as t -> 0.
class DegenerateTimeError : public SolverError {
public:
    using SolverError::SolverError;
};

/// A resolution knob is too coarse for the requested tolerance.
class UnderResolvedError : public SolverError {
public:
    using SolverError::SolverError;
};

/// A solution field still has unfilled cells where a consumer needs values.
class UnfilledFieldError : public SolverError {
public:
    using SolverError::SolverError;
};

/// A model was asked for its growth envelope but does not declare one.
class MissingEnvelopeError : public SolverError {
public:
    using SolverError::SolverError;
};

/// A monotone-scheme run violated its stability bound at runtime.
class CflViolationError : public SolverError {
public:
    using SolverError::SolverError;
};

/// Two fields were compared on different grids.
class GridMismatchError : public SolverError {
public:
    using SolverError::SolverError;
};

/// Configuration rejected. Carries every violation found, not just the
/// first, so a bad run script can be fixed in one pass.
class ConfigError : public SolverError {
public:
    explicit ConfigError(std::vector<std::string> violations)
        : SolverError(join(violations)), violations_(std::move(violations)) {}

    const std::vector<std::string>& violations() const { return violations_; }

private:
    static std::string join(const std::vector<std::string>& v) {
        std::string s = "invalid configuration:";
        for (const auto& line : v) {
            s += "\n  - ";
            s += line;
        }
        return s;
    }

    std::vector<std::string> violations_;
};

} // namespace hjchar
