#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace thermistor {

/// Invalid parameters, tolerances, or constitutive data.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bad input to a matrix/vector assembly routine.
struct assembly_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A constrained node is not admissible for the given boundary partition.
struct constraint_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Linear or nonlinear solver failed to reach its tolerance.
struct solver_error : std::runtime_error {
    solver_error(const std::string& msg, double residual)
        : std::runtime_error(msg), final_residual(residual) {}
    double final_residual;
};

/// Outer fixed-point (Gauss-Seidel) coupling failed; carries the residual history.
struct coupling_error : std::runtime_error {
    coupling_error(const std::string& msg, std::vector<double> history)
        : std::runtime_error(msg), residual_history(std::move(history)) {}
    std::vector<double> residual_history;
};

/// A structural hypothesis could not be witnessed on the scanned range.
struct structural_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace thermistor
