#pragma once

#include <stdexcept>
#include <string>

namespace geoflow {

/// A quantity could not be evaluated at all: domain violation inside jet
/// arithmetic, singular or non-positive-definite metric, bad dimension.
/// Reported instead of letting NaN propagate, so that "evaluation invalid"
/// is never confused with "identity fails".
class evaluation_error : public std::runtime_error {
public:
    explicit evaluation_error(const std::string& what) : std::runtime_error(what) {}
};

/// A hypothesis of a conditional identity is not met at the queried point
/// (critical point of the potential, non-vanishing Cotton tensor, missing
/// potential, inconsistent eigenvalue routes). Distinct from both evaluation
/// failures and identity violations.
class precondition_error : public std::runtime_error {
public:
    explicit precondition_error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid configuration (e.g. the Schouten-singular ODE parameter).
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace geoflow
