#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace rsweep {

using Matrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

/// sI - A is numerically singular at the requested point; the caller should
/// skip or regularize the frequency.
class SingularResolvent : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// I - G11*Delta is singular: the candidate uncertainty closes an unstable loop.
class SingularLftLoop : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class StructureMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The L2 gain is undefined because the state matrix has open-RHP eigenvalues.
class UnstableSystem : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidDelta : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace rsweep
