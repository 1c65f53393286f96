#ifndef ICABENCH_TYPES_HPP
#define ICABENCH_TYPES_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace icabench {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using VectorI = Eigen::VectorXi;

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user input: bad shapes, bad parameters, violated preconditions.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Malformed file content; the message names the offending location.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure: singular matrices, degenerate histograms, divergence.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Multichannel time series: one row per channel, one column per sample.
struct Dataset {
  Matrix data;                      // n_channels x n_samples
  double srate = 0.0;               // samples per second
  std::vector<std::string> labels;  // one per channel, unique
  std::string id;

  Eigen::Index channels() const { return data.rows(); }
  Eigen::Index samples() const { return data.cols(); }

  /// Throws ValidationError if any invariant is violated.
  void validate() const;
};

/// Subtracts the per-row mean from each row.
Matrix remove_row_means(const Matrix& x);

/// Default channel labels "ch01", "ch02", ...
std::vector<std::string> default_labels(int n);

/// FNV-1a hash of a string, stable across platforms. Used for params digests.
std::string digest(const std::string& text);

}  // namespace icabench

#endif  // ICABENCH_TYPES_HPP
