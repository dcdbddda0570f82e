#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rdp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Row-major 2D layout of a flattened state (index = row * cols + col).
struct GridShape {
  int rows = 0;
  int cols = 0;

  int size() const { return rows * cols; }
  bool operator==(const GridShape&) const = default;
};

/// Base error for the library. `code` is a short machine-readable tag that
/// the CLI forwards in its error JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

inline void require(bool condition, const char* code, const std::string& message) {
  if (!condition) throw Error(code, message);
}

inline bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace rdp
