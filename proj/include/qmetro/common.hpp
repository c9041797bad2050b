#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qmetro {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using Matrix3 = Eigen::Matrix3d;
using Matrix3c = Eigen::Matrix3cd;
using Vector3 = Eigen::Vector3d;
using Vector4 = Eigen::Vector4d;

inline constexpr Complex kI{0.0, 1.0};

/// Fisher/QFI matrix is not invertible: the model cannot resolve all three
/// field components.
class SingularModelError : public std::runtime_error {
 public:
  explicit SingularModelError(const std::string& what)
      : std::runtime_error(what) {}
};

/// Restarted solves disagree beyond tolerance.
class NonConvergenceError : public std::runtime_error {
 public:
  explicit NonConvergenceError(const std::string& what)
      : std::runtime_error(what) {}
};

/// A guarded denominator of the attainability construction vanished.
class DegenerateStateError : public std::runtime_error {
 public:
  explicit DegenerateStateError(const std::string& what)
      : std::runtime_error(what) {}
};

// splitmix64; used to derive independent substreams from (seed, ids...).
inline std::uint64_t split_mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a) { return split_mix(a); }

template <typename... Rest>
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, Rest... rest) {
  return mix_seed(split_mix(a) ^ split_mix(split_mix(b) + 0x165667b19e3779f9ULL),
                  rest...);
}

}  // namespace qmetro
