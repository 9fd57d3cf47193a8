#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <random>

namespace eit {

/// splitmix64 step; used to derive independent per-index substream seeds so
/// that draw i is reproducible regardless of thread count or draw order.
inline std::uint64_t split_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Standard normal generator with an explicit Box-Muller transform.
/// std::normal_distribution is implementation-defined, which would break the
/// cross-platform byte-identical output contract.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : gen_(seed) {}

  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  /// Uniform in [0,1).
  double uniform() {
    return (gen_() >> 11) * 0x1.0p-53;
  }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

inline Eigen::VectorXd standard_normal_vector(Eigen::Index n,
                                              std::uint64_t seed) {
  NormalSampler s(seed);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = s();
  return v;
}

inline Eigen::MatrixXd standard_normal_matrix(Eigen::Index rows,
                                              Eigen::Index cols,
                                              std::uint64_t seed) {
  NormalSampler s(seed);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = s();
  return m;
}

}  // namespace eit
