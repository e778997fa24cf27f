#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace regge {

// Spatial dimension is a runtime parameter in {2,3}; all small vectors and
// matrices use fixed-capacity storage so no heap traffic occurs in kernels.
inline constexpr int kMaxDim = 3;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

[[noreturn]] inline void fail(const std::string& what) { throw Error(what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(what);
}

// Counter-based generator: every (seed, counter) pair maps to one 64-bit
// word, independent of call order.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t rng_word(std::uint64_t seed, std::uint64_t counter) {
  return splitmix64(splitmix64(seed) ^ splitmix64(counter * 0x9E3779B97F4A7C15ull + 0x7F4A7C15ull));
}

// Uniform in [0,1).
inline double rng_uniform01(std::uint64_t seed, std::uint64_t counter) {
  return static_cast<double>(rng_word(seed, counter) >> 11) * 0x1.0p-53;
}

// Uniform in [-1,1].
inline double rng_uniform_sym(std::uint64_t seed, std::uint64_t counter) {
  return 2.0 * rng_uniform01(seed, counter) - 1.0;
}

// Fixed-shape pairwise reduction; the result does not depend on how the
// entries were produced (thread count, chunking).
inline double pairwise_sum(std::span<const double> v) {
  if (v.empty()) return 0.0;
  if (v.size() == 1) return v[0];
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

inline double pairwise_sum(const std::vector<double>& v) {
  return pairwise_sum(std::span<const double>(v.data(), v.size()));
}

int thread_count();  // REGGE_THREADS, defaults to hardware concurrency

// Runs fn(i) for i in [0,n). Each index writes only its own slots, so the
// schedule cannot affect results.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace regge
