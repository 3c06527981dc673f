#pragma once

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "oca/error.hpp"

namespace testing {

// Test-side data generator; deliberately not the library's NormalStream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double normal() { return dist_(engine_); }
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  std::vector<double> normals(std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = normal();
    return v;
  }
  std::vector<double> random_walk(std::size_t n) {
    std::vector<double> v(n);
    double level = 0.0;
    for (auto& x : v) x = level += normal();
    return v;
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> dist_;
};

template <typename F>
oca::ErrorCode error_code_of(F&& f) {
  try {
    f();
  } catch (const oca::Error& e) {
    return e.code();
  }
  return static_cast<oca::ErrorCode>(-1);
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace testing

#define CHECK_ERROR_CODE(expr, expected) CHECK(::testing::error_code_of([&] { (void)(expr); }) == (expected))
