#pragma once

#include <filesystem>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "hosdf/grid.hpp"

namespace hosdf::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    std::string name = "hosdf_";
    if (info) name += std::string(info->test_suite_name()) + "_" + info->name();
    path_ = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }
  const std::filesystem::path& path() const { return path_; }

private:
  std::filesystem::path path_;
};

inline ScalarField random_field(const GridGeometry& g, unsigned seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  ScalarField f(g);
  for (double& v : f) v = u(rng);
  return f;
}

template <typename F>
ScalarField sample(const GridGeometry& g, F&& f) {
  ScalarField out(g);
  for_each_voxel(g, [&](auto i, auto j, auto k, std::size_t n) { out[n] = f(g.world(i, j, k)); });
  return out;
}

} // namespace hosdf::testing
