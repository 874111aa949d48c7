#pragma once

// Catalog builders and assertion helpers shared across the test files.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "devtree/errors.hpp"
#include "devtree/model.hpp"

namespace testutil {

// Runs fn, which must throw devtree::Error, and reports the kind thrown.
template <typename Fn>
inline devtree::ErrorKind thrown_kind(Fn&& fn) {
  try {
    std::forward<Fn>(fn)();
  } catch (const devtree::Error& e) {
    return e.kind();
  }
  throw std::logic_error("expected the call to throw devtree::Error");
}

// Fresh per-test scratch directory under the system temp root.
inline std::string scratch_dir(const std::string& tag) {
  const auto dir = std::filesystem::temp_directory_path() / ("devtree_test_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

// Ascending-birth ladder with a banded competition kernel (self + nearest
// declaration neighbors) and adjacent-only migration. Declaration order
// coincides with the fitness order.
inline devtree::TraitCatalog ladder(const std::vector<double>& births,
                                    double alpha_band = 1.0,
                                    double mig_adjacent = 0.5,
                                    double mu = 1.0) {
  devtree::TraitCatalog cat;
  for (std::size_t i = 0; i < births.size(); ++i)
    cat.traits.push_back({"x" + std::to_string(i), births[i], 0.0, mu});
  const std::size_t n = cat.size();
  cat.alpha0.assign(n * n, 0.0);
  cat.migration.assign(n * n, 0.0);
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y) {
      const std::size_t gap = x > y ? x - y : y - x;
      if (gap <= 1) cat.alpha0[x * n + y] = alpha_band;
      if (gap == 1) cat.migration[x * n + y] = mig_adjacent;
    }
  return cat;
}

} // namespace testutil
