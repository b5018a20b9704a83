#pragma once

#include <filesystem>
#include <functional>
#include <string>

#include "ccorl/instances.hpp"
#include "ccorl/rng.hpp"

namespace ccorl::test {

// Job 0: M0 for 3, then M1 for 2. Job 1: M1 for 2, then M0 for 4.
inline const char* kTwoByTwo = "2 2\n0 3 1 2\n1 2 0 4\n";

inline JspInstance two_by_two() { return parse_orlib(kTwoByTwo); }

// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("ccorl_" + tag + "_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

// Relative error with an absolute floor for tiny gradients.
inline double rel_error(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-6});
  return std::abs(a - b) / scale;
}

}  // namespace ccorl::test
