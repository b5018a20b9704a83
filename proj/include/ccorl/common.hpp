#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ccorl {

// Bad user input: malformed files, invalid configuration, out-of-range
// parameters. The CLI maps it to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Filesystem failures. The CLI maps it to exit code 3.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller broke an operation's precondition (e.g. acting on a masked job).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// One flag per action; 1 = allowed / selected.
using Mask = std::vector<std::uint8_t>;

// Selects between the OpenMP kernels and the serial reference loops.
// Both paths produce bit-identical results.
enum class Exec { serial, parallel };

// Applies the CCORL_NUM_THREADS environment override, if set.
void configure_threads_from_env();

int max_threads();

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace ccorl
