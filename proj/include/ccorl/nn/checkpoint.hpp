#pragma once

#include <string>
#include <string_view>

#include "ccorl/nn/tensor.hpp"

namespace ccorl::nn {

// Layout:
//   ccorl-v1\n
//   params <count>\n
//   then per parameter a text line "<name> <rank> <dims...> <count>\n"
//   followed by <count> little-endian IEEE-754 doubles and a '\n'.
std::string checkpoint_bytes(const ParamStore& params);
ParamStore parse_checkpoint(std::string_view bytes);

void save_checkpoint(const std::string& path, const ParamStore& params);
ParamStore load_checkpoint(const std::string& path);

// Copies values of every parameter in `dst` from the same-named entry of
// `src`; throws ValidationError on a missing name or shape mismatch.
void assign_params(ParamStore& dst, const ParamStore& src);

}  // namespace ccorl::nn
