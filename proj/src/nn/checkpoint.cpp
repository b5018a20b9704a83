#include "ccorl/nn/checkpoint.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <sstream>

#include "ccorl/common.hpp"

namespace ccorl::nn {

namespace {

constexpr std::string_view kMagic = "ccorl-v1";

void put_le(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
}

double get_le(const char* p) {
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[b])) << (8 * b);
  return std::bit_cast<double>(bits);
}

class Reader {
 public:
  explicit Reader(std::string_view s) : s_(s) {}

  std::string_view line() {
    const auto end = s_.find('\n', pos_);
    if (end == std::string_view::npos) throw ValidationError("checkpoint: truncated header");
    auto l = s_.substr(pos_, end - pos_);
    pos_ = end + 1;
    return l;
  }

  const char* bytes(std::size_t n) {
    if (pos_ + n > s_.size()) throw ValidationError("checkpoint: truncated data");
    const char* p = s_.data() + pos_;
    pos_ += n;
    return p;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

std::vector<std::string_view> split(std::string_view l) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < l.size()) {
    while (i < l.size() && l[i] == ' ') ++i;
    std::size_t j = i;
    while (j < l.size() && l[j] != ' ') ++j;
    if (j > i) out.push_back(l.substr(i, j - i));
    i = j;
  }
  return out;
}

long long to_int(std::string_view tok) {
  long long v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size() || v < 0)
    throw ValidationError("checkpoint: bad integer '" + std::string(tok) + "'");
  return v;
}

}  // namespace

std::string checkpoint_bytes(const ParamStore& params) {
  std::string out;
  out += kMagic;
  out += "\nparams " + std::to_string(params.size()) + "\n";
  for (ParamId i = 0; i < params.size(); ++i) {
    const Tensor& v = params.value(i);
    out += params.name(i) + " " + std::to_string(v.rank());
    for (int d : v.shape()) out += " " + std::to_string(d);
    out += " " + std::to_string(v.size()) + "\n";
    for (double x : v.values()) put_le(out, x);
    out += '\n';
  }
  return out;
}

ParamStore parse_checkpoint(std::string_view bytes) {
  Reader r(bytes);
  if (r.line() != kMagic) throw ValidationError("checkpoint: missing 'ccorl-v1' header");
  const auto head = split(r.line());
  if (head.size() != 2 || head[0] != "params") throw ValidationError("checkpoint: expected 'params <count>'");
  const auto count = to_int(head[1]);
  ParamStore store;
  for (long long k = 0; k < count; ++k) {
    const auto f = split(r.line());
    if (f.size() < 3) throw ValidationError("checkpoint: malformed parameter record");
    const auto rank = to_int(f[1]);
    if (f.size() != static_cast<std::size_t>(rank) + 3) throw ValidationError("checkpoint: rank/shape mismatch");
    std::vector<int> shape;
    std::size_t n = 1;
    for (long long d = 0; d < rank; ++d) {
      shape.push_back(static_cast<int>(to_int(f[2 + d])));
      n *= static_cast<std::size_t>(shape.back());
    }
    if (static_cast<std::size_t>(to_int(f.back())) != n) throw ValidationError("checkpoint: count does not match shape");
    const char* raw = r.bytes(8 * n + 1);
    if (raw[8 * n] != '\n') throw ValidationError("checkpoint: missing record terminator");
    std::vector<double> data(n);
    for (std::size_t i = 0; i < n; ++i) data[i] = get_le(raw + 8 * i);
    store.add(std::string(f[0]), Tensor(std::move(shape), std::move(data)));
  }
  return store;
}

void save_checkpoint(const std::string& path, const ParamStore& params) { write_file(path, checkpoint_bytes(params)); }

ParamStore load_checkpoint(const std::string& path) {
  try {
    return parse_checkpoint(read_file(path));
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

void assign_params(ParamStore& dst, const ParamStore& src) {
  for (ParamId i = 0; i < dst.size(); ++i) {
    const ParamId j = src.find(dst.name(i));
    if (j < 0) throw ValidationError("checkpoint lacks parameter '" + dst.name(i) + "'");
    if (!src.value(j).same_shape(dst.value(i)))
      throw ValidationError("parameter '" + dst.name(i) + "' has shape " + shape_string(src.value(j).shape()) +
                            ", expected " + shape_string(dst.value(i).shape()));
    dst.value(i) = src.value(j);
  }
}

}  // namespace ccorl::nn
