#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "kaf/error.hpp"
#include "kaf/network.hpp"
#include "kaf/tensor_ref.hpp"

namespace kaf {

inline constexpr std::string_view kCheckpointHeader = "KAF-CKPT 1";

struct CheckpointBlock {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
};

struct Checkpoint {
  int version = 1;
  std::vector<CheckpointBlock> blocks;
};

/// Lossless hexadecimal float text, e.g. -0x1.8p+1.
inline std::string format_hex(double v) {
  char buf[64];
  const bool neg = std::signbit(v);
  const auto res = std::to_chars(buf, buf + sizeof(buf), neg ? -v : v, std::chars_format::hex);
  std::string s(buf, res.ptr);
  if (s == "inf" || s == "nan") return (neg ? "-" : "") + s;
  return (neg ? "-0x" : "0x") + s;
}

inline bool parse_hex(std::string_view tok, double& out) {
  bool neg = false;
  if (!tok.empty() && (tok[0] == '-' || tok[0] == '+')) {
    neg = tok[0] == '-';
    tok.remove_prefix(1);
  }
  if (tok.size() < 3 || tok[0] != '0' || (tok[1] != 'x' && tok[1] != 'X')) return false;
  tok.remove_prefix(2);
  double v = 0.0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v, std::chars_format::hex);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) return false;
  out = neg ? -v : v;
  return true;
}

inline void write_checkpoint(std::ostream& os, const std::vector<TensorRef>& ts) {
  os << kCheckpointHeader << '\n';
  for (const auto& t : ts) {
    os << t.name << ' ' << t.rows << ' ' << t.cols << '\n';
    for (std::size_t r = 0; r < t.rows; ++r) {
      for (std::size_t c = 0; c < t.cols; ++c) {
        if (c) os << ' ';
        os << format_hex(t.values[r * t.cols + c]);
      }
      os << '\n';
    }
  }
}

inline Checkpoint read_checkpoint(std::istream& is, const std::string& source = "<stream>") {
  auto fail = [&](std::size_t line, const std::string& why) -> FormatError {
    return FormatError(source + ":" + std::to_string(line) + ": " + why);
  };
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(is, line)) throw fail(1, "empty checkpoint");
  ++lineno;
  if (line != kCheckpointHeader) throw fail(lineno, "expected header '" + std::string(kCheckpointHeader) + "'");

  Checkpoint ck;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream hs(line);
    CheckpointBlock b;
    std::string extra;
    if (!(hs >> b.name >> b.rows >> b.cols) || (hs >> extra)) throw fail(lineno, "malformed tensor header");
    b.values.reserve(b.rows * b.cols);
    for (std::size_t r = 0; r < b.rows; ++r) {
      if (!std::getline(is, line)) throw fail(lineno + 1, "truncated tensor '" + b.name + "'");
      ++lineno;
      std::istringstream vs(line);
      std::string tok;
      std::size_t count = 0;
      while (vs >> tok) {
        double v;
        if (!parse_hex(tok, v)) throw fail(lineno, "bad hex float '" + tok + "'");
        b.values.push_back(v);
        ++count;
      }
      if (count != b.cols)
        throw fail(lineno, "expected " + std::to_string(b.cols) + " values, found " + std::to_string(count));
    }
    ck.blocks.push_back(std::move(b));
  }
  return ck;
}

inline void save_checkpoint(const std::string& path, Network& net) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path);
  write_checkpoint(os, tensors(net));
  if (!os) throw IoError("write failed for " + path);
}

/// Copies every block into the matching tensor of `net`; names and shapes must agree.
inline void apply_checkpoint(const Checkpoint& ck, Network& net, const std::string& source = "<checkpoint>") {
  auto ts = tensors(net);
  if (ck.blocks.size() != ts.size())
    throw FormatError(source + ": " + std::to_string(ck.blocks.size()) + " tensors, model has " +
                      std::to_string(ts.size()));
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const auto& b = ck.blocks[i];
    if (b.name != ts[i].name || b.rows != ts[i].rows || b.cols != ts[i].cols)
      throw FormatError(source + ": tensor " + b.name + " " + std::to_string(b.rows) + "x" + std::to_string(b.cols) +
                        " does not match model tensor " + ts[i].name + " " + std::to_string(ts[i].rows) + "x" +
                        std::to_string(ts[i].cols));
    std::copy(b.values.begin(), b.values.end(), ts[i].values.begin());
  }
}

inline void load_checkpoint(const std::string& path, Network& net) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path);
  apply_checkpoint(read_checkpoint(is, path), net, path);
}

}  // namespace kaf
