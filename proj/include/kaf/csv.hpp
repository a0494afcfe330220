#pragma once

#include <charconv>
#include <fstream>
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "kaf/error.hpp"
#include "kaf/spectrum.hpp"
#include "kaf/trainer.hpp"

namespace kaf {

/// Shortest round-trip decimal text, independent of the global locale.
inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

/// Writes CSV rows with '\n' line endings.
class CsvWriter {
public:
  explicit CsvWriter(const std::string& path) : path_(path), os_(path, std::ios::binary) {
    if (!os_) throw IoError("cannot write " + path);
  }

  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) os_ << ',';
      os_ << csv_field(fields[i]);
    }
    os_ << '\n';
    if (!os_) throw IoError("write failed for " + path_);
  }

private:
  std::string path_;
  std::ofstream os_;
};

inline constexpr std::string_view kMetricsHeader[] = {"epoch",      "train_loss", "eval_metric",
                                                      "mean_abs_a", "mean_abs_b", "seconds"};

inline void write_metrics_csv(const std::string& path, const RunReport& report) {
  CsvWriter w(path);
  w.row({std::begin(kMetricsHeader), std::end(kMetricsHeader)});
  for (const auto& r : report.records)
    w.row({std::to_string(r.epoch), format_number(r.train_loss), format_number(r.eval_metric),
           format_number(r.mean_abs_a), format_number(r.mean_abs_b), format_number(r.seconds)});
}

inline void write_spectrum_csv(const std::string& path, const Spectrum& s) {
  CsvWriter w(path);
  w.row({"frequency", "magnitude"});
  for (std::size_t k = 0; k < s.frequencies.size(); ++k)
    w.row({format_number(s.frequencies[k]), format_number(s.magnitudes[k])});
}

}  // namespace kaf
