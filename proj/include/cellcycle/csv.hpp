#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "errors.hpp"

namespace cellcycle {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// CSV with a "# config_hash=..." first line; floats carry 17 significant digits.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::string& config_hash, const std::vector<std::string>& columns)
      : out_(path, std::ios::binary), width_(columns.size()) {
    if (!out_) throw Error("cannot write " + path);
    out_ << "# config_hash=" << config_hash << '\n';
    for (std::size_t k = 0; k < columns.size(); ++k) out_ << (k ? "," : "") << columns[k];
    out_ << '\n';
  }

  void row(const std::vector<double>& values) {
    if (values.size() != width_) throw Error("csv row width mismatch");
    for (std::size_t k = 0; k < values.size(); ++k) out_ << (k ? "," : "") << fmt17(values[k]);
    out_ << '\n';
  }

 private:
  std::ofstream out_;
  std::size_t width_;
};

}  // namespace cellcycle
