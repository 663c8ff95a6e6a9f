#include "altmap/samples.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "altmap/error.hpp"

namespace altmap {

void SampleTable::validate() const {
  if (rows.empty()) return;
  const std::size_t d = rows[0].features.size();
  for (const auto& r : rows) {
    require(r.features.size() == d, "ragged sample table: feature vector lengths differ");
    require(r.class_label >= 0, "negative class label");
  }
}

std::vector<int> SampleTable::class_counts() const {
  int maxc = 0;
  for (const auto& r : rows) maxc = std::max(maxc, r.class_label);
  std::vector<int> counts(maxc + 1, 0);
  for (const auto& r : rows) counts[r.class_label]++;
  return counts;
}

SampleTable read_samples(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open sample file: " + path);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "empty sample file: " + path);

  SampleTable table;
  std::size_t ncols = 0;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    Sample s;
    std::stringstream ss(line);
    std::string cell;
    std::size_t i = 0;
    while (std::getline(ss, cell, ',')) {
      const char* b = cell.data();
      const char* e = b + cell.size();
      if (i == 0 || i == 1 || i == 2) {
        int v = 0;
        auto [p, ec] = std::from_chars(b, e, v);
        require(ec == std::errc() && p == e,
                "non-numeric cell at line " + std::to_string(lineno));
        if (i == 0) s.col = v;
        else if (i == 1) s.row = v;
        else s.class_label = v;
      } else {
        float v = 0.0f;
        auto [p, ec] = std::from_chars(b, e, v);
        require(ec == std::errc() && p == e,
                "non-numeric cell at line " + std::to_string(lineno));
        s.features.push_back(v);
      }
      ++i;
    }
    require(i >= 4, "sample row needs col,row,class and at least one feature");
    if (ncols == 0) ncols = i;
    require(i == ncols, "ragged row at line " + std::to_string(lineno));
    table.rows.push_back(std::move(s));
  }
  return table;
}

void write_samples(const SampleTable& table, const std::string& path) {
  table.validate();
  std::ofstream out(path);
  require(out.good(), "cannot write sample file: " + path);
  out << "col,row,class";
  for (int b = 1; b <= table.feature_count(); ++b) out << ",b" << b;
  out << "\n";
  char buf[48];
  for (const auto& r : table.rows) {
    out << r.col << "," << r.row << "," << r.class_label;
    for (float f : r.features) {
      std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(f));
      out << "," << buf;
    }
    out << "\n";
  }
  require(out.good(), "failed writing sample file");
}

}  // namespace altmap
