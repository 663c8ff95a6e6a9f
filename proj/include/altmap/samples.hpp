#pragma once

#include <string>
#include <vector>

namespace altmap {

struct Sample {
  int col = 0;
  int row = 0;
  int class_label = 0;
  std::vector<float> features;
};

// Rows of (pixel position, class, band vector); all feature vectors share one length.
struct SampleTable {
  std::vector<Sample> rows;

  int feature_count() const { return rows.empty() ? 0 : static_cast<int>(rows[0].features.size()); }
  void validate() const;
  std::vector<int> class_counts() const;  // indexed by class label
};

// CSV with header col,row,class,b1,...,bN; floats printed with float32
// round-trip precision.
SampleTable read_samples(const std::string& path);
void write_samples(const SampleTable& table, const std::string& path);

}  // namespace altmap
