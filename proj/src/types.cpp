#include "icabench/types.hpp"

#include <cstdio>
#include <set>

namespace icabench {

void Dataset::validate() const {
  const auto n = channels();
  const auto N = samples();
  if (n < 2) {
    throw ValidationError("dataset '" + id + "': need at least 2 channels, got " +
                          std::to_string(n));
  }
  if (N < n) {
    throw ValidationError("dataset '" + id + "': need at least as many samples (" +
                          std::to_string(N) + ") as channels (" + std::to_string(n) + ")");
  }
  if (!data.allFinite()) {
    throw ValidationError("dataset '" + id + "': non-finite values present");
  }
  if (!(srate > 0.0)) {
    throw ValidationError("dataset '" + id + "': srate must be positive");
  }
  if (static_cast<Eigen::Index>(labels.size()) != n) {
    throw ValidationError("dataset '" + id + "': " + std::to_string(labels.size()) +
                          " labels for " + std::to_string(n) + " channels");
  }
  std::set<std::string> uniq(labels.begin(), labels.end());
  if (static_cast<Eigen::Index>(uniq.size()) != n) {
    throw ValidationError("dataset '" + id + "': channel labels are not unique");
  }
}

Matrix remove_row_means(const Matrix& x) {
  return x.colwise() - x.rowwise().mean();
}

std::vector<std::string> default_labels(int n) {
  std::vector<std::string> out;
  out.reserve(n);
  char buf[16];
  for (int i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof(buf), "ch%02d", i + 1);
    out.emplace_back(buf);
  }
  return out;
}

std::string digest(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace icabench
