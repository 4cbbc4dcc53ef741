#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace swarmnav {

/// One row per update: mean cumulative reward of agent-episodes finished in
/// the window (NaN when none finished), value loss, policy loss, entropy.
struct MetricRecord {
  std::int64_t update = 0;
  std::int64_t steps = 0;
  double mcr = 0.0;
  double vl = 0.0;
  double pl = 0.0;
  double entropy = 0.0;
  double wall_s = 0.0;
};

inline constexpr const char* kMetricsHeader = "update,steps,mcr,vl,pl,entropy,wall_s";

/// Appends rows to a CSV file, flushing after each row.
class MetricsSink {
 public:
  explicit MetricsSink(const std::string& path);
  void write(const MetricRecord& r);

 private:
  std::ofstream out_;
  std::string path_;
};

std::string format_metric_row(const MetricRecord& r);
std::vector<MetricRecord> read_metrics(const std::string& path);

}  // namespace swarmnav
