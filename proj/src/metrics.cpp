#include "swarmnav/metrics.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "swarmnav/error.hpp"

namespace swarmnav {

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw Error("bad number in metrics file: '" + s + "'");
  return v;
}

}  // namespace

std::string format_metric_row(const MetricRecord& r) {
  return std::to_string(r.update) + "," + std::to_string(r.steps) + "," + fmt(r.mcr) + "," + fmt(r.vl) + "," +
         fmt(r.pl) + "," + fmt(r.entropy) + "," + fmt(r.wall_s);
}

MetricsSink::MetricsSink(const std::string& path) : out_(path, std::ios::trunc), path_(path) {
  if (!out_) throw Error("cannot open metrics file " + path);
  out_ << kMetricsHeader << '\n';
  out_.flush();
}

void MetricsSink::write(const MetricRecord& r) {
  out_ << format_metric_row(r) << '\n';
  out_.flush();
  if (!out_) throw Error("failed writing metrics file " + path_);
}

std::vector<MetricRecord> read_metrics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open metrics file " + path);
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) throw Error("metrics file lacks the expected header");
  std::vector<MetricRecord> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 7) throw Error("metrics row has " + std::to_string(cells.size()) + " columns");
    MetricRecord r;
    r.update = std::stoll(cells[0]);
    r.steps = std::stoll(cells[1]);
    r.mcr = parse_double(cells[2]);
    r.vl = parse_double(cells[3]);
    r.pl = parse_double(cells[4]);
    r.entropy = parse_double(cells[5]);
    r.wall_s = parse_double(cells[6]);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace swarmnav
