#include "twinverify/timing.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <map>
#include <sstream>

namespace twinverify {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  std::string tmp(s);
  char* end = nullptr;
  out = std::strtod(tmp.c_str(), &end);
  return end == tmp.c_str() + tmp.size() && std::isfinite(out);
}

bool parse_u64(std::string_view s, std::uint64_t& out) {
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

template <typename Fn>
void for_each_line(std::string_view text, Fn fn) {
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    std::string_view line = text.substr(start, nl == text.npos ? text.npos : nl - start);
    ++line_no;
    line = trim(line);
    if (!line.empty() && line.front() != '#') fn(line, line_no);
    if (nl == text.npos) break;
    start = nl + 1;
  }
}

std::string fmt_number(double v) {
  std::ostringstream os;
  os.precision(15);
  os << v;
  return os.str();
}

}  // namespace

EmpiricalDistribution::EmpiricalDistribution(std::vector<Bucket> buckets) : buckets_(std::move(buckets)) {
  std::sort(buckets_.begin(), buckets_.end(),
            [](const Bucket& a, const Bucket& b) { return a.lo < b.lo; });
  for (std::size_t i = 0; i < buckets_.size(); ++i) {
    const Bucket& b = buckets_[i];
    if (!(b.lo >= 0) || !std::isfinite(b.hi))
      throw TimingError("bucket [" + fmt_number(b.lo) + "," + fmt_number(b.hi) + ") has a negative or non-finite bound");
    if (!(b.lo < b.hi))
      throw TimingError("bucket [" + fmt_number(b.lo) + "," + fmt_number(b.hi) + ") is empty (lo >= hi)");
    if (i > 0 && b.lo < buckets_[i - 1].hi)
      throw TimingError("buckets [" + fmt_number(buckets_[i - 1].lo) + "," + fmt_number(buckets_[i - 1].hi) +
                        ") and [" + fmt_number(b.lo) + "," + fmt_number(b.hi) + ") overlap");
    total_ += b.count;
    cumulative_.push_back(total_);
  }
  if (total_ == 0) throw TimingError("histogram total count is zero");
}

double EmpiricalDistribution::mean() const {
  double acc = 0;
  for (const auto& b : buckets_) acc += 0.5 * (b.lo + b.hi) * static_cast<double>(b.count);
  return acc / static_cast<double>(total_);
}

double EmpiricalDistribution::variance() const {
  // E[X^2] of a uniform on [a,b) is (a^2 + ab + b^2) / 3.
  double second = 0;
  for (const auto& b : buckets_)
    second += (b.lo * b.lo + b.lo * b.hi + b.hi * b.hi) / 3.0 * static_cast<double>(b.count);
  second /= static_cast<double>(total_);
  const double m = mean();
  return second - m * m;
}

double EmpiricalDistribution::sample(Rng& rng) const {
  const std::uint64_t ticket = rng.index(total_);
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), ticket);
  const Bucket& b = buckets_[static_cast<std::size_t>(it - cumulative_.begin())];
  return rng.uniform(b.lo, b.hi);
}

std::int64_t weighted_average(const EmpiricalDistribution& d) {
  // floor(x + 0.5) is round-half-up for the non-negative means we get here.
  return static_cast<std::int64_t>(std::floor(d.mean() + 0.5));
}

EmpiricalDistribution ingest_histogram(std::string_view csv) {
  std::vector<Bucket> buckets;
  bool first = true;
  for_each_line(csv, [&](std::string_view line, int line_no) {
    auto f = split_fields(line);
    if (first && f.size() == 3 && f[0] == "lo" && f[1] == "hi" && f[2] == "count") {
      first = false;
      return;
    }
    first = false;
    Bucket b;
    if (f.size() != 3 || !parse_double(f[0], b.lo) || !parse_double(f[1], b.hi) ||
        !parse_u64(f[2], b.count))
      throw TimingError("line " + std::to_string(line_no) + ": malformed histogram row '" +
                        std::string(line) + "' (expected lo,hi,count)");
    buckets.push_back(b);
  });
  return EmpiricalDistribution(std::move(buckets));
}

std::string render_histogram(const EmpiricalDistribution& d) {
  std::string out = "lo,hi,count\n";
  for (const auto& b : d.buckets())
    out += fmt_number(b.lo) + "," + fmt_number(b.hi) + "," + std::to_string(b.count) + "\n";
  return out;
}

std::vector<LogRecord> parse_log(std::string_view csv) {
  std::vector<LogRecord> out;
  bool first = true;
  for_each_line(csv, [&](std::string_view line, int line_no) {
    auto f = split_fields(line);
    if (first && f.size() == 3 && f[0] == "timestamp_ms") {
      first = false;
      return;
    }
    first = false;
    LogRecord r;
    if (f.size() != 3 || !parse_double(f[0], r.timestamp_ms) || f[1].empty() || f[2].empty())
      throw TimingError("line " + std::to_string(line_no) + ": malformed log row '" +
                        std::string(line) + "' (expected timestamp_ms,component,event)");
    r.component = std::string(f[1]);
    r.event = std::string(f[2]);
    out.push_back(std::move(r));
  });
  return out;
}

EventKey EventKey::parse(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == text.npos) return {"", std::string(text)};
  return {std::string(text.substr(0, colon)), std::string(text.substr(colon + 1))};
}

bool EventKey::matches(const LogRecord& r) const {
  return r.event == event && (component.empty() || r.component == component);
}

std::vector<double> pair_latencies(const std::vector<LogRecord>& log, const EventKey& source,
                                   const EventKey& target) {
  std::vector<const LogRecord*> ordered;
  ordered.reserve(log.size());
  for (const auto& r : log) ordered.push_back(&r);
  std::stable_sort(ordered.begin(), ordered.end(), [](const LogRecord* a, const LogRecord* b) {
    return a->timestamp_ms < b->timestamp_ms;
  });
  std::deque<double> open;
  std::vector<double> latencies;
  for (const LogRecord* r : ordered) {
    if (source.matches(*r)) {
      open.push_back(r->timestamp_ms);
    } else if (target.matches(*r) && !open.empty()) {
      latencies.push_back(r->timestamp_ms - open.front());
      open.pop_front();
    }
  }
  return latencies;
}

EmpiricalDistribution build_histogram(const std::vector<LogRecord>& log, const EventKey& source,
                                      const EventKey& target, double bucket_width) {
  if (!(bucket_width > 0)) throw TimingError("bucket width must be positive");
  const auto latencies = pair_latencies(log, source, target);
  if (latencies.empty())
    throw TimingError("no matching " + source.event + " -> " + target.event + " pairs in log");
  std::map<std::int64_t, std::uint64_t> bins;
  for (double l : latencies) ++bins[static_cast<std::int64_t>(std::floor(l / bucket_width))];
  std::vector<Bucket> buckets;
  for (auto [k, n] : bins)
    buckets.push_back({static_cast<double>(k) * bucket_width, static_cast<double>(k + 1) * bucket_width, n});
  return EmpiricalDistribution(std::move(buckets));
}

}  // namespace twinverify
