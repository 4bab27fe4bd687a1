#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "twinverify/rng.hpp"

namespace twinverify {

class TimingError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Bucket {
  double lo = 0;  // inclusive, ms
  double hi = 0;  // exclusive, ms
  std::uint64_t count = 0;

  friend bool operator==(const Bucket&, const Bucket&) = default;
};

/// Bucketed timing histogram. Buckets are sorted, disjoint, non-negative and
/// the total count is positive; the constructor enforces all of it.
class EmpiricalDistribution {
public:
  EmpiricalDistribution() = default;
  explicit EmpiricalDistribution(std::vector<Bucket> buckets);

  const std::vector<Bucket>& buckets() const noexcept { return buckets_; }
  std::uint64_t total() const noexcept { return total_; }
  bool empty() const noexcept { return buckets_.empty(); }

  double support_min() const { return buckets_.front().lo; }
  double support_max() const { return buckets_.back().hi; }

  /// Exact mean of the piecewise-uniform mixture.
  double mean() const;
  /// Exact variance of the piecewise-uniform mixture.
  double variance() const;

  /// Bucket chosen with probability count/total, value uniform inside it.
  double sample(Rng& rng) const;

  friend bool operator==(const EmpiricalDistribution&, const EmpiricalDistribution&) = default;

private:
  std::vector<Bucket> buckets_;
  std::uint64_t total_ = 0;
  std::vector<std::uint64_t> cumulative_;
};

/// Round-half-up of sum(midpoint * count) / total.
std::int64_t weighted_average(const EmpiricalDistribution& d);

/// Parses `lo,hi,count` rows. An optional `lo,hi,count` header line and
/// `#` comment lines are accepted.
EmpiricalDistribution ingest_histogram(std::string_view csv);

std::string render_histogram(const EmpiricalDistribution& d);

struct LogRecord {
  double timestamp_ms = 0;
  std::string component;
  std::string event;
};

/// Parses `timestamp_ms,component,event` rows (optional header).
std::vector<LogRecord> parse_log(std::string_view csv);

/// `component:event`, or a bare `event` matching any component.
struct EventKey {
  std::string component;
  std::string event;

  static EventKey parse(std::string_view text);
  bool matches(const LogRecord& r) const;
};

/// Successive source->target latencies with FIFO pairing: every target
/// occurrence closes the oldest open source occurrence.
std::vector<double> pair_latencies(const std::vector<LogRecord>& log, const EventKey& source,
                                   const EventKey& target);

/// Bins the latencies of `pair_latencies` into buckets [k*w, (k+1)*w).
EmpiricalDistribution build_histogram(const std::vector<LogRecord>& log, const EventKey& source,
                                      const EventKey& target, double bucket_width);

}  // namespace twinverify
