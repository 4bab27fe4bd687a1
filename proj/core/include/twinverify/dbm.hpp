#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace twinverify {

/// Upper bound `(value, strict)` on a clock difference, packed UDBM-style as
/// 2*value + (strict ? 0 : 1) so that the integer order is the bound order.
class Bound {
public:
  using raw_type = std::int32_t;
  static constexpr raw_type kInfRaw = std::numeric_limits<raw_type>::max();

  constexpr Bound() = default;
  static constexpr Bound from_raw(raw_type r) { return Bound(r); }
  static constexpr Bound le(std::int64_t v) { return Bound(static_cast<raw_type>(v * 2 + 1)); }
  static constexpr Bound lt(std::int64_t v) { return Bound(static_cast<raw_type>(v * 2)); }
  static constexpr Bound infinity() { return Bound(kInfRaw); }
  static constexpr Bound zero() { return le(0); }

  constexpr bool is_inf() const { return raw_ == kInfRaw; }
  constexpr std::int64_t value() const { return raw_ >> 1; }
  constexpr bool strict() const { return (raw_ & 1) == 0; }
  constexpr raw_type raw() const { return raw_; }

  friend constexpr auto operator<=>(Bound, Bound) = default;

  friend constexpr Bound operator+(Bound a, Bound b) {
    if (a.is_inf() || b.is_inf()) return infinity();
    return Bound(static_cast<raw_type>(((a.raw_ & ~1) + (b.raw_ & ~1)) | (a.raw_ & b.raw_ & 1)));
  }

  std::string str() const;

private:
  constexpr explicit Bound(raw_type r) : raw_(r) {}
  raw_type raw_ = kInfRaw;
};

/// Difference-bound matrix over clocks 1..n plus the reference clock 0.
/// Entry (i, j) bounds x_i - x_j. Operations other than `set` and
/// `close` keep the matrix canonical.
class Dbm {
public:
  Dbm() = default;
  /// Unconstrained non-negative clocks: x_i >= 0, no upper bounds.
  explicit Dbm(int dim);
  /// All clocks equal to zero.
  static Dbm zero(int dim);

  int dim() const noexcept { return dim_; }
  Bound at(int i, int j) const { return Bound::from_raw(m_[index(i, j)]); }
  /// Raw write without re-closing; call `close` afterwards.
  void set(int i, int j, Bound b) { m_[index(i, j)] = b.raw(); }

  /// Floyd-Warshall canonicalization. Returns false (and marks the zone
  /// empty) when a negative cycle exists.
  bool close();
  bool is_empty() const noexcept { return empty_; }

  /// Time elapse: drop upper bounds against the reference clock.
  void up();
  /// Inverse time elapse: every valuation that can delay into the zone.
  void down();
  /// x := value.
  void reset(int clock, std::int64_t value = 0);
  /// Intersect with x_i - x_j ~ b and re-close incrementally.
  bool constrain(int i, int j, Bound b);
  /// Classic maximal-constant k-normalization; `max_constant[i]` is the
  /// ceiling for clock i (index 0 ignored). Re-closes.
  void extrapolate(std::span<const std::int64_t> max_constant);

  /// a.includes(b) iff the zone of b is a subset of the zone of a.
  bool includes(const Dbm& other) const;
  bool intersects(const Dbm& other) const;

  /// Membership of a real point (`point[0]` ignored, treated as 0).
  bool contains(std::span<const double> point) const;

  std::size_t hash() const noexcept;
  std::size_t byte_size() const noexcept { return m_.size() * sizeof(Bound::raw_type); }

  friend bool operator==(const Dbm& a, const Dbm& b) {
    return a.dim_ == b.dim_ && a.empty_ == b.empty_ && (a.empty_ || a.m_ == b.m_);
  }

  std::string str() const;

private:
  std::size_t index(int i, int j) const noexcept {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(j);
  }
  void mark_empty() { empty_ = true; }

  int dim_ = 0;
  bool empty_ = false;
  std::vector<Bound::raw_type> m_;
};

/// a minus b as pairwise disjoint zones (empty when b covers a).
std::vector<Dbm> subtract(const Dbm& a, const Dbm& b);

}  // namespace twinverify
