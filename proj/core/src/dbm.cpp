#include "twinverify/dbm.hpp"

#include <sstream>

namespace twinverify {

std::string Bound::str() const {
  if (is_inf()) return "<inf";
  return std::string(strict() ? "<" : "<=") + std::to_string(value());
}

Dbm::Dbm(int dim) : dim_(dim), m_(static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim), Bound::kInfRaw) {
  for (int i = 0; i < dim; ++i) {
    m_[index(i, i)] = Bound::zero().raw();
    m_[index(0, i)] = Bound::zero().raw();
  }
}

Dbm Dbm::zero(int dim) {
  Dbm d(dim);
  for (auto& r : d.m_) r = Bound::zero().raw();
  return d;
}

bool Dbm::close() {
  if (empty_) return false;
  const int n = dim_;
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      const Bound ik = at(i, k);
      if (ik.is_inf()) continue;
      for (int j = 0; j < n; ++j) {
        const Bound via = ik + at(k, j);
        if (via < at(i, j)) m_[index(i, j)] = via.raw();
      }
    }
    for (int i = 0; i < n; ++i) {
      if (at(i, i) < Bound::zero()) {
        mark_empty();
        return false;
      }
    }
  }
  return true;
}

void Dbm::up() {
  if (empty_) return;
  for (int i = 1; i < dim_; ++i) m_[index(i, 0)] = Bound::kInfRaw;
}

void Dbm::down() {
  if (empty_) return;
  for (int j = 1; j < dim_; ++j) m_[index(0, j)] = Bound::zero().raw();
  close();
}

void Dbm::reset(int clock, std::int64_t value) {
  if (empty_) return;
  for (int j = 0; j < dim_; ++j) {
    if (j == clock) continue;
    m_[index(clock, j)] = (Bound::le(value) + at(0, j)).raw();
    m_[index(j, clock)] = (at(j, 0) + Bound::le(-value)).raw();
  }
}

bool Dbm::constrain(int i, int j, Bound b) {
  if (empty_) return false;
  if (!(b < at(i, j))) return true;
  if ((at(j, i) + b) < Bound::zero()) {
    mark_empty();
    return false;
  }
  m_[index(i, j)] = b.raw();
  // Incremental closure through the tightened edge (i, j).
  const int n = dim_;
  for (int k = 0; k < n; ++k) {
    const Bound ki = at(k, i);
    if (ki.is_inf()) continue;
    const Bound kij = ki + b;
    for (int l = 0; l < n; ++l) {
      const Bound via = kij + at(j, l);
      if (via < at(k, l)) m_[index(k, l)] = via.raw();
    }
  }
  return true;
}

void Dbm::extrapolate(std::span<const std::int64_t> max_constant) {
  if (empty_) return;
  auto ceiling = [&](int c) -> std::int64_t {
    return c == 0 ? 0 : max_constant[static_cast<std::size_t>(c)];
  };
  bool changed = false;
  for (int i = 0; i < dim_; ++i) {
    for (int j = 0; j < dim_; ++j) {
      if (i == j) continue;
      const Bound b = at(i, j);
      if (b.is_inf()) continue;
      if (b > Bound::le(ceiling(i))) {
        m_[index(i, j)] = Bound::kInfRaw;
        changed = true;
      } else if (b < Bound::lt(-ceiling(j))) {
        m_[index(i, j)] = Bound::lt(-ceiling(j)).raw();
        changed = true;
      }
    }
  }
  if (changed) close();
}

bool Dbm::includes(const Dbm& other) const {
  if (other.empty_) return true;
  if (empty_) return false;
  for (std::size_t k = 0; k < m_.size(); ++k)
    if (other.m_[k] > m_[k]) return false;
  return true;
}

bool Dbm::intersects(const Dbm& other) const {
  if (empty_ || other.empty_) return false;
  Dbm tmp = *this;
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j)
      if (i != j && !tmp.constrain(i, j, other.at(i, j))) return false;
  return true;
}

bool Dbm::contains(std::span<const double> point) const {
  if (empty_) return false;
  auto value = [&](int i) { return i == 0 ? 0.0 : point[static_cast<std::size_t>(i)]; };
  for (int i = 0; i < dim_; ++i) {
    for (int j = 0; j < dim_; ++j) {
      const Bound b = at(i, j);
      if (i == j || b.is_inf()) continue;
      const double diff = value(i) - value(j);
      const double v = static_cast<double>(b.value());
      if (b.strict() ? !(diff < v) : !(diff <= v)) return false;
    }
  }
  return true;
}

std::size_t Dbm::hash() const noexcept {
  std::size_t h = static_cast<std::size_t>(dim_) * 0x9E3779B97F4A7C15ULL;
  for (auto r : m_) h = (h ^ static_cast<std::size_t>(static_cast<std::uint32_t>(r))) * 0x100000001B3ULL;
  return h;
}

std::string Dbm::str() const {
  if (empty_) return "(empty)";
  std::ostringstream os;
  for (int i = 0; i < dim_; ++i) {
    for (int j = 0; j < dim_; ++j) os << (j ? "\t" : "") << at(i, j).str();
    os << "\n";
  }
  return os.str();
}

std::vector<Dbm> subtract(const Dbm& a, const Dbm& b) {
  if (!a.intersects(b)) return a.is_empty() ? std::vector<Dbm>{} : std::vector<Dbm>{a};
  // Peel off, one facet of b at a time, the part of the remainder outside it.
  std::vector<Dbm> out;
  Dbm rest = a;
  for (int i = 0; i < a.dim(); ++i) {
    for (int j = 0; j < a.dim(); ++j) {
      const Bound cut = b.at(i, j);
      if (i == j || !(cut < rest.at(i, j))) continue;
      Dbm piece = rest;
      if (piece.constrain(j, i, Bound::from_raw(1 - cut.raw()))) out.push_back(std::move(piece));
      if (!rest.constrain(i, j, cut)) return out;
    }
  }
  return out;
}

}  // namespace twinverify
