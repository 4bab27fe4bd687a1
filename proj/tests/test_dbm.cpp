#include "dbm_oracle.hpp"
#include "doctest.h"
#include "twinverify/dbm.hpp"

#include <vector>

using namespace twinverify;
using testing::Atom;
using testing::ConstraintSet;

namespace {

Dbm build(const ConstraintSet& s) {
  Dbm z(s.clocks + 1);
  for (const auto& a : s.atoms)
    if (!a.apply(z)) break;
  return z;
}

// Same constraints written raw and closed once at the end.
Dbm build_raw(const ConstraintSet& s) {
  Dbm z(s.clocks + 1);
  auto tighten = [&](int i, int j, Bound b) { z.set(i, j, std::min(z.at(i, j), b)); };
  for (const auto& a : s.atoms) {
    switch (a.rel) {
      case 0: tighten(a.i, a.j, Bound::lt(a.c)); break;
      case 1: tighten(a.i, a.j, Bound::le(a.c)); break;
      case 2: tighten(a.i, a.j, Bound::le(a.c)); tighten(a.j, a.i, Bound::le(-a.c)); break;
      case 3: tighten(a.j, a.i, Bound::le(-a.c)); break;
      default: tighten(a.j, a.i, Bound::lt(-a.c)); break;
    }
  }
  z.close();
  return z;
}

}  // namespace

TEST_SUITE("dbm") {
  TEST_CASE("bound encoding orders strict before non-strict") {
    CHECK(Bound::lt(3) < Bound::le(3));
    CHECK(Bound::le(3) < Bound::lt(4));
    CHECK(Bound::le(2) + Bound::lt(1) == Bound::lt(3));
    CHECK(Bound::le(2) + Bound::le(1) == Bound::le(3));
    CHECK((Bound::le(2) + Bound::infinity()).is_inf());
    CHECK_FALSE(Bound::infinity().strict());
  }

  TEST_CASE("closing a canonical dbm changes nothing") {
    Dbm z(3);
    z.constrain(1, 0, Bound::le(4));
    z.constrain(2, 1, Bound::lt(1));
    const Dbm before = z;
    z.close();
    CHECK(z == before);
  }

  TEST_CASE("closure derives y <= 5 from x <= 3 and y - x <= 2") {
    Dbm z(3);
    z.set(1, 0, Bound::le(3));
    z.set(2, 1, Bound::le(2));
    REQUIRE(z.close());
    CHECK(z.at(2, 0) == Bound::le(5));
  }

  TEST_CASE("contradictory bounds give an empty zone") {
    Dbm z(2);
    z.set(1, 0, Bound::le(1));
    z.set(0, 1, Bound::le(-2));
    CHECK_FALSE(z.close());
    CHECK(z.is_empty());
    Dbm w(2);
    CHECK(w.constrain(1, 0, Bound::le(1)));
    CHECK_FALSE(w.constrain(0, 1, Bound::le(-2)));
  }

  TEST_CASE("up on the origin is the diagonal ray") {
    Dbm z = Dbm::zero(4);
    z.up();
    for (int i = 1; i < 4; ++i) {
      CHECK(z.at(i, 0).is_inf());
      CHECK(z.at(0, i) == Bound::le(0));
      for (int j = 1; j < 4; ++j) CHECK(z.at(i, j) == Bound::le(0));
    }
    const double pts[] = {0, 2.5, 2.5, 2.5};
    CHECK(z.contains(pts));
    const double off[] = {0, 2.5, 2.0, 2.5};
    CHECK_FALSE(z.contains(off));
  }

  TEST_CASE("reset pins a clock to a value") {
    Dbm z(3);
    z.constrain(1, 0, Bound::le(5));
    z.reset(2, 3);
    CHECK(z.at(2, 0) == Bound::le(3));
    CHECK(z.at(0, 2) == Bound::le(-3));
    CHECK(testing::canonical(z));
  }

  TEST_CASE("inclusion is reflexive") {
    Dbm z(3);
    z.constrain(1, 0, Bound::le(4));
    z.constrain(0, 2, Bound::lt(-1));
    CHECK(z.includes(z));
    Dbm big(3);
    CHECK(big.includes(z));
    CHECK_FALSE(z.includes(big));
  }

  TEST_CASE("extrapolation past the max constant") {
    Dbm z(2);
    z.constrain(0, 1, Bound::le(-10));  // x >= 10
    const std::int64_t k[] = {0, 4};
    z.extrapolate(k);
    CHECK(z.at(0, 1) == Bound::lt(-4));
    CHECK(z.at(1, 0).is_inf());
    // Region check: integer points up to 4 stay out, every point above 4 is in.
    for (double x : {0.0, 1.0, 4.0}) {
      const double p[] = {0, x};
      CHECK_FALSE(z.contains(p));
    }
    for (double x : {4.5, 5.0, 9.0, 10.0, 1e6}) {
      const double p[] = {0, x};
      CHECK(z.contains(p));
    }
  }

  TEST_CASE("extrapolation keeps zones below the constant") {
    Dbm z(2);
    z.constrain(1, 0, Bound::le(3));
    const Dbm before = z;
    const std::int64_t k[] = {0, 4};
    z.extrapolate(k);
    CHECK(z == before);
  }

  TEST_CASE("property: grid membership and emptiness match brute force") {
    Rng rng(1234);
    for (int t = 0; t < 300; ++t) {
      const ConstraintSet s = testing::random_constraint_set(rng);
      const Dbm z = build(s);
      CHECK(z.is_empty() == !testing::brute_nonempty(s));
      CHECK(build_raw(s) == z);
      if (!z.is_empty()) CHECK(testing::canonical(z));
      testing::for_grid(s.clocks, 0.5, 7.0, [&](const std::vector<double>& p) {
        if (!z.is_empty()) CHECK(z.contains(p) == s.holds(p));
        else CHECK_FALSE(s.holds(p));
        return true;
      });
    }
  }

  TEST_CASE("property: inclusion agrees with grid containment and is transitive") {
    Rng rng(99);
    for (int t = 0; t < 300; ++t) {
      ConstraintSet a = testing::random_constraint_set(rng, 2, 3);
      ConstraintSet b = a;
      b.atoms.push_back(testing::random_constraint_set(rng, 2, 3).atoms.front());
      if (b.atoms.back().i > a.clocks || b.atoms.back().j > a.clocks) b.atoms.pop_back();
      ConstraintSet c = b;
      c.atoms.push_back(testing::random_constraint_set(rng, 2, 3).atoms.front());
      if (c.atoms.back().i > a.clocks || c.atoms.back().j > a.clocks) c.atoms.pop_back();
      const Dbm za = build(a), zb = build(b), zc = build(c);
      CHECK(za.includes(zb));
      CHECK(zb.includes(zc));
      CHECK(za.includes(zc));
      // Inclusion of a random pair agrees with fine-grid containment.
      const ConstraintSet d = testing::random_constraint_set(rng, 2, 3);
      if (d.clocks != a.clocks) continue;
      const Dbm zd = build(d);
      if (zd.is_empty() || za.is_empty()) continue;
      bool subset = true;
      testing::for_grid(a.clocks, 0.25, 5.0, [&](const std::vector<double>& p) {
        if (zd.contains(p) && !za.contains(p)) subset = false;
        return subset;
      });
      CHECK(za.includes(zd) == subset);
    }
  }

  TEST_CASE("property: up and constrain keep zones canonical") {
    Rng rng(5);
    for (int t = 0; t < 300; ++t) {
      const ConstraintSet s = testing::random_constraint_set(rng);
      Dbm z = build(s);
      if (z.is_empty()) continue;
      z.up();
      CHECK(testing::canonical(z));
      Atom extra = testing::random_constraint_set(rng, s.clocks).atoms.front();
      if (extra.i > s.clocks || extra.j > s.clocks) continue;
      if (extra.apply(z)) CHECK(testing::canonical(z));
    }
  }

  TEST_CASE("property: extrapolation over-approximates") {
    Rng rng(8);
    for (int t = 0; t < 300; ++t) {
      const ConstraintSet s = testing::random_constraint_set(rng, 3, 5);
      const Dbm z = build(s);
      if (z.is_empty()) continue;
      Dbm e = z;
      const std::int64_t k[] = {0, 2, 3, 1};
      e.extrapolate(std::span<const std::int64_t>(k, static_cast<std::size_t>(s.clocks) + 1));
      CHECK(e.includes(z));
      CHECK(testing::canonical(e));
    }
  }

  TEST_CASE("down extends a box back to the origin") {
    Dbm z(2);
    z.constrain(1, 0, Bound::le(5));
    z.constrain(0, 1, Bound::le(-3));
    z.down();
    CHECK(z.contains(std::vector<double>{0, 0}));
    CHECK(z.contains(std::vector<double>{0, 5}));
    CHECK_FALSE(z.contains(std::vector<double>{0, 5.5}));
  }

  TEST_CASE("subtracting a disjoint zone returns the zone") {
    Dbm a(2), b(2);
    a.constrain(1, 0, Bound::le(2));
    b.constrain(0, 1, Bound::lt(-3));
    const auto pieces = subtract(a, b);
    REQUIRE(pieces.size() == 1);
    CHECK(pieces.front() == a);
    CHECK(subtract(a, a).empty());
  }

  TEST_CASE("property: down matches delay-closure on the grid") {
    Rng rng(31);
    for (int t = 0; t < 200; ++t) {
      const ConstraintSet s = testing::random_constraint_set(rng, 2, 4);
      const Dbm z = build(s);
      if (z.is_empty()) continue;
      Dbm d = z;
      d.down();
      CHECK(testing::canonical(d));
      testing::for_grid(s.clocks, 0.25, 6.0, [&](const std::vector<double>& p) {
        // Delay endpoints sit on the quarter grid, so eighth steps hit every
        // non-degenerate delay interval.
        bool reach = false;
        std::vector<double> q = p;
        for (int k = 0; k <= 120 && !reach; ++k) {
          for (std::size_t c = 1; c < q.size(); ++c) q[c] = p[c] + 0.125 * k;
          reach = z.contains(q);
        }
        CHECK(d.contains(p) == reach);
        return true;
      });
    }
  }

  TEST_CASE("property: subtraction partitions the difference") {
    Rng rng(47);
    for (int t = 0; t < 300; ++t) {
      const ConstraintSet sa = testing::random_constraint_set(rng, 2, 4);
      ConstraintSet sb = testing::random_constraint_set(rng, 2, 4);
      sb.clocks = sa.clocks;
      std::erase_if(sb.atoms, [&](const Atom& x) { return x.i > sa.clocks || x.j > sa.clocks; });
      const Dbm a = build(sa), b = build(sb);
      const auto pieces = subtract(a, b);
      for (const auto& piece : pieces) {
        CHECK_FALSE(piece.is_empty());
        CHECK(testing::canonical(piece));
      }
      testing::for_grid(sa.clocks, 0.25, 6.0, [&](const std::vector<double>& p) {
        const bool in_a = !a.is_empty() && a.contains(p);
        const bool in_b = !b.is_empty() && b.contains(p);
        int hits = 0;
        for (const auto& piece : pieces) hits += piece.contains(p) ? 1 : 0;
        CHECK(hits == (in_a && !in_b ? 1 : 0));
        return true;
      });
    }
  }
}
