#include <gtest/gtest.h>

#include "gen.hpp"
#include "oracle.hpp"

using namespace epilab;

namespace {

GridPtr line01() { return make_grid(GridSpec{}); }

ClosedSet pt(const GridPtr& g, double x) { return ClosedSet(g, {static_cast<std::uint32_t>(g->nearest(std::vector<double>{x}))}); }

std::vector<ClosedSet> shrinking(const GridPtr& g, int count) {
  std::vector<ClosedSet> v;
  for (int n = 1; n <= count; ++n) v.push_back(pt(g, 1.0 / n));
  return v;
}

std::vector<ClosedSet> alternating(const GridPtr& g, int count) {
  std::vector<ClosedSet> v;
  for (int n = 1; n <= count; ++n) v.push_back(pt(g, n % 2 ? -1.0 : 1.0));
  return v;
}

std::vector<std::set<std::size_t>> as_sets(const std::vector<ClosedSet>& v) {
  std::vector<std::set<std::size_t>> out;
  for (const auto& s : v) out.push_back(oracle::as_set(s));
  return out;
}

}  // namespace

TEST(Hits, Examples) {
  const auto g = line01();
  EXPECT_TRUE(hits(pt(g, 0), closed_ball(Point::at(g, {0.0}), 1.0)));
  EXPECT_FALSE(hits(ClosedSet(g), closed_ball(Point::at(g, {0.0}), 1.0)));
  const auto coarse = make_grid(oracle::small_line(-1, 1, 0.5));
  const ClosedSet F = pt(coarse, -1).unite(pt(coarse, 1));
  EXPECT_FALSE(hits(F, closed_ball(Point::at(coarse, {0.0}), 0.5)));
  EXPECT_TRUE(misses(ClosedSet(g), ClosedSet::full(g)));
  EXPECT_FALSE(misses(pt(g, 0), pt(g, 0)));
}

TEST(Hits, ComplementationAndBruteForce) {
  gen::Source src(201);
  for (int t = 0; t < 1000; ++t) {
    const auto g = gen::small_grid(src);
    const auto a = gen::set(src, g, src.uniform(0, 0.2));
    const auto b = gen::set(src, g, src.uniform(0, 0.9));
    const bool h = hits(a, b);
    EXPECT_EQ(h, oracle::hits(oracle::as_set(a), oracle::as_set(b)));
    EXPECT_EQ(misses(a, b), !h);
    EXPECT_EQ(hits(a, SetMask<CarrierSpace>(b)), h);
  }
}

TEST(Excess, Examples) {
  const auto g = line01();
  EXPECT_EQ(excess(ClosedSet(g), pt(g, 0)), 0.0);
  EXPECT_NEAR(excess(pt(g, 0).unite(pt(g, 1)), pt(g, 0)), 1.0, 1e-12);
  const ClosedSet F = pt(g, 0.5).unite(pt(g, -2));
  EXPECT_EQ(excess(F, F), 0.0);
  EXPECT_EQ(excess(pt(g, 0), ClosedSet(g)), kInfiniteExcess);
}

TEST(Excess, WitnessAttainsTheExcess) {
  const auto g = line01();
  const ClosedSet F = pt(g, 0).unite(pt(g, 3));
  const auto r = excess_with_witness(F, pt(g, 0.5));
  ASSERT_TRUE(r.witness.has_value());
  EXPECT_NEAR(g->coord(*r.witness, 0), 3.0, 1e-12);
  EXPECT_NEAR(r.value, 2.5, 1e-12);
}

TEST(ExcessProperty, MatchesBruteForce) {
  gen::Source src(202);
  for (int t = 0; t < 400; ++t) {
    const auto g = gen::small_grid(src);
    const auto a = gen::set(src, g);
    const auto b = gen::set(src, g, src.uniform(0.0, 0.2));
    const double want = oracle::excess(*g, oracle::as_set(a), oracle::as_set(b));
    const double got = excess(a, b);
    if (std::isinf(want)) {
      EXPECT_TRUE(std::isinf(got));
    } else {
      EXPECT_NEAR(got, want, 1e-12);
    }
  }
}

TEST(ExcessProperty, LargeTargetsUseTheRingSearch) {
  // targets above the brute-force cutoff on the default line
  gen::Source src(203);
  const auto g = line01();
  for (int t = 0; t < 20; ++t) {
    const auto b = gen::set(src, g, 0.4);
    const auto a = gen::set(src, g, 0.05);
    EXPECT_NEAR(excess(a, b), oracle::excess(*g, oracle::as_set(a), oracle::as_set(b)), 1e-12);
  }
}

TEST(ExcessProperty, ProductSetsMatchBruteForce) {
  // epigraph-sized targets take the threshold search
  gen::Source src(207);
  for (int t = 0; t < 60; ++t) {
    const double h = src.coin() ? 0.25 : 0.5;
    const double hv = src.coin() ? 0.25 : 0.5;
    const auto g = make_grid(oracle::small_line(-4, 4, h, -4, 4, hv));
    const std::size_t n = g->size() * g->ordinate_count();
    std::vector<std::uint32_t> am;
    std::vector<std::uint32_t> bm;
    const double pb = src.uniform(0.01, 0.6);
    for (std::size_t i = 0; i < n; ++i) {
      if (src.coin(0.1)) am.push_back(static_cast<std::uint32_t>(i));
      if (src.coin(pb)) bm.push_back(static_cast<std::uint32_t>(i));
    }
    const ProductSet a(g, am);
    const ProductSet b(g, bm);
    const std::set<std::size_t> sa(am.begin(), am.end());
    const std::set<std::size_t> sb(bm.begin(), bm.end());
    const auto r = excess_with_witness(a, b);
    const double want = oracle::product_excess(*g, sa, sb);
    if (std::isinf(want)) {
      EXPECT_TRUE(std::isinf(r.value));
      continue;
    }
    EXPECT_NEAR(r.value, want, 1e-12);
    if (!sa.empty()) {
      ASSERT_TRUE(r.witness.has_value());
      EXPECT_TRUE(sa.count(*r.witness));
      EXPECT_NEAR(oracle::product_excess(*g, {*r.witness}, sb), want, 1e-12);
    }
  }
}

TEST(PkLimits, ShrinkingSingletons) {
  const auto g = line01();
  const auto seq = shrinking(g, 200);
  const std::size_t tail = 100;
  const double tol = 0.01;
  const auto want_outer = oracle::outer(*g, as_sets(seq), tail, tol);
  EXPECT_EQ(oracle::as_set(pk_limsup<CarrierSpace>(seq, tail, tol)), want_outer);
  // every tail point rounds to 0.01, so the outer limit is 0.01 dilated by tol
  EXPECT_EQ(want_outer, (std::set<std::size_t>{400, 401, 402}));
  const auto inner = pk_liminf<CarrierSpace>(seq, tail, 0.02);
  EXPECT_EQ(oracle::as_set(inner), oracle::inner(*g, as_sets(seq), tail, 0.02));
}

TEST(PkLimits, ConstantAndEmpty) {
  const auto g = line01();
  const std::vector<ClosedSet> constant(10, pt(g, 0));
  const auto out = pk_limsup<CarrierSpace>(constant, 5, g->h());
  EXPECT_EQ(out.size(), 3u);
  EXPECT_EQ(pk_liminf<CarrierSpace>(constant, 5, g->h()), out);
  const std::vector<ClosedSet> empties(10, ClosedSet(g));
  EXPECT_TRUE(pk_limsup<CarrierSpace>(empties, 5, g->h()).empty());
  EXPECT_TRUE(pk_liminf<CarrierSpace>(alternating(g, 20), 10, 0.5).empty());
}

TEST(PkLimits, ToleranceBelowSpacingIsRejected) {
  const auto g = line01();
  const auto seq = shrinking(g, 10);
  EXPECT_THROW(pk_limsup<CarrierSpace>(seq, 5, 0.001), usage_error);
  EXPECT_THROW(pk_limsup<CarrierSpace>(seq, 20, 0.01), usage_error);
}

TEST(FellConvergence, Examples) {
  const auto g = line01();
  const auto seq = shrinking(g, 200);
  EXPECT_TRUE((upper_fell_converges<CarrierSpace>(seq, pt(g, 0), 100, 0.02).converged));
  EXPECT_TRUE((fell_converges<CarrierSpace>(seq, pt(g, 0), 100, 0.02).converged));
  EXPECT_FALSE((fell_converges<CarrierSpace>(seq, ClosedSet(g), 100, 0.02).converged));

  const auto alt = alternating(g, 20);
  const auto r = upper_fell_converges<CarrierSpace>(alt, pt(g, 1), 10, 0.01);
  EXPECT_FALSE(r.converged);
  ASSERT_TRUE(r.upper_witness.has_value());
  EXPECT_NEAR(g->coord(*r.upper_witness, 0), -1.0, 1e-12);
  EXPECT_TRUE((upper_fell_converges<CarrierSpace>(alt, ClosedSet::full(g), 10, 0.01).converged));

  std::vector<ClosedSet> balls;
  for (int n = 1; n <= 200; ++n) balls.push_back(closed_ball(Point::at(g, {0.0}), 1.0 + 1.0 / n));
  EXPECT_TRUE((fell_converges<CarrierSpace>(balls, closed_ball(Point::at(g, {0.0}), 1.0), 100, 0.02).converged));
}

TEST(FellProperty, LiminfInsideLimsupAndImplications) {
  gen::Source src(204);
  for (int t = 0; t < 150; ++t) {
    const auto g = gen::small_grid(src);
    const auto seq = gen::sequence(src, g, 4 + src.below(6));
    const std::size_t tail = src.below(seq.size());
    const double tol = g->h() * static_cast<double>(1 + src.below(3));
    const auto sup = pk_limsup<CarrierSpace>(seq, tail, tol);
    const auto inf = pk_liminf<CarrierSpace>(seq, tail, tol);
    EXPECT_TRUE(inf.is_subset_of(sup));
    EXPECT_EQ(oracle::as_set(sup), oracle::outer(*g, as_sets(seq), tail, tol));
    EXPECT_EQ(oracle::as_set(inf), oracle::inner(*g, as_sets(seq), tail, tol));

    const auto F = gen::set(src, g);
    const auto full = fell_converges<CarrierSpace>(seq, F, tail, tol);
    const auto upper = upper_fell_converges<CarrierSpace>(seq, F, tail, tol);
    if (full.converged) {
      EXPECT_TRUE(upper.converged);
    }
    const auto looser = upper_fell_converges<CarrierSpace>(seq, F, tail, tol + g->h());
    if (upper.converged) {
      EXPECT_TRUE(looser.converged);
    }
  }
}

TEST(FellProperty, MissDecompositionOverShrinkingOffsets) {
  // misses(F, ball(x, r)) equals OR_k misses(F, ball(x, r + s_k)) once s_k
  // drops below the lattice resolution
  gen::Source src(205);
  for (int t = 0; t < 300; ++t) {
    const auto g = gen::small_grid(src);
    const auto F = gen::set(src, g);
    const Point x(g, src.below(g->size()));
    const double r = gen::radius(src, g->h(), 5);
    bool any = false;
    for (double s = 1.0; s > 1e-6; s /= 2) any = any || misses(F, closed_ball(x, r + s));
    EXPECT_EQ(misses(F, closed_ball(x, r)), any);
  }
}

TEST(FellProperty, OpenHitDecomposition) {
  gen::Source src(206);
  for (int t = 0; t < 300; ++t) {
    const auto g = gen::small_grid(src);
    const auto F = gen::set(src, g);
    const Point x(g, src.below(g->size()));
    const double r = g->h() * (0.5 + static_cast<double>(src.below(5)));
    const double radius = src.coin() ? r : r + 0.5 * g->h();
    bool any = false;
    for (double s = 0.5 * radius; s > 1e-6; s /= 2) any = any || hits(F, closed_ball(x, radius - s));
    EXPECT_EQ(hits(F, open_ball(x, radius)), any);
  }
}

TEST(BaseElement, Membership) {
  const auto g = line01();
  BaseElement B;
  B.missing = {Ball{{1.0, 0.0}, 0.5}};
  B.hitting = {Ball{{0.0, 0.0}, 0.5}};
  EXPECT_TRUE(in_base_element(pt(g, 0), B));
  EXPECT_FALSE(in_base_element(ClosedSet(g), B));
  BaseElement only_miss;
  only_miss.missing = {Ball{{2.0, 0.0}, 0.25}};
  EXPECT_TRUE(in_base_element(ClosedSet(g), only_miss));
  BaseElement bad;
  EXPECT_THROW(in_base_element(pt(g, 0), bad), usage_error);
  bad.missing = {Ball{{0.005, 0.0}, 0.5}};
  EXPECT_THROW(in_base_element(pt(g, 0), bad), usage_error);
}

TEST(BaseElement, MatchesBruteForce) {
  // F = {0}, missing ball(1, 0.5), hitting ball(0, 0.5)
  const auto g = line01();
  const auto F = oracle::as_set(pt(g, 0));
  const bool want = !oracle::hits(F, oracle::ball(*g, {1.0, 0.0}, 0.5)) &&
                    oracle::hits(F, oracle::ball(*g, {0.0, 0.0}, 0.5, true));
  BaseElement B;
  B.missing = {Ball{{1.0, 0.0}, 0.5}};
  B.hitting = {Ball{{0.0, 0.0}, 0.5}};
  EXPECT_EQ(in_base_element(pt(g, 0), B), want);
}
