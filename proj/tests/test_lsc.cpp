#include <gtest/gtest.h>

#include "gen.hpp"
#include "oracle.hpp"

using namespace epilab;

namespace {

GridPtr coarse() { return make_grid(oracle::small_line(-1, 1, 0.5, -1, 1, 1)); }
GridPtr half_steps() { return make_grid(oracle::small_line(-1, 1, 0.5, 0, 1, 0.5)); }
GridPtr line() { return make_grid(GridSpec{}); }

LscFunction square(const GridPtr& g, double shift = 0.0) {
  return LscFunction::sample(g, [&](const std::array<double, 2>& x) { return ExtReal((x[0] - shift) * (x[0] - shift)); });
}

}  // namespace

TEST(ExtReal, OrderAndInfinities) {
  EXPECT_LT(ExtReal::neg_inf(), ExtReal(-1e300));
  EXPECT_LT(ExtReal(1e300), ExtReal::pos_inf());
  EXPECT_EQ(ExtReal::pos_inf().shifted(5.0), ExtReal::pos_inf());
  EXPECT_EQ(ExtReal(1.5).shifted(-0.5), ExtReal(1.0));
  EXPECT_THROW(ExtReal(std::nan("")), usage_error);
  EXPECT_EQ(ExtReal::pos_inf().to_string(), "+inf");
  EXPECT_EQ(ExtReal::neg_inf().to_string(), "-inf");
}

TEST(InfOver, Examples) {
  const auto g = line();
  const LscFunction f = square(g);
  EXPECT_EQ(inf_over(f, closed_ball(Point::at(g, {0.0}), 1.0)), ExtReal(0.0));
  EXPECT_EQ(inf_over(f, ClosedSet(g)), ExtReal::pos_inf());
  LscFunction h = f;
  h.set(Point::at(g, {0.0}).index(), ExtReal::neg_inf());
  EXPECT_EQ(inf_over(h, closed_ball(Point::at(g, {0.0}), 0.5)), ExtReal::neg_inf());
}

TEST(Epigraph, Examples) {
  const auto g = coarse();
  const ProductSet z = epigraph(LscFunction::constant(g, ExtReal(0.0)));
  // ordinates {-1, 0, 1}; columns keep a in {0, 1}
  EXPECT_EQ(z.size(), g->size() * 2);
  for (auto idx : z.members()) EXPECT_GE(g->ordinate(idx % g->ordinate_count()), 0.0);
  EXPECT_TRUE(epigraph(LscFunction::constant(g, ExtReal::pos_inf())).empty());

  const auto h = half_steps();
  const ProductSet e = epigraph(square(h));
  const auto p = ProductPoint::at(Point::at(h, {0.5}), 0.5);
  EXPECT_TRUE(e.contains(p.index()));
  EXPECT_TRUE(oracle::in_epigraph(square(h), p.base().index(), p.ordinate_index()));
  const auto q = ProductPoint::at(Point::at(h, {1.0}), 0.5);
  EXPECT_FALSE(e.contains(q.index()));
}

TEST(EpiHits, Examples) {
  const auto g = line();
  const LscFunction f = square(g);
  const Point o = Point::at(g, {0.0});
  EXPECT_TRUE(epi_hits_product_ball(f, o, 1.0, -0.75));
  EXPECT_TRUE(oracle::epi_hits_ball(square(make_grid(oracle::small_line(-2, 2, 0.25, -2, 2, 0.25))),
                                    8, 1.0, -0.75));
  EXPECT_FALSE(epi_hits_product_ball(LscFunction::constant(g, ExtReal::pos_inf()), o, 2.0, 0.0));
  EXPECT_TRUE(epi_hits_product_ball(LscFunction::constant(g, ExtReal(1.0)), o, 0.5, 0.5));
  EXPECT_FALSE(epi_hits_product_ball(LscFunction::constant(g, ExtReal(1.0)), o, 0.5, 0.49));
  EXPECT_THROW(epi_hits_product_ball(f, o, -0.1, 0.0), usage_error);
}

TEST(EpiHits, OpenBallUsesStrictInequality) {
  const auto g = line();
  const LscFunction f = square(g);
  const Point o = Point::at(g, {0.0});
  EXPECT_TRUE(epi_hits_open_product_ball(f, o, 1.0, -2.0) == false);
  EXPECT_TRUE(epi_misses_product_ball(f, o, 1.0, -2.0));
  EXPECT_TRUE(epi_hits_open_product_ball(f, o, 1.0, -0.5));
  EXPECT_FALSE(epi_hits_open_product_ball(LscFunction::constant(g, ExtReal(0.5)), o, 0.5, 0.0));
  EXPECT_THROW(epi_hits_open_product_ball(f, o, 0.0, 0.0), usage_error);
}

TEST(EpiHitsProperty, AgreesWithBruteForceEnumeration) {
  gen::Source src(301);
  for (int t = 0; t < 400; ++t) {
    const auto g = gen::small_grid(src);
    const LscFunction f = gen::function(src, g);
    const Point x(g, src.below(g->size()));
    const std::size_t rs = 1 + src.below(4);
    const double r = static_cast<double>(rs) * g->h_v();
    const std::size_t nv = g->ordinate_count();
    if (rs >= nv) continue;
    const std::size_t ak = src.below(nv - rs);
    const double alpha = g->ordinate(ak);
    const bool want = oracle::epi_hits_ball(f, x.index(), r, alpha);
    EXPECT_EQ(epi_hits_product_ball(f, x, r, alpha), want);
    EXPECT_EQ(hits(product_closed_ball(ProductPoint(x, ak), r), epigraph(f)), want);
    EXPECT_EQ(epi_misses_product_ball(f, x, r, alpha), !want);
  }
}

TEST(InfOverProperty, AntitoneAndUnion) {
  gen::Source src(302);
  for (int t = 0; t < 400; ++t) {
    const auto g = gen::small_grid(src);
    const LscFunction f = gen::function(src, g);
    const auto a = gen::set(src, g);
    const auto b = gen::set(src, g);
    EXPECT_GE(inf_over(f, a.intersect(b)), inf_over(f, a));
    EXPECT_EQ(inf_over(f, a.unite(b)), epilab::min(inf_over(f, a), inf_over(f, b)));
    EXPECT_EQ(oracle::value(inf_over(f, a)), oracle::inf_over(f, oracle::as_set(a)));
  }
}

TEST(EpigraphProperty, MonotoneAndMatchesScan) {
  gen::Source src(303);
  for (int t = 0; t < 200; ++t) {
    const auto g = gen::small_grid(src);
    const LscFunction f = gen::function(src, g);
    std::vector<ExtReal> up;
    for (std::size_t i = 0; i < g->size(); ++i) up.push_back(src.coin(0.1) ? ExtReal::pos_inf() : f[i].shifted(src.uniform(0, 1)));
    const LscFunction h(g, up);
    EXPECT_TRUE(epigraph(h).is_subset_of(epigraph(f)));
    std::set<std::size_t> scan;
    for (std::size_t i = 0; i < g->size(); ++i) {
      for (std::size_t k = 0; k < g->ordinate_count(); ++k) {
        if (oracle::in_epigraph(f, i, k)) scan.insert(i * g->ordinate_count() + k);
      }
    }
    EXPECT_EQ(oracle::as_set(epigraph(f)), scan);
  }
}

TEST(EpiConvergence, Examples) {
  const auto g = line();
  std::vector<LscFunction> up;
  for (int n = 1; n <= 200; ++n) up.push_back(square(g).shifted(1.0 / n));
  EXPECT_TRUE(epi_converges(up, square(g), 100, 0.02).converged);

  const std::vector<LscFunction> same(20, square(g));
  EXPECT_TRUE(epi_converges(same, square(g), 10, 0.01).converged);

  std::vector<LscFunction> dips;
  for (int n = 1; n <= 200; ++n) {
    LscFunction f = LscFunction::constant(g, ExtReal(0.0));
    f.set(g->nearest(std::vector<double>{1.0 / n}), ExtReal(-1.0));
    dips.push_back(f);
  }
  LscFunction lim = LscFunction::constant(g, ExtReal(0.0));
  lim.set(g->nearest(std::vector<double>{0.0}), ExtReal(-1.0));
  EXPECT_TRUE(epi_converges(dips, lim, 100, 0.02).converged);
  EXPECT_FALSE(epi_converges(dips, LscFunction::constant(g, ExtReal(0.0)), 100, 0.02).converged);
}

TEST(EpiConvergence, ToleranceMustCoverTheLattice) {
  const auto g = line();
  const std::vector<LscFunction> same(4, square(g));
  EXPECT_THROW(epi_converges(same, square(g), 2, 0.005), usage_error);
}
