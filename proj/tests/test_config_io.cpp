#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include <unistd.h>

#include "gen.hpp"
#include "oracle.hpp"

using namespace epilab;
namespace fs = std::filesystem;

namespace {

GridPtr line() { return make_grid(GridSpec{}); }

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() / ("epilab-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

  fs::path write(const std::string& name, const std::string& text) const {
    const auto p = path_ / name;
    std::ofstream(p) << text;
    return p;
  }

 private:
  fs::path path_;
};

std::string with_output(const TempDir& d, const std::string& body) {
  return body + "output_dir = " + (d.path() / "out").string() + "\n";
}

}  // namespace

TEST(FlatConfig, ParsesCommentsAndWhitespace) {
  const auto c = FlatConfig::parse("# header\n  scenario = S1  # trailing\n\nN=500\nradii = 0.3, 0.5\n");
  EXPECT_EQ(c.keys(), (std::vector<std::string>{"scenario", "N", "radii"}));
  EXPECT_EQ(c.get_or("scenario", ""), "S1");
  EXPECT_EQ(c.count("N", 1), 500u);
  EXPECT_EQ(c.numbers("radii", {}), (std::vector<double>{0.3, 0.5}));
  EXPECT_EQ(c.number("tol", 0.25), 0.25);
}

TEST(FlatConfig, RejectsMalformedInput) {
  EXPECT_THROW(FlatConfig::parse("scenario S1\n"), config_error);
  EXPECT_THROW(FlatConfig::parse("= 3\n"), config_error);
  EXPECT_THROW(FlatConfig::parse("N = 1\nN = 2\n"), config_error);
  EXPECT_THROW(FlatConfig::parse("N = ten\n").count("N", 1), config_error);
  EXPECT_THROW(FlatConfig::load("/nonexistent/x.cfg"), config_error);
}

TEST(FlatConfig, GridSpecRoundTrip) {
  GridSpec g;
  g.dim = 2;
  g.lo = {-1, -1};
  g.hi = {1, 1};
  g.h = 0.05;
  const auto back = grid_spec_from_text(grid_spec_to_text(g));
  EXPECT_EQ(back.dim, 2);
  EXPECT_DOUBLE_EQ(back.h, 0.05);
  EXPECT_DOUBLE_EQ(back.lo[1], -1.0);
}

TEST(ExperimentConfig, UnknownKeysAndTesters) {
  EXPECT_THROW(parse_experiment(FlatConfig::parse("scenario = S1\ntester = rcs-convergence\nNN = 3\n")), config_error);
  EXPECT_THROW(parse_experiment(FlatConfig::parse("scenario = S1\ntester = magic\n")), config_error);
  EXPECT_THROW(parse_experiment(FlatConfig::parse("tester = rcs-convergence\n")), config_error);
  EXPECT_THROW(parse_experiment(FlatConfig::parse("scenario = S1\ntester = epi-dist\nmode = lt\n")), config_error);
  EXPECT_THROW(parse_experiment(FlatConfig::parse("scenario = S1\ntester = selection\nrule = median\n")), config_error);
  const auto e = parse_experiment(FlatConfig::parse("scenario = S1\ntester = rcs-convergence\nseed = 9\n"));
  EXPECT_EQ(e.seed, 9u);
  EXPECT_EQ(e.N, 200000u);
  EXPECT_EQ(e.recipe.size, 20u);
}

TEST(SetGrammar, Examples) {
  const auto g = line();
  const ClosedSet a = parse_set(g, "ball(0, 0.1) + ball(1, 0.05)");
  EXPECT_EQ(a.size(), 21u + 11u);
  EXPECT_EQ(parse_set(g, "all"), ClosedSet::full(g));
  EXPECT_TRUE(parse_set(g, "empty").empty());
  EXPECT_THROW(parse_set(g, "ball(0.333, 0.1)"), config_error);
  EXPECT_THROW(parse_set(g, "box(0, 1)"), config_error);
  EXPECT_THROW(parse_set(g, "ball(0, 0, 1)"), config_error);

  const auto list = parse_set_list(g, "ball(1,0.05); all", "F");
  ASSERT_EQ(list.size(), 2u);
  EXPECT_EQ(list[0].id, "F1");
  EXPECT_EQ(list[1].set, ClosedSet::full(g));

  const auto k = parse_k_panel(g, "ball(-1,0.1) & ball(1,0.1); ball(0,0.2)");
  ASSERT_EQ(k.size(), 2u);
  EXPECT_EQ(k[0].sets.size(), 2u);

  const auto epi = parse_epi_panel(g, "(0, 0.305, -0.5) & (1, 0.1, 0); (0, 0.255, -1.5)");
  ASSERT_EQ(epi.size(), 2u);
  EXPECT_EQ(epi[0].components.size(), 2u);
  EXPECT_DOUBLE_EQ(epi[1].components[0].alpha, -1.5);
  EXPECT_THROW(parse_epi_panel(g, "(0, 0.3)"), config_error);
}

TEST(SetGrammar, PlaneBalls) {
  auto spec = oracle::small_plane(-1, 1, 0.25);
  const auto g = make_grid(spec);
  const ClosedSet b = parse_set(g, "ball(0, 0, 0.25)");
  EXPECT_EQ(oracle::as_set(b), oracle::ball(*g, {0.0, 0.0}, 0.25));
  EXPECT_THROW(parse_set(g, "ball(0, 0.25)"), config_error);
}

TEST(Io, SetRoundTrips) {
  gen::Source src(601);
  for (int t = 0; t < 100; ++t) {
    const auto g = gen::small_grid(src);
    const auto s = gen::set(src, g);
    EXPECT_EQ(set_from_json<CarrierSpace>(g, set_to_json(s)), s);
    EXPECT_EQ(set_from_csv<CarrierSpace>(g, set_to_csv(s)), s);
  }
  const auto g = line();
  EXPECT_THROW(set_from_json<CarrierSpace>(g, nlohmann::json::parse("[1, -2]")), config_error);
  EXPECT_THROW(set_from_json<CarrierSpace>(g, nlohmann::json::parse("{}")), config_error);
  EXPECT_THROW(set_from_csv<CarrierSpace>(g, "index\n900\n"), config_error);
}

TEST(Io, FunctionRoundTripKeepsInfinities) {
  gen::Source src(602);
  for (int t = 0; t < 100; ++t) {
    const auto g = gen::small_grid(src);
    const auto f = gen::function(src, g);
    const auto back = function_from_csv(g, function_to_csv(f));
    for (std::size_t i = 0; i < f.size(); ++i) EXPECT_EQ(back[i], f[i]);
  }
  const auto g = make_grid(oracle::small_line(-1, 1, 0.5));
  EXPECT_THROW(function_from_csv(g, "index,value\n0,1\n"), config_error);
  EXPECT_THROW(function_from_csv(g, "index,value\n0,x\n"), config_error);
  EXPECT_THROW(function_from_csv(g, "0;1\n"), config_error);
}

TEST(Io, ReportJsonShape) {
  const auto g = line();
  const auto s1 = find_scenario(scenario_library(g), "S1");
  const std::vector<PanelSet> p{{"U1", "ball(0,0.25)", closed_ball(Point::at(g, {0.0}), 0.25)}};
  const auto rep = test_rcs_convergence(s1.set_sequence, s1.set_limit, p, 100, 3, 0.01);
  const auto j = to_json(rep);
  for (const char* key : {"tester", "verdict", "panels", "N", "seed", "tol"}) EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j.at("verdict"), "pass");
  const auto csv = series_csv(rep);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 200 + 1);
}

TEST(Runner, ExitCodesAndArtifacts) {
  const TempDir d;
  const auto ok = run_config_file(
      d.write("ok.cfg", with_output(d, "scenario = S1\ntester = rcs-convergence\nN = 100\npanel = ball(0, 0.25)\n"))
          .string());
  EXPECT_EQ(ok.code, ExitCode::pass);
  for (const char* f : {"report.json", "series.csv", "summary.txt"}) EXPECT_TRUE(fs::exists(ok.dir / f)) << f;

  const auto bad = run_config_file(
      d.write("bad.cfg", with_output(d, "scenario = alternating\ntester = rcs-convergence\nN = 100\n"
                                        "panel = ball(-1, 0.25)\n"))
          .string());
  EXPECT_EQ(bad.code, ExitCode::fail);

  const auto hyp = run_config_file(
      d.write("hyp.cfg", with_output(d, "scenario = S4\ntester = argmin-fell\nN = 200\nK = all\n"
                                        "panel = ball(1, 0.05)\n"))
          .string());
  EXPECT_EQ(hyp.code, ExitCode::hypothesis_not_met);

  const auto missing =
      run_config_file(d.write("missing.cfg", "scenario = S99\ntester = rcs-convergence\nN = 10\n").string());
  EXPECT_EQ(missing.code, ExitCode::config_error);
  EXPECT_NE(missing.message.find("S99"), std::string::npos);
  EXPECT_EQ(run_config_file((d.path() / "nope.cfg").string()).code, ExitCode::config_error);
}

TEST(Runner, BrokenSamplerIsCaught) {
  const TempDir d;
  const auto cfg = d.write("s1.cfg", with_output(d, "scenario = S1\ntester = rcs-convergence\nN = 100\n"
                                                    "panel = ball(0, 0.25)\n"));
  EXPECT_EQ(run_config_file(cfg.string()).code, ExitCode::pass);
  EXPECT_EQ(run_config_file(cfg.string(), with_broken_sampler(default_library(), "S1")).code, ExitCode::fail);

  VerifyOptions o;
  o.library = with_broken_sampler(default_library(), "S1");
  const auto rep = verify_all(o, {3});
  ASSERT_EQ(rep.criteria.size(), 1u);
  EXPECT_FALSE(rep.criteria[0].pass);
  EXPECT_FALSE(rep.all_pass());
}

TEST(Runner, OutputDirectoryFallbacks) {
  auto e = parse_experiment(FlatConfig::parse("scenario = S1\ntester = rcs-convergence\n"));
  ::setenv("EPILAB_OUTPUT_DIR", "/tmp/elsewhere", 1);
  EXPECT_EQ(output_dir_for(e, "configs/s1_rcs.cfg"), fs::path("/tmp/elsewhere/s1_rcs"));
  ::unsetenv("EPILAB_OUTPUT_DIR");
  EXPECT_EQ(output_dir_for(e, "configs/s1_rcs.cfg"), fs::path("epilab-out/s1_rcs"));
  e.raw.set("output_dir", "/tmp/here");
  EXPECT_EQ(output_dir_for(e, "configs/s1_rcs.cfg"), fs::path("/tmp/here"));
}

TEST(Listing, EveryScenarioAppears) {
  const auto text = list_scenarios();
  for (const auto& s : scenario_library(line())) EXPECT_NE(text.find(s.id + "\t"), std::string::npos) << s.id;
}
