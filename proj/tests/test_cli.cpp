#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "cli.hpp"
#include "dwt/io.hpp"
#include "support.hpp"

namespace dwt::cli {
namespace {

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "dwt");
  std::ostringstream out, err;
  Outcome o;
  o.code = main_entry(args, out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("dwt_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    write_file(path("annulus.pgm"), encode_mask(test::reference_annulus()));
    write_file(path("disk.pgm"), encode_mask(test::disk(40, 20.0, 12.0)));
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

double field(const std::string& line, const std::string& key) {
  const std::size_t p = line.find(key + "=");
  EXPECT_NE(p, std::string::npos) << line;
  return std::stod(line.substr(p + key.size() + 1));
}

TEST(ParseArgs, MeasureDefaults) {
  const Command c = parse_args({"dwt", "measure", "in.pgm", "-o", "out.pfm"});
  const auto& m = std::get<MeasureCommand>(c);
  EXPECT_EQ(m.input, "in.pgm");
  EXPECT_EQ(m.output, "out.pfm");
  EXPECT_FALSE(m.spacing.has_value());
  EXPECT_EQ(m.cfg.omega, SolverConfig{}.omega);
  EXPECT_EQ(m.cfg.step, SolverConfig{}.step);
}

TEST(ParseArgs, SynthCountAndSeed) {
  const auto s = std::get<SynthCommand>(parse_args({"dwt", "synth", "-n", "100", "-o", "dir", "--seed", "7"}));
  EXPECT_EQ(s.count, 100);
  EXPECT_EQ(s.seed, 7u);
  EXPECT_EQ(s.out_dir, "dir");
  EXPECT_EQ(s.jobs, 1);
}

TEST(ParseArgs, UsageErrors) {
  const auto code = [](std::vector<std::string> a) {
    a.insert(a.begin(), "dwt");
    try {
      parse_args(a);
    } catch (const UsageError& e) {
      return e.exit_code();
    }
    return -1;
  };
  EXPECT_EQ(code({"measure", "--omega", "3.0", "in.pgm", "-o", "x.pfm"}), 2);
  EXPECT_EQ(code({"measure", "--omega", "3.0", "in.pgm"}), 2);
  EXPECT_EQ(code({"measure", "in.pgm", "-o", "x.pfm", "--frobnicate"}), 2);
  EXPECT_EQ(code({"measure", "--ds", "abc", "in.pgm", "-o", "x.pfm"}), 2);
  EXPECT_EQ(code({"synth", "-o", "dir"}), 2);
  EXPECT_EQ(code({"aha", "--maps", "a", "b", "--apex", "1", "-o", "x.svg"}), 2);
  EXPECT_EQ(code({"aha", "--maps", "a", "b", "c", "--apex", "1", "--sense", "up", "-o", "x"}), 2);
  EXPECT_EQ(code({"frob"}), 2);
  EXPECT_EQ(code({}), 2);
  EXPECT_EQ(code({"measure", "--help"}), 0);
}

TEST(ParseArgs, AhaFlags) {
  const auto a = std::get<AhaCommand>(parse_args({"dwt", "aha", "--maps", "b.pfm", "m.pfm", "a.pfm", "--apex",
                                                  "8.5", "--angle", "30", "--sense", "cw", "-o", "o.svg"}));
  EXPECT_EQ(a.maps[2], "a.pfm");
  EXPECT_EQ(a.apex, 8.5);
  EXPECT_EQ(a.angle, 30.0);
  EXPECT_EQ(a.sense, Sense::clockwise);
  EXPECT_FALSE(a.range.has_value());
}

TEST(LoadConfig, StrictKeys) {
  const SolverConfig c = load_solver_config(R"({"omega": 1.5, "step": 0.2})");
  EXPECT_EQ(c.omega, 1.5);
  EXPECT_EQ(c.step, 0.2);
  EXPECT_EQ(c.fill_k, SolverConfig{}.fill_k);
  EXPECT_THROW(load_solver_config(R"({"omegaa": 1.5})"), UsageError);
  EXPECT_THROW(load_solver_config(R"({"omega": "fast"})"), UsageError);
  EXPECT_THROW(load_solver_config("[1]"), UsageError);
  const ShapeRecipe r = load_recipe(R"({"wall_width": [2, 4], "elastic": false})");
  EXPECT_EQ(r.wall_width.lo, 2.0);
  EXPECT_FALSE(r.elastic);
  EXPECT_THROW(load_recipe(R"({"wall_width": 3})"), UsageError);
}

TEST_F(CliTest, MeasureAnnulus) {
  const Outcome o = invoke({"measure", path("annulus.pgm"), "-o", path("t.pfm"), "--spacing", "1",
                            "--dump-psi", path("psi.pfm"), "--dump-flags", path("flags.pgm")});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_NEAR(field(o.out, "mean_mm"), 10.0, 0.2);
  EXPECT_NEAR(field(o.out, "max_mm"), 10.0, 0.5);
  const Image<float> t = parse_pfm(read_file(path("t.pfm")));
  EXPECT_EQ(t.width(), 80);
  EXPECT_TRUE(fs::exists(path("psi.pfm")));
  const Image<std::uint8_t> flags = parse_pgm(read_file(path("flags.pgm")));
  for (std::uint8_t f : flags.pixels()) EXPECT_TRUE(f == 0 || f == 128 || f == 255);
}

TEST_F(CliTest, MeasureRepeatsByteForByte) {
  ASSERT_EQ(invoke({"measure", path("annulus.pgm"), "-o", path("a.pfm")}).code, 0);
  ASSERT_EQ(invoke({"measure", path("annulus.pgm"), "-o", path("b.pfm")}).code, 0);
  EXPECT_EQ(read_file(path("a.pfm")), read_file(path("b.pfm")));
}

TEST_F(CliTest, SpacingPrecedence) {
  const double plain = field(invoke({"measure", path("annulus.pgm"), "-o", path("t.pfm")}).out, "mean_mm");
  EXPECT_NEAR(plain, 10.0 * kDefaultSpacingMm, 0.3);
  write_file(path("annulus.json"), R"({"spacing_mm": 2.0})");
  const double sidecar = field(invoke({"measure", path("annulus.pgm"), "-o", path("t.pfm")}).out, "mean_mm");
  EXPECT_NEAR(sidecar, 20.0, 0.4);
  const double flag =
      field(invoke({"measure", path("annulus.pgm"), "-o", path("t.pfm"), "--spacing", "0.5"}).out, "mean_mm");
  EXPECT_NEAR(flag, 5.0, 0.1);
}

TEST_F(CliTest, ConfigFileThenFlags) {
  write_file(path("cfg.json"), R"({"omega": 3.5})");
  EXPECT_EQ(invoke({"measure", "--config", path("cfg.json"), path("annulus.pgm"), "-o", path("t.pfm")}).code, 2);
  EXPECT_EQ(invoke({"measure", "--config", path("cfg.json"), "--omega", "1.8", path("annulus.pgm"), "-o",
                    path("t.pfm")})
                .code,
            0);
}

TEST_F(CliTest, DiskHasNoInnerBoundary) {
  const Outcome o = invoke({"measure", path("disk.pgm"), "-o", path("t.pfm")});
  EXPECT_EQ(o.code, 1);
  EXPECT_EQ(o.err.rfind("error=NoInnerBoundary detail=", 0), 0u) << o.err;
  EXPECT_FALSE(fs::exists(path("t.pfm")));
}

TEST_F(CliTest, MissingInputIsError) {
  const Outcome o = invoke({"measure", path("nope.pgm"), "-o", path("t.pfm")});
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.err.find("error="), std::string::npos);
}

TEST_F(CliTest, ManualBoundaries) {
  const test::Slab s = test::slab(20, 5, 5, 2, 16);
  write_file(path("slab.pgm"), encode_mask(s.mask));
  write_file(path("slab_labels.pgm"), encode_boundary_labels(s.labels));
  const Outcome o = invoke({"measure", path("slab.pgm"), "--spacing", "1", "--boundaries",
                            path("slab_labels.pgm"), "-o", path("slab.pfm")});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_NEAR(field(o.out, "mean_mm"), 5.0, 0.2);
}

TEST_F(CliTest, BenchRoutesTimingsToStderr) {
  const Outcome o = invoke({"bench", path("annulus.pgm")});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(o.err.rfind("stage,seconds\n", 0), 0u);
  for (const char* stage : {"laplace,", "tracing,", "fill,", "total,"}) {
    EXPECT_NE(o.err.find(stage), std::string::npos) << stage;
  }
  EXPECT_EQ(o.out.rfind("width=80 height=80 sweeps=", 0), 0u) << o.out;
  EXPECT_EQ(o.out, invoke({"bench", path("annulus.pgm")}).out);
}

TEST_F(CliTest, SynthEvalInfoRoundTrip) {
  write_file(path("recipe.json"),
             R"({"image_size": 64, "spacing": 1.0, "r_inner": [6, 12], "wall_width": [3, 10],
                 "center_jitter": 3, "elastic_alpha": 60, "elastic_sigma": 6, "pwa_jitter": 2})");
  const Outcome s = invoke({"synth", "-n", "4", "-o", path("ds"), "--seed", "3", "--recipe",
                            path("recipe.json"), "--jobs", "2"});
  ASSERT_EQ(s.code, 0) << s.err;
  EXPECT_EQ(s.out.rfind("items=4 manifest=", 0), 0u);

  const Outcome e = invoke({"eval", "--pred", path("ds"), "--gt", path("ds"), "--manifest",
                            path("ds/manifest.csv"), "-o", path("report.json")});
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_NE(read_file(path("report.json")).find("\"mae\": \"0.000(0.000)\""), std::string::npos);
  EXPECT_NE(e.out.find("# mae 0.000(0.000) mse 0.000(0.000)"), std::string::npos) << e.out;

  const Outcome i = invoke({"info", path("ds/manifest.csv"), "--bin-width", "8"});
  ASSERT_EQ(i.code, 0) << i.err;
  EXPECT_EQ(i.out.rfind("bin_lo,bin_hi,count\n0,8,", 0), 0u) << i.out;

  EXPECT_EQ(invoke({"synth", "-n", "1", "-o", path("bad"), "--recipe", path("cfg_missing.json")}).code, 2);
}

TEST_F(CliTest, AhaWritesBullseye) {
  const std::string t = path("t.pfm");
  ASSERT_EQ(invoke({"measure", path("annulus.pgm"), "--spacing", "1", "-o", t}).code, 0);
  const Outcome o = invoke({"aha", "--maps", t, t, t, "--apex", "10", "-o", path("b.svg"), "--csv",
                            path("b.csv"), "--range", "0", "20"});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(read_file(path("b.csv")), o.out);
  const std::string svg = read_file(path("b.svg"));
  EXPECT_NE(svg.find("id=\"seg17\""), std::string::npos);
  EXPECT_EQ(o.out.rfind("segment_id,mean_thickness_mm\n", 0), 0u);

  const Outcome sq = invoke({"aha", "--maps", path("nope.pfm"), t, t, "--apex", "1", "-o", path("c.svg")});
  EXPECT_EQ(sq.code, 1);
}

}  // namespace
}  // namespace dwt::cli
