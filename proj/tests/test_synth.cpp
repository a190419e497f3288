#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "dwt/io.hpp"
#include "dwt/streamline.hpp"
#include "dwt/synth.hpp"
#include "support.hpp"

namespace dwt {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("dwt_synth_" + name);
  fs::remove_all(p);
  return p;
}

ShapeRecipe small_recipe() {
  ShapeRecipe r;
  r.image_size = 64;
  r.spacing = 1.0;
  r.r_inner = {6.0, 12.0};
  r.wall_width = {3.0, 10.0};
  r.center_jitter = 3.0;
  r.elastic_alpha = 60.0;
  r.elastic_sigma = 6.0;
  r.pwa_jitter = 2.0;
  return r;
}

TEST(Rng, CounterAccessMatchesStream) {
  CounterRng a(123);
  const CounterRng b(123);
  for (std::uint64_t n = 0; n < 100; ++n) EXPECT_EQ(a.next(), b.at(n));
  EXPECT_NE(derive_seed(1, 2), derive_seed(2, 1));
  CounterRng u(9);
  for (int i = 0; i < 1000; ++i) {
    const double v = u.uniform(-2.0, 3.0);
    EXPECT_GE(v, -2.0);
    EXPECT_LT(v, 3.0);
  }
}

TEST(GenAnnulus, DeterministicPerSeed) {
  const ShapeRecipe r;
  EXPECT_EQ(gen_annulus(r, 5), gen_annulus(r, 5));
  EXPECT_NE(gen_annulus(r, 5), gen_annulus(r, 6));
}

TEST(GenAnnulus, FixedRecipeMeasuresItsWidth) {
  ShapeRecipe r;
  r.r_inner = {20.0, 20.0};
  r.wall_width = {10.0, 10.0};
  r.center_jitter = 0.0;
  const BinaryMask m = gen_annulus(r, 1);
  const double mean = test::wall_mean(measure(m, SolverConfig{}), m);
  EXPECT_NEAR(mean, 10.0 * r.spacing, 0.5 * r.spacing);
}

TEST(GenAnnulus, OversizedRecipeIsInfeasible) {
  ShapeRecipe r;
  r.r_inner = {60.0, 70.0};
  r.wall_width = {20.0, 30.0};
  try {
    gen_annulus(r, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::RecipeInfeasible);
  }
  ShapeRecipe empty;
  empty.r_inner = {10.0, 5.0};
  EXPECT_THROW(empty.validate(), Error);
}

TEST(ElasticTransform, ZeroAlphaIsIdentity) {
  const BinaryMask m = test::reference_annulus();
  EXPECT_EQ(elastic_transform(m, 0.0, 4.0, 3), m);
}

TEST(ElasticTransform, EmptyStaysEmpty) {
  const BinaryMask m(GridGeometry{32, 32, 1.0});
  EXPECT_EQ(elastic_transform(m, 20.0, 4.0, 3).wall_count(), 0u);
}

TEST(ElasticTransform, ModerateWarpKeepsTopology) {
  const BinaryMask m = test::reference_annulus();
  const BinaryMask w = elastic_transform(m, 8.0, 6.0, 11);
  EXPECT_EQ(label_regions(w).cavity_count, 1);
  EXPECT_EQ(w, elastic_transform(m, 8.0, 6.0, 11));
  EXPECT_THROW(elastic_transform(m, 1.0, 0.0, 0), Error);
}

TEST(PiecewiseAffine, ZeroJitterIsIdentity) {
  const BinaryMask m = test::reference_annulus();
  EXPECT_EQ(piecewise_affine(m, 4, 0.0, 1), m);
}

TEST(PiecewiseAffine, SmallJitterKeepsTopology) {
  const BinaryMask m = test::reference_annulus();
  const BinaryMask w = piecewise_affine(m, 4, 4.0, 7);
  EXPECT_EQ(w, piecewise_affine(m, 4, 4.0, 7));
  EXPECT_NE(w, m);
  EXPECT_EQ(label_regions(w).cavity_count, 1);
}

TEST(PiecewiseAffine, HugeJitterIsDegenerate) {
  try {
    piecewise_affine(test::reference_annulus(), 4, 1000.0, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TransformDegenerate);
  }
}

TEST(GenSpecial, Shapes) {
  SpecialParams p;
  p.image_size = 100;
  const SpecialShapeResult sq = gen_special(SpecialShape::square_annulus, p);
  EXPECT_EQ(label_regions(sq.mask).cavity_count, 1);
  EXPECT_FALSE(sq.boundaries.has_value());

  p.width = 30.0;
  const SpecialShapeResult cyl = gen_special(SpecialShape::thick_cylinder, p);
  EXPECT_EQ(label_regions(cyl.mask).cavity_count, 1);

  p.width = 10.0;
  const SpecialShapeResult two = gen_special(SpecialShape::two_segments, p);
  EXPECT_EQ(label_regions(two.mask).cavity_count, 0);
  ASSERT_TRUE(two.boundaries.has_value());
  int inner = 0, outer = 0;
  for (BoundaryLabel l : two.boundaries->pixels()) {
    inner += l == BoundaryLabel::inner;
    outer += l == BoundaryLabel::outer;
  }
  EXPECT_GT(inner, 0);
  EXPECT_GT(outer, 0);

  p.width = 10.0;
  EXPECT_THROW(gen_special(SpecialShape::thick_cylinder, p), Error);
  p.side = 200;
  EXPECT_THROW(gen_special(SpecialShape::square_annulus, p), Error);
  EXPECT_EQ(parse_special_shape("two_segments"), SpecialShape::two_segments);
  EXPECT_FALSE(parse_special_shape("triangle").has_value());
}

TEST(Manifest, RoundTrip) {
  DatasetManifest m;
  m.entries.push_back({"000000", "masks/000000.pgm", "thickness/000000.pfm", 12.5, 99});
  m.entries.push_back({"000001", "masks/000001.pgm", "thickness/000001.pfm", 3.25, 7});
  const std::string csv = encode_manifest(m);
  EXPECT_EQ(csv.rfind("id,mask,thickness,max_thickness_mm,seed\n", 0), 0u);
  const DatasetManifest back = parse_manifest(csv);
  ASSERT_EQ(back.entries.size(), 2u);
  EXPECT_EQ(back.entries[1].id, "000001");
  EXPECT_EQ(back.entries[1].seed, 7u);
  EXPECT_DOUBLE_EQ(back.entries[0].max_thickness_mm, 12.5);
  EXPECT_THROW(parse_manifest("bad header\n"), Error);
  EXPECT_THROW(parse_manifest("id,mask,thickness,max_thickness_mm,seed\na,b\n"), Error);
}

TEST(GenDataset, EmptyCount) {
  const fs::path dir = scratch("empty");
  const DatasetManifest m = gen_dataset(0, small_recipe(), dir, 1, SolverConfig{});
  EXPECT_TRUE(m.entries.empty());
  EXPECT_FALSE(fs::exists(dir / "masks"));
  EXPECT_EQ(parse_manifest(read_file(dir / "manifest.csv")).entries.size(), 0u);
}

TEST(GenDataset, ReproducibleAndScheduleIndependent) {
  const fs::path a = scratch("a");
  const fs::path b = scratch("b");
  const DatasetManifest ma = gen_dataset(12, small_recipe(), a, 77, SolverConfig{}, 1);
  const DatasetManifest mb = gen_dataset(12, small_recipe(), b, 77, SolverConfig{}, 3);
  EXPECT_EQ(read_file(a / "manifest.csv"), read_file(b / "manifest.csv"));
  for (const ManifestEntry& e : ma.entries) {
    EXPECT_EQ(read_file(a / e.mask_path), read_file(b / e.mask_path));
    EXPECT_EQ(read_file(a / e.thickness_path), read_file(b / e.thickness_path));

    // Thickness positive exactly on the wall, one cavity per mask.
    const BinaryMask mask = load_mask(read_file(a / e.mask_path));
    const Image<float> t = parse_pfm(read_file(a / e.thickness_path));
    EXPECT_EQ(label_regions(mask).cavity_count, 1);
    for (std::size_t i = 0; i < t.size(); ++i) EXPECT_EQ(t[i] > 0.0f, mask.is_wall(i));
  }
  std::set<std::string> ids;
  for (const ManifestEntry& e : ma.entries) ids.insert(e.id);
  EXPECT_EQ(ids.size(), ma.entries.size());
}

TEST(GenDataset, ImpossibleRecipeAborts) {
  ShapeRecipe r = small_recipe();
  r.max_thickness_mm = 0.5;  // nothing fits under this cap
  try {
    gen_dataset(2, r, scratch("cap"), 1, SolverConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::RecipeInfeasible);
  }
}

}  // namespace
}  // namespace dwt
