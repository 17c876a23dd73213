#include <doctest.h>

#include <cmath>
#include <random>

#include "maskwarp/error.hpp"
#include "maskwarp/mask_ops.hpp"
#include "maskwarp/metrics.hpp"
#include "maskwarp/optimizer.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace maskwarp;

namespace {

ImageBuffer grey(int h, int w) { return ImageBuffer(h, w, 3, 0.5); }

bool segments_non_increasing(const WarpResult& r) {
  for (const auto& round : r.traces) {
    for (std::size_t i = 1; i < round.size(); ++i) {
      if (round[i].level == round[i - 1].level && round[i].total > round[i - 1].total) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("schedule defaults and validation") {
  WarpSchedule s;
  CHECK(s.rounds() == 3);
  CHECK(s.alpha == std::vector<double>{0.1, 0.2, 1.0});
  CHECK(s.beta == std::vector<double>{0.1, 0.05, 0.01});
  CHECK(s.gamma == 1.0);
  CHECK(s.pyramid_levels == 3);
  CHECK(s.iters_per_level == 300);
  CHECK(s.init == InitMode::Centroid);
  CHECK(s.validate().empty());

  WarpSchedule flipped;
  flipped.alpha = {1.0, 0.2, 0.1};
  flipped.beta = {0.01, 0.05, 0.1};
  CHECK(flipped.validate().size() == 2);

  WarpSchedule bad;
  bad.beta = {0.1};
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = WarpSchedule{};
  bad.edge_kernel = 4;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = WarpSchedule{};
  bad.alpha[1] = -1.0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = WarpSchedule{};
  bad.step_size = 0.0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);

  CHECK(parse_init_mode("correlation") == InitMode::Correlation);
  CHECK(to_string(InitMode::Zero) == "zero");
  CHECK_THROWS_AS(parse_init_mode("random"), InvalidArgument);
}

TEST_CASE("positional encoding") {
  const auto pe = positional_encoding(5, 7, 16);
  CHECK(pe(0, 0, 0) == 0.0);
  CHECK(pe(0, 0, 1) == 1.0);
  CHECK(pe(1, 0, 0) == doctest::Approx(0.8414709848).epsilon(1e-9));
  // pos = j * w8 + i: moving one column advances pos by the grid width.
  CHECK(pe(0, 1, 0) == doctest::Approx(std::sin(7.0)).epsilon(1e-12));
  CHECK(pe(2, 3, 5) == doctest::Approx(std::cos((3 * 7 + 2) / std::pow(10000.0, 4.0 / 16))).epsilon(1e-12));
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 7; ++j) {
      for (int k = 0; k < 16; ++k) {
        CHECK(pe(i, j, k) >= -1.0);
        CHECK(pe(i, j, k) <= 1.0);
      }
    }
  }
  CHECK_THROWS_AS(positional_encoding(2, 2, 7), InvalidArgument);
}

TEST_CASE("centroid_init") {
  const BinaryMask s = testing::star(64, 64, 28, 30, 14, 7, 5);
  CHECK(centroid_init(s, s) == WarpField(64, 64));

  const BinaryMask t = testing::translate(s, 10, 5);
  const WarpField f = centroid_init(s, t);
  CHECK(f.dx(0, 0) == doctest::Approx(-10.0).epsilon(1e-12));
  CHECK(f.dy(0, 0) == doctest::Approx(-5.0).epsilon(1e-12));
  CHECK(binarize(warp_apply(f, SoftMask::from(s))) == t);

  CHECK_THROWS_AS(centroid_init(BinaryMask(64, 64, false), t), InvalidArgument);
  CHECK_THROWS_AS(centroid_init(s, BinaryMask(64, 64, false)), InvalidArgument);
}

TEST_CASE("correlation matching") {
  const SoftMask star = SoftMask::from(testing::star(128, 128, 60, 62, 40, 18, 5));
  CHECK(correlation_match(star, star) == WarpField(16, 16));
  CHECK(correlation_init(star, star) == WarpField(128, 128));

  CHECK(correlation_init(SoftMask(64, 64, 0.0), SoftMask(64, 64, 0.0)) == WarpField(64, 64));
  CHECK_THROWS_AS(correlation_init(SoftMask(60, 64, 0.0), SoftMask(60, 64, 0.0)), InvalidArgument);

  struct Shifted {
    BinaryMask mask;
    int dx, dy;
  };
  const Shifted cases[] = {{testing::disc(128, 128, 50, 54, 24), 24, 16},
                           {testing::letter(128, 128, 'L', 20, 20, 60, 80, 14), 40, -8},
                           {testing::disc(128, 128, 60, 64, 46), 8, 0},
                           {testing::rect(128, 128, 10, 10, 100, 90), 16, 24}};
  for (const auto& c : cases) {
    const BinaryMask t = testing::translate(c.mask, c.dx, c.dy);
    const WarpField raw = correlation_match(SoftMask::from(c.mask), SoftMask::from(t));
    const WarpField filtered = median_filter3(raw);
    const SoftMask cells = area_downsample(SoftMask::from(t), 8);
    for (int r = 0; r < 16; ++r) {
      for (int q = 0; q < 16; ++q) {
        if (cells(r, q) == 0.0) continue;
        CHECK(raw.dx(r, q) == -c.dx / 8);
        CHECK(raw.dy(r, q) == -c.dy / 8);
        CHECK(filtered.dx(r, q) == -c.dx / 8);
        CHECK(filtered.dy(r, q) == -c.dy / 8);
      }
    }
  }
}

TEST_CASE("median_filter3 removes an isolated outlier") {
  WarpField f = WarpField::constant(5, 5, 1.0, 2.0);
  f.dx(2, 2) = 40.0;
  f.dy(0, 0) = -9.0;
  CHECK(median_filter3(f) == WarpField::constant(5, 5, 1.0, 2.0));
}

TEST_CASE("optimize leaves matched masks alone") {
  const BinaryMask m = testing::star(64, 64, 30, 32, 22, 10, 5);
  WarpSchedule s;
  s.init = InitMode::Zero;
  const WarpResult r = optimize(grey(64, 64), m, m, s);
  REQUIRE(r.fields.size() == 3);
  CHECK(r.traces[0].front().total == doctest::Approx(0.0).epsilon(1e-12));
  for (double v : r.fields.back().data()) CHECK(std::abs(v) < 1e-9);
  CHECK(iou(r.final_warped_mask, m) == 1.0);
  CHECK(r.final_warped_image == grey(64, 64));
}

TEST_CASE("optimize recovers a translated square") {
  const BinaryMask s = testing::rect(128, 128, 30, 30, 70, 70);
  const BinaryMask t = testing::translate(s, 16, 16);
  const WarpResult r = optimize(grey(128, 128), s, t, WarpSchedule{});
  CHECK(iou(r.final_warped_mask, t) >= 0.99);
  CHECK(segments_non_increasing(r));
}

TEST_CASE("optimize on disc to star") {
  const BinaryMask s = testing::disc(128, 128, 64, 64, 38);
  const BinaryMask t = testing::star(128, 128, 64, 66, 54, 28, 5);
  const WarpSchedule schedule;
  const WarpResult r = optimize(testing::textured(s, 11.0, 0.0, 3), s, t, schedule);
  CHECK(iou(r.final_warped_mask, t) >= 0.90);
  CHECK(segments_non_increasing(r));
  REQUIRE(r.round_iou.size() == 3);
  for (std::size_t i = 1; i < r.round_iou.size(); ++i) CHECK(r.round_iou[i] >= r.round_iou[i - 1]);
  for (const auto& round : r.traces) {
    for (const auto& b : round) CHECK(b.total == doctest::Approx(b.recomputed_total()).epsilon(1e-12));
  }
  CHECK(r.smoothness_mask == smoothness_mask(s, t, 9));

  const WarpResult again = optimize(testing::textured(s, 11.0, 0.0, 3), s, t, schedule);
  CHECK(again.fields == r.fields);

  WarpSchedule free = schedule;
  free.beta = {0.0, 0.0, 0.0};
  const WarpResult chaotic = optimize(testing::textured(s, 11.0, 0.0, 3), s, t, free);
  CHECK(smooth_term(chaotic.fields.back(), r.smoothness_mask) > smooth_term(r.fields.back(), r.smoothness_mask));
}

TEST_CASE("correlation initialization runs end to end") {
  const BinaryMask s = testing::disc(128, 128, 48, 52, 26);
  const BinaryMask t = testing::translate(s, 24, 16);
  WarpSchedule sch;
  sch.init = InitMode::Correlation;
  const WarpResult r = optimize(grey(128, 128), s, t, sch);
  CHECK(iou(r.final_warped_mask, t) >= 0.97);
}

TEST_CASE("optimize rejects bad inputs") {
  const BinaryMask m = testing::disc(32, 32, 16, 16, 8);
  CHECK_THROWS_AS(optimize(grey(32, 32), BinaryMask(32, 32, false), m, WarpSchedule{}), InvalidArgument);
  CHECK_THROWS_AS(optimize(grey(32, 32), m, BinaryMask(32, 32, false), WarpSchedule{}), InvalidArgument);
  CHECK_THROWS_AS(optimize(grey(32, 31), m, m, WarpSchedule{}), InvalidArgument);
  CHECK_THROWS_AS(optimize(grey(32, 32), m, BinaryMask(31, 32, true), WarpSchedule{}), InvalidArgument);
}

TEST_CASE("optimize_rgb lowers the pixel objective") {
  const BinaryMask s = testing::disc(64, 64, 28, 30, 14);
  const BinaryMask t = testing::translate(s, 6, 4);
  const ImageBuffer si = testing::textured(s, 11.0, 0.0, 1);
  const ImageBuffer ti = warp_apply(WarpField::constant(64, 64, -6.0, -4.0), si);
  const WarpResult r = optimize_rgb(si, ti, s, t, WarpSchedule{});
  // The finest level works on images blurred with the softening sigma.
  const ImageBuffer bs = gaussian_blur(si, 2.0), bt = gaussian_blur(ti, 2.0);
  CHECK(rgb_term(r.fields.back(), bs, bt) < rgb_term(centroid_init(s, t), bs, bt));
  CHECK(segments_non_increasing(r));
  CHECK_THROWS_AS(optimize_rgb(si, ImageBuffer(64, 64, 1, 0.0), s, t, WarpSchedule{}), InvalidArgument);
}

TEST_CASE("optimize_regions keeps labelled parts apart") {
  // A disc split into left and right labels, moved as a whole: each label
  // has to land on its own counterpart.
  const int n = 64;
  auto labels_for = [&](int dx) {
    std::vector<std::uint32_t> v(n * n, 0);
    const BinaryMask d = testing::translate(testing::disc(n, n, 28, 32, 14), dx, 0);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        if (d(r, c)) v[r * n + c] = c < 28 + dx ? 1 : 2;
      }
    }
    return LabelMask(n, n, v);
  };
  const LabelMask src = labels_for(0), tgt = labels_for(6);
  const WarpResult r = optimize_regions(grey(n, n), src, tgt, WarpSchedule{});
  const BinaryMask fg = mask_not(tgt.indicator(0));
  CHECK(iou(r.final_warped_mask, fg) >= 0.97);
  for (std::uint32_t label : {1u, 2u}) {
    const BinaryMask warped = binarize(warp_apply(r.fields.back(), SoftMask::from(src.indicator(label))));
    CHECK(iou(warped, tgt.indicator(label)) >= 0.9);
  }

  std::vector<std::uint32_t> only_one(n * n, 0);
  only_one[100] = 1;
  CHECK_THROWS_AS(optimize_regions(grey(n, n), src, LabelMask(n, n, only_one), WarpSchedule{}), InvalidArgument);
}
