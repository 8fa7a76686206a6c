#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "dfd/blur_math.hpp"
#include "dfd/edges.hpp"
#include "dfd/experiment.hpp"

using namespace dfd;
using namespace dfd::edges;
using experiment::render_step_edge;

namespace {

constexpr double kPi = std::numbers::pi;

GrayImage corner_image(int n, int c) {
  Raster<double> r(n, n, 0.2);
  for (int y = c; y < n; ++y)
    for (int x = c; x < n; ++x) r(x, y) = 0.8;
  return GrayImage(std::move(r));
}

}  // namespace

TEST(Canny, SingleLineOnVerticalEdge) {
  const auto img = render_step_edge(40, 30, 0.0, 1.0, 20, 15);
  const auto mask = canny(img);
  for (int y = 3; y < 27; ++y) {
    EXPECT_EQ(mask(20, y), 1) << y;
    EXPECT_EQ(mask(19, y), 0);
    EXPECT_EQ(mask(21, y), 0);
  }
  int count = 0;
  for (auto v : mask.values()) count += v;
  EXPECT_LE(count, 30);
}

TEST(Canny, FlatImageHasNoEdges) {
  const auto mask = canny(GrayImage::filled(20, 20, 0.4));
  for (auto v : mask.values()) EXPECT_EQ(v, 0);
}

TEST(Canny, Errors) {
  EXPECT_THROW(canny(GrayImage::filled(6, 20, 0.0)), ValidationError);
  CannyParams bad;
  bad.low_ratio = 0.3;
  EXPECT_THROW(canny(GrayImage::filled(20, 20, 0.0), bad), ValidationError);
}

TEST(SamplingAxis, NearestAxisAndScale) {
  auto a = sampling_axis(0.0, SamplingMode::nearest_axis);
  EXPECT_EQ(a.ux, 1.0);
  EXPECT_EQ(a.uy, 0.0);
  EXPECT_EQ(a.scale, 1.0);
  a = sampling_axis(kPi / 2, SamplingMode::nearest_axis);
  EXPECT_EQ(a.ux, 0.0);
  EXPECT_EQ(a.uy, 1.0);
  a = sampling_axis(-kPi, SamplingMode::nearest_axis);
  EXPECT_EQ(a.ux, -1.0);
  a = sampling_axis(30.0 * kDegree, SamplingMode::nearest_axis);
  EXPECT_EQ(a.ux, 1.0);
  EXPECT_NEAR(a.scale, std::cos(30.0 * kDegree), 1e-15);
  a = sampling_axis(-100.0 * kDegree, SamplingMode::nearest_axis);
  EXPECT_EQ(a.uy, -1.0);
  EXPECT_NEAR(a.scale, std::cos(10.0 * kDegree), 1e-15);
  const auto t = sampling_axis(30.0 * kDegree, SamplingMode::true_normal);
  EXPECT_NEAR(t.ux, std::cos(30.0 * kDegree), 1e-15);
  EXPECT_EQ(t.scale, 1.0);
}

TEST(Angles, WrapAndAxialSpread) {
  EXPECT_NEAR(wrap_angle(3 * kPi / 2), -kPi / 2, 1e-15);
  EXPECT_NEAR(wrap_angle(-3 * kPi / 2), kPi / 2, 1e-15);
  EXPECT_NEAR(wrap_angle(kPi), -kPi, 1e-15);
  EXPECT_NEAR(axial_circular_std({0.3, 0.3, 0.3}), 0.0, 1e-7);
  EXPECT_NEAR(axial_circular_std({0.3, 0.3 + kPi, 0.3 - kPi}), 0.0, 1e-7);
  EXPECT_GT(axial_circular_std({0.0, kPi / 2}), 30.0 * kDegree);
}

TEST(Orientation, RecoversRenderedNormal) {
  for (double deg : {0.0, 17.0, 30.0, 45.0, 90.0, 135.0, -60.0, 180.0}) {
    const auto img = render_step_edge(41, 41, deg * kDegree, 1.5, 20, 20);
    const auto n = edge_orientation(img, 20, 20, 3);
    ASSERT_TRUE(n.has_value());
    EXPECT_NEAR(wrap_angle(*n - deg * kDegree), 0.0, 1.01 * kDegree) << deg;
  }
  EXPECT_FALSE(edge_orientation(GrayImage::filled(20, 20, 0.5), 10, 10, 3).has_value());
  EXPECT_THROW(edge_orientation(GrayImage::filled(20, 20, 0.5), 1, 10, 3), DomainError);
}

TEST(Validate, AcceptsCleanEdge) {
  const auto img = render_step_edge(40, 40, 0.0, 1.0, 20, 20);
  const EdgeAnalyzer an(img, EdgeConfig{});
  const auto p = an.validate(20, 20);
  EXPECT_TRUE(p.valid);
  EXPECT_FALSE(p.reject_reason.has_value());
  EXPECT_NEAR(p.normal_angle, 0.0, 1e-12);
}

TEST(Validate, RejectsNearBorder) {
  const auto img = render_step_edge(40, 40, 0.0, 1.0, 20, 20);
  const EdgeAnalyzer an(img, EdgeConfig{});
  const auto p = an.validate(20, 1);
  EXPECT_FALSE(p.valid);
  EXPECT_EQ(p.reject_reason, RejectReason::out_of_bounds);
}

TEST(Validate, RejectsCorner) {
  const auto img = corner_image(40, 20);
  const EdgeAnalyzer an(img, EdgeConfig{});
  bool multi = false;
  for (int d = 0; d <= 1; ++d) {
    const auto p = an.validate(20 + d, 20 + d);
    if (p.reject_reason == RejectReason::multi_orientation) multi = true;
    EXPECT_FALSE(p.valid);
  }
  EXPECT_TRUE(multi);
}

TEST(Validate, RejectsLowContrast) {
  const auto img = render_step_edge(40, 40, 0.0, 1.0, 20, 20, 0.5, 0.51);
  const EdgeAnalyzer an(img, EdgeConfig{});
  ASSERT_EQ(an.mask()(20, 20), 1);
  const auto p = an.validate(20, 20);
  EXPECT_FALSE(p.valid);
  EXPECT_EQ(p.reject_reason, RejectReason::low_contrast);
}

TEST(Validate, RejectsOffCentreEdge) {
  const auto img = render_step_edge(40, 40, 0.0, 1.0, 20.5, 20);
  const EdgeAnalyzer an(img, EdgeConfig{});
  const int x = an.mask()(20, 20) ? 20 : 21;
  ASSERT_EQ(an.mask()(x, 20), 1);
  const auto p = an.validate(x, 20);
  EXPECT_FALSE(p.valid);
  EXPECT_EQ(p.reject_reason, RejectReason::off_center);
}

TEST(Validate, NoSupportWithoutMask) {
  const auto img = render_step_edge(40, 40, 0.0, 1.0, 20, 20);
  const EdgeAnalyzer an(img, EdgeMask(40, 40, 0), EdgeConfig{});
  EXPECT_EQ(an.validate(20, 20).reject_reason, RejectReason::no_edge);
  EXPECT_THROW(EdgeAnalyzer(img, EdgeMask(39, 40, 0), EdgeConfig{}), ValidationError);
}

TEST(Validate, PointWrapper) {
  const auto img = render_step_edge(40, 40, 0.0, 1.0, 20, 20);
  const auto mask = canny(img);
  EXPECT_TRUE(validate_point(mask, img, 20, 20, 3, 15.0 * kDegree, 0.02).valid);
  EXPECT_EQ(validate_point(mask, img, 20, 20, 3, 15.0 * kDegree, 2.0).reject_reason,
            RejectReason::low_contrast);
}

TEST(Measure, ExactOnAxisAlignedEdges) {
  for (double deg : {0.0, 90.0, 180.0, -90.0})
    for (double s : {0.6, 1.0, 2.0, 4.0, 8.0}) {
      const auto img = render_step_edge(61, 61, deg * kDegree, s, 30, 30);
      const auto sample = measure_mgd_at(img, EdgePoint::accepted(30, 30, deg * kDegree));
      EXPECT_NEAR(sample.value, blur::mgd_forward(s), 1e-12) << deg << " " << s;
      EXPECT_NEAR(sample.axis_scale, 1.0, 1e-15);
    }
}

TEST(Measure, TiltedEdgeScaledBackToNormalBlur) {
  const blur::MonotoneInterval interval(blur::MeasureKind::mg_discrete(), 0.2, 20.0);
  for (double deg : {30.0, 45.0})
    for (double s : {1.0, 3.0}) {
      const auto img = render_step_edge(61, 61, deg * kDegree, s, 30, 30);
      const auto sample = measure_mgd_at(img, EdgePoint::accepted(30, 30, deg * kDegree));
      const double sigma = blur::invert_measure(interval, sample.value).sigma * sample.axis_scale;
      EXPECT_NEAR(sigma, s, 1e-6) << deg << " " << s;
    }
}

TEST(Measure, Errors) {
  const auto img = render_step_edge(20, 20, 0.0, 1.0, 10, 10);
  EXPECT_THROW(measure_mgd_at(img, EdgePoint::rejected(10, 10, RejectReason::no_edge)),
               ValidationError);
  try {
    measure_mgd_at(img, EdgePoint::accepted(1, 10, 0.0));
    FAIL();
  } catch (const MeasureError& e) {
    EXPECT_EQ(e.reason(), RejectReason::out_of_bounds);
  }
  try {
    measure_mgd_at(GrayImage::filled(20, 20, 0.3), EdgePoint::accepted(10, 10, 0.0));
    FAIL();
  } catch (const MeasureError& e) {
    EXPECT_EQ(e.reason(), RejectReason::low_contrast);
  }
}

TEST(RejectReason, Names) {
  EXPECT_STREQ(to_string(RejectReason::off_center), "OFF_CENTER");
  EXPECT_STREQ(to_string(RejectReason::multi_orientation), "MULTI_ORIENTATION");
}
