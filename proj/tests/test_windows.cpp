#include <cmath>
#include <numbers>

#include "doctest.h"
#include "lowlat/types.hpp"
#include "lowlat/windows.hpp"

using namespace lowlat;

TEST_CASE("tukey branch endpoints and flat region") {
  const auto g = make_analysis_window(WindowKind::tukey(1.0 / 16.0), 256);
  REQUIRE(g.size() == 256);
  CHECK(g[0] == 0.0);
  CHECK(g[16] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(g[128] == 1.0);
  for (std::size_t n = 17; n < 240; ++n) CHECK(g[n] == 1.0);
  // 1 ms of taper on each side of a 16 ms window at 16 kHz.
  CHECK(g[15] < 1.0);
  CHECK(g[241] < 1.0);
}

TEST_CASE("tukey is symmetric about N/2 on the tapers") {
  for (const double alpha : {1.0 / 16.0, 0.25, 0.5}) {
    const auto g = make_analysis_window(WindowKind::tukey(alpha), 256);
    for (std::size_t n = 1; n < 256; ++n) CHECK(g[n] == doctest::Approx(g[256 - n]).epsilon(1e-14));
  }
}

TEST_CASE("tukey matches the cosine taper evaluated directly") {
  const double alpha = 0.2;
  const std::size_t n_total = 200;
  const auto g = make_analysis_window(WindowKind::tukey(alpha), n_total);
  const double taper = alpha * static_cast<double>(n_total);
  for (std::size_t n = 0; n < n_total; ++n) {
    const double x = static_cast<double>(n);
    double want = 1.0;
    if (x <= taper) want = 0.5 - 0.5 * std::cos(std::numbers::pi * x / taper);
    if (x >= n_total - taper) want = 0.5 - 0.5 * std::cos(std::numbers::pi * (n_total - x) / taper);
    CHECK(g[n] == doctest::Approx(want).epsilon(1e-15));
  }
}

TEST_CASE("tukey alpha outside (0, 0.5] is rejected") {
  CHECK_THROWS_AS(make_analysis_window(WindowKind::tukey(0.0), 256), ValidationError);
  CHECK_THROWS_AS(make_analysis_window(WindowKind::tukey(0.6), 256), ValidationError);
}

TEST_CASE("rect is all ones") {
  const auto g = make_analysis_window(WindowKind::rect(), 256);
  for (std::size_t n = 0; n < 256; ++n) CHECK(g[n] == 1.0);
}

TEST_CASE("sqrt hann is periodic sin(pi n / N)") {
  const auto g = make_analysis_window(WindowKind::sqrt_hann(), 64);
  CHECK(g[0] == 0.0);
  CHECK(g[32] == doctest::Approx(1.0));
  for (std::size_t n = 0; n < 64; ++n) {
    CHECK(g[n] == doctest::Approx(std::sin(std::numbers::pi * static_cast<double>(n) / 64.0)));
  }
}

TEST_CASE("asqrthann joins 240 long-window samples with 16 short-window samples") {
  const auto g = make_analysis_window(WindowKind::asqrt_hann(), 256, 64);
  const auto longer = sqrt_hann_samples(480);
  const auto shorter = sqrt_hann_samples(32);
  for (std::size_t n = 0; n < 240; ++n) CHECK(g[n] == longer[n]);
  for (std::size_t n = 0; n < 16; ++n) CHECK(g[240 + n] == shorter[16 + n]);
  CHECK(g[240] == doctest::Approx(1.0));
  CHECK(g[255] < 0.1);
}

TEST_CASE("asqrthann needs an output window divisible by 4") {
  CHECK_THROWS_AS(make_analysis_window(WindowKind::asqrt_hann(), 256, 0), ValidationError);
  CHECK_THROWS_AS(make_analysis_window(WindowKind::asqrt_hann(), 256, 6), ValidationError);
  CHECK_NOTHROW(make_analysis_window(WindowKind::asqrt_hann(), 256, 32));
}

TEST_CASE("window kind parsing") {
  CHECK(WindowKind::parse("Tukey", 0.25).variant == WindowKind::Variant::Tukey);
  CHECK(WindowKind::parse("tukey", 0.25).tukey_alpha == 0.25);
  CHECK(WindowKind::parse("AsqrtHann").variant == WindowKind::Variant::AsqrtHann);
  CHECK(WindowKind::parse("sqrthann").name() == "sqrthann");
  CHECK(WindowKind::parse("rect").name() == "rect");
  CHECK_THROWS_AS(WindowKind::parse("hamming"), ValidationError);
}

TEST_CASE("synthesis window for rect") {
  const auto g = make_analysis_window(WindowKind::rect(), 256);
  const auto half = make_synthesis_window(g, 64, 32);
  REQUIRE(half.size() == 64);
  for (std::size_t n = 0; n < 64; ++n) CHECK(half[n] == 0.5);
  const auto unit = make_synthesis_window(g, 64, 64);
  for (std::size_t n = 0; n < 64; ++n) CHECK(unit[n] == 1.0);
}

TEST_CASE("synthesis window for default tukey matches pinned direct evaluation") {
  // Computed independently from the formula in double precision.
  const auto g = make_analysis_window(WindowKind::tukey(1.0 / 16.0), 256);
  const auto l = make_synthesis_window(g, 64, 32);
  CHECK(g[1] == doctest::Approx(0.009607359798384785).epsilon(1e-14));
  CHECK(l[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(l[63] == doctest::Approx(0.009606473107830077).epsilon(1e-14));
  for (std::size_t n = 0; n < 64; ++n) {
    const std::size_t m = n % 32;
    const double denom = g[192 + m] * g[192 + m] + g[224 + m] * g[224 + m];
    CHECK(l[n] == doctest::Approx(g[192 + n] / denom).epsilon(1e-14));
  }
}

TEST_CASE("synthesis window is scale covariant") {
  for (const auto kind : {WindowKind::tukey(), WindowKind::sqrt_hann(), WindowKind::asqrt_hann(),
                          WindowKind::rect()}) {
    const auto g = make_analysis_window(kind, 256, 64);
    const auto l = make_synthesis_window(g, 64, 32);
    const double c = 3.25;
    const auto lc = make_synthesis_window(g.scaled(c), 64, 32);
    for (std::size_t n = 0; n < 64; ++n) CHECK(lc[n] == doctest::Approx(l[n] / c).epsilon(1e-14));
  }
}

TEST_CASE("synthesis window rejects bad geometry") {
  const auto g = make_analysis_window(WindowKind::rect(), 256);
  CHECK_THROWS_AS(make_synthesis_window(g, 48, 32), ValidationError);
  CHECK_THROWS_AS(make_synthesis_window(g, 512, 32), ValidationError);
  CHECK_THROWS_AS(make_synthesis_window(g, 64, 0), ValidationError);
  // sqrtHann has g[0] = 0; A = N with B = N leaves a zero denominator at n = 0.
  const auto s = make_analysis_window(WindowKind::sqrt_hann(), 64);
  CHECK_THROWS_AS(make_synthesis_window(s, 64, 64), ValidationError);
}

TEST_CASE("cola residual separates matched and mismatched pairs") {
  const auto rect = make_analysis_window(WindowKind::rect(), 256);
  const auto tukey = make_analysis_window(WindowKind::tukey(), 256);
  const auto l_rect = make_synthesis_window(rect, 64, 32);
  const auto l_tukey = make_synthesis_window(tukey, 64, 32);
  CHECK(verify_cola(rect, l_rect, 256) < 1e-12);
  CHECK(verify_cola(tukey, l_tukey, 256) < 1e-12);
  CHECK(verify_cola(tukey, l_rect, 256) > 1e-3);
  const auto sqrt_hann = make_analysis_window(WindowKind::sqrt_hann(), 256);
  CHECK(verify_cola(sqrt_hann, l_rect, 256) > 1e-3);
}

TEST_CASE("cola holds for every kind and geometry") {
  struct Geometry {
    std::size_t n, a, b;
  };
  for (const auto geo : {Geometry{256, 64, 32}, Geometry{256, 32, 16}, Geometry{128, 64, 32},
                         Geometry{256, 64, 16}, Geometry{256, 256, 32}, Geometry{512, 128, 64}}) {
    for (const auto kind : {WindowKind::tukey(), WindowKind::sqrt_hann(), WindowKind::asqrt_hann(),
                            WindowKind::rect()}) {
      const auto g = make_analysis_window(kind, geo.n, geo.a);
      const auto l = make_synthesis_window(g, geo.a, geo.b);
      CAPTURE(kind.name());
      CAPTURE(geo.n);
      CAPTURE(geo.a);
      CAPTURE(geo.b);
      CHECK(verify_cola(g, l, geo.n) < kColaTolerance);
    }
  }
}
