#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "lowlat/types.hpp"
#include "lowlat/dft.hpp"
#include "lowlat/framing.hpp"
#include "support.hpp"

using namespace lowlat;

namespace {

std::vector<Complex> naive_dft(const std::vector<double>& x, std::size_t n) {
  std::vector<Complex> out(n / 2 + 1);
  for (std::size_t f = 0; f < out.size(); ++f) {
    Complex acc(0.0, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double phase = -2.0 * std::numbers::pi * static_cast<double>(f * i) / static_cast<double>(n);
      acc += x[i] * Complex(std::cos(phase), std::sin(phase));
    }
    out[f] = acc;
  }
  return out;
}

struct Geometry {
  std::size_t n, a, b;
};

double round_trip_error(const WindowKind& kind, const FrameParams& p, const Signal& x) {
  const auto g = make_analysis_window(kind, p.iws, p.ows);
  const auto l = make_synthesis_window(g, p.ows, p.hop);
  const auto frames = analyze_signal(x, g, p, frames_to_cover(static_cast<std::int64_t>(x.size()), p));
  const auto y = overlap_add_frames(frames, l, p, x.size());
  double err = 0.0;
  double ref = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    err += (y[i] - x[i]) * (y[i] - x[i]);
    ref += x[i] * x[i];
  }
  return std::sqrt(err / ref);
}

}  // namespace

TEST_CASE("frame params defaults and derived values") {
  const FrameParams p;
  CHECK(p.sample_rate == 16000);
  CHECK(p.iws == 256);
  CHECK(p.ows == 64);
  CHECK(p.hop == 32);
  CHECK(p.n_dft == 256);
  CHECK(p.frames_ahead == 0);
  CHECK(p.bins() == 129);
  CHECK(FrameParams::from_ms(16000, 16, 4, 2, 256) == p);
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("frame params validation") {
  FrameParams p;
  p.ows = 48;
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("divisible by hop"), ValidationError);
  p = FrameParams{};
  p.ows = 512;
  p.iws = 256;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = FrameParams{};
  p.n_dft = 128;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = FrameParams{};
  p.n_dft = 257;
  p.iws = 256;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = FrameParams{};
  p.frames_ahead = -1;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  CHECK_THROWS_AS(FrameParams::from_ms(16000, 16, 4, 2.01, 256), ValidationError);
}

TEST_CASE("real dft matches a naive transform and inverts") {
  for (const std::size_t n : {8u, 64u, 256u, 250u}) {
    RealDft dft(n);
    const auto x = testing::white_noise(n - 3, 11);
    std::vector<Complex> spec(dft.bins());
    dft.forward(x, spec);
    const auto want = naive_dft(x, n);
    for (std::size_t f = 0; f < spec.size(); ++f) {
      CHECK(std::abs(spec[f] - want[f]) < 1e-9);
    }
    std::vector<double> back(n);
    dft.inverse(spec, back);
    for (std::size_t i = 0; i < n; ++i) {
      const double expect = i < x.size() ? x[i] : 0.0;
      CHECK(std::abs(back[i] - expect) < 1e-12);
    }
  }
}

TEST_CASE("real dft copies are independent") {
  RealDft a(64);
  RealDft b = a;
  const auto x = testing::white_noise(64, 3);
  std::vector<Complex> sa(a.bins()), sb(b.bins());
  a.forward(x, sa);
  b.forward(x, sb);
  for (std::size_t f = 0; f < sa.size(); ++f) CHECK(sa[f] == sb[f]);
}

TEST_CASE("first frame holds the primed zeros and the first hop") {
  const FrameParams p;
  const auto g = make_analysis_window(WindowKind::tukey(), p.iws, p.ows);
  StreamAnalyzer analyzer(p, g, 1);
  const auto x = testing::white_noise(32, 5);
  const auto frames = analyzer.push(std::span<const double>(x));
  REQUIRE(frames.size() == 1);
  CHECK(frames[0].frame_index == 0);
  CHECK(frames[0].channels() == 1);
  CHECK(frames[0].frequencies() == 129);

  RealDft dft(256);
  const auto bins = frames[0].channel(0).bins;
  std::vector<double> time(256);
  dft.inverse(bins, time);
  for (std::size_t n = 0; n < 224; ++n) CHECK(std::abs(time[n]) < 1e-13);
  for (std::size_t n = 0; n < 32; ++n) {
    CHECK(time[224 + n] == doctest::Approx(g[224 + n] * x[n]).epsilon(1e-12));
  }
}

TEST_CASE("analyzer emits one frame per complete hop") {
  const FrameParams p;
  const auto g = make_analysis_window(WindowKind::rect(), p.iws, p.ows);
  StreamAnalyzer analyzer(p, g, 2);
  CHECK(analyzer.push(MultiSignal{Signal{}, Signal{}}).empty());
  const auto x = testing::white_noise(2, 100, 9);
  std::size_t total = 0;
  MultiSignal piece(2);
  for (std::size_t start = 0; start < 100; start += 7) {
    const std::size_t n = std::min<std::size_t>(7, 100 - start);
    for (std::size_t c = 0; c < 2; ++c) piece[c].assign(x[c].begin() + start, x[c].begin() + start + n);
    total += analyzer.push(piece).size();
  }
  CHECK(total == 3);
  CHECK(analyzer.frames_emitted() == 3);
  CHECK(analyzer.samples_ingested() == 100);
  CHECK_THROWS_AS(analyzer.push(MultiSignal{Signal(3), Signal(2)}), ValidationError);
  CHECK_THROWS_AS(analyzer.push(MultiSignal{Signal(3)}), ValidationError);
}

TEST_CASE("16 + 16 samples equals 32 at once") {
  const FrameParams p;
  const auto g = make_analysis_window(WindowKind::sqrt_hann(), p.iws, p.ows);
  const auto x = testing::white_noise(32, 21);
  StreamAnalyzer one(p, g, 1), two(p, g, 1);
  const auto a = one.push(std::span<const double>(x));
  CHECK(two.push(std::span<const double>(x).first(16)).empty());
  const auto b = two.push(std::span<const double>(x).subspan(16));
  REQUIRE(a.size() == 1);
  REQUIRE(b.size() == 1);
  CHECK((a[0].bins.array() == b[0].bins.array()).all());
}

TEST_CASE("chunking never changes analysis output") {
  const FrameParams p;
  const auto g = make_analysis_window(WindowKind::tukey(), p.iws, p.ows);
  const auto x = testing::white_noise(3000, 4);
  StreamAnalyzer whole(p, g, 1);
  const auto ref = whole.push(std::span<const double>(x));
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 5; ++trial) {
    StreamAnalyzer chunked(p, g, 1);
    std::vector<MultiSpectrumFrame> got;
    std::size_t pos = 0;
    while (pos < x.size()) {
      const std::size_t n = std::min<std::size_t>(rng() % 97, x.size() - pos);
      auto frames = chunked.push(std::span<const double>(x).subspan(pos, n));
      got.insert(got.end(), frames.begin(), frames.end());
      pos += n;
    }
    REQUIRE(got.size() == ref.size());
    for (std::size_t t = 0; t < got.size(); ++t) {
      CHECK(got[t].frame_index == static_cast<std::int64_t>(t));
      CHECK((got[t].bins.array() == ref[t].bins.array()).all());
    }
  }
}

TEST_CASE("dc and nyquist bins are real for real input") {
  const FrameParams p;
  const auto g = make_analysis_window(WindowKind::tukey(), p.iws, p.ows);
  const auto x = testing::white_noise(1000, 8);
  for (const auto& f : analyze_signal(x, g, p, 20)) {
    CHECK(std::abs(f.bins.front().imag()) < 1e-12);
    CHECK(std::abs(f.bins.back().imag()) < 1e-12);
  }
}

TEST_CASE("analysis zero-pads on the right when iws < n_dft") {
  FrameParams p;
  p.n_dft = 512;
  const auto g = make_analysis_window(WindowKind::rect(), p.iws, p.ows);
  StreamAnalyzer analyzer(p, g, 1);
  Signal x(32, 0.0);
  x[31] = 1.0;
  const auto frames = analyzer.push(std::span<const double>(x));
  REQUIRE(frames.size() == 1);
  REQUIRE(frames[0].frequencies() == 257);
  // Impulse at position 255 of a 512-point frame.
  for (Eigen::Index f = 0; f < 257; ++f) {
    const double phase = -2.0 * std::numbers::pi * static_cast<double>(f) * 255.0 / 512.0;
    CHECK(std::abs(frames[0].bins(0, f) - Complex(std::cos(phase), std::sin(phase))) < 1e-12);
  }
}

TEST_CASE("synthesis of a zero frame is a zero chunk") {
  const FrameParams p;
  const auto g = make_analysis_window(WindowKind::tukey(), p.iws, p.ows);
  const auto l = make_synthesis_window(g, p.ows, p.hop);
  SpectrumFrame zero;
  zero.bins.assign(p.bins(), Complex(0.0, 0.0));
  const auto chunk = synthesize_frame(zero, l, p);
  REQUIRE(chunk.size() == 64);
  for (const double v : chunk) CHECK(v == 0.0);
}

TEST_CASE("synthesis rejects non-finite or mis-sized frames") {
  const FrameParams p;
  const auto g = make_analysis_window(WindowKind::tukey(), p.iws, p.ows);
  const auto l = make_synthesis_window(g, p.ows, p.hop);
  SpectrumFrame bad;
  bad.bins.assign(p.bins(), Complex(0.0, 0.0));
  bad.bins[10] = Complex(std::nan(""), 0.0);
  CHECK_THROWS_AS(synthesize_frame(bad, l, p), ValidationError);
  bad.bins[10] = Complex(0.0, INFINITY);
  CHECK_THROWS_AS(synthesize_frame(bad, l, p), ValidationError);
  SpectrumFrame short_frame;
  short_frame.bins.assign(10, Complex(0.0, 0.0));
  CHECK_THROWS_AS(synthesize_frame(short_frame, l, p), ValidationError);
}

TEST_CASE("synthesis keeps the last ows of the first iws samples times l") {
  FrameParams p;
  p.n_dft = 512;
  const auto g = make_analysis_window(WindowKind::tukey(), p.iws, p.ows);
  const auto l = make_synthesis_window(g, p.ows, p.hop);
  std::mt19937_64 rng(2);
  const auto time = testing::white_noise(512, 77);
  RealDft dft(512);
  SpectrumFrame frame;
  frame.bins.resize(257);
  dft.forward(time, frame.bins);
  const auto chunk = synthesize_frame(frame, l, p);
  for (std::size_t n = 0; n < 64; ++n) {
    CHECK(chunk[n] == doctest::Approx(time[192 + n] * l[n]).epsilon(1e-10));
  }
}

TEST_CASE("overlap-add release counts") {
  const FrameParams p;
  OverlapAdder ola(p);
  const Signal chunk(64, 1.0);
  CHECK(ola.push(chunk, 0).empty());
  CHECK(ola.push(chunk, 1).size() == 32);
  CHECK(ola.released() == 32);
  CHECK(ola.push(chunk, 2).size() == 32);
  CHECK(ola.released() == 64);
  CHECK_THROWS_AS(ola.push(chunk, 5), ValidationError);
  CHECK_THROWS_AS(ola.push(Signal(10, 0.0), 3), ValidationError);
}

TEST_CASE("overlap-add sums ows/hop contributions per released sample") {
  const FrameParams p;
  OverlapAdder ola(p);
  Signal out;
  for (std::int64_t t = 0; t < 6; ++t) {
    const auto r = ola.push(Signal(64, 1.0), t);
    out.insert(out.end(), r.begin(), r.end());
  }
  REQUIRE(out.size() == 160);
  for (const double v : out) CHECK(v == 2.0);
}

TEST_CASE("lookahead shifts overlap-add one hop earlier per frame") {
  FrameParams p;
  p.frames_ahead = 1;
  OverlapAdder ola(p);
  CHECK(ola.push(Signal(64, 1.0), 0).size() == 32);
  CHECK(ola.next_position() == 32);
  p.frames_ahead = 3;
  OverlapAdder far(p);
  // Slot 3 releases everything below 5 * 32 - 64 = 96; the first slots held no prediction.
  const auto r = far.push(Signal(64, 1.0), 0);
  REQUIRE(r.size() == 96);
  for (std::size_t i = 0; i < 64; ++i) CHECK(r[i] == 0.0);
  for (std::size_t i = 64; i < 96; ++i) CHECK(r[i] == 1.0);
}

TEST_CASE("schedule and latency arithmetic") {
  CHECK(schedule_frame(5, 0) == 5);
  CHECK(schedule_frame(5, 1) == 6);
  CHECK(schedule_frame(0, 3) == 3);
  FrameParams p;
  const double want[] = {4.0, 2.0, 0.0, -2.0};
  for (int k = 0; k < 4; ++k) {
    p.frames_ahead = k;
    CHECK(algorithmic_latency(p) == want[k]);
    CHECK(algorithmic_latency_samples(p) == 64 - 32 * k);
  }
  p = FrameParams::from_ms(16000, 32, 8, 2, 512, 2);
  CHECK(algorithmic_latency(p) == 4.0);
}

TEST_CASE("frames_to_cover gives the first fully reconstructed frame count") {
  const FrameParams p;
  CHECK(frames_to_cover(0, p) == 2);
  CHECK(frames_to_cover(32, p) == 3);
  CHECK(frames_to_cover(33, p) == 4);
}

TEST_CASE("dc signal through rect windows overlap-adds to 1") {
  const FrameParams p;
  const Signal dc(2000, 1.0);
  const auto g = make_analysis_window(WindowKind::rect(), p.iws, p.ows);
  const auto l = make_synthesis_window(g, p.ows, p.hop);
  const auto y = overlap_add_frames(analyze_signal(dc, g, p, frames_to_cover(2000, p)), l, p, 2000);
  for (std::size_t i = 0; i < 2000; ++i) CHECK(std::abs(y[i] - 1.0) < 1e-10);
}

TEST_CASE("identity round trip reconstructs for every kind and geometry") {
  const auto x = testing::white_noise(4000, 31);
  for (const auto geo : {Geometry{256, 64, 32}, Geometry{256, 32, 16}, Geometry{128, 64, 32},
                         Geometry{256, 256, 64}, Geometry{200, 40, 8}}) {
    for (const auto kind : {WindowKind::tukey(), WindowKind::sqrt_hann(), WindowKind::asqrt_hann(),
                            WindowKind::rect()}) {
      FrameParams p;
      p.iws = geo.n;
      p.ows = geo.a;
      p.hop = geo.b;
      p.n_dft = geo.n;
      CAPTURE(kind.name());
      CAPTURE(geo.n);
      CAPTURE(geo.a);
      CHECK(round_trip_error(kind, p, x) < 1e-10);
      p.n_dft = 2 * geo.n;
      CHECK(round_trip_error(kind, p, x) < 1e-10);
    }
  }
}

TEST_CASE("streaming synthesis equals the offline helper") {
  const FrameParams p;
  const auto g = make_analysis_window(WindowKind::asqrt_hann(), p.iws, p.ows);
  const auto l = make_synthesis_window(g, p.ows, p.hop);
  const auto x = testing::white_noise(900, 6);
  const auto frames = analyze_signal(x, g, p, frames_to_cover(900, p));
  FrameSynthesizer synth(p, l);
  OverlapAdder ola(p);
  Signal streamed;
  for (const auto& f : frames) {
    const auto r = ola.push(synth.synthesize(f), f.frame_index);
    streamed.insert(streamed.end(), r.begin(), r.end());
  }
  streamed.resize(900);
  CHECK(streamed == overlap_add_frames(frames, l, p, 900));
}
