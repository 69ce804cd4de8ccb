#include <chrono>
#include <random>

#include "doctest.h"
#include "lowlat/types.hpp"
#include "lowlat/estimators.hpp"
#include "lowlat/external_estimator.hpp"
#include "lowlat/spectrogram_file.hpp"
#include "support.hpp"

using namespace lowlat;
using testing::random_frame;
using testing::random_multi_frame;

namespace {

EstimatorContext context_with_reference(std::vector<SpectrumFrame> frames, std::size_t channels = 3) {
  EstimatorContext ctx;
  ctx.channels = channels;
  ctx.reference = std::make_shared<const std::vector<SpectrumFrame>>(std::move(frames));
  return ctx;
}

std::string echo(const std::string& args = "") {
  return std::string(LOWLAT_ECHO_ESTIMATOR) + (args.empty() ? "" : " " + args);
}

void check_close(const SpectrumFrame& a, const SpectrumFrame& b, double tol) {
  REQUIRE(a.bins.size() == b.bins.size());
  for (std::size_t f = 0; f < a.bins.size(); ++f) CHECK(std::abs(a.bins[f] - b.bins[f]) <= tol);
}

}  // namespace

TEST_CASE("estimator kind parsing round-trips") {
  for (const std::string text : {"passthrough", "passthrough:mixture:2", "passthrough:stage1",
                                 "passthrough:beamformed", "oracle-complex", "oracle-mask",
                                 "file:/tmp/x.llspec", "external:python3 est.py --fast"}) {
    CHECK(EstimatorKind::parse(text).describe() == text);
  }
  CHECK(EstimatorKind::parse("passthrough:mixture").describe() == "passthrough");
  CHECK(EstimatorKind::parse("passthrough:mixture:4").channel == 4);
  CHECK(EstimatorKind::parse("oracle-mask").is_oracle());
  CHECK_FALSE(EstimatorKind::parse("file:a").is_oracle());
  for (const std::string bad : {"", "dnn", "passthrough:nowhere", "passthrough:mixture:x",
                                "passthrough:mixture:-1", "file:", "external:", "oracle-mask:1"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(EstimatorKind::parse(bad), ValidationError);
  }
}

TEST_CASE("passthrough forwards the chosen input") {
  std::mt19937_64 rng(1);
  const auto y = random_multi_frame(3, 5, rng, 7);
  EstimatorContext ctx;
  ctx.channels = 3;
  ctx.ref_mic = 1;
  auto ref = make_estimator(EstimatorKind::parse("passthrough"), ctx);
  const auto out = ref->estimate(EstimatorInput{y}, 0);
  CHECK(out.frame_index == 7);
  for (Eigen::Index f = 0; f < 5; ++f) CHECK(out.bins[static_cast<std::size_t>(f)] == y.bins(1, f));

  auto ch2 = make_estimator(EstimatorKind::parse("passthrough:mixture:2"), ctx);
  const auto out2 = ch2->estimate(EstimatorInput{y}, 0);
  for (Eigen::Index f = 0; f < 5; ++f) CHECK(out2.bins[static_cast<std::size_t>(f)] == y.bins(2, f));

  const auto s1 = random_frame(5, rng, 7);
  const auto bf = random_frame(5, rng, 7);
  auto stage1 = make_estimator(EstimatorKind::parse("passthrough:stage1"), ctx);
  auto beam = make_estimator(EstimatorKind::parse("passthrough:beamformed"), ctx);
  CHECK(stage1->estimate(EstimatorInput{y, &s1, &bf}, 0).bins == s1.bins);
  CHECK(beam->estimate(EstimatorInput{y, &s1, &bf}, 0).bins == bf.bins);
  CHECK_THROWS_AS(beam->estimate(EstimatorInput{y, &s1, nullptr}, 0), ValidationError);
}

TEST_CASE("passthrough with lookahead has nothing observed to forward") {
  std::mt19937_64 rng(2);
  const auto y = random_multi_frame(2, 4, rng, 3);
  EstimatorContext ctx;
  ctx.channels = 2;
  auto est = make_estimator(EstimatorKind{}, ctx);
  const auto out = est->estimate(EstimatorInput{y}, 2);
  CHECK(out.frame_index == 5);
  for (const auto& b : out.bins) CHECK(b == Complex(0.0, 0.0));
}

TEST_CASE("complex oracle returns the reference frame it is asked for") {
  std::mt19937_64 rng(3);
  std::vector<SpectrumFrame> clean;
  for (int t = 0; t < 6; ++t) clean.push_back(random_frame(4, rng, t));
  auto est = make_estimator(EstimatorKind::parse("oracle-complex"), context_with_reference(clean));
  const auto y = random_multi_frame(3, 4, rng, 2);
  CHECK(est->estimate(EstimatorInput{y}, 0).bins == clean[2].bins);
  const auto ahead = est->estimate(EstimatorInput{y}, 3);
  CHECK(ahead.frame_index == 5);
  CHECK(ahead.bins == clean[5].bins);
  for (const auto& b : est->estimate(EstimatorInput{y}, 4).bins) CHECK(b == Complex(0.0, 0.0));
}

TEST_CASE("magnitude mask keeps the mixture phase") {
  std::vector<SpectrumFrame> clean{SpectrumFrame{{Complex(0.0, 2.0), Complex(3.0, 4.0), Complex(1.0, 0.0),
                                                  Complex(100.0, 0.0)}, 0}};
  auto ctx = context_with_reference(clean, 1);
  auto est = make_estimator(EstimatorKind::parse("oracle-mask"), ctx);
  MultiSpectrumFrame y;
  y.bins.resize(1, 4);
  y.bins << Complex(2.0, 0.0), Complex(-1.0, 0.0), Complex(0.0, 0.0), Complex(1.0, 1.0);
  const auto out = est->estimate(EstimatorInput{y}, 0);
  // |S| = |Y|, different phase: magnitude of S, phase of Y.
  CHECK(std::abs(out.bins[0] - Complex(2.0, 0.0)) < 1e-15);
  // Mask |S|/|Y| = 5 hits the clip exactly.
  CHECK(std::abs(out.bins[1] - Complex(-5.0, 0.0)) < 1e-15);
  // Zero mixture bin stays zero.
  CHECK(out.bins[2] == Complex(0.0, 0.0));
  // Clipped at 5.
  CHECK(std::abs(out.bins[3] - 5.0 * Complex(1.0, 1.0)) < 1e-12);
  for (const auto& b : est->estimate(EstimatorInput{y}, 1).bins) CHECK(b == Complex(0.0, 0.0));
}

TEST_CASE("oracles need a reference") {
  EstimatorContext ctx;
  CHECK_THROWS_AS(make_estimator(EstimatorKind::parse("oracle-complex"), ctx), ValidationError);
  CHECK_THROWS_AS(make_estimator(EstimatorKind::parse("oracle-mask"), ctx), ValidationError);
}

TEST_CASE("file-backed estimator replays frames") {
  testing::TempDir dir("est");
  std::mt19937_64 rng(4);
  std::vector<SpectrumFrame> frames;
  for (int t = 0; t < 5; ++t) frames.push_back(random_frame(129, rng, t));
  const auto path = dir / "est.llspec";
  write_spectrogram(path, frames);

  EstimatorContext ctx;
  ctx.expected_frames = 5;
  auto est = make_estimator(EstimatorKind::parse("file:" + path.string()), ctx);
  const auto y = random_multi_frame(1, 129, rng, 1);
  const auto out = est->estimate(EstimatorInput{y}, 1);
  CHECK(out.frame_index == 2);
  check_close(out, frames[2], 1e-6 * 10);
  for (const auto& b : est->estimate(EstimatorInput{y}, 4).bins) CHECK(b == Complex(0.0, 0.0));

  ctx.expected_frames = 6;
  CHECK_THROWS_WITH_AS(make_estimator(EstimatorKind::parse("file:" + path.string()), ctx),
                       doctest::Contains("holds 5 frames"), ValidationError);
  FrameParams wide;
  wide.n_dft = 512;
  ctx.params = wide;
  ctx.expected_frames = -1;
  CHECK_THROWS_AS(make_estimator(EstimatorKind::parse("file:" + path.string()), ctx), ValidationError);
  CHECK_THROWS_AS(make_estimator(EstimatorKind::parse("file:" + (dir / "missing").string()), EstimatorContext{}),
                  FormatError);
}

TEST_CASE("pipeline config validation") {
  PipelineConfig c;
  CHECK(c.validate(2).empty());
  CHECK_FALSE(c.needs_reference());
  c.stage1 = EstimatorKind::parse("oracle-mask");
  CHECK(c.needs_reference());

  PipelineConfig bf;
  bf.beamformer = true;
  CHECK(bf.validate(1).size() == 1);
  bf.params.frames_ahead = 1;
  CHECK_THROWS_WITH_AS(bf.validate(4), doctest::Contains("stage2"), ValidationError);
  bf.stage2 = EstimatorKind::parse("passthrough:beamformed");
  CHECK_NOTHROW(bf.validate(4));

  PipelineConfig bad;
  bad.stage2 = EstimatorKind::parse("passthrough:beamformed");
  CHECK_THROWS_AS(bad.validate(2), ValidationError);
  bad = PipelineConfig{};
  bad.stage1 = EstimatorKind::parse("passthrough:stage1");
  CHECK_THROWS_AS(bad.validate(2), ValidationError);
  bad = PipelineConfig{};
  bad.ref_mic = 2;
  CHECK_THROWS_AS(bad.validate(2), ValidationError);
  bad = PipelineConfig{};
  bad.stage1 = EstimatorKind::parse("passthrough:mixture:5");
  CHECK_THROWS_AS(bad.validate(2), ValidationError);
  bad = PipelineConfig{};
  bad.params.hop = 48;
  CHECK_THROWS_AS(bad.validate(2), ValidationError);
  bad = PipelineConfig{};
  bad.window = WindowKind::asqrt_hann();
  bad.params.ows = 32;
  bad.params.hop = 32;
  CHECK_NOTHROW(bad.validate(2));
}

TEST_CASE("external protocol encoding") {
  CHECK(external_handshake(129, 6, 2, 0, 1) ==
        "LOWLAT-EST 1 n_bins=129 channels=6 stage=2 ref_mic=0 lookahead=1\n");
  std::mt19937_64 rng(5);
  const auto y = random_multi_frame(2, 3, rng, 0);
  const auto s1 = random_frame(3, rng);
  const auto stage1_payload = encode_external_request(EstimatorInput{y}, 1);
  CHECK(stage1_payload.size() == 12);
  CHECK(stage1_payload[6] == static_cast<float>(y.bins(1, 0).real()));
  CHECK(stage1_payload[7] == static_cast<float>(y.bins(1, 0).imag()));
  const auto stage2_payload = encode_external_request(EstimatorInput{y, &s1, nullptr}, 2);
  CHECK(stage2_payload.size() == 24);
  CHECK(stage2_payload[12] == static_cast<float>(s1.bins[0].real()));
  CHECK(stage2_payload[23] == 0.0f);

  const std::vector<float> reply{1.0f, 2.0f, 3.0f, 4.0f};
  const auto frame = decode_external_response(reply, 2, 9);
  CHECK(frame.frame_index == 9);
  CHECK(frame.bins[1] == Complex(3.0, 4.0));
  CHECK_THROWS_AS(decode_external_response(reply, 3, 0), ProtocolError);
}

TEST_CASE("external estimator round trip") {
  std::mt19937_64 rng(6);
  const std::size_t bins = 129;
  ExternalEstimator est(echo(), bins, 3, 1, 2, 0, 5000);
  for (int t = 0; t < 20; ++t) {
    const auto y = random_multi_frame(3, static_cast<Eigen::Index>(bins), rng, t);
    const auto out = est.estimate(EstimatorInput{y}, 0);
    CHECK(out.frame_index == t);
    check_close(out, y.channel(2), 1e-5);
  }
  CHECK_THROWS_AS(est.estimate(EstimatorInput{random_multi_frame(2, 129, rng)}, 0), ValidationError);
  CHECK_THROWS_AS(est.estimate(EstimatorInput{random_multi_frame(3, 129, rng)}, 1), ValidationError);
}

TEST_CASE("external stage-2 estimator sees the stage-1 block") {
  std::mt19937_64 rng(7);
  EstimatorContext ctx;
  ctx.channels = 2;
  ctx.stage = 2;
  ctx.lookahead = 1;
  auto est = make_estimator(EstimatorKind::parse("external:" + echo("scale 2")), ctx);
  const auto y = random_multi_frame(2, 129, rng, 4);
  const auto s1 = random_frame(129, rng, 4);
  const auto out = est->estimate(EstimatorInput{y, &s1, nullptr}, 1);
  CHECK(out.frame_index == 5);
  SpectrumFrame doubled = s1;
  for (auto& b : doubled.bins) b *= 2.0;
  check_close(out, doubled, 1e-5);
}

TEST_CASE("external estimator failures surface as protocol errors") {
  std::mt19937_64 rng(8);
  const auto y = random_multi_frame(1, 129, rng, 0);
  CHECK_THROWS_WITH_AS(ExternalEstimator(echo("bad-ready"), 129, 1, 1, 0, 0, 2000),
                       doctest::Contains("handshake"), ProtocolError);
  CHECK_THROWS_AS(ExternalEstimator("exit 0", 129, 1, 1, 0, 0, 2000), ProtocolError);
  CHECK_THROWS_AS(ExternalEstimator("/nonexistent/estimator", 129, 1, 1, 0, 0, 2000), ProtocolError);
  {
    ExternalEstimator est(echo("short"), 129, 1, 1, 0, 0, 2000);
    CHECK_THROWS_WITH_AS(est.estimate(EstimatorInput{y}, 0), doctest::Contains("expected 258"),
                         ProtocolError);
  }
  {
    ExternalEstimator est(echo("exit-after 2"), 129, 1, 1, 0, 0, 2000);
    CHECK_NOTHROW(est.estimate(EstimatorInput{y}, 0));
    CHECK_NOTHROW(est.estimate(EstimatorInput{y}, 0));
    CHECK_THROWS_AS(est.estimate(EstimatorInput{y}, 0), ProtocolError);
  }
  {
    ExternalEstimator est(echo("hang"), 129, 1, 1, 0, 0, 200);
    const auto started = std::chrono::steady_clock::now();
    CHECK_THROWS_WITH_AS(est.estimate(EstimatorInput{y}, 0), doctest::Contains("timed out"), ProtocolError);
    CHECK(std::chrono::steady_clock::now() - started < std::chrono::seconds(5));
  }
}
