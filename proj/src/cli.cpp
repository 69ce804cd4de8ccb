#include "lowlat/cli.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "lowlat/config.hpp"
#include "lowlat/latency_audit.hpp"
#include "lowlat/pipeline.hpp"
#include "lowlat/simulate.hpp"
#include "lowlat/spectrogram_file.hpp"
#include "lowlat/wav.hpp"

namespace lowlat {

namespace {

using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path.string() + "' for writing");
  f << text;
  if (!f) throw Error("failed writing '" + path.string() + "'");
}

struct SimulateArgs {
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  double snr_db = 0.0;
  std::size_t channels = 6;
  double diameter = 0.20;
  int sample_rate = 16000;
  double duration_s = 2.0;
  std::size_t noises = 2;
  std::size_t ref_mic = 0;
  std::string format = "float32";
};

int run_simulate(const SimulateArgs& a, std::ostream& out) {
  SceneSpec spec;
  spec.channels = a.channels;
  spec.diameter = a.diameter;
  spec.sample_rate = a.sample_rate;
  spec.duration_s = a.duration_s;
  spec.noise_count = a.noises;
  spec.snr_db = a.snr_db;
  spec.seed = a.seed;
  spec.ref_mic = a.ref_mic;
  const auto format = parse_sample_format(a.format);
  const Scene scene = make_scene(spec);

  const std::filesystem::path dir(a.out_dir);
  std::filesystem::create_directories(dir);
  write_wav(dir / "mixture.wav", scene.mixture, scene.sample_rate, format);
  write_wav(dir / "reference.wav", MultiSignal{scene.target_direct}, scene.sample_rate, format);

  ordered_json j;
  j["seed"] = scene.seed;
  j["sample_rate"] = scene.sample_rate;
  j["channels"] = scene.mixture.size();
  j["samples"] = scene.target_direct.size();
  j["array_diameter_m"] = spec.diameter;
  j["ref_mic"] = scene.ref_mic;
  j["snr_db"] = scene.snr_db;
  j["format"] = a.format;
  ordered_json srcs = ordered_json::array();
  for (const auto& s : scene.sources) {
    ordered_json e;
    e["role"] = s.role;
    e["kind"] = s.kind;
    e["azimuth_deg"] = s.azimuth_rad * 180.0 / M_PI;
    if (s.role != "target") e["level_db"] = s.level_db;
    srcs.push_back(e);
  }
  j["sources"] = srcs;
  j["mixture"] = "mixture.wav";
  j["reference"] = "reference.wav";
  write_text(dir / "scene.json", j.dump(2) + "\n");
  out << "wrote " << (dir / "mixture.wav").string() << ", " << (dir / "reference.wav").string()
      << ", " << (dir / "scene.json").string() << "\n";
  return kExitOk;
}

struct EnhanceArgs {
  std::string config;
  std::string output;
  std::string report;
  bool no_timing = false;
  bool quiet = false;
};

int run_enhance(const EnhanceArgs& a, std::ostream& out, std::ostream& err) {
  EnhanceConfig cfg = load_enhance_config(a.config);
  if (!a.output.empty()) cfg.output = a.output;
  if (!a.report.empty()) cfg.report = a.report;

  const WavData mixture = read_wav(cfg.mixture);
  const PipelineConfig pipeline = cfg.resolve(mixture.sample_rate);

  std::optional<Signal> reference;
  if (cfg.reference) {
    const WavData ref = read_wav(*cfg.reference);
    if (ref.sample_rate != mixture.sample_rate) {
      throw ValidationError("reference sample rate " + std::to_string(ref.sample_rate) +
                            " Hz differs from mixture " + std::to_string(mixture.sample_rate) + " Hz");
    }
    if (ref.channels.size() == 1) {
      reference = ref.channels.front();
    } else {
      const auto q = static_cast<std::size_t>(pipeline.ref_mic);
      if (q >= ref.channels.size()) {
        throw ValidationError("reference file has no channel " + std::to_string(q));
      }
      reference = ref.channels[q];
    }
  }

  const RunResult result = run_pipeline(pipeline, mixture.channels, reference);
  for (const auto& w : result.report.warnings) err << "warning: " << w << "\n";

  write_wav(cfg.output, MultiSignal{result.output}, mixture.sample_rate, cfg.output_format);
  const std::string json = report_json(result.report, !a.no_timing);
  if (cfg.report) write_text(*cfg.report, json);

  if (!a.quiet) {
    out << "algorithmic latency " << result.report.algorithmic_latency_ms << " ms, "
        << result.report.frames.synthesized << " frames";
    if (result.report.metrics) {
      out << ", SI-SDR " << std::fixed << std::setprecision(2) << result.report.metrics->si_sdr_db
          << " dB";
      if (result.report.mixture_si_sdr_db) {
        out << " (mixture " << *result.report.mixture_si_sdr_db << " dB)";
      }
    }
    out << "\nwrote " << cfg.output.string() << "\n";
  }
  return kExitOk;
}

struct WindowArgs {
  std::string kind = "all";
  std::size_t iws = 256;
  std::size_t ows = 64;
  std::size_t hop = 32;
  std::size_t n_dft = 0;
  double alpha = 1.0 / 16.0;
  std::string format = "csv";
  std::string output;
};

int run_windows(const WindowArgs& a, std::ostream& out) {
  FrameParams params;
  params.iws = a.iws;
  params.ows = a.ows;
  params.hop = a.hop;
  params.n_dft = a.n_dft > 0 ? a.n_dft : a.iws;
  params.validate();

  std::vector<WindowKind> kinds;
  if (a.kind == "all") {
    kinds = {WindowKind::sqrt_hann(), WindowKind::asqrt_hann(), WindowKind::rect(),
             WindowKind::tukey(a.alpha)};
  } else {
    kinds = {WindowKind::parse(a.kind, a.alpha)};
  }
  if (a.format != "csv" && a.format != "json") {
    throw ValidationError("--format must be csv or json, got '" + a.format + "'");
  }

  std::ostringstream text;
  text << std::setprecision(std::numeric_limits<double>::max_digits10);
  ordered_json doc = ordered_json::array();
  if (a.format == "csv") text << "window,n,analysis,synthesis\n";
  for (const auto& kind : kinds) {
    const auto g = make_analysis_window(kind, params.iws, params.ows);
    const auto l = make_synthesis_window(g, params.ows, params.hop);
    const double residual = verify_cola(g, l, params.n_dft);
    const std::size_t offset = params.iws - params.ows;
    if (a.format == "csv") {
      text << "# " << kind.name() << " cola_residual=" << residual
           << (residual < kColaTolerance ? " ok" : " FAIL") << "\n";
      for (std::size_t n = 0; n < g.size(); ++n) {
        text << kind.name() << "," << n << "," << g[n] << ",";
        if (n >= offset) text << l[n - offset];
        text << "\n";
      }
    } else {
      ordered_json j;
      j["window"] = kind.name();
      if (kind.variant == WindowKind::Variant::Tukey) j["tukey_alpha"] = kind.tukey_alpha;
      j["iws"] = params.iws;
      j["ows"] = params.ows;
      j["hop"] = params.hop;
      j["n_dft"] = params.n_dft;
      j["analysis"] = std::vector<double>(g.samples().begin(), g.samples().end());
      j["synthesis"] = std::vector<double>(l.samples().begin(), l.samples().end());
      j["cola_residual"] = residual;
      j["cola_ok"] = residual < kColaTolerance;
      doc.push_back(j);
    }
  }
  if (a.format == "json") text << doc.dump(2) << "\n";

  if (a.output.empty()) {
    out << text.str();
  } else {
    write_text(a.output, text.str());
  }
  return kExitOk;
}

struct LatencyArgs {
  std::size_t iws = 256;
  std::size_t ows = 64;
  std::size_t hop = 32;
  std::size_t n_dft = 256;
  int sample_rate = 16000;
  std::string window = "tukey";
  double alpha = 1.0 / 16.0;
  std::vector<int> ks{0, 1, 2, 3};
};

int run_latency_check(const LatencyArgs& a, std::ostream& out) {
  FrameParams params;
  params.sample_rate = a.sample_rate;
  params.iws = a.iws;
  params.ows = a.ows;
  params.hop = a.hop;
  params.n_dft = a.n_dft;
  params.validate();
  const auto window = WindowKind::parse(a.window, a.alpha);

  bool all = true;
  for (const int k : a.ks) {
    const auto audit = audit_latency(params, window, k);
    all = all && audit.passed();
    auto verdict = [](bool ok) { return ok ? "pass" : "FAIL"; };
    out << (audit.passed() ? "PASS" : "FAIL") << " k=" << k << " latency=" << std::fixed
        << std::setprecision(3) << audit.expected_ms << " ms measured=" << audit.measured_ms
        << " ms timing=" << verdict(audit.timing_ok) << " impulse=" << verdict(audit.impulse_ok)
        << " causality=" << verdict(audit.causal_ok) << "\n";
    for (const auto& f : audit.failures) out << "  " << f << "\n";
  }
  return all ? kExitOk : kExitRuntime;
}

struct AnalyzeArgs {
  std::string config;
  std::string input;
  std::string output;
  int channel = -1;
};

// Frames one WAV channel with the config's framing so it can feed a file: estimator.
int run_analyze(const AnalyzeArgs& a, std::ostream& out) {
  const EnhanceConfig cfg = load_enhance_config(a.config);
  const WavData wav = read_wav(a.input);
  const PipelineConfig pipeline = cfg.resolve(wav.sample_rate);
  const auto channel = a.channel >= 0 ? static_cast<std::size_t>(a.channel)
                                      : static_cast<std::size_t>(pipeline.ref_mic);
  if (channel >= wav.channels.size()) {
    throw ValidationError("input has no channel " + std::to_string(channel));
  }
  const auto& signal = wav.channels[channel];
  const auto g = make_analysis_window(pipeline.window, pipeline.params.iws, pipeline.params.ows);
  const auto frames = analyze_signal(
      signal, g, pipeline.params,
      frames_to_cover(static_cast<std::int64_t>(signal.size()), pipeline.params));
  write_spectrogram(a.output, frames);
  out << "wrote " << frames.size() << " frames of " << pipeline.params.bins() << " bins to "
      << a.output << "\n";
  return kExitOk;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Low-latency dual-window STFT speech enhancement"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all subcommands");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Render a synthetic anechoic multichannel scene");
  simulate->add_option("-o,--out-dir", sim.out_dir, "Output directory")->capture_default_str();
  simulate->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
  simulate->add_option("--snr-db", sim.snr_db, "Target-to-noise ratio at the reference mic")
      ->capture_default_str();
  simulate->add_option("--channels", sim.channels, "Microphones on the circular array")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  simulate->add_option("--diameter", sim.diameter, "Array diameter in metres")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  simulate->add_option("--sample-rate", sim.sample_rate)->check(CLI::PositiveNumber)->capture_default_str();
  simulate->add_option("--duration", sim.duration_s, "Seconds")->check(CLI::PositiveNumber)->capture_default_str();
  simulate->add_option("--noises", sim.noises, "Noise sources")->check(CLI::PositiveNumber)->capture_default_str();
  simulate->add_option("--ref-mic", sim.ref_mic)->capture_default_str();
  simulate->add_option("--format", sim.format, "float32, pcm16 or pcm24")->capture_default_str();

  EnhanceArgs enh;
  auto* enhance = app.add_subcommand("enhance", "Run the enhancement pipeline described by a config file");
  enhance->add_option("-c,--config", enh.config, "Config file")->required();
  enhance->add_option("-o,--output", enh.output, "Override the output WAV path");
  enhance->add_option("-r,--report", enh.report, "Override the report JSON path");
  enhance->add_flag("--no-timing", enh.no_timing, "Leave wall-clock fields out of the report");
  enhance->add_flag("-q,--quiet", enh.quiet);

  WindowArgs win;
  auto* windows = app.add_subcommand("windows", "Print analysis/synthesis window samples and COLA residual");
  windows->add_option("--kind", win.kind, "sqrthann, asqrthann, rect, tukey or all")->capture_default_str();
  windows->add_option("--iws", win.iws, "Analysis window (samples)")->capture_default_str();
  windows->add_option("--ows", win.ows, "Output window (samples)")->capture_default_str();
  windows->add_option("--hop", win.hop, "Hop (samples)")->capture_default_str();
  windows->add_option("--n-dft", win.n_dft, "DFT size (defaults to iws)");
  windows->add_option("--alpha", win.alpha, "Tukey taper fraction")->capture_default_str();
  windows->add_option("--format", win.format, "csv or json")->capture_default_str();
  windows->add_option("-o,--output", win.output, "Write to a file instead of stdout");

  LatencyArgs lat;
  auto* latency = app.add_subcommand("latency-check", "Audit release timing and causality per lookahead");
  latency->add_option("--iws", lat.iws)->capture_default_str();
  latency->add_option("--ows", lat.ows)->capture_default_str();
  latency->add_option("--hop", lat.hop)->capture_default_str();
  latency->add_option("--n-dft", lat.n_dft)->capture_default_str();
  latency->add_option("--sample-rate", lat.sample_rate)->capture_default_str();
  latency->add_option("--window", lat.window)->capture_default_str();
  latency->add_option("--alpha", lat.alpha)->capture_default_str();
  latency->add_option("-k,--frames-ahead", lat.ks, "Lookahead values to audit")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();

  AnalyzeArgs ana;
  auto* analyze = app.add_subcommand("analyze", "Frame a WAV channel into a spectrogram file for file: estimators");
  analyze->add_option("-c,--config", ana.config, "Config providing framing and window")->required();
  analyze->add_option("-i,--input", ana.input, "Input WAV")->required();
  analyze->add_option("-o,--output", ana.output, "Output spectrogram file")->required();
  analyze->add_option("--channel", ana.channel, "Channel (defaults to ref_mic)");

  std::vector<std::string> storage{"lowlat"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  try {
    if (*simulate) return run_simulate(sim, out);
    if (*enhance) return run_enhance(enh, out, err);
    if (*windows) return run_windows(win, out);
    if (*latency) return run_latency_check(lat, out);
    if (*analyze) return run_analyze(ana, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitValidation;
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace lowlat
