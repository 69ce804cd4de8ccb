#include "lowlat/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace lowlat {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\''))) {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

class LineError {
 public:
  LineError(int line, std::string key) : line_(line), key_(std::move(key)) {}
  [[noreturn]] void fail(const std::string& msg) const {
    throw ValidationError("config line " + std::to_string(line_) + ", key '" + key_ + "': " + msg);
  }
  double number(const std::string& v) const {
    std::size_t used = 0;
    double d = 0.0;
    try {
      d = std::stod(v, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != v.size() || v.empty() || !std::isfinite(d)) fail("expected a number, got '" + v + "'");
    return d;
  }
  long long integer(const std::string& v) const {
    const double d = number(v);
    if (d != std::floor(d)) fail("expected an integer, got '" + v + "'");
    return static_cast<long long>(d);
  }

 private:
  int line_;
  std::string key_;
};

}  // namespace

std::size_t LengthSetting::samples(int sample_rate, const std::string& key) const {
  const double exact = in_ms ? value * sample_rate / 1000.0 : value;
  const double rounded = std::round(exact);
  if (exact <= 0.0 || std::abs(exact - rounded) > 1e-9) {
    throw ValidationError(key + " = " + std::to_string(value) + (in_ms ? " ms" : " samples") +
                          " is not a whole positive number of samples at " +
                          std::to_string(sample_rate) + " Hz");
  }
  return static_cast<std::size_t>(rounded);
}

PipelineConfig EnhanceConfig::resolve(int sample_rate) const {
  PipelineConfig c = pipeline;
  c.params.sample_rate = sample_rate;
  c.params.iws = iws.samples(sample_rate, "iws");
  c.params.ows = ows.samples(sample_rate, "ows");
  c.params.hop = hop.samples(sample_rate, "hop");
  c.params.n_dft = n_dft.samples(sample_rate, "n_dft");
  c.params.validate();
  return c;
}

EnhanceConfig parse_enhance_config(const std::string& text, const std::filesystem::path& base_dir) {
  EnhanceConfig cfg;
  std::set<std::string> seen;
  std::optional<int> timeout_ms;
  std::string window_name = "tukey";
  double tukey_alpha = 1.0 / 16.0;
  bool have_output = false;
  bool have_mixture = false;

  auto path_of = [&](const std::string& v) {
    std::filesystem::path p(v);
    return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  };

  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = unquote(trim(line.substr(eq + 1)));
    const LineError err(line_no, key);
    if (!seen.insert(key).second) err.fail("given more than once");

    auto length = [&](LengthSetting& slot, const std::string& base, bool ms) {
      if (seen.count(base + (ms ? "_samples" : "_ms"))) {
        err.fail("both " + base + "_ms and " + base + "_samples are set; use one");
      }
      const double v = err.number(value);
      if (!(v > 0.0)) err.fail("must be positive");
      slot = LengthSetting{v, ms};
    };

    if (key == "iws_ms" || key == "iws_samples") {
      length(cfg.iws, "iws", key.ends_with("_ms"));
    } else if (key == "ows_ms" || key == "ows_samples") {
      length(cfg.ows, "ows", key.ends_with("_ms"));
    } else if (key == "hop_ms" || key == "hop_samples") {
      length(cfg.hop, "hop", key.ends_with("_ms"));
    } else if (key == "n_dft_ms" || key == "n_dft_samples") {
      length(cfg.n_dft, "n_dft", key.ends_with("_ms"));
    } else if (key == "window") {
      window_name = value;
    } else if (key == "tukey_alpha") {
      tukey_alpha = err.number(value);
    } else if (key == "frames_ahead") {
      const auto k = err.integer(value);
      if (k < 0) err.fail("must be >= 0");
      cfg.pipeline.params.frames_ahead = static_cast<int>(k);
    } else if (key == "ref_mic") {
      const auto q = err.integer(value);
      if (q < 0) err.fail("must be >= 0");
      cfg.pipeline.ref_mic = static_cast<Eigen::Index>(q);
    } else if (key == "stage1") {
      try {
        cfg.pipeline.stage1 = EstimatorKind::parse(value);
      } catch (const ValidationError& e) {
        err.fail(e.what());
      }
    } else if (key == "stage2") {
      if (value == "none") {
        cfg.pipeline.stage2.reset();
      } else {
        try {
          cfg.pipeline.stage2 = EstimatorKind::parse(value);
        } catch (const ValidationError& e) {
          err.fail(e.what());
        }
      }
    } else if (key == "beamformer") {
      if (value == "off") {
        cfg.pipeline.beamformer = false;
      } else if (value == "woodbury") {
        cfg.pipeline.beamformer = true;
        cfg.pipeline.beamformer_options.mode = InverseMode::Woodbury;
      } else if (value == "direct") {
        cfg.pipeline.beamformer = true;
        cfg.pipeline.beamformer_options.mode = InverseMode::DirectInverse;
      } else {
        err.fail("expected off, woodbury or direct");
      }
    } else if (key == "loading") {
      cfg.pipeline.beamformer_options.loading = err.number(value);
    } else if (key == "forgetting") {
      cfg.pipeline.beamformer_options.forgetting = err.number(value);
    } else if (key == "update_stride") {
      cfg.pipeline.beamformer_options.update_stride = static_cast<int>(err.integer(value));
    } else if (key == "external_timeout_ms") {
      const auto t = err.integer(value);
      if (t <= 0) err.fail("must be positive");
      timeout_ms = static_cast<int>(t);
    } else if (key == "mixture") {
      cfg.mixture = path_of(value);
      have_mixture = true;
    } else if (key == "reference") {
      cfg.reference = path_of(value);
    } else if (key == "output") {
      cfg.output = path_of(value);
      have_output = true;
    } else if (key == "report") {
      cfg.report = path_of(value);
    } else if (key == "output_format") {
      try {
        cfg.output_format = parse_sample_format(value);
      } catch (const ValidationError& e) {
        err.fail(e.what());
      }
    } else if (key == "seed") {
      const auto s = err.integer(value);
      if (s < 0) err.fail("must be >= 0");
      cfg.seed = static_cast<std::uint64_t>(s);
    } else {
      err.fail("unknown key");
    }
  }

  try {
    cfg.pipeline.window = WindowKind::parse(window_name, tukey_alpha);
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("config key 'window': ") + e.what());
  }
  if (timeout_ms) {
    cfg.pipeline.stage1.timeout_ms = *timeout_ms;
    if (cfg.pipeline.stage2) cfg.pipeline.stage2->timeout_ms = *timeout_ms;
  }
  if (!have_mixture) throw ValidationError("config: missing required key 'mixture'");
  if (!have_output) throw ValidationError("config: missing required key 'output'");
  return cfg;
}

EnhanceConfig load_enhance_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_enhance_config(buf.str(), path.parent_path());
}

}  // namespace lowlat
