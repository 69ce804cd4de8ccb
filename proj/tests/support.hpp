#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "lowlat/framing.hpp"

namespace testing {

inline lowlat::Signal white_noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  lowlat::Signal x(n);
  for (auto& v : x) v = normal(rng);
  return x;
}

inline lowlat::MultiSignal white_noise(std::size_t channels, std::size_t n, std::uint64_t seed) {
  lowlat::MultiSignal x;
  for (std::size_t p = 0; p < channels; ++p) x.push_back(white_noise(n, seed * 7919 + p));
  return x;
}

inline lowlat::Complex random_complex(std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  const double re = normal(rng);
  return {re, normal(rng)};
}

inline lowlat::MultiSpectrumFrame random_multi_frame(Eigen::Index p, Eigen::Index f,
                                                     std::mt19937_64& rng, std::int64_t t = 0) {
  lowlat::MultiSpectrumFrame m;
  m.bins.resize(p, f);
  for (Eigen::Index j = 0; j < f; ++j) {
    for (Eigen::Index i = 0; i < p; ++i) m.bins(i, j) = random_complex(rng);
  }
  m.frame_index = t;
  return m;
}

inline lowlat::SpectrumFrame random_frame(std::size_t f, std::mt19937_64& rng, std::int64_t t = 0) {
  lowlat::SpectrumFrame s;
  s.frame_index = t;
  for (std::size_t j = 0; j < f; ++j) s.bins.push_back(random_complex(rng));
  return s;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b,
                           std::size_t from = 0, std::size_t to = std::string::npos) {
  double worst = 0.0;
  const std::size_t end = std::min({a.size(), b.size(), to});
  for (std::size_t i = from; i < end; ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("lowlat-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
