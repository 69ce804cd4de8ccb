#include "lowlat/beamformer.hpp"

#include <cmath>
#include <string>

namespace lowlat {

namespace {

bool finite(const Complex& c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); }

// Upper triangle computed once and mirrored so the accumulator stays exactly Hermitian.
void add_outer(Eigen::MatrixXcd& m, const Eigen::VectorXcd& y) {
  const Eigen::Index n = y.size();
  for (Eigen::Index j = 0; j < n; ++j) {
    m(j, j) += Complex(std::norm(y(j)), 0.0);
    for (Eigen::Index i = 0; i < j; ++i) {
      const Complex v = y(i) * std::conj(y(j));
      m(i, j) += v;
      m(j, i) = std::conj(m(i, j));
    }
  }
}

}  // namespace

void BeamformerOptions::validate() const {
  if (!(loading > 0.0) || !std::isfinite(loading)) {
    throw ValidationError("beamformer loading must be positive and finite");
  }
  if (!(forgetting > 0.0 && forgetting <= 1.0)) {
    throw ValidationError("beamformer forgetting factor must lie in (0, 1]");
  }
  if (update_stride < 1) throw ValidationError("beamformer update_stride must be >= 1");
}

BeamformerState::BeamformerState(Eigen::Index channels, Eigen::Index frequencies,
                                 BeamformerOptions options)
    : channels_(channels), options_(options) {
  options_.validate();
  if (channels < 1 || frequencies < 1) {
    throw ValidationError("beamformer needs at least one channel and one frequency");
  }
  const auto n = static_cast<std::size_t>(frequencies);
  const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(channels, channels);
  yy_.assign(n, eye * options_.loading);
  ys_.assign(n, Eigen::VectorXcd::Zero(channels));
  if (options_.mode == InverseMode::Woodbury) inv_.assign(n, eye / options_.loading);
  filter_.weights = Eigen::MatrixXcd::Zero(channels, frequencies);
}

double BeamformerState::inverse_residual(Eigen::Index f) const {
  if (inv_.empty()) return 0.0;
  const auto i = static_cast<std::size_t>(f);
  const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(channels_, channels_);
  return (inv_[i] * yy_[i] - eye).cwiseAbs().maxCoeff();
}

Eigen::MatrixXcd woodbury_update(const Eigen::MatrixXcd& inv, const Eigen::VectorXcd& y) {
  const Eigen::VectorXcd v = inv * y;
  const double denom = 1.0 + y.dot(v).real();  // dot() conjugates its left operand
  if (!(denom > 0.0) || !std::isfinite(denom)) {
    throw StateError("Woodbury denominator " + std::to_string(denom) +
                     " is not positive; the recursive inverse is no longer positive definite");
  }
  return inv - (v * v.adjoint()) / denom;
}

BeamformerFilter online_update(BeamformerState& state, const MultiSpectrumFrame& y,
                               const SpectrumFrame& s_hat) {
  const Eigen::Index channels = state.channels_;
  const Eigen::Index freqs = state.frequencies();
  if (y.channels() != channels || y.frequencies() != freqs ||
      static_cast<Eigen::Index>(s_hat.bins.size()) != freqs) {
    throw ValidationError("online_update: frame dimensions do not match the beamformer state");
  }
  for (Eigen::Index f = 0; f < freqs; ++f) {
    if (!finite(s_hat.bins[static_cast<std::size_t>(f)])) {
      throw ValidationError("online_update: non-finite target estimate");
    }
    for (Eigen::Index p = 0; p < channels; ++p) {
      if (!finite(y.bins(p, f))) throw ValidationError("online_update: non-finite mixture frame");
    }
  }

  const auto& opts = state.options_;
  const bool refresh = state.frames_seen_ % opts.update_stride == 0;
  for (Eigen::Index f = 0; f < freqs; ++f) {
    const auto i = static_cast<std::size_t>(f);
    const Eigen::VectorXcd yf = y.bins.col(f);
    auto& yy = state.yy_[i];
    auto& ys = state.ys_[i];
    if (opts.forgetting != 1.0) {
      yy *= opts.forgetting;
      ys *= opts.forgetting;
    }
    add_outer(yy, yf);
    ys += yf * std::conj(s_hat.bins[i]);

    if (opts.mode == InverseMode::Woodbury) {
      auto& inv = state.inv_[i];
      if (opts.forgetting != 1.0) inv /= opts.forgetting;
      inv = woodbury_update(inv, yf);
      if (refresh) state.filter_.weights.col(f) = inv * ys;
    } else if (refresh) {
      state.filter_.weights.col(f) = yy.partialPivLu().solve(ys);
    }
  }
  state.filter_.frame_index = y.frame_index;
  ++state.frames_seen_;
  return state.filter_;
}

SpectrumFrame apply_filter(const BeamformerFilter& filter, const MultiSpectrumFrame& y) {
  if (filter.weights.rows() != y.channels() || filter.weights.cols() != y.frequencies()) {
    throw ValidationError("apply_filter: filter and frame dimensions differ");
  }
  SpectrumFrame out;
  out.frame_index = y.frame_index;
  out.bins.resize(static_cast<std::size_t>(y.frequencies()));
  for (Eigen::Index f = 0; f < y.frequencies(); ++f) {
    out.bins[static_cast<std::size_t>(f)] = filter.weights.col(f).dot(y.bins.col(f));
  }
  return out;
}

OfflineMcwfResult offline_mcwf(std::span<const MultiSpectrumFrame> y,
                               std::span<const SpectrumFrame> s_hat, double loading) {
  if (y.empty()) throw ValidationError("offline_mcwf: no frames");
  if (y.size() != s_hat.size()) {
    throw ValidationError("offline_mcwf: mixture has " + std::to_string(y.size()) +
                          " frames but the estimate has " + std::to_string(s_hat.size()));
  }
  if (!(loading > 0.0)) throw ValidationError("offline_mcwf: loading must be positive");
  const Eigen::Index channels = y.front().channels();
  const Eigen::Index freqs = y.front().frequencies();
  for (std::size_t t = 0; t < y.size(); ++t) {
    if (y[t].channels() != channels || y[t].frequencies() != freqs ||
        static_cast<Eigen::Index>(s_hat[t].bins.size()) != freqs) {
      throw ValidationError("offline_mcwf: inconsistent frame dimensions at frame " +
                            std::to_string(t));
    }
  }

  OfflineMcwfResult result;
  result.filter.weights.resize(channels, freqs);
  result.filter.frame_index = y.back().frame_index;
  for (Eigen::Index f = 0; f < freqs; ++f) {
    Eigen::MatrixXcd yy = Eigen::MatrixXcd::Identity(channels, channels) * loading;
    Eigen::VectorXcd ys = Eigen::VectorXcd::Zero(channels);
    for (std::size_t t = 0; t < y.size(); ++t) {
      const Eigen::VectorXcd yf = y[t].bins.col(f);
      add_outer(yy, yf);
      ys += yf * std::conj(s_hat[t].bins[static_cast<std::size_t>(f)]);
    }
    result.filter.weights.col(f) = yy.partialPivLu().solve(ys);
  }
  result.output.reserve(y.size());
  for (const auto& frame : y) result.output.push_back(apply_filter(result.filter, frame));
  return result;
}

}  // namespace lowlat
