// Scalar and MIMO multiple-access channel descriptions.
#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace msefield {

/// K-user scalar Gaussian MAC: y = sum_k sqrt(P_k) h_k x_k + n, symbols with
/// unit average energy, noise variance sigma^2 on linear scale.
template <typename Scalar>
class MacChannel {
 public:
  using Complex = std::complex<Scalar>;

  MacChannel(Eigen::VectorX<Scalar> powers, Eigen::VectorX<Complex> fading,
             Scalar noise_var)
      : powers_(std::move(powers)), fading_(std::move(fading)), noise_var_(noise_var) {
    if (powers_.size() < 1) {
      throw std::invalid_argument("MacChannel: need at least one user");
    }
    if (fading_.size() != powers_.size()) {
      throw std::invalid_argument("MacChannel: powers and fading lengths differ");
    }
    if (!(noise_var_ > Scalar(0)) || !std::isfinite(static_cast<double>(noise_var_))) {
      throw std::invalid_argument("MacChannel: noise_var must be positive and finite");
    }
    if (!powers_.allFinite() || (powers_.array() < Scalar(0)).any()) {
      throw std::invalid_argument("MacChannel: powers must be finite and nonnegative");
    }
    if (!fading_.allFinite()) {
      throw std::invalid_argument("MacChannel: fading coefficients must be finite");
    }
  }

  /// Channel with the given effective gains directly: P_k = g_k, h_k = 1.
  static MacChannel from_gains(const Eigen::VectorX<Scalar>& gains, Scalar noise_var) {
    return MacChannel(gains, Eigen::VectorX<Complex>::Ones(gains.size()), noise_var);
  }

  int num_users() const { return static_cast<int>(powers_.size()); }
  const Eigen::VectorX<Scalar>& powers() const { return powers_; }
  const Eigen::VectorX<Complex>& fading() const { return fading_; }
  Scalar noise_var() const { return noise_var_; }

 private:
  Eigen::VectorX<Scalar> powers_;
  Eigen::VectorX<Complex> fading_;
  Scalar noise_var_;
};

/// Effective per-user gains g_k = P_k |h_k|^2, in user order.
template <typename Scalar>
Eigen::VectorX<Scalar> effective_gains(const MacChannel<Scalar>& ch) {
  return ch.powers().cwiseProduct(ch.fading().cwiseAbs2());
}

/// K-user MIMO MAC: y = sum_k sqrt(P_k) H_k x_k + n with per-user channel
/// matrices H_k of shape N_R x N_{t,k} and E[n n^H] = sigma^2 I.
template <typename Scalar>
class MimoMacChannel {
 public:
  using Complex = std::complex<Scalar>;
  using ChannelMatrix = Eigen::MatrixX<Complex>;

  MimoMacChannel(std::vector<ChannelMatrix> channels, Eigen::VectorX<Scalar> powers,
                 Scalar noise_var)
      : channels_(std::move(channels)), powers_(std::move(powers)), noise_var_(noise_var) {
    if (channels_.empty()) {
      throw std::invalid_argument("MimoMacChannel: need at least one user");
    }
    if (powers_.size() != static_cast<Eigen::Index>(channels_.size())) {
      throw std::invalid_argument("MimoMacChannel: powers and channels lengths differ");
    }
    if (!(noise_var_ > Scalar(0)) || !std::isfinite(static_cast<double>(noise_var_))) {
      throw std::invalid_argument("MimoMacChannel: noise_var must be positive and finite");
    }
    if (!powers_.allFinite() || (powers_.array() < Scalar(0)).any()) {
      throw std::invalid_argument("MimoMacChannel: powers must be finite and nonnegative");
    }
    const Eigen::Index rows = channels_.front().rows();
    if (rows < 1) {
      throw std::invalid_argument("MimoMacChannel: receive dimension must be >= 1");
    }
    for (const auto& h : channels_) {
      if (h.rows() != rows) {
        throw std::invalid_argument("MimoMacChannel: all users must share the receive dimension");
      }
      if (h.cols() < 1) {
        throw std::invalid_argument("MimoMacChannel: every user needs >= 1 transmit antenna");
      }
      if (!h.allFinite()) {
        throw std::invalid_argument("MimoMacChannel: channel entries must be finite");
      }
    }
  }

  int num_users() const { return static_cast<int>(channels_.size()); }
  int rx_antennas() const { return static_cast<int>(channels_.front().rows()); }
  int tx_antennas(int user) const { return static_cast<int>(channels_.at(user).cols()); }
  int total_tx_antennas() const {
    int total = 0;
    for (const auto& h : channels_) total += static_cast<int>(h.cols());
    return total;
  }
  const std::vector<ChannelMatrix>& channels() const { return channels_; }
  const ChannelMatrix& channel(int user) const { return channels_.at(user); }
  const Eigen::VectorX<Scalar>& powers() const { return powers_; }
  Scalar noise_var() const { return noise_var_; }

 private:
  std::vector<ChannelMatrix> channels_;
  Eigen::VectorX<Scalar> powers_;
  Scalar noise_var_;
};

/// Horizontal concatenation H = [H_1 ... H_K] with powers kept as a separate
/// per-column diagonal; column blocks preserve user order.
template <typename Scalar>
struct ConcatenatedChannel {
  Eigen::MatrixX<std::complex<Scalar>> matrix;  // N_R x sum_k N_{t,k}, unscaled
  Eigen::VectorX<Scalar> column_powers;         // P_k repeated per transmit antenna
  Eigen::VectorXi column_user;                  // owning user of each column
};

template <typename Scalar>
ConcatenatedChannel<Scalar> concatenate_channels(const MimoMacChannel<Scalar>& ch) {
  ConcatenatedChannel<Scalar> out;
  const int total = ch.total_tx_antennas();
  out.matrix.resize(ch.rx_antennas(), total);
  out.column_powers.resize(total);
  out.column_user.resize(total);
  int col = 0;
  for (int k = 0; k < ch.num_users(); ++k) {
    const auto& hk = ch.channel(k);
    out.matrix.middleCols(col, hk.cols()) = hk;
    out.column_powers.segment(col, hk.cols()).setConstant(ch.powers()[k]);
    out.column_user.segment(col, hk.cols()).setConstant(k);
    col += static_cast<int>(hk.cols());
  }
  return out;
}

using MacChanneld = MacChannel<double>;
using MimoMacChanneld = MimoMacChannel<double>;

}  // namespace msefield
