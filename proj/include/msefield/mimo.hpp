// LMMSE front-end for MIMO MACs: per-user SNR, log-det potential, sum rate,
// and per-user rates along decoding paths.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

#include "msefield/channel.hpp"
#include "msefield/path.hpp"
#include "msefield/rates.hpp"

namespace msefield {

namespace detail {

template <typename Scalar>
void check_mimo_mse(const MimoMacChannel<Scalar>& ch, const Eigen::VectorX<Scalar>& v) {
  if (v.size() != ch.num_users()) {
    throw std::invalid_argument("MSE vector length must equal the number of users");
  }
  if ((v.array() < Scalar(-1e-12)).any() || (v.array() > Scalar(1) + Scalar(1e-12)).any()) {
    throw std::invalid_argument("MSE entries must lie in [0, 1]");
  }
}

template <typename Scalar>
Scalar log_det_hermitian(const Eigen::MatrixX<std::complex<Scalar>>& m, const char* who) {
  Eigen::LLT<Eigen::MatrixX<std::complex<Scalar>>> llt(m);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error(std::string(who) + ": matrix is not positive definite");
  }
  return Scalar(2) * llt.matrixLLT().diagonal().real().array().log().sum();
}

}  // namespace detail

/// Received covariance R = sigma^2 I + sum_k P_k v_k H_k H_k^H.
/// Accepts any nonnegative v so finite-difference probes can step past 1;
/// decoder-facing entry points enforce v in [0, 1].
template <typename Scalar>
Eigen::MatrixX<std::complex<Scalar>> lmmse_covariance(const MimoMacChannel<Scalar>& ch,
                                                      const Eigen::VectorX<Scalar>& v) {
  if (v.size() != ch.num_users()) {
    throw std::invalid_argument("MSE vector length must equal the number of users");
  }
  if ((v.array() < Scalar(-1e-12)).any() || !v.allFinite()) {
    throw std::invalid_argument("MSE entries must be nonnegative");
  }
  using Matrix = Eigen::MatrixX<std::complex<Scalar>>;
  const int rx = ch.rx_antennas();
  Matrix r = Matrix::Identity(rx, rx) * ch.noise_var();
  for (int k = 0; k < ch.num_users(); ++k) {
    const Scalar w = ch.powers()[k] * std::max(v[k], Scalar(0));
    if (w == Scalar(0)) continue;
    r.noalias() += w * (ch.channel(k) * ch.channel(k).adjoint());
  }
  return r;
}

/// Covariance plus the decoder state it was built from.
template <typename Scalar>
struct LmmseState {
  Eigen::VectorX<Scalar> mse;
  Eigen::MatrixX<std::complex<Scalar>> covariance;
};

template <typename Scalar>
LmmseState<Scalar> lmmse_state(const MimoMacChannel<Scalar>& ch, const Eigen::VectorX<Scalar>& v) {
  return LmmseState<Scalar>{v, lmmse_covariance(ch, v)};
}

/// d/dv_k log det R = P_k trace(R^{-1} H_k H_k^H), all users at once.
/// One factorization of R; per-user traces come from solves against H_k.
template <typename Scalar>
Eigen::VectorX<Scalar> log_det_gradient(const MimoMacChannel<Scalar>& ch,
                                        const Eigen::VectorX<Scalar>& v) {
  using Matrix = Eigen::MatrixX<std::complex<Scalar>>;
  const Matrix r = lmmse_covariance(ch, v);
  Eigen::LLT<Matrix> llt(r);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("log_det_gradient: covariance is not positive definite");
  }
  Eigen::VectorX<Scalar> grad(ch.num_users());
  for (int k = 0; k < ch.num_users(); ++k) {
    const Matrix solved = llt.solve(ch.channel(k));
    grad[k] =
        ch.powers()[k] * (ch.channel(k).adjoint() * solved).diagonal().real().sum();
  }
  return grad;
}

/// LMMSE decoder SNR: rho_k = S_k / (1 - v_k S_k) with
/// S_k = P_k sum_i h_{k,i}^H R^{-1} h_{k,i}.
template <typename Scalar>
Eigen::VectorX<Scalar> lmmse_snr(const MimoMacChannel<Scalar>& ch,
                                 const Eigen::VectorX<Scalar>& v) {
  detail::check_mimo_mse(ch, v);
  const Eigen::VectorX<Scalar> s = log_det_gradient(ch, v);
  Eigen::VectorX<Scalar> rho(ch.num_users());
  for (int k = 0; k < ch.num_users(); ++k) {
    const Scalar denom = Scalar(1) - std::max(v[k], Scalar(0)) * s[k];
    if (denom <= Scalar(1e-14)) {
      throw std::domain_error("lmmse_snr: near-singular cancellation for user " +
                              std::to_string(k + 1) + " (v_k * S_k -> 1)");
    }
    rho[k] = s[k] / denom;
  }
  return rho;
}

/// log det(I + (1/sigma^2) H^H P H) in whichever ordering is smaller;
/// both orderings agree by the determinant identity det(I+AB) = det(I+BA).
template <typename Scalar>
Scalar mimo_sum_rate(const MimoMacChannel<Scalar>& ch, RateUnits units = RateUnits::Nats) {
  using Matrix = Eigen::MatrixX<std::complex<Scalar>>;
  const int rx = ch.rx_antennas();
  const int tx = ch.total_tx_antennas();
  Scalar nats;
  if (rx <= tx) {
    Matrix a = Matrix::Identity(rx, rx);
    for (int k = 0; k < ch.num_users(); ++k) {
      a.noalias() +=
          (ch.powers()[k] / ch.noise_var()) * (ch.channel(k) * ch.channel(k).adjoint());
    }
    nats = detail::log_det_hermitian(a, "mimo_sum_rate");
  } else {
    const ConcatenatedChannel<Scalar> cat = concatenate_channels(ch);
    const Eigen::VectorX<Scalar> scale =
        (cat.column_powers / ch.noise_var()).array().sqrt().matrix();
    const Matrix scaled = cat.matrix * scale.template cast<std::complex<Scalar>>().asDiagonal();
    Matrix a = Matrix::Identity(tx, tx);
    a.noalias() += scaled.adjoint() * scaled;
    nats = detail::log_det_hermitian(a, "mimo_sum_rate");
  }
  return units == RateUnits::Nats ? nats : nats / std::log(Scalar(2));
}

/// Per-user rates R_k = -int (d/dv_k log det R) dv_k along the path.
template <typename Scalar>
RateTuple<Scalar> mimo_rates_along_path(const MimoMacChannel<Scalar>& ch,
                                        const DecodingPath<Scalar>& path,
                                        const QuadratureSpec<Scalar>& q = {}) {
  detail::check_quadrature_spec(q);
  if (path.num_users() != ch.num_users()) {
    throw std::invalid_argument("mimo_rates_along_path: path/channel user count mismatch");
  }
  detail::require_valid_path(path);
  auto integral = [&](const PathSamples<Scalar>& grid) -> Eigen::VectorX<Scalar> {
    const Eigen::Index m = grid.mse.cols() - 1;
    const Eigen::MatrixX<Scalar> mid =
        Scalar(0.5) * (grid.mse.leftCols(m) + grid.mse.rightCols(m));
    const Eigen::MatrixX<Scalar> dv = grid.mse.rightCols(m) - grid.mse.leftCols(m);
    Eigen::VectorX<Scalar> acc = Eigen::VectorX<Scalar>::Zero(ch.num_users());
    for (Eigen::Index i = 0; i < m; ++i) {
      if (dv.col(i).isZero(Scalar(0))) continue;
      acc.noalias() -= log_det_gradient<Scalar>(ch, mid.col(i)).cwiseProduct(dv.col(i));
    }
    return acc;
  };
  RateTuple<Scalar> out;
  out.per_user = detail::refine_until_stable(path, q, integral);
  out.sum = out.per_user.sum();
  return out;
}

/// Max deviation between the trace-formula gradient and central finite
/// differences of log det R, over all coordinates at the given interior v.
template <typename Scalar>
Scalar jacobi_gradient_check(const MimoMacChannel<Scalar>& ch, const Eigen::VectorX<Scalar>& v,
                             Scalar h) {
  if (!(h > Scalar(0))) throw std::invalid_argument("jacobi_gradient_check: h must be positive");
  detail::check_mimo_mse(ch, v);
  if ((v.array() < h).any()) {
    throw std::invalid_argument("jacobi_gradient_check: v must be interior with margin h");
  }
  const Eigen::VectorX<Scalar> analytic = log_det_gradient(ch, v);
  Scalar worst = Scalar(0);
  for (int k = 0; k < ch.num_users(); ++k) {
    Eigen::VectorX<Scalar> up = v, down = v;
    up[k] += h;
    down[k] -= h;
    const Scalar fd = (detail::log_det_hermitian(lmmse_covariance(ch, up), "jacobi") -
                       detail::log_det_hermitian(lmmse_covariance(ch, down), "jacobi")) /
                      (Scalar(2) * h);
    worst = std::max(worst, std::abs(fd - analytic[k]));
  }
  return worst;
}

using LmmseStated = LmmseState<double>;

}  // namespace msefield
