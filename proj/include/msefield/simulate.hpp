// Fixed-point evolution of the iterative receiver and Monte Carlo validation
// of the Gaussian-approximation SNR model.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "msefield/channel.hpp"
#include "msefield/random.hpp"
#include "msefield/transfer.hpp"

namespace msefield {

template <typename Scalar>
struct Trajectory {
  // column n holds the state after n decoder updates; snr = ese_snr(mse)
  Eigen::MatrixX<Scalar> mse;
  Eigen::MatrixX<Scalar> snr;
  bool converged = false;
  int iterations_used = 0;
};

/// Iterates v <- max(psi(phi(v)) - slack, 0) from v = 1 until every component
/// drops below stop_mse, the state stops moving, or max_iter is reached.
/// Non-convergence is data, not an error.
template <typename Scalar>
Trajectory<Scalar> evolve(const MacChannel<Scalar>& ch,
                          const std::vector<DecCharacteristic<Scalar>>& decs,
                          Scalar slack = Scalar(1e-3), int max_iter = 10000,
                          Scalar stop_mse = Scalar(1e-8)) {
  const int num_users = ch.num_users();
  if (static_cast<int>(decs.size()) != num_users) {
    throw std::invalid_argument("evolve: need one DEC per user");
  }
  if (!(slack >= Scalar(0))) throw std::invalid_argument("evolve: slack must be >= 0");
  if (max_iter < 1) throw std::invalid_argument("evolve: max_iter must be >= 1");

  std::vector<Eigen::VectorX<Scalar>> mse_points, snr_points;
  Eigen::VectorX<Scalar> v = Eigen::VectorX<Scalar>::Ones(num_users);
  mse_points.push_back(v);
  snr_points.push_back(ese_snr(ch, v));

  Trajectory<Scalar> out;
  for (int n = 0; n < max_iter; ++n) {
    const Eigen::VectorX<Scalar>& rho = snr_points.back();
    Eigen::VectorX<Scalar> next(num_users);
    for (int k = 0; k < num_users; ++k) {
      next[k] = std::max(dec_apply(decs[k], rho[k]) - slack, Scalar(0));
    }
    mse_points.push_back(next);
    snr_points.push_back(ese_snr(ch, next));
    out.iterations_used = n + 1;
    if ((next.array() < stop_mse).all()) {
      out.converged = true;
      break;
    }
    if (next == v) break;  // exact fixed point, no further progress
    v = std::move(next);
  }

  const int cols = static_cast<int>(mse_points.size());
  out.mse.resize(num_users, cols);
  out.snr.resize(num_users, cols);
  for (int i = 0; i < cols; ++i) {
    out.mse.col(i) = mse_points[i];
    out.snr.col(i) = snr_points[i];
  }
  return out;
}

template <typename Scalar>
struct MonteCarloReport {
  Eigen::VectorX<Scalar> empirical_sinr;
  Eigen::VectorX<Scalar> predicted_sinr;
  Eigen::VectorX<Scalar> sinr_standard_error;
  Eigen::VectorX<Scalar> residual_variance;            // mean |y'_k - sqrt(P_k) h_k x_k|^2
  Eigen::VectorX<Scalar> residual_standard_error;
  Eigen::VectorX<Scalar> predicted_residual_variance;  // sum_{j != k} g_j v_j + sigma^2
  std::int64_t samples = 0;
  std::uint64_t seed = 0;
};

/// Simulates the soft-cancellation front end with Gaussian signaling:
/// decoder feedback x'_k = sqrt(rho'_k) x_k + w at rho'_k = (1 - v_k)/v_k,
/// conditional-mean estimates, per-user cancellation residuals, and the
/// empirical SINR each decoder would see. Sampling is blocked with one
/// deterministic substream per block, so results do not depend on how blocks
/// are scheduled.
template <typename Scalar>
MonteCarloReport<Scalar> monte_carlo_ese(const MacChannel<Scalar>& ch,
                                         const Eigen::VectorX<Scalar>& v_in,
                                         std::int64_t n_samples, std::uint64_t seed) {
  constexpr Scalar kMseFloor = Scalar(1e-12);
  const int num_users = ch.num_users();
  if (n_samples < 10000) {
    throw std::invalid_argument("monte_carlo_ese: need at least 10^4 samples");
  }
  if (v_in.size() != num_users) {
    throw std::invalid_argument("monte_carlo_ese: MSE vector length mismatch");
  }
  if ((v_in.array() < Scalar(-1e-12)).any() || (v_in.array() > Scalar(1) + Scalar(1e-12)).any()) {
    throw std::invalid_argument("monte_carlo_ese: MSE entries must lie in [0, 1]");
  }
  Eigen::VectorX<Scalar> v = v_in.cwiseMax(kMseFloor).cwiseMin(Scalar(1));

  using Complex = std::complex<double>;
  const Eigen::VectorX<Scalar> g = effective_gains(ch);
  std::vector<Complex> amp(num_users);   // sqrt(P_k) h_k
  std::vector<double> shrink(num_users); // sqrt(rho')/(1+rho'): E[x | x']
  std::vector<double> root_prior(num_users);
  for (int k = 0; k < num_users; ++k) {
    const double p = static_cast<double>(ch.powers()[k]);
    const Complex h(static_cast<double>(ch.fading()[k].real()),
                    static_cast<double>(ch.fading()[k].imag()));
    amp[k] = std::sqrt(p) * h;
    const double prior = (1.0 - static_cast<double>(v[k])) / static_cast<double>(v[k]);
    root_prior[k] = std::sqrt(prior);
    shrink[k] = root_prior[k] / (1.0 + prior);
  }
  const double noise_amp = std::sqrt(static_cast<double>(ch.noise_var()));

  constexpr std::int64_t kBlock = 1 << 16;
  Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(num_users);
  Eigen::VectorXd sum_quad = Eigen::VectorXd::Zero(num_users);

  std::vector<Complex> x(num_users), estimate(num_users);
  std::int64_t done = 0;
  for (std::uint64_t block = 0; done < n_samples; ++block) {
    SampleStream stream(seed, block);
    const std::int64_t count = std::min(kBlock, n_samples - done);
    Eigen::VectorXd block_sq = Eigen::VectorXd::Zero(num_users);
    Eigen::VectorXd block_quad = Eigen::VectorXd::Zero(num_users);
    for (std::int64_t s = 0; s < count; ++s) {
      Complex y = 0.0;
      for (int k = 0; k < num_users; ++k) {
        x[k] = stream.complex_normal();
        y += amp[k] * x[k];
      }
      for (int k = 0; k < num_users; ++k) {
        const Complex feedback = root_prior[k] * x[k] + stream.complex_normal();
        estimate[k] = shrink[k] * feedback;
      }
      y += noise_amp * stream.complex_normal();
      for (int k = 0; k < num_users; ++k) {
        Complex cleaned = y;
        for (int j = 0; j < num_users; ++j) {
          if (j != k) cleaned -= amp[j] * estimate[j];
        }
        const double r2 = std::norm(cleaned - amp[k] * x[k]);
        block_sq[k] += r2;
        block_quad[k] += r2 * r2;
      }
    }
    sum_sq += block_sq;
    sum_quad += block_quad;
    done += count;
  }

  MonteCarloReport<Scalar> report;
  report.samples = n_samples;
  report.seed = seed;
  report.empirical_sinr.resize(num_users);
  report.predicted_sinr = ese_snr(ch, v);
  report.sinr_standard_error.resize(num_users);
  report.residual_variance.resize(num_users);
  report.residual_standard_error.resize(num_users);
  report.predicted_residual_variance.resize(num_users);
  const double n = static_cast<double>(n_samples);
  for (int k = 0; k < num_users; ++k) {
    const double mean = sum_sq[k] / n;
    const double var = std::max(sum_quad[k] / n - mean * mean, 0.0);
    const double se_mean = std::sqrt(var / n);
    report.residual_variance[k] = static_cast<Scalar>(mean);
    report.residual_standard_error[k] = static_cast<Scalar>(se_mean);
    report.predicted_residual_variance[k] =
        g.dot(v) - g[k] * v[k] + ch.noise_var();
    report.empirical_sinr[k] = static_cast<Scalar>(static_cast<double>(g[k]) / mean);
    // delta method: SINR = g/mean, so se(SINR) ~= g se(mean) / mean^2
    report.sinr_standard_error[k] =
        static_cast<Scalar>(static_cast<double>(g[k]) * se_mean / (mean * mean));
  }
  return report;
}

using Trajectoryd = Trajectory<double>;
using MonteCarloReportd = MonteCarloReport<double>;

}  // namespace msefield
