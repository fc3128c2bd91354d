// Shared test fixtures: seeded random channels/paths and independent
// Monte Carlo / brute-force oracles. Oracles stay clear of the library code
// paths they are used to check.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <msefield/channel.hpp>
#include <msefield/path.hpp>
#include <msefield/random.hpp>

namespace testsupport {

inline double uniform_in(msefield::SampleStream& s, double lo, double hi) {
  return lo + (hi - lo) * s.uniform();
}

/// Channel with powers in [0.2, 2.5], fading of magnitude [0.5, 1.5] at a
/// random phase, and noise variance in [0.5, 2].
inline msefield::MacChanneld random_channel(std::uint64_t seed, int num_users) {
  msefield::SampleStream s(seed, 0xC0FFEE);
  Eigen::VectorXd powers(num_users);
  Eigen::VectorXcd fading(num_users);
  for (int k = 0; k < num_users; ++k) {
    powers[k] = uniform_in(s, 0.2, 2.5);
    const double mag = uniform_in(s, 0.5, 1.5);
    const double phase = uniform_in(s, 0.0, 2.0 * M_PI);
    fading[k] = std::polar(mag, phase);
  }
  return msefield::MacChanneld(powers, fading, uniform_in(s, 0.5, 2.0));
}

/// Valid monotone piecewise-linear path with the given number of interior
/// waypoints: per user, sorted descending uniforms.
inline msefield::DecodingPathd random_monotone_path(std::uint64_t seed, int num_users,
                                                    int interior) {
  msefield::SampleStream s(seed, 0xBADCAB);
  Eigen::MatrixXd w(num_users, interior + 2);
  w.col(0).setOnes();
  w.col(interior + 1).setZero();
  for (int k = 0; k < num_users; ++k) {
    std::vector<double> levels(interior);
    for (auto& x : levels) x = s.uniform();
    std::sort(levels.begin(), levels.end(), std::greater<>());
    for (int i = 0; i < interior; ++i) w(k, i + 1) = levels[i];
  }
  return msefield::DecodingPathd::piecewise_linear(w);
}

/// Seeded MIMO channel: entries are complex normals, N_R rows, per-user
/// antenna counts as given.
inline msefield::MimoMacChanneld random_mimo_channel(std::uint64_t seed, int rx,
                                                     const std::vector<int>& tx_per_user) {
  msefield::SampleStream s(seed, 0x3113);
  std::vector<Eigen::MatrixXcd> channels;
  for (int tx : tx_per_user) {
    Eigen::MatrixXcd h(rx, tx);
    for (Eigen::Index r = 0; r < h.rows(); ++r) {
      for (Eigen::Index c = 0; c < h.cols(); ++c) h(r, c) = s.complex_normal();
    }
    channels.push_back(std::move(h));
  }
  Eigen::VectorXd powers(static_cast<Eigen::Index>(tx_per_user.size()));
  for (Eigen::Index k = 0; k < powers.size(); ++k) powers[k] = uniform_in(s, 0.2, 2.0);
  return msefield::MimoMacChanneld(std::move(channels), powers, uniform_in(s, 0.5, 2.0));
}

struct McEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
};

/// Monte Carlo conditional-mean MMSE of unit-energy QPSK at SNR rho:
/// y = sqrt(rho) x + z with z ~ CN(0,1); the per-dimension conditional mean
/// is tanh(sqrt(2 rho) y_dim)/sqrt(2).
inline McEstimate mc_qpsk_mmse(double rho, long long samples, std::uint64_t seed) {
  msefield::SampleStream s(seed, 0x517EA7);
  const double root = std::sqrt(rho);
  const double slope = std::sqrt(2.0 * rho);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  double sum = 0.0, sum_sq = 0.0;
  for (long long i = 0; i < samples; ++i) {
    const double si = s.uniform() < 0.5 ? -1.0 : 1.0;
    const double sq = s.uniform() < 0.5 ? -1.0 : 1.0;
    const std::complex<double> x(si * inv_sqrt2, sq * inv_sqrt2);
    const std::complex<double> y = root * x + s.complex_normal();
    const std::complex<double> xhat(std::tanh(slope * y.real()) * inv_sqrt2,
                                    std::tanh(slope * y.imag()) * inv_sqrt2);
    const double err = std::norm(x - xhat);
    sum += err;
    sum_sq += err * err;
  }
  const double n = static_cast<double>(samples);
  McEstimate out;
  out.mean = sum / n;
  out.standard_error = std::sqrt(std::max(sum_sq / n - out.mean * out.mean, 0.0) / n);
  return out;
}

/// Monte Carlo mutual information (nats) of unit-energy QPSK over the complex
/// AWGN channel at the given SNR.
inline McEstimate mc_qpsk_mutual_info(double snr, long long samples, std::uint64_t seed) {
  msefield::SampleStream s(seed, 0x1F0);
  const double root = std::sqrt(snr);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  const std::complex<double> constellation[4] = {
      {inv_sqrt2, inv_sqrt2}, {inv_sqrt2, -inv_sqrt2}, {-inv_sqrt2, inv_sqrt2},
      {-inv_sqrt2, -inv_sqrt2}};
  double sum = 0.0, sum_sq = 0.0;
  for (long long i = 0; i < samples; ++i) {
    const int idx = static_cast<int>(s.uniform() * 4.0) & 3;
    const std::complex<double> z = s.complex_normal();
    const std::complex<double> y = root * constellation[idx] + z;
    double d[4];
    double dmin = 1e300;
    for (int c = 0; c < 4; ++c) {
      d[c] = std::norm(y - root * constellation[c]);
      dmin = std::min(dmin, d[c]);
    }
    double lse = 0.0;
    for (int c = 0; c < 4; ++c) lse += std::exp(dmin - d[c]);
    // -log p(x|y) = log sum_c exp(-d_c) + d_x
    const double h = std::log(lse) - dmin + std::norm(z);
    sum += h;
    sum_sq += h * h;
  }
  const double n = static_cast<double>(samples);
  McEstimate out;
  const double mean_h = sum / n;
  out.mean = std::log(4.0) - mean_h;
  out.standard_error = std::sqrt(std::max(sum_sq / n - mean_h * mean_h, 0.0) / n);
  return out;
}

/// Direct subset scan of the region constraints, independent of the region
/// module's enumeration.
inline bool brute_force_feasible(const Eigen::VectorXd& gains, double noise_var,
                                 const Eigen::VectorXd& rates, double slack) {
  const int num_users = static_cast<int>(gains.size());
  for (unsigned mask = 1; mask < (1u << num_users); ++mask) {
    double gain_sum = 0.0, rate_sum = 0.0;
    for (int k = 0; k < num_users; ++k) {
      if (mask & (1u << k)) {
        gain_sum += gains[k];
        rate_sum += rates[k];
      }
    }
    if (rate_sum > std::log1p(gain_sum / noise_var) + slack) return false;
  }
  return true;
}

/// Closed-form rates of the successive-cancellation corner for the given
/// decode order (first entry decoded first, under full interference).
inline Eigen::VectorXd sic_corner_rates(const Eigen::VectorXd& gains, double noise_var,
                                        const std::vector<int>& order) {
  Eigen::VectorXd rates(gains.size());
  double remaining = gains.sum();
  for (int u : order) {
    rates[u] = std::log((remaining + noise_var) / (remaining - gains[u] + noise_var));
    remaining -= gains[u];
  }
  return rates;
}

}  // namespace testsupport
