// Achievable-rate integrals along decoding paths.
//
// The per-user rate is the line integral -int g_k/(g.v + sigma^2) dv_k along
// the path for Gaussian inputs, or int f(rho_k + f^{-1}(v_k)) drho_k for a
// general MMSE curve f. The Gaussian integrand is the gradient of
// log(sigma^2 + g.v), so full-path sums depend only on the endpoints.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "msefield/channel.hpp"
#include "msefield/mmse.hpp"
#include "msefield/path.hpp"
#include "msefield/transfer.hpp"

namespace msefield {

enum class RateUnits { Nats, Bits };

template <typename Scalar>
struct RateTuple {
  Eigen::VectorX<Scalar> per_user;
  Scalar sum = Scalar(0);
  RateUnits units = RateUnits::Nats;
};

template <typename Scalar>
RateTuple<Scalar> convert_units(const RateTuple<Scalar>& r, RateUnits units) {
  if (units == r.units) return r;
  const Scalar ln2 = std::log(Scalar(2));
  const Scalar factor = (units == RateUnits::Bits) ? Scalar(1) / ln2 : ln2;
  return RateTuple<Scalar>{r.per_user * factor, r.sum * factor, units};
}

template <typename Scalar>
struct QuadratureSpec {
  int base_samples = 2048;
  Scalar refinement_tolerance = Scalar(1e-9);
};

class InvalidPathError : public std::invalid_argument {
 public:
  explicit InvalidPathError(PathValidationReport report)
      : std::invalid_argument("invalid decoding path: " + report.message),
        report_(std::move(report)) {}
  const PathValidationReport& report() const { return report_; }

 private:
  PathValidationReport report_;
};

namespace detail {

inline constexpr int kMaxSamples = 1 << 22;

template <typename Scalar>
void check_quadrature_spec(const QuadratureSpec<Scalar>& q) {
  if (q.base_samples < 16) {
    throw std::invalid_argument("QuadratureSpec: base_samples must be >= 16");
  }
  if (!(q.refinement_tolerance > Scalar(0))) {
    throw std::invalid_argument("QuadratureSpec: refinement_tolerance must be positive");
  }
}

template <typename Scalar>
void require_valid_path(const DecodingPath<Scalar>& path) {
  PathValidationReport report = validate_path(path, 1024);
  if (!report.ok) throw InvalidPathError(std::move(report));
}

/// Midpoint-rule line integral of the Gaussian integrand over sampled points:
/// R_k = -sum_i g_k * dv_k,i / (g . vmid_i + sigma^2).
template <typename Scalar>
Eigen::VectorX<Scalar> gaussian_line_integral(const Eigen::VectorX<Scalar>& gains,
                                              Scalar noise_var,
                                              const Eigen::MatrixX<Scalar>& samples) {
  const Eigen::Index m = samples.cols() - 1;
  const Eigen::MatrixX<Scalar> mid =
      Scalar(0.5) * (samples.leftCols(m) + samples.rightCols(m));
  const Eigen::MatrixX<Scalar> dv = samples.rightCols(m) - samples.leftCols(m);
  Eigen::VectorX<Scalar> inv_denom =
      ((gains.transpose() * mid).array() + noise_var).inverse().matrix().transpose();
  return -(dv * inv_denom).cwiseProduct(gains);
}

/// Doubles the grid until per-user changes drop below the relative tolerance.
template <typename Scalar, typename Integral>
Eigen::VectorX<Scalar> refine_until_stable(const DecodingPath<Scalar>& path,
                                           const QuadratureSpec<Scalar>& q,
                                           Integral&& integral_on_grid) {
  int n = std::max(q.base_samples, path.num_waypoints());
  Eigen::VectorX<Scalar> prev = integral_on_grid(sample_path(path, n));
  while (true) {
    n *= 2;
    Eigen::VectorX<Scalar> next = integral_on_grid(sample_path(path, n));
    const Scalar scale = std::max(Scalar(1), next.template lpNorm<Eigen::Infinity>());
    if ((next - prev).template lpNorm<Eigen::Infinity>() <= q.refinement_tolerance * scale) {
      return next;
    }
    if (n > kMaxSamples) {
      throw std::runtime_error("rate quadrature did not converge within the sample budget");
    }
    prev = std::move(next);
  }
}

/// Midpoint-with-doubling quadrature of f over [0, b].
template <typename Scalar, typename F>
Scalar integrate_to(const F& f, Scalar b, Scalar tol) {
  if (b <= Scalar(0)) return Scalar(0);
  int n = 64;
  auto midpoint = [&](int cells) {
    const Scalar h = b / Scalar(cells);
    Scalar acc = Scalar(0);
    for (int i = 0; i < cells; ++i) acc += f((Scalar(i) + Scalar(0.5)) * h);
    return acc * h;
  };
  Scalar prev = midpoint(n);
  while (true) {
    n *= 2;
    const Scalar next = midpoint(n);
    if (std::abs(next - prev) <= tol * std::max(Scalar(1), std::abs(next))) return next;
    if (n > kMaxSamples) {
      throw std::runtime_error("mmse head quadrature did not converge");
    }
    prev = next;
  }
}

/// rho_k at every sampled point, one column per sample.
template <typename Scalar>
Eigen::MatrixX<Scalar> snr_along_samples(const Eigen::VectorX<Scalar>& gains, Scalar noise_var,
                                         const Eigen::MatrixX<Scalar>& samples) {
  const Eigen::RowVectorX<Scalar> weighted = gains.transpose() * samples;
  Eigen::MatrixX<Scalar> rho(samples.rows(), samples.cols());
  for (Eigen::Index k = 0; k < samples.rows(); ++k) {
    rho.row(k) = gains[k] /
                 (weighted.array() - gains[k] * samples.row(k).array() + noise_var);
  }
  return rho;
}

}  // namespace detail

/// Potential whose gradient is the Gaussian rate integrand.
template <typename Scalar>
Scalar mse_potential(const MacChannel<Scalar>& ch, const Eigen::VectorX<Scalar>& v) {
  return std::log(ch.noise_var() + effective_gains(ch).dot(v));
}

template <typename Scalar>
Eigen::VectorX<Scalar> mse_potential_gradient(const MacChannel<Scalar>& ch,
                                              const Eigen::VectorX<Scalar>& v) {
  const Eigen::VectorX<Scalar> g = effective_gains(ch);
  return g / (ch.noise_var() + g.dot(v));
}

/// Per-user rates for Gaussian inputs by composite midpoint quadrature along
/// the path, refined by grid doubling until stable.
template <typename Scalar>
RateTuple<Scalar> rates_gaussian(const MacChannel<Scalar>& ch, const DecodingPath<Scalar>& path,
                                 const QuadratureSpec<Scalar>& q = {}) {
  detail::check_quadrature_spec(q);
  if (path.num_users() != ch.num_users()) {
    throw std::invalid_argument("rates_gaussian: path/channel user count mismatch");
  }
  detail::require_valid_path(path);
  const Eigen::VectorX<Scalar> g = effective_gains(ch);
  const Scalar s2 = ch.noise_var();
  Eigen::VectorX<Scalar> per_user =
      detail::refine_until_stable(path, q, [&](const PathSamples<Scalar>& grid) {
        return detail::gaussian_line_integral(g, s2, grid.mse);
      });
  RateTuple<Scalar> out;
  out.per_user = std::move(per_user);
  out.sum = out.per_user.sum();
  return out;
}

/// log(1 + sum_k g_k / sigma^2): the full-path sum rate, any path.
template <typename Scalar>
Scalar sum_rate_closed_form(const MacChannel<Scalar>& ch, RateUnits units = RateUnits::Nats) {
  const Scalar nats = std::log1p(effective_gains(ch).sum() / ch.noise_var());
  return units == RateUnits::Nats ? nats : nats / std::log(Scalar(2));
}

/// Straight-line split: R_k = (g_k / sum g) log(1 + sum g / sigma^2).
template <typename Scalar>
RateTuple<Scalar> straight_line_rates_closed_form(const MacChannel<Scalar>& ch,
                                                  RateUnits units = RateUnits::Nats) {
  const Eigen::VectorX<Scalar> g = effective_gains(ch);
  const Scalar total = g.sum();
  if (!(total > Scalar(0))) {
    throw std::invalid_argument("straight_line_rates_closed_form: all gains are zero");
  }
  RateTuple<Scalar> out;
  out.per_user = (g / total) * std::log1p(total / ch.noise_var());
  out.sum = out.per_user.sum();
  out.units = RateUnits::Nats;
  return convert_units(out, units);
}

/// General-alphabet rates via the rho-parametrization:
/// R_k = int_0^{rho_k,min} f + int_path f(rho_k + f^{-1}(v_k)) drho_k.
/// The leading piece covers the SNR ramp before the decoder engages (v_k = 1);
/// past the path end v_k = 0 makes the integrand vanish.
template <typename Scalar>
RateTuple<Scalar> rate_general_alphabet(const MacChannel<Scalar>& ch,
                                        const DecodingPath<Scalar>& path,
                                        const MmseFunction<Scalar>& fn,
                                        const QuadratureSpec<Scalar>& q = {}) {
  detail::check_quadrature_spec(q);
  if (path.num_users() != ch.num_users()) {
    throw std::invalid_argument("rate_general_alphabet: path/channel user count mismatch");
  }
  detail::require_valid_path(path);
  const Eigen::VectorX<Scalar> g = effective_gains(ch);
  const Scalar s2 = ch.noise_var();
  const int num_users = ch.num_users();
  const SnrBounds<Scalar> bounds = ese_snr_bounds(ch);

  Eigen::VectorX<Scalar> head(num_users);
  for (int k = 0; k < num_users; ++k) {
    head[k] = detail::integrate_to([&](Scalar rho) { return fn(rho); }, bounds.min[k],
                                   q.refinement_tolerance);
  }

  auto path_part = [&](const PathSamples<Scalar>& grid) -> Eigen::VectorX<Scalar> {
    const Eigen::Index m = grid.mse.cols() - 1;
    const Eigen::MatrixX<Scalar> mid =
        Scalar(0.5) * (grid.mse.leftCols(m) + grid.mse.rightCols(m));
    const Eigen::MatrixX<Scalar> rho = detail::snr_along_samples(g, s2, grid.mse);
    const Eigen::MatrixX<Scalar> rho_mid = detail::snr_along_samples(g, s2, mid);
    Eigen::VectorX<Scalar> per_user(num_users);
    for (int k = 0; k < num_users; ++k) {
      Scalar acc = Scalar(0);
      Scalar prior_snr = Scalar(0);  // warm start: f^{-1}(v_k) grows along the path
      for (Eigen::Index i = 0; i < m; ++i) {
        const Scalar drho = rho(k, i + 1) - rho(k, i);
        if (drho == Scalar(0)) continue;
        const Scalar v = mid(k, i);
        Scalar value;
        if (v <= Scalar(0)) {
          value = Scalar(0);
        } else if (v >= Scalar(1)) {
          value = fn(rho_mid(k, i));
        } else {
          prior_snr = fn.inverse(v, prior_snr);
          value = fn(rho_mid(k, i) + prior_snr);
        }
        acc += value * drho;
      }
      per_user[k] = acc;
    }
    return head + per_user;
  };

  RateTuple<Scalar> out;
  out.per_user = detail::refine_until_stable(path, q, path_part);
  out.sum = out.per_user.sum();
  return out;
}

template <typename Scalar>
struct PathIndependenceReport {
  Eigen::VectorX<Scalar> sums;        // one entry per path, nats
  Scalar closed_form = Scalar(0);     // log(1 + sum g / sigma^2)
  Scalar max_pairwise_deviation = Scalar(0);
  Scalar max_closed_form_gap = Scalar(0);
};

template <typename Scalar>
PathIndependenceReport<Scalar> verify_path_independence(
    const MacChannel<Scalar>& ch, const std::vector<DecodingPath<Scalar>>& paths,
    const QuadratureSpec<Scalar>& q = {}) {
  if (paths.empty()) {
    throw std::invalid_argument("verify_path_independence: need at least one path");
  }
  PathIndependenceReport<Scalar> report;
  report.sums.resize(static_cast<Eigen::Index>(paths.size()));
  for (std::size_t i = 0; i < paths.size(); ++i) {
    report.sums[static_cast<Eigen::Index>(i)] = rates_gaussian(ch, paths[i], q).sum;
  }
  report.closed_form = sum_rate_closed_form(ch);
  report.max_pairwise_deviation = report.sums.maxCoeff() - report.sums.minCoeff();
  report.max_closed_form_gap =
      (report.sums.array() - report.closed_form).abs().maxCoeff();
  return report;
}

using RateTupled = RateTuple<double>;
using QuadratureSpecd = QuadratureSpec<double>;
using PathIndependenceReportd = PathIndependenceReport<double>;

}  // namespace msefield
