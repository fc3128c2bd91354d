// ESE transfer function, SNR bounds, and matched decoder characteristics.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "msefield/channel.hpp"
#include "msefield/path.hpp"

namespace msefield {

namespace detail {

template <typename Scalar>
void check_mse_vector(const MacChannel<Scalar>& ch, const Eigen::VectorX<Scalar>& v) {
  if (v.size() != ch.num_users()) {
    throw std::invalid_argument("MSE vector length must equal the number of users");
  }
  if ((v.array() < Scalar(-1e-12)).any() || (v.array() > Scalar(1) + Scalar(1e-12)).any()) {
    throw std::invalid_argument("MSE entries must lie in [0, 1]");
  }
}

}  // namespace detail

/// Soft-cancellation SNR seen by each decoder:
/// rho_k = g_k / (sum_{j != k} g_j v_j + sigma^2).
template <typename Scalar>
Eigen::VectorX<Scalar> ese_snr(const MacChannel<Scalar>& ch, const Eigen::VectorX<Scalar>& v) {
  detail::check_mse_vector(ch, v);
  const Eigen::VectorX<Scalar> g = effective_gains(ch);
  const Scalar weighted = g.dot(v);
  const Eigen::ArrayX<Scalar> denom =
      weighted - (g.array() * v.array()) + ch.noise_var();
  return (g.array() / denom).matrix();
}

template <typename Scalar>
struct SnrBounds {
  Eigen::VectorX<Scalar> min;  // all interference present (v = 1)
  Eigen::VectorX<Scalar> max;  // interference-free (v = 0)
};

template <typename Scalar>
SnrBounds<Scalar> ese_snr_bounds(const MacChannel<Scalar>& ch) {
  const Eigen::VectorX<Scalar> g = effective_gains(ch);
  SnrBounds<Scalar> b;
  b.min = (g.array() / (g.sum() - g.array() + ch.noise_var())).matrix();
  b.max = g / ch.noise_var();
  return b;
}

/// Matched decoder curve for the straight-line path:
/// v_k(rho) = (g_k/rho - sigma^2) / sum_{j != k} g_j, clamped to [0, 1].
template <typename Scalar>
struct StraightLineDec {
  Scalar gain;
  Scalar noise_var;
  Scalar other_gain_sum;
};

/// Step curve: v = 1 below the threshold, v = 0 at and above it.
template <typename Scalar>
struct SicStepDec {
  Scalar threshold;
};

/// Strictly increasing SNR grid with non-increasing MSE values.
template <typename Scalar>
struct TabulatedDec {
  Eigen::VectorX<Scalar> snr;
  Eigen::VectorX<Scalar> mse;
};

template <typename Scalar>
struct DecCharacteristic {
  int user = 0;  // 0-based
  std::variant<StraightLineDec<Scalar>, SicStepDec<Scalar>, TabulatedDec<Scalar>> curve;
};

/// Raised when eliminating t between v_k(t) and rho_k(t) is impossible
/// because rho_k decreases somewhere along the path.
class NonMonotoneSnrError : public std::runtime_error {
 public:
  NonMonotoneSnrError(int user, double t_begin, double t_end)
      : std::runtime_error("no single-valued DEC curve: rho_" + std::to_string(user + 1) +
                           " decreases on t in [" + std::to_string(t_begin) + ", " +
                           std::to_string(t_end) + "]"),
        user_(user),
        t_begin_(t_begin),
        t_end_(t_end) {}
  int user() const { return user_; }
  double t_begin() const { return t_begin_; }
  double t_end() const { return t_end_; }

 private:
  int user_;
  double t_begin_, t_end_;
};

/// Sorts by SNR, collapses duplicate SNR entries to their smallest MSE
/// (the curve is closed on the right), rejects increasing MSE runs.
template <typename Scalar>
DecCharacteristic<Scalar> make_tabulated_dec(int user, const Eigen::VectorX<Scalar>& snr,
                                             const Eigen::VectorX<Scalar>& mse) {
  if (snr.size() != mse.size() || snr.size() < 2) {
    throw std::invalid_argument("tabulated DEC needs matching grids with >= 2 points");
  }
  std::vector<int> idx(snr.size());
  for (int i = 0; i < snr.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return snr[a] < snr[b]; });

  std::vector<Scalar> r, v;
  r.reserve(idx.size());
  v.reserve(idx.size());
  for (int i : idx) {
    const Scalar tie_tol = Scalar(1e-12) * std::max(Scalar(1), std::abs(snr[i]));
    if (!r.empty() && snr[i] <= r.back() + tie_tol) {
      v.back() = std::min(v.back(), mse[i]);
      continue;
    }
    if (!v.empty() && mse[i] > v.back() + Scalar(1e-12)) {
      throw std::invalid_argument("tabulated DEC must have non-increasing MSE in SNR");
    }
    r.push_back(snr[i]);
    v.push_back(std::min(mse[i], v.empty() ? mse[i] : v.back()));
  }
  if (r.size() < 2) {
    throw std::invalid_argument("tabulated DEC degenerates to a single SNR point");
  }
  DecCharacteristic<Scalar> dec;
  dec.user = user;
  TabulatedDec<Scalar> tab;
  tab.snr = Eigen::Map<const Eigen::VectorX<Scalar>>(r.data(), r.size());
  tab.mse = Eigen::Map<const Eigen::VectorX<Scalar>>(v.data(), v.size());
  dec.curve = std::move(tab);
  return dec;
}

/// Per-user decoder curve that matches the ESE along the given path, obtained
/// by eliminating t between v_k(t) and rho_k(t). Straight-line and SIC paths
/// get their closed forms; other paths are tabulated on `grid_size` samples.
/// The elimination only needs rho_k(t) non-decreasing, which is checked
/// directly; full path validity is the caller's contract (validate_path).
template <typename Scalar>
DecCharacteristic<Scalar> synthesize_matching_dec(const MacChannel<Scalar>& ch,
                                                  const DecodingPath<Scalar>& path, int user,
                                                  int grid_size = 2048) {
  if (user < 0 || user >= ch.num_users()) {
    throw std::invalid_argument("synthesize_matching_dec: user index out of range");
  }
  if (path.num_users() != ch.num_users()) {
    throw std::invalid_argument("synthesize_matching_dec: path/channel user count mismatch");
  }
  if ((path.waypoints().col(0).array() != Scalar(1)).any() ||
      (path.waypoints().col(path.num_waypoints() - 1).array() != Scalar(0)).any()) {
    throw std::invalid_argument(
        "synthesize_matching_dec: path must run from all-ones to all-zeros");
  }
  const Eigen::VectorX<Scalar> g = effective_gains(ch);
  DecCharacteristic<Scalar> dec;
  dec.user = user;

  if (path.kind() == PathKind::StraightLine) {
    const Scalar other = g.sum() - g[user];
    if (other > Scalar(0)) {
      dec.curve = StraightLineDec<Scalar>{g[user], ch.noise_var(), other};
    } else {
      // no interference: v drops at the constant SNR g_k / sigma^2
      dec.curve = SicStepDec<Scalar>{g[user] / ch.noise_var()};
    }
    return dec;
  }
  if (path.kind() == PathKind::SicOrder) {
    Scalar interference = Scalar(0);
    bool found = false;
    const auto& order = path.order();
    for (int m = static_cast<int>(order.size()) - 1; m >= 0; --m) {
      if (order[m] == user) {
        found = true;
        break;
      }
      interference += g[order[m]];
    }
    if (!found) throw std::logic_error("synthesize_matching_dec: user missing from SIC order");
    dec.curve = SicStepDec<Scalar>{g[user] / (interference + ch.noise_var())};
    return dec;
  }

  const PathSamples<Scalar> grid = sample_path(path, std::max(grid_size, 2));
  const int n = static_cast<int>(grid.t.size());
  Eigen::VectorX<Scalar> rho(n);
  for (int i = 0; i < n; ++i) {
    rho[i] = ese_snr<Scalar>(ch, grid.mse.col(i))[user];
  }
  for (int i = 0; i + 1 < n; ++i) {
    const Scalar tol = Scalar(1e-12) * std::max(Scalar(1), std::abs(rho[i]));
    if (rho[i + 1] < rho[i] - tol) {
      throw NonMonotoneSnrError(user, static_cast<double>(grid.t[i]),
                                static_cast<double>(grid.t[i + 1]));
    }
  }
  const Scalar span_tol = Scalar(1e-12) * std::max(Scalar(1), std::abs(rho[0]));
  if (rho[n - 1] - rho[0] <= span_tol) {
    // constant-SNR elimination: the whole descent happens at one threshold
    dec.curve = SicStepDec<Scalar>{rho[0]};
    return dec;
  }
  const Eigen::VectorX<Scalar> mse_row = grid.mse.row(user).transpose();
  return make_tabulated_dec(user, rho, mse_row);
}

template <typename Scalar>
Scalar dec_apply(const DecCharacteristic<Scalar>& dec, Scalar rho) {
  if (!(rho >= Scalar(0))) {
    throw std::domain_error("dec_apply: rho must be nonnegative");
  }
  if (const auto* line = std::get_if<StraightLineDec<Scalar>>(&dec.curve)) {
    if (rho <= Scalar(0)) return Scalar(1);
    const Scalar v = (line->gain / rho - line->noise_var) / line->other_gain_sum;
    return std::clamp(v, Scalar(0), Scalar(1));
  }
  if (const auto* step = std::get_if<SicStepDec<Scalar>>(&dec.curve)) {
    return rho >= step->threshold ? Scalar(0) : Scalar(1);
  }
  const auto& tab = std::get<TabulatedDec<Scalar>>(dec.curve);
  if (rho <= tab.snr[0]) return tab.mse[0];
  const int n = static_cast<int>(tab.snr.size());
  if (rho >= tab.snr[n - 1]) return tab.mse[n - 1];
  const Scalar* begin = tab.snr.data();
  const int hi = static_cast<int>(std::upper_bound(begin, begin + n, rho) - begin);
  const int lo = hi - 1;
  const Scalar s = (rho - tab.snr[lo]) / (tab.snr[hi] - tab.snr[lo]);
  return tab.mse[lo] + s * (tab.mse[hi] - tab.mse[lo]);
}

using DecCharacteristicd = DecCharacteristic<double>;

}  // namespace msefield
