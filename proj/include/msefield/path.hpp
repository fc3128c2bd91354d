// Decoding paths v(t) through the MSE hypercube, from all-ones to all-zeros.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace msefield {

enum class PathKind { StraightLine, SicOrder, PiecewiseLinear };

/// Sampled path: column i of `mse` is v(t[i]).
template <typename Scalar>
struct PathSamples {
  Eigen::VectorX<Scalar> t;
  Eigen::MatrixX<Scalar> mse;
};

struct PathValidationReport {
  enum class Violation { None, StartPoint, EndPoint, Range, Monotonicity };
  bool ok = true;
  Violation violation = Violation::None;
  double t = 0.0;
  int user = -1;  // 0-based
  std::string message;
};

/// Piecewise-linear curve v(t), t in [0,1], parametrized by arc length.
/// All kinds are materialized as waypoint lists; validity (endpoints,
/// monotonicity, range) is checked by validate_path, not by construction.
template <typename Scalar>
class DecodingPath {
 public:
  static DecodingPath straight_line(int num_users) {
    if (num_users < 1) throw std::invalid_argument("DecodingPath: need num_users >= 1");
    Eigen::MatrixX<Scalar> w(num_users, 2);
    w.col(0).setOnes();
    w.col(1).setZero();
    return DecodingPath(PathKind::StraightLine, std::move(w), {});
  }

  /// Axis-aligned corner path: segment m drives v_{order[m]} from 1 to 0
  /// while every other component is frozen. `order` is 0-based.
  static DecodingPath sic(std::vector<int> order) {
    const int num_users = static_cast<int>(order.size());
    if (num_users < 1) throw std::invalid_argument("DecodingPath: empty SIC order");
    std::vector<bool> seen(num_users, false);
    for (int u : order) {
      if (u < 0 || u >= num_users || seen[u]) {
        throw std::invalid_argument("DecodingPath: SIC order must be a permutation of the users");
      }
      seen[u] = true;
    }
    Eigen::MatrixX<Scalar> w(num_users, num_users + 1);
    w.col(0).setOnes();
    for (int m = 0; m < num_users; ++m) {
      w.col(m + 1) = w.col(m);
      w(order[m], m + 1) = Scalar(0);
    }
    return DecodingPath(PathKind::SicOrder, std::move(w), std::move(order));
  }

  /// Waypoints given as columns of a K x W matrix, first to last.
  static DecodingPath piecewise_linear(Eigen::MatrixX<Scalar> waypoints) {
    if (waypoints.rows() < 1 || waypoints.cols() < 2) {
      throw std::invalid_argument("DecodingPath: waypoints must be K x W with W >= 2");
    }
    if (!waypoints.allFinite()) {
      throw std::invalid_argument("DecodingPath: waypoints must be finite");
    }
    return DecodingPath(PathKind::PiecewiseLinear, std::move(waypoints), {});
  }

  PathKind kind() const { return kind_; }
  int num_users() const { return static_cast<int>(waypoints_.rows()); }
  int num_waypoints() const { return static_cast<int>(waypoints_.cols()); }
  const Eigen::MatrixX<Scalar>& waypoints() const { return waypoints_; }
  const std::vector<int>& order() const { return order_; }
  /// Parameter value of each waypoint (arc-length fractions, t[0]=0, t[W-1]=1).
  const Eigen::VectorX<Scalar>& waypoint_params() const { return params_; }

  Eigen::VectorX<Scalar> at(Scalar t) const {
    if (t <= Scalar(0)) return waypoints_.col(0);
    if (t >= Scalar(1)) return waypoints_.col(waypoints_.cols() - 1);
    int seg = 0;
    while (seg + 2 < params_.size() && t >= params_[seg + 1]) ++seg;
    const Scalar span = params_[seg + 1] - params_[seg];
    if (span <= Scalar(0)) return waypoints_.col(seg + 1);
    const Scalar s = (t - params_[seg]) / span;
    return waypoints_.col(seg) + s * (waypoints_.col(seg + 1) - waypoints_.col(seg));
  }

 private:
  DecodingPath(PathKind kind, Eigen::MatrixX<Scalar> waypoints, std::vector<int> order)
      : kind_(kind), waypoints_(std::move(waypoints)), order_(std::move(order)) {
    const int w = static_cast<int>(waypoints_.cols());
    Eigen::VectorX<Scalar> lengths(w - 1);
    for (int j = 0; j + 1 < w; ++j) {
      lengths[j] = (waypoints_.col(j + 1) - waypoints_.col(j)).norm();
    }
    const Scalar total = lengths.sum();
    params_.resize(w);
    params_[0] = Scalar(0);
    if (total > Scalar(0)) {
      for (int j = 0; j + 1 < w; ++j) params_[j + 1] = params_[j] + lengths[j] / total;
    } else {
      for (int j = 0; j + 1 < w; ++j) params_[j + 1] = Scalar(j + 1) / Scalar(w - 1);
    }
    params_[w - 1] = Scalar(1);
  }

  PathKind kind_;
  Eigen::MatrixX<Scalar> waypoints_;
  std::vector<int> order_;
  Eigen::VectorX<Scalar> params_;
};

template <typename Scalar>
DecodingPath<Scalar> make_straight_line(int num_users) {
  return DecodingPath<Scalar>::straight_line(num_users);
}

template <typename Scalar>
DecodingPath<Scalar> make_sic_path(std::vector<int> order) {
  return DecodingPath<Scalar>::sic(std::move(order));
}

/// n points including every waypoint; extra points are spread over the
/// segments proportionally to arc length (largest-remainder allocation).
template <typename Scalar>
PathSamples<Scalar> sample_path(const DecodingPath<Scalar>& path, int n) {
  if (n < 2) throw std::invalid_argument("sample_path: need n >= 2");
  const int w = path.num_waypoints();
  if (n < w) {
    throw std::invalid_argument("sample_path: n must be at least the number of waypoints (" +
                                std::to_string(w) + ")");
  }
  const auto& params = path.waypoint_params();
  const int num_segments = w - 1;
  const int extras = n - w;

  Eigen::VectorX<Scalar> seg_span(num_segments);
  for (int j = 0; j < num_segments; ++j) seg_span[j] = params[j + 1] - params[j];
  const Scalar total = seg_span.sum();

  std::vector<int> alloc(num_segments, 0);
  if (extras > 0 && total > Scalar(0)) {
    std::vector<std::pair<Scalar, int>> remainder(num_segments);
    int assigned = 0;
    for (int j = 0; j < num_segments; ++j) {
      const Scalar quota = Scalar(extras) * seg_span[j] / total;
      alloc[j] = static_cast<int>(std::floor(static_cast<double>(quota)));
      assigned += alloc[j];
      remainder[j] = {quota - Scalar(alloc[j]), j};
    }
    std::sort(remainder.begin(), remainder.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    for (int r = 0; r < extras - assigned; ++r) alloc[remainder[r].second] += 1;
  }

  PathSamples<Scalar> out;
  out.t.resize(n);
  out.mse.resize(path.num_users(), n);
  int idx = 0;
  for (int j = 0; j < num_segments; ++j) {
    out.t[idx] = params[j];
    out.mse.col(idx) = path.waypoints().col(j);
    ++idx;
    const int m = alloc[j];
    for (int i = 1; i <= m; ++i) {
      const Scalar s = Scalar(i) / Scalar(m + 1);
      out.t[idx] = params[j] + s * seg_span[j];
      out.mse.col(idx) =
          path.waypoints().col(j) + s * (path.waypoints().col(j + 1) - path.waypoints().col(j));
      ++idx;
    }
  }
  out.t[idx] = params[w - 1];
  out.mse.col(idx) = path.waypoints().col(w - 1);
  return out;
}

/// Checks endpoints exactly, componentwise monotonicity and range containment
/// on a sample grid. Violations are data, not exceptions.
template <typename Scalar>
PathValidationReport validate_path(const DecodingPath<Scalar>& path, int samples = 1024) {
  constexpr double kTol = 1e-12;
  const int n = std::max(samples, path.num_waypoints());
  const PathSamples<Scalar> grid = sample_path(path, n);
  const int num_users = path.num_users();

  PathValidationReport report;
  auto fail = [&](PathValidationReport::Violation kind, double t, int user, std::string msg) {
    report.ok = false;
    report.violation = kind;
    report.t = t;
    report.user = user;
    report.message = std::move(msg);
    return report;
  };

  for (int k = 0; k < num_users; ++k) {
    if (grid.mse(k, 0) != Scalar(1)) {
      return fail(PathValidationReport::Violation::StartPoint, 0.0, k,
                  "path must start at v = 1 for every user; user " + std::to_string(k + 1) +
                      " starts elsewhere");
    }
  }
  for (int k = 0; k < num_users; ++k) {
    if (grid.mse(k, n - 1) != Scalar(0)) {
      return fail(PathValidationReport::Violation::EndPoint, 1.0, k,
                  "path must end at v = 0 for every user; user " + std::to_string(k + 1) +
                      " ends elsewhere");
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < num_users; ++k) {
      const double v = static_cast<double>(grid.mse(k, i));
      if (v < -kTol || v > 1.0 + kTol) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "v_%d(t=%.6g) = %.6g is outside [0, 1]", k + 1,
                      static_cast<double>(grid.t[i]), v);
        return fail(PathValidationReport::Violation::Range, static_cast<double>(grid.t[i]), k, buf);
      }
    }
  }
  for (int i = 0; i + 1 < n; ++i) {
    for (int k = 0; k < num_users; ++k) {
      if (static_cast<double>(grid.mse(k, i + 1)) > static_cast<double>(grid.mse(k, i)) + kTol) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "v_%d increases at t = %.6g", k + 1,
                      static_cast<double>(grid.t[i + 1]));
        return fail(PathValidationReport::Violation::Monotonicity,
                    static_cast<double>(grid.t[i + 1]), k, buf);
      }
    }
  }
  report.message = "ok";
  return report;
}

using DecodingPathd = DecodingPath<double>;
using PathSamplesd = PathSamples<double>;

}  // namespace msefield
