// Capacity-region geometry: subset constraints, feasibility, and synthesis of
// a decoding path realizing a target rate tuple on the maximal sum-rate face.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "msefield/channel.hpp"
#include "msefield/path.hpp"
#include "msefield/rates.hpp"

namespace msefield {

template <typename Scalar>
struct RegionConstraint {
  std::vector<int> subset;  // 0-based user indices, sorted
  Scalar bound = Scalar(0);  // nats: sum_{k in S} R_k <= bound
};

namespace detail {

inline std::string subset_to_string(const std::vector<int>& subset) {
  std::string s = "{";
  for (std::size_t i = 0; i < subset.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(subset[i] + 1);
  }
  return s + "}";
}

}  // namespace detail

class InfeasibleTargetError : public std::runtime_error {
 public:
  InfeasibleTargetError(std::string what, std::vector<std::vector<int>> violated)
      : std::runtime_error(std::move(what)), violated_subsets_(std::move(violated)) {}
  const std::vector<std::vector<int>>& violated_subsets() const { return violated_subsets_; }

 private:
  std::vector<std::vector<int>> violated_subsets_;
};

class OffSumRateFaceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// All 2^K - 1 non-empty subset constraints
/// sum_{k in S} R_k <= log(1 + sum_{k in S} g_k / sigma^2),
/// ordered by subset size, then lexicographically.
template <typename Scalar>
std::vector<RegionConstraint<Scalar>> enumerate_constraints(const MacChannel<Scalar>& ch) {
  const int num_users = ch.num_users();
  if (num_users > 20) {
    throw std::invalid_argument("enumerate_constraints: K > 20 would enumerate > 1M subsets");
  }
  const Eigen::VectorX<Scalar> g = effective_gains(ch);
  std::vector<RegionConstraint<Scalar>> out;
  out.reserve((std::size_t(1) << num_users) - 1);

  std::vector<int> subset;
  auto emit = [&]() {
    Scalar gain_sum = Scalar(0);
    for (int k : subset) gain_sum += g[k];
    out.push_back({subset, std::log1p(gain_sum / ch.noise_var())});
  };
  // lexicographic combinations of each size
  for (int size = 1; size <= num_users; ++size) {
    subset.resize(size);
    for (int i = 0; i < size; ++i) subset[i] = i;
    while (true) {
      emit();
      int i = size - 1;
      while (i >= 0 && subset[i] == num_users - size + i) --i;
      if (i < 0) break;
      ++subset[i];
      for (int j = i + 1; j < size; ++j) subset[j] = subset[j - 1] + 1;
    }
  }
  return out;
}

template <typename Scalar>
struct FeasibilityReport {
  bool feasible = true;
  std::vector<RegionConstraint<Scalar>> violated;  // sum exceeds bound + slack
  std::vector<RegionConstraint<Scalar>> tight;     // |sum - bound| <= slack
};

template <typename Scalar>
FeasibilityReport<Scalar> is_feasible(const MacChannel<Scalar>& ch, const RateTuple<Scalar>& rates,
                                      Scalar slack = Scalar(1e-9)) {
  if (rates.per_user.size() != ch.num_users()) {
    throw std::invalid_argument("is_feasible: rate tuple size mismatch");
  }
  if ((rates.per_user.array() < Scalar(0)).any()) {
    throw std::invalid_argument("is_feasible: rates must be nonnegative");
  }
  const RateTuple<Scalar> nats = convert_units(rates, RateUnits::Nats);
  FeasibilityReport<Scalar> report;
  for (auto& c : enumerate_constraints(ch)) {
    Scalar sum = Scalar(0);
    for (int k : c.subset) sum += nats.per_user[k];
    if (sum > c.bound + slack) {
      report.feasible = false;
      report.violated.push_back(std::move(c));
    } else if (std::abs(sum - c.bound) <= slack) {
      report.tight.push_back(std::move(c));
    }
  }
  return report;
}

namespace detail {

/// Rates of the staircase path: users descend solo to depth d[u] in
/// `order`, then one straight segment from d to the origin. Every segment
/// has the closed form -int g dv/(a v + b) = (g/a) log((a v0 + b)/(a v1 + b)).
template <typename Scalar>
Eigen::VectorX<Scalar> staircase_rates(const Eigen::VectorX<Scalar>& g, Scalar noise_var,
                                       const std::vector<int>& order,
                                       const Eigen::VectorX<Scalar>& depth) {
  const int num_users = static_cast<int>(g.size());
  Eigen::VectorX<Scalar> rates = Eigen::VectorX<Scalar>::Zero(num_users);
  Eigen::VectorX<Scalar> v = Eigen::VectorX<Scalar>::Ones(num_users);
  for (int u : order) {
    const Scalar other = g.dot(v) - g[u] * v[u];
    rates[u] += std::log((g[u] + other + noise_var) / (g[u] * depth[u] + other + noise_var));
    v[u] = depth[u];
  }
  const Scalar gd = g.dot(depth);
  if (gd > Scalar(0)) {
    const Scalar joint = std::log1p(gd / noise_var);
    rates += (g.cwiseProduct(depth) / gd) * joint;
  }
  return rates;
}

}  // namespace detail

/// Builds a piecewise-linear path achieving `target` (which must be feasible
/// and on the maximal sum-rate face). Staircase construction: in descending
/// gain order each user descends alone to a depth found by bisection, then a
/// final straight segment reaches the origin. Depths are re-solved in
/// Gauss-Seidel sweeps because the shared final segment couples the users.
template <typename Scalar>
DecodingPath<Scalar> synthesize_path_for_tuple(const MacChannel<Scalar>& ch,
                                               const RateTuple<Scalar>& target,
                                               Scalar tol = Scalar(1e-9)) {
  const int num_users = ch.num_users();
  const RateTuple<Scalar> nats = convert_units(target, RateUnits::Nats);

  const FeasibilityReport<Scalar> feas = is_feasible(ch, nats, tol);
  if (!feas.feasible) {
    std::vector<std::vector<int>> violated;
    std::string what = "target rate tuple is infeasible; violated constraints:";
    for (const auto& c : feas.violated) {
      violated.push_back(c.subset);
      what += " " + detail::subset_to_string(c.subset);
    }
    throw InfeasibleTargetError(std::move(what), std::move(violated));
  }
  const Scalar capacity = sum_rate_closed_form(ch);
  if (std::abs(nats.per_user.sum() - capacity) > tol) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "target sum %.12g differs from the maximal sum rate %.12g; only "
                  "max-sum-rate tuples correspond to fully matched paths",
                  static_cast<double>(nats.per_user.sum()), static_cast<double>(capacity));
    throw OffSumRateFaceError(buf);
  }

  const Eigen::VectorX<Scalar> g = effective_gains(ch);
  std::vector<int> order(num_users);
  for (int i = 0; i < num_users; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return g[a] > g[b]; });

  Eigen::VectorX<Scalar> depth = Eigen::VectorX<Scalar>::Ones(num_users);
  const int max_sweeps = 1000;
  bool solved = false;
  for (int sweep = 0; sweep < max_sweeps && !solved; ++sweep) {
    for (int u : order) {
      Scalar lo = Scalar(0), hi = Scalar(1);
      for (int it = 0; it < 200 && hi - lo > Scalar(1e-12); ++it) {
        const Scalar mid = Scalar(0.5) * (lo + hi);
        depth[u] = mid;
        const Scalar rate = detail::staircase_rates(g, ch.noise_var(), order, depth)[u];
        // R_u grows with depth: a shallower solo descent defers more of the
        // user's rate to the low-interference joint segment
        if (rate < nats.per_user[u]) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      depth[u] = Scalar(0.5) * (lo + hi);
    }
    const Eigen::VectorX<Scalar> achieved =
        detail::staircase_rates(g, ch.noise_var(), order, depth);
    solved = ((achieved - nats.per_user).template lpNorm<Eigen::Infinity>() <=
              Scalar(0.5) * tol);
  }
  if (!solved) {
    throw std::runtime_error("synthesize_path_for_tuple: depth sweeps did not converge");
  }

  Eigen::MatrixX<Scalar> waypoints(num_users, num_users + 2);
  int col = 0;
  Eigen::VectorX<Scalar> v = Eigen::VectorX<Scalar>::Ones(num_users);
  waypoints.col(col++) = v;
  for (int u : order) {
    if (depth[u] == v[u]) continue;  // no-op segment
    v[u] = depth[u];
    waypoints.col(col++) = v;
  }
  waypoints.col(col++) = Eigen::VectorX<Scalar>::Zero(num_users);
  return DecodingPath<Scalar>::piecewise_linear(waypoints.leftCols(col));
}

using RegionConstraintd = RegionConstraint<double>;
using FeasibilityReportd = FeasibilityReport<double>;

}  // namespace msefield
