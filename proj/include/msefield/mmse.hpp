// Scalar MMSE curves f(rho) and their inverses for Gaussian and QPSK inputs.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace msefield {

enum class Alphabet { Gaussian, Qpsk };

template <typename Scalar>
struct GaussHermiteRule {
  Eigen::VectorX<Scalar> nodes;    // roots of H_n, ascending
  Eigen::VectorX<Scalar> weights;  // for weight function exp(-x^2)
};

/// Gauss-Hermite rule by Golub-Welsch: eigen-decompose the Jacobi matrix of
/// the Hermite recurrence; weights come from the first eigenvector components.
template <typename Scalar>
GaussHermiteRule<Scalar> gauss_hermite(int order) {
  if (order < 1) throw std::invalid_argument("gauss_hermite: order must be >= 1");
  Eigen::VectorX<Scalar> diag = Eigen::VectorX<Scalar>::Zero(order);
  Eigen::VectorX<Scalar> sub(order > 1 ? order - 1 : 0);
  for (int i = 0; i + 1 < order; ++i) {
    sub[i] = std::sqrt(Scalar(i + 1) / Scalar(2));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixX<Scalar>> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("gauss_hermite: tridiagonal eigensolve failed");
  }
  GaussHermiteRule<Scalar> rule;
  rule.nodes = solver.eigenvalues();
  const Scalar sqrt_pi = std::sqrt(Scalar(EIGEN_PI));
  rule.weights = sqrt_pi * solver.eigenvectors().row(0).transpose().array().square();
  return rule;
}

/// Monotone MMSE curve of a unit-energy input under the complex AWGN
/// observation y = sqrt(rho) x + z, z ~ CN(0,1).
///
/// Gaussian inputs have the closed form 1/(1+rho). QPSK factorizes into two
/// independent half-power BPSK real dimensions whose conditional-mean error
/// integrals are evaluated with a shared Gauss-Hermite rule; the summed
/// per-dimension MMSE equals the unit BPSK curve at the same rho.
template <typename Scalar>
class MmseFunction {
 public:
  explicit MmseFunction(Alphabet alphabet, int quadrature_order = kDefaultOrder)
      : alphabet_(alphabet), order_(quadrature_order) {
    if (order_ < 1) {
      throw std::invalid_argument("MmseFunction: quadrature_order must be >= 1");
    }
    if (alphabet_ == Alphabet::Qpsk) {
      const auto rule = gauss_hermite<Scalar>(order_);
      nodes_ = rule.nodes;
      weights_ = rule.weights / std::sqrt(Scalar(EIGEN_PI));
    }
  }

  static MmseFunction gaussian() { return MmseFunction(Alphabet::Gaussian); }
  static MmseFunction qpsk(int quadrature_order = kDefaultOrder) {
    return MmseFunction(Alphabet::Qpsk, quadrature_order);
  }

  Alphabet alphabet() const { return alphabet_; }
  int quadrature_order() const { return order_; }

  /// f(rho), strictly decreasing from f(0)=1 towards 0.
  Scalar operator()(Scalar rho) const {
    if (!(rho >= Scalar(0))) {
      throw std::domain_error("MmseFunction: rho must be nonnegative");
    }
    if (alphabet_ == Alphabet::Gaussian) {
      return Scalar(1) / (Scalar(1) + rho);
    }
    if (rho == Scalar(0)) return Scalar(1);
    // E_Z[sech^2(rho + sqrt(2 rho) Z)] via sech^2(a) = 4 e^{-2|a|}/(1+e^{-2|a|})^2,
    // which stays accurate in relative terms when the curve is tiny.
    const Scalar spread = std::sqrt(Scalar(2) * rho);
    Eigen::ArrayX<Scalar> a = (rho + spread * nodes_.array()).abs();
    Eigen::ArrayX<Scalar> e = (Scalar(-2) * a).exp();
    Eigen::ArrayX<Scalar> sech2 = Scalar(4) * e / (Scalar(1) + e).square();
    Scalar f = (weights_.array() * sech2).sum();
    if (f > Scalar(1)) f = Scalar(1);
    if (f < Scalar(0)) f = Scalar(0);
    return f;
  }

  /// Inverse map: the rho with f(rho) = v, for v in (0, 1].
  Scalar inverse(Scalar v) const {
    Scalar guess = std::numeric_limits<Scalar>::quiet_NaN();
    return inverse(v, guess);
  }

  /// Inverse with a warm start; `guess` may be NaN. Sequential callers walking
  /// a monotone v grid should pass the previous result.
  Scalar inverse(Scalar v, Scalar guess) const {
    if (!(v > Scalar(0))) {
      throw std::domain_error("MmseFunction: inverse requires v > 0 (v = 0 maps to infinite SNR)");
    }
    if (v > Scalar(1)) {
      throw std::domain_error("MmseFunction: inverse requires v <= 1");
    }
    if (v == Scalar(1)) return Scalar(0);
    if (alphabet_ == Alphabet::Gaussian) {
      return (Scalar(1) - v) / v;
    }
    return invert_qpsk(v, guess);
  }

  static constexpr int kDefaultOrder = 512;

 private:
  // Safeguarded Newton on the monotone curve; keeps a bracket and falls back
  // to bisection whenever a Newton step leaves it.
  Scalar invert_qpsk(Scalar v, Scalar guess) const {
    Scalar lo = Scalar(0);
    Scalar hi = Scalar(1);
    while ((*this)(hi) > v) {
      lo = hi;
      hi *= Scalar(2);
      if (hi > Scalar(1e9)) {
        throw std::domain_error("MmseFunction: inverse target below representable curve values");
      }
    }
    Scalar x = (std::isfinite(static_cast<double>(guess)) && guess > lo && guess < hi)
                   ? guess
                   : Scalar(0.5) * (lo + hi);
    for (int iter = 0; iter < 200; ++iter) {
      const Scalar fx = (*this)(x);
      if (std::abs(fx - v) <= Scalar(1e-14) * v) return x;
      if (fx > v) {
        lo = x;
      } else {
        hi = x;
      }
      if (hi - lo <= Scalar(1e-15) * std::max(lo, Scalar(1)) + Scalar(1e-18)) break;
      const Scalar dfx = derivative(x);
      Scalar next = x - (fx - v) / dfx;
      if (!(next > lo) || !(next < hi) || !std::isfinite(static_cast<double>(next))) {
        next = Scalar(0.5) * (lo + hi);
      }
      x = next;
    }
    return Scalar(0.5) * (lo + hi);
  }

  Scalar derivative(Scalar rho) const {
    // d/drho E[sech^2(a)] with a = rho + sqrt(2 rho) z: chain through
    // d sech^2/da = -2 sech^2(a) tanh(a).
    const Scalar spread = std::sqrt(Scalar(2) * rho);
    Eigen::ArrayX<Scalar> a = rho + spread * nodes_.array();
    Eigen::ArrayX<Scalar> e = (Scalar(-2) * a.abs()).exp();
    Eigen::ArrayX<Scalar> sech2 = Scalar(4) * e / (Scalar(1) + e).square();
    Eigen::ArrayX<Scalar> th = a.sign() * (Scalar(1) - e) / (Scalar(1) + e);
    Eigen::ArrayX<Scalar> da = Scalar(1) + nodes_.array() / spread;
    return (weights_.array() * (Scalar(-2) * sech2 * th * da)).sum();
  }

  Alphabet alphabet_;
  int order_;
  Eigen::VectorX<Scalar> nodes_;
  Eigen::VectorX<Scalar> weights_;  // normalized: sums to 1
};

template <typename Scalar>
Scalar mmse(const MmseFunction<Scalar>& fn, Scalar rho) {
  return fn(rho);
}

template <typename Scalar>
Scalar mmse_inverse(const MmseFunction<Scalar>& fn, Scalar v) {
  return fn.inverse(v);
}

using MmseFunctiond = MmseFunction<double>;

}  // namespace msefield
