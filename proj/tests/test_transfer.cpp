#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <msefield/transfer.hpp>

#include "support.hpp"

using namespace msefield;

namespace {
MacChanneld equal_two_user() {
  return MacChanneld::from_gains(Eigen::Vector2d(1, 1), 1.0);
}
}  // namespace

TEST_CASE("ese snr") {
  const auto ch = equal_two_user();
  CHECK(ese_snr(ch, Eigen::VectorXd(Eigen::Vector2d(1, 1))).isApprox(Eigen::Vector2d(0.5, 0.5)));
  CHECK(ese_snr(ch, Eigen::VectorXd(Eigen::Vector2d(0, 0))).isApprox(Eigen::Vector2d(1, 1)));
  const auto single = MacChanneld::from_gains(Eigen::VectorXd::Constant(1, 2.0), 1.0);
  CHECK(ese_snr(single, Eigen::VectorXd::Constant(1, 0.3))[0] == doctest::Approx(2.0));
  CHECK_THROWS_AS(ese_snr(ch, Eigen::VectorXd(Eigen::Vector2d(1.5, 0))), std::invalid_argument);
  CHECK_THROWS_AS(ese_snr(ch, Eigen::VectorXd::Ones(3)), std::invalid_argument);
}

TEST_CASE("ese snr bounds") {
  const auto ch = equal_two_user();
  const auto b = ese_snr_bounds(ch);
  CHECK(b.min.isApprox(Eigen::Vector2d(0.5, 0.5)));
  CHECK(b.max.isApprox(Eigen::Vector2d(1, 1)));

  const auto single = MacChanneld::from_gains(Eigen::VectorXd::Constant(1, 3.0), 1.0);
  const auto bs = ese_snr_bounds(single);
  CHECK(bs.min[0] == doctest::Approx(3.0));
  CHECK(bs.max[0] == doctest::Approx(3.0));

  const auto uneven = MacChanneld::from_gains(Eigen::Vector2d(2, 1), 1.0);
  const auto bu = ese_snr_bounds(uneven);
  CHECK(bu.min.isApprox(Eigen::Vector2d(1.0, 1.0 / 3.0)));
  CHECK(bu.max.isApprox(Eigen::Vector2d(2.0, 1.0)));
}

TEST_CASE("snr stays within bounds and responds only to other users") {
  const auto ch = testsupport::random_channel(21, 4);
  const auto b = ese_snr_bounds(ch);
  msefield::SampleStream s(33, 1);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd v(4);
    for (int k = 0; k < 4; ++k) v[k] = s.uniform();
    const Eigen::VectorXd rho = ese_snr(ch, v);
    for (int k = 0; k < 4; ++k) {
      CHECK(rho[k] >= b.min[k] * (1 - 1e-12));
      CHECK(rho[k] <= b.max[k] * (1 + 1e-12));
    }
    // raising an interferer's MSE lowers everyone else and leaves it unchanged
    Eigen::VectorXd v2 = v;
    v2[1] = std::min(1.0, v[1] + 0.3);
    const Eigen::VectorXd rho2 = ese_snr(ch, v2);
    CHECK(rho2[1] == doctest::Approx(rho[1]).epsilon(1e-14));
    for (int k = 0; k < 4; ++k) {
      if (k != 1 && v2[1] > v[1]) CHECK(rho2[k] <= rho[k]);
    }
  }
}

TEST_CASE("straight-line matching dec") {
  const auto ch = equal_two_user();
  const auto dec = synthesize_matching_dec(ch, make_straight_line<double>(2), 0);
  CHECK(dec_apply(dec, 0.5) == doctest::Approx(1.0));
  CHECK(dec_apply(dec, 1.0) == doctest::Approx(0.0));
  CHECK(dec_apply(dec, 2.0 / 3.0) == doctest::Approx(0.5).epsilon(1e-12));
  // clamped regimes
  CHECK(dec_apply(dec, 0.25) == 1.0);
  CHECK(dec_apply(dec, 5.0) == 0.0);

  const auto uneven = MacChanneld::from_gains(Eigen::Vector2d(2, 1), 1.0);
  const auto dec2 = synthesize_matching_dec(uneven, make_straight_line<double>(2), 0);
  CHECK(dec_apply(dec2, 1.0) == doctest::Approx(1.0));
  CHECK(dec_apply(dec2, 2.0) == doctest::Approx(0.0));
}

TEST_CASE("matching dec endpoints sit on the snr bounds") {
  const auto ch = testsupport::random_channel(55, 3);
  const auto b = ese_snr_bounds(ch);
  for (int k = 0; k < 3; ++k) {
    const auto dec = synthesize_matching_dec(ch, make_straight_line<double>(3), k);
    CHECK(dec_apply(dec, b.min[k]) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(dec_apply(dec, b.max[k])) < 1e-12);
  }
}

TEST_CASE("sic matching dec is a step at the cancellation threshold") {
  const auto ch = equal_two_user();
  const auto dec = synthesize_matching_dec(ch, make_sic_path<double>({0, 1}), 0);
  const auto* step = std::get_if<SicStepDec<double>>(&dec.curve);
  REQUIRE(step != nullptr);
  CHECK(step->threshold == doctest::Approx(0.5));
  CHECK(dec_apply(dec, 0.49) == 1.0);
  CHECK(dec_apply(dec, 0.5) == 0.0);  // closed on the right

  const auto dec2 = synthesize_matching_dec(ch, make_sic_path<double>({0, 1}), 1);
  const auto* step2 = std::get_if<SicStepDec<double>>(&dec2.curve);
  REQUIRE(step2 != nullptr);
  CHECK(step2->threshold == doctest::Approx(1.0));
}

TEST_CASE("single user reduces to a step at rho_max") {
  const auto ch = MacChanneld::from_gains(Eigen::VectorXd::Constant(1, 2.0), 1.0);
  const auto dec = synthesize_matching_dec(ch, make_straight_line<double>(1), 0);
  CHECK(dec_apply(dec, 1.99) == 1.0);
  CHECK(dec_apply(dec, 2.0) == 0.0);
}

TEST_CASE("tabulated dec round-trips a general path") {
  const auto ch = testsupport::random_channel(77, 3);
  const auto path = testsupport::random_monotone_path(78, 3, 2);
  const auto grid = sample_path(path, 1500);
  for (int k = 0; k < 3; ++k) {
    const auto dec = synthesize_matching_dec(ch, path, k, 4096);
    for (int i = 0; i < grid.t.size(); ++i) {
      const double rho = ese_snr(ch, Eigen::VectorXd(grid.mse.col(i)))[k];
      CHECK(std::abs(dec_apply(dec, rho) - grid.mse(k, i)) < 1e-6);
    }
  }
}

TEST_CASE("non-monotone snr is reported with user and interval") {
  const auto ch = equal_two_user();
  Eigen::MatrixXd w(2, 4);
  w.col(0) << 1.0, 1.0;
  w.col(1) << 0.5, 0.2;
  w.col(2) << 0.5, 0.6;  // v_2 rises again: rho_1 must fall
  w.col(3) << 0.0, 0.0;
  const auto path = DecodingPathd::piecewise_linear(w);
  CHECK_THROWS_AS(synthesize_matching_dec(ch, path, 0, 512), NonMonotoneSnrError);
  try {
    synthesize_matching_dec(ch, path, 0, 512);
  } catch (const NonMonotoneSnrError& e) {
    CHECK(e.user() == 0);
    CHECK(e.t_begin() >= 0.0);
    CHECK(e.t_end() <= 1.0);
    CHECK(e.t_begin() < e.t_end());
  }
}

TEST_CASE("tabulated construction enforces its grid contract") {
  Eigen::VectorXd rho(3), v(3);
  rho << 1.0, 0.5, 2.0;  // unsorted input is fine
  v << 0.5, 1.0, 0.0;
  const auto dec = make_tabulated_dec(0, rho, v);
  CHECK(dec_apply(dec, 0.75) == doctest::Approx(0.75));

  v << 0.5, 1.0, 0.8;  // increasing after sort
  CHECK_THROWS_AS(make_tabulated_dec(0, rho, v), std::invalid_argument);

  CHECK_THROWS_AS(make_tabulated_dec(0, Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1)),
                  std::invalid_argument);
}

TEST_CASE("dec_apply rejects negative snr") {
  const auto dec = make_tabulated_dec(0, Eigen::Vector2d(0.5, 1.0), Eigen::Vector2d(1.0, 0.0));
  CHECK_THROWS_AS(dec_apply(dec, -0.5), std::domain_error);
}
