#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <msefield/path.hpp>
#include <msefield/transfer.hpp>

#include "support.hpp"

using namespace msefield;

TEST_CASE("straight line") {
  const auto p2 = make_straight_line<double>(2);
  CHECK(p2.at(0.5).isApprox(Eigen::Vector2d(0.5, 0.5)));
  const auto p3 = make_straight_line<double>(3);
  CHECK(p3.at(0.0).isApprox(Eigen::Vector3d(1, 1, 1)));
  const auto p1 = make_straight_line<double>(1);
  CHECK(p1.at(1.0)[0] == 0.0);
  CHECK_THROWS_AS(make_straight_line<double>(0), std::invalid_argument);
}

TEST_CASE("sic paths") {
  SUBCASE("axis segment midpoint") {
    const auto p = make_sic_path<double>({0, 1});
    CHECK(p.at(0.25).isApprox(Eigen::Vector2d(0.5, 1.0)));
  }
  SUBCASE("corner waypoint starts segment two") {
    const auto p = make_sic_path<double>({0, 1});
    CHECK(p.at(0.5).isApprox(Eigen::Vector2d(0.0, 1.0)));
  }
  SUBCASE("three-user corner sequence") {
    const auto p = make_sic_path<double>({2, 0, 1});
    REQUIRE(p.num_waypoints() == 4);
    CHECK(p.waypoints().col(1).isApprox(Eigen::Vector3d(1, 1, 0)));
    CHECK(p.waypoints().col(2).isApprox(Eigen::Vector3d(0, 1, 0)));
    CHECK(p.waypoints().col(3).isZero());
  }
  SUBCASE("non-permutations rejected") {
    CHECK_THROWS_AS(make_sic_path<double>({0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(make_sic_path<double>({0, 2}), std::invalid_argument);
    CHECK_THROWS_AS(make_sic_path<double>({}), std::invalid_argument);
  }
}

TEST_CASE("validate_path") {
  SUBCASE("straight line is ok") {
    const auto report = validate_path(make_straight_line<double>(2), 100);
    CHECK(report.ok);
  }
  SUBCASE("range violation at a waypoint") {
    Eigen::MatrixXd w(2, 3);
    w.col(0) << 1, 1;
    w.col(1) << 0.5, 1.2;
    w.col(2) << 0, 0;
    const auto report = validate_path(DecodingPathd::piecewise_linear(w));
    CHECK_FALSE(report.ok);
    CHECK(report.violation == PathValidationReport::Violation::Range);
    CHECK(report.user == 1);
  }
  SUBCASE("monotonicity violation detected with user and t") {
    Eigen::MatrixXd w(2, 4);
    w.col(0) << 1, 1;
    w.col(1) << 0.2, 0.6;
    w.col(2) << 0.4, 0.3;
    w.col(3) << 0, 0;
    const auto report = validate_path(DecodingPathd::piecewise_linear(w));
    CHECK_FALSE(report.ok);
    CHECK(report.violation == PathValidationReport::Violation::Monotonicity);
    CHECK(report.user == 0);
    CHECK(report.t > 0.0);
    CHECK(report.t < 1.0);
  }
  SUBCASE("bad endpoints") {
    Eigen::MatrixXd w(1, 2);
    w << 0.9, 0.0;
    CHECK(validate_path(DecodingPathd::piecewise_linear(w)).violation ==
          PathValidationReport::Violation::StartPoint);
    w << 1.0, 0.1;
    CHECK(validate_path(DecodingPathd::piecewise_linear(w)).violation ==
          PathValidationReport::Violation::EndPoint);
  }
}

TEST_CASE("sample_path") {
  SUBCASE("single user, three points") {
    const auto s = sample_path(make_straight_line<double>(1), 3);
    REQUIRE(s.t.size() == 3);
    CHECK(s.t[1] == doctest::Approx(0.5));
    CHECK(s.mse(0, 0) == 1.0);
    CHECK(s.mse(0, 1) == doctest::Approx(0.5));
    CHECK(s.mse(0, 2) == 0.0);
  }
  SUBCASE("sic corner appears exactly") {
    const auto s = sample_path(make_sic_path<double>({0, 1}), 5);
    bool found = false;
    for (int i = 0; i < 5; ++i) {
      if (s.mse(0, i) == 0.0 && s.mse(1, i) == 1.0) found = true;
    }
    CHECK(found);
  }
  SUBCASE("piecewise shape contract") {
    const auto p = testsupport::random_monotone_path(11, 3, 1);
    const auto s = sample_path(p, 101);
    REQUIRE(s.t.size() == 101);
    for (int i = 0; i + 1 < 101; ++i) CHECK(s.t[i] <= s.t[i + 1]);
    CHECK(s.t[0] == 0.0);
    CHECK(s.t[100] == 1.0);
  }
  SUBCASE("waypoints always included") {
    Eigen::MatrixXd w(2, 3);
    w.col(0) << 1, 1;
    w.col(1) << 0.37, 0.81;
    w.col(2) << 0, 0;
    const auto p = DecodingPathd::piecewise_linear(w);
    const auto s = sample_path(p, 64);
    bool found = false;
    for (int i = 0; i < 64; ++i) {
      if (s.mse(0, i) == 0.37 && s.mse(1, i) == 0.81) found = true;
    }
    CHECK(found);
  }
  SUBCASE("sample counts rejected") {
    CHECK_THROWS_AS(sample_path(make_straight_line<double>(2), 1), std::invalid_argument);
    CHECK_THROWS_AS(sample_path(make_sic_path<double>({0, 1, 2}), 3), std::invalid_argument);
  }
}

TEST_CASE("snr is non-decreasing along valid paths") {
  const auto ch = testsupport::random_channel(5, 3);
  for (const auto& path :
       {make_straight_line<double>(3), make_sic_path<double>({1, 2, 0}),
        testsupport::random_monotone_path(6, 3, 3)}) {
    const auto s = sample_path(path, 257);
    Eigen::VectorXd prev = ese_snr(ch, Eigen::VectorXd(s.mse.col(0)));
    for (int i = 1; i < 257; ++i) {
      Eigen::VectorXd cur = ese_snr(ch, Eigen::VectorXd(s.mse.col(i)));
      for (int k = 0; k < 3; ++k) CHECK(cur[k] >= prev[k] - 1e-12);
      prev = cur;
    }
  }
}

TEST_CASE("relabeling users permutes sampled points") {
  const auto p = make_sic_path<double>({2, 0, 1});
  // relabel users by sigma: new user sigma(k) plays old user k
  const std::vector<int> sigma = {1, 2, 0};
  std::vector<int> relabeled_order;
  for (int u : p.order()) relabeled_order.push_back(sigma[u]);
  const auto q = make_sic_path<double>(relabeled_order);
  const auto sp = sample_path(p, 31);
  const auto sq = sample_path(q, 31);
  for (int i = 0; i < 31; ++i) {
    for (int k = 0; k < 3; ++k) {
      CHECK(sq.mse(sigma[k], i) == doctest::Approx(sp.mse(k, i)).epsilon(1e-14));
    }
  }
}
