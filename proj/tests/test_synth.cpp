#include <cmath>

#include "doctest.h"
#include "games/errors.hpp"
#include "games/graph.hpp"
#include "games/synth.hpp"

using namespace games;

TEST_CASE("synthetic cases are reproducible and well formed") {
  SynthParams p;
  p.days = 20;
  const auto a = generate_synthetic(p, 11);
  const auto b = generate_synthetic(p, 11);
  const auto c = generate_synthetic(p, 12);
  REQUIRE(a.dataset.day_count() == 20);
  CHECK(a.dataset.power_graph.node_count() == 6);
  CHECK(a.dataset.gas_graph.node_count() == 3);
  CHECK(a.dataset.days[7].electricity == b.dataset.days[7].electricity);
  CHECK(a.dataset.days[7].electricity != c.dataset.days[7].electricity);
  CHECK_NOTHROW(validate(a.dataset));
  CHECK_NOTHROW(a.instance.validate(a.dataset));
  for (const auto& d : a.dataset.days) {
    CHECK(d.wind_cf.minCoeff() >= 0.0);
    CHECK(d.wind_cf.maxCoeff() <= 1.0);
    CHECK(d.solar_cf.minCoeff() >= 0.0);
    CHECK(d.solar_cf.maxCoeff() <= 1.0);
    CHECK(d.electricity.minCoeff() > 0.0);
    CHECK(d.gas.minCoeff() > 0.0);
  }
  CHECK(a.instance.rps_share == p.rps_share);
  CHECK(a.instance.hours_per_period == p.hours_per_period);
}

TEST_CASE("gas demand is higher in winter") {
  SynthParams p;
  p.days = 365;
  p.noise = 0.0;
  const auto s = generate_synthetic(p, 1);
  CHECK(s.dataset.days[15].gas.sum() > s.dataset.days[196].gas.sum());
  CHECK(temperature_proxy(196) == doctest::Approx(1.0).epsilon(0.01));
  CHECK(temperature_proxy(15) < -0.9);
}

TEST_CASE("invalid synthetic parameters are rejected") {
  SynthParams p;
  p.hours_per_period = 5;
  CHECK_THROWS_AS(generate_synthetic(p, 0), InputError);
  p = SynthParams{};
  p.power_nodes = 1;
  CHECK_THROWS_AS(generate_synthetic(p, 0), InputError);
  p = SynthParams{};
  p.rps_share = 1.5;
  CHECK_THROWS_AS(generate_synthetic(p, 0), InputError);
}

TEST_CASE("without noise, days at the same calendar position are identical") {
  SynthParams p;
  p.days = 365 + 3;
  p.noise = 0.0;
  const auto s = generate_synthetic(p, 5);
  for (std::size_t d = 0; d < 3; ++d) {
    const auto& a = s.dataset.days[d];
    const auto& b = s.dataset.days[d + 365];
    CHECK(a.electricity == b.electricity);
    CHECK(a.wind_cf == b.wind_cf);
    CHECK(a.solar_cf == b.solar_cf);
    CHECK(a.gas == b.gas);
  }
  CHECK_FALSE(s.dataset.days[0].electricity == s.dataset.days[1].electricity);
}

TEST_CASE("neighboring zones have more correlated demand than distant ones") {
  SynthParams p;
  p.days = 120;
  p.power_nodes = 12;
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto s = generate_synthetic(p, seed);
    const std::size_t n = p.power_nodes;
    // per-node series of daily demand deviations from the cross-node mean
    Eigen::MatrixXd x(s.dataset.day_count(), n);
    for (std::size_t d = 0; d < s.dataset.day_count(); ++d) {
      const Eigen::VectorXd daily = s.dataset.days[d].electricity.rowwise().sum();
      x.row(static_cast<Eigen::Index>(d)) = (daily.array() / daily.mean()).matrix().transpose();
    }
    x.rowwise() -= x.colwise().mean();
    const Eigen::VectorXd sd = (x.colwise().squaredNorm()).cwiseSqrt().transpose();
    const Eigen::MatrixXd corr = (x.transpose() * x).cwiseQuotient(sd * sd.transpose());
    const Eigen::MatrixXd adj = build_adjacency(s.dataset.power_graph);
    double near = 0.0, far = 0.0;
    int n_near = 0, n_far = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
        if (adj(ii, jj) != 0.0) {
          near += corr(ii, jj);
          ++n_near;
        } else {
          far += corr(ii, jj);
          ++n_far;
        }
      }
    REQUIRE(n_near > 0);
    REQUIRE(n_far > 0);
    wins += near / n_near > far / n_far ? 1 : 0;
  }
  CHECK(wins == 5);
}
