#include <filesystem>
#include <random>

#include "doctest.h"
#include "games/dataset.hpp"
#include "games/errors.hpp"

namespace fs = std::filesystem;

namespace {

games::MultiResolutionDataset random_dataset(unsigned seed, int days) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  games::MultiResolutionDataset ds;
  ds.power_graph = games::Graph(3, {{0, 1}, {1, 2}});
  ds.gas_graph = games::Graph(2, {{0, 1}});
  ds.coupling_edges = {{0, 0}, {2, 1}};
  for (int d = 0; d < days; ++d) {
    games::DaySignal s;
    s.day_index = d;
    s.electricity = Eigen::MatrixXd::NullaryExpr(3, 4, [&] { return 100.0 + 900.0 * u(rng); });
    s.wind_cf = Eigen::MatrixXd::NullaryExpr(3, 4, [&] { return u(rng); });
    s.solar_cf = Eigen::MatrixXd::NullaryExpr(3, 4, [&] { return u(rng); });
    s.gas = Eigen::MatrixXd::NullaryExpr(2, 1, [&] { return 1e4 * u(rng); });
    ds.days.push_back(s);
  }
  return ds;
}

}  // namespace

TEST_CASE("normalize maps channel endpoints to [-1, 1]") {
  games::MultiResolutionDataset ds;
  ds.power_graph = games::Graph(1, {});
  ds.gas_graph = games::Graph(1, {});
  for (double v : {0.0, 50.0, 100.0}) {
    games::DaySignal s;
    s.day_index = static_cast<int>(v);
    s.electricity = Eigen::MatrixXd::Constant(1, 1, v);
    s.wind_cf = Eigen::MatrixXd::Constant(1, 1, v / 100.0);
    s.solar_cf = Eigen::MatrixXd::Constant(1, 1, 0.3);
    s.gas = Eigen::MatrixXd::Constant(1, 1, 5.0);
    ds.days.push_back(s);
  }
  const auto n = games::normalize(ds);
  CHECK(n.days[0].electricity(0, 0) == -1.0);
  CHECK(n.days[1].electricity(0, 0) == 0.0);
  CHECK(n.days[2].electricity(0, 0) == 1.0);
  // capacity factor with min 0, max 1 maps by 2x - 1
  CHECK(n.days[1].wind_cf(0, 0) == doctest::Approx(0.0));
  CHECK(n.days[2].wind_cf(0, 0) == 1.0);
  // constant channels map to 0 and are flagged
  CHECK(n.normalization.solar.constant);
  CHECK(n.days[0].solar_cf(0, 0) == 0.0);
  const auto back = games::denormalize(n);
  CHECK(back.days[2].solar_cf(0, 0) == 0.3);
}

TEST_CASE("normalize is idempotent and invertible") {
  for (unsigned seed = 0; seed < 5; ++seed) {
    const auto ds = random_dataset(seed, 6);
    const auto n = games::normalize(ds);
    const auto n2 = games::normalize(n);
    for (std::size_t d = 0; d < ds.days.size(); ++d) {
      CHECK(n.days[d].electricity == n2.days[d].electricity);
      CHECK(n.days[d].gas.cwiseAbs().maxCoeff() <= 1.0);
    }
    const auto back = games::denormalize(n);
    double err = 0.0;
    for (std::size_t d = 0; d < ds.days.size(); ++d) {
      err = std::max(err, (back.days[d].electricity - ds.days[d].electricity).cwiseAbs().maxCoeff() /
                              1000.0);
      err = std::max(err, (back.days[d].wind_cf - ds.days[d].wind_cf).cwiseAbs().maxCoeff());
      err = std::max(err, (back.days[d].solar_cf - ds.days[d].solar_cf).cwiseAbs().maxCoeff());
      err = std::max(err, (back.days[d].gas - ds.days[d].gas).cwiseAbs().maxCoeff() / 1e4);
    }
    CHECK(err <= 1e-12);
  }
}

TEST_CASE("validation catches bad shapes and ranges") {
  auto ds = random_dataset(1, 3);
  CHECK_NOTHROW(games::validate(ds));
  auto bad = ds;
  bad.days[1].wind_cf(0, 0) = 1.5;
  CHECK_THROWS_AS(games::validate(bad), games::InputError);
  bad = ds;
  bad.days[2].electricity = Eigen::MatrixXd::Ones(3, 5);
  CHECK_THROWS_AS(games::validate(bad), games::InputError);
  bad = ds;
  bad.coupling_edges.push_back({5, 0});
  CHECK_THROWS_AS(games::validate(bad), games::InputError);
}

TEST_CASE("dataset directory round trip") {
  const auto ds = random_dataset(3, 4);
  const fs::path dir = fs::temp_directory_path() / "games_dataset_roundtrip";
  fs::remove_all(dir);
  games::save_dataset(ds, dir);
  const auto loaded = games::load_dataset(dir);
  REQUIRE(loaded.days.size() == ds.days.size());
  CHECK(loaded.power_graph.edges() == ds.power_graph.edges());
  CHECK(loaded.coupling_edges == ds.coupling_edges);
  for (std::size_t d = 0; d < ds.days.size(); ++d) {
    CHECK(loaded.days[d].electricity == ds.days[d].electricity);
    CHECK(loaded.days[d].gas == ds.days[d].gas);
  }
  fs::remove(dir / "power.json");
  CHECK_THROWS_AS(games::load_dataset(dir), games::InputError);
  fs::remove_all(dir);
}
