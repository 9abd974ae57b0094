#include <algorithm>
#include <filesystem>
#include <limits>
#include <numeric>
#include <random>

#include "doctest.h"
#include "games/errors.hpp"
#include "games/repdays.hpp"

using namespace games;
using Eigen::MatrixXd;

namespace {

std::vector<MatrixXd> scalars(std::initializer_list<double> values) {
  std::vector<MatrixXd> out;
  for (double v : values) out.push_back(MatrixXd::Constant(1, 1, v));
  return out;
}

// exhaustive minimum of the k-medoids objective
double brute_force_optimum(const MatrixXd& d, std::size_t k) {
  const auto n = static_cast<std::size_t>(d.rows());
  std::vector<bool> mask(n, false);
  std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(k), true);
  double best = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double near = std::numeric_limits<double>::infinity();
      for (std::size_t m = 0; m < n; ++m)
        if (mask[m]) near = std::min(near, d(i, m));
      cost += near;
    }
    best = std::min(best, cost);
  } while (std::prev_permutation(mask.begin(), mask.end()));
  return best;
}

double objective_from_scratch(const std::vector<MatrixXd>& pts, const RepresentativeDaySet& s) {
  double total = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) total += (pts[i] - pts[s.assignment[i]]).squaredNorm();
  return total;
}

double rand_index(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  std::size_t agree = 0, pairs = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      ++pairs;
      if ((a[i] == a[j]) == (b[i] == b[j])) ++agree;
    }
  return static_cast<double>(agree) / static_cast<double>(pairs);
}

}  // namespace

TEST_CASE("squared Frobenius distance") {
  MatrixXd a(1, 2), b(1, 2);
  a << 1, 0;
  b << 0, 1;
  CHECK(distance(a, a) == 0.0);
  CHECK(distance(a, b) == 2.0);
  CHECK(distance(b, a) == distance(a, b));
  CHECK_THROWS_AS(distance(a, MatrixXd::Zero(2, 1)), InputError);
}

TEST_CASE("four point example matches enumeration") {
  const auto pts = scalars({0, 1, 10, 11});
  const MatrixXd d = distance_matrix(pts);
  CHECK(brute_force_optimum(d, 2) == 2.0);
  const auto set = kmedoids(pts, 2, 0);
  CHECK(set.objective == 2.0);
  CHECK(set.medoids.size() == 2);
  CHECK(set.medoids[0] <= 1);
  CHECK(set.medoids[1] >= 2);
  CHECK(set.weights == std::vector<std::size_t>{2, 2});

  // starting from a poor pair, SWAP reaches the optimum
  const auto start = assign_to_medoids(d, {0, 1});
  CHECK(start.objective == 81.0 + 100.0);
  const auto improved = swap_improvement_pass(start, d);
  CHECK(improved.objective == 2.0);
  // fixed point
  const auto again = swap_improvement_pass(improved, d);
  CHECK(again.medoids == improved.medoids);
  CHECK(again.objective == improved.objective);
}

TEST_CASE("edge cases and errors") {
  const auto pts = scalars({3, 1, 4, 1, 5});
  const auto all = kmedoids(pts, 5, 1);
  CHECK(all.objective == 0.0);
  for (std::size_t i = 0; i < 5; ++i) CHECK(all.assignment[i] == i);
  CHECK_THROWS_AS(kmedoids(pts, 0, 1), InputError);
  CHECK_THROWS_AS(kmedoids(pts, 6, 1), InputError);
}

TEST_CASE("random instances: optimality, invariants, permutation") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> g(0.0, 1.0);
  int global_hits = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 6 + trial % 6;
    const std::size_t k = 1 + trial % 4;
    std::vector<MatrixXd> pts;
    for (std::size_t i = 0; i < n; ++i) pts.push_back(MatrixXd::NullaryExpr(2, 2, [&] { return g(rng); }));
    const auto set = kmedoids(pts, k, 5);
    const MatrixXd d = distance_matrix(pts);
    // PAM is a local method: check swap-optimality by enumeration, and count
    // how often it reaches the global optimum
    const double opt = brute_force_optimum(d, k);
    CHECK(set.objective >= opt - 1e-12);
    if (set.objective <= opt + 1e-12) ++global_hits;
    for (std::size_t out = 0; out < k; ++out) {
      for (std::size_t in = 0; in < n; ++in) {
        if (std::find(set.medoids.begin(), set.medoids.end(), in) != set.medoids.end()) continue;
        auto trial_medoids = set.medoids;
        trial_medoids[out] = in;
        CHECK(assign_to_medoids(d, trial_medoids).objective >= set.objective - 1e-12);
      }
    }
    CHECK(std::abs(set.objective - objective_from_scratch(pts, set)) <= 1e-10);
    CHECK(std::accumulate(set.weights.begin(), set.weights.end(), std::size_t{0}) == n);
    for (auto m : set.medoids) CHECK(set.assignment[m] == m);
    for (std::size_t i = 0; i < n; ++i) {
      for (auto m : set.medoids) CHECK(d(i, set.assignment[i]) <= d(i, m));
    }
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<MatrixXd> shuffled;
    for (auto p : perm) shuffled.push_back(pts[p]);
    CHECK(kmedoids(shuffled, k, 5).objective == doctest::Approx(set.objective).epsilon(1e-12));
  }
  MESSAGE("PAM reached the global optimum in " << global_hits << "/30 instances");
  CHECK(global_hits >= 24);
}

TEST_CASE("planted blobs are recovered") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 0.3);
    std::vector<MatrixXd> pts;
    std::vector<std::size_t> labels;
    for (std::size_t c = 0; c < 3; ++c) {
      for (int i = 0; i < 20; ++i) {
        MatrixXd p = MatrixXd::NullaryExpr(3, 2, [&] { return noise(rng); });
        p.array() += 10.0 * static_cast<double>(c);
        pts.push_back(p);
        labels.push_back(c);
      }
    }
    const auto set = kmedoids(pts, 3, seed);
    CHECK(rand_index(set.assignment, labels) >= 0.95);
  }
}

TEST_CASE("raw-data clustering") {
  MultiResolutionDataset ds;
  ds.power_graph = Graph(2, {{0, 1}});
  ds.gas_graph = Graph(1, {});
  DaySignal day{0, MatrixXd::Constant(2, 3, 5.0), MatrixXd::Constant(2, 3, 0.5),
                MatrixXd::Constant(2, 3, 0.2), MatrixXd::Constant(1, 1, 7.0)};
  for (int d = 0; d < 4; ++d) {
    day.day_index = d;
    ds.days.push_back(day);
  }
  const auto one = kmedoids_raw(ds, 1, 0);
  CHECK(one.objective == 0.0);
  CHECK(one.source == "raw");
  CHECK(one.weights == std::vector<std::size_t>{4});

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& d : ds.days) {
    d.electricity = MatrixXd::NullaryExpr(2, 3, [&] { return 100 * u(rng); });
    d.wind_cf = MatrixXd::NullaryExpr(2, 3, [&] { return u(rng); });
  }
  CHECK(kmedoids_raw(ds, 4, 0).objective == 0.0);

  // embeddings that are an isometric copy of the raw vectors give the same
  // clustering objective
  EmbeddingSet iso;
  for (const auto& flat : flatten_days(ds)) iso.embeddings.push_back(flat.transpose());
  for (std::size_t k = 1; k <= 4; ++k) {
    CHECK(kmedoids(iso, k, 0).objective == doctest::Approx(kmedoids_raw(ds, k, 0).objective));
  }
}

TEST_CASE("day set file round trip") {
  const auto set = kmedoids(scalars({0, 1, 10, 11, 12}), 2, 3);
  const auto path = std::filesystem::temp_directory_path() / "games_dayset.json";
  save_day_set(set, path);
  const auto back = load_day_set(path);
  CHECK(back.medoids == set.medoids);
  CHECK(back.assignment == set.assignment);
  CHECK(back.weights == set.weights);
  CHECK(back.objective == set.objective);
  std::filesystem::remove(path);
}
