#include <algorithm>
#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <tuple>

#include "doctest.h"
#include "games/errors.hpp"
#include "games/mps.hpp"
#include "solver_oracles.hpp"

using namespace games;

namespace {

std::vector<std::tuple<int, int, double>> triplets(const SparseLp& lp) {
  std::vector<std::tuple<int, int, double>> t;
  for (const auto& e : lp.entries) t.emplace_back(e.row, e.col, e.value);
  std::sort(t.begin(), t.end());
  return t;
}

void require_identical(const SparseLp& a, const SparseLp& b) {
  CHECK(a.name == b.name);
  CHECK(a.objective_name == b.objective_name);
  CHECK(a.cost == b.cost);
  CHECK(a.lower == b.lower);
  CHECK(a.upper == b.upper);
  CHECK(a.integer == b.integer);
  CHECK(a.col_names == b.col_names);
  CHECK(a.sense == b.sense);
  CHECK(a.rhs == b.rhs);
  CHECK(a.row_names == b.row_names);
  CHECK(triplets(a) == triplets(b));
}

SparseLp round_trip(const SparseLp& lp) {
  std::stringstream ss;
  write_mps(lp, ss);
  return read_mps(ss);
}

}  // namespace

TEST_CASE("round trip on random instances with awkward numbers") {
  for (unsigned seed = 0; seed < 20; ++seed) {
    SparseLp lp = seed % 2 ? games::testing::random_milp(seed) : games::testing::random_lp(seed, 9, 11);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    // full-precision values exercise shortest round-trip formatting
    for (auto& e : lp.entries) e.value = u(rng) * 1e3 / 7.0;
    for (auto& c : lp.cost) c = u(rng) < 0.2 ? 0.0 : u(rng) * 1e-5 / 3.0;
    for (auto& b : lp.rhs) b = u(rng) < 0.2 ? 0.0 : u(rng) * 1e7 / 9.0;
    if (lp.num_cols() > 2) {
      lp.lower[0] = -2.5;
      lp.upper[0] = -2.5;
      lp.lower[1] = -kInf;
      lp.upper[1] = kInf;
      lp.lower.back() = -kInf;
      lp.upper.back() = 4.0;
    }
    lp.col_names.back() = "a_long_column_name[3,14]";
    INFO("seed " << seed);
    require_identical(lp, round_trip(lp));
  }
}

TEST_CASE("zero costs are omitted and empty columns survive") {
  SparseLp lp;
  lp.add_column("x", 0.0, 0.0, 1.0);
  lp.add_column("lonely", 0.0, 0.0, 2.0);
  lp.add_row("r", RowSense::GreaterEqual, 0.5);
  lp.add_entry(0, 0, 1.0);
  std::stringstream ss;
  write_mps(lp, ss);
  const std::string text = ss.str();
  CHECK(text.find("    x         COST") == std::string::npos);
  CHECK(text.find("    x         r         1") != std::string::npos);
  require_identical(lp, round_trip(lp));
}

TEST_CASE("integer columns sit between markers") {
  SparseLp lp;
  lp.add_column("c", 1.0, 0.0, kInf);
  lp.add_column("i", 2.0, 0.0, 3.0, true);
  lp.add_column("j", 2.0, 0.0, 3.0, true);
  lp.add_column("d", 1.0, 0.0, kInf);
  std::stringstream ss;
  write_mps(lp, ss);
  const std::string text = ss.str();
  const auto org = text.find("'INTORG'");
  const auto end = text.find("'INTEND'");
  REQUIRE(org != std::string::npos);
  REQUIRE(end != std::string::npos);
  CHECK(org < text.find("    i "));
  CHECK(text.find("    j ") < end);
  CHECK(end < text.find("    d "));
  CHECK(text.find("'INTORG'", org + 1) == std::string::npos);
  require_identical(lp, round_trip(lp));
}

TEST_CASE("fixed field positions for short names") {
  SparseLp lp;
  lp.add_column("x", -3.0, 0.0, 2.0);
  lp.add_row("cap", RowSense::LessEqual, 4.0);
  lp.add_entry(0, 0, 1.0);
  std::stringstream ss;
  write_mps(lp, ss);
  const std::string expected =
      "NAME          GAMES\n"
      "ROWS\n"
      " N  COST\n"
      " L  cap\n"
      "COLUMNS\n"
      "    x         COST      -3\n"
      "    x         cap       1\n"
      "RHS\n"
      "    RHS       cap       4\n"
      "BOUNDS\n"
      " UP BND       x         2\n"
      "ENDATA\n";
  CHECK(ss.str() == expected);
}

TEST_CASE("missing RHS entries default to zero") {
  std::stringstream ss(
      "NAME T\nROWS\n N obj\n E r1\n G r2\nCOLUMNS\n    x obj 1 r1 1\n    x r2 2\n"
      "RHS\n    RHS r2 3\nENDATA\n");
  const auto lp = read_mps(ss);
  REQUIRE(lp.num_rows() == 2);
  CHECK(lp.rhs[0] == 0.0);
  CHECK(lp.rhs[1] == 3.0);
  CHECK(lp.entries.size() == 2);
}

TEST_CASE("parse errors carry line numbers") {
  std::stringstream unknown("NAME T\nROWS\n N obj\nFOO\nENDATA\n");
  CHECK_THROWS_WITH_AS(read_mps(unknown), "mps line 4: unknown section FOO", InputError);
  std::stringstream bad_row("NAME T\nROWS\n N obj\nCOLUMNS\n    x nope 1\nENDATA\n");
  CHECK_THROWS_WITH_AS(read_mps(bad_row), "mps line 5: unknown row nope", InputError);
  std::stringstream bad_num("NAME T\nROWS\n N obj\nCOLUMNS\n    x obj 1.2.3\nENDATA\n");
  CHECK_THROWS_AS(read_mps(bad_num), InputError);
  std::stringstream no_end("NAME T\nROWS\n N obj\n");
  CHECK_THROWS_AS(read_mps(no_end), InputError);
}

TEST_CASE("writer rejects unusable names and paths") {
  SparseLp lp;
  lp.add_column("has space", 1.0, 0.0, 1.0);
  std::stringstream ss;
  CHECK_THROWS_AS(write_mps(lp, ss), InputError);
  SparseLp ok;
  ok.add_column("x", 1.0, 0.0, 1.0);
  CHECK_THROWS_AS(write_mps(ok, std::filesystem::path("/nonexistent/dir/out.mps")), InputError);
}

TEST_CASE("file round trip preserves solve results") {
  const auto lp = games::testing::random_lp(5, 8, 10);
  const auto path = std::filesystem::temp_directory_path() / "games_mps_roundtrip.mps";
  write_mps(lp, path);
  const auto back = read_mps(path);
  std::filesystem::remove(path);
  CHECK(solve_lp(lp).objective == solve_lp(back).objective);
}
