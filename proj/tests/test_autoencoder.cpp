#include <cmath>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "games/autoencoder.hpp"
#include "games/errors.hpp"
#include "ae_fixtures.hpp"
#include "reference_forward.hpp"

using namespace games;
using Eigen::MatrixXd;

using games::testing::random_instance;

TEST_CASE("block assembly places channel groups") {
  DaySignal day;
  day.electricity = MatrixXd::Constant(2, 2, 1.0);
  day.wind_cf = MatrixXd::Constant(2, 2, 2.0);
  day.solar_cf = MatrixXd::Constant(2, 2, 3.0);
  day.gas = MatrixXd::Constant(1, 1, 4.0);
  const auto dims = dims_of(day);
  const MatrixXd x = assemble_block(day, dims);
  REQUIRE(x.rows() == 3);
  REQUIRE(x.cols() == 7);
  MatrixXd expected(3, 7);
  expected << 1, 1, 2, 2, 3, 3, 0,  //
      1, 1, 2, 2, 3, 3, 0,          //
      0, 0, 0, 0, 0, 0, 4;
  CHECK(x == expected);

  SignalDims full_size{188, 18, 24, 24, 24, 1};
  CHECK(full_size.joint_nodes() == 206);
  CHECK(full_size.channels() == 73);
  DaySignal zero{0, MatrixXd::Zero(188, 24), MatrixXd::Zero(188, 24), MatrixXd::Zero(188, 24),
                 MatrixXd::Zero(18, 1)};
  const MatrixXd xz = assemble_block(zero, full_size);
  CHECK(xz.rows() == 206);
  CHECK(xz.cols() == 73);
  CHECK(xz.isZero(0.0));

  DaySignal wrong = day;
  wrong.gas = MatrixXd::Zero(2, 1);
  CHECK_THROWS_AS(assemble_block(wrong, dims), InputError);
}

TEST_CASE("encoder is linear and respects trivial cases") {
  auto inst = random_instance(3, 3, 2, 3, 3, 3, 2, 2);
  const MatrixXd x = assemble_block(inst.data.days[0], inst.model.dims);
  const MatrixXd z = encode(inst.model, x);
  CHECK(z.rows() == 5);
  CHECK(z.cols() == 2);
  CHECK((encode(inst.model, 2.5 * x) - 2.5 * z).cwiseAbs().maxCoeff() < 1e-12);

  auto zeroed = inst.model;
  zeroed.params.theta_enc.setZero();
  CHECK(encode(zeroed, x).isZero(0.0));

  // edgeless graph: L = I, selector theta returns the first k columns
  auto ident = inst.model;
  ident.laplacian = RenormalizedLaplacian(MatrixXd::Identity(5, 5));
  ident.params.theta_enc = MatrixXd::Identity(x.cols(), 2);
  CHECK(encode(ident, x) == x.leftCols(2));
}

TEST_CASE("decoder output shapes and range") {
  auto inst = random_instance(4, 3, 2, 3, 2, 4, 2, 1);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 50.0);
  for (int trial = 0; trial < 5; ++trial) {
    const MatrixXd z = MatrixXd::NullaryExpr(5, 2, [&] { return g(rng); });
    const auto r = decode(inst.model, z);
    const auto& day = inst.data.days[0];
    CHECK(r.electricity.rows() == day.electricity.rows());
    CHECK(r.electricity.cols() == day.electricity.cols());
    CHECK(r.wind_cf.cols() == day.wind_cf.cols());
    CHECK(r.solar_cf.cols() == day.solar_cf.cols());
    CHECK(r.gas.rows() == day.gas.rows());
    for (const MatrixXd* m : {&r.electricity, &r.wind_cf, &r.solar_cf, &r.gas}) {
      CHECK(m->cwiseAbs().maxCoeff() <= 1.0);
    }
  }
  auto flat = inst.model;
  flat.params.head_power.back().weight.setZero();
  flat.params.head_power.back().bias.setZero();
  flat.params.head_gas.back().weight.setZero();
  flat.params.head_gas.back().bias.setZero();
  const auto r0 = decode(flat, MatrixXd::Ones(5, 2));
  CHECK(r0.electricity.isZero(0.0));
  CHECK(r0.gas.isZero(0.0));
}

TEST_CASE("loss display hand evaluation") {
  GamesConfig c;
  c.k = 1;
  DaySignal day;
  day.electricity = MatrixXd::Constant(1, 1, 0.5);
  day.wind_cf = MatrixXd::Zero(1, 1);
  day.solar_cf = MatrixXd::Zero(1, 1);
  day.gas = MatrixXd::Zero(1, 1);
  const auto dims = dims_of(day);
  auto m = GamesModel::initialize(dims, RenormalizedLaplacian(MatrixXd::Identity(2, 2)), c);
  for (auto* head : {&m.params.head_power, &m.params.head_gas}) {
    head->back().weight.setZero();
    head->back().bias.setZero();
  }
  // reconstruction is identically zero; electricity error 0.5 -> 0.25
  CHECK(day_loss(m, day, c, 1) == doctest::Approx(0.25).epsilon(1e-15));

  day.electricity(0, 0) = 0.0;
  CHECK(day_loss(m, day, c, 1) == 0.0);

  day.gas(0, 0) = 0.3;
  const double base = day_loss(m, day, c, 1);
  auto c2 = c;
  c2.alpha_g *= 2.0;
  CHECK(day_loss(m, day, c2, 1) == doctest::Approx(2.0 * base));
  day.wind_cf(0, 0) = 0.2;
  const double with_wind = day_loss(m, day, c, 1);
  CHECK(day_loss(m, day, c2, 1) - with_wind == doctest::Approx(base));
}

TEST_CASE("analytic gradients match central finite differences") {
  const std::uint64_t seeds[] = {11, 12, 13, 14, 15};
  for (auto seed : seeds) {
    auto inst = random_instance(seed, 3, 2, 2, 2, 2, 2, 3);  // n = 5, t = 7, k = 2
    const auto g = gradients(inst.model, inst.data.days, inst.config);
    CHECK(g.loss == doctest::Approx(static_cast<double>(
                        testing::reference_loss(inst.model, inst.data.days, inst.config)))
                        .epsilon(1e-12));
    auto params = inst.model.params.tensors();
    const auto grads = g.grad.tensors();
    double worst = 0.0;
    for (std::size_t k = 0; k < params.size(); ++k) {
      for (Eigen::Index e = 0; e < params[k]->size(); ++e) {
        double& p = params[k]->data()[e];
        const double saved = p;
        const double h = 1e-5;
        p = saved + h;
        const double up = p;
        const long double f_up = testing::reference_loss(inst.model, inst.data.days, inst.config);
        p = saved - h;
        const double down = p;
        const long double f_down = testing::reference_loss(inst.model, inst.data.days, inst.config);
        p = saved;
        const double fd = static_cast<double>((f_up - f_down) / ((long double)up - (long double)down));
        const double an = grads[k]->data()[e];
        const double denom = std::max({std::abs(an), std::abs(fd), 1e-8});
        worst = std::max(worst, std::abs(an - fd) / denom);
      }
    }
    CHECK(worst <= 1e-5);
  }
}

TEST_CASE("encoder gradient closed form on a two-node example") {
  // one power node, one gas node, single-layer heads
  GamesConfig c;
  c.k = 1;
  c.hidden_sizes = std::vector<Eigen::Index>{};
  DaySignal day;
  day.electricity = MatrixXd::Constant(1, 1, 0.4);
  day.wind_cf = MatrixXd::Constant(1, 1, -0.2);
  day.solar_cf = MatrixXd::Constant(1, 1, 0.7);
  day.gas = MatrixXd::Constant(1, 1, -0.5);
  const auto dims = dims_of(day);
  MatrixXd lap(2, 2);
  lap << 0.5, 0.5, 0.5, 0.5;
  auto m = GamesModel::initialize(dims, RenormalizedLaplacian(lap), c);
  const auto g = gradients(m, {day}, c);

  // Z = L X te, H = L Z td, Yp = tanh(Hp Wp + bp), Yg = tanh(Hg Wg + bg)
  // dL/dte = (L X)^T L^T [ (Dp Wp^T ; Dg Wg^T) td^T ], D = 2 c (Y - X) * (1 - Y^2)
  const MatrixXd x = assemble_block(day, dims);
  const MatrixXd h = lap * (lap * x * m.params.theta_enc) * m.params.theta_dec;
  const auto& wp = m.params.head_power[0];
  const auto& wg = m.params.head_gas[0];
  const MatrixXd yp = (h.row(0) * wp.weight + wp.bias).array().tanh().matrix();
  const MatrixXd yg = (h.row(1) * wg.weight + wg.bias).array().tanh().matrix();
  MatrixXd target_p(1, 3);
  target_p << 0.4, -0.2, 0.7;
  Eigen::RowVector3d coef(1.0, c.alpha_w, c.alpha_s);
  MatrixXd dp = (2.0 * (yp - target_p).array() * coef.array() * (1.0 - yp.array().square())).matrix();
  MatrixXd dg = (2.0 * c.alpha_g * (yg.array() + 0.5) * (1.0 - yg.array().square())).matrix();
  MatrixXd dh(2, 4);
  dh.row(0) = dp * wp.weight.transpose();
  dh.row(1) = dg * wg.weight.transpose();
  const MatrixXd expected = (lap * x).transpose() * lap.transpose() * dh * m.params.theta_dec.transpose();
  CHECK((g.grad.theta_enc - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("stationary point has zero gradient") {
  auto inst = random_instance(21, 2, 1, 2, 2, 2, 1, 2);
  for (auto& d : inst.data.days) {
    d.electricity.setZero();
    d.wind_cf.setZero();
    d.solar_cf.setZero();
    d.gas.setZero();
  }
  for (auto* head : {&inst.model.params.head_power, &inst.model.params.head_gas}) {
    head->back().weight.setZero();
    head->back().bias.setZero();
  }
  const auto g = gradients(inst.model, inst.data.days, inst.config);
  CHECK(g.loss == 0.0);
  CHECK(g.grad.head_power.back().bias.isZero(0.0));
  CHECK(g.grad.head_gas.back().bias.isZero(0.0));

  // overflowing parameters are reported
  auto bad = inst.model;
  bad.params.theta_enc(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(gradients(bad, inst.data.days, inst.config), NumericalError);
  CHECK_THROWS_AS(gradients(inst.model, {}, inst.config), InputError);
}

TEST_CASE("training on a constant landscape stops after patience") {
  auto inst = random_instance(5, 2, 1, 2, 2, 2, 1, 4);
  for (auto& d : inst.data.days) {
    d.electricity.setZero();
    d.wind_cf.setZero();
    d.solar_cf.setZero();
    d.gas.setZero();
  }
  for (auto* head : {&inst.model.params.head_power, &inst.model.params.head_gas}) {
    head->back().weight.setZero();
    head->back().bias.setZero();
  }
  auto cfg = inst.config;
  cfg.patience = 1;
  cfg.max_epochs = 100;
  const auto res = train(inst.data, cfg, DaySplit{{0, 1, 2}, {3}}, inst.model);
  CHECK(res.log.size() == 2);
  CHECK(res.stopped_early);
  CHECK_THROWS_AS(train(inst.data, cfg, DaySplit{{0, 1}, {}}, inst.model), InputError);
  CHECK_THROWS_AS(train(inst.data, cfg, DaySplit{{0, 1}, {1}}, inst.model), InputError);
}

TEST_CASE("training reduces loss, is deterministic, and keeps the best epoch") {
  auto inst = random_instance(8, 3, 2, 3, 3, 3, 2, 12);
  // low-rank structure so the autoencoder has something to learn
  for (auto& d : inst.data.days) {
    d.wind_cf = 0.5 * d.electricity;
    d.solar_cf = -0.5 * d.electricity;
  }
  auto cfg = inst.config;
  cfg.max_epochs = 300;
  cfg.patience = 20;
  cfg.learning_rate = 0.01;
  const DaySplit split = split_days(12, 0.75, 3);
  const auto a = train(inst.data, cfg, split, inst.model);
  const auto b = train(inst.data, cfg, split, inst.model);
  REQUIRE(a.log.size() == b.log.size());
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    CHECK(a.log[i].train_loss == b.log[i].train_loss);
    CHECK(a.log[i].val_loss == b.log[i].val_loss);
  }
  CHECK(a.log.back().train_loss < a.log.front().train_loss);
  double min_val = a.log.front().val_loss;
  for (const auto& r : a.log) min_val = std::min(min_val, r.val_loss);
  CHECK(a.best_val_loss == min_val);
  std::vector<DaySignal> val_days;
  for (auto i : split.validation) val_days.push_back(inst.data.days[i]);
  CHECK(batch_loss(a.model, val_days, cfg) == doctest::Approx(min_val).epsilon(1e-12));
}

TEST_CASE("split and embeddings") {
  const auto s = split_days(365, 0.8, 42);
  CHECK(s.train.size() == 292);
  CHECK(s.validation.size() == 73);
  CHECK(split_days(365, 0.8, 42).train == s.train);

  auto inst = random_instance(9, 3, 2, 2, 2, 2, 3, 5);
  inst.data.days.push_back(inst.data.days[1]);
  inst.data.days.back().day_index = 99;
  const auto emb = embed_all(inst.model, inst.data);
  REQUIRE(emb.embeddings.size() == 6);
  CHECK(emb.day_indices.back() == 99);
  CHECK(emb.embeddings[1] == emb.embeddings[5]);
  CHECK(emb.embeddings[0].cols() == 3);
}

TEST_CASE("checkpoint round trip validates shapes") {
  auto inst = random_instance(10, 3, 2, 2, 2, 2, 2, 2);
  const auto path = std::filesystem::temp_directory_path() / "games_model_test.json";
  save_model(inst.model, path);
  const auto loaded = load_model(path);
  const auto a = inst.model.params.tensors();
  const auto b = loaded.params.tensors();
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(*a[k] == *b[k]);
  CHECK(loaded.laplacian.matrix() == inst.model.laplacian.matrix());
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_model(path), InputError);
}
