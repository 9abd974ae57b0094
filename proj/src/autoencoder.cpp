#include "games/autoencoder.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"

#include "games/errors.hpp"
#include "games/format.hpp"

namespace games {

using Eigen::Index;
using Eigen::MatrixXd;

// ---------------------------------------------------------------------------
// parameter containers

std::vector<MatrixXd*> GamesParameters::tensors() {
  std::vector<MatrixXd*> out{&theta_enc, &theta_dec};
  for (auto* head : {&head_power, &head_gas}) {
    for (auto& layer : *head) {
      out.push_back(&layer.weight);
      out.push_back(&layer.bias);
    }
  }
  return out;
}

std::vector<const MatrixXd*> GamesParameters::tensors() const {
  auto mut = const_cast<GamesParameters*>(this)->tensors();
  return {mut.begin(), mut.end()};
}

GamesParameters GamesParameters::zeros_like() const {
  GamesParameters z = *this;
  for (auto* t : z.tensors()) t->setZero();
  return z;
}

Index GamesParameters::size() const {
  Index n = 0;
  for (const auto* t : tensors()) n += t->size();
  return n;
}

bool GamesParameters::all_finite() const {
  for (const auto* t : tensors())
    if (!t->allFinite()) return false;
  return true;
}

namespace {

std::vector<Index> resolved_hidden(const GamesConfig& config, Index t) {
  if (config.hidden_sizes) return *config.hidden_sizes;
  return {t};
}

std::vector<DenseLayer> make_head(Index in, const std::vector<Index>& hidden, Index out,
                                  std::mt19937_64& rng) {
  std::vector<DenseLayer> head;
  Index fan_in = in;
  std::vector<Index> widths = hidden;
  widths.push_back(out);
  for (Index w : widths) {
    if (w <= 0) throw InputError("head layer widths must be positive");
    const double s = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-s, s);
    DenseLayer layer;
    layer.weight = MatrixXd::NullaryExpr(fan_in, w, [&] { return u(rng); });
    layer.bias = MatrixXd::NullaryExpr(1, w, [&] { return u(rng); });
    head.push_back(std::move(layer));
    fan_in = w;
  }
  return head;
}

}  // namespace

GamesModel GamesModel::initialize(const SignalDims& dims, const RenormalizedLaplacian& laplacian,
                                  const GamesConfig& config) {
  const Index n = dims.joint_nodes();
  const Index t = dims.channels();
  if (laplacian.size() != n) throw InputError("laplacian size does not match joint node count");
  if (config.k <= 0) throw InputError("bottleneck k must be positive");
  if (config.k >= t) throw InputError("bottleneck k must be smaller than the channel count t");
  if (config.alpha_g < 0 || config.alpha_w < 0 || config.alpha_s < 0) {
    throw InputError("loss weights must be nonnegative");
  }
  GamesModel m;
  m.dims = dims;
  m.config = config;
  m.laplacian = laplacian;
  std::mt19937_64 rng(config.rng_seed);
  auto uniform = [&](Index rows, Index cols, Index fan_in) {
    const double s = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-s, s);
    return MatrixXd(MatrixXd::NullaryExpr(rows, cols, [&] { return u(rng); }));
  };
  m.params.theta_enc = uniform(t, config.k, t);
  m.params.theta_dec = uniform(config.k, t, config.k);
  const auto hidden = resolved_hidden(config, t);
  m.params.head_power = make_head(t, hidden, dims.power_channels(), rng);
  m.params.head_gas = make_head(t, hidden, dims.t_gas, rng);
  return m;
}

// ---------------------------------------------------------------------------
// forward pass

MatrixXd assemble_block(const DaySignal& day, const SignalDims& dims) {
  if (!(dims_of(day) == dims) || day.wind_cf.rows() != dims.n_power ||
      day.solar_cf.rows() != dims.n_power) {
    throw InputError("day " + std::to_string(day.day_index) +
                     " does not match the declared signal dimensions");
  }
  MatrixXd x = MatrixXd::Zero(dims.joint_nodes(), dims.channels());
  Index col = 0;
  x.block(0, col, dims.n_power, dims.t_electricity) = day.electricity;
  col += dims.t_electricity;
  x.block(0, col, dims.n_power, dims.t_wind) = day.wind_cf;
  col += dims.t_wind;
  x.block(0, col, dims.n_power, dims.t_solar) = day.solar_cf;
  col += dims.t_solar;
  x.block(dims.n_power, col, dims.n_gas, dims.t_gas) = day.gas;
  return x;
}

MatrixXd encode(const GamesModel& model, const MatrixXd& x) {
  return model.laplacian.matrix() * x * model.params.theta_enc;
}

namespace {

struct HeadTrace {
  std::vector<MatrixXd> activations;  // [input, layer1 out, ..., final out]
};

HeadTrace run_head(const std::vector<DenseLayer>& head, const MatrixXd& input) {
  HeadTrace tr;
  tr.activations.reserve(head.size() + 1);
  tr.activations.push_back(input);
  for (const auto& layer : head) {
    MatrixXd pre = tr.activations.back() * layer.weight;
    pre.rowwise() += layer.bias.row(0);
    tr.activations.push_back(pre.array().tanh().matrix());
  }
  return tr;
}

struct ForwardTrace {
  MatrixXd lx;  // L X
  MatrixXd z;   // L X theta_enc
  MatrixXd lz;  // L Z
  HeadTrace power;
  HeadTrace gas;
};

ForwardTrace forward(const GamesModel& model, const MatrixXd& x) {
  const auto& l = model.laplacian.matrix();
  const auto& d = model.dims;
  ForwardTrace f;
  f.lx = l * x;
  f.z = f.lx * model.params.theta_enc;
  f.lz = l * f.z;
  const MatrixXd h = f.lz * model.params.theta_dec;
  // split along the node dimension: power rows feed the power head
  f.power = run_head(model.params.head_power, h.topRows(d.n_power));
  f.gas = run_head(model.params.head_gas, h.bottomRows(d.n_gas));
  return f;
}

Reconstruction unpack(const SignalDims& d, const MatrixXd& power_out, const MatrixXd& gas_out) {
  Reconstruction r;
  r.electricity = power_out.leftCols(d.t_electricity);
  r.wind_cf = power_out.middleCols(d.t_electricity, d.t_wind);
  r.solar_cf = power_out.rightCols(d.t_solar);
  r.gas = gas_out;
  return r;
}

struct LossWeights {
  double e, w, s, g;
};

LossWeights loss_weights(const SignalDims& d, const GamesConfig& c, std::size_t batch_days) {
  const double days = static_cast<double>(batch_days);
  auto scale = [&](Index nodes, Index t) {
    return nodes * t == 0 ? 0.0 : 1.0 / (days * static_cast<double>(nodes * t));
  };
  return {scale(d.n_power, d.t_electricity), c.alpha_w * scale(d.n_power, d.t_wind),
          c.alpha_s * scale(d.n_power, d.t_solar), c.alpha_g * scale(d.n_gas, d.t_gas)};
}

}  // namespace

Reconstruction decode(const GamesModel& model, const MatrixXd& z) {
  const auto& d = model.dims;
  const MatrixXd h = model.laplacian.matrix() * z * model.params.theta_dec;
  const auto p = run_head(model.params.head_power, h.topRows(d.n_power));
  const auto g = run_head(model.params.head_gas, h.bottomRows(d.n_gas));
  return unpack(d, p.activations.back(), g.activations.back());
}

double day_loss(const GamesModel& model, const DaySignal& day, const GamesConfig& config,
                std::size_t batch_days) {
  const MatrixXd x = assemble_block(day, model.dims);
  const auto r = decode(model, encode(model, x));
  const auto w = loss_weights(model.dims, config, batch_days);
  return w.e * (day.electricity - r.electricity).squaredNorm() +
         w.g * (day.gas - r.gas).squaredNorm() + w.w * (day.wind_cf - r.wind_cf).squaredNorm() +
         w.s * (day.solar_cf - r.solar_cf).squaredNorm();
}

double batch_loss(const GamesModel& model, const std::vector<DaySignal>& batch,
                  const GamesConfig& config) {
  double total = 0.0;
  for (const auto& day : batch) total += day_loss(model, day, config, batch.size());
  return total;
}

// ---------------------------------------------------------------------------
// backward pass

namespace {

/// Backpropagates d(loss)/d(head output) through a tanh head; accumulates
/// parameter gradients and returns d(loss)/d(head input).
MatrixXd backprop_head(const std::vector<DenseLayer>& head, const HeadTrace& tr, MatrixXd grad_out,
                       std::vector<DenseLayer>& grad_head) {
  for (std::size_t l = head.size(); l-- > 0;) {
    const MatrixXd& out = tr.activations[l + 1];
    const MatrixXd grad_pre = grad_out.array() * (1.0 - out.array().square());
    grad_head[l].weight.noalias() += tr.activations[l].transpose() * grad_pre;
    grad_head[l].bias += grad_pre.colwise().sum();
    grad_out = grad_pre * head[l].weight.transpose();
  }
  return grad_out;
}

}  // namespace

GradientResult gradients(const GamesModel& model, const std::vector<DaySignal>& batch,
                         const GamesConfig& config) {
  if (batch.empty()) throw InputError("gradient batch is empty");
  const auto& d = model.dims;
  const auto& l = model.laplacian.matrix();
  const auto w = loss_weights(d, config, batch.size());
  GradientResult res;
  res.grad = model.params.zeros_like();
  for (const auto& day : batch) {
    const MatrixXd x = assemble_block(day, d);
    const ForwardTrace f = forward(model, x);
    const MatrixXd& p_out = f.power.activations.back();
    const MatrixXd& g_out = f.gas.activations.back();
    if (!p_out.allFinite() || !g_out.allFinite() || !f.z.allFinite()) {
      throw NumericalError("numerical overflow in forward pass");
    }
    const Reconstruction r = unpack(d, p_out, g_out);

    MatrixXd grad_power(d.n_power, d.power_channels());
    grad_power.leftCols(d.t_electricity) = 2.0 * w.e * (r.electricity - day.electricity);
    grad_power.middleCols(d.t_electricity, d.t_wind) = 2.0 * w.w * (r.wind_cf - day.wind_cf);
    grad_power.rightCols(d.t_solar) = 2.0 * w.s * (r.solar_cf - day.solar_cf);
    const MatrixXd grad_gas = 2.0 * w.g * (r.gas - day.gas);

    res.loss += w.e * (day.electricity - r.electricity).squaredNorm() +
                w.g * (day.gas - r.gas).squaredNorm() +
                w.w * (day.wind_cf - r.wind_cf).squaredNorm() +
                w.s * (day.solar_cf - r.solar_cf).squaredNorm();

    MatrixXd grad_h(d.joint_nodes(), d.channels());
    grad_h.topRows(d.n_power) =
        backprop_head(model.params.head_power, f.power, grad_power, res.grad.head_power);
    grad_h.bottomRows(d.n_gas) =
        backprop_head(model.params.head_gas, f.gas, grad_gas, res.grad.head_gas);

    // H = (L Z) theta_dec,  Z = (L X) theta_enc
    res.grad.theta_dec.noalias() += f.lz.transpose() * grad_h;
    const MatrixXd grad_z = l.transpose() * (grad_h * model.params.theta_dec.transpose());
    res.grad.theta_enc.noalias() += f.lx.transpose() * grad_z;
  }
  if (!std::isfinite(res.loss) || !res.grad.all_finite()) {
    throw NumericalError("numerical overflow in forward pass");
  }
  return res;
}

// ---------------------------------------------------------------------------
// training

DaySplit split_days(std::size_t day_count, double train_fraction, std::uint64_t seed) {
  if (day_count < 2) throw InputError("need at least two days to split");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw InputError("train fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> order(day_count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  // Fisher-Yates with explicit draws, independent of std::shuffle's algorithm
  for (std::size_t i = day_count - 1; i > 0; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i);
    std::swap(order[i], order[pick(rng)]);
  }
  auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(day_count)));
  n_train = std::clamp<std::size_t>(n_train, 1, day_count - 1);
  DaySplit s;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.validation.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.validation.begin(), s.validation.end());
  return s;
}

namespace {

std::vector<DaySignal> gather(const MultiResolutionDataset& ds, const std::vector<std::size_t>& idx) {
  std::vector<DaySignal> out;
  out.reserve(idx.size());
  for (auto i : idx) {
    if (i >= ds.days.size()) throw InputError("split references a missing day");
    out.push_back(ds.days[i]);
  }
  return out;
}

}  // namespace

TrainResult train(const MultiResolutionDataset& dataset, const GamesConfig& config,
                  const DaySplit& split) {
  const auto normalized = normalize(dataset);
  const Graph joint = assemble_joint_graph(normalized);
  auto model = GamesModel::initialize(normalized.dims(),
                                      renormalized_laplacian(build_adjacency(joint)), config);
  model.normalization = normalized.normalization;
  return train(normalized, config, split, std::move(model));
}

TrainResult train(const MultiResolutionDataset& dataset, const GamesConfig& config,
                  const DaySplit& split, GamesModel initial) {
  if (split.train.empty() || split.validation.empty()) {
    throw InputError("train and validation splits must be nonempty");
  }
  for (auto i : split.train) {
    if (std::find(split.validation.begin(), split.validation.end(), i) != split.validation.end()) {
      throw InputError("train and validation splits overlap");
    }
  }
  if (config.max_epochs <= 0 || config.patience <= 0 || !(config.learning_rate > 0.0)) {
    throw InputError("max_epochs, patience and learning_rate must be positive");
  }
  const auto data = prepare_for_model(initial, dataset);
  const auto train_days = gather(data, split.train);
  const auto val_days = gather(data, split.validation);

  GamesModel model = std::move(initial);
  model.config = config;
  GamesParameters m1 = model.params.zeros_like();
  GamesParameters m2 = model.params.zeros_like();

  TrainResult result;
  auto grad = gradients(model, train_days, config);
  double val = batch_loss(model, val_days, config);
  result.log.push_back({0, grad.loss, val});
  result.best_val_loss = val;
  result.best_epoch = 0;
  GamesParameters best = model.params;
  int since_best = 0;

  const double b1 = config.adam_beta1;
  const double b2 = config.adam_beta2;
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const double c1 = 1.0 - std::pow(b1, epoch);
    const double c2 = 1.0 - std::pow(b2, epoch);
    auto params = model.params.tensors();
    auto g = grad.grad.tensors();
    auto mt = m1.tensors();
    auto vt = m2.tensors();
    for (std::size_t k = 0; k < params.size(); ++k) {
      mt[k]->array() = b1 * mt[k]->array() + (1.0 - b1) * g[k]->array();
      vt[k]->array() = b2 * vt[k]->array() + (1.0 - b2) * g[k]->array().square();
      params[k]->array() -= config.learning_rate * (mt[k]->array() / c1) /
                            ((vt[k]->array() / c2).sqrt() + config.adam_epsilon);
    }
    grad = gradients(model, train_days, config);
    val = batch_loss(model, val_days, config);
    if (!std::isfinite(val)) throw NumericalError("numerical overflow in forward pass");
    result.log.push_back({epoch, grad.loss, val});
    if (val < result.best_val_loss) {
      result.best_val_loss = val;
      result.best_epoch = epoch;
      best = model.params;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      result.stopped_early = true;
      break;
    }
  }
  model.params = std::move(best);
  result.model = std::move(model);
  return result;
}

MultiResolutionDataset prepare_for_model(const GamesModel& model,
                                         const MultiResolutionDataset& dataset) {
  if (dataset.normalization.applied) return dataset;
  if (!model.normalization.applied) return normalize(dataset);
  MultiResolutionDataset out = dataset;
  const auto& n = model.normalization;
  auto apply = [](MatrixXd& m, const ChannelScaling& s) {
    m = m.unaryExpr([&](double x) { return s.forward(x); });
  };
  for (auto& d : out.days) {
    apply(d.electricity, n.electricity);
    apply(d.wind_cf, n.wind);
    apply(d.solar_cf, n.solar);
    apply(d.gas, n.gas);
  }
  out.normalization = n;
  return out;
}

EmbeddingSet embed_all(const GamesModel& model, const MultiResolutionDataset& dataset) {
  const auto data = prepare_for_model(model, dataset);
  EmbeddingSet out;
  out.day_indices.reserve(data.days.size());
  out.embeddings.reserve(data.days.size());
  for (const auto& day : data.days) {
    out.day_indices.push_back(day.day_index);
    out.embeddings.push_back(encode(model, assemble_block(day, model.dims)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// persistence

namespace {

using json = nlohmann::json;
constexpr int kCheckpointVersion = 1;

json to_json(const MatrixXd& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

MatrixXd matrix_from_json(const json& j, Index rows, Index cols, const char* what) {
  if (j.at("rows").get<Index>() != rows || j.at("cols").get<Index>() != cols) {
    throw InputError(std::string("checkpoint tensor '") + what + "' has incompatible shape");
  }
  MatrixXd m(rows, cols);
  const auto& data = j.at("data");
  for (Index i = 0; i < rows; ++i)
    for (Index c = 0; c < cols; ++c) m(i, c) = data.at(i).at(c).get<double>();
  return m;
}

json scaling_json(const ChannelScaling& s) {
  return {{"lo", s.lo}, {"hi", s.hi}, {"constant", s.constant}};
}

ChannelScaling scaling_from(const json& j) {
  return {j.at("lo").get<double>(), j.at("hi").get<double>(), j.at("constant").get<bool>()};
}

json head_json(const std::vector<DenseLayer>& head) {
  json arr = json::array();
  for (const auto& l : head) arr.push_back({{"weight", to_json(l.weight)}, {"bias", to_json(l.bias)}});
  return arr;
}

}  // namespace

void save_model(const GamesModel& model, const std::filesystem::path& path) {
  const auto& c = model.config;
  const auto& d = model.dims;
  json j;
  j["format"] = "games-model";
  j["version"] = kCheckpointVersion;
  j["dims"] = {{"n_power", d.n_power}, {"n_gas", d.n_gas},   {"t_electricity", d.t_electricity},
               {"t_wind", d.t_wind},   {"t_solar", d.t_solar}, {"t_gas", d.t_gas}};
  j["config"] = {{"k", c.k},
                 {"alpha_g", c.alpha_g},
                 {"alpha_w", c.alpha_w},
                 {"alpha_s", c.alpha_s},
                 {"learning_rate", c.learning_rate},
                 {"max_epochs", c.max_epochs},
                 {"patience", c.patience},
                 {"rng_seed", c.rng_seed},
                 {"adam_beta1", c.adam_beta1},
                 {"adam_beta2", c.adam_beta2},
                 {"adam_epsilon", c.adam_epsilon}};
  if (c.hidden_sizes) j["config"]["hidden_sizes"] = *c.hidden_sizes;
  const auto& n = model.normalization;
  j["normalization"] = {{"applied", n.applied},
                        {"electricity", scaling_json(n.electricity)},
                        {"wind", scaling_json(n.wind)},
                        {"solar", scaling_json(n.solar)},
                        {"gas", scaling_json(n.gas)}};
  j["laplacian"] = to_json(model.laplacian.matrix());
  j["theta_enc"] = to_json(model.params.theta_enc);
  j["theta_dec"] = to_json(model.params.theta_dec);
  j["head_power"] = head_json(model.params.head_power);
  j["head_gas"] = head_json(model.params.head_gas);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << j.dump() << '\n';
}

GamesModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    const json j = json::parse(in);
    if (j.at("format") != "games-model") throw InputError(path.string() + ": not a model checkpoint");
    if (j.at("version").get<int>() != kCheckpointVersion) {
      throw InputError(path.string() + ": unsupported checkpoint version");
    }
    SignalDims d;
    const auto& jd = j.at("dims");
    d.n_power = jd.at("n_power");
    d.n_gas = jd.at("n_gas");
    d.t_electricity = jd.at("t_electricity");
    d.t_wind = jd.at("t_wind");
    d.t_solar = jd.at("t_solar");
    d.t_gas = jd.at("t_gas");
    GamesConfig c;
    const auto& jc = j.at("config");
    c.k = jc.at("k");
    c.alpha_g = jc.at("alpha_g");
    c.alpha_w = jc.at("alpha_w");
    c.alpha_s = jc.at("alpha_s");
    c.learning_rate = jc.at("learning_rate");
    c.max_epochs = jc.at("max_epochs");
    c.patience = jc.at("patience");
    c.rng_seed = jc.at("rng_seed");
    c.adam_beta1 = jc.at("adam_beta1");
    c.adam_beta2 = jc.at("adam_beta2");
    c.adam_epsilon = jc.at("adam_epsilon");
    if (jc.contains("hidden_sizes")) c.hidden_sizes = jc.at("hidden_sizes").get<std::vector<Index>>();

    const Index n = d.joint_nodes();
    const Index t = d.channels();
    GamesModel m = GamesModel::initialize(
        d, RenormalizedLaplacian(matrix_from_json(j.at("laplacian"), n, n, "laplacian")), c);
    m.params.theta_enc = matrix_from_json(j.at("theta_enc"), t, c.k, "theta_enc");
    m.params.theta_dec = matrix_from_json(j.at("theta_dec"), c.k, t, "theta_dec");
    auto load_head = [&](const json& arr, std::vector<DenseLayer>& head, const char* what) {
      if (arr.size() != head.size()) {
        throw InputError(std::string("checkpoint head '") + what + "' has wrong depth");
      }
      for (std::size_t l = 0; l < head.size(); ++l) {
        head[l].weight = matrix_from_json(arr[l].at("weight"), head[l].weight.rows(),
                                          head[l].weight.cols(), what);
        head[l].bias = matrix_from_json(arr[l].at("bias"), 1, head[l].bias.cols(), what);
      }
    };
    load_head(j.at("head_power"), m.params.head_power, "head_power");
    load_head(j.at("head_gas"), m.params.head_gas, "head_gas");
    const auto& jn = j.at("normalization");
    m.normalization.applied = jn.at("applied");
    m.normalization.electricity = scaling_from(jn.at("electricity"));
    m.normalization.wind = scaling_from(jn.at("wind"));
    m.normalization.solar = scaling_from(jn.at("solar"));
    m.normalization.gas = scaling_from(jn.at("gas"));
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_training_log(const std::vector<EpochRecord>& log, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "# losses are the alpha-weighted reconstruction loss averaged over days\n";
  out << "epoch,train_loss,val_loss\n";
  for (const auto& r : log) {
    out << r.epoch << ',' << format_double(r.train_loss) << ',' << format_double(r.val_loss) << '\n';
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write " + path.string());
  f << out.str();
}

}  // namespace games
