#include "games/repdays.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <numeric>

#include "json.hpp"

#include "games/errors.hpp"

namespace games {

using Eigen::MatrixXd;

std::size_t RepresentativeDaySet::weight_of(std::size_t medoid) const {
  auto it = std::find(medoids.begin(), medoids.end(), medoid);
  if (it == medoids.end()) throw InputError("day " + std::to_string(medoid) + " is not a medoid");
  return weights[static_cast<std::size_t>(it - medoids.begin())];
}

double distance(const MatrixXd& a, const MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InputError("embedding shapes differ");
  }
  return (a - b).squaredNorm();
}

MatrixXd distance_matrix(const std::vector<MatrixXd>& points) {
  const auto n = static_cast<Eigen::Index>(points.size());
  MatrixXd d = MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      d(i, j) = distance(points[i], points[j]);
      d(j, i) = d(i, j);
    }
  }
  return d;
}

RepresentativeDaySet assign_to_medoids(const MatrixXd& distances, std::vector<std::size_t> medoids) {
  const auto n = static_cast<std::size_t>(distances.rows());
  std::sort(medoids.begin(), medoids.end());
  if (medoids.empty()) throw InputError("at least one medoid required");
  if (std::adjacent_find(medoids.begin(), medoids.end()) != medoids.end()) {
    throw InputError("duplicate medoid");
  }
  if (medoids.back() >= n) throw InputError("medoid out of range");
  RepresentativeDaySet set;
  set.medoids = medoids;
  set.assignment.resize(n);
  set.weights.assign(medoids.size(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = 0;
    for (std::size_t m = 1; m < medoids.size(); ++m) {
      if (distances(i, medoids[m]) < distances(i, medoids[best])) best = m;
    }
    // a medoid always belongs to its own cluster
    for (std::size_t m = 0; m < medoids.size(); ++m) {
      if (medoids[m] == i) best = m;
    }
    set.assignment[i] = medoids[best];
    set.weights[best] += 1;
    set.objective += distances(i, medoids[best]);
  }
  return set;
}

namespace {

void check_k(std::size_t k, std::size_t n) {
  if (k == 0) throw InputError("number of representative days must be positive");
  if (k > n) {
    throw InputError("cannot select " + std::to_string(k) + " representative days from " +
                     std::to_string(n) + " days");
  }
}

std::vector<std::size_t> pam_build(const MatrixXd& d, std::size_t k) {
  const auto n = static_cast<std::size_t>(d.rows());
  std::vector<std::size_t> medoids;
  std::vector<bool> chosen(n, false);
  std::size_t first = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double cost = d.row(static_cast<Eigen::Index>(i)).sum();
    if (cost < best) {
      best = cost;
      first = i;
    }
  }
  medoids.push_back(first);
  chosen[first] = true;
  std::vector<double> nearest(n);
  for (std::size_t j = 0; j < n; ++j) nearest[j] = d(j, first);
  while (medoids.size() < k) {
    std::size_t pick = n;
    double best_gain = -1.0;
    for (std::size_t c = 0; c < n; ++c) {
      if (chosen[c]) continue;
      double gain = 0.0;
      for (std::size_t j = 0; j < n; ++j) gain += std::max(0.0, nearest[j] - d(j, c));
      if (gain > best_gain) {
        best_gain = gain;
        pick = c;
      }
    }
    medoids.push_back(pick);
    chosen[pick] = true;
    for (std::size_t j = 0; j < n; ++j) nearest[j] = std::min(nearest[j], d(j, pick));
  }
  return medoids;
}

}  // namespace

RepresentativeDaySet swap_improvement_pass(const RepresentativeDaySet& current,
                                           const MatrixXd& d) {
  const auto n = static_cast<std::size_t>(d.rows());
  if (current.assignment.size() != n) throw InputError("day set does not match distance matrix");
  std::vector<std::size_t> medoids = current.medoids;
  const double scale = std::max(1.0, d.cwiseAbs().maxCoeff());
  const double tol = 1e-12 * scale;
  while (true) {
    std::vector<bool> is_medoid(n, false);
    for (auto m : medoids) is_medoid[m] = true;
    // nearest and second-nearest medoid distance per point
    std::vector<double> d1(n), d2(n);
    std::vector<std::size_t> near(n);
    for (std::size_t j = 0; j < n; ++j) {
      d1[j] = d2[j] = std::numeric_limits<double>::infinity();
      for (std::size_t m = 0; m < medoids.size(); ++m) {
        const double v = d(j, medoids[m]);
        if (v < d1[j]) {
          d2[j] = d1[j];
          d1[j] = v;
          near[j] = m;
        } else if (v < d2[j]) {
          d2[j] = v;
        }
      }
    }
    double best_delta = -tol;
    std::size_t best_out = medoids.size();
    std::size_t best_in = n;
    for (std::size_t m = 0; m < medoids.size(); ++m) {
      for (std::size_t h = 0; h < n; ++h) {
        if (is_medoid[h]) continue;
        double delta = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          const double via_h = d(j, h);
          const double kept = near[j] == m ? d2[j] : d1[j];
          delta += std::min(kept, via_h) - d1[j];
        }
        if (delta < best_delta) {
          best_delta = delta;
          best_out = m;
          best_in = h;
        }
      }
    }
    if (best_out == medoids.size()) break;
    medoids[best_out] = best_in;
  }
  auto out = assign_to_medoids(d, medoids);
  out.source = current.source;
  out.seed = current.seed;
  return out;
}

RepresentativeDaySet kmedoids(const std::vector<MatrixXd>& points, std::size_t k, std::uint64_t seed) {
  check_k(k, points.size());
  const MatrixXd d = distance_matrix(points);
  auto initial = assign_to_medoids(d, pam_build(d, k));
  initial.seed = seed;
  return swap_improvement_pass(initial, d);
}

RepresentativeDaySet kmedoids(const EmbeddingSet& embeddings, std::size_t k, std::uint64_t seed) {
  auto set = kmedoids(embeddings.embeddings, k, seed);
  set.source = "embeddings";
  return set;
}

std::vector<MatrixXd> flatten_days(const MultiResolutionDataset& dataset) {
  const auto data = normalize(dataset);
  std::vector<MatrixXd> out;
  out.reserve(data.days.size());
  for (const auto& day : data.days) {
    const Eigen::Index size =
        day.electricity.size() + day.wind_cf.size() + day.solar_cf.size() + day.gas.size();
    MatrixXd row(1, size);
    Eigen::Index at = 0;
    for (const MatrixXd* m : {&day.electricity, &day.wind_cf, &day.solar_cf, &day.gas}) {
      for (Eigen::Index i = 0; i < m->rows(); ++i)
        for (Eigen::Index j = 0; j < m->cols(); ++j) row(0, at++) = (*m)(i, j);
    }
    out.push_back(std::move(row));
  }
  return out;
}

RepresentativeDaySet kmedoids_raw(const MultiResolutionDataset& dataset, std::size_t k,
                                  std::uint64_t seed) {
  check_k(k, dataset.days.size());
  auto set = kmedoids(flatten_days(dataset), k, seed);
  set.source = "raw";
  return set;
}

void save_day_set(const RepresentativeDaySet& set, const std::filesystem::path& path) {
  nlohmann::json j;
  j["medoids"] = set.medoids;
  j["assignment"] = set.assignment;
  j["weights"] = set.weights;
  j["objective"] = set.objective;
  j["source"] = set.source;
  j["seed"] = set.seed;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << j.dump(1) << '\n';
}

RepresentativeDaySet load_day_set(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    const auto j = nlohmann::json::parse(in);
    RepresentativeDaySet s;
    s.medoids = j.at("medoids").get<std::vector<std::size_t>>();
    s.assignment = j.at("assignment").get<std::vector<std::size_t>>();
    s.weights = j.at("weights").get<std::vector<std::size_t>>();
    s.objective = j.at("objective").get<double>();
    s.source = j.at("source").get<std::string>();
    if (s.source != "embeddings" && s.source != "raw") {
      throw InputError(path.string() + ": source must be 'embeddings' or 'raw'");
    }
    s.seed = j.value("seed", std::uint64_t{0});
    if (s.weights.size() != s.medoids.size()) {
      throw InputError(path.string() + ": weights and medoids differ in length");
    }
    const std::size_t total = std::accumulate(s.weights.begin(), s.weights.end(), std::size_t{0});
    if (total != s.assignment.size()) {
      throw InputError(path.string() + ": weights do not sum to the day count");
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

}  // namespace games
