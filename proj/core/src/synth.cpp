#include "sign/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/Cholesky>

#include "sign/errors.hpp"
#include "sign/probit.hpp"
#include "sign/random.hpp"

namespace sign {

namespace {

constexpr int kP = 5;
constexpr int kQ = 5;
constexpr int kLevels = 3;

std::array<Sim1Cluster, 5> make_clusters() {
  using V = Eigen::Matrix<double, 5, 1>;
  using M = Eigen::Matrix<double, 5, 5>;
  std::array<Sim1Cluster, 5> c;
  c[0].mean = V(-2, 1.5, 0, 0, 0);
  c[1].mean = V(0, 4, 0, 0, 0);
  c[2].mean = V(0, 0, 0, 1, -2);
  c[3].mean = V(1, 2, 0, 0, 0);
  c[4].mean = V(0, 0, 0, -2, -2);

  c[0].cov = V(0.25, 0.05 * 0.05, 1, 1, 1).asDiagonal();
  c[1].cov = V(1.25 * 1.25, 0.05 * 0.05, 1, 1, 1).asDiagonal();
  c[2].cov = V(1, 1, 1, 0.05 * 0.05, 0.25).asDiagonal();
  c[3].cov = M::Identity();
  c[3].cov.topLeftCorner<2, 2>() << 0.1, 0.05, 0.05, 0.1;
  c[4].cov = M::Identity();
  c[4].cov.bottomRightCorner<2, 2>() << 0.25, 0.125, 0.125, 0.25;
  return c;
}

void check_row(std::span<const double> w, std::span<const int> u) {
  if (w.size() != kP || u.size() != kQ) throw UsageError("simulation rows have 5 continuous and 5 categorical values");
}

}  // namespace

Schema sim_schema() {
  Schema s;
  s.response = "z";
  for (int j = 1; j <= kP; ++j) s.continuous.push_back("w" + std::to_string(j));
  for (int j = 1; j <= kQ; ++j) s.categorical.push_back({"u" + std::to_string(j), kLevels});
  return s;
}

const std::array<Sim1Cluster, 5>& sim1_clusters() {
  static const std::array<Sim1Cluster, 5> clusters = make_clusters();
  return clusters;
}

double sim1_eta(int cluster, std::span<const double> w, std::span<const int> u) {
  check_row(w, u);
  auto is = [](bool b) { return b ? 1.0 : 0.0; };
  switch (cluster) {
    case 0: return -1.0 - w[4];
    case 1: return -1.0 + 2.0 * w[2];
    case 2: return -1.0 + w[3];
    case 3: return -1.0 + 1.5 * w[0] - is(u[0] == 1) + is(u[0] == 2);
    case 4: return -1.0 - 1.5 * w[0] - is(u[1] == 1) + is(u[2] == 2);
    default: throw UsageError("Simulation I has clusters 0..4");
  }
}

double sim2_eta(std::span<const double> w, std::span<const int> u) {
  check_row(w, u);
  auto is = [](bool b) { return b ? 1.0 : 0.0; };
  return -1.0 + w[0] * w[0] - w[1] * w[1] + std::sin(w[2] * w[3]) + is(u[0] == 1) - is(u[0] == 2) -
         is(u[1] == 1) + is(u[1] == 2);
}

LabeledDataset gen_sim1(int n, std::uint64_t seed) {
  if (n < 0 || n % 5 != 0) throw UsageError("Simulation I needs n divisible by 5");
  const auto& clusters = sim1_clusters();
  std::array<Eigen::Matrix<double, 5, 5>, 5> chol;
  for (int c = 0; c < 5; ++c) {
    Eigen::LLT<Eigen::Matrix<double, 5, 5>> llt(clusters[static_cast<std::size_t>(c)].cov);
    if (llt.info() != Eigen::Success) throw StateError("Simulation I covariance is not positive definite");
    chol[static_cast<std::size_t>(c)] = llt.matrixL();
  }

  Rng rng(seed);
  std::vector<int> truth(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) truth[static_cast<std::size_t>(i)] = i / (n / 5);
  for (std::size_t i = truth.size(); i > 1; --i) std::swap(truth[i - 1], truth[rng.uniform_index(i)]);

  LabeledDataset out{Dataset(sim_schema()), truth};
  Eigen::Matrix<double, 5, 1> w;
  std::array<int, kQ> u{};
  for (int i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(truth[static_cast<std::size_t>(i)]);
    Eigen::Matrix<double, 5, 1> e;
    for (int j = 0; j < kP; ++j) e[j] = rng.normal();
    w = clusters[c].mean + chol[c] * e;
    for (auto& v : u) v = static_cast<int>(rng.uniform_index(kLevels));
    const std::span<const double> ws(w.data(), kP);
    const double p = normal_cdf(sim1_eta(static_cast<int>(c), ws, u));
    const int z = rng.uniform() < p ? 1 : 0;
    out.data.push_back(z, ws, u);
  }
  return out;
}

Dataset gen_sim2(int n, std::uint64_t seed) {
  if (n < 0) throw UsageError("n must be non-negative");
  Rng rng(seed);
  Dataset data(sim_schema());
  std::array<double, kP> w{};
  std::array<int, kQ> u{};
  for (int i = 0; i < n; ++i) {
    for (auto& v : w) v = rng.normal();
    for (auto& v : u) v = static_cast<int>(rng.uniform_index(kLevels));
    const int z = rng.uniform() < normal_cdf(sim2_eta(w, u)) ? 1 : 0;
    data.push_back(z, w, u);
  }
  return data;
}

namespace {

// Minimum-cost assignment on a square matrix (Jonker-Volgenant style potentials).
std::vector<int> hungarian(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

std::vector<int> compact(std::span<const int> labels, int& count) {
  std::vector<int> out(labels.size());
  std::vector<std::pair<int, int>> seen;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto it = std::find_if(seen.begin(), seen.end(), [&](const auto& s) { return s.first == labels[i]; });
    if (it == seen.end()) {
      seen.emplace_back(labels[i], static_cast<int>(seen.size()));
      out[i] = static_cast<int>(seen.size()) - 1;
    } else {
      out[i] = it->second;
    }
  }
  count = static_cast<int>(seen.size());
  return out;
}

}  // namespace

double misclustering_rate(std::span<const int> truth, std::span<const int> estimate) {
  if (truth.size() != estimate.size()) throw UsageError("label vectors differ in length");
  if (truth.empty()) return 0.0;
  int kt = 0;
  int ke = 0;
  const auto t = compact(truth, kt);
  const auto e = compact(estimate, ke);
  const int k = std::max(kt, ke);
  std::vector<std::vector<double>> cost(static_cast<std::size_t>(k), std::vector<double>(static_cast<std::size_t>(k), 0.0));
  for (std::size_t i = 0; i < t.size(); ++i) cost[static_cast<std::size_t>(e[i])][static_cast<std::size_t>(t[i])] -= 1.0;
  const auto match = hungarian(cost);
  double matched = 0.0;
  for (int r = 0; r < k; ++r) matched -= cost[static_cast<std::size_t>(r)][static_cast<std::size_t>(match[static_cast<std::size_t>(r)])];
  return 1.0 - matched / static_cast<double>(truth.size());
}

}  // namespace sign
