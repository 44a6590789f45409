#include "sign/predict.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <thread>

#include "sign/errors.hpp"
#include "sign/probit.hpp"
#include "sign/similarity.hpp"

namespace sign {

void PosteriorTrace::validate() const {
  if (draws.empty()) throw UsageError("posterior trace holds no draws");
  for (const auto& draw : draws) {
    long total = 0;
    for (const auto& c : draw.clusters) total += c.size;
    if (total != num_observations) throw StateError("trace draw sizes do not sum to the observation count");
  }
}

double predict_prob_with(const CovariateRow& x, const PosteriorTrace& trace,
                         std::span<const Eigen::VectorXd> new_cluster_betas) {
  if (trace.draws.empty()) throw UsageError("posterior trace holds no draws");
  if (!trace.hyper.terms.probit) throw UsageError("trace was fitted without the probit term");
  if (new_cluster_betas.size() != trace.draws.size()) throw UsageError("need one new-cluster beta per draw");
  const Schema& schema = trace.schema;
  if (static_cast<int>(x.cont.size()) != schema.num_continuous() ||
      static_cast<int>(x.cat.size()) != schema.num_categorical()) {
    throw DomainError("covariate row does not match the trace schema");
  }
  const auto levels = schema.levels();
  const Eigen::VectorXd design = encode_design(x, levels);
  const bool use_cov = trace.hyper.terms.covariates;
  const double d = trace.hyper.py.discount;
  const double alpha = trace.hyper.py.alpha;

  double log_g_new = 0.0;
  if (use_cov) {
    CovariateStats single = CovariateStats::empty(schema);
    single.add(x);
    log_g_new = log_marginal_g(single, trace.hyper.similarity);
  }

  std::vector<double> logw;
  std::vector<double> probs;
  double total = 0.0;
  for (std::size_t t = 0; t < trace.draws.size(); ++t) {
    const auto& clusters = trace.draws[t].clusters;
    const std::size_t num = clusters.size();
    logw.resize(num + 1);
    probs.resize(num + 1);
    for (std::size_t c = 0; c < num; ++c) {
      logw[c] = std::log(static_cast<double>(clusters[c].size) - d);
      if (use_cov) logw[c] += log_predictive_ratio(x, clusters[c].stats, trace.hyper.similarity);
      probs[c] = normal_cdf(design.dot(clusters[c].beta));
    }
    logw[num] = std::log(alpha + d * static_cast<double>(num)) + log_g_new;
    probs[num] = normal_cdf(design.dot(new_cluster_betas[t]));

    const double top = *std::max_element(logw.begin(), logw.end());
    double mass = 0.0;
    double mixed = 0.0;
    for (std::size_t c = 0; c <= num; ++c) {
      const double w = std::exp(logw[c] - top);
      mass += w;
      mixed += w * probs[c];
    }
    total += mixed / mass;
  }
  const double p = total / static_cast<double>(trace.draws.size());
  return std::clamp(p, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
}

double predict_prob(const CovariateRow& x, const PosteriorTrace& trace, Rng& rng) {
  std::vector<Eigen::VectorXd> betas;
  betas.reserve(trace.draws.size());
  for (std::size_t t = 0; t < trace.draws.size(); ++t) {
    betas.push_back(sample_beta_prior(trace.schema.design_dim(), trace.hyper.tau_beta, rng));
  }
  return predict_prob_with(x, trace, betas);
}

Predictor::Predictor(const PosteriorTrace& trace, std::uint64_t seed) : trace_(&trace) {
  trace.validate();
  Rng rng(seed);
  new_betas_.reserve(trace.draws.size());
  for (std::size_t t = 0; t < trace.draws.size(); ++t) {
    new_betas_.push_back(sample_beta_prior(trace.schema.design_dim(), trace.hyper.tau_beta, rng));
  }
}

double Predictor::operator()(const CovariateRow& x) const { return predict_prob_with(x, *trace_, new_betas_); }

std::vector<double> Predictor::predict(const Dataset& rows, int workers) const {
  if (!(rows.schema() == trace_->schema)) throw DomainError("test data schema does not match the trace");
  if (workers < 1) throw UsageError("workers must be at least 1");
  std::vector<double> out(rows.size());
  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(workers), rows.size());
  if (threads <= 1) {
    for (std::size_t i = 0; i < rows.size(); ++i) out[i] = (*this)(rows.row(i));
    return out;
  }
  const std::size_t chunk = (rows.size() + threads - 1) / threads;
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          const std::size_t end = std::min(rows.size(), (t + 1) * chunk);
          for (std::size_t i = t * chunk; i < end; ++i) out[i] = (*this)(rows.row(i));
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw UsageError("scores and labels differ in length");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double pos_rank_sum = 0.0;
  long n_pos = 0;
  long n_neg = 0;
  for (std::size_t k = 0; k < n;) {
    std::size_t end = k;
    while (end < n && scores[order[end]] == scores[order[k]]) ++end;
    // Tied block shares the mid-rank of positions k+1 .. end.
    const double mid_rank = 0.5 * static_cast<double>(k + 1 + end);
    for (std::size_t m = k; m < end; ++m) {
      const int label = labels[order[m]];
      if (label == 1) {
        pos_rank_sum += mid_rank;
        ++n_pos;
      } else if (label == 0) {
        ++n_neg;
      } else {
        throw UsageError("labels must be 0 or 1");
      }
    }
    k = end;
  }
  if (n_pos == 0 || n_neg == 0) throw UsageError("AUC needs both positive and negative labels");
  const double np = static_cast<double>(n_pos);
  return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

}  // namespace sign
