#include "sign/probit.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

#include "sign/errors.hpp"

namespace sign {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kHalfLogTwoPi = 0.91893853320467274178;
constexpr double kAsymptoticCutoff = -35.0;

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double log_normal_cdf(double x) {
  if (x > 0.0) return std::log1p(-0.5 * std::erfc(x * kInvSqrt2));
  if (x > kAsymptoticCutoff) return std::log(0.5 * std::erfc(-x * kInvSqrt2));
  // Mills-ratio series: Phi(x) ~ phi(x)/|x| (1 - 1/x^2 + 3/x^4 - 15/x^6 + 105/x^8).
  const double inv2 = 1.0 / (x * x);
  const double series = 1.0 - inv2 * (1.0 - inv2 * (3.0 - inv2 * (15.0 - inv2 * 105.0)));
  return -0.5 * x * x - std::log(-x) - kHalfLogTwoPi + std::log(series);
}

void encode_design_into(const CovariateRow& row, std::span<const int> levels, std::span<double> out) {
  if (row.cat.size() != levels.size()) throw UsageError("row does not match categorical schema");
  std::size_t pos = 0;
  out[pos++] = 1.0;
  for (double w : row.cont) out[pos++] = w;
  for (std::size_t j = 0; j < levels.size(); ++j) {
    const int k = row.cat[j];
    if (k < 0 || k >= levels[j]) {
      throw DomainError("unknown category " + std::to_string(k + 1) + " in categorical column " +
                        std::to_string(j + 1));
    }
    for (int l = 1; l < levels[j]; ++l) out[pos++] = (k == l) ? 1.0 : 0.0;
  }
  if (pos != out.size()) throw UsageError("design buffer has the wrong length");
}

Eigen::VectorXd encode_design(const CovariateRow& row, std::span<const int> levels) {
  std::size_t dim = 1 + row.cont.size();
  for (int r : levels) dim += static_cast<std::size_t>(r - 1);
  Eigen::VectorXd out(static_cast<Eigen::Index>(dim));
  encode_design_into(row, levels, std::span<double>(out.data(), dim));
  return out;
}

double probit_loglik(int z, double eta) { return z == 1 ? log_normal_cdf(eta) : log_normal_cdf(-eta); }

double probit_loglik(int z, const Eigen::Ref<const Eigen::VectorXd>& design,
                     const Eigen::Ref<const Eigen::VectorXd>& beta) {
  return probit_loglik(z, design.dot(beta));
}

Eigen::VectorXd sample_beta_prior(int dim, double tau_beta, Rng& rng) {
  Eigen::VectorXd beta(dim);
  const double sd = std::sqrt(tau_beta);
  for (int k = 0; k < dim; ++k) beta[k] = sd * rng.normal();
  return beta;
}

Eigen::VectorXd sample_beta_given_cluster(const Eigen::MatrixXd& gram,
                                          const Eigen::VectorXd& design_t_latents, double tau_beta,
                                          Rng& rng) {
  if (!(tau_beta > 0.0)) throw DomainError("tau_beta must be positive");
  Eigen::MatrixXd precision = gram;
  precision.diagonal().array() += 1.0 / tau_beta;
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) throw StateError("Cholesky factorization of the beta precision failed");
  const Eigen::VectorXd mean = llt.solve(design_t_latents);
  Eigen::VectorXd noise(mean.size());
  for (Eigen::Index k = 0; k < noise.size(); ++k) noise[k] = rng.normal();
  // precision = U'U, so U^{-1} noise has covariance precision^{-1}.
  return mean + llt.matrixU().solve(noise);
}

Eigen::VectorXd sample_beta_given_cluster(const RowMatrix& design, std::span<const double> latents,
                                          double tau_beta, Rng& rng) {
  if (static_cast<Eigen::Index>(latents.size()) != design.rows()) {
    throw UsageError("latent vector does not match design rows");
  }
  const Eigen::Map<const Eigen::VectorXd> ell(latents.data(), design.rows());
  const Eigen::MatrixXd gram = design.transpose() * design;
  const Eigen::VectorXd xtl = design.transpose() * ell;
  return sample_beta_given_cluster(gram, xtl, tau_beta, rng);
}

double sample_latent(int z, double eta, Rng& rng) {
  if (z == 1) {
    const double latent = eta + rng.std_normal_above(-eta);
    // The sum can round onto the boundary when |eta| dwarfs the draw.
    return latent > 0.0 ? latent : std::numeric_limits<double>::denorm_min();
  }
  const double latent = eta - rng.std_normal_above(eta);
  return latent <= 0.0 ? latent : 0.0;
}

std::vector<double> sample_latents(std::span<const std::uint8_t> outcomes,
                                   std::span<const double> linear_predictors, Rng& rng) {
  if (outcomes.size() != linear_predictors.size()) throw UsageError("outcome/predictor length mismatch");
  std::vector<double> out(outcomes.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = sample_latent(outcomes[i], linear_predictors[i], rng);
  return out;
}

}  // namespace sign
