#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "sign/dataset.hpp"
#include "sign/random.hpp"

namespace sign {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double normal_cdf(double x);
/// log Phi(x), accurate in both tails; uses the asymptotic series below -35.
double log_normal_cdf(double x);

/// Design row: intercept, continuous values in schema order, then one
/// reference-coded dummy block per categorical column with level 0 as the
/// baseline. `out` must have length 1 + p + sum(levels - 1).
void encode_design_into(const CovariateRow& row, std::span<const int> levels, std::span<double> out);
Eigen::VectorXd encode_design(const CovariateRow& row, std::span<const int> levels);

/// z log Phi(eta) + (1 - z) log(1 - Phi(eta)). Finite for every finite eta.
double probit_loglik(int z, double eta);
double probit_loglik(int z, const Eigen::Ref<const Eigen::VectorXd>& design,
                     const Eigen::Ref<const Eigen::VectorXd>& beta);

/// Draws beta from N(0, tau_beta I). tau_beta is a variance.
Eigen::VectorXd sample_beta_prior(int dim, double tau_beta, Rng& rng);

/// Exact Gibbs draw of beta given latent utilities: precision
/// I / tau_beta + X'X and mean precision^{-1} X' latents. Takes the Gram
/// matrix and X' latents directly so callers can accumulate them.
Eigen::VectorXd sample_beta_given_cluster(const Eigen::MatrixXd& gram,
                                          const Eigen::VectorXd& design_t_latents, double tau_beta,
                                          Rng& rng);

Eigen::VectorXd sample_beta_given_cluster(const RowMatrix& design, std::span<const double> latents,
                                          double tau_beta, Rng& rng);

/// Latent utility from N(eta, 1) truncated to (0, inf) when z = 1 and to
/// (-inf, 0] when z = 0.
double sample_latent(int z, double eta, Rng& rng);
std::vector<double> sample_latents(std::span<const std::uint8_t> outcomes,
                                   std::span<const double> linear_predictors, Rng& rng);

}  // namespace sign
