#pragma once

// Independent reference implementations used only by tests. Everything here
// is dense and direct: no code path is shared with the factored production
// operators it checks.

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "polycf/basis.hpp"
#include "polycf/filter.hpp"
#include "polycf/interaction.hpp"
#include "polycf/rng.hpp"

namespace polycf::oracle {

Eigen::MatrixXd dense_interactions(const InteractionMatrix& R);

// D_I^-gamma R^T D_U^-1 R D_I^(gamma-1) via dense products, with
// zero-degree rows/columns scaled by 0.
Eigen::MatrixXd dense_gram(const InteractionMatrix& R, double gamma);

// D_U^-1/2 R D_I^-1/2 via dense products.
Eigen::MatrixXd dense_normalized(const InteractionMatrix& R);

// Closed-form scalar basis values (no recurrences): monomial powers,
// Chebyshev cosine form, Bernstein binomials, the Jacobi hypergeometric
// sum, Hermite's explicit sum.
double basis_value(const PolyBasis& basis, int k, double x);

// Spectral route for the composite filter: per gamma, eigendecompose the
// symmetric Gram densely, map through the degree similarity scaling, apply
// the per-eigenvalue gain sum_k theta(g,k) P_k(lambda); add omega times the
// dense-SVD projector.
Eigen::VectorXd spectral_filter(const InteractionMatrix& R, const PolynomialKernel& kernel,
                                double omega, std::int64_t svd_cutoff,
                                const Eigen::Ref<const Eigen::VectorXd>& x);

// Dense SVD of the normalized interactions; returns the top-s right
// singular vectors (n x s) and singular values.
struct DenseSvd {
    Eigen::MatrixXd v;
    Eigen::VectorXd sigma;
};
DenseSvd dense_svd(const InteractionMatrix& R, std::int64_t s);

// Exhaustive full-sort ranking metrics: ranks every non-train item by
// (score desc, index asc), then applies the textbook formulas.
struct RankingMetrics {
    double recall = 0.0;
    double ndcg = 0.0;
};
RankingMetrics brute_force_metrics(const Eigen::Ref<const Eigen::VectorXd>& raw_scores,
                                   const std::vector<std::int32_t>& train_items,
                                   const std::vector<std::int32_t>& test_items, int k);

// Central finite differences of `loss` over the coefficient table.
Eigen::MatrixXd fd_gradient(const std::function<double(const Eigen::MatrixXd&)>& loss,
                            const Eigen::MatrixXd& theta, double step = 1e-5);

// Random test instance helpers.
InteractionMatrix random_interactions(std::int64_t m, std::int64_t n, double density, Rng& rng);
Eigen::VectorXd random_vector(std::int64_t n, Rng& rng);

}  // namespace polycf::oracle
