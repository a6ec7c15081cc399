#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "polycf/evaluation.hpp"
#include "polycf/filter.hpp"
#include "polycf/interaction.hpp"

namespace polycf {

// Desk-scale verification tools. Everything here materializes dense
// matrices on purpose and is guarded to n <= 100; the dense computations
// are written directly from the interaction lists and never route through
// the factored production operators.

/// Dense G^(gamma), built independently of GramOperator.
Eigen::MatrixXd dense_gram(const InteractionMatrix& R, double gamma);

/// Dense symmetrically normalized interaction matrix D_U^-1/2 R D_I^-1/2.
Eigen::MatrixXd dense_normalized_interaction(const InteractionMatrix& R);

/// Embedding-propagation model used by the rank-bound demonstration:
/// score matrix R* = [P(A)E]_users ([P(A)E]_items)^T with
/// P(A) = sum_k alpha_k A^k over the normalized bipartite adjacency.
struct EmbeddingSim {
    Eigen::MatrixXd user_emb;   // m x d
    Eigen::MatrixXd item_emb;   // n x d
    Eigen::VectorXd poly_coeffs;  // alpha_0 .. alpha_K

    std::int64_t dim() const { return user_emb.cols(); }
};

struct RankBoundReport {
    std::int64_t numerical_rank = 0;
    std::int64_t embedding_dim = 0;
    bool within_bound = false;
    double sigma_max = 0.0;
    double rank_threshold = 0.0;  // 1e-8 * sigma_max
    std::vector<double> singular_values;
};

/// Propagates the embeddings, forms the reconstructed score matrix and
/// reports its numerical rank (singular values above 1e-8 * sigma_max).
RankBoundReport verify_rank_bound(const EmbeddingSim& sim, const InteractionMatrix& R);

struct Theorem2PairReport {
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double max_eigenvalue_discrepancy = 0.0;
    double max_eigenvector_residual = 0.0;  // over simple eigenvalues
    std::int64_t simple_eigenvalues = 0;
};

struct Theorem2Report {
    std::vector<Theorem2PairReport> pairs;
    double min_eigenvalue = 0.0;
    double max_eigenvalue = 0.0;
};

/// Dense eigendecompositions of G^(gamma) for each requested pair:
/// sorted-eigenvalue agreement, the spectral range, and the degree-scaling
/// eigenvector map between orders. The map mu1 = c * D^(g1-g2) mu2 holds
/// for the eigenvectors in the row-action (transpose) convention, which is
/// what gets decomposed here; simple eigenvalues only.
Theorem2Report verify_theorem2(const InteractionMatrix& R,
                               const std::vector<std::pair<double, double>>& gamma_pairs);

enum class AblationVariant { WO_Poly, WO_Kernel, WO_Norm, WO_Low, Full };

AblationVariant parse_ablation_variant(const std::string& name);
std::string ablation_variant_name(AblationVariant variant);

struct AblationSpec {
    CompositeFilter filter;
    bool kernel_frozen = false;  // frozen kernels skip training entirely
};

/// Derives the ablation configurations:
///   WO_Poly   - zero kernel, low-pass only, frozen;
///   WO_Kernel - fixed first-order Gram (Monomial, theta(.,1)=1), frozen;
///   WO_Norm   - single symmetric normalization, gammas = {1/2};
///   WO_Low    - omega = 0, projector dropped;
///   Full      - unchanged.
AblationSpec build_ablation(AblationVariant variant, const CompositeFilter& base);

struct TransferReport {
    EvalResult transferred;
    EvalResult random_baseline;      // mean over baseline seeds
    double relative_recall_improvement = 0.0;
    double relative_ndcg_improvement = 0.0;
    int baseline_seeds = 0;
};

/// Evaluates a kernel trained elsewhere against `target` (with the
/// target's own projector) and against the documented random-init
/// baseline averaged over `baseline_seeds` seeds.
TransferReport transfer_kernel(const PolynomialKernel& kernel,
                               const LowPassProjector* target_projector, double omega,
                               const Dataset& target, int k = 20, int baseline_seeds = 5,
                               std::uint64_t baseline_seed_base = 1);

}  // namespace polycf
