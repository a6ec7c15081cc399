#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "polycf/filter.hpp"
#include "polycf/interaction.hpp"
#include "polycf/rng.hpp"

namespace polycf {

struct TrainConfig {
    double learning_rate = 1e-3;
    int epochs = 0;
    int batch_users = 1024;
    double noise_eps = 0.1;          // variance of the graph-objective noise
    double kernel_dropout = 0.2;     // coefficient dropout rate, [0,1)
    int negatives_per_positive = 1;
    std::uint64_t rng_seed = 0;
    double val_fraction = 0.0;       // >0 carves a per-user validation split
    int threads = 0;                 // 0 = hardware concurrency
    bool determinism = true;         // fixed reduction order

    // Eq-level weights of the two objectives are fixed at 1 (unweighted sum).
    static constexpr double weight_graph = 1.0;
    static constexpr double weight_bpr = 1.0;

    void validate() const;
};

struct Triple {
    std::int32_t user;
    std::int32_t pos;
    std::int32_t neg;
};
using TripleBatch = std::vector<Triple>;

/// dL/dtheta, same shape as the coefficient table.
using GradientTable = Eigen::MatrixXd;

struct SampledBatch {
    TripleBatch triples;
    std::vector<std::int32_t> users;  // distinct users backing the triples
    std::int64_t skipped_full_users = 0;
};

/// Users are drawn uniformly without replacement within the batch; each
/// contributes one uniformly chosen positive and `negatives` rejection-
/// sampled negatives. Users interacting with every item are skipped and
/// counted.
SampledBatch sample_triples(const InteractionMatrix& R, int batch_users, int negatives,
                            Rng& rng);

struct Objective {
    double loss = 0.0;
    GradientTable grad;
};

/// Graph-smoothness objective for one user with a pinned noise vector:
///   L_g = (r* - r_u)^T (I - G^(1/2)) (r* - r_u),  r* = H_g(r_u + z).
/// The gradient is exact: (2/|Gamma|) b(g,k)^T (I - G^(1/2)) (r* - r_u)
/// with b the basis signals of the noised input. omega and the projector
/// are constants.
Objective graph_objective_fixed(const FilterEngine& engine,
                                const Eigen::Ref<const Eigen::MatrixXd>& theta, std::int64_t user,
                                const Eigen::Ref<const Eigen::VectorXd>& noise);

/// Draws z ~ N(0, eps * I) and evaluates graph_objective_fixed.
Objective graph_objective(const FilterEngine& engine,
                          const Eigen::Ref<const Eigen::MatrixXd>& theta, std::int64_t user,
                          double noise_eps, Rng& rng);

/// Pairwise ranking loss summed over the batch; scores are the noise-free
/// filter outputs. Basis signals are computed once per distinct user.
Objective bpr_loss(const FilterEngine& engine, const Eigen::Ref<const Eigen::MatrixXd>& theta,
                   const TripleBatch& batch);

/// Inverted dropout over the coefficient table: zeroed with probability
/// `rate`, survivors scaled by 1/(1-rate). Training forward passes only;
/// inference never calls this.
Eigen::MatrixXd dropout_mask(std::int64_t rows, std::int64_t cols, double rate, Rng& rng);
Eigen::MatrixXd apply_kernel_dropout(const Eigen::Ref<const Eigen::MatrixXd>& theta, double rate,
                                     Rng& rng);

struct EpochLog {
    int epoch = 0;
    double loss_graph = 0.0;
    double loss_bpr = 0.0;
    double loss_total = 0.0;
    std::optional<double> val_recall = {};
    std::optional<double> val_ndcg = {};
};

struct TrainResult {
    CompositeFilter filter;
    std::vector<EpochLog> log;
};

/// Mini-batch SGD on the joint objective L_g + L_bpr. Per batch: one
/// dropout mask is drawn and applied to the forward pass of both
/// objectives, per-user contributions are computed in parallel, gradients
/// reduce in a fixed order (determinism mode), and theta steps by
/// -lr * grad. Deterministic for a fixed seed. Throws TrainingError with a
/// theta dump if the loss turns non-finite.
TrainResult train(const Dataset& dataset, const TrainConfig& config, CompositeFilter initial);

}  // namespace polycf
