#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "polycf/filter.hpp"
#include "polycf/interaction.hpp"

namespace polycf {

struct EvalResult {
    double recall = 0.0;
    double ndcg = 0.0;
    int k = 0;
    std::int64_t users_evaluated = 0;
    std::int64_t users_skipped_cold = 0;  // zero train degree
    std::optional<std::vector<std::pair<double, double>>> per_user = {};
};

/// Filter output for user u's binary train row, with the train items
/// replaced by -inf so they can never enter a top-K list.
Eigen::VectorXd score_user(const FilterEngine& engine,
                           const Eigen::Ref<const Eigen::MatrixXd>& theta, std::int64_t user);

/// Exact top-k by partial selection (no full sort). Ties break toward the
/// smaller item index.
std::vector<std::int32_t> top_k_items(const Eigen::Ref<const Eigen::VectorXd>& scores, int k);

/// |top-k intersect test| / |test|. test_items must be sorted and nonempty.
double recall_at_k(const std::vector<std::int32_t>& ranked,
                   const std::vector<std::int32_t>& test_items, int k);

/// Binary-relevance NDCG: DCG = sum over hit positions p (1-indexed) of
/// 1/log2(p+1), normalized by the ideal DCG over min(|test|, k) positions.
double ndcg_at_k(const std::vector<std::int32_t>& ranked,
                 const std::vector<std::int32_t>& test_items, int k);

/// Full-ranking protocol: every user with a nonempty test set is scored,
/// train items masked, metrics averaged over evaluated users. Cold users
/// (no train interactions) are flagged and excluded. Parallel over users
/// with a fixed-order mean reduction.
EvalResult evaluate(const FilterEngine& engine, const Eigen::Ref<const Eigen::MatrixXd>& theta,
                    const Dataset& dataset, int k = 20, int threads = 0,
                    bool keep_per_user = false);

EvalResult evaluate(const CompositeFilter& filter, const Dataset& dataset, int k = 20,
                    int threads = 0, bool keep_per_user = false);

}  // namespace polycf
