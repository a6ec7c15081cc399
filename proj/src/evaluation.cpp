#include "polycf/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "parallel.hpp"
#include "polycf/errors.hpp"

namespace polycf {

namespace {

Eigen::VectorXd binary_row(const InteractionMatrix& R, std::int64_t user) {
    Eigen::VectorXd row = Eigen::VectorXd::Zero(R.num_items());
    for (const std::int32_t i : R.items_of(user)) row[i] = 1.0;
    return row;
}

}  // namespace

Eigen::VectorXd score_user(const FilterEngine& engine,
                           const Eigen::Ref<const Eigen::MatrixXd>& theta, std::int64_t user) {
    const InteractionMatrix& R = engine.interactions();
    if (user < 0 || user >= R.num_users()) {
        throw InvalidArgument("user index " + std::to_string(user) + " out of range");
    }
    Eigen::VectorXd scores = engine.apply(theta, binary_row(R, user));
    for (const std::int32_t i : R.items_of(user)) {
        scores[i] = -std::numeric_limits<double>::infinity();
    }
    return scores;
}

std::vector<std::int32_t> top_k_items(const Eigen::Ref<const Eigen::VectorXd>& scores, int k) {
    const std::int64_t n = scores.size();
    const std::int64_t take = std::min<std::int64_t>(k, n);
    if (take <= 0) return {};
    std::vector<std::int32_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    const auto better = [&scores](std::int32_t a, std::int32_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;  // deterministic tie-break toward the smaller index
    };
    std::partial_sort(idx.begin(), idx.begin() + take, idx.end(), better);
    idx.resize(take);
    return idx;
}

double recall_at_k(const std::vector<std::int32_t>& ranked,
                   const std::vector<std::int32_t>& test_items, int k) {
    if (k < 1) throw InvalidArgument("recall@k needs k >= 1");
    if (test_items.empty()) throw InvalidArgument("recall@k needs a nonempty test set");
    const std::int64_t limit = std::min<std::int64_t>(k, ranked.size());
    std::int64_t hits = 0;
    for (std::int64_t p = 0; p < limit; ++p) {
        if (std::binary_search(test_items.begin(), test_items.end(), ranked[p])) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(test_items.size());
}

double ndcg_at_k(const std::vector<std::int32_t>& ranked,
                 const std::vector<std::int32_t>& test_items, int k) {
    if (k < 1) throw InvalidArgument("ndcg@k needs k >= 1");
    if (test_items.empty()) throw InvalidArgument("ndcg@k needs a nonempty test set");
    const std::int64_t limit = std::min<std::int64_t>(k, ranked.size());
    double dcg = 0.0;
    for (std::int64_t p = 0; p < limit; ++p) {
        if (std::binary_search(test_items.begin(), test_items.end(), ranked[p])) {
            dcg += 1.0 / std::log2(static_cast<double>(p) + 2.0);
        }
    }
    const std::int64_t ideal = std::min<std::int64_t>(k, test_items.size());
    double idcg = 0.0;
    for (std::int64_t p = 0; p < ideal; ++p) {
        idcg += 1.0 / std::log2(static_cast<double>(p) + 2.0);
    }
    return dcg / idcg;
}

EvalResult evaluate(const FilterEngine& engine, const Eigen::Ref<const Eigen::MatrixXd>& theta,
                    const Dataset& dataset, int k, int threads, bool keep_per_user) {
    if (k < 1) throw InvalidArgument("evaluate needs k >= 1");
    const std::int64_t m = engine.interactions().num_users();
    if (static_cast<std::int64_t>(dataset.test_items.size()) != m) {
        throw DimensionError("test split does not match the train matrix user count");
    }

    std::vector<std::int64_t> eligible;
    std::int64_t cold = 0;
    for (std::int64_t u = 0; u < m; ++u) {
        if (dataset.test_items[u].empty()) continue;
        if (engine.interactions().user_degree(u) == 0) {
            ++cold;  // zero train signal: filter output is identically zero
            continue;
        }
        eligible.push_back(u);
    }

    std::vector<std::pair<double, double>> per_user(eligible.size());
    detail::parallel_for(static_cast<std::int64_t>(eligible.size()), threads,
                         [&](std::int64_t slot) {
                             const std::int64_t u = eligible[slot];
                             const Eigen::VectorXd scores = score_user(engine, theta, u);
                             const auto ranked = top_k_items(scores, k);
                             per_user[slot] = {recall_at_k(ranked, dataset.test_items[u], k),
                                               ndcg_at_k(ranked, dataset.test_items[u], k)};
                         });

    EvalResult result;
    result.k = k;
    result.users_evaluated = static_cast<std::int64_t>(eligible.size());
    result.users_skipped_cold = cold;
    // fixed-order mean reduction
    double recall_sum = 0.0;
    double ndcg_sum = 0.0;
    for (const auto& [recall, ndcg] : per_user) {
        recall_sum += recall;
        ndcg_sum += ndcg;
    }
    if (!per_user.empty()) {
        result.recall = recall_sum / static_cast<double>(per_user.size());
        result.ndcg = ndcg_sum / static_cast<double>(per_user.size());
    }
    if (keep_per_user) result.per_user = std::move(per_user);
    return result;
}

EvalResult evaluate(const CompositeFilter& filter, const Dataset& dataset, int k, int threads,
                    bool keep_per_user) {
    filter.kernel.validate();
    FilterEngine engine(filter, dataset.train);
    return evaluate(engine, filter.kernel.theta, dataset, k, threads, keep_per_user);
}

}  // namespace polycf
