#include "polycf/gram.hpp"

#include <cmath>

#include "polycf/errors.hpp"

namespace polycf {

GramFactors normalized_interaction(const InteractionMatrix& R, double gamma) {
    if (gamma < 0.0 || gamma > 1.0) {
        throw InvalidArgument("normalization order gamma must lie in [0,1], got " +
                              std::to_string(gamma));
    }
    GramFactors f;
    f.gamma = gamma;
    const std::int64_t n = R.num_items();
    const std::int64_t m = R.num_users();
    f.item_in.resize(n);
    f.item_out.resize(n);
    for (std::int64_t i = 0; i < n; ++i) {
        const double d = static_cast<double>(R.item_degree(i));
        f.item_in[i] = d > 0.0 ? std::pow(d, gamma - 1.0) : 0.0;
        f.item_out[i] = d > 0.0 ? std::pow(d, -gamma) : 0.0;
    }
    f.user_inv.resize(m);
    for (std::int64_t u = 0; u < m; ++u) {
        const double d = static_cast<double>(R.user_degree(u));
        f.user_inv[u] = d > 0.0 ? 1.0 / d : 0.0;
    }
    return f;
}

void GramOperator::apply_into(const Eigen::Ref<const Eigen::VectorXd>& x,
                              Eigen::VectorXd& intermediate, Eigen::VectorXd& out) const {
    const std::int64_t n = R_->num_items();
    const std::int64_t m = R_->num_users();
    if (x.size() != n) {
        throw DimensionError("gram operator expects a length-" + std::to_string(n) +
                             " item signal, got length " + std::to_string(x.size()));
    }
    intermediate.resize(m);
    out.setZero(n);

    // t = D_U^-1 R D_I^(gamma-1) x
    for (std::int64_t u = 0; u < m; ++u) {
        double acc = 0.0;
        for (const std::int32_t i : R_->items_of(u)) acc += factors_.item_in[i] * x[i];
        intermediate[u] = acc * factors_.user_inv[u];
    }
    // out = D_I^-gamma R^T t
    for (std::int64_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (const std::int32_t u : R_->users_of(i)) acc += intermediate[u];
        out[i] = acc * factors_.item_out[i];
    }
    apply_count_.fetch_add(1, std::memory_order_relaxed);
}

Eigen::VectorXd GramOperator::apply(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    Eigen::VectorXd intermediate;
    Eigen::VectorXd out;
    apply_into(x, intermediate, out);
    return out;
}

}  // namespace polycf
