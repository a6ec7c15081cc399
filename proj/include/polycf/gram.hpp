#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <cstdint>

#include "polycf/interaction.hpp"

namespace polycf {

/// Diagonal scale vectors realizing the factored normalized Gram
///   G^(gamma) = (D_I^-gamma R^T D_U^-1) (R D_I^(gamma-1)).
/// Zero-degree items and users get weight 0; their rows and columns of R
/// are empty, so the operator is unchanged and no division blows up.
struct GramFactors {
    double gamma = 0.5;
    Eigen::VectorXd item_in;    // D_I^(gamma-1), applied to the input signal
    Eigen::VectorXd user_inv;   // D_U^-1, applied to the m-dim intermediate
    Eigen::VectorXd item_out;   // D_I^-gamma, applied to the output signal
};

GramFactors normalized_interaction(const InteractionMatrix& R, double gamma);

/// Implicit G^(gamma): never materialized, applied as two sparse passes
/// through the m-dimensional intermediate at O(nnz) cost. Immutable after
/// construction; apply() is safe to call concurrently. The apply counter
/// backs the |Gamma|*K operator-count contract in tests.
class GramOperator {
public:
    GramOperator(const InteractionMatrix& R, double gamma)
        : R_(&R), factors_(normalized_interaction(R, gamma)) {}

    double gamma() const { return factors_.gamma; }
    std::int64_t num_items() const { return R_->num_items(); }
    const InteractionMatrix& interactions() const { return *R_; }
    const GramFactors& factors() const { return factors_; }

    Eigen::VectorXd apply(const Eigen::Ref<const Eigen::VectorXd>& x) const;

    // Workspace variant: `intermediate` must have length num_users.
    void apply_into(const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::VectorXd& intermediate,
                    Eigen::VectorXd& out) const;

    std::uint64_t apply_count() const { return apply_count_.load(std::memory_order_relaxed); }
    void reset_apply_count() const { apply_count_.store(0, std::memory_order_relaxed); }

private:
    const InteractionMatrix* R_;
    GramFactors factors_;
    mutable std::atomic<std::uint64_t> apply_count_{0};
};

}  // namespace polycf
