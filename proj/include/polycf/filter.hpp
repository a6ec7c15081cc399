#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <vector>

#include "polycf/basis.hpp"
#include "polycf/gram.hpp"
#include "polycf/interaction.hpp"
#include "polycf/svd.hpp"

namespace polycf {

/// The trainable object: per-normalization-order coefficient table over a
/// polynomial basis. theta(g, k) weights P_k of the gamma_g Gram operator.
struct PolynomialKernel {
    PolyBasis basis;
    int order = 5;                 // K
    std::vector<double> gammas;    // normalization orders, each in [0,1]
    Eigen::MatrixXd theta;         // |gammas| x (order + 1)

    std::int64_t gamma_count() const { return static_cast<std::int64_t>(gammas.size()); }

    void validate() const;

    /// Near-identity start: theta(., 0) = 1, everything else 0, plus
    /// N(0, jitter^2) noise so training can break symmetry.
    static PolynomialKernel initialized(const PolyBasis& basis, int order,
                                        std::vector<double> gammas, std::uint64_t seed,
                                        double jitter = 0.01);
};

/// Deployable model: kernel plus optional low-pass enhancement.
/// With omega = 0 or no projector the output is the kernel-only path.
struct CompositeFilter {
    PolynomialKernel kernel;
    std::optional<LowPassProjector> low_pass;
    double omega = 0.0;
};

/// Per-gamma table of basis signals: column k of gamma(g) holds
/// P_k(G^(gamma_g)) x.
struct BasisSignals {
    std::vector<Eigen::MatrixXd> per_gamma;  // each n x (K+1)
};

/// Binds a filter structure (basis, K, gammas, projector, omega) to one
/// interaction matrix and caches the factored Gram operators. Coefficients
/// are passed per call so training can evaluate masked tables without
/// rebuilding anything. Immutable; apply paths are safe to run from many
/// threads at once.
class FilterEngine {
public:
    FilterEngine(const InteractionMatrix& R, const PolyBasis& basis, int order,
                 std::vector<double> gammas, const LowPassProjector* low_pass, double omega);

    /// Binds to `filter`'s structure; the projector must outlive the engine.
    FilterEngine(const CompositeFilter& filter, const InteractionMatrix& R);

    const InteractionMatrix& interactions() const { return *R_; }
    std::int64_t num_items() const { return R_->num_items(); }
    int order() const { return order_; }
    const PolyBasis& basis() const { return basis_; }
    const std::vector<double>& gammas() const { return gammas_; }
    std::int64_t gamma_count() const { return static_cast<std::int64_t>(gammas_.size()); }
    double omega() const { return omega_; }
    const LowPassProjector* low_pass() const { return low_pass_; }

    const GramOperator& gram(std::int64_t g) const { return *ops_[g]; }
    /// The symmetric (gamma = 1/2) operator used by the graph objective.
    const GramOperator& gram_half() const { return *op_half_; }

    /// P_k(G^(gamma)) x for all (gamma, k); exactly K Gram applications
    /// per gamma.
    BasisSignals basis_signals(const Eigen::Ref<const Eigen::VectorXd>& x) const;

    /// Factored composite filter: the theta-weighted basis-signal sum
    /// (averaged over gammas) plus omega times the low-pass projection of
    /// the same input. Exactly |gammas|*K Gram applications.
    Eigen::VectorXd apply(const Eigen::Ref<const Eigen::MatrixXd>& theta,
                          const Eigen::Ref<const Eigen::VectorXd>& x) const;

    /// Same filter value, reusing a precomputed signal table.
    Eigen::VectorXd apply_from_signals(const Eigen::Ref<const Eigen::MatrixXd>& theta,
                                       const BasisSignals& signals,
                                       const Eigen::Ref<const Eigen::VectorXd>& x) const;

    std::uint64_t total_gram_applies() const;
    void reset_gram_counters() const;

private:
    void check_theta(const Eigen::Ref<const Eigen::MatrixXd>& theta) const;

    const InteractionMatrix* R_;
    PolyBasis basis_;
    int order_;
    std::vector<double> gammas_;
    std::vector<std::unique_ptr<GramOperator>> ops_;
    std::unique_ptr<GramOperator> op_half_;
    const LowPassProjector* low_pass_;
    double omega_;
    Eigen::MatrixXd bernstein_coeffs_;  // empty unless family == Bernstein
};

/// Response function samples on a uniform eigenvalue grid over [0,1]:
/// h_gamma(lambda) = sum_k theta(g,k) P_k(1 - lambda), plus the
/// gamma-averaged total.
struct ResponseCurve {
    Eigen::VectorXd lambdas;    // num_points
    Eigen::MatrixXd per_gamma;  // num_points x |gammas|
    Eigen::VectorXd total;      // num_points
};

ResponseCurve response_curve(const PolynomialKernel& kernel, int num_points);

/// CSV rows `lambda,gamma,response,total`, one row per (lambda, gamma).
void write_response_csv(std::ostream& out, const PolynomialKernel& kernel,
                        const ResponseCurve& curve);

}  // namespace polycf
