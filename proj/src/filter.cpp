#include "polycf/filter.hpp"

#include <algorithm>
#include <cmath>

#include "polycf/errors.hpp"
#include "polycf/rng.hpp"

namespace polycf {

void PolynomialKernel::validate() const {
    if (order < 0) throw InvalidArgument("kernel order must be >= 0");
    if (gammas.empty()) throw InvalidArgument("kernel needs at least one normalization order");
    for (const double g : gammas) {
        if (g < 0.0 || g > 1.0) {
            throw InvalidArgument("normalization order " + std::to_string(g) +
                                  " outside [0,1]");
        }
    }
    if (theta.rows() != gamma_count() || theta.cols() != order + 1) {
        throw DimensionError("theta must be |gammas| x (K+1)");
    }
    if (!theta.allFinite()) throw InvalidArgument("theta contains non-finite entries");
}

PolynomialKernel PolynomialKernel::initialized(const PolyBasis& basis, int order,
                                               std::vector<double> gammas, std::uint64_t seed,
                                               double jitter) {
    PolynomialKernel kernel;
    kernel.basis = basis;
    kernel.order = order;
    kernel.gammas = std::move(gammas);
    kernel.theta = Eigen::MatrixXd::Zero(kernel.gamma_count(), order + 1);
    kernel.theta.col(0).setOnes();
    if (jitter > 0.0) {
        Rng rng(Rng::mix(seed, 0x7468657461ULL));
        for (std::int64_t g = 0; g < kernel.theta.rows(); ++g) {
            for (std::int64_t k = 0; k < kernel.theta.cols(); ++k) {
                kernel.theta(g, k) += jitter * rng.normal();
            }
        }
    }
    kernel.validate();
    return kernel;
}

FilterEngine::FilterEngine(const InteractionMatrix& R, const PolyBasis& basis, int order,
                           std::vector<double> gammas, const LowPassProjector* low_pass,
                           double omega)
    : R_(&R),
      basis_(basis),
      order_(order),
      gammas_(std::move(gammas)),
      low_pass_(low_pass),
      omega_(omega) {
    if (order_ < 0) throw InvalidArgument("filter order must be >= 0");
    if (gammas_.empty()) throw InvalidArgument("filter needs at least one normalization order");
    if (omega_ < 0.0) throw InvalidArgument("omega must be >= 0");
    if (low_pass_ != nullptr && low_pass_->cutoff() > 0 &&
        low_pass_->num_items() != R.num_items()) {
        throw DimensionError("low-pass projector was built for a different item count");
    }
    ops_.reserve(gammas_.size());
    for (const double gamma : gammas_) ops_.push_back(std::make_unique<GramOperator>(R, gamma));
    op_half_ = std::make_unique<GramOperator>(R, 0.5);
    if (basis_.family == BasisFamily::Bernstein) {
        bernstein_coeffs_ = bernstein_monomial_coeffs(order_);
    }
}

FilterEngine::FilterEngine(const CompositeFilter& filter, const InteractionMatrix& R)
    : FilterEngine(R, filter.kernel.basis, filter.kernel.order, filter.kernel.gammas,
                   filter.low_pass.has_value() ? &*filter.low_pass : nullptr, filter.omega) {}

void FilterEngine::check_theta(const Eigen::Ref<const Eigen::MatrixXd>& theta) const {
    if (theta.rows() != gamma_count() || theta.cols() != order_ + 1) {
        throw DimensionError("coefficient table shape mismatch: expected " +
                             std::to_string(gamma_count()) + " x " + std::to_string(order_ + 1));
    }
}

namespace {

// Streams the basis-signal recurrence for one Gram operator: emit(k, b_k)
// is called for k = 0..K in order, with exactly K operator applications.
template <typename Emit>
void stream_signals(const GramOperator& op, const PolyBasis& basis, int order,
                    const Eigen::MatrixXd& bernstein_coeffs,
                    const Eigen::Ref<const Eigen::VectorXd>& x, Emit&& emit) {
    const std::int64_t n = op.num_items();
    Eigen::VectorXd workspace(op.interactions().num_users());
    Eigen::VectorXd applied(n);

    if (basis.family == BasisFamily::Bernstein) {
        // Shared monomial operator powers; each B_{k,K} is a fixed linear
        // combination of them, so the matvec budget stays at K.
        Eigen::MatrixXd powers(n, order + 1);
        powers.col(0) = x;
        for (int j = 1; j <= order; ++j) {
            op.apply_into(powers.col(j - 1), workspace, applied);
            powers.col(j) = applied;
        }
        Eigen::VectorXd signal(n);
        for (int k = 0; k <= order; ++k) {
            signal.setZero();
            for (int j = k; j <= order; ++j) signal += bernstein_coeffs(k, j) * powers.col(j);
            emit(k, signal);
        }
        return;
    }

    const bool shifted = uses_shifted_argument(basis.family);
    Eigen::VectorXd prev2;
    Eigen::VectorXd prev = x;
    emit(0, prev);
    Eigen::VectorXd current(n);
    for (int k = 1; k <= order; ++k) {
        const RecurrenceStep step = recurrence_step(basis, k);
        op.apply_into(prev, workspace, applied);
        // operator argument: G for monomial, 2G - I otherwise
        if (shifted) {
            current = step.mul_t * (2.0 * applied - prev) + step.mul_prev * prev;
        } else {
            current = step.mul_t * applied + step.mul_prev * prev;
        }
        if (k >= 2) current += step.mul_prev2 * prev2;
        emit(k, current);
        prev2 = std::move(prev);
        prev = current;
    }
}

}  // namespace

BasisSignals FilterEngine::basis_signals(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (x.size() != num_items()) {
        throw DimensionError("basis signals expect a length-" + std::to_string(num_items()) +
                             " signal, got " + std::to_string(x.size()));
    }
    BasisSignals signals;
    signals.per_gamma.resize(gammas_.size());
    for (std::size_t g = 0; g < gammas_.size(); ++g) {
        Eigen::MatrixXd& table = signals.per_gamma[g];
        table.resize(num_items(), order_ + 1);
        stream_signals(*ops_[g], basis_, order_, bernstein_coeffs_, x,
                       [&](int k, const Eigen::VectorXd& b) { table.col(k) = b; });
    }
    return signals;
}

Eigen::VectorXd FilterEngine::apply(const Eigen::Ref<const Eigen::MatrixXd>& theta,
                                    const Eigen::Ref<const Eigen::VectorXd>& x) const {
    check_theta(theta);
    if (x.size() != num_items()) {
        throw DimensionError("composite filter expects a length-" + std::to_string(num_items()) +
                             " signal, got " + std::to_string(x.size()));
    }
    Eigen::VectorXd out = Eigen::VectorXd::Zero(num_items());
    for (std::size_t g = 0; g < gammas_.size(); ++g) {
        stream_signals(*ops_[g], basis_, order_, bernstein_coeffs_, x,
                       [&](int k, const Eigen::VectorXd& b) {
                           out.noalias() += theta(static_cast<std::int64_t>(g), k) * b;
                       });
    }
    out /= static_cast<double>(gammas_.size());
    if (omega_ != 0.0 && low_pass_ != nullptr && low_pass_->cutoff() > 0) {
        out.noalias() += omega_ * low_pass_->apply(x);
    }
    return out;
}

Eigen::VectorXd FilterEngine::apply_from_signals(
    const Eigen::Ref<const Eigen::MatrixXd>& theta, const BasisSignals& signals,
    const Eigen::Ref<const Eigen::VectorXd>& x) const {
    check_theta(theta);
    if (signals.per_gamma.size() != gammas_.size()) {
        throw DimensionError("signal table gamma count mismatch");
    }
    Eigen::VectorXd out = Eigen::VectorXd::Zero(num_items());
    for (std::size_t g = 0; g < gammas_.size(); ++g) {
        out.noalias() +=
            signals.per_gamma[g] * theta.row(static_cast<std::int64_t>(g)).transpose();
    }
    out /= static_cast<double>(gammas_.size());
    if (omega_ != 0.0 && low_pass_ != nullptr && low_pass_->cutoff() > 0) {
        out.noalias() += omega_ * low_pass_->apply(x);
    }
    return out;
}

std::uint64_t FilterEngine::total_gram_applies() const {
    std::uint64_t total = 0;
    for (const auto& op : ops_) total += op->apply_count();
    return total;
}

void FilterEngine::reset_gram_counters() const {
    for (const auto& op : ops_) op->reset_apply_count();
    op_half_->reset_apply_count();
}

ResponseCurve response_curve(const PolynomialKernel& kernel, int num_points) {
    if (num_points < 2) throw InvalidArgument("response curve needs at least 2 samples");
    kernel.validate();
    const std::int64_t gcount = kernel.gamma_count();
    ResponseCurve curve;
    curve.lambdas.resize(num_points);
    curve.per_gamma.resize(num_points, gcount);
    curve.total.resize(num_points);
    for (int p = 0; p < num_points; ++p) {
        const double lambda = static_cast<double>(p) / static_cast<double>(num_points - 1);
        curve.lambdas[p] = lambda;
        const Eigen::VectorXd values = basis_values(kernel.basis, kernel.order, 1.0 - lambda);
        for (std::int64_t g = 0; g < gcount; ++g) {
            curve.per_gamma(p, g) = kernel.theta.row(g).dot(values);
        }
        curve.total[p] = curve.per_gamma.row(p).mean();
    }
    return curve;
}

void write_response_csv(std::ostream& out, const PolynomialKernel& kernel,
                        const ResponseCurve& curve) {
    out << "lambda,gamma,response,total\n";
    out.precision(17);
    for (std::int64_t p = 0; p < curve.lambdas.size(); ++p) {
        for (std::int64_t g = 0; g < kernel.gamma_count(); ++g) {
            out << curve.lambdas[p] << ',' << kernel.gammas[static_cast<std::size_t>(g)] << ','
                << curve.per_gamma(p, g) << ',' << curve.total[p] << '\n';
        }
    }
}

}  // namespace polycf
