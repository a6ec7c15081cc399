#include "polycf/diagnostics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "polycf/errors.hpp"
#include "polycf/rng.hpp"

namespace polycf {

namespace {

constexpr std::int64_t kDeskScale = 100;

void check_desk_scale(const InteractionMatrix& R) {
    if (R.num_users() > kDeskScale || R.num_items() > kDeskScale) {
        throw ScaleGuardError("dense diagnostics are limited to " +
                              std::to_string(kDeskScale) + " users/items; got " +
                              std::to_string(R.num_users()) + " x " +
                              std::to_string(R.num_items()));
    }
}

double degree_power(double degree, double exponent) {
    return degree > 0.0 ? std::pow(degree, exponent) : 0.0;
}

}  // namespace

Eigen::MatrixXd dense_gram(const InteractionMatrix& R, double gamma) {
    const std::int64_t n = R.num_items();
    const std::int64_t m = R.num_users();
    // M = R^T D_U^-1 R accumulated straight from the interaction lists.
    Eigen::MatrixXd middle = Eigen::MatrixXd::Zero(n, n);
    for (std::int64_t u = 0; u < m; ++u) {
        const auto items = R.items_of(u);
        if (items.empty()) continue;
        const double w = 1.0 / static_cast<double>(items.size());
        for (const std::int32_t i : items) {
            for (const std::int32_t j : items) middle(i, j) += w;
        }
    }
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
    for (std::int64_t i = 0; i < n; ++i) {
        const double left = degree_power(static_cast<double>(R.item_degree(i)), -gamma);
        for (std::int64_t j = 0; j < n; ++j) {
            const double right =
                degree_power(static_cast<double>(R.item_degree(j)), gamma - 1.0);
            gram(i, j) = left * middle(i, j) * right;
        }
    }
    return gram;
}

Eigen::MatrixXd dense_normalized_interaction(const InteractionMatrix& R) {
    const std::int64_t m = R.num_users();
    const std::int64_t n = R.num_items();
    Eigen::MatrixXd tilde = Eigen::MatrixXd::Zero(m, n);
    for (std::int64_t u = 0; u < m; ++u) {
        const double du = static_cast<double>(R.user_degree(u));
        if (du == 0.0) continue;
        for (const std::int32_t i : R.items_of(u)) {
            tilde(u, i) = 1.0 / std::sqrt(du * static_cast<double>(R.item_degree(i)));
        }
    }
    return tilde;
}

RankBoundReport verify_rank_bound(const EmbeddingSim& sim, const InteractionMatrix& R) {
    check_desk_scale(R);
    const std::int64_t m = R.num_users();
    const std::int64_t n = R.num_items();
    if (sim.user_emb.rows() != m || sim.item_emb.rows() != n ||
        sim.user_emb.cols() != sim.item_emb.cols()) {
        throw DimensionError("embedding shapes do not match the interaction matrix");
    }
    if (sim.poly_coeffs.size() < 1) throw InvalidArgument("poly_coeffs must be nonempty");

    const Eigen::MatrixXd tilde = dense_normalized_interaction(R);
    Eigen::MatrixXd adjacency = Eigen::MatrixXd::Zero(m + n, m + n);
    adjacency.block(0, m, m, n) = tilde;
    adjacency.block(m, 0, n, m) = tilde.transpose();

    Eigen::MatrixXd embeddings(m + n, sim.dim());
    embeddings.topRows(m) = sim.user_emb;
    embeddings.bottomRows(n) = sim.item_emb;

    // P(A) E = sum_k alpha_k A^k E
    Eigen::MatrixXd propagated = sim.poly_coeffs[0] * embeddings;
    Eigen::MatrixXd power = embeddings;
    for (std::int64_t k = 1; k < sim.poly_coeffs.size(); ++k) {
        power = adjacency * power;
        propagated += sim.poly_coeffs[k] * power;
    }

    const Eigen::MatrixXd reconstructed =
        propagated.topRows(m) * propagated.bottomRows(n).transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(reconstructed);

    RankBoundReport report;
    report.embedding_dim = sim.dim();
    report.sigma_max = svd.singularValues().size() > 0 ? svd.singularValues()[0] : 0.0;
    report.rank_threshold = 1e-8 * report.sigma_max;
    for (std::int64_t i = 0; i < svd.singularValues().size(); ++i) {
        const double sigma = svd.singularValues()[i];
        report.singular_values.push_back(sigma);
        if (sigma > report.rank_threshold) ++report.numerical_rank;
    }
    report.within_bound = report.numerical_rank <= report.embedding_dim;
    return report;
}

namespace {

struct DenseEig {
    Eigen::VectorXd values;   // ascending
    Eigen::MatrixXd vectors;  // columns aligned with values
};

// Eigenpairs of G^(gamma) in the row-action convention (the decomposition
// is taken over the transpose, so these are the left eigenvectors of the
// operator as applied to column signals). The degree-scaling map between
// normalization orders holds in exactly this convention.
DenseEig dense_eig_row_convention(const Eigen::MatrixXd& gram) {
    Eigen::EigenSolver<Eigen::MatrixXd> solver(gram.transpose());
    if (solver.info() != Eigen::Success) {
        throw ConvergenceError("dense eigendecomposition failed");
    }
    const std::int64_t n = gram.rows();
    std::vector<std::int64_t> order(n);
    for (std::int64_t i = 0; i < n; ++i) order[i] = i;
    const auto& values = solver.eigenvalues();
    std::sort(order.begin(), order.end(), [&values](std::int64_t a, std::int64_t b) {
        return values[a].real() < values[b].real();
    });
    DenseEig eig;
    eig.values.resize(n);
    eig.vectors.resize(n, n);
    for (std::int64_t i = 0; i < n; ++i) {
        eig.values[i] = values[order[i]].real();
        eig.vectors.col(i) = solver.eigenvectors().col(order[i]).real();
    }
    return eig;
}

bool is_simple(const Eigen::VectorXd& values, std::int64_t i, double gap) {
    if (i > 0 && std::abs(values[i] - values[i - 1]) <= gap) return false;
    if (i + 1 < values.size() && std::abs(values[i] - values[i + 1]) <= gap) return false;
    return true;
}

}  // namespace

Theorem2Report verify_theorem2(const InteractionMatrix& R,
                               const std::vector<std::pair<double, double>>& gamma_pairs) {
    check_desk_scale(R);
    constexpr double kSimpleGap = 1e-5;

    Theorem2Report report;
    report.min_eigenvalue = std::numeric_limits<double>::infinity();
    report.max_eigenvalue = -std::numeric_limits<double>::infinity();

    for (const auto& [gamma1, gamma2] : gamma_pairs) {
        const DenseEig eig1 = dense_eig_row_convention(dense_gram(R, gamma1));
        const DenseEig eig2 = dense_eig_row_convention(dense_gram(R, gamma2));

        Theorem2PairReport pair;
        pair.gamma1 = gamma1;
        pair.gamma2 = gamma2;
        pair.max_eigenvalue_discrepancy =
            (eig1.values - eig2.values).cwiseAbs().maxCoeff();
        report.min_eigenvalue =
            std::min({report.min_eigenvalue, eig1.values.minCoeff(), eig2.values.minCoeff()});
        report.max_eigenvalue =
            std::max({report.max_eigenvalue, eig1.values.maxCoeff(), eig2.values.maxCoeff()});

        const std::int64_t n = R.num_items();
        Eigen::VectorXd degree_scale(n);
        for (std::int64_t i = 0; i < n; ++i) {
            const double d = static_cast<double>(R.item_degree(i));
            degree_scale[i] = d > 0.0 ? std::pow(d, gamma1 - gamma2) : 1.0;
        }
        for (std::int64_t i = 0; i < n; ++i) {
            if (!is_simple(eig1.values, i, kSimpleGap) || !is_simple(eig2.values, i, kSimpleGap)) {
                continue;
            }
            const Eigen::VectorXd mu1 = eig1.vectors.col(i).normalized();
            Eigen::VectorXd mapped = degree_scale.cwiseProduct(eig2.vectors.col(i));
            const double norm = mapped.norm();
            if (norm == 0.0) continue;
            mapped /= norm;
            // residual of mu1 against span(mapped), i.e. min over c of
            // |mu1 - c * mapped|
            const double cosine = std::abs(mu1.dot(mapped));
            const double residual = std::sqrt(std::max(0.0, 1.0 - cosine * cosine));
            pair.max_eigenvector_residual = std::max(pair.max_eigenvector_residual, residual);
            ++pair.simple_eigenvalues;
        }
        report.pairs.push_back(pair);
    }
    return report;
}

AblationVariant parse_ablation_variant(const std::string& name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "wo_poly" || lower == "wo-poly") return AblationVariant::WO_Poly;
    if (lower == "wo_kernel" || lower == "wo-kernel") return AblationVariant::WO_Kernel;
    if (lower == "wo_norm" || lower == "wo-norm") return AblationVariant::WO_Norm;
    if (lower == "wo_low" || lower == "wo-low") return AblationVariant::WO_Low;
    if (lower == "full") return AblationVariant::Full;
    throw InvalidArgument("unknown ablation variant '" + name + "'");
}

std::string ablation_variant_name(AblationVariant variant) {
    switch (variant) {
        case AblationVariant::WO_Poly: return "wo_poly";
        case AblationVariant::WO_Kernel: return "wo_kernel";
        case AblationVariant::WO_Norm: return "wo_norm";
        case AblationVariant::WO_Low: return "wo_low";
        case AblationVariant::Full: return "full";
    }
    throw InvalidArgument("invalid ablation variant enum");
}

AblationSpec build_ablation(AblationVariant variant, const CompositeFilter& base) {
    base.kernel.validate();
    AblationSpec spec;
    spec.filter = base;
    switch (variant) {
        case AblationVariant::WO_Poly:
            spec.filter.kernel.theta.setZero();
            spec.kernel_frozen = true;
            break;
        case AblationVariant::WO_Kernel: {
            if (base.kernel.order < 1) {
                throw InvalidArgument("wo_kernel needs kernel order >= 1");
            }
            spec.filter.kernel.basis.family = BasisFamily::Monomial;
            spec.filter.kernel.theta.setZero();
            spec.filter.kernel.theta.col(1).setOnes();
            spec.kernel_frozen = true;
            break;
        }
        case AblationVariant::WO_Norm: {
            PolynomialKernel reduced;
            reduced.basis = base.kernel.basis;
            reduced.order = base.kernel.order;
            reduced.gammas = {0.5};
            reduced.theta.resize(1, base.kernel.order + 1);
            // reuse the symmetric row of the base table when present
            std::int64_t found = -1;
            for (std::int64_t g = 0; g < base.kernel.gamma_count(); ++g) {
                if (base.kernel.gammas[static_cast<std::size_t>(g)] == 0.5) found = g;
            }
            if (found >= 0) {
                reduced.theta.row(0) = base.kernel.theta.row(found);
            } else {
                reduced.theta.setZero();
                reduced.theta(0, 0) = 1.0;
            }
            spec.filter.kernel = std::move(reduced);
            break;
        }
        case AblationVariant::WO_Low:
            spec.filter.omega = 0.0;
            spec.filter.low_pass.reset();
            break;
        case AblationVariant::Full:
            break;
    }
    return spec;
}

TransferReport transfer_kernel(const PolynomialKernel& kernel,
                               const LowPassProjector* target_projector, double omega,
                               const Dataset& target, int k, int baseline_seeds,
                               std::uint64_t baseline_seed_base) {
    kernel.validate();
    if (baseline_seeds < 1) throw InvalidArgument("baseline_seeds must be >= 1");

    CompositeFilter transferred;
    transferred.kernel = kernel;
    transferred.omega = target_projector != nullptr ? omega : 0.0;
    if (target_projector != nullptr) transferred.low_pass = *target_projector;

    TransferReport report;
    report.baseline_seeds = baseline_seeds;
    report.transferred = evaluate(transferred, target, k);

    double recall_sum = 0.0;
    double ndcg_sum = 0.0;
    EvalResult last;
    for (int s = 0; s < baseline_seeds; ++s) {
        CompositeFilter baseline = transferred;
        baseline.kernel = PolynomialKernel::initialized(
            kernel.basis, kernel.order, kernel.gammas,
            Rng::mix(baseline_seed_base, static_cast<std::uint64_t>(s)));
        last = evaluate(baseline, target, k);
        recall_sum += last.recall;
        ndcg_sum += last.ndcg;
    }
    report.random_baseline = last;
    report.random_baseline.recall = recall_sum / baseline_seeds;
    report.random_baseline.ndcg = ndcg_sum / baseline_seeds;

    const auto relative = [](double value, double base) {
        return base > 0.0 ? (value - base) / base : 0.0;
    };
    report.relative_recall_improvement =
        relative(report.transferred.recall, report.random_baseline.recall);
    report.relative_ndcg_improvement =
        relative(report.transferred.ndcg, report.random_baseline.ndcg);
    return report;
}

}  // namespace polycf
