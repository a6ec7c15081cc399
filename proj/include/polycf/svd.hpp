#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "polycf/interaction.hpp"

namespace polycf {

/// Orthogonal projection onto the span of the top-s right singular vectors
/// of the symmetrically normalized interaction matrix. s = 0 is the zero map.
class LowPassProjector {
public:
    LowPassProjector() = default;
    LowPassProjector(Eigen::MatrixXd basis, Eigen::VectorXd singular_values);

    std::int64_t num_items() const { return basis_.rows(); }
    std::int64_t cutoff() const { return basis_.cols(); }

    const Eigen::MatrixXd& basis() const { return basis_; }
    const Eigen::VectorXd& singular_values() const { return singular_values_; }

    /// V_{:s} (V_{:s}^T x); O(n*s).
    Eigen::VectorXd apply(const Eigen::Ref<const Eigen::VectorXd>& x) const;

private:
    Eigen::MatrixXd basis_;            // n x s, orthonormal columns
    Eigen::VectorXd singular_values_;  // s, descending
};

struct SvdOptions {
    int power_iters = 8;       // subspace iteration cap
    int oversample = 16;       // extra block columns beyond s
    double tol = 1e-7;         // relative singular-value change to declare convergence
    int dense_threshold = 256; // dense decomposition when min(m, n) <= threshold
};

/// Top-s right singular triplets of D_U^-1/2 R D_I^-1/2, computed by seeded
/// randomized subspace iteration over the factored Gram operator, with a
/// dense decomposition fallback at small scale. Deterministic for a fixed
/// seed. Throws ConvergenceError (carrying residual norms) if the iteration
/// cap is hit before the tolerance, and InvalidArgument if s > min(m, n).
LowPassProjector truncated_svd(const InteractionMatrix& R, std::int64_t s, std::uint64_t seed,
                               const SvdOptions& options = {});

/// Binary cache: header "POLYCF-SVD\0", u32 version, u64 n, u64 s, then the
/// s singular values and the n*s basis entries as little-endian f64,
/// column-major.
void save_projector(const std::string& path, const LowPassProjector& projector);
LowPassProjector load_projector(const std::string& path);

}  // namespace polycf
