#pragma once

#include <Eigen/Dense>
#include <string>

namespace polycf {

enum class BasisFamily { Monomial, Chebyshev, Bernstein, Jacobi, Hermite };

BasisFamily parse_basis_family(const std::string& name);
std::string basis_family_name(BasisFamily family);

/// Polynomial basis over the spectral domain [0,1]. The classical families
/// (Chebyshev, Jacobi, Hermite) are evaluated on t = 2x - 1 so that the
/// Gram spectrum maps onto their native interval. Hermite is the
/// probabilists' recurrence and is not bounded by 1 on [-1,1].
struct PolyBasis {
    BasisFamily family = BasisFamily::Chebyshev;
    double jacobi_a = 1.0;
    double jacobi_b = 1.0;
};

/// Scalar coefficients of the degree-k recurrence step
///   P_k = mul_t * (t * P_{k-1}) + mul_prev * P_{k-1} + mul_prev2 * P_{k-2},
/// where t is the family's argument (x for Monomial, 2x-1 otherwise).
/// Valid for k >= 1 and for every family except Bernstein.
struct RecurrenceStep {
    double mul_t = 0.0;
    double mul_prev = 0.0;
    double mul_prev2 = 0.0;
};

RecurrenceStep recurrence_step(const PolyBasis& basis, int k);

bool uses_shifted_argument(BasisFamily family);

/// [P_0(x), ..., P_K(x)]. x is clamped to [0,1] to absorb eigenvalue
/// round-off; this scalar path serves diagnostics and oracles only.
Eigen::VectorXd basis_values(const PolyBasis& basis, int order, double x);

/// Expansion of the Bernstein family into monomials:
/// B_{k,K}(x) = sum_j coeffs(k, j) x^j. Row k holds the coefficients of
/// the k-th basis function; the matrix is upper triangular.
Eigen::MatrixXd bernstein_monomial_coeffs(int order);

}  // namespace polycf
