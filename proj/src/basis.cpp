#include "polycf/basis.hpp"

#include <algorithm>
#include <cmath>

#include "polycf/errors.hpp"

namespace polycf {

BasisFamily parse_basis_family(const std::string& name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "monomial") return BasisFamily::Monomial;
    if (lower == "chebyshev") return BasisFamily::Chebyshev;
    if (lower == "bernstein") return BasisFamily::Bernstein;
    if (lower == "jacobi") return BasisFamily::Jacobi;
    if (lower == "hermite") return BasisFamily::Hermite;
    throw InvalidArgument("unknown basis family '" + name +
                          "' (monomial, chebyshev, bernstein, jacobi, hermite)");
}

std::string basis_family_name(BasisFamily family) {
    switch (family) {
        case BasisFamily::Monomial: return "monomial";
        case BasisFamily::Chebyshev: return "chebyshev";
        case BasisFamily::Bernstein: return "bernstein";
        case BasisFamily::Jacobi: return "jacobi";
        case BasisFamily::Hermite: return "hermite";
    }
    throw InvalidArgument("invalid basis family enum");
}

bool uses_shifted_argument(BasisFamily family) {
    return family == BasisFamily::Chebyshev || family == BasisFamily::Jacobi ||
           family == BasisFamily::Hermite;
}

RecurrenceStep recurrence_step(const PolyBasis& basis, int k) {
    if (k < 1) throw InvalidArgument("recurrence step index must be >= 1");
    switch (basis.family) {
        case BasisFamily::Monomial:
            return {1.0, 0.0, 0.0};
        case BasisFamily::Chebyshev:
            if (k == 1) return {1.0, 0.0, 0.0};
            return {2.0, 0.0, -1.0};
        case BasisFamily::Hermite:
            // Probabilists': He_k = t He_{k-1} - (k-1) He_{k-2}.
            if (k == 1) return {1.0, 0.0, 0.0};
            return {1.0, 0.0, -static_cast<double>(k - 1)};
        case BasisFamily::Jacobi: {
            const double a = basis.jacobi_a;
            const double b = basis.jacobi_b;
            if (a <= -1.0 || b <= -1.0) {
                throw InvalidArgument("jacobi parameters must satisfy a, b > -1");
            }
            if (k == 1) return {(a + b + 2.0) / 2.0, (a - b) / 2.0, 0.0};
            const double kk = static_cast<double>(k);
            const double c = 2.0 * kk + a + b;
            const double denom = 2.0 * kk * (kk + a + b) * (c - 2.0);
            const double mul_t = (c - 1.0) * c * (c - 2.0) / denom;
            const double mul_prev = (c - 1.0) * (a * a - b * b) / denom;
            const double mul_prev2 = -2.0 * (kk + a - 1.0) * (kk + b - 1.0) * c / denom;
            return {mul_t, mul_prev, mul_prev2};
        }
        case BasisFamily::Bernstein:
            throw InvalidArgument("bernstein has no three-term recurrence; expand to monomials");
    }
    throw InvalidArgument("invalid basis family enum");
}

Eigen::MatrixXd bernstein_monomial_coeffs(int order) {
    if (order < 0) throw InvalidArgument("basis order must be >= 0");
    const int K = order;
    // binomial triangle up to K
    Eigen::MatrixXd binom = Eigen::MatrixXd::Zero(K + 1, K + 1);
    for (int i = 0; i <= K; ++i) {
        binom(i, 0) = 1.0;
        for (int j = 1; j <= i; ++j) {
            binom(i, j) = binom(i - 1, j - 1) + (j <= i - 1 ? binom(i - 1, j) : 0.0);
        }
    }
    // B_{k,K}(x) = C(K,k) x^k (1-x)^{K-k} = sum_j (-1)^{j-k} C(K,k) C(K-k, j-k) x^j
    Eigen::MatrixXd coeffs = Eigen::MatrixXd::Zero(K + 1, K + 1);
    for (int k = 0; k <= K; ++k) {
        for (int j = k; j <= K; ++j) {
            const double sign = ((j - k) % 2 == 0) ? 1.0 : -1.0;
            coeffs(k, j) = sign * binom(K, k) * binom(K - k, j - k);
        }
    }
    return coeffs;
}

Eigen::VectorXd basis_values(const PolyBasis& basis, int order, double x) {
    if (order < 0) throw InvalidArgument("basis order must be >= 0");
    x = std::clamp(x, 0.0, 1.0);

    Eigen::VectorXd values(order + 1);
    if (basis.family == BasisFamily::Bernstein) {
        const Eigen::MatrixXd coeffs = bernstein_monomial_coeffs(order);
        Eigen::VectorXd powers(order + 1);
        powers[0] = 1.0;
        for (int j = 1; j <= order; ++j) powers[j] = powers[j - 1] * x;
        values = coeffs * powers;
        return values;
    }

    const double t = uses_shifted_argument(basis.family) ? 2.0 * x - 1.0 : x;
    values[0] = 1.0;
    if (order == 0) return values;
    for (int k = 1; k <= order; ++k) {
        const RecurrenceStep step = recurrence_step(basis, k);
        double value = step.mul_t * t * values[k - 1] + step.mul_prev * values[k - 1];
        if (k >= 2) value += step.mul_prev2 * values[k - 2];
        values[k] = value;
    }
    return values;
}

}  // namespace polycf
