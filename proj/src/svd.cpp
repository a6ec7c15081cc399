#include "polycf/svd.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "polycf/errors.hpp"
#include "polycf/gram.hpp"
#include "polycf/rng.hpp"

namespace polycf {

LowPassProjector::LowPassProjector(Eigen::MatrixXd basis, Eigen::VectorXd singular_values)
    : basis_(std::move(basis)), singular_values_(std::move(singular_values)) {
    if (basis_.cols() != singular_values_.size()) {
        throw DimensionError("projector basis columns and singular values disagree");
    }
}

Eigen::VectorXd LowPassProjector::apply(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (x.size() != basis_.rows()) {
        throw DimensionError("low-pass projector expects a length-" +
                             std::to_string(basis_.rows()) + " signal, got " +
                             std::to_string(x.size()));
    }
    if (basis_.cols() == 0) return Eigen::VectorXd::Zero(x.size());
    return basis_ * (basis_.transpose() * x);
}

namespace {

Eigen::MatrixXd dense_normalized(const InteractionMatrix& R) {
    const std::int64_t m = R.num_users();
    const std::int64_t n = R.num_items();
    Eigen::MatrixXd tilde = Eigen::MatrixXd::Zero(m, n);
    for (std::int64_t u = 0; u < m; ++u) {
        const double du = static_cast<double>(R.user_degree(u));
        if (du == 0.0) continue;
        const double su = 1.0 / std::sqrt(du);
        for (const std::int32_t i : R.items_of(u)) {
            const double di = static_cast<double>(R.item_degree(i));
            tilde(u, i) = su / std::sqrt(di);
        }
    }
    return tilde;
}

LowPassProjector dense_truncated_svd(const InteractionMatrix& R, std::int64_t s) {
    const Eigen::MatrixXd tilde = dense_normalized(R);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(tilde, Eigen::ComputeThinV);
    Eigen::MatrixXd basis = svd.matrixV().leftCols(s);
    Eigen::VectorXd sigma = svd.singularValues().head(s);
    return LowPassProjector(std::move(basis), std::move(sigma));
}

Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& block) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(block);
    Eigen::MatrixXd q = Eigen::MatrixXd::Identity(block.rows(), block.cols());
    q = qr.householderQ() * q;
    return q;
}

LowPassProjector randomized_truncated_svd(const InteractionMatrix& R, std::int64_t s,
                                          std::uint64_t seed, const SvdOptions& options) {
    const std::int64_t n = R.num_items();
    const std::int64_t block = std::min<std::int64_t>(n, s + options.oversample);
    const GramOperator gram(R, 0.5);

    Rng rng(Rng::mix(seed, 0x53564400ULL));
    Eigen::MatrixXd q(n, block);
    for (std::int64_t c = 0; c < block; ++c) {
        for (std::int64_t r = 0; r < n; ++r) q(r, c) = rng.normal();
    }
    q = orthonormalize(q);

    Eigen::VectorXd prev_sigma;
    Eigen::VectorXd workspace_m;
    Eigen::MatrixXd z(n, block);

    for (int iter = 1; iter <= options.power_iters; ++iter) {
        for (std::int64_t c = 0; c < block; ++c) {
            Eigen::VectorXd col;
            gram.apply_into(q.col(c), workspace_m, col);
            z.col(c) = col;
        }
        Eigen::MatrixXd ritz = q.transpose() * z;
        ritz = 0.5 * (ritz + ritz.transpose());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(ritz);
        if (eig.info() != Eigen::Success) {
            throw ConvergenceError("ritz eigendecomposition failed in subspace iteration");
        }
        // ascending eigenvalues; read from the top
        Eigen::VectorXd sigma(s);
        for (std::int64_t i = 0; i < s; ++i) {
            sigma[i] = std::sqrt(std::max(eig.eigenvalues()[block - 1 - i], 0.0));
        }

        bool converged = false;
        if (prev_sigma.size() == s) {
            double change = 0.0;
            for (std::int64_t i = 0; i < s; ++i) {
                change = std::max(change, std::abs(sigma[i] - prev_sigma[i]) /
                                              std::max(sigma[i], 1e-12));
            }
            converged = change < options.tol;
        }
        if (converged) {
            Eigen::MatrixXd basis(n, s);
            for (std::int64_t i = 0; i < s; ++i) {
                basis.col(i) = q * eig.eigenvectors().col(block - 1 - i);
            }
            return LowPassProjector(std::move(basis), std::move(sigma));
        }
        prev_sigma = sigma;
        q = orthonormalize(z);
    }

    // Iteration cap hit: report the Ritz residual norms for the leading pairs.
    std::ostringstream msg;
    msg << "truncated svd did not converge within " << options.power_iters
        << " power iterations (tol " << options.tol << "); residual norms:";
    for (std::int64_t c = 0; c < block; ++c) {
        Eigen::VectorXd col;
        gram.apply_into(q.col(c), workspace_m, col);
        z.col(c) = col;
    }
    Eigen::MatrixXd ritz = q.transpose() * z;
    ritz = 0.5 * (ritz + ritz.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(ritz);
    for (std::int64_t i = 0; i < s; ++i) {
        const double lambda = eig.eigenvalues()[block - 1 - i];
        const Eigen::VectorXd v = q * eig.eigenvectors().col(block - 1 - i);
        Eigen::VectorXd gv;
        gram.apply_into(v, workspace_m, gv);
        msg << ' ' << (gv - lambda * v).norm();
    }
    throw ConvergenceError(msg.str());
}

void write_u32_le(std::ostream& out, std::uint32_t value) {
    unsigned char bytes[4];
    for (int i = 0; i < 4; ++i) bytes[i] = static_cast<unsigned char>((value >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(bytes), 4);
}

void write_u64_le(std::ostream& out, std::uint64_t value) {
    unsigned char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>((value >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(bytes), 8);
}

void write_f64_le(std::ostream& out, double value) {
    write_u64_le(out, std::bit_cast<std::uint64_t>(value));
}

std::uint32_t read_u32_le(std::istream& in) {
    unsigned char bytes[4];
    in.read(reinterpret_cast<char*>(bytes), 4);
    std::uint32_t value = 0;
    for (int i = 0; i < 4; ++i) value |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
    return value;
}

std::uint64_t read_u64_le(std::istream& in) {
    unsigned char bytes[8];
    in.read(reinterpret_cast<char*>(bytes), 8);
    std::uint64_t value = 0;
    for (int i = 0; i < 8; ++i) value |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    return value;
}

double read_f64_le(std::istream& in) { return std::bit_cast<double>(read_u64_le(in)); }

constexpr char kMagic[11] = {'P', 'O', 'L', 'Y', 'C', 'F', '-', 'S', 'V', 'D', '\0'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

LowPassProjector truncated_svd(const InteractionMatrix& R, std::int64_t s, std::uint64_t seed,
                               const SvdOptions& options) {
    const std::int64_t min_dim = std::min(R.num_users(), R.num_items());
    if (s < 0 || s > min_dim) {
        throw InvalidArgument("svd cutoff s = " + std::to_string(s) +
                              " must lie in [0, min(m,n) = " + std::to_string(min_dim) + "]");
    }
    if (s == 0) {
        return LowPassProjector(Eigen::MatrixXd::Zero(R.num_items(), 0), Eigen::VectorXd(0));
    }
    LowPassProjector projector = min_dim <= options.dense_threshold
                                     ? dense_truncated_svd(R, s)
                                     : randomized_truncated_svd(R, s, seed, options);

    const Eigen::MatrixXd gram_v = projector.basis().transpose() * projector.basis();
    const double ortho_err =
        (gram_v - Eigen::MatrixXd::Identity(s, s)).cwiseAbs().maxCoeff();
    if (ortho_err > 1e-8) {
        throw ConvergenceError("projector basis failed orthonormality check: " +
                               std::to_string(ortho_err));
    }
    return projector;
}

void save_projector(const std::string& path, const LowPassProjector& projector) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out.write(kMagic, sizeof(kMagic));
    write_u32_le(out, kVersion);
    write_u64_le(out, static_cast<std::uint64_t>(projector.num_items()));
    write_u64_le(out, static_cast<std::uint64_t>(projector.cutoff()));
    for (std::int64_t i = 0; i < projector.cutoff(); ++i) {
        write_f64_le(out, projector.singular_values()[i]);
    }
    const Eigen::MatrixXd& basis = projector.basis();
    for (std::int64_t c = 0; c < basis.cols(); ++c) {
        for (std::int64_t r = 0; r < basis.rows(); ++r) write_f64_le(out, basis(r, c));
    }
    if (!out) throw IoError("failed writing " + path);
}

LowPassProjector load_projector(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    char magic[sizeof(kMagic)];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw IoError(path + " is not a projector cache file");
    }
    const std::uint32_t version = read_u32_le(in);
    if (version != kVersion) {
        throw IoError(path + ": unsupported projector cache version " + std::to_string(version));
    }
    const std::uint64_t n = read_u64_le(in);
    const std::uint64_t s = read_u64_le(in);
    Eigen::VectorXd sigma(static_cast<std::int64_t>(s));
    for (std::uint64_t i = 0; i < s; ++i) sigma[static_cast<std::int64_t>(i)] = read_f64_le(in);
    Eigen::MatrixXd basis(static_cast<std::int64_t>(n), static_cast<std::int64_t>(s));
    for (std::uint64_t c = 0; c < s; ++c) {
        for (std::uint64_t r = 0; r < n; ++r) {
            basis(static_cast<std::int64_t>(r), static_cast<std::int64_t>(c)) = read_f64_le(in);
        }
    }
    if (!in) throw IoError(path + ": truncated projector cache");
    return LowPassProjector(std::move(basis), std::move(sigma));
}

}  // namespace polycf
