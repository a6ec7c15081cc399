#include "polycf/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "polycf/errors.hpp"

namespace polycf {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr int kCheckpointVersion = 1;

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint) {
    checkpoint.kernel.validate();
    ordered_json doc;
    doc["version"] = kCheckpointVersion;
    doc["basis"] = basis_family_name(checkpoint.kernel.basis.family);
    doc["jacobi_a"] = checkpoint.kernel.basis.jacobi_a;
    doc["jacobi_b"] = checkpoint.kernel.basis.jacobi_b;
    doc["K"] = checkpoint.kernel.order;
    doc["gammas"] = checkpoint.kernel.gammas;
    std::vector<std::vector<double>> theta;
    for (std::int64_t g = 0; g < checkpoint.kernel.theta.rows(); ++g) {
        std::vector<double> row(checkpoint.kernel.theta.cols());
        for (std::int64_t k = 0; k < checkpoint.kernel.theta.cols(); ++k) {
            row[k] = checkpoint.kernel.theta(g, k);
        }
        theta.push_back(std::move(row));
    }
    doc["theta"] = theta;
    doc["omega"] = checkpoint.omega;
    doc["svd_cutoff"] = checkpoint.svd_cutoff;
    doc["svd_seed"] = checkpoint.svd_seed;
    doc["dataset_hash"] = checkpoint.dataset_hash;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << doc.dump(2) << '\n';
    if (!out) throw IoError("failed writing " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    ordered_json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw ParseError(path + ": invalid checkpoint json: " + e.what());
    }

    Checkpoint checkpoint;
    try {
        checkpoint.version = doc.at("version").get<int>();
        if (checkpoint.version != kCheckpointVersion) {
            throw ParseError(path + ": unsupported checkpoint version " +
                             std::to_string(checkpoint.version));
        }
        checkpoint.kernel.basis.family = parse_basis_family(doc.at("basis").get<std::string>());
        checkpoint.kernel.basis.jacobi_a = doc.value("jacobi_a", 1.0);
        checkpoint.kernel.basis.jacobi_b = doc.value("jacobi_b", 1.0);
        checkpoint.kernel.order = doc.at("K").get<int>();
        checkpoint.kernel.gammas = doc.at("gammas").get<std::vector<double>>();
        const auto theta = doc.at("theta").get<std::vector<std::vector<double>>>();
        if (theta.size() != checkpoint.kernel.gammas.size()) {
            throw ParseError(path + ": theta row count does not match gammas");
        }
        checkpoint.kernel.theta.resize(static_cast<std::int64_t>(theta.size()),
                                       checkpoint.kernel.order + 1);
        for (std::size_t g = 0; g < theta.size(); ++g) {
            if (static_cast<int>(theta[g].size()) != checkpoint.kernel.order + 1) {
                throw ParseError(path + ": theta column count does not match K+1");
            }
            for (int k = 0; k <= checkpoint.kernel.order; ++k) {
                checkpoint.kernel.theta(static_cast<std::int64_t>(g), k) = theta[g][k];
            }
        }
        checkpoint.omega = doc.at("omega").get<double>();
        checkpoint.svd_cutoff = doc.at("svd_cutoff").get<std::int64_t>();
        checkpoint.svd_seed = doc.at("svd_seed").get<std::uint64_t>();
        checkpoint.dataset_hash = doc.at("dataset_hash").get<std::string>();
    } catch (const ordered_json::exception& e) {
        throw ParseError(path + ": malformed checkpoint: " + e.what());
    }
    checkpoint.kernel.validate();
    return checkpoint;
}

void write_loss_log(std::ostream& out, const std::vector<EpochLog>& log) {
    out << "epoch,loss_graph,loss_bpr,loss_total,val_recall20,val_ndcg20\n";
    out.precision(17);
    for (const EpochLog& entry : log) {
        out << entry.epoch << ',' << entry.loss_graph << ',' << entry.loss_bpr << ','
            << entry.loss_total << ',';
        if (entry.val_recall.has_value()) out << *entry.val_recall;
        out << ',';
        if (entry.val_ndcg.has_value()) out << *entry.val_ndcg;
        out << '\n';
    }
}

void save_loss_log(const std::string& path, const std::vector<EpochLog>& log) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    write_loss_log(out, log);
    if (!out) throw IoError("failed writing " + path);
}

std::string metrics_json(const std::string& dataset, const EvalResult& result,
                         const std::string& config_hash) {
    ordered_json doc;
    doc["dataset"] = dataset;
    doc["k"] = result.k;
    doc["recall"] = result.recall;
    doc["ndcg"] = result.ndcg;
    doc["users_evaluated"] = result.users_evaluated;
    doc["config_hash"] = config_hash;
    return doc.dump(2) + "\n";
}

void save_metrics(const std::string& path, const std::string& dataset, const EvalResult& result,
                  const std::string& config_hash) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << metrics_json(dataset, result, config_hash);
    if (!out) throw IoError("failed writing " + path);
}

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

std::uint64_t fnv1a(std::uint64_t state, const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        state ^= bytes[i];
        state *= kFnvPrime;
    }
    return state;
}

std::string to_hex(std::uint64_t value) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[value & 0xf];
        value >>= 4;
    }
    return out;
}

}  // namespace

std::string content_hash_bytes(const void* data, std::size_t size) {
    return to_hex(fnv1a(kFnvOffset, data, size));
}

std::string content_hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path + " for hashing");
    std::uint64_t state = kFnvOffset;
    char buffer[1 << 16];
    while (in) {
        in.read(buffer, sizeof(buffer));
        state = fnv1a(state, buffer, static_cast<std::size_t>(in.gcount()));
    }
    return to_hex(state);
}

std::string content_hash_strings(const std::vector<std::string>& parts) {
    std::uint64_t state = kFnvOffset;
    for (const std::string& part : parts) {
        state = fnv1a(state, part.data(), part.size());
        const char sep = '\0';
        state = fnv1a(state, &sep, 1);
    }
    return to_hex(state);
}

}  // namespace polycf
