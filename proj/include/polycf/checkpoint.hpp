#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "polycf/evaluation.hpp"
#include "polycf/filter.hpp"
#include "polycf/training.hpp"

namespace polycf {

/// Serializable model state. The projector itself lives in the binary SVD
/// cache; the checkpoint carries the (cutoff, seed) pair needed to rebuild
/// or look it up.
struct Checkpoint {
    int version = 1;
    PolynomialKernel kernel;
    double omega = 0.0;
    std::int64_t svd_cutoff = 0;
    std::uint64_t svd_seed = 0;
    std::string dataset_hash;
};

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::string& path);

/// CSV `epoch,loss_graph,loss_bpr,loss_total,val_recall20,val_ndcg20`;
/// validation columns stay empty when no split was configured.
void write_loss_log(std::ostream& out, const std::vector<EpochLog>& log);
void save_loss_log(const std::string& path, const std::vector<EpochLog>& log);

/// JSON `{dataset, k, recall, ndcg, users_evaluated, config_hash}`.
std::string metrics_json(const std::string& dataset, const EvalResult& result,
                         const std::string& config_hash);
void save_metrics(const std::string& path, const std::string& dataset, const EvalResult& result,
                  const std::string& config_hash);

/// FNV-1a 64-bit content hash, hex-encoded.
std::string content_hash_bytes(const void* data, std::size_t size);
std::string content_hash_file(const std::string& path);
std::string content_hash_strings(const std::vector<std::string>& parts);

}  // namespace polycf
