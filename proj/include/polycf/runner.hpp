#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "polycf/diagnostics.hpp"
#include "polycf/evaluation.hpp"
#include "polycf/training.hpp"

namespace polycf {

/// Flat run configuration shared by the CLI and the reproducibility tests.
/// Every field maps one-to-one onto a config-file key and a CLI flag of the
/// same name.
struct RunConfig {
    std::string data_dir;        // directory holding train.txt / test.txt
    std::string dataset;         // identifier; defaults to the data_dir basename
    std::string output_dir = "runs/latest";
    std::string checkpoint;      // input checkpoint (eval/recommend/diagnose)

    std::string basis = "chebyshev";
    double jacobi_a = 1.0;
    double jacobi_b = 1.0;
    int K = 5;
    std::string gammas = "0.3,0.4,0.5,0.6";
    std::int64_t s = 64;
    double omega = 0.2;

    int epochs = 50;
    double lr = 1e-3;
    int batch_users = 1024;
    double noise_eps = 0.1;
    double dropout = 0.2;
    int negatives = 1;
    double val_fraction = 0.0;
    std::uint64_t seed = 42;
    std::uint64_t svd_seed = 7;
    int svd_power_iters = 8;
    int svd_oversample = 16;
    int svd_dense_threshold = 256;
    std::string svd_cache_dir;   // defaults to <output_dir>/svd
    int k = 20;
    int threads = 0;
    bool fast = false;           // relaxes the fixed reduction order

    std::vector<double> parsed_gammas() const;
    PolyBasis parsed_basis() const;
    TrainConfig train_config() const;

    /// Sorted key=value lines, loadable back through --config.
    std::string resolved_text() const;
    std::string config_hash() const;
};

struct TrainRunResult {
    std::string checkpoint_path;
    std::string loss_log_path;
    std::string resolved_config_path;
    TrainResult result;
};

/// Loads the dataset, builds or reuses the SVD cache, trains, and writes
/// checkpoint + loss log + resolved config under output_dir.
TrainRunResult run_train(const RunConfig& config);

struct EvalRunResult {
    std::string metrics_path;
    EvalResult result;
    bool dataset_hash_mismatch = false;  // transfer mode, warned not fatal
};

EvalRunResult run_eval(const RunConfig& config);

struct Recommendation {
    std::int32_t item = 0;
    double score = 0.0;
};

std::vector<Recommendation> run_recommend(const RunConfig& config, std::int64_t user,
                                          int top_k);

/// Builds (or loads from cache) the projector for the dataset addressed by
/// `config`, keyed by (dataset content hash, s, seed).
LowPassProjector obtain_projector(const RunConfig& config, const Dataset& dataset,
                                  const std::string& dataset_hash, std::int64_t s,
                                  std::uint64_t seed);

Dataset load_configured_dataset(const RunConfig& config);
std::string dataset_content_hash(const RunConfig& config);

}  // namespace polycf
