#include "polycf/runner.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "polycf/checkpoint.hpp"
#include "polycf/errors.hpp"

namespace polycf {

namespace fs = std::filesystem;

std::vector<double> RunConfig::parsed_gammas() const {
    std::vector<double> values;
    std::stringstream stream(gammas);
    std::string token;
    while (std::getline(stream, token, ',')) {
        if (token.empty()) continue;
        try {
            values.push_back(std::stod(token));
        } catch (const std::exception&) {
            throw InvalidArgument("bad gamma value '" + token + "' in '" + gammas + "'");
        }
    }
    if (values.empty()) throw InvalidArgument("gammas must contain at least one value");
    return values;
}

PolyBasis RunConfig::parsed_basis() const {
    PolyBasis parsed;
    parsed.family = parse_basis_family(basis);
    parsed.jacobi_a = jacobi_a;
    parsed.jacobi_b = jacobi_b;
    return parsed;
}

TrainConfig RunConfig::train_config() const {
    TrainConfig tc;
    tc.learning_rate = lr;
    tc.epochs = epochs;
    tc.batch_users = batch_users;
    tc.noise_eps = noise_eps;
    tc.kernel_dropout = dropout;
    tc.negatives_per_positive = negatives;
    tc.rng_seed = seed;
    tc.val_fraction = val_fraction;
    tc.threads = threads;
    tc.determinism = !fast;
    return tc;
}

std::string RunConfig::resolved_text() const {
    std::ostringstream out;
    out.precision(17);
    out << "K=" << K << '\n';
    out << "basis=" << basis << '\n';
    out << "batch_users=" << batch_users << '\n';
    out << "checkpoint=" << checkpoint << '\n';
    out << "data_dir=" << data_dir << '\n';
    out << "dataset=" << dataset << '\n';
    out << "dropout=" << dropout << '\n';
    out << "epochs=" << epochs << '\n';
    out << "fast=" << (fast ? "true" : "false") << '\n';
    out << "gammas=" << gammas << '\n';
    out << "jacobi_a=" << jacobi_a << '\n';
    out << "jacobi_b=" << jacobi_b << '\n';
    out << "k=" << k << '\n';
    out << "lr=" << lr << '\n';
    out << "negatives=" << negatives << '\n';
    out << "noise_eps=" << noise_eps << '\n';
    out << "omega=" << omega << '\n';
    out << "output_dir=" << output_dir << '\n';
    out << "s=" << s << '\n';
    out << "seed=" << seed << '\n';
    out << "svd_cache_dir=" << svd_cache_dir << '\n';
    out << "svd_dense_threshold=" << svd_dense_threshold << '\n';
    out << "svd_oversample=" << svd_oversample << '\n';
    out << "svd_power_iters=" << svd_power_iters << '\n';
    out << "svd_seed=" << svd_seed << '\n';
    out << "threads=" << threads << '\n';
    out << "val_fraction=" << val_fraction << '\n';
    return out.str();
}

std::string RunConfig::config_hash() const {
    const std::string text = resolved_text();
    return content_hash_bytes(text.data(), text.size());
}

Dataset load_configured_dataset(const RunConfig& config) {
    if (config.data_dir.empty()) throw InvalidArgument("data_dir is required");
    const fs::path dir(config.data_dir);
    const std::string name =
        config.dataset.empty() ? dir.filename().string() : config.dataset;
    return load_dataset((dir / "train.txt").string(), (dir / "test.txt").string(), name);
}

std::string dataset_content_hash(const RunConfig& config) {
    const fs::path dir(config.data_dir);
    return content_hash_strings({content_hash_file((dir / "train.txt").string()),
                                 content_hash_file((dir / "test.txt").string())});
}

LowPassProjector obtain_projector(const RunConfig& config, const Dataset& dataset,
                                  const std::string& dataset_hash, std::int64_t s,
                                  std::uint64_t seed) {
    const fs::path cache_dir = config.svd_cache_dir.empty()
                                   ? fs::path(config.output_dir) / "svd"
                                   : fs::path(config.svd_cache_dir);
    fs::create_directories(cache_dir);
    const fs::path cache_path =
        cache_dir / ("svd_" + dataset_hash + "_s" + std::to_string(s) + "_seed" +
                     std::to_string(seed) + ".bin");

    if (fs::exists(cache_path)) {
        LowPassProjector cached = load_projector(cache_path.string());
        if (cached.num_items() == dataset.train.num_items() && cached.cutoff() == s) {
            return cached;
        }
        // stale entry under a colliding key; rebuild below
    }

    SvdOptions options;
    options.power_iters = config.svd_power_iters;
    options.oversample = config.svd_oversample;
    options.dense_threshold = config.svd_dense_threshold;
    LowPassProjector projector = truncated_svd(dataset.train, s, seed, options);
    save_projector(cache_path.string(), projector);
    return projector;
}

TrainRunResult run_train(const RunConfig& config) {
    const Dataset dataset = load_configured_dataset(config);
    const std::string dhash = dataset_content_hash(config);

    fs::create_directories(config.output_dir);

    CompositeFilter filter;
    filter.kernel = PolynomialKernel::initialized(config.parsed_basis(), config.K,
                                                  config.parsed_gammas(), config.seed);
    filter.omega = config.omega;
    if (config.omega > 0.0 && config.s > 0) {
        filter.low_pass = obtain_projector(config, dataset, dhash, config.s, config.svd_seed);
    } else {
        filter.omega = 0.0;
    }

    TrainRunResult run;
    run.result = train(dataset, config.train_config(), std::move(filter));

    Checkpoint checkpoint;
    checkpoint.kernel = run.result.filter.kernel;
    checkpoint.omega = run.result.filter.omega;
    checkpoint.svd_cutoff = config.s;
    checkpoint.svd_seed = config.svd_seed;
    checkpoint.dataset_hash = dhash;

    const fs::path out_dir(config.output_dir);
    run.checkpoint_path = (out_dir / "checkpoint.json").string();
    save_checkpoint(run.checkpoint_path, checkpoint);
    run.loss_log_path = (out_dir / "loss_log.csv").string();
    save_loss_log(run.loss_log_path, run.result.log);
    run.resolved_config_path = (out_dir / "resolved_config").string();
    {
        std::ofstream out(run.resolved_config_path, std::ios::binary);
        if (!out) throw IoError("cannot write " + run.resolved_config_path);
        out << "# input_hash=" << dhash << '\n' << config.resolved_text();
    }
    return run;
}

namespace {

CompositeFilter filter_from_checkpoint(const RunConfig& config, const Checkpoint& checkpoint,
                                       const Dataset& dataset, const std::string& dhash) {
    CompositeFilter filter;
    filter.kernel = checkpoint.kernel;
    filter.omega = checkpoint.omega;
    if (checkpoint.omega > 0.0 && checkpoint.svd_cutoff > 0) {
        filter.low_pass = obtain_projector(config, dataset, dhash, checkpoint.svd_cutoff,
                                           checkpoint.svd_seed);
    }
    return filter;
}

}  // namespace

EvalRunResult run_eval(const RunConfig& config) {
    if (config.checkpoint.empty()) throw InvalidArgument("checkpoint path is required");
    const Checkpoint checkpoint = load_checkpoint(config.checkpoint);
    const Dataset dataset = load_configured_dataset(config);
    const std::string dhash = dataset_content_hash(config);

    EvalRunResult run;
    run.dataset_hash_mismatch = checkpoint.dataset_hash != dhash;

    const CompositeFilter filter = filter_from_checkpoint(config, checkpoint, dataset, dhash);
    run.result = evaluate(filter, dataset, config.k, config.threads);

    fs::create_directories(config.output_dir);
    run.metrics_path = (fs::path(config.output_dir) / "metrics.json").string();
    save_metrics(run.metrics_path, dataset.name, run.result, config.config_hash());
    return run;
}

std::vector<Recommendation> run_recommend(const RunConfig& config, std::int64_t user,
                                          int top_k) {
    if (config.checkpoint.empty()) throw InvalidArgument("checkpoint path is required");
    if (top_k < 0) throw InvalidArgument("k must be >= 0");
    const Checkpoint checkpoint = load_checkpoint(config.checkpoint);
    const Dataset dataset = load_configured_dataset(config);
    if (user < 0 || user >= dataset.train.num_users()) {
        throw InvalidArgument("unknown user " + std::to_string(user));
    }
    const std::string dhash = dataset_content_hash(config);
    const CompositeFilter filter = filter_from_checkpoint(config, checkpoint, dataset, dhash);

    FilterEngine engine(filter, dataset.train);
    const Eigen::VectorXd scores = score_user(engine, filter.kernel.theta, user);
    const auto ranked = top_k_items(scores, top_k);
    std::vector<Recommendation> out;
    out.reserve(ranked.size());
    for (const std::int32_t item : ranked) out.push_back({item, scores[item]});
    return out;
}

}  // namespace polycf
