#include "polycf/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <utility>

#include "parallel.hpp"
#include "polycf/errors.hpp"
#include "polycf/evaluation.hpp"

namespace polycf {

void TrainConfig::validate() const {
    if (learning_rate <= 0.0) throw InvalidArgument("learning_rate must be > 0");
    if (epochs < 0) throw InvalidArgument("epochs must be >= 0");
    if (batch_users < 1) throw InvalidArgument("batch_users must be >= 1");
    if (noise_eps < 0.0) throw InvalidArgument("noise_eps must be >= 0");
    if (kernel_dropout < 0.0 || kernel_dropout >= 1.0) {
        throw InvalidArgument("kernel_dropout must lie in [0, 1)");
    }
    if (negatives_per_positive < 1) throw InvalidArgument("negatives_per_positive must be >= 1");
    if (val_fraction < 0.0 || val_fraction >= 1.0) {
        throw InvalidArgument("val_fraction must lie in [0, 1)");
    }
}

namespace {

Eigen::VectorXd binary_row(const InteractionMatrix& R, std::int64_t user) {
    Eigen::VectorXd row = Eigen::VectorXd::Zero(R.num_items());
    for (const std::int32_t i : R.items_of(user)) row[i] = 1.0;
    return row;
}

// -ln sigma(d), numerically stable on both tails.
double softplus_neg(double d) {
    if (d >= 0.0) return std::log1p(std::exp(-d));
    return -d + std::log1p(std::exp(d));
}

std::vector<std::int32_t> eligible_users(const InteractionMatrix& R,
                                         std::int64_t* skipped_full) {
    std::vector<std::int32_t> pool;
    pool.reserve(R.num_users());
    std::int64_t full = 0;
    for (std::int64_t u = 0; u < R.num_users(); ++u) {
        const std::int64_t degree = R.user_degree(u);
        if (degree == 0) continue;
        if (degree >= R.num_items()) {
            ++full;  // no negative item exists for this user
            continue;
        }
        pool.push_back(static_cast<std::int32_t>(u));
    }
    if (skipped_full != nullptr) *skipped_full = full;
    return pool;
}

}  // namespace

SampledBatch sample_triples(const InteractionMatrix& R, int batch_users, int negatives,
                            Rng& rng) {
    if (batch_users < 1) throw InvalidArgument("batch_users must be >= 1");
    if (negatives < 1) throw InvalidArgument("negatives must be >= 1");

    SampledBatch batch;
    std::vector<std::int32_t> pool = eligible_users(R, &batch.skipped_full_users);
    if (pool.empty()) return batch;

    const std::int64_t take = std::min<std::int64_t>(batch_users, pool.size());
    // partial Fisher-Yates: distinct users within the batch
    for (std::int64_t i = 0; i < take; ++i) {
        const std::int64_t j = i + rng.uniform_int(static_cast<std::int64_t>(pool.size()) - i);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(take);

    batch.users = pool;
    batch.triples.reserve(take * negatives);
    const std::int64_t n = R.num_items();
    for (const std::int32_t u : pool) {
        const auto items = R.items_of(u);
        const std::int32_t pos = items[rng.uniform_int(static_cast<std::int64_t>(items.size()))];
        for (int neg = 0; neg < negatives; ++neg) {
            std::int32_t j;
            do {
                j = static_cast<std::int32_t>(rng.uniform_int(n));
            } while (R.has(u, j));
            batch.triples.push_back({u, pos, j});
        }
    }
    return batch;
}

Objective graph_objective_fixed(const FilterEngine& engine,
                                const Eigen::Ref<const Eigen::MatrixXd>& theta,
                                std::int64_t user,
                                const Eigen::Ref<const Eigen::VectorXd>& noise) {
    const InteractionMatrix& R = engine.interactions();
    if (user < 0 || user >= R.num_users()) {
        throw InvalidArgument("user index " + std::to_string(user) + " out of range");
    }
    if (noise.size() != R.num_items()) {
        throw DimensionError("noise vector length mismatch");
    }
    const Eigen::VectorXd row = binary_row(R, user);
    const Eigen::VectorXd noised = row + noise;

    const BasisSignals signals = engine.basis_signals(noised);
    const Eigen::VectorXd filtered = engine.apply_from_signals(theta, signals, noised);
    const Eigen::VectorXd residual = filtered - row;
    // (I - G^(1/2)) residual; the quadratic form is PSD because the
    // symmetric Gram spectrum lies in [0, 1].
    const Eigen::VectorXd weighted = residual - engine.gram_half().apply(residual);

    Objective objective;
    objective.loss = residual.dot(weighted);
    const double scale = 2.0 / static_cast<double>(engine.gamma_count());
    objective.grad.resize(engine.gamma_count(), engine.order() + 1);
    for (std::int64_t g = 0; g < engine.gamma_count(); ++g) {
        objective.grad.row(g) =
            scale * (signals.per_gamma[static_cast<std::size_t>(g)].transpose() * weighted);
    }
    return objective;
}

Objective graph_objective(const FilterEngine& engine,
                          const Eigen::Ref<const Eigen::MatrixXd>& theta, std::int64_t user,
                          double noise_eps, Rng& rng) {
    if (noise_eps < 0.0) throw InvalidArgument("noise_eps must be >= 0");
    Eigen::VectorXd noise = Eigen::VectorXd::Zero(engine.num_items());
    if (noise_eps > 0.0) {
        const double stddev = std::sqrt(noise_eps);
        for (std::int64_t i = 0; i < noise.size(); ++i) noise[i] = stddev * rng.normal();
    }
    return graph_objective_fixed(engine, theta, user, noise);
}

namespace {

// BPR terms of one user's triples against precomputed clean signals.
struct BprUserTerms {
    double loss_sum = 0.0;
    GradientTable grad;  // sum over the user's triples
};

BprUserTerms bpr_user_terms(const FilterEngine& engine,
                            const Eigen::Ref<const Eigen::MatrixXd>& theta, std::int32_t user,
                            const Triple* triples, std::int64_t count) {
    const Eigen::VectorXd row = binary_row(engine.interactions(), user);
    const BasisSignals signals = engine.basis_signals(row);
    const Eigen::VectorXd scores = engine.apply_from_signals(theta, signals, row);

    BprUserTerms terms;
    terms.grad = GradientTable::Zero(engine.gamma_count(), engine.order() + 1);
    const double inv_gamma_count = 1.0 / static_cast<double>(engine.gamma_count());
    for (std::int64_t t = 0; t < count; ++t) {
        const Triple& triple = triples[t];
        const double margin = scores[triple.pos] - scores[triple.neg];
        terms.loss_sum += softplus_neg(margin);
        const double coeff = -1.0 / (1.0 + std::exp(margin));  // -sigma(-margin)
        for (std::int64_t g = 0; g < engine.gamma_count(); ++g) {
            const Eigen::MatrixXd& table = signals.per_gamma[static_cast<std::size_t>(g)];
            terms.grad.row(g) +=
                coeff * inv_gamma_count *
                (table.row(triple.pos) - table.row(triple.neg));
        }
    }
    return terms;
}

}  // namespace

Objective bpr_loss(const FilterEngine& engine, const Eigen::Ref<const Eigen::MatrixXd>& theta,
                   const TripleBatch& batch) {
    if (batch.empty()) throw InvalidArgument("bpr batch must be nonempty");
    // group by user in first-appearance order; signals computed once per user
    std::vector<std::int32_t> order;
    std::vector<std::vector<Triple>> grouped;
    {
        std::vector<std::int64_t> slot_of_user(engine.interactions().num_users(), -1);
        for (const Triple& triple : batch) {
            if (slot_of_user[triple.user] < 0) {
                slot_of_user[triple.user] = static_cast<std::int64_t>(order.size());
                order.push_back(triple.user);
                grouped.emplace_back();
            }
            grouped[slot_of_user[triple.user]].push_back(triple);
        }
    }
    Objective objective;
    objective.grad = GradientTable::Zero(engine.gamma_count(), engine.order() + 1);
    for (std::size_t s = 0; s < order.size(); ++s) {
        const BprUserTerms terms = bpr_user_terms(
            engine, theta, order[s], grouped[s].data(), static_cast<std::int64_t>(grouped[s].size()));
        objective.loss += terms.loss_sum;
        objective.grad += terms.grad;
    }
    return objective;
}

Eigen::MatrixXd dropout_mask(std::int64_t rows, std::int64_t cols, double rate, Rng& rng) {
    if (rate < 0.0 || rate >= 1.0) throw InvalidArgument("dropout rate must lie in [0, 1)");
    Eigen::MatrixXd mask = Eigen::MatrixXd::Constant(rows, cols, 1.0);
    if (rate == 0.0) return mask;
    const double keep_scale = 1.0 / (1.0 - rate);
    for (std::int64_t r = 0; r < rows; ++r) {
        for (std::int64_t c = 0; c < cols; ++c) {
            mask(r, c) = rng.bernoulli(rate) ? 0.0 : keep_scale;
        }
    }
    return mask;
}

Eigen::MatrixXd apply_kernel_dropout(const Eigen::Ref<const Eigen::MatrixXd>& theta, double rate,
                                     Rng& rng) {
    return theta.cwiseProduct(dropout_mask(theta.rows(), theta.cols(), rate, rng));
}

namespace {

// Carves a per-user validation split out of the train matrix. Every user
// keeps at least one train item; validation items behave exactly like a
// test split over the reduced matrix.
Dataset split_validation(const InteractionMatrix& R, double fraction, std::uint64_t seed) {
    Rng rng(Rng::mix(seed, 0x76616cULL));
    std::vector<InteractionMatrix::Entry> train_entries;
    std::vector<std::vector<std::int32_t>> val(R.num_users());
    for (std::int64_t u = 0; u < R.num_users(); ++u) {
        const auto items = R.items_of(u);
        std::vector<std::int32_t> held;
        for (const std::int32_t i : items) {
            if (static_cast<std::int64_t>(held.size()) + 1 <
                    static_cast<std::int64_t>(items.size()) &&
                rng.bernoulli(fraction)) {
                held.push_back(i);
            } else {
                train_entries.emplace_back(static_cast<std::int32_t>(u), i);
            }
        }
        val[u] = std::move(held);
    }
    Dataset out;
    out.train = InteractionMatrix::from_entries(R.num_users(), R.num_items(),
                                                std::move(train_entries));
    out.test_items = std::move(val);
    out.name = "validation";
    return out;
}

std::string dump_theta(const Eigen::MatrixXd& theta) {
    std::ostringstream out;
    out.precision(17);
    out << theta;
    return out.str();
}

struct UserContribution {
    double loss_graph = 0.0;
    double loss_bpr = 0.0;
    std::int64_t triples = 0;
    GradientTable grad_graph;
    GradientTable grad_bpr;
};

}  // namespace

TrainResult train(const Dataset& dataset, const TrainConfig& config, CompositeFilter initial) {
    config.validate();
    initial.kernel.validate();
    if (initial.omega > 0.0 && !initial.low_pass.has_value()) {
        throw InvalidArgument("omega > 0 requires a built low-pass projector");
    }

    // Optional validation carve-out; training then runs on the reduced matrix.
    std::optional<Dataset> val_split;
    const InteractionMatrix* train_matrix = &dataset.train;
    if (config.val_fraction > 0.0) {
        val_split = split_validation(dataset.train, config.val_fraction, config.rng_seed);
        train_matrix = &val_split->train;
    }

    const FilterEngine engine(initial, *train_matrix);
    Eigen::MatrixXd theta = initial.kernel.theta;
    const std::int64_t gcount = engine.gamma_count();
    const std::int64_t kcount = engine.order() + 1;

    TrainResult result;
    result.log.reserve(config.epochs);

    const Rng root(config.rng_seed);
    std::int64_t pool_size = 0;
    {
        std::int64_t skipped = 0;
        pool_size = static_cast<std::int64_t>(eligible_users(*train_matrix, &skipped).size());
    }
    const std::int64_t batches_per_epoch =
        pool_size == 0 ? 0 : (pool_size + config.batch_users - 1) / config.batch_users;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const Rng epoch_rng = root.fork(static_cast<std::uint64_t>(epoch) + 1);
        double epoch_loss_graph = 0.0;
        double epoch_loss_bpr = 0.0;
        std::int64_t epoch_users = 0;
        std::int64_t epoch_triples = 0;

        for (std::int64_t b = 0; b < batches_per_epoch; ++b) {
            const Rng batch_rng = epoch_rng.fork(static_cast<std::uint64_t>(b));
            Rng sampling_rng = batch_rng.fork(1);
            const SampledBatch batch = sample_triples(*train_matrix, config.batch_users,
                                                      config.negatives_per_positive, sampling_rng);
            if (batch.users.empty()) continue;

            Rng dropout_rng = batch_rng.fork(2);
            const Eigen::MatrixXd mask =
                dropout_mask(gcount, kcount, config.kernel_dropout, dropout_rng);
            const Eigen::MatrixXd theta_eff = theta.cwiseProduct(mask);

            const Rng noise_base = batch_rng.fork(3);
            const std::int64_t user_count = static_cast<std::int64_t>(batch.users.size());

            // group the batch triples per user (they were emitted user-major)
            std::vector<std::pair<std::int64_t, std::int64_t>> spans(user_count);
            {
                std::int64_t cursor = 0;
                for (std::int64_t s = 0; s < user_count; ++s) {
                    const std::int64_t begin = cursor;
                    while (cursor < static_cast<std::int64_t>(batch.triples.size()) &&
                           batch.triples[cursor].user == batch.users[s]) {
                        ++cursor;
                    }
                    spans[s] = {begin, cursor};
                }
            }

            const auto user_work = [&](std::int64_t slot, UserContribution& out) {
                const std::int32_t u = batch.users[slot];
                Rng noise_rng = noise_base.fork(static_cast<std::uint64_t>(u));
                Eigen::VectorXd noise = Eigen::VectorXd::Zero(engine.num_items());
                if (config.noise_eps > 0.0) {
                    const double stddev = std::sqrt(config.noise_eps);
                    for (std::int64_t i = 0; i < noise.size(); ++i) {
                        noise[i] = stddev * noise_rng.normal();
                    }
                }
                const Objective graph = graph_objective_fixed(engine, theta_eff, u, noise);
                out.loss_graph = graph.loss;
                out.grad_graph = graph.grad;

                const auto [begin, end] = spans[slot];
                const BprUserTerms bpr = bpr_user_terms(engine, theta_eff, u,
                                                        batch.triples.data() + begin, end - begin);
                out.loss_bpr = bpr.loss_sum;
                out.grad_bpr = bpr.grad;
                out.triples = end - begin;
            };

            double batch_loss_graph = 0.0;
            double batch_loss_bpr = 0.0;
            std::int64_t batch_triples = 0;
            GradientTable grad_graph = GradientTable::Zero(gcount, kcount);
            GradientTable grad_bpr = GradientTable::Zero(gcount, kcount);

            if (config.determinism) {
                // per-user slots, reduced in user order: identical results
                // for any thread count
                std::vector<UserContribution> slots(user_count);
                detail::parallel_for(user_count, config.threads,
                                     [&](std::int64_t s) { user_work(s, slots[s]); });
                for (const UserContribution& c : slots) {
                    batch_loss_graph += c.loss_graph;
                    batch_loss_bpr += c.loss_bpr;
                    batch_triples += c.triples;
                    grad_graph += c.grad_graph;
                    grad_bpr += c.grad_bpr;
                }
            } else {
                // per-thread partials merged in chunk order: fixed only for
                // a fixed thread count
                const int workers = detail::resolve_threads(config.threads, user_count);
                std::vector<UserContribution> partials(workers);
                for (auto& p : partials) {
                    p.grad_graph = GradientTable::Zero(gcount, kcount);
                    p.grad_bpr = GradientTable::Zero(gcount, kcount);
                }
                detail::parallel_chunks(
                    user_count, workers, [&](int worker, std::int64_t begin, std::int64_t end) {
                        for (std::int64_t s = begin; s < end; ++s) {
                            UserContribution c;
                            user_work(s, c);
                            partials[worker].loss_graph += c.loss_graph;
                            partials[worker].loss_bpr += c.loss_bpr;
                            partials[worker].triples += c.triples;
                            partials[worker].grad_graph += c.grad_graph;
                            partials[worker].grad_bpr += c.grad_bpr;
                        }
                    });
                for (const UserContribution& c : partials) {
                    batch_loss_graph += c.loss_graph;
                    batch_loss_bpr += c.loss_bpr;
                    batch_triples += c.triples;
                    grad_graph += c.grad_graph;
                    grad_bpr += c.grad_bpr;
                }
            }

            // Eq-21 sum with per-batch means; dropout mask chains into the
            // gradient of the unmasked coefficients.
            const double inv_users = 1.0 / static_cast<double>(user_count);
            const double inv_triples = 1.0 / static_cast<double>(std::max<std::int64_t>(
                                                 batch_triples, 1));
            GradientTable grad = TrainConfig::weight_graph * inv_users * grad_graph +
                                 TrainConfig::weight_bpr * inv_triples * grad_bpr;
            grad = grad.cwiseProduct(mask);
            theta -= config.learning_rate * grad;

            const double mean_graph = batch_loss_graph * inv_users;
            const double mean_bpr = batch_loss_bpr * inv_triples;
            if (!std::isfinite(mean_graph) || !std::isfinite(mean_bpr) || !theta.allFinite()) {
                throw TrainingError("non-finite loss at epoch " + std::to_string(epoch + 1) +
                                    ", batch " + std::to_string(b) + "; theta:\n" +
                                    dump_theta(theta));
            }

            epoch_loss_graph += batch_loss_graph;
            epoch_loss_bpr += batch_loss_bpr;
            epoch_users += user_count;
            epoch_triples += batch_triples;
        }

        EpochLog log;
        log.epoch = epoch + 1;
        log.loss_graph = epoch_users > 0 ? epoch_loss_graph / static_cast<double>(epoch_users) : 0.0;
        log.loss_bpr =
            epoch_triples > 0 ? epoch_loss_bpr / static_cast<double>(epoch_triples) : 0.0;
        log.loss_total = log.loss_graph + log.loss_bpr;
        if (val_split.has_value()) {
            const EvalResult val =
                evaluate(engine, theta, *val_split, 20, config.threads, false);
            log.val_recall = val.recall;
            log.val_ndcg = val.ndcg;
        }
        result.log.push_back(log);
    }

    result.filter = std::move(initial);
    result.filter.kernel.theta = std::move(theta);
    return result;
}

}  // namespace polycf
