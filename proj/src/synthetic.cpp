#include "polycf/synthetic.hpp"

#include <algorithm>

#include "polycf/errors.hpp"
#include "polycf/rng.hpp"

namespace polycf {

Dataset generate_block_dataset(const BlockDatasetOptions& options) {
    if (options.num_users < 1 || options.num_items < 1) {
        throw InvalidArgument("block dataset needs at least one user and item");
    }
    if (options.blocks < 1 || options.num_users % options.blocks != 0 ||
        options.num_items % options.blocks != 0) {
        throw InvalidArgument("users and items must divide evenly into blocks");
    }
    if (options.p_in < 0.0 || options.p_in > 1.0 || options.p_out < 0.0 ||
        options.p_out > 1.0) {
        throw InvalidArgument("block densities must lie in [0,1]");
    }
    if (options.test_fraction < 0.0 || options.test_fraction >= 1.0) {
        throw InvalidArgument("test_fraction must lie in [0,1)");
    }

    const std::int64_t users_per_block = options.num_users / options.blocks;
    const std::int64_t items_per_block = options.num_items / options.blocks;

    Rng rng(Rng::mix(options.seed, 0x626c6f636bULL));
    std::vector<InteractionMatrix::Entry> train_entries;
    std::vector<std::vector<std::int32_t>> test(options.num_users);

    for (std::int64_t u = 0; u < options.num_users; ++u) {
        const std::int64_t user_block = u / users_per_block;
        std::vector<std::int32_t> within;
        std::vector<std::int32_t> cross;
        for (std::int64_t i = 0; i < options.num_items; ++i) {
            const bool same_block = (i / items_per_block) == user_block;
            const double p = same_block ? options.p_in : options.p_out;
            if (rng.bernoulli(p)) {
                (same_block ? within : cross).push_back(static_cast<std::int32_t>(i));
            }
        }
        // hold out a share of the within-block items, keeping >= 1 train item
        std::vector<std::int32_t> held;
        for (const std::int32_t i : within) {
            const std::int64_t kept = static_cast<std::int64_t>(within.size()) -
                                      static_cast<std::int64_t>(held.size()) +
                                      static_cast<std::int64_t>(cross.size());
            if (kept > 1 && rng.bernoulli(options.test_fraction)) {
                held.push_back(i);
            } else {
                train_entries.emplace_back(static_cast<std::int32_t>(u), i);
            }
        }
        for (const std::int32_t i : cross) {
            train_entries.emplace_back(static_cast<std::int32_t>(u), i);
        }
        test[u] = std::move(held);
    }

    Dataset dataset;
    dataset.name = "synthetic-blocks";
    dataset.train = InteractionMatrix::from_entries(options.num_users, options.num_items,
                                                    std::move(train_entries));
    dataset.test_items = std::move(test);
    for (std::int64_t u = 0; u < options.num_users; ++u) {
        if (dataset.train.user_degree(u) == 0) ++dataset.zero_degree_users;
    }
    return dataset;
}

}  // namespace polycf
