#pragma once

#include <cstdint>

#include "polycf/interaction.hpp"

namespace polycf {

/// Block-community instance: users and items split into equal communities;
/// within-block pairs interact with probability p_in, cross-block pairs
/// with p_out. A test_fraction share of each user's within-block
/// interactions is held out (each user keeps at least one train item).
struct BlockDatasetOptions {
    std::int64_t num_users = 200;
    std::int64_t num_items = 200;
    int blocks = 2;
    double p_in = 0.3;
    double p_out = 0.01;
    double test_fraction = 0.2;
    std::uint64_t seed = 0;
};

Dataset generate_block_dataset(const BlockDatasetOptions& options);

}  // namespace polycf
