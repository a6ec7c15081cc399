#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace polycf {

/// Immutable binary user-item interaction matrix.
///
/// Stored twice: compressed rows over users (R) and compressed columns over
/// items (R^T), so matvecs run at O(nnz) in both orientations. Entries are
/// presence-only; duplicates are collapsed at construction. Degrees are the
/// row/column entry counts of the train matrix and never include test data.
class InteractionMatrix {
public:
    using Entry = std::pair<std::int32_t, std::int32_t>;  // (user, item)

    // Sorts, deduplicates and validates the entry list.
    static InteractionMatrix from_entries(std::int64_t num_users, std::int64_t num_items,
                                          std::vector<Entry> entries);

    std::int64_t num_users() const { return num_users_; }
    std::int64_t num_items() const { return num_items_; }
    std::int64_t nnz() const { return static_cast<std::int64_t>(col_idx_.size()); }

    // Sorted item indices of user u.
    std::span<const std::int32_t> items_of(std::int64_t u) const {
        return {col_idx_.data() + row_ptr_[u], col_idx_.data() + row_ptr_[u + 1]};
    }
    // Sorted user indices of item i.
    std::span<const std::int32_t> users_of(std::int64_t i) const {
        return {row_idx_.data() + col_ptr_[i], row_idx_.data() + col_ptr_[i + 1]};
    }

    std::int64_t user_degree(std::int64_t u) const { return row_ptr_[u + 1] - row_ptr_[u]; }
    std::int64_t item_degree(std::int64_t i) const { return col_ptr_[i + 1] - col_ptr_[i]; }

    const std::vector<std::int64_t>& user_degrees() const { return user_degrees_; }
    const std::vector<std::int64_t>& item_degrees() const { return item_degrees_; }

    bool has(std::int64_t u, std::int64_t i) const;

private:
    std::int64_t num_users_ = 0;
    std::int64_t num_items_ = 0;
    // Row-compressed layout (user rows).
    std::vector<std::int64_t> row_ptr_;
    std::vector<std::int32_t> col_idx_;
    // Column-compressed layout (item columns).
    std::vector<std::int64_t> col_ptr_;
    std::vector<std::int32_t> row_idx_;
    std::vector<std::int64_t> user_degrees_;
    std::vector<std::int64_t> item_degrees_;
};

/// Train matrix plus the held-out per-user test lists.
struct Dataset {
    InteractionMatrix train;
    std::vector<std::vector<std::int32_t>> test_items;  // size num_users, sorted
    std::string name;
    std::int64_t zero_degree_users = 0;  // users with no train interactions

    std::int64_t num_test_interactions() const;
};

/// Reads a LightGCN-style adjacency-list split: each line is
/// `<user_id> <item_id> <item_id> ...`. Dimensions are 1 + the largest id
/// seen across both files. Empty lines and user-only lines are skipped;
/// non-integer tokens raise ParseError with the offending line number.
Dataset load_dataset(const std::string& train_path, const std::string& test_path,
                     const std::string& name = "");

}  // namespace polycf
