#include "polycf/interaction.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>

#include "polycf/errors.hpp"

namespace polycf {

InteractionMatrix InteractionMatrix::from_entries(std::int64_t num_users, std::int64_t num_items,
                                                  std::vector<Entry> entries) {
    if (num_users < 1 || num_items < 1) {
        throw InvalidArgument("interaction matrix needs at least one user and one item");
    }
    for (const auto& [u, i] : entries) {
        if (u < 0 || u >= num_users || i < 0 || i >= num_items) {
            throw InvalidArgument("interaction entry (" + std::to_string(u) + ", " +
                                  std::to_string(i) + ") out of range for " +
                                  std::to_string(num_users) + " x " + std::to_string(num_items));
        }
    }
    std::sort(entries.begin(), entries.end());
    entries.erase(std::unique(entries.begin(), entries.end()), entries.end());

    InteractionMatrix R;
    R.num_users_ = num_users;
    R.num_items_ = num_items;

    R.row_ptr_.assign(num_users + 1, 0);
    R.col_idx_.resize(entries.size());
    for (const auto& [u, i] : entries) ++R.row_ptr_[u + 1];
    std::partial_sum(R.row_ptr_.begin(), R.row_ptr_.end(), R.row_ptr_.begin());
    for (std::size_t e = 0; e < entries.size(); ++e) R.col_idx_[e] = entries[e].second;

    R.col_ptr_.assign(num_items + 1, 0);
    R.row_idx_.resize(entries.size());
    for (const auto& [u, i] : entries) ++R.col_ptr_[i + 1];
    std::partial_sum(R.col_ptr_.begin(), R.col_ptr_.end(), R.col_ptr_.begin());
    {
        std::vector<std::int64_t> cursor(R.col_ptr_.begin(), R.col_ptr_.end() - 1);
        for (const auto& [u, i] : entries) R.row_idx_[cursor[i]++] = u;
    }

    R.user_degrees_.resize(num_users);
    for (std::int64_t u = 0; u < num_users; ++u) {
        R.user_degrees_[u] = R.row_ptr_[u + 1] - R.row_ptr_[u];
    }
    R.item_degrees_.resize(num_items);
    for (std::int64_t i = 0; i < num_items; ++i) {
        R.item_degrees_[i] = R.col_ptr_[i + 1] - R.col_ptr_[i];
    }
    return R;
}

bool InteractionMatrix::has(std::int64_t u, std::int64_t i) const {
    const auto row = items_of(u);
    return std::binary_search(row.begin(), row.end(), static_cast<std::int32_t>(i));
}

std::int64_t Dataset::num_test_interactions() const {
    std::int64_t total = 0;
    for (const auto& items : test_items) total += static_cast<std::int64_t>(items.size());
    return total;
}

namespace {

struct ParsedFile {
    std::vector<InteractionMatrix::Entry> entries;
    std::int64_t max_user = -1;
    std::int64_t max_item = -1;
    std::int64_t lines_parsed = 0;
};

std::int64_t parse_id(std::string_view token, const std::string& path, std::int64_t line_no) {
    std::int64_t value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size() || value < 0) {
        throw ParseError(path + ":" + std::to_string(line_no) + ": malformed token '" +
                         std::string(token) + "' (expected a non-negative integer)");
    }
    return value;
}

ParsedFile parse_adjacency_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);

    ParsedFile parsed;
    std::string line;
    std::int64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view rest(line);
        std::int64_t user = -1;
        while (!rest.empty()) {
            const auto start = rest.find_first_not_of(" \t\r");
            if (start == std::string_view::npos) break;
            rest.remove_prefix(start);
            auto end = rest.find_first_of(" \t\r");
            if (end == std::string_view::npos) end = rest.size();
            const std::string_view token = rest.substr(0, end);
            rest.remove_prefix(end);

            const std::int64_t value = parse_id(token, path, line_no);
            if (user < 0) {
                user = value;
                parsed.max_user = std::max(parsed.max_user, user);
            } else {
                parsed.max_item = std::max(parsed.max_item, value);
                parsed.entries.emplace_back(static_cast<std::int32_t>(user),
                                            static_cast<std::int32_t>(value));
            }
        }
        // empty lines and user-only lines only contribute dimensions
        if (user >= 0) ++parsed.lines_parsed;
    }
    return parsed;
}

}  // namespace

Dataset load_dataset(const std::string& train_path, const std::string& test_path,
                     const std::string& name) {
    ParsedFile train = parse_adjacency_file(train_path);
    ParsedFile test = parse_adjacency_file(test_path);

    if (train.entries.empty()) {
        throw ParseError(train_path + ": train file contains no interactions");
    }

    const std::int64_t max_user = std::max(train.max_user, test.max_user);
    const std::int64_t max_item = std::max(train.max_item, test.max_item);
    const std::int64_t total_lines = train.lines_parsed + test.lines_parsed;
    // Dense-index guard: these splits use contiguous ids, so a huge max id
    // on few lines means the file is not in the expected format.
    if (std::max(max_user, max_item) > 10 * total_lines) {
        throw ParseError("max id " + std::to_string(std::max(max_user, max_item)) +
                         " exceeds 10x the line count (" + std::to_string(total_lines) +
                         "); ids must be dense indices");
    }

    const std::int64_t m = max_user + 1;
    const std::int64_t n = max_item + 1;

    Dataset dataset;
    dataset.name = name;
    dataset.train = InteractionMatrix::from_entries(m, n, std::move(train.entries));

    dataset.test_items.assign(m, {});
    {
        std::sort(test.entries.begin(), test.entries.end());
        test.entries.erase(std::unique(test.entries.begin(), test.entries.end()),
                           test.entries.end());
        for (const auto& [u, i] : test.entries) {
            if (dataset.train.has(u, i)) {
                throw ParseError(test_path + ": test item " + std::to_string(i) + " of user " +
                                 std::to_string(u) + " also appears in the train split");
            }
            dataset.test_items[u].push_back(i);
        }
    }

    for (std::int64_t u = 0; u < m; ++u) {
        if (dataset.train.user_degree(u) == 0) ++dataset.zero_degree_users;
    }
    return dataset;
}

}  // namespace polycf
