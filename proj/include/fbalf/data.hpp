#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

namespace fbalf {

struct RatingTriple {
    int user = 0;   // dense 0-based index
    int item = 0;   // dense 0-based index
    double rating = 0.0;
};

struct ParseFormat {
    std::string separator = ",";   // "::", "\t" or ","
    bool has_header = false;
    int user_col = 0;
    int item_col = 1;
    int rating_col = 2;
};

struct IngestReport {
    std::size_t rows_read = 0;
    std::size_t duplicates_dropped = 0;
};

/// Sparse rating data re-keyed to dense indices. Id maps preserve first-appearance order.
struct RatingDataset {
    std::vector<std::string> user_ids;   // dense index -> external id
    std::vector<std::string> item_ids;
    std::vector<RatingTriple> triples;
    std::vector<std::vector<std::size_t>> user_triples;  // per-user triple indices
    double r_min = 0.0;
    double r_max = 0.0;
    IngestReport report;

    std::size_t num_users() const { return user_ids.size(); }
    std::size_t num_items() const { return item_ids.size(); }
    double density() const {
        const double cells = static_cast<double>(num_users()) * static_cast<double>(num_items());
        return cells > 0 ? static_cast<double>(triples.size()) / cells : 0.0;
    }
    double midpoint() const { return 0.5 * (r_min + r_max); }

    void rebuild_adjacency();
};

struct SplitPlan {
    int folds = 0;
    std::uint64_t seed = 0;
    std::vector<std::vector<std::size_t>> test_indices;  // per fold
};

RatingDataset parse_ratings(std::istream& source, const ParseFormat& format);
RatingDataset parse_ratings_file(const std::string& path, const ParseFormat& format);

/// Iteratively drops users/items with degree < min_count until a fixed point,
/// then re-densifies the index maps.
RatingDataset filter_min_degree(const RatingDataset& ds, std::size_t min_count);

/// Seeded shuffle split. Both halves keep the full user/item universe so that
/// indices stay comparable; cold entries are detected at evaluation time.
std::pair<RatingDataset, RatingDataset> split_holdout(const RatingDataset& ds,
                                                      double train_fraction,
                                                      std::uint64_t seed);

SplitPlan make_kfold(const RatingDataset& ds, int k, std::uint64_t seed);

/// Materialize (train, test) for one fold of a plan.
std::pair<RatingDataset, RatingDataset> fold_datasets(const RatingDataset& ds,
                                                      const SplitPlan& plan, int fold);

}  // namespace fbalf
