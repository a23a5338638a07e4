#include "fbalf/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include "fbalf/rng.hpp"

namespace fbalf {

void RatingDataset::rebuild_adjacency() {
    user_triples.assign(num_users(), {});
    for (std::size_t idx = 0; idx < triples.size(); ++idx) {
        user_triples[static_cast<std::size_t>(triples[idx].user)].push_back(idx);
    }
}

namespace {

std::vector<std::string> split_line(const std::string& line, const std::string& sep) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        std::size_t next = line.find(sep, pos);
        if (next == std::string::npos) {
            out.push_back(line.substr(pos));
            break;
        }
        out.push_back(line.substr(pos, next - pos));
        pos = next + sep.size();
    }
    return out;
}

}  // namespace

RatingDataset parse_ratings(std::istream& source, const ParseFormat& format) {
    RatingDataset ds;
    std::unordered_map<std::string, int> user_index;
    std::unordered_map<std::string, int> item_index;
    std::set<std::pair<int, int>> seen;

    ds.r_min = std::numeric_limits<double>::infinity();
    ds.r_max = -std::numeric_limits<double>::infinity();

    const int need = std::max({format.user_col, format.item_col, format.rating_col}) + 1;

    std::string line;
    std::size_t line_no = 0;
    bool skipped_header = false;
    while (std::getline(source, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (format.has_header && !skipped_header) {
            skipped_header = true;
            continue;
        }
        auto fields = split_line(line, format.separator);
        if (static_cast<int>(fields.size()) < need) {
            throw std::runtime_error("parse error at line " + std::to_string(line_no) +
                                     ": expected at least " + std::to_string(need) + " fields");
        }
        double rating;
        try {
            std::size_t consumed = 0;
            rating = std::stod(fields[static_cast<std::size_t>(format.rating_col)], &consumed);
            if (consumed != fields[static_cast<std::size_t>(format.rating_col)].size())
                throw std::invalid_argument("trailing junk");
        } catch (const std::exception&) {
            throw std::runtime_error("parse error at line " + std::to_string(line_no) +
                                     ": non-numeric rating '" +
                                     fields[static_cast<std::size_t>(format.rating_col)] + "'");
        }
        if (!std::isfinite(rating)) {
            throw std::runtime_error("parse error at line " + std::to_string(line_no) +
                                     ": non-finite rating");
        }
        ++ds.report.rows_read;

        const std::string& u_ext = fields[static_cast<std::size_t>(format.user_col)];
        const std::string& i_ext = fields[static_cast<std::size_t>(format.item_col)];
        auto [uit, u_new] = user_index.try_emplace(u_ext, static_cast<int>(ds.user_ids.size()));
        if (u_new) ds.user_ids.push_back(u_ext);
        auto [iit, i_new] = item_index.try_emplace(i_ext, static_cast<int>(ds.item_ids.size()));
        if (i_new) ds.item_ids.push_back(i_ext);

        if (!seen.insert({uit->second, iit->second}).second) {
            ++ds.report.duplicates_dropped;  // keep-first
            continue;
        }
        ds.triples.push_back({uit->second, iit->second, rating});
        ds.r_min = std::min(ds.r_min, rating);
        ds.r_max = std::max(ds.r_max, rating);
    }

    if (ds.triples.empty()) {
        ds.r_min = 0.0;
        ds.r_max = 0.0;
    }
    ds.rebuild_adjacency();
    return ds;
}

RatingDataset parse_ratings_file(const std::string& path, const ParseFormat& format) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open ratings file: " + path);
    return parse_ratings(in, format);
}

RatingDataset filter_min_degree(const RatingDataset& ds, std::size_t min_count) {
    std::vector<char> user_alive(ds.num_users(), 1);
    std::vector<char> item_alive(ds.num_items(), 1);

    bool changed = true;
    while (changed) {
        changed = false;
        std::vector<std::size_t> u_deg(ds.num_users(), 0), i_deg(ds.num_items(), 0);
        for (const auto& t : ds.triples) {
            if (user_alive[static_cast<std::size_t>(t.user)] &&
                item_alive[static_cast<std::size_t>(t.item)]) {
                ++u_deg[static_cast<std::size_t>(t.user)];
                ++i_deg[static_cast<std::size_t>(t.item)];
            }
        }
        for (std::size_t u = 0; u < ds.num_users(); ++u) {
            if (user_alive[u] && u_deg[u] < min_count) {
                user_alive[u] = 0;
                changed = true;
            }
        }
        for (std::size_t i = 0; i < ds.num_items(); ++i) {
            if (item_alive[i] && i_deg[i] < min_count) {
                item_alive[i] = 0;
                changed = true;
            }
        }
    }

    RatingDataset out;
    std::vector<int> u_map(ds.num_users(), -1), i_map(ds.num_items(), -1);
    for (std::size_t u = 0; u < ds.num_users(); ++u) {
        if (user_alive[u]) {
            u_map[u] = static_cast<int>(out.user_ids.size());
            out.user_ids.push_back(ds.user_ids[u]);
        }
    }
    for (std::size_t i = 0; i < ds.num_items(); ++i) {
        if (item_alive[i]) {
            i_map[i] = static_cast<int>(out.item_ids.size());
            out.item_ids.push_back(ds.item_ids[i]);
        }
    }
    out.r_min = std::numeric_limits<double>::infinity();
    out.r_max = -std::numeric_limits<double>::infinity();
    for (const auto& t : ds.triples) {
        int u = u_map[static_cast<std::size_t>(t.user)];
        int i = i_map[static_cast<std::size_t>(t.item)];
        if (u >= 0 && i >= 0) {
            out.triples.push_back({u, i, t.rating});
            out.r_min = std::min(out.r_min, t.rating);
            out.r_max = std::max(out.r_max, t.rating);
        }
    }
    if (out.triples.empty()) {
        out.r_min = 0.0;
        out.r_max = 0.0;
    }
    out.report = ds.report;
    out.rebuild_adjacency();
    return out;
}

namespace {

RatingDataset subset(const RatingDataset& ds, const std::vector<std::size_t>& indices) {
    RatingDataset out;
    out.user_ids = ds.user_ids;
    out.item_ids = ds.item_ids;
    out.r_min = ds.r_min;
    out.r_max = ds.r_max;
    out.triples.reserve(indices.size());
    for (std::size_t idx : indices) out.triples.push_back(ds.triples[idx]);
    out.rebuild_adjacency();
    return out;
}

}  // namespace

std::pair<RatingDataset, RatingDataset> split_holdout(const RatingDataset& ds,
                                                      double train_fraction,
                                                      std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("train_fraction must be in (0, 1)");
    std::vector<std::size_t> order(ds.triples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng = Rng::derive(seed, stream::kSplit);
    rng.shuffle(order);

    const auto n_train = static_cast<std::size_t>(
        std::llround(train_fraction * static_cast<double>(order.size())));
    std::vector<std::size_t> train_idx(order.begin(), order.begin() + static_cast<long>(n_train));
    std::vector<std::size_t> test_idx(order.begin() + static_cast<long>(n_train), order.end());
    return {subset(ds, train_idx), subset(ds, test_idx)};
}

SplitPlan make_kfold(const RatingDataset& ds, int k, std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("k must be >= 2");
    if (static_cast<std::size_t>(k) > ds.triples.size())
        throw std::invalid_argument("k exceeds number of triples");

    std::vector<std::size_t> order(ds.triples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng = Rng::derive(seed, stream::kSplit);
    rng.shuffle(order);

    SplitPlan plan;
    plan.folds = k;
    plan.seed = seed;
    const std::size_t n = order.size();
    const std::size_t base = n / static_cast<std::size_t>(k);
    const std::size_t extra = n % static_cast<std::size_t>(k);
    std::size_t pos = 0;
    for (int f = 0; f < k; ++f) {
        std::size_t len = base + (static_cast<std::size_t>(f) < extra ? 1 : 0);
        plan.test_indices.emplace_back(order.begin() + static_cast<long>(pos),
                                       order.begin() + static_cast<long>(pos + len));
        pos += len;
    }
    return plan;
}

std::pair<RatingDataset, RatingDataset> fold_datasets(const RatingDataset& ds,
                                                      const SplitPlan& plan, int fold) {
    if (fold < 0 || fold >= plan.folds) throw std::out_of_range("fold index out of range");
    std::vector<char> in_test(ds.triples.size(), 0);
    for (std::size_t idx : plan.test_indices[static_cast<std::size_t>(fold)]) in_test[idx] = 1;
    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t i = 0; i < ds.triples.size(); ++i) {
        (in_test[i] ? test_idx : train_idx).push_back(i);
    }
    return {subset(ds, train_idx), subset(ds, test_idx)};
}

}  // namespace fbalf
