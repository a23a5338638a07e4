#include "fbalf/server.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fbalf/rng.hpp"

namespace fbalf {

ServerSnapshot::ServerSnapshot(const ServerState& state, const std::vector<int>& item_indices) {
    factors_.resize(static_cast<Eigen::Index>(item_indices.size()), state.item_factors.cols());
    bias_.resize(static_cast<Eigen::Index>(item_indices.size()));
    Eigen::Index row = 0;
    for (int item : item_indices) {
        if (item < 0 || item >= state.num_items())
            throw std::out_of_range("snapshot: item index out of range");
        factors_.row(row) = state.item_factors.row(item);
        bias_(row) = state.item_bias(item);
        index_.emplace(item, row);
        ++row;
    }
}

Eigen::Index ServerSnapshot::lookup(int item) const {
    auto it = index_.find(item);
    if (it == index_.end()) throw std::out_of_range("snapshot: item not in view");
    return it->second;
}

ServerState init_server(Eigen::Index item_count, const HyperParams& hp) {
    ServerState state;
    state.item_factors.resize(item_count, hp.factors);
    state.item_bias = Eigen::VectorXd::Zero(item_count);
    Rng rng = Rng::derive(hp.seed, stream::kServerInit);
    for (Eigen::Index i = 0; i < item_count; ++i)
        for (int k = 0; k < hp.factors; ++k)
            state.item_factors(i, k) = rng.uniform(0.0, 0.05);
    return state;
}

ServerSnapshot snapshot(const ServerState& state, const std::vector<int>& item_indices) {
    return ServerSnapshot(state, item_indices);
}

void apply_upload(ServerState& state, const GradientUpload& upload) {
    for (const auto& e : upload.entries) {
        if (e.item < 0 || e.item >= state.num_items())
            throw std::out_of_range("upload from user " + std::to_string(upload.user_index) +
                                    ": item index out of range");
        if (!e.grad_factors.allFinite() || !std::isfinite(e.grad_bias))
            throw std::runtime_error("upload from user " + std::to_string(upload.user_index) +
                                     ": non-finite gradient rejected");
        if (e.grad_factors.size() != state.item_factors.cols())
            throw std::invalid_argument("upload from user " + std::to_string(upload.user_index) +
                                        ": gradient length mismatch");
    }
    for (const auto& e : upload.entries) {
        state.item_factors.row(e.item) -= e.grad_factors.transpose();
        state.item_bias(e.item) -= e.grad_bias;
    }
}

void save_server(const ServerState& state, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "fbalf-server v1 f=" << state.factors() << " items=" << state.num_items() << "\n";
    char buf[32];
    for (Eigen::Index i = 0; i < state.num_items(); ++i) {
        for (int k = 0; k < state.factors(); ++k) {
            std::snprintf(buf, sizeof(buf), "%.17g", state.item_factors(i, k));
            out << buf << ' ';
        }
        std::snprintf(buf, sizeof(buf), "%.17g", state.item_bias(i));
        out << buf << '\n';
    }
    out << "round " << state.round_counter << "\n";
}

ServerState load_server(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::string header;
    std::getline(in, header);
    int f = 0;
    long items = 0;
    if (std::sscanf(header.c_str(), "fbalf-server v1 f=%d items=%ld", &f, &items) != 2)
        throw std::runtime_error("bad server checkpoint header: " + header);
    ServerState state;
    state.item_factors.resize(items, f);
    state.item_bias.resize(items);
    for (long i = 0; i < items; ++i) {
        for (int k = 0; k < f; ++k)
            if (!(in >> state.item_factors(i, k)))
                throw std::runtime_error("truncated server checkpoint");
        if (!(in >> state.item_bias(i))) throw std::runtime_error("truncated server checkpoint");
    }
    std::string tag;
    if (in >> tag && tag == "round") in >> state.round_counter;
    return state;
}

}  // namespace fbalf
