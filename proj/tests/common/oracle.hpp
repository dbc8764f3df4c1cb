#pragma once

// Test-only brute-force reference for the dual-score selection pipeline.
// Deliberately independent of the library: plain loops, its own clamped
// arccos, its own ranking, a full sort. Only inputs (embeddings, centroids)
// are shared with the implementation under test.

#include <algorithm>
#include <cmath>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace oracle {

inline constexpr double kClamp = 1e-7;

inline double angle(std::span<const double> a, std::span<const double> b) {
    double dot = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
    if (dot > 1.0 - kClamp) dot = 1.0 - kClamp;
    if (dot < -1.0 + kClamp) dot = -1.0 + kClamp;
    return std::acos(dot);
}

inline double uncertainty(const std::vector<double>& thetas, bool pairwise_min) {
    if (pairwise_min) {
        double best = 1e300;
        for (std::size_t p = 0; p < thetas.size(); ++p)
            for (std::size_t q = 0; q < thetas.size(); ++q)
                if (p != q) best = std::min(best, std::abs(thetas[p] - thetas[q]));
        return best;
    }
    double lo = thetas[0], hi = thetas[0];
    for (double t : thetas) {
        lo = std::min(lo, t);
        hi = std::max(hi, t);
    }
    return hi - lo;
}

// 0-based ascending rank with average ties: #smaller + (#equal - 1)/2.
inline std::vector<double> ranks(const std::vector<double>& values) {
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::size_t smaller = 0, equal = 0;
        for (std::size_t j = 0; j < values.size(); ++j) {
            if (values[j] < values[i]) ++smaller;
            if (values[j] == values[i]) ++equal;
        }
        out[i] = static_cast<double>(smaller) + 0.5 * static_cast<double>(equal - 1);
    }
    return out;
}

struct Inputs {
    std::vector<std::string> ids;
    std::vector<std::vector<double>> pool;       // unit embeddings
    std::vector<std::vector<double>> recon;      // row-aligned
    std::vector<std::vector<double>> centroids;  // unit centroids
    bool pairwise_min = true;
    bool rank_combine = false;
    double omega = 1.0;
    double alpha_percent = 20.0;
};

inline std::set<std::string> select(const Inputs& in) {
    const std::size_t n = in.pool.size();
    std::vector<double> u(n), r(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> thetas;
        for (const auto& c : in.centroids) thetas.push_back(angle(in.pool[i], c));
        u[i] = uncertainty(thetas, in.pairwise_min);
        r[i] = angle(in.pool[i], in.recon[i]);
    }
    std::vector<double> informative(n);
    if (in.rank_combine) {
        const auto ur = ranks(u);
        const auto rr = ranks(r);
        for (std::size_t i = 0; i < n; ++i) informative[i] = ur[i] + in.omega * rr[i];
    } else {
        for (std::size_t i = 0; i < n; ++i) informative[i] = u[i] + in.omega * r[i];
    }
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (informative[a] != informative[b]) return informative[a] < informative[b];
        return in.ids[a] < in.ids[b];
    });
    std::size_t budget = static_cast<std::size_t>(
        std::floor(in.alpha_percent * static_cast<double>(n) / 100.0));
    if (budget < 1) budget = 1;
    std::set<std::string> selected;
    for (std::size_t i = 0; i < budget; ++i) selected.insert(in.ids[order[i]]);
    return selected;
}

}  // namespace oracle
