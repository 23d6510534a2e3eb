#pragma once

// Test-only oracles, independent of the library paths they check:
//  - central finite differences for gradient verification
//  - a brute-force ranking-metric implementation
// Expected values in the test files are either computed here or closed-form.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <set>
#include <vector>

#include <rns/tensor.hpp>

namespace oracle {

struct GradCheck {
    double max_rel_err = 0.0;
    std::size_t checked = 0;
};

inline double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({1e-3, std::abs(a), std::abs(b)});
}

// Central finite differences of `loss_fn` w.r.t. every element of every
// tensor in `params`, compared against the gradients already accumulated in
// those tensors. `loss_fn` must re-run the forward pass from scratch (with
// any argmax selections pinned by the caller).
inline GradCheck check_gradients(std::vector<rns::Tensor> params,
                                 const std::function<double()>& loss_fn,
                                 double step = 1e-6) {
    GradCheck result;
    for (rns::Tensor& p : params) {
        auto data = p.data();
        auto grad = p.grad();
        for (std::size_t i = 0; i < data.size(); ++i) {
            const double saved = data[i];
            data[i] = saved + step;
            const double up = loss_fn();
            data[i] = saved - step;
            const double down = loss_fn();
            data[i] = saved;
            const double fd = (up - down) / (2.0 * step);
            const double analytic = grad.empty() ? 0.0 : grad[i];
            result.max_rel_err = std::max(result.max_rel_err, rel_err(analytic, fd));
            ++result.checked;
        }
    }
    return result;
}

inline void fill_uniform(rns::Tensor& t, std::mt19937_64& rng, double lo = -1.0,
                         double hi = 1.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    for (double& v : t.data()) v = dist(rng);
}

// Fill avoiding a dead zone around zero (for ReLU-style kinks).
inline void fill_uniform_away_from_zero(rns::Tensor& t, std::mt19937_64& rng,
                                        double min_abs = 0.1, double max_abs = 1.0) {
    std::uniform_real_distribution<double> mag(min_abs, max_abs);
    std::bernoulli_distribution sign(0.5);
    for (double& v : t.data()) v = (sign(rng) ? 1.0 : -1.0) * mag(rng);
}

// ---- brute-force ranking metrics ----------------------------------------
// Order by repeatedly extracting the best (score desc, id asc) candidate,
// then walk positions literally. Deliberately naive.

struct BruteMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double ndcg = 0.0;
    double hr = 0.0;
};

inline BruteMetrics brute_force_metrics(std::vector<std::pair<int, double>> scored,
                                        const std::set<int>& relevant, int cutoff) {
    std::vector<int> order;
    std::vector<bool> used(scored.size(), false);
    for (std::size_t round = 0; round < scored.size(); ++round) {
        int best = -1;
        for (std::size_t i = 0; i < scored.size(); ++i) {
            if (used[i]) continue;
            if (best < 0) {
                best = static_cast<int>(i);
                continue;
            }
            const auto& cand = scored[i];
            const auto& cur = scored[static_cast<std::size_t>(best)];
            if (cand.second > cur.second ||
                (cand.second == cur.second && cand.first < cur.first))
                best = static_cast<int>(i);
        }
        used[static_cast<std::size_t>(best)] = true;
        order.push_back(scored[static_cast<std::size_t>(best)].first);
    }

    int hits = 0;
    double dcg = 0.0;
    for (int pos = 0; pos < cutoff && pos < static_cast<int>(order.size()); ++pos) {
        if (relevant.count(order[static_cast<std::size_t>(pos)])) {
            ++hits;
            dcg += 1.0 / std::log2(static_cast<double>(pos) + 2.0);
        }
    }
    double idcg = 0.0;
    const int ideal = std::min<int>(cutoff, static_cast<int>(relevant.size()));
    for (int pos = 0; pos < ideal; ++pos)
        idcg += 1.0 / std::log2(static_cast<double>(pos) + 2.0);

    BruteMetrics m;
    m.precision = static_cast<double>(hits) / cutoff;
    m.recall = static_cast<double>(hits) / static_cast<double>(relevant.size());
    m.ndcg = idcg > 0.0 ? dcg / idcg : 0.0;
    m.hr = hits > 0 ? 1.0 : 0.0;
    return m;
}

}  // namespace oracle
