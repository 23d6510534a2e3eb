#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "rns/corpus.hpp"
#include "rns/model.hpp"

namespace rns {

struct ScoredCandidate {
    int item = 0;
    double score = 0.0;
};

/// Candidates in descending score order; ties resolve by ascending item id,
/// or by a seeded shuffle when tie_shuffle is set.
std::vector<int> rank(std::vector<ScoredCandidate> scored,
                      std::optional<std::uint64_t> tie_shuffle = std::nullopt);

/// precision = |top-N ∩ relevant| / N, recall = |top-N ∩ relevant| / |relevant|
struct PrecisionRecall {
    double precision = 0.0;
    double recall = 0.0;
};
PrecisionRecall precision_recall_at(std::span<const int> ranked,
                                    std::span<const int> relevant, int cutoff);

/// Binary-relevance NDCG with 1/log2(position + 1) gains, ideal ranking
/// capped at the cutoff.
double ndcg_at(std::span<const int> ranked, std::span<const int> relevant, int cutoff);

/// 1 when any relevant item lands in the top N, else 0.
int hr_at(std::span<const int> ranked, std::span<const int> relevant, int cutoff);

struct MetricReport {
    Protocol protocol = Protocol::PerUser;
    int cutoff = 5;
    int instances = 0;
    double precision = 0.0;
    double recall = 0.0;
    double ndcg = 0.0;
    double hr = 0.0;
};

struct EvaluateOptions {
    int cutoff = 5;
    std::optional<std::uint64_t> tie_shuffle;
    std::ostream* per_instance_csv = nullptr;
};

/// Score every instance against an item-representation cache and average the
/// four metrics. Deterministic given the instances (and tie handling).
MetricReport evaluate(const ModelParams& params, const Corpus& corpus,
                      std::span<const TestInstance> instances, Protocol protocol,
                      const EvaluateOptions& options = {});

}  // namespace rns
