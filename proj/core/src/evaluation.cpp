#include "rns/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include "rns/error.hpp"

namespace rns {

std::vector<int> rank(std::vector<ScoredCandidate> scored,
                      std::optional<std::uint64_t> tie_shuffle) {
    for (const ScoredCandidate& c : scored)
        if (!std::isfinite(c.score))
            throw NumericError("rank: non-finite score for item " + std::to_string(c.item));

    if (tie_shuffle.has_value()) {
        // seeded random tiebreak keys instead of the id order
        std::mt19937_64 rng(*tie_shuffle);
        std::vector<std::pair<std::uint64_t, std::size_t>> keys(scored.size());
        for (std::size_t i = 0; i < scored.size(); ++i) keys[i] = {rng(), i};
        std::sort(keys.begin(), keys.end());
        std::vector<ScoredCandidate> reordered;
        reordered.reserve(scored.size());
        for (const auto& [key, idx] : keys) reordered.push_back(scored[idx]);
        std::stable_sort(reordered.begin(), reordered.end(),
                         [](const ScoredCandidate& a, const ScoredCandidate& b) {
                             return a.score > b.score;
                         });
        std::vector<int> out;
        out.reserve(reordered.size());
        for (const ScoredCandidate& c : reordered) out.push_back(c.item);
        return out;
    }

    std::sort(scored.begin(), scored.end(),
              [](const ScoredCandidate& a, const ScoredCandidate& b) {
                  if (a.score != b.score) return a.score > b.score;
                  return a.item < b.item;
              });
    std::vector<int> out;
    out.reserve(scored.size());
    for (const ScoredCandidate& c : scored) out.push_back(c.item);
    return out;
}

namespace {

int hits_in_top(std::span<const int> ranked, std::span<const int> relevant, int cutoff) {
    std::unordered_set<int> rel(relevant.begin(), relevant.end());
    int hits = 0;
    const int limit = std::min<int>(cutoff, static_cast<int>(ranked.size()));
    for (int p = 0; p < limit; ++p)
        if (rel.count(ranked[static_cast<std::size_t>(p)])) ++hits;
    return hits;
}

void require_metric_args(std::span<const int> relevant, int cutoff, const char* op) {
    if (cutoff < 1) throw ConfigError(std::string(op) + ": cutoff must be at least 1");
    if (relevant.empty()) throw ContractError(std::string(op) + ": empty relevant set");
}

}  // namespace

PrecisionRecall precision_recall_at(std::span<const int> ranked,
                                    std::span<const int> relevant, int cutoff) {
    require_metric_args(relevant, cutoff, "precision_recall_at");
    const int hits = hits_in_top(ranked, relevant, cutoff);
    PrecisionRecall pr;
    pr.precision = static_cast<double>(hits) / static_cast<double>(cutoff);
    pr.recall = static_cast<double>(hits) / static_cast<double>(relevant.size());
    return pr;
}

double ndcg_at(std::span<const int> ranked, std::span<const int> relevant, int cutoff) {
    require_metric_args(relevant, cutoff, "ndcg_at");
    std::unordered_set<int> rel(relevant.begin(), relevant.end());
    double dcg = 0.0;
    const int limit = std::min<int>(cutoff, static_cast<int>(ranked.size()));
    for (int p = 0; p < limit; ++p)
        if (rel.count(ranked[static_cast<std::size_t>(p)]))
            dcg += 1.0 / std::log2(static_cast<double>(p) + 2.0);
    double idcg = 0.0;
    const int ideal = std::min<int>(cutoff, static_cast<int>(rel.size()));
    for (int p = 0; p < ideal; ++p) idcg += 1.0 / std::log2(static_cast<double>(p) + 2.0);
    return dcg / idcg;
}

int hr_at(std::span<const int> ranked, std::span<const int> relevant, int cutoff) {
    require_metric_args(relevant, cutoff, "hr_at");
    return hits_in_top(ranked, relevant, cutoff) > 0 ? 1 : 0;
}

MetricReport evaluate(const ModelParams& params, const Corpus& corpus,
                      std::span<const TestInstance> instances, Protocol protocol,
                      const EvaluateOptions& options) {
    if (instances.empty()) throw ContractError("evaluate: no test instances");
    if (options.cutoff < 1) throw ConfigError("evaluate: cutoff must be at least 1");

    EvalCache cache = build_eval_cache(corpus, params);

    if (options.per_instance_csv)
        *options.per_instance_csv << "instance,user,relevant,hit,precision,recall,ndcg\n";

    MetricReport report;
    report.protocol = protocol;
    report.cutoff = options.cutoff;
    for (std::size_t idx = 0; idx < instances.size(); ++idx) {
        const TestInstance& inst = instances[idx];
        std::vector<double> scores =
            score_with_cache(cache, params, inst.user, inst.history, inst.candidates);
        std::vector<ScoredCandidate> scored(inst.candidates.size());
        for (std::size_t i = 0; i < scored.size(); ++i)
            scored[i] = {inst.candidates[i], scores[i]};
        std::vector<int> ranked = rank(std::move(scored), options.tie_shuffle);

        const PrecisionRecall pr = precision_recall_at(ranked, inst.relevant, options.cutoff);
        const double ndcg = ndcg_at(ranked, inst.relevant, options.cutoff);
        const int hit = hr_at(ranked, inst.relevant, options.cutoff);
        report.precision += pr.precision;
        report.recall += pr.recall;
        report.ndcg += ndcg;
        report.hr += hit;
        if (options.per_instance_csv)
            *options.per_instance_csv << idx << ',' << corpus.user_name(inst.user) << ','
                                      << inst.relevant.size() << ',' << hit << ','
                                      << pr.precision << ',' << pr.recall << ',' << ndcg
                                      << '\n';
    }
    const double n = static_cast<double>(instances.size());
    report.instances = static_cast<int>(instances.size());
    report.precision /= n;
    report.recall /= n;
    report.ndcg /= n;
    report.hr /= n;
    return report;
}

}  // namespace rns
