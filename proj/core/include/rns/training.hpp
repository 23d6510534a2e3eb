#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rns/corpus.hpp"
#include "rns/model.hpp"
#include "rns/tensor.hpp"

namespace rns {

struct TrainConfig {
    double learning_rate = 0.001;
    int negatives = 3;       // x sampled per training instance
    double lambda = 0.0001;  // L2 coefficient over all trainable parameters
    int epochs = 30;
    int batch_size = 128;
    std::uint64_t seed = 42;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    // > 0 stops after this many epochs without improvement on a held-out
    // slice (the last train item per user)
    int patience = 0;

    void validate() const;
};

/// Adam with bias correction over every trainable tensor. step() applies the
/// accumulated gradients and zeroes them; a step from zeroed moments and a
/// zero gradient leaves parameters unchanged.
class AdamOptimizer {
public:
    AdamOptimizer(ModelParams& params, const TrainConfig& config);

    void step();
    std::int64_t step_count() const { return steps_; }

private:
    struct Slot {
        Tensor param;
        std::vector<double> m;
        std::vector<double> v;
    };
    std::vector<Slot> slots_;
    double lr_, beta1_, beta2_, eps_;
    std::int64_t steps_ = 0;
};

/// Binary cross-entropy objective for one instance: -log(s_target) plus
/// -log(1 - s) over the negatives, plus lambda * reg_fraction * ||params||^2
/// when params are given. Scores at the numeric boundary are floored at
/// kLogFloor before the log.
Tensor loss(Tape* tape, const Tensor& target_score, std::span<const Tensor> negative_scores,
            ModelParams* params = nullptr, double lambda = 0.0, double reg_fraction = 1.0);

/// One pass over the instances: shuffles them under seed + epoch, then per
/// batch runs forward/loss/backward and one Adam step. The lambda penalty
/// enters once per batch, scaled by the batch's share of the instances.
/// Returns the epoch mean loss (total objective / instance count). A
/// non-finite loss aborts, naming the batch.
double train_epoch(std::span<const TrainingInstance> instances, const Corpus& corpus,
                   ModelParams& params, AdamOptimizer& optimizer, const TrainConfig& config,
                   int epoch);

struct EpochLog {
    int epoch = 0;  // 1-based
    double mean_loss = 0.0;
    double wall_ms = 0.0;
    double lr = 0.0;
    double validation_loss = 0.0;  // only meaningful when patience > 0
    bool has_validation = false;
};

struct TrainHooks {
    std::function<void(const EpochLog&)> on_epoch;
    /// Called with the 1-based epoch after its update; use for checkpoints.
    std::function<void(int, const ModelParams&)> on_epoch_end;
};

/// Full training driver. Negatives are resampled fresh each epoch (seeded),
/// instances reshuffled, and with patience > 0 the last train item of each
/// user is held out for early stopping. Returns per-epoch mean losses.
std::vector<double> train(const Corpus& corpus, ModelParams& params, const TrainConfig& config,
                          const TrainHooks& hooks = {});

}  // namespace rns
