#include "rns/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "rns/error.hpp"

namespace rns {

void TrainConfig::validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
        throw ConfigError("learning_rate must be finite and nonnegative");
    if (negatives < 1) throw ConfigError("negatives per instance must be at least 1");
    if (!(lambda >= 0.0)) throw ConfigError("lambda must be nonnegative");
    if (epochs < 1) throw ConfigError("epochs must be at least 1");
    if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0))
        throw ConfigError("adam betas must lie in [0, 1)");
    if (!(adam_eps > 0.0)) throw ConfigError("adam_eps must be positive");
    if (patience < 0) throw ConfigError("patience must be nonnegative");
}

AdamOptimizer::AdamOptimizer(ModelParams& params, const TrainConfig& config)
    : lr_(config.learning_rate),
      beta1_(config.adam_beta1),
      beta2_(config.adam_beta2),
      eps_(config.adam_eps) {
    params.for_each_parameter([this](const std::string&, Tensor& t) {
        t.ensure_grad();
        Slot slot;
        slot.param = t;
        slot.m.assign(t.size(), 0.0);
        slot.v.assign(t.size(), 0.0);
        slots_.push_back(std::move(slot));
    });
}

void AdamOptimizer::step() {
    ++steps_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(steps_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(steps_));
    for (Slot& slot : slots_) {
        auto data = slot.param.data();
        auto grad = slot.param.grad();
        for (std::size_t i = 0; i < data.size(); ++i) {
            const double g = grad[i];
            slot.m[i] = beta1_ * slot.m[i] + (1.0 - beta1_) * g;
            slot.v[i] = beta2_ * slot.v[i] + (1.0 - beta2_) * g * g;
            const double m_hat = slot.m[i] / bc1;
            const double v_hat = slot.v[i] / bc2;
            data[i] -= lr_ * m_hat / (std::sqrt(v_hat) + eps_);
        }
        slot.param.zero_grad();
    }
}

namespace {

Tensor l2_penalty(Tape* tape, ModelParams& params) {
    Tensor total;
    params.for_each_parameter([&](const std::string&, Tensor& t) {
        Tensor sq = dot(tape, t, t);
        total = total.defined() ? add(tape, total, sq) : sq;
    });
    return total;
}

}  // namespace

Tensor loss(Tape* tape, const Tensor& target_score, std::span<const Tensor> negative_scores,
            ModelParams* params, double lambda, double reg_fraction) {
    Tensor obj = scale(tape, log_floored(tape, target_score), -1.0);
    for (const Tensor& s : negative_scores) {
        Tensor complement = add_const(tape, scale(tape, s, -1.0), 1.0);
        obj = add(tape, obj, scale(tape, log_floored(tape, complement), -1.0));
    }
    if (params != nullptr && lambda > 0.0)
        obj = add(tape, obj, scale(tape, l2_penalty(tape, *params), lambda * reg_fraction));
    return obj;
}

double train_epoch(std::span<const TrainingInstance> instances, const Corpus& corpus,
                   ModelParams& params, AdamOptimizer& optimizer, const TrainConfig& config,
                   int epoch) {
    if (instances.empty()) throw ContractError("train_epoch: no instances");

    std::vector<std::size_t> order(instances.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(config.seed + static_cast<std::uint64_t>(epoch));
    std::shuffle(order.begin(), order.end(), rng);

    const std::size_t total = instances.size();
    const std::size_t batch_size = static_cast<std::size_t>(config.batch_size);
    double loss_sum = 0.0;
    std::size_t batch_index = 0;

    for (std::size_t begin = 0; begin < total; begin += batch_size, ++batch_index) {
        const std::size_t end = std::min(begin + batch_size, total);
        try {
            Tape tape;
            Tensor batch_obj;
            for (std::size_t k = begin; k < end; ++k) {
                const TrainingInstance& inst = instances[order[k]];
                std::vector<int> candidates;
                candidates.reserve(1 + inst.negatives.size());
                candidates.push_back(inst.target);
                candidates.insert(candidates.end(), inst.negatives.begin(),
                                  inst.negatives.end());
                ForwardResult fw =
                    forward(&tape, corpus, params, inst.user, inst.history, candidates);
                std::span<const Tensor> negs(fw.scores.data() + 1, fw.scores.size() - 1);
                Tensor inst_loss = loss(&tape, fw.scores[0], negs);
                batch_obj = batch_obj.defined() ? add(&tape, batch_obj, inst_loss) : inst_loss;
            }
            if (config.lambda > 0.0) {
                const double fraction =
                    static_cast<double>(end - begin) / static_cast<double>(total);
                batch_obj = add(&tape, batch_obj,
                                scale(&tape, l2_penalty(&tape, params),
                                      config.lambda * fraction));
            }
            const double value = batch_obj.item();
            if (!std::isfinite(value))
                throw TrainError("non-finite loss in epoch " + std::to_string(epoch) +
                                 ", batch " + std::to_string(batch_index));
            tape.backward(batch_obj);
            optimizer.step();
            loss_sum += value;
        } catch (const NumericError& e) {
            throw TrainError("numeric failure in epoch " + std::to_string(epoch) + ", batch " +
                             std::to_string(batch_index) + ": " + e.what());
        }
    }
    return loss_sum / static_cast<double>(total);
}

namespace {

// training instances for one epoch; with a held-out slice the final window
// of every user is dropped from training
std::vector<TrainingInstance> epoch_instances(const Corpus& corpus, const TrainConfig& config,
                                              int history_len, int epoch, bool hold_out_last) {
    const std::uint64_t sampling_seed =
        config.seed + 7919ULL * (static_cast<std::uint64_t>(epoch) + 1);
    std::vector<TrainingInstance> all =
        make_training_instances(corpus, history_len, config.negatives, sampling_seed);
    if (!hold_out_last) return all;
    std::vector<TrainingInstance> kept;
    kept.reserve(all.size());
    for (std::size_t i = 0; i < all.size(); ++i) {
        const bool last_of_user = i + 1 == all.size() || all[i + 1].user != all[i].user;
        if (!last_of_user) kept.push_back(std::move(all[i]));
    }
    return kept;
}

double validation_loss(const Corpus& corpus, ModelParams& params,
                       const std::vector<TrainingInstance>& held_out) {
    double total = 0.0;
    for (const TrainingInstance& inst : held_out) {
        std::vector<int> candidates;
        candidates.push_back(inst.target);
        candidates.insert(candidates.end(), inst.negatives.begin(), inst.negatives.end());
        ForwardResult fw =
            forward(nullptr, corpus, params, inst.user, inst.history, candidates);
        double value = -std::log(std::max(fw.scores[0].item(), kLogFloor));
        for (std::size_t i = 1; i < fw.scores.size(); ++i)
            value += -std::log(std::max(1.0 - fw.scores[i].item(), kLogFloor));
        total += value;
    }
    return held_out.empty() ? 0.0 : total / static_cast<double>(held_out.size());
}

}  // namespace

std::vector<double> train(const Corpus& corpus, ModelParams& params, const TrainConfig& config,
                          const TrainHooks& hooks) {
    config.validate();
    const int history_len = params.config.history_len;
    const bool hold_out = config.patience > 0;

    std::vector<TrainingInstance> held_out;
    if (hold_out) {
        std::vector<TrainingInstance> all = make_training_instances(
            corpus, history_len, config.negatives, config.seed ^ 0x9e3779b97f4a7c15ULL);
        for (std::size_t i = 0; i < all.size(); ++i) {
            const bool last_of_user = i + 1 == all.size() || all[i + 1].user != all[i].user;
            if (last_of_user) held_out.push_back(std::move(all[i]));
        }
    }

    AdamOptimizer optimizer(params, config);
    std::vector<double> epoch_losses;
    double best_validation = std::numeric_limits<double>::infinity();
    int stale_epochs = 0;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const auto started = std::chrono::steady_clock::now();
        std::vector<TrainingInstance> instances =
            epoch_instances(corpus, config, history_len, epoch, hold_out);
        if (instances.empty())
            throw TrainError("no training instances left after holding out the last items");
        const double mean_loss =
            train_epoch(instances, corpus, params, optimizer, config, epoch);
        epoch_losses.push_back(mean_loss);

        EpochLog log;
        log.epoch = epoch + 1;
        log.mean_loss = mean_loss;
        log.lr = config.learning_rate;
        log.wall_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - started)
                          .count();
        if (hold_out) {
            log.validation_loss = validation_loss(corpus, params, held_out);
            log.has_validation = true;
        }
        if (hooks.on_epoch) hooks.on_epoch(log);
        if (hooks.on_epoch_end) hooks.on_epoch_end(epoch + 1, params);

        if (hold_out) {
            if (log.validation_loss < best_validation - 1e-12) {
                best_validation = log.validation_loss;
                stale_epochs = 0;
            } else if (++stale_epochs >= config.patience) {
                break;
            }
        }
    }
    return epoch_losses;
}

}  // namespace rns
