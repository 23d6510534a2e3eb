#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rns/corpus.hpp"
#include "rns/ops.hpp"
#include "rns/tensor.hpp"

namespace rns {

// The network scores a candidate item j for user u as sigmoid(p_u . q_j)
// with p_u = p_l + alpha * p_s: a long-term vector pooled from the user's
// review document plus a short-term vector built from the L most recent
// items through attention at union level (weighted sum) and individual
// level (pointer pick), fused by a second, candidate-conditioned softmax.
//
// `filters` is the single representation width shared by p_l, q, position
// embeddings and the score; `embed_dim` is the independent word-embedding
// width feeding the convolutional encoders.

struct ModelConfig {
    int embed_dim = 25;  // word embedding width (d)
    int aspects = 5;     // K
    int filters = 10;    // n: filter count == representation width
    std::vector<int> filter_heights = {1, 3, 5, 7, 9};
    int history_len = 5;  // L
    double alpha = 0.1;   // short-term fusion weight
    bool use_union = true;
    bool use_individual = true;
    bool use_position = true;
    bool use_aspects = true;
    bool shared_word_emb = false;

    /// Channels of the stacked per-aspect embedding tensor.
    int channels() const { return use_aspects ? aspects : 1; }
    /// Height of filter k; the n filters are split evenly across the
    /// distinct heights, in order.
    int filter_height(int k) const;
    int max_filter_height() const;
    void validate(int doc_len) const;
};

/// Every trainable tensor of the network. Handles are shared: the optimizer,
/// tapes and checkpoints all address the same storage.
struct ModelParams {
    ModelConfig config;
    int vocab_size = 0;

    Tensor user_word_emb;  // [V x d]
    Tensor item_word_emb;  // same handle as user_word_emb when shared
    std::vector<Tensor> user_aspect_tf;  // K x [d x d]; empty without aspects
    std::vector<Tensor> item_aspect_tf;
    std::vector<Tensor> user_filter;  // n x [h_k x d x channels]
    std::vector<Tensor> item_filter;
    Tensor user_bias;  // [n]
    Tensor item_bias;  // [n]
    Tensor position_emb;  // [L x n]; undefined when use_position is false

    /// Glorot-uniform init (biases and position embeddings start at zero),
    /// deterministic under the seed.
    static ModelParams init(const ModelConfig& config, int vocab_size, std::uint64_t seed);

    /// Visit each distinct trainable tensor once (shared word embeddings are
    /// visited a single time).
    void for_each_parameter(const std::function<void(const std::string&, Tensor&)>& fn);
    void for_each_parameter(const std::function<void(const std::string&, const Tensor&)>& fn) const;
    std::size_t parameter_count() const;
};

enum class Side { User, Item };

/// Document -> representation vector of length n: embed tokens, project
/// through the per-aspect transforms, stack to [l x d x K], then take the
/// max-over-positions response of each convolution filter.
Tensor encode_document(Tape* tape, std::span<const std::int32_t> doc, Side side,
                       const ModelParams& params);

/// Add the position embedding for slot m (0-based, most recent last).
/// Identity when positions are disabled.
Tensor apply_position(Tape* tape, const Tensor& item_vec, int position,
                      const ModelParams& params);

struct UnionAttention {
    Tensor p_s1;                 // [n] weighted sum over unmasked history
    Tensor weights;              // softmax over unmasked slots only
    std::vector<int> positions;  // history index of each weight slot
    /// Weights expanded to length L with exact zeros at masked slots.
    std::vector<double> full_weights(int history_len) const;
};

/// Candidate-conditioned attention over the history: logits are q_j . q_m,
/// masked slots get weight exactly zero and contribute nothing.
UnionAttention union_attention(Tape* tape, std::span<const Tensor> history,
                               std::span<const char> mask, const Tensor& candidate);

struct PointerChoice {
    int position;  // 0-based history slot
    Tensor p_s2;   // the selected history vector
};

/// Pick the history item with the maximum union weight (ties toward the most
/// recent position). The selection index is a constant of differentiation;
/// gradient flows only through the selected vector.
PointerChoice individual_pointer(Tape* tape, const UnionAttention& attention,
                                 std::span<const Tensor> history);

struct LevelMix {
    Tensor p_s;
    double beta_union;
    double beta_individual;
};

/// Second softmax over the two short-term readings, conditioned on the
/// candidate; bypassed when an ablation disables one level.
LevelMix level_attention(Tape* tape, const Tensor& p_s1, const Tensor& p_s2,
                         const Tensor& candidate, const ModelConfig& config);

/// sigmoid((p_l + alpha * p_s) . q_j)
Tensor score(Tape* tape, const Tensor& p_l, const Tensor& p_s, const Tensor& candidate,
             double alpha);

struct CandidateTrace {
    int item = 0;
    std::vector<double> union_weights;  // length L, zeros at masked slots
    int pointer_position = 0;           // 1-based
    double beta_union = 0.0;
    double beta_individual = 0.0;
    double score = 0.0;
};

struct ForwardResult {
    std::vector<Tensor> scores;  // one scalar per candidate
    std::vector<CandidateTrace> traces;  // filled only when requested
};

/// Score every candidate for one (user, history) pair. User and history
/// documents are encoded once; the attention stack is recomputed per
/// candidate because it is candidate-conditioned.
ForwardResult forward(Tape* tape, const Corpus& corpus, const ModelParams& params, int user,
                      std::span<const int> history, std::span<const int> candidates,
                      bool want_traces = false);

/// Per-epoch representation cache for evaluation and inspection: item
/// vectors (before position embeddings) and user long-term vectors.
struct EvalCache {
    std::vector<Tensor> user_long;  // [user_count]
    std::vector<Tensor> item_vec;   // [item_count + 1]; slot 0 is the zero vector
};

EvalCache build_eval_cache(const Corpus& corpus, const ModelParams& params);

/// Tape-free scoring against cached representations; identical math to
/// forward() with identical results.
std::vector<double> score_with_cache(const EvalCache& cache, const ModelParams& params,
                                     int user, std::span<const int> history,
                                     std::span<const int> candidates,
                                     std::vector<CandidateTrace>* traces = nullptr);

/// Checkpoint IO (magic "RNSM"): config, vocab size, then every parameter
/// tensor. Round-trips bit-exactly.
void save_checkpoint(const ModelParams& params, const std::string& path);
ModelParams load_checkpoint(const std::string& path);

}  // namespace rns
