#include "rns/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "rns/error.hpp"
#include "rns/serialize.hpp"

namespace rns {

int ModelConfig::filter_height(int k) const {
    const int per_height = filters / static_cast<int>(filter_heights.size());
    const int idx = std::min(k / per_height, static_cast<int>(filter_heights.size()) - 1);
    return filter_heights[static_cast<std::size_t>(idx)];
}

int ModelConfig::max_filter_height() const {
    return *std::max_element(filter_heights.begin(), filter_heights.end());
}

void ModelConfig::validate(int doc_len) const {
    if (embed_dim < 1) throw ConfigError("embed_dim must be at least 1");
    if (aspects < 1) throw ConfigError("aspects must be at least 1");
    if (filters < 1) throw ConfigError("filters must be at least 1");
    if (history_len < 1) throw ConfigError("history_len must be at least 1");
    if (filter_heights.empty()) throw ConfigError("filter_heights must not be empty");
    for (int h : filter_heights)
        if (h < 1) throw ConfigError("filter heights must be positive");
    if (filters % static_cast<int>(filter_heights.size()) != 0)
        throw ConfigError("filter count " + std::to_string(filters) +
                          " must divide evenly across " +
                          std::to_string(filter_heights.size()) + " filter heights");
    if (doc_len < max_filter_height())
        throw ConfigError("document length " + std::to_string(doc_len) +
                          " is shorter than the tallest filter (" +
                          std::to_string(max_filter_height()) + ")");
    if (!use_union && !use_individual)
        throw ConfigError("at least one of the union/individual levels must stay enabled");
    if (!(alpha >= 0.0) || !std::isfinite(alpha))
        throw ConfigError("alpha must be a finite nonnegative value");
}

namespace {

void fill_glorot(Tensor& t, double fan_in, double fan_out, std::mt19937_64& rng) {
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& v : t.data()) v = dist(rng);
}

}  // namespace

ModelParams ModelParams::init(const ModelConfig& config, int vocab_size, std::uint64_t seed) {
    if (vocab_size < 2) throw ConfigError("vocabulary must contain at least PAD and OOV");
    ModelParams p;
    p.config = config;
    p.vocab_size = vocab_size;
    std::mt19937_64 rng(seed);

    const int d = config.embed_dim;
    const int channels = config.channels();

    p.user_word_emb = Tensor({vocab_size, d}, true);
    fill_glorot(p.user_word_emb, vocab_size, d, rng);
    if (config.shared_word_emb) {
        p.item_word_emb = p.user_word_emb;  // same storage
    } else {
        p.item_word_emb = Tensor({vocab_size, d}, true);
        fill_glorot(p.item_word_emb, vocab_size, d, rng);
    }

    if (config.use_aspects) {
        for (int a = 0; a < config.aspects; ++a) {
            Tensor t({d, d}, true);
            fill_glorot(t, d, d, rng);
            p.user_aspect_tf.push_back(t);
        }
        for (int a = 0; a < config.aspects; ++a) {
            Tensor t({d, d}, true);
            fill_glorot(t, d, d, rng);
            p.item_aspect_tf.push_back(t);
        }
    }

    for (int k = 0; k < config.filters; ++k) {
        const int h = config.filter_height(k);
        Tensor t({h, d, channels}, true);
        fill_glorot(t, static_cast<double>(h) * d * channels, 1.0, rng);
        p.user_filter.push_back(t);
    }
    for (int k = 0; k < config.filters; ++k) {
        const int h = config.filter_height(k);
        Tensor t({h, d, channels}, true);
        fill_glorot(t, static_cast<double>(h) * d * channels, 1.0, rng);
        p.item_filter.push_back(t);
    }

    p.user_bias = Tensor({config.filters}, true);
    p.item_bias = Tensor({config.filters}, true);
    if (config.use_position) p.position_emb = Tensor({config.history_len, config.filters}, true);
    return p;
}

void ModelParams::for_each_parameter(const std::function<void(const std::string&, Tensor&)>& fn) {
    fn("user_word_emb", user_word_emb);
    if (!config.shared_word_emb) fn("item_word_emb", item_word_emb);
    for (std::size_t a = 0; a < user_aspect_tf.size(); ++a)
        fn("user_aspect_tf." + std::to_string(a), user_aspect_tf[a]);
    for (std::size_t a = 0; a < item_aspect_tf.size(); ++a)
        fn("item_aspect_tf." + std::to_string(a), item_aspect_tf[a]);
    for (std::size_t k = 0; k < user_filter.size(); ++k)
        fn("user_filter." + std::to_string(k), user_filter[k]);
    for (std::size_t k = 0; k < item_filter.size(); ++k)
        fn("item_filter." + std::to_string(k), item_filter[k]);
    fn("user_bias", user_bias);
    fn("item_bias", item_bias);
    if (position_emb.defined()) fn("position_emb", position_emb);
}

void ModelParams::for_each_parameter(
    const std::function<void(const std::string&, const Tensor&)>& fn) const {
    const_cast<ModelParams*>(this)->for_each_parameter(
        [&fn](const std::string& name, Tensor& t) { fn(name, t); });
}

std::size_t ModelParams::parameter_count() const {
    std::size_t total = 0;
    for_each_parameter([&total](const std::string&, const Tensor& t) { total += t.size(); });
    return total;
}

Tensor encode_document(Tape* tape, std::span<const std::int32_t> doc, Side side,
                       const ModelParams& params) {
    const ModelConfig& cfg = params.config;
    const bool user_side = side == Side::User;
    const Tensor& emb = user_side ? params.user_word_emb : params.item_word_emb;

    Tensor m = rows(tape, emb, doc);  // [l x d]
    Tensor stacked;
    if (cfg.use_aspects) {
        const auto& transforms = user_side ? params.user_aspect_tf : params.item_aspect_tf;
        std::vector<Tensor> per_aspect;
        per_aspect.reserve(transforms.size());
        for (const Tensor& t : transforms) per_aspect.push_back(matmul(tape, m, t));
        stacked = stack_last(tape, per_aspect);
    } else {
        // single channel, fixed identity transform (not trained)
        stacked = reshape(tape, m, {static_cast<int>(doc.size()), cfg.embed_dim, 1});
    }

    const auto& filters = user_side ? params.user_filter : params.item_filter;
    const Tensor& bias = user_side ? params.user_bias : params.item_bias;
    std::vector<Tensor> pooled;
    pooled.reserve(static_cast<std::size_t>(cfg.filters));
    for (int k = 0; k < cfg.filters; ++k) {
        Tensor b = element(tape, bias, k);
        pooled.push_back(conv_max(tape, stacked, filters[static_cast<std::size_t>(k)], b).value);
    }
    return concat_scalars(tape, pooled);
}

Tensor apply_position(Tape* tape, const Tensor& item_vec, int position,
                      const ModelParams& params) {
    if (!params.config.use_position) return item_vec;
    const std::int32_t idx[1] = {static_cast<std::int32_t>(position)};
    Tensor row = reshape(tape, rows(tape, params.position_emb, idx), {params.config.filters});
    return add(tape, item_vec, row);
}

std::vector<double> UnionAttention::full_weights(int history_len) const {
    std::vector<double> full(static_cast<std::size_t>(history_len), 0.0);
    auto w = weights.data();
    for (std::size_t i = 0; i < positions.size(); ++i)
        full[static_cast<std::size_t>(positions[i])] = w[i];
    return full;
}

UnionAttention union_attention(Tape* tape, std::span<const Tensor> history,
                               std::span<const char> mask, const Tensor& candidate) {
    if (history.size() != mask.size())
        throw ContractError("union_attention: history and mask sizes differ");
    UnionAttention out;
    std::vector<Tensor> logits;
    for (std::size_t m = 0; m < history.size(); ++m) {
        if (!mask[m]) continue;
        out.positions.push_back(static_cast<int>(m));
        logits.push_back(dot(tape, candidate, history[m]));
    }
    if (logits.empty()) throw ContractError("union_attention: every history position is masked");

    out.weights = softmax(tape, concat_scalars(tape, logits));
    Tensor acc;
    for (std::size_t i = 0; i < out.positions.size(); ++i) {
        Tensor term = mul_scalar(tape, element(tape, out.weights, static_cast<int>(i)),
                                 history[static_cast<std::size_t>(out.positions[i])]);
        acc = acc.defined() ? add(tape, acc, term) : term;
    }
    out.p_s1 = acc;
    return out;
}

PointerChoice individual_pointer(Tape* tape, const UnionAttention& attention,
                                 std::span<const Tensor> history) {
    const std::size_t slots = attention.positions.size();
    if (slots == 0) throw ContractError("individual_pointer: no attention slots");
    int slot;
    if (tape && tape->replaying()) {
        slot = tape->next_pinned();
        if (slot < 0 || static_cast<std::size_t>(slot) >= slots)
            throw ContractError("individual_pointer: pinned selection out of range");
    } else {
        auto w = attention.weights.data();
        slot = 0;
        // >= pushes ties toward the most recent position
        for (std::size_t i = 1; i < slots; ++i)
            if (w[i] >= w[static_cast<std::size_t>(slot)]) slot = static_cast<int>(i);
        if (tape) tape->note_selection(slot);
    }
    const int position = attention.positions[static_cast<std::size_t>(slot)];
    return {position, history[static_cast<std::size_t>(position)]};
}

LevelMix level_attention(Tape* tape, const Tensor& p_s1, const Tensor& p_s2,
                         const Tensor& candidate, const ModelConfig& config) {
    if (!config.use_individual) return {p_s1, 1.0, 0.0};
    if (!config.use_union) return {p_s2, 0.0, 1.0};
    std::vector<Tensor> logits = {dot(tape, candidate, p_s1), dot(tape, candidate, p_s2)};
    Tensor beta = softmax(tape, concat_scalars(tape, logits));
    Tensor mixed = add(tape, mul_scalar(tape, element(tape, beta, 0), p_s1),
                       mul_scalar(tape, element(tape, beta, 1), p_s2));
    return {mixed, beta.data()[0], beta.data()[1]};
}

Tensor score(Tape* tape, const Tensor& p_l, const Tensor& p_s, const Tensor& candidate,
             double alpha) {
    Tensor fused = add(tape, p_l, scale(tape, p_s, alpha));
    return sigmoid(tape, dot(tape, fused, candidate));
}

namespace {

// shared forward stack once the user/history encodings exist
void score_candidates(Tape* tape, const ModelParams& params, const Tensor& p_l,
                      std::span<const Tensor> history, std::span<const char> mask,
                      const std::function<Tensor(int)>& candidate_vec,
                      std::span<const int> candidates, ForwardResult& out, bool want_traces) {
    const ModelConfig& cfg = params.config;
    for (int c : candidates) {
        Tensor q = candidate_vec(c);
        UnionAttention ua = union_attention(tape, history, mask, q);
        PointerChoice pc = individual_pointer(tape, ua, history);
        LevelMix lm = level_attention(tape, ua.p_s1, pc.p_s2, q, cfg);
        Tensor s = score(tape, p_l, lm.p_s, q, cfg.alpha);
        if (want_traces) {
            CandidateTrace trace;
            trace.item = c;
            trace.union_weights = ua.full_weights(cfg.history_len);
            trace.pointer_position = pc.position + 1;
            trace.beta_union = lm.beta_union;
            trace.beta_individual = lm.beta_individual;
            trace.score = s.item();
            out.traces.push_back(std::move(trace));
        }
        out.scores.push_back(std::move(s));
    }
}

}  // namespace

ForwardResult forward(Tape* tape, const Corpus& corpus, const ModelParams& params, int user,
                      std::span<const int> history, std::span<const int> candidates,
                      bool want_traces) {
    const ModelConfig& cfg = params.config;
    if (static_cast<int>(history.size()) != cfg.history_len)
        throw ContractError("forward: history must hold exactly " +
                            std::to_string(cfg.history_len) + " ids");

    Tensor p_l = encode_document(tape, corpus.user_doc(user), Side::User, params);

    std::vector<Tensor> vecs(history.size());
    std::vector<char> mask(history.size(), 0);
    for (std::size_t m = 0; m < history.size(); ++m) {
        if (history[m] == Corpus::kNullItem) {
            vecs[m] = Tensor({cfg.filters});  // forced zero, masked out downstream
            continue;
        }
        mask[m] = 1;
        Tensor v = encode_document(tape, corpus.item_doc(history[m]), Side::Item, params);
        vecs[m] = apply_position(tape, v, static_cast<int>(m), params);
    }

    ForwardResult out;
    score_candidates(
        tape, params, p_l, vecs, mask,
        [&](int c) {
            if (c == Corpus::kNullItem)
                throw ContractError("forward: the null item cannot be a candidate");
            return encode_document(tape, corpus.item_doc(c), Side::Item, params);
        },
        candidates, out, want_traces);
    return out;
}

EvalCache build_eval_cache(const Corpus& corpus, const ModelParams& params) {
    EvalCache cache;
    cache.user_long.reserve(static_cast<std::size_t>(corpus.user_count()));
    for (int u = 0; u < corpus.user_count(); ++u)
        cache.user_long.push_back(
            encode_document(nullptr, corpus.user_doc(u), Side::User, params));
    cache.item_vec.reserve(static_cast<std::size_t>(corpus.item_count()) + 1);
    cache.item_vec.push_back(Tensor({params.config.filters}));
    for (int i = 1; i <= corpus.item_count(); ++i)
        cache.item_vec.push_back(
            encode_document(nullptr, corpus.item_doc(i), Side::Item, params));
    return cache;
}

std::vector<double> score_with_cache(const EvalCache& cache, const ModelParams& params,
                                     int user, std::span<const int> history,
                                     std::span<const int> candidates,
                                     std::vector<CandidateTrace>* traces) {
    const ModelConfig& cfg = params.config;
    if (static_cast<int>(history.size()) != cfg.history_len)
        throw ContractError("score_with_cache: history must hold exactly " +
                            std::to_string(cfg.history_len) + " ids");

    std::vector<Tensor> vecs(history.size());
    std::vector<char> mask(history.size(), 0);
    for (std::size_t m = 0; m < history.size(); ++m) {
        if (history[m] == Corpus::kNullItem) {
            vecs[m] = Tensor({cfg.filters});
            continue;
        }
        mask[m] = 1;
        vecs[m] = apply_position(nullptr, cache.item_vec[static_cast<std::size_t>(history[m])],
                                 static_cast<int>(m), params);
    }

    ForwardResult result;
    score_candidates(
        nullptr, params, cache.user_long[static_cast<std::size_t>(user)], vecs, mask,
        [&](int c) {
            if (c == Corpus::kNullItem)
                throw ContractError("score_with_cache: the null item cannot be a candidate");
            return cache.item_vec[static_cast<std::size_t>(c)];
        },
        candidates, result, traces != nullptr);
    std::vector<double> scores;
    scores.reserve(result.scores.size());
    for (const Tensor& s : result.scores) scores.push_back(s.item());
    if (traces) *traces = std::move(result.traces);
    return scores;
}

namespace {
constexpr char kCheckpointMagic[4] = {'R', 'N', 'S', 'M'};
constexpr std::uint32_t kCheckpointVersion = 1;
}  // namespace

void save_checkpoint(const ModelParams& params, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint: " + path);
    BinaryWriter w(out);
    w.magic(kCheckpointMagic);
    w.u32(kCheckpointVersion);

    const ModelConfig& cfg = params.config;
    w.u32(static_cast<std::uint32_t>(cfg.embed_dim));
    w.u32(static_cast<std::uint32_t>(cfg.aspects));
    w.u32(static_cast<std::uint32_t>(cfg.filters));
    w.u32(static_cast<std::uint32_t>(cfg.filter_heights.size()));
    for (int h : cfg.filter_heights) w.u32(static_cast<std::uint32_t>(h));
    w.u32(static_cast<std::uint32_t>(cfg.history_len));
    w.f64(cfg.alpha);
    w.u8(cfg.use_union ? 1 : 0);
    w.u8(cfg.use_individual ? 1 : 0);
    w.u8(cfg.use_position ? 1 : 0);
    w.u8(cfg.use_aspects ? 1 : 0);
    w.u8(cfg.shared_word_emb ? 1 : 0);
    w.u32(static_cast<std::uint32_t>(params.vocab_size));

    std::uint32_t count = 0;
    params.for_each_parameter([&count](const std::string&, const Tensor&) { ++count; });
    w.u32(count);
    params.for_each_parameter([&w](const std::string& name, const Tensor& t) {
        w.str(name);
        w.tensor(t);
    });
}

ModelParams load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint: " + path);
    BinaryReader r(in);
    r.expect_magic(kCheckpointMagic, "checkpoint");
    const std::uint32_t version = r.u32();
    if (version != kCheckpointVersion)
        throw IoError("unsupported checkpoint version " + std::to_string(version));

    ModelConfig cfg;
    cfg.embed_dim = static_cast<int>(r.u32());
    cfg.aspects = static_cast<int>(r.u32());
    cfg.filters = static_cast<int>(r.u32());
    const std::uint32_t heights = r.u32();
    cfg.filter_heights.clear();
    for (std::uint32_t i = 0; i < heights; ++i)
        cfg.filter_heights.push_back(static_cast<int>(r.u32()));
    cfg.history_len = static_cast<int>(r.u32());
    cfg.alpha = r.f64();
    cfg.use_union = r.u8() != 0;
    cfg.use_individual = r.u8() != 0;
    cfg.use_position = r.u8() != 0;
    cfg.use_aspects = r.u8() != 0;
    cfg.shared_word_emb = r.u8() != 0;
    const int vocab_size = static_cast<int>(r.u32());

    ModelParams params = ModelParams::init(cfg, vocab_size, 0);
    const std::uint32_t count = r.u32();
    std::uint32_t expected = 0;
    params.for_each_parameter([&expected](const std::string&, Tensor&) { ++expected; });
    if (count != expected)
        throw IoError("checkpoint parameter count mismatch: file has " + std::to_string(count) +
                      ", config implies " + std::to_string(expected));
    params.for_each_parameter([&r](const std::string& name, Tensor& t) {
        const std::string stored = r.str();
        if (stored != name)
            throw IoError("checkpoint parameter order mismatch: expected '" + name +
                          "', found '" + stored + "'");
        Tensor loaded = r.tensor();
        if (loaded.shape() != t.shape())
            throw IoError("checkpoint parameter '" + name + "' has shape " +
                          shape_str(loaded.shape()) + ", expected " + shape_str(t.shape()));
        std::copy(loaded.data().begin(), loaded.data().end(), t.data().begin());
    });
    return params;
}

}  // namespace rns
