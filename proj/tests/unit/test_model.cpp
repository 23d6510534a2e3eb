#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <rns/error.hpp>
#include <rns/model.hpp>
#include <rns/synthetic.hpp>
#include <rns/training.hpp>

#include "helpers.hpp"
#include "oracles.hpp"

using namespace rns;

namespace {

ModelConfig tiny_config() {
    ModelConfig cfg;
    cfg.embed_dim = 4;
    cfg.aspects = 2;
    cfg.filters = 4;
    cfg.filter_heights = {1, 3};
    cfg.history_len = 3;
    cfg.alpha = 0.1;
    return cfg;
}

// hand corpus for forward(): one user, ten items, 18 distinct review words
// so the vocabulary lands at 20 with PAD and OOV, documents of length 12
Corpus tiny_corpus() {
    std::vector<Interaction> rows;
    for (int i = 0; i < 10; ++i) {
        std::string review;
        if (i == 0) {
            for (int w = 0; w < 18; ++w) review += (w ? " w" : "w") + std::to_string(w);
        } else {
            review = "w" + std::to_string((2 * i) % 18) + " w" +
                     std::to_string((2 * i + 1) % 18) + " w" + std::to_string((3 * i) % 18);
        }
        rows.push_back(testutil::row("u", "item" + std::to_string(i), i, review));
    }
    CorpusOptions opts;
    opts.doc_len = 12;
    opts.min_count = 1;
    return Corpus::build(rows, opts);
}

}  // namespace

TEST_SUITE_BEGIN("model");

TEST_CASE("config validation rejects each invariant violation") {
    const int doc_len = 12;
    ModelConfig ok = tiny_config();
    CHECK_NOTHROW(ok.validate(doc_len));

    ModelConfig bad = ok;
    bad.filters = 5;  // not divisible by two heights
    CHECK_THROWS_AS(bad.validate(doc_len), ConfigError);

    bad = ok;
    bad.filter_heights = {1, 15};
    CHECK_THROWS_AS(bad.validate(doc_len), ConfigError);  // taller than the document

    bad = ok;
    bad.use_union = false;
    bad.use_individual = false;
    CHECK_THROWS_AS(bad.validate(doc_len), ConfigError);

    bad = ok;
    bad.embed_dim = 0;
    CHECK_THROWS_AS(bad.validate(doc_len), ConfigError);

    bad = ok;
    bad.alpha = -0.5;
    CHECK_THROWS_AS(bad.validate(doc_len), ConfigError);
}

TEST_CASE("filter heights split evenly across the distinct sizes") {
    ModelConfig cfg;
    cfg.filters = 10;
    cfg.filter_heights = {1, 3, 5, 7, 9};
    // two filters per size
    CHECK(cfg.filter_height(0) == 1);
    CHECK(cfg.filter_height(1) == 1);
    CHECK(cfg.filter_height(2) == 3);
    CHECK(cfg.filter_height(8) == 9);
    CHECK(cfg.filter_height(9) == 9);
}

TEST_CASE("parameter counts follow the config, per ablation") {
    const int v = 50;
    auto count_for = [&](const ModelConfig& cfg) {
        return ModelParams::init(cfg, v, 1).parameter_count();
    };
    ModelConfig cfg = tiny_config();
    const int d = cfg.embed_dim, k = cfg.aspects, n = cfg.filters, l = cfg.history_len;
    int height_sum = 0;
    for (int f = 0; f < n; ++f) height_sum += cfg.filter_height(f);

    const std::size_t full = count_for(cfg);
    const std::size_t expected_full = 2ull * v * d + 2ull * k * d * d +
                                      2ull * static_cast<std::size_t>(height_sum) * d * k +
                                      2ull * n + static_cast<std::size_t>(l) * n;
    CHECK(full == expected_full);

    ModelConfig no_pos = cfg;
    no_pos.use_position = false;
    CHECK(full - count_for(no_pos) == static_cast<std::size_t>(l) * n);

    ModelConfig no_aspect = cfg;
    no_aspect.use_aspects = false;
    // the 2*K*d*d transforms disappear and the filters drop to one channel
    const std::size_t transform_removed = 2ull * k * d * d;
    const std::size_t filter_shrink = 2ull * static_cast<std::size_t>(height_sum) * d * (k - 1);
    CHECK(full - count_for(no_aspect) == transform_removed + filter_shrink);

    ModelConfig shared = cfg;
    shared.shared_word_emb = true;
    CHECK(full - count_for(shared) == static_cast<std::size_t>(v) * d);

    // flags that only reroute the graph do not change the count
    ModelConfig no_union = cfg;
    no_union.use_union = false;
    CHECK(count_for(no_union) == full);
}

TEST_CASE("init: deterministic under seed, zero biases and positions") {
    ModelConfig cfg = tiny_config();
    ModelParams a = ModelParams::init(cfg, 30, 9);
    ModelParams b = ModelParams::init(cfg, 30, 9);
    CHECK(testutil::snapshot(a) == testutil::snapshot(b));
    ModelParams c = ModelParams::init(cfg, 30, 10);
    CHECK(testutil::snapshot(a) != testutil::snapshot(c));

    for (double x : a.user_bias.data()) CHECK(x == 0.0);
    for (double x : a.item_bias.data()) CHECK(x == 0.0);
    for (double x : a.position_emb.data()) CHECK(x == 0.0);

    ModelConfig sharedc = cfg;
    sharedc.shared_word_emb = true;
    ModelParams s = ModelParams::init(sharedc, 30, 9);
    CHECK(s.user_word_emb.id() == s.item_word_emb.id());
}

TEST_CASE("encode_document: all-PAD document with zero parameters is the zero vector") {
    ModelConfig cfg = tiny_config();
    ModelParams params = ModelParams::init(cfg, 20, 3);
    testutil::zero_all_parameters(params);
    std::vector<std::int32_t> doc(12, Vocabulary::kPad);
    Tensor out = encode_document(nullptr, doc, Side::User, params);
    REQUIRE(out.shape() == std::vector<int>{cfg.filters});
    for (double v : out.data()) CHECK(v == 0.0);
}

TEST_CASE("encode_document: hand oracle with identity aspects and a unit h=1 filter") {
    ModelConfig cfg;
    cfg.embed_dim = 3;
    cfg.aspects = 1;
    cfg.use_aspects = false;  // fixed identity transform, single channel
    cfg.filters = 1;
    cfg.filter_heights = {1};
    cfg.history_len = 1;
    ModelParams params = ModelParams::init(cfg, 5, 1);

    // rows of the embedding table chosen by hand
    auto emb = params.user_word_emb.data();
    const double table[5][3] = {
        {0, 0, 0}, {0, 0, 0}, {1, 2, 3}, {-1, 0, 0.5}, {0.25, 0.25, 0.25}};
    for (int r = 0; r < 5; ++r)
        for (int c = 0; c < 3; ++c) emb[static_cast<std::size_t>(r) * 3 + c] = table[r][c];
    std::fill(params.user_filter[0].data().begin(), params.user_filter[0].data().end(), 1.0);
    params.user_bias.data()[0] = 0.0;

    // with unit weights each position responds with its row sum:
    // 6, -0.5, 0.75 -> ReLU then max = 6
    std::vector<std::int32_t> doc = {2, 3, 4};
    Tensor out = encode_document(nullptr, doc, Side::User, params);
    CHECK(out.data()[0] == doctest::Approx(6.0));
}

TEST_CASE("encode_document: output length equals the filter count") {
    for (int n : {10, 25}) {
        ModelConfig cfg;
        cfg.embed_dim = 5;
        cfg.aspects = 2;
        cfg.filters = n;
        cfg.filter_heights = {1, 3, 5, 7, 9};
        cfg.history_len = 2;
        if (n % 5 != 0) continue;
        ModelParams params = ModelParams::init(cfg, 15, 2);
        std::vector<std::int32_t> doc(11, 3);
        Tensor out = encode_document(nullptr, doc, Side::Item, params);
        CHECK(out.shape() == std::vector<int>{n});
    }
}

TEST_CASE("apply_position: adds the row, identity for zero table or disabled flag") {
    ModelConfig cfg = tiny_config();
    ModelParams params = ModelParams::init(cfg, 20, 5);
    Tensor vec({cfg.filters}, {0.5, -1.0, 2.0, 0.0});

    // zero-initialized table leaves the vector unchanged
    Tensor same = apply_position(nullptr, vec, 1, params);
    for (std::size_t i = 0; i < vec.size(); ++i) CHECK(same.data()[i] == vec.data()[i]);

    auto table = params.position_emb.data();
    for (std::size_t i = 0; i < table.size(); ++i) table[i] = 0.125 * static_cast<double>(i);
    Tensor shifted = apply_position(nullptr, vec, 2, params);
    for (int j = 0; j < cfg.filters; ++j)
        CHECK(shifted.data()[static_cast<std::size_t>(j)] ==
              doctest::Approx(vec.data()[static_cast<std::size_t>(j)] +
                              table[static_cast<std::size_t>(2 * cfg.filters + j)]));

    ModelConfig off = cfg;
    off.use_position = false;
    ModelParams params_off = ModelParams::init(off, 20, 5);
    Tensor untouched = apply_position(nullptr, vec, 2, params_off);
    CHECK(untouched.id() == vec.id());
}

TEST_CASE("union_attention: symmetry, masking, single slot, errors") {
    const int n = 4;
    Tensor a({n}, {1, 0, 0, 0});
    Tensor b({n}, {1, 0, 0, 0});
    Tensor c({n}, {1, 0, 0, 0});
    Tensor q({n}, {0.3, 0.7, 0, 0});
    std::vector<Tensor> history = {a, b, c};

    SUBCASE("identical vectors get uniform weights") {
        std::vector<char> mask = {1, 1, 1};
        UnionAttention ua = union_attention(nullptr, history, mask, q);
        auto full = ua.full_weights(3);
        for (double w : full) CHECK(w == doctest::Approx(1.0 / 3.0));
        for (int j = 0; j < n; ++j)
            CHECK(ua.p_s1.data()[static_cast<std::size_t>(j)] ==
                  doctest::Approx(a.data()[static_cast<std::size_t>(j)]));
    }

    SUBCASE("masked positions get weight exactly zero and contribute nothing") {
        Tensor poisoned({n}, {1e6, 1e6, 1e6, 1e6});
        std::vector<Tensor> hist = {a, poisoned, c};
        std::vector<char> mask = {1, 0, 1};
        UnionAttention ua = union_attention(nullptr, hist, mask, q);
        auto full = ua.full_weights(3);
        CHECK(full[1] == 0.0);
        CHECK(full[0] == doctest::Approx(0.5));
        CHECK(full[2] == doctest::Approx(0.5));
        for (int j = 0; j < n; ++j)
            CHECK(ua.p_s1.data()[static_cast<std::size_t>(j)] ==
                  doctest::Approx(a.data()[static_cast<std::size_t>(j)]));
    }

    SUBCASE("a single unmasked slot carries all the weight") {
        std::vector<char> mask = {0, 1, 0};
        UnionAttention ua = union_attention(nullptr, history, mask, q);
        CHECK(ua.positions == std::vector<int>{1});
        CHECK(ua.weights.data()[0] == 1.0);
        auto full = ua.full_weights(3);
        CHECK(full[0] == 0.0);
        CHECK(full[1] == 1.0);
    }

    SUBCASE("a candidate orthogonal to the history gives uniform weights") {
        Tensor d1({n}, {1, 0, 0, 0});
        Tensor d2({n}, {0, 1, 0, 0});
        Tensor d3({n}, {0, 0, 1, 0});
        Tensor qo({n}, {0, 0, 0, 5.0});
        std::vector<Tensor> hist = {d1, d2, d3};
        std::vector<char> mask = {1, 1, 1};
        UnionAttention ua = union_attention(nullptr, hist, mask, qo);
        auto full = ua.full_weights(3);
        for (double w : full) CHECK(w == doctest::Approx(1.0 / 3.0));
    }

    SUBCASE("all-masked history is an error") {
        std::vector<char> mask = {0, 0, 0};
        CHECK_THROWS_AS(union_attention(nullptr, history, mask, q), ContractError);
    }
}

TEST_CASE("individual_pointer: argmax, recency tie-break, scaling invariance") {
    const int n = 2;
    std::vector<Tensor> history;
    for (int i = 0; i < 5; ++i)
        history.push_back(Tensor({n}, {static_cast<double>(i), 1.0}));
    std::vector<char> mask = {1, 1, 1, 1, 1};

    SUBCASE("pointer picks the maximum attention weight") {
        // logits 0..4 scaled: weight peaks at the last slot; build a crafted
        // weight profile instead through a candidate aligned with slot 2
        Tensor q({n}, {0.0, 1.0});
        std::vector<Tensor> crafted = {
            Tensor({n}, {0, 0.1}), Tensor({n}, {0, 0.2}), Tensor({n}, {0, 0.4}),
            Tensor({n}, {0, 0.2}), Tensor({n}, {0, 0.1})};
        UnionAttention ua = union_attention(nullptr, crafted, mask, q);
        PointerChoice pc = individual_pointer(nullptr, ua, crafted);
        CHECK(pc.position == 2);  // m_u = 3 when counted 1-based
        CHECK(pc.p_s2.id() == crafted[2].id());

        // scaling all logits by a positive constant keeps the argmax
        Tensor q_scaled({n}, {0.0, 7.5});
        UnionAttention ua2 = union_attention(nullptr, crafted, mask, q_scaled);
        PointerChoice pc2 = individual_pointer(nullptr, ua2, crafted);
        CHECK(pc2.position == 2);
    }

    SUBCASE("uniform weights break toward the most recent position") {
        Tensor q({n}, {0.0, 1.0});
        std::vector<Tensor> same(5, Tensor({n}, {0.2, 0.3}));
        UnionAttention ua = union_attention(nullptr, same, mask, q);
        PointerChoice pc = individual_pointer(nullptr, ua, same);
        CHECK(pc.position == 4);  // m_u = 5, most recent
    }

    SUBCASE("a single unmasked slot is the pointer") {
        Tensor q({n}, {1.0, 0.0});
        std::vector<char> only = {0, 0, 1, 0, 0};
        UnionAttention ua = union_attention(nullptr, history, only, q);
        PointerChoice pc = individual_pointer(nullptr, ua, history);
        CHECK(pc.position == 2);
    }
}

TEST_CASE("level_attention: symmetry, ablation bypass, zero candidate") {
    ModelConfig cfg = tiny_config();
    const int n = cfg.filters;
    Tensor p1({n}, {1, 2, 3, 4});
    Tensor p2({n}, {4, 3, 2, 1});
    Tensor q({n}, {0.5, 0.5, 0.5, 0.5});

    SUBCASE("equal level vectors split the weight evenly") {
        LevelMix mix = level_attention(nullptr, p1, p1, q, cfg);
        CHECK(mix.beta_union == doctest::Approx(0.5));
        CHECK(mix.beta_individual == doctest::Approx(0.5));
        for (int j = 0; j < n; ++j)
            CHECK(mix.p_s.data()[static_cast<std::size_t>(j)] ==
                  doctest::Approx(p1.data()[static_cast<std::size_t>(j)]));
    }

    SUBCASE("disabling the individual level returns the union vector exactly") {
        ModelConfig no_ind = cfg;
        no_ind.use_individual = false;
        LevelMix mix = level_attention(nullptr, p1, p2, q, no_ind);
        CHECK(mix.p_s.id() == p1.id());
        CHECK(mix.beta_union == 1.0);
    }

    SUBCASE("disabling the union level returns the pointer vector exactly") {
        ModelConfig no_union = cfg;
        no_union.use_union = false;
        LevelMix mix = level_attention(nullptr, p1, p2, q, no_union);
        CHECK(mix.p_s.id() == p2.id());
        CHECK(mix.beta_individual == 1.0);
    }

    SUBCASE("zero candidate gives the midpoint") {
        Tensor zero({n});
        LevelMix mix = level_attention(nullptr, p1, p2, zero, cfg);
        CHECK(mix.beta_union == doctest::Approx(0.5));
        for (int j = 0; j < n; ++j)
            CHECK(mix.p_s.data()[static_cast<std::size_t>(j)] ==
                  doctest::Approx(0.5 * (p1.data()[static_cast<std::size_t>(j)] +
                                         p2.data()[static_cast<std::size_t>(j)])));
    }
}

TEST_CASE("score: sigmoid fusion examples") {
    const int n = 2;
    Tensor zero({n});
    Tensor q({n}, {3.0, -1.0});

    // alpha = 0 with a zero long-term vector scores exactly one half
    Tensor some({n}, {0.4, 0.8});
    CHECK(score(nullptr, zero, some, q, 0.0).item() == doctest::Approx(0.5));

    // alpha = 0 ignores the short-term vector entirely
    Tensor p_l({n}, {0.2, 0.1});
    Tensor other({n}, {-5.0, 9.0});
    CHECK(score(nullptr, p_l, some, q, 0.0).item() ==
          score(nullptr, p_l, other, q, 0.0).item());

    // closed form: sigma(1)
    Tensor pl2({n}, {1.0, 0.0});
    Tensor ps2({n});
    Tensor qj({n}, {1.0, 0.0});
    CHECK(score(nullptr, pl2, ps2, qj, 0.1).item() ==
          doctest::Approx(1.0 / (1.0 + std::exp(-1.0))).epsilon(1e-12));
}

TEST_CASE("forward: sigmoid range, per-candidate independence, uniform symmetry") {
    Corpus corpus = tiny_corpus();
    ModelConfig cfg = tiny_config();
    cfg.validate(corpus.doc_len());
    ModelParams params = ModelParams::init(cfg, corpus.vocab().size(), 17);

    std::vector<int> history = {Corpus::kNullItem, 1, 2};
    std::vector<int> candidates = {3, 4, 5, 6};
    ForwardResult fw = forward(nullptr, corpus, params, 0, history, candidates, true);
    REQUIRE(fw.scores.size() == 4);
    for (const Tensor& s : fw.scores) {
        CHECK(s.item() > 0.0);
        CHECK(s.item() < 1.0);
    }
    // masked slot keeps exactly zero weight in every trace
    for (const auto& trace : fw.traces) {
        CHECK(trace.union_weights[0] == 0.0);
        double total = 0.0;
        for (double w : trace.union_weights) total += w;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(trace.pointer_position >= 2);
        CHECK(trace.pointer_position <= 3);
    }

    // permuting the candidate list permutes the scores identically
    std::vector<int> shuffled = {5, 3, 6, 4};
    ForwardResult fw2 = forward(nullptr, corpus, params, 0, history, shuffled);
    CHECK(fw2.scores[0].item() == fw.scores[2].item());
    CHECK(fw2.scores[1].item() == fw.scores[0].item());
    CHECK(fw2.scores[2].item() == fw.scores[3].item());
    CHECK(fw2.scores[3].item() == fw.scores[1].item());

    // identical history items without positions: uniform weights for every candidate
    ModelConfig no_pos = cfg;
    no_pos.use_position = false;
    ModelParams params_np = ModelParams::init(no_pos, corpus.vocab().size(), 17);
    std::vector<int> same_hist = {2, 2, 2};
    ForwardResult fw3 = forward(nullptr, corpus, params_np, 0, same_hist, candidates, true);
    for (const auto& trace : fw3.traces)
        for (double w : trace.union_weights) CHECK(w == doctest::Approx(1.0 / 3.0));

    CHECK_THROWS_AS(
        forward(nullptr, corpus, params, 0, history, std::vector<int>{Corpus::kNullItem}),
        ContractError);
}

TEST_CASE("forward: shape audit over random configurations") {
    Corpus corpus = tiny_corpus();
    std::mt19937_64 rng(404);
    for (int trial = 0; trial < 12; ++trial) {
        ModelConfig cfg;
        cfg.embed_dim = 2 + static_cast<int>(rng() % 4);
        cfg.aspects = 1 + static_cast<int>(rng() % 3);
        std::vector<std::vector<int>> height_choices = {{1}, {1, 3}, {2}, {1, 2, 3}};
        cfg.filter_heights = height_choices[rng() % height_choices.size()];
        const int per = 1 + static_cast<int>(rng() % 3);
        cfg.filters = per * static_cast<int>(cfg.filter_heights.size());
        cfg.history_len = 1 + static_cast<int>(rng() % 4);
        cfg.use_aspects = rng() % 2 == 0;
        cfg.use_position = rng() % 2 == 0;
        cfg.use_union = rng() % 2 == 0;
        cfg.use_individual = cfg.use_union ? rng() % 2 == 0 : true;
        cfg.alpha = 0.1;
        cfg.validate(corpus.doc_len());
        ModelParams params = ModelParams::init(cfg, corpus.vocab().size(), rng());

        std::vector<int> history(static_cast<std::size_t>(cfg.history_len),
                                 Corpus::kNullItem);
        history.back() = 1 + static_cast<int>(rng() % corpus.item_count());
        std::vector<int> candidates = {1 + static_cast<int>(rng() % corpus.item_count())};
        ForwardResult fw = forward(nullptr, corpus, params, 0, history, candidates, true);
        CHECK(fw.scores.size() == 1);
        CHECK(fw.traces[0].union_weights.size() ==
              static_cast<std::size_t>(cfg.history_len));
        Tensor enc = encode_document(nullptr, corpus.user_doc(0), Side::User, params);
        CHECK(enc.shape() == std::vector<int>{cfg.filters});
    }
}

TEST_CASE("end-to-end gradient check on the tiny configuration") {
    Corpus corpus = tiny_corpus();
    REQUIRE(corpus.vocab().size() == 20);
    ModelConfig cfg = tiny_config();
    ModelParams params = ModelParams::init(cfg, corpus.vocab().size(), 23);

    const std::vector<int> history = {Corpus::kNullItem, 1, 2};
    const std::vector<int> candidates = {3, 7, 9};  // target and two negatives
    const double lambda = 0.001;

    auto build = [&](Tape* tape) {
        ForwardResult fw = forward(tape, corpus, params, 0, history, candidates);
        std::span<const Tensor> negs(fw.scores.data() + 1, fw.scores.size() - 1);
        return loss(tape, fw.scores[0], negs, &params, lambda, 1.0);
    };

    std::vector<int> selections;
    Tape tape;
    tape.record_selections(selections);
    Tensor objective = build(&tape);
    tape.backward(objective);
    CHECK(tape.topologically_ordered());

    std::vector<Tensor> tracked;
    params.for_each_parameter(
        [&tracked](const std::string&, Tensor& t) { tracked.push_back(t); });
    auto eval = [&]() {
        Tape probe;
        probe.replay_selections(selections);
        return build(&probe).item();
    };
    auto res = oracle::check_gradients(tracked, eval, 1e-6);
    CHECK(res.checked == params.parameter_count());
    CHECK(res.max_rel_err < 1e-4);
}

TEST_CASE("checkpoint round-trip preserves parameters and scores bitwise") {
    Corpus corpus = tiny_corpus();
    ModelConfig cfg = tiny_config();
    cfg.shared_word_emb = false;
    ModelParams params = ModelParams::init(cfg, corpus.vocab().size(), 31);

    auto dir = testutil::fresh_temp_dir("ckpt");
    const auto path = (dir / "model.rnsm").string();
    save_checkpoint(params, path);
    ModelParams loaded = load_checkpoint(path);

    CHECK(testutil::snapshot(loaded) == testutil::snapshot(params));
    CHECK(loaded.config.filters == cfg.filters);
    CHECK(loaded.config.filter_heights == cfg.filter_heights);
    CHECK(loaded.vocab_size == corpus.vocab().size());

    std::vector<int> history = {1, 2, 3};
    std::vector<int> candidates = {4, 5, 6};
    ForwardResult before = forward(nullptr, corpus, params, 0, history, candidates);
    ForwardResult after = forward(nullptr, corpus, loaded, 0, history, candidates);
    for (std::size_t i = 0; i < before.scores.size(); ++i)
        CHECK(before.scores[i].item() == after.scores[i].item());

    CHECK_THROWS_AS(load_checkpoint((dir / "nope.rnsm").string()), IoError);
}

TEST_CASE("score_with_cache matches forward bitwise") {
    Corpus corpus = tiny_corpus();
    ModelConfig cfg = tiny_config();
    ModelParams params = ModelParams::init(cfg, corpus.vocab().size(), 37);
    EvalCache cache = build_eval_cache(corpus, params);

    std::vector<int> history = {Corpus::kNullItem, 4, 8};
    std::vector<int> candidates = {1, 2, 3, 9};
    ForwardResult direct = forward(nullptr, corpus, params, 0, history, candidates, true);
    std::vector<CandidateTrace> traces;
    std::vector<double> cached =
        score_with_cache(cache, params, 0, history, candidates, &traces);
    REQUIRE(cached.size() == direct.scores.size());
    for (std::size_t i = 0; i < cached.size(); ++i)
        CHECK(cached[i] == direct.scores[i].item());
    for (std::size_t i = 0; i < traces.size(); ++i) {
        CHECK(traces[i].pointer_position == direct.traces[i].pointer_position);
        CHECK(traces[i].union_weights == direct.traces[i].union_weights);
    }
}

TEST_SUITE_END();
