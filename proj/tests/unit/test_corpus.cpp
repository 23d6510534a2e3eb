#include <doctest.h>

#include <algorithm>
#include <set>
#include <unordered_set>

#include <rns/corpus.hpp>
#include <rns/error.hpp>
#include <rns/synthetic.hpp>

#include "helpers.hpp"

using namespace rns;
using testutil::row;

TEST_SUITE_BEGIN("corpus");

TEST_CASE("parse_reviews: empty file, ordering, defaults") {
    auto dir = testutil::fresh_temp_dir("parse");

    testutil::write_file(dir / "empty.jsonl", "");
    auto empty = parse_reviews((dir / "empty.jsonl").string());
    CHECK(empty.interactions.empty());
    CHECK(empty.malformed == 0);

    testutil::write_file(dir / "three.jsonl",
        R"({"reviewerID":"u1","asin":"a","unixReviewTime":30,"reviewText":"late","overall":5.0})"
        "\n"
        R"({"reviewerID":"u2","asin":"b","unixReviewTime":10,"reviewText":"early"})"
        "\n"
        R"({"reviewerID":"u1","asin":"c","unixReviewTime":20})"
        "\n");
    auto three = parse_reviews((dir / "three.jsonl").string());
    REQUIRE(three.interactions.size() == 3);
    CHECK(three.malformed == 0);
    // input order preserved, not timestamp order
    CHECK(three.interactions[0].item == "a");
    CHECK(three.interactions[1].item == "b");
    CHECK(three.interactions[2].item == "c");
    // missing reviewText is an empty string, not an error
    CHECK(three.interactions[2].review.empty());

    CHECK_THROWS_AS(parse_reviews((dir / "missing.jsonl").string()), IoError);
}

TEST_CASE("parse_reviews: malformed lines are counted, majority-bad is fatal") {
    auto dir = testutil::fresh_temp_dir("malformed");
    testutil::write_file(dir / "mixed.jsonl",
        R"({"reviewerID":"u1","asin":"a","unixReviewTime":1,"reviewText":"x"})"
        "\n"
        "this is not json\n"
        R"({"reviewerID":"u1","asin":"b","unixReviewTime":2,"reviewText":"y"})"
        "\n"
        R"({"asin":"missing-user","unixReviewTime":3})"
        "\n"
        R"({"reviewerID":"u1","asin":"c","unixReviewTime":4,"reviewText":"z"})"
        "\n");
    auto mixed = parse_reviews((dir / "mixed.jsonl").string());
    CHECK(mixed.interactions.size() == 3);
    CHECK(mixed.malformed == 2);

    testutil::write_file(dir / "bad.jsonl",
        "garbage\nmore garbage\n"
        R"({"reviewerID":"u1","asin":"a","unixReviewTime":1})"
        "\n");
    CHECK_THROWS_AS(parse_reviews((dir / "bad.jsonl").string()), IoError);
}

TEST_CASE("tokenize: lowercase alnum runs, empty text, OOV fallback") {
    Vocabulary vocab({"the", "price", "is", "low"}, 1);
    auto ids = tokenize("The price is LOW!", vocab);
    REQUIRE(ids.size() == 4);
    CHECK(ids[0] == vocab.index_of("the"));
    CHECK(ids[1] == vocab.index_of("price"));
    CHECK(ids[2] == vocab.index_of("is"));
    CHECK(ids[3] == vocab.index_of("low"));
    for (auto id : ids) CHECK(id >= 2);

    CHECK(tokenize("", vocab).empty());
    CHECK(tokenize("unseen", vocab) == std::vector<std::int32_t>{Vocabulary::kOov});
    CHECK(tokenize("it's low-price!!", vocab).size() == 4);  // it, s, low, price
}

TEST_CASE("build_corpus: chronological split with ceil and tie-break by input order") {
    // ten identical timestamps: train must take the first 7 in input order
    std::vector<Interaction> rows;
    for (int i = 0; i < 10; ++i)
        rows.push_back(row("u", "item" + std::to_string(i), 100, "w"));
    CorpusOptions opts;
    opts.min_user_interactions = 10;
    opts.doc_len = 20;
    opts.min_count = 1;
    Corpus c = Corpus::build(rows, opts);
    REQUIRE(c.user_count() == 1);
    const auto& train = c.train_seq(0);
    const auto& test = c.test_seq(0);
    REQUIRE(train.size() == 7);
    REQUIRE(test.size() == 3);
    for (int i = 0; i < 7; ++i) CHECK(c.item_name(train[static_cast<std::size_t>(i)]) ==
                                      "item" + std::to_string(i));
    CHECK(c.item_name(test[0]) == "item7");
}

TEST_CASE("build_corpus: filters light users, errors when all filtered") {
    auto heavy = testutil::one_user_rows("heavy", 12, "alpha");
    auto light = testutil::one_user_rows("light", 4, "beta");
    std::vector<Interaction> rows = heavy;
    rows.insert(rows.end(), light.begin(), light.end());
    CorpusOptions opts;
    opts.doc_len = 16;
    opts.min_count = 1;
    Corpus c = Corpus::build(rows, opts);
    CHECK(c.user_count() == 1);
    CHECK(c.user_id("heavy") == 0);
    CHECK(c.user_id("light") == -1);

    CHECK_THROWS_AS(Corpus::build(light, opts), IoError);
    CHECK_THROWS_AS(Corpus::build(std::vector<Interaction>{}, opts), IoError);
}

TEST_CASE("build_corpus: id round-trips, interaction accounting, exact sparsity") {
    SyntheticOptions gen;
    gen.users = 4;
    gen.items = 30;
    gen.history_len = 2;
    gen.pattern_strength = 0.8;
    gen.seed = 3;
    gen.seq_len = 12;
    auto rows = generate_synthetic(gen);
    CorpusOptions opts;
    opts.doc_len = 24;
    opts.min_count = 1;
    Corpus c = Corpus::build(rows, opts);

    for (int u = 0; u < c.user_count(); ++u) CHECK(c.user_id(c.user_name(u)) == u);
    for (int i = 1; i <= c.item_count(); ++i) CHECK(c.item_id(c.item_name(i)) == i);

    std::int64_t counted = 0;
    for (int u = 0; u < c.user_count(); ++u)
        counted += static_cast<std::int64_t>(c.train_seq(u).size() + c.test_seq(u).size());
    CHECK(counted == c.stats().interactions);
    CHECK(c.stats().users == 4);
    CHECK(c.stats().interactions == 48);

    const double expected_sparsity =
        1.0 - static_cast<double>(c.stats().interactions) /
                  (static_cast<double>(c.stats().users) * c.stats().items);
    CHECK(c.stats().sparsity == expected_sparsity);
    CHECK(c.stats().avg_actions_per_user ==
          static_cast<double>(c.stats().interactions) / c.stats().users);

    // documents never hold indices outside the vocabulary
    for (int u = 0; u < c.user_count(); ++u)
        for (auto t : c.user_doc(u)) CHECK(t < c.vocab().size());
    for (int i = 0; i <= c.item_count(); ++i)
        for (auto t : c.item_doc(i)) CHECK(t < c.vocab().size());
    for (auto t : c.item_doc(Corpus::kNullItem)) CHECK(t == Vocabulary::kPad);
}

TEST_CASE("build_corpus: documents and vocabulary come from train-period reviews only") {
    std::vector<Interaction> rows;
    for (int i = 0; i < 7; ++i)
        rows.push_back(row("u", "item" + std::to_string(i), i, "trainword"));
    for (int i = 7; i < 10; ++i)
        rows.push_back(row("u", "item" + std::to_string(i), i, "leakword"));
    CorpusOptions opts;
    opts.doc_len = 16;
    opts.min_count = 1;
    Corpus c = Corpus::build(rows, opts);
    CHECK(c.vocab().index_of("trainword") >= 2);
    CHECK(c.vocab().index_of("leakword") == Vocabulary::kOov);
    // item from the test period has an all-PAD document
    const int test_item = c.item_id("item8");
    REQUIRE(test_item > 0);
    for (auto t : c.item_doc(test_item)) CHECK(t == Vocabulary::kPad);
    // the user document holds only train-period tokens
    const auto train_tok = c.vocab().index_of("trainword");
    for (auto t : c.user_doc(0)) CHECK((t == train_tok || t == Vocabulary::kPad));
}

TEST_CASE("vocabulary: min_count threshold with protected PAD/OOV") {
    std::vector<Interaction> rows;
    for (int i = 0; i < 10; ++i)
        rows.push_back(row("u", "item" + std::to_string(i), i,
                           i < 2 ? "common common rare" : "common common"));
    CorpusOptions opts;
    opts.doc_len = 30;
    opts.min_count = 5;
    Corpus c = Corpus::build(rows, opts);
    // "common" appears 14 times in the train period, "rare" only twice
    CHECK(c.vocab().index_of("common") >= 2);
    CHECK(c.vocab().index_of("rare") == Vocabulary::kOov);
}

TEST_CASE("make_training_instances: windowing, padding, counts") {
    // hand corpus: one user, train seq of 7 (10 * 0.7)
    auto rows = testutil::one_user_rows("u", 10, "w");
    CorpusOptions opts;
    opts.doc_len = 8;
    opts.min_count = 1;
    Corpus c = Corpus::build(rows, opts);
    REQUIRE(c.train_seq(0).size() == 7);

    SUBCASE("user with 7 train items yields 6 instances") {
        auto instances = make_training_instances(c, 5, 1, 9);
        CHECK(instances.size() == 6);
    }

    SUBCASE("history windows are left-padded and chronological") {
        auto instances = make_training_instances(c, 2, 1, 9);
        REQUIRE(instances.size() == 6);
        const auto& train = c.train_seq(0);
        // first instance: [null, s0] -> s1
        CHECK(instances[0].history == std::vector<int>{Corpus::kNullItem, train[0]});
        CHECK(instances[0].target == train[1]);
        // second instance: [s0, s1] -> s2
        CHECK(instances[1].history == std::vector<int>{train[0], train[1]});
        CHECK(instances[1].target == train[2]);
    }
}

TEST_CASE("make_training_instances: negative constraints and determinism") {
    SyntheticOptions gen;
    gen.users = 3;
    gen.items = 40;
    gen.history_len = 3;
    gen.pattern_strength = 0.5;
    gen.seed = 5;
    gen.seq_len = 14;
    CorpusOptions opts;
    opts.doc_len = 20;
    opts.min_count = 1;
    Corpus c = Corpus::build(generate_synthetic(gen), opts);

    auto a = make_training_instances(c, 3, 4, 77);
    auto b = make_training_instances(c, 3, 4, 77);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].negatives == b[i].negatives);
        CHECK(a[i].history == b[i].history);
        CHECK(a[i].target == b[i].target);

        const auto& train = c.train_seq(a[i].user);
        std::unordered_set<int> train_set(train.begin(), train.end());
        std::set<int> negs(a[i].negatives.begin(), a[i].negatives.end());
        CHECK(negs.size() == a[i].negatives.size());  // without replacement
        for (int n : a[i].negatives) {
            CHECK(train_set.count(n) == 0);
            CHECK(n != Corpus::kNullItem);
        }
        CHECK(negs.count(a[i].target) == 0);
    }

    auto c2 = make_training_instances(c, 3, 4, 78);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.size() && !any_diff; ++i)
        any_diff = a[i].negatives != c2[i].negatives;
    CHECK(any_diff);  // a different seed actually changes the draws

    CHECK_THROWS_AS(make_training_instances(c, 3, c.item_count(), 1), ConfigError);
}

TEST_CASE("make_test_instances: candidate shapes per protocol") {
    SyntheticOptions gen;
    gen.users = 40;
    gen.items = 150;
    gen.history_len = 1;
    gen.pattern_strength = 0.7;
    gen.seed = 11;
    gen.seq_len = 10;  // train 7, test 3
    CorpusOptions opts;
    opts.doc_len = 20;
    opts.min_count = 1;
    Corpus c = Corpus::build(generate_synthetic(gen), opts);

    auto per_user = make_test_instances(c, 3, 100, 5, Protocol::PerUser);
    REQUIRE(per_user.size() == 40);
    for (const auto& inst : per_user) {
        const auto& test = c.test_seq(inst.user);
        std::set<int> distinct(test.begin(), test.end());
        CHECK(inst.relevant.size() == distinct.size());
        CHECK(inst.candidates.size() == inst.relevant.size() + 100);
        // a user with 3 distinct test items ranks 103 candidates
        if (distinct.size() == 3) CHECK(inst.candidates.size() == 103);
    }

    auto per_step = make_test_instances(c, 3, 100, 5, Protocol::PerStep);
    CHECK(per_step.size() == 120);  // 3 test positions for each of 40 users
    for (const auto& inst : per_step) {
        CHECK(inst.relevant.size() == 1);
        CHECK(inst.candidates.size() == 101);
    }

    // candidates are unique and negatives avoid the whole sequence
    for (const auto& inst : per_step) {
        std::set<int> uniq(inst.candidates.begin(), inst.candidates.end());
        CHECK(uniq.size() == inst.candidates.size());
        const auto& train = c.train_seq(inst.user);
        const auto& test = c.test_seq(inst.user);
        std::unordered_set<int> whole(train.begin(), train.end());
        whole.insert(test.begin(), test.end());
        for (std::size_t k = 1; k < inst.candidates.size(); ++k)
            CHECK(whole.count(inst.candidates[k]) == 0);
    }

    // per-step histories may span the train/test boundary
    const auto& train0 = c.train_seq(per_step[1].user);
    const auto& test0 = c.test_seq(per_step[1].user);
    std::vector<int> expect = {train0[train0.size() - 2], train0.back(), test0[0]};
    CHECK(per_step[1].history == expect);

    // determinism under a fixed seed
    auto again = make_test_instances(c, 3, 100, 5, Protocol::PerStep);
    for (std::size_t i = 0; i < per_step.size(); ++i)
        CHECK(per_step[i].candidates == again[i].candidates);

    CHECK_THROWS_AS(make_test_instances(c, 3, 1000, 5, Protocol::PerStep), ConfigError);
}

TEST_CASE("corpus cache round-trips through the RNSC format") {
    SyntheticOptions gen;
    gen.users = 3;
    gen.items = 36;
    gen.history_len = 2;
    gen.pattern_strength = 0.6;
    gen.seed = 21;
    gen.seq_len = 11;
    CorpusOptions opts;
    opts.doc_len = 18;
    opts.min_count = 2;
    Corpus c = Corpus::build(generate_synthetic(gen), opts);

    auto dir = testutil::fresh_temp_dir("cache");
    const auto path = (dir / "corpus.rnsc").string();
    c.save(path);
    Corpus loaded = Corpus::load(path);

    CHECK(loaded.user_count() == c.user_count());
    CHECK(loaded.item_count() == c.item_count());
    CHECK(loaded.doc_len() == c.doc_len());
    CHECK(loaded.vocab().size() == c.vocab().size());
    CHECK(loaded.vocab().min_count() == c.vocab().min_count());
    CHECK(loaded.stats().interactions == c.stats().interactions);
    CHECK(loaded.stats().sparsity == c.stats().sparsity);
    for (int u = 0; u < c.user_count(); ++u) {
        CHECK(loaded.user_name(u) == c.user_name(u));
        CHECK(loaded.train_seq(u) == c.train_seq(u));
        CHECK(loaded.test_seq(u) == c.test_seq(u));
        CHECK(std::equal(loaded.user_doc(u).begin(), loaded.user_doc(u).end(),
                         c.user_doc(u).begin()));
    }
    for (int i = 0; i <= c.item_count(); ++i)
        CHECK(std::equal(loaded.item_doc(i).begin(), loaded.item_doc(i).end(),
                         c.item_doc(i).begin()));

    CHECK_THROWS_AS(Corpus::load((dir / "nope.rnsc").string()), IoError);
    testutil::write_file(dir / "junk.rnsc", "not a cache");
    CHECK_THROWS_AS(Corpus::load((dir / "junk.rnsc").string()), IoError);
}

TEST_SUITE_END();
