#include "rns/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "rns/error.hpp"
#include "rns/serialize.hpp"

namespace rns {

ParsedReviews parse_reviews(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open review file: " + path);

    ParsedReviews out;
    std::string line;
    std::size_t line_no = 0;
    std::size_t warnings_shown = 0;
    auto warn = [&](const std::string& reason) {
        ++out.malformed;
        if (warnings_shown < 10) {
            std::cerr << "warning: " << path << ":" << line_no << ": skipping line (" << reason
                      << ")\n";
            if (++warnings_shown == 10)
                std::cerr << "warning: further malformed-line warnings suppressed\n";
        }
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            warn("not a JSON object");
            continue;
        }
        if (!j.contains("reviewerID") || !j["reviewerID"].is_string() || !j.contains("asin") ||
            !j["asin"].is_string() || !j.contains("unixReviewTime") ||
            !j["unixReviewTime"].is_number()) {
            warn("missing reviewerID/asin/unixReviewTime");
            continue;
        }
        Interaction it;
        it.user = j["reviewerID"].get<std::string>();
        it.item = j["asin"].get<std::string>();
        it.timestamp = j["unixReviewTime"].get<std::int64_t>();
        if (it.user.empty() || it.item.empty() || it.timestamp < 0) {
            warn("empty id or negative timestamp");
            continue;
        }
        if (j.contains("reviewText") && j["reviewText"].is_string())
            it.review = j["reviewText"].get<std::string>();
        out.interactions.push_back(std::move(it));
    }

    if (out.malformed > out.interactions.size())
        throw IoError(path + ": more than half of the lines are malformed (" +
                      std::to_string(out.malformed) + " bad, " +
                      std::to_string(out.interactions.size()) + " good)");
    return out;
}

std::vector<std::string> tokenize_words(const std::string& text) {
    std::vector<std::string> words;
    std::string current;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (!current.empty()) {
            words.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) words.push_back(std::move(current));
    return words;
}

Vocabulary::Vocabulary(std::vector<std::string> tokens, int min_count)
    : tokens_(std::move(tokens)), min_count_(min_count) {
    for (std::size_t i = 0; i < tokens_.size(); ++i)
        index_.emplace(tokens_[i], static_cast<std::int32_t>(i) + 2);
}

std::int32_t Vocabulary::index_of(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? kOov : it->second;
}

std::vector<std::int32_t> tokenize(const std::string& text, const Vocabulary& vocab) {
    std::vector<std::int32_t> ids;
    for (const std::string& w : tokenize_words(text)) ids.push_back(vocab.index_of(w));
    return ids;
}

namespace {

struct UserRows {
    std::vector<std::size_t> rows;  // indexes into the interaction span
};

// fixed-length document: earliest tokens kept, PAD on the right
std::vector<std::int32_t> fit_document(const std::vector<std::int32_t>& tokens, int doc_len) {
    std::vector<std::int32_t> doc(static_cast<std::size_t>(doc_len), Vocabulary::kPad);
    const std::size_t n = std::min<std::size_t>(tokens.size(), static_cast<std::size_t>(doc_len));
    std::copy_n(tokens.begin(), n, doc.begin());
    return doc;
}

}  // namespace

Corpus Corpus::build(std::span<const Interaction> interactions, const CorpusOptions& options) {
    if (interactions.empty()) throw IoError("empty corpus: no interactions to build from");
    if (options.train_ratio <= 0.0 || options.train_ratio >= 1.0)
        throw ConfigError("train_ratio must be in (0,1), got " +
                          std::to_string(options.train_ratio));
    if (options.doc_len < 1) throw ConfigError("doc_len must be positive");
    if (options.min_user_interactions < 1)
        throw ConfigError("min_user_interactions must be positive");

    // group rows per user in input order, then sort chronologically with the
    // input order breaking timestamp ties
    std::vector<std::string> user_order;
    std::unordered_map<std::string, UserRows> by_user;
    for (std::size_t i = 0; i < interactions.size(); ++i) {
        auto [it, inserted] = by_user.try_emplace(interactions[i].user);
        if (inserted) user_order.push_back(interactions[i].user);
        it->second.rows.push_back(i);
    }

    Corpus c;
    c.options_ = options;
    c.item_names_.push_back("");  // dense id 0: reserved null history item

    // single-pass user filter
    std::vector<std::vector<std::size_t>> kept_rows;
    for (const std::string& name : user_order) {
        auto& rows = by_user[name].rows;
        if (static_cast<int>(rows.size()) < options.min_user_interactions) continue;
        std::stable_sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
            return interactions[a].timestamp < interactions[b].timestamp;
        });
        c.user_index_.emplace(name, static_cast<int>(c.user_names_.size()));
        c.user_names_.push_back(name);
        kept_rows.push_back(rows);
    }
    if (c.user_names_.empty()) throw IoError("empty corpus: every user fell below the threshold");

    auto intern_item = [&](const std::string& name) {
        auto [it, inserted] = c.item_index_.try_emplace(name, static_cast<int>(c.item_names_.size()));
        if (inserted) c.item_names_.push_back(name);
        return it->second;
    };

    // chronological split: train takes the first ceil(ratio * len) items
    std::int64_t total = 0;
    std::vector<std::vector<std::size_t>> train_rows(kept_rows.size());
    for (std::size_t u = 0; u < kept_rows.size(); ++u) {
        const auto& rows = kept_rows[u];
        const auto len = static_cast<double>(rows.size());
        const auto train_len =
            static_cast<std::size_t>(std::ceil(options.train_ratio * len));
        std::vector<int> train, test;
        for (std::size_t k = 0; k < rows.size(); ++k) {
            const int item = intern_item(interactions[rows[k]].item);
            if (k < train_len) {
                train.push_back(item);
                train_rows[u].push_back(rows[k]);
            } else {
                test.push_back(item);
            }
        }
        total += static_cast<std::int64_t>(rows.size());
        c.train_.push_back(std::move(train));
        c.test_.push_back(std::move(test));
    }

    // vocabulary from train-period reviews only: count first, then assign
    // indices in order of first appearance
    std::unordered_map<std::string, std::int64_t> counts;
    std::vector<std::string> first_seen;
    for (const auto& rows : train_rows)
        for (std::size_t r : rows)
            for (const std::string& w : tokenize_words(interactions[r].review)) {
                auto [it, inserted] = counts.try_emplace(w, 0);
                if (inserted) first_seen.push_back(w);
                ++it->second;
            }
    std::vector<std::string> kept_tokens;
    for (const std::string& w : first_seen)
        if (counts[w] >= options.min_count) kept_tokens.push_back(w);
    c.vocab_ = Vocabulary(std::move(kept_tokens), options.min_count);

    // user documents: this user's train reviews, chronological
    for (const auto& rows : train_rows) {
        std::vector<std::int32_t> tokens;
        for (std::size_t r : rows) {
            auto ids = tokenize(interactions[r].review, c.vocab_);
            tokens.insert(tokens.end(), ids.begin(), ids.end());
            if (static_cast<int>(tokens.size()) >= options.doc_len) break;
        }
        c.user_docs_.push_back(fit_document(tokens, options.doc_len));
    }

    // item documents: train-period reviews about the item across users,
    // chronological with input order as tiebreak
    std::vector<std::vector<std::size_t>> item_rows(c.item_names_.size());
    for (const auto& rows : train_rows)
        for (std::size_t r : rows) item_rows[static_cast<std::size_t>(c.item_index_[interactions[r].item])].push_back(r);
    c.item_docs_.resize(c.item_names_.size());
    c.item_docs_[0] = std::vector<std::int32_t>(static_cast<std::size_t>(options.doc_len),
                                                Vocabulary::kPad);
    for (std::size_t i = 1; i < item_rows.size(); ++i) {
        auto& rows = item_rows[i];
        std::stable_sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
            if (interactions[a].timestamp != interactions[b].timestamp)
                return interactions[a].timestamp < interactions[b].timestamp;
            return a < b;
        });
        std::vector<std::int32_t> tokens;
        for (std::size_t r : rows) {
            auto ids = tokenize(interactions[r].review, c.vocab_);
            tokens.insert(tokens.end(), ids.begin(), ids.end());
            if (static_cast<int>(tokens.size()) >= options.doc_len) break;
        }
        c.item_docs_[i] = fit_document(tokens, options.doc_len);
    }

    c.stats_.users = c.user_count();
    c.stats_.items = c.item_count();
    c.stats_.interactions = total;
    c.stats_.sparsity = 1.0 - static_cast<double>(total) /
                                  (static_cast<double>(c.stats_.users) *
                                   static_cast<double>(c.stats_.items));
    c.stats_.avg_actions_per_user =
        static_cast<double>(total) / static_cast<double>(c.stats_.users);
    return c;
}

int Corpus::user_id(const std::string& name) const {
    auto it = user_index_.find(name);
    return it == user_index_.end() ? -1 : it->second;
}

int Corpus::item_id(const std::string& name) const {
    auto it = item_index_.find(name);
    return it == item_index_.end() ? -1 : it->second;
}

const std::string& Corpus::user_name(int id) const {
    if (id < 0 || id >= user_count()) throw IndexError("unknown user id " + std::to_string(id));
    return user_names_[static_cast<std::size_t>(id)];
}

const std::string& Corpus::item_name(int id) const {
    if (id < 1 || id > item_count()) throw IndexError("unknown item id " + std::to_string(id));
    return item_names_[static_cast<std::size_t>(id)];
}

const std::vector<int>& Corpus::train_seq(int user) const {
    if (user < 0 || user >= user_count())
        throw IndexError("unknown user id " + std::to_string(user));
    return train_[static_cast<std::size_t>(user)];
}

const std::vector<int>& Corpus::test_seq(int user) const {
    if (user < 0 || user >= user_count())
        throw IndexError("unknown user id " + std::to_string(user));
    return test_[static_cast<std::size_t>(user)];
}

std::span<const std::int32_t> Corpus::user_doc(int user) const {
    if (user < 0 || user >= user_count())
        throw IndexError("unknown user id " + std::to_string(user));
    return user_docs_[static_cast<std::size_t>(user)];
}

std::span<const std::int32_t> Corpus::item_doc(int item) const {
    if (item < 0 || item > item_count())
        throw IndexError("unknown item id " + std::to_string(item));
    return item_docs_[static_cast<std::size_t>(item)];
}

void Corpus::rebuild_indexes() {
    user_index_.clear();
    item_index_.clear();
    for (std::size_t i = 0; i < user_names_.size(); ++i)
        user_index_.emplace(user_names_[i], static_cast<int>(i));
    for (std::size_t i = 1; i < item_names_.size(); ++i)
        item_index_.emplace(item_names_[i], static_cast<int>(i));
}

namespace {
constexpr char kCorpusMagic[4] = {'R', 'N', 'S', 'C'};
constexpr std::uint32_t kCorpusVersion = 1;
}  // namespace

void Corpus::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write corpus cache: " + path);
    BinaryWriter w(out);
    w.magic(kCorpusMagic);
    w.u32(kCorpusVersion);

    auto section = [&](const std::string& name, auto&& fill) {
        std::ostringstream buf(std::ios::binary);
        BinaryWriter sw(buf);
        fill(sw);
        begin_section(w, name, buf.str());
    };

    section("meta", [&](BinaryWriter& sw) {
        sw.u32(static_cast<std::uint32_t>(options_.min_user_interactions));
        sw.f64(options_.train_ratio);
        sw.u32(static_cast<std::uint32_t>(options_.doc_len));
        sw.u32(static_cast<std::uint32_t>(options_.min_count));
    });
    section("users", [&](BinaryWriter& sw) {
        sw.u64(user_names_.size());
        for (const auto& s : user_names_) sw.str(s);
    });
    section("items", [&](BinaryWriter& sw) {
        sw.u64(item_names_.size() - 1);
        for (std::size_t i = 1; i < item_names_.size(); ++i) sw.str(item_names_[i]);
    });
    section("vocab", [&](BinaryWriter& sw) {
        sw.u32(static_cast<std::uint32_t>(vocab_.min_count()));
        sw.u64(vocab_.tokens().size());
        for (const auto& t : vocab_.tokens()) sw.str(t);
    });
    section("sequences", [&](BinaryWriter& sw) {
        sw.u64(train_.size());
        for (std::size_t u = 0; u < train_.size(); ++u) {
            std::vector<std::int32_t> tr(train_[u].begin(), train_[u].end());
            std::vector<std::int32_t> te(test_[u].begin(), test_[u].end());
            sw.i32_vec(tr);
            sw.i32_vec(te);
        }
    });
    section("documents", [&](BinaryWriter& sw) {
        sw.u64(user_docs_.size());
        for (const auto& d : user_docs_) sw.i32_vec(d);
        sw.u64(item_docs_.size());
        for (const auto& d : item_docs_) sw.i32_vec(d);
    });
    section("stats", [&](BinaryWriter& sw) {
        sw.u32(static_cast<std::uint32_t>(stats_.users));
        sw.u32(static_cast<std::uint32_t>(stats_.items));
        sw.i64(stats_.interactions);
        sw.f64(stats_.sparsity);
        sw.f64(stats_.avg_actions_per_user);
    });
}

Corpus Corpus::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open corpus cache: " + path);
    BinaryReader r(in);
    r.expect_magic(kCorpusMagic, "corpus cache");
    const std::uint32_t version = r.u32();
    if (version != kCorpusVersion)
        throw IoError("unsupported corpus cache version " + std::to_string(version));

    Corpus c;
    auto section = [&](const std::string& name) {
        return std::istringstream(read_section(r, name), std::ios::binary);
    };

    {
        auto buf = section("meta");
        BinaryReader sr(buf);
        c.options_.min_user_interactions = static_cast<int>(sr.u32());
        c.options_.train_ratio = sr.f64();
        c.options_.doc_len = static_cast<int>(sr.u32());
        c.options_.min_count = static_cast<int>(sr.u32());
    }
    {
        auto buf = section("users");
        BinaryReader sr(buf);
        const std::uint64_t n = sr.u64();
        for (std::uint64_t i = 0; i < n; ++i) c.user_names_.push_back(sr.str());
    }
    {
        auto buf = section("items");
        BinaryReader sr(buf);
        c.item_names_.push_back("");
        const std::uint64_t n = sr.u64();
        for (std::uint64_t i = 0; i < n; ++i) c.item_names_.push_back(sr.str());
    }
    {
        auto buf = section("vocab");
        BinaryReader sr(buf);
        const int min_count = static_cast<int>(sr.u32());
        const std::uint64_t n = sr.u64();
        std::vector<std::string> tokens;
        for (std::uint64_t i = 0; i < n; ++i) tokens.push_back(sr.str());
        c.vocab_ = Vocabulary(std::move(tokens), min_count);
    }
    {
        auto buf = section("sequences");
        BinaryReader sr(buf);
        const std::uint64_t n = sr.u64();
        for (std::uint64_t u = 0; u < n; ++u) {
            auto tr = sr.i32_vec();
            auto te = sr.i32_vec();
            c.train_.emplace_back(tr.begin(), tr.end());
            c.test_.emplace_back(te.begin(), te.end());
        }
    }
    {
        auto buf = section("documents");
        BinaryReader sr(buf);
        const std::uint64_t nu = sr.u64();
        for (std::uint64_t i = 0; i < nu; ++i) c.user_docs_.push_back(sr.i32_vec());
        const std::uint64_t ni = sr.u64();
        for (std::uint64_t i = 0; i < ni; ++i) c.item_docs_.push_back(sr.i32_vec());
    }
    {
        auto buf = section("stats");
        BinaryReader sr(buf);
        c.stats_.users = static_cast<int>(sr.u32());
        c.stats_.items = static_cast<int>(sr.u32());
        c.stats_.interactions = sr.i64();
        c.stats_.sparsity = sr.f64();
        c.stats_.avg_actions_per_user = sr.f64();
    }
    c.rebuild_indexes();
    return c;
}

namespace {

// uniform draws over real item ids, rejecting the exclusion set and
// already-picked ids
std::vector<int> sample_negatives(int count, int item_count,
                                  const std::unordered_set<int>& excluded,
                                  std::mt19937_64& rng) {
    std::uniform_int_distribution<int> pick(1, item_count);
    std::unordered_set<int> chosen;
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(count));
    while (static_cast<int>(out.size()) < count) {
        const int candidate = pick(rng);
        if (excluded.count(candidate) || chosen.count(candidate)) continue;
        chosen.insert(candidate);
        out.push_back(candidate);
    }
    return out;
}

std::vector<int> padded_history(const std::vector<int>& sequence, std::size_t end,
                                int history_len) {
    std::vector<int> hist(static_cast<std::size_t>(history_len), Corpus::kNullItem);
    const std::size_t take = std::min<std::size_t>(end, static_cast<std::size_t>(history_len));
    for (std::size_t k = 0; k < take; ++k)
        hist[static_cast<std::size_t>(history_len) - take + k] = sequence[end - take + k];
    return hist;
}

}  // namespace

std::vector<TrainingInstance> make_training_instances(const Corpus& corpus, int history_len,
                                                      int negatives, std::uint64_t seed) {
    if (history_len < 1) throw ConfigError("history length must be at least 1");
    if (negatives < 1) throw ConfigError("negative count must be at least 1");
    std::mt19937_64 rng(seed);
    std::vector<TrainingInstance> out;
    for (int u = 0; u < corpus.user_count(); ++u) {
        const auto& train = corpus.train_seq(u);
        std::unordered_set<int> train_set(train.begin(), train.end());
        const int eligible = corpus.item_count() - static_cast<int>(train.size());
        if (negatives >= eligible)
            throw ConfigError("cannot sample " + std::to_string(negatives) +
                              " negatives: only " + std::to_string(eligible) +
                              " items outside the train sequence of user " +
                              corpus.user_name(u));
        for (std::size_t t = 1; t < train.size(); ++t) {
            TrainingInstance inst;
            inst.user = u;
            inst.history = padded_history(train, t, history_len);
            inst.target = train[t];
            inst.negatives = sample_negatives(negatives, corpus.item_count(), train_set, rng);
            out.push_back(std::move(inst));
        }
    }
    return out;
}

std::string protocol_name(Protocol p) {
    return p == Protocol::PerUser ? "per-user" : "per-step";
}

Protocol protocol_from_name(const std::string& name) {
    if (name == "per-user") return Protocol::PerUser;
    if (name == "per-step") return Protocol::PerStep;
    throw ConfigError("unknown protocol '" + name + "' (use per-user or per-step)");
}

std::vector<TestInstance> make_test_instances(const Corpus& corpus, int history_len,
                                              int num_negatives, std::uint64_t seed,
                                              Protocol protocol) {
    if (history_len < 1) throw ConfigError("history length must be at least 1");
    if (num_negatives < 1) throw ConfigError("negative count must be at least 1");
    std::mt19937_64 rng(seed);
    std::vector<TestInstance> out;
    for (int u = 0; u < corpus.user_count(); ++u) {
        const auto& train = corpus.train_seq(u);
        const auto& test = corpus.test_seq(u);
        if (test.empty()) continue;
        std::unordered_set<int> whole(train.begin(), train.end());
        whole.insert(test.begin(), test.end());
        const int eligible = corpus.item_count() - static_cast<int>(whole.size());
        if (eligible < num_negatives)
            throw ConfigError("cannot sample " + std::to_string(num_negatives) +
                              " negatives: only " + std::to_string(eligible) +
                              " items outside the sequence of user " + corpus.user_name(u));

        if (protocol == Protocol::PerUser) {
            TestInstance inst;
            inst.user = u;
            inst.history = padded_history(train, train.size(), history_len);
            std::unordered_set<int> seen;
            for (int item : test)
                if (seen.insert(item).second) inst.relevant.push_back(item);
            inst.candidates = inst.relevant;
            auto negs = sample_negatives(num_negatives, corpus.item_count(), whole, rng);
            inst.candidates.insert(inst.candidates.end(), negs.begin(), negs.end());
            out.push_back(std::move(inst));
        } else {
            std::vector<int> full(train.begin(), train.end());
            full.insert(full.end(), test.begin(), test.end());
            for (std::size_t p = train.size(); p < full.size(); ++p) {
                TestInstance inst;
                inst.user = u;
                inst.history = padded_history(full, p, history_len);
                inst.relevant = {full[p]};
                inst.candidates = {full[p]};
                auto negs = sample_negatives(num_negatives, corpus.item_count(), whole, rng);
                inst.candidates.insert(inst.candidates.end(), negs.begin(), negs.end());
                out.push_back(std::move(inst));
            }
        }
    }
    if (out.empty()) throw IoError("no test instances: every user has an empty test split");
    return out;
}

}  // namespace rns
