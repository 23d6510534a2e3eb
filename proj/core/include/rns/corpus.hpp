#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace rns {

/// One review row from a raw JSON-lines dump.
struct Interaction {
    std::string user;        // external reviewer id
    std::string item;        // external item id (asin)
    std::int64_t timestamp;  // unix seconds
    std::string review;      // may be empty
};

struct ParsedReviews {
    std::vector<Interaction> interactions;  // input order preserved
    std::size_t malformed = 0;              // skipped lines
};

/// Parse a JSON-lines review file: one object per line with reviewerID,
/// asin, unixReviewTime and optional reviewText. Malformed lines are skipped
/// with a stderr warning; more malformed than valid lines is a hard error.
ParsedReviews parse_reviews(const std::string& path);

/// Lowercase the text and split it on runs of non-alphanumeric bytes.
std::vector<std::string> tokenize_words(const std::string& text);

/// Token index space for the document encoders. Index 0 is PAD, index 1 is
/// OOV; both are reserved and never evicted. Tokens seen fewer than
/// min_count times fall back to OOV.
class Vocabulary {
public:
    static constexpr std::int32_t kPad = 0;
    static constexpr std::int32_t kOov = 1;

    Vocabulary() = default;
    explicit Vocabulary(std::vector<std::string> tokens, int min_count);

    std::int32_t index_of(const std::string& token) const;
    /// Number of indices including PAD and OOV.
    std::int32_t size() const { return static_cast<std::int32_t>(tokens_.size()) + 2; }
    int min_count() const { return min_count_; }
    /// Tokens in index order, starting at index 2.
    const std::vector<std::string>& tokens() const { return tokens_; }

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, std::int32_t> index_;
    int min_count_ = 5;
};

/// Map text to token indices through a vocabulary (OOV fallback).
std::vector<std::int32_t> tokenize(const std::string& text, const Vocabulary& vocab);

struct CorpusStats {
    int users = 0;
    int items = 0;
    std::int64_t interactions = 0;
    double sparsity = 0.0;              // 1 - interactions / (users * items)
    double avg_actions_per_user = 0.0;  // interactions / users
};

struct CorpusOptions {
    int min_user_interactions = 10;
    double train_ratio = 0.7;
    int doc_len = 300;
    int min_count = 5;
};

/// Users, items, chronological sequences split into train/test prefixes, and
/// fixed-length user/item documents. Item dense id 0 is the reserved null
/// history item (all-PAD document, zero representation); real items start at
/// dense id 1. Documents concatenate train-period reviews only, in
/// chronological order, truncated to doc_len keeping the earliest tokens.
class Corpus {
public:
    static constexpr int kNullItem = 0;

    static Corpus build(std::span<const Interaction> interactions, const CorpusOptions& options);

    int user_count() const { return static_cast<int>(user_names_.size()); }
    /// Count of real items (dense ids 1..item_count()).
    int item_count() const { return static_cast<int>(item_names_.size()) - 1; }

    int user_id(const std::string& name) const;  // -1 when unknown
    int item_id(const std::string& name) const;  // -1 when unknown
    const std::string& user_name(int id) const;
    const std::string& item_name(int id) const;

    const std::vector<int>& train_seq(int user) const;
    const std::vector<int>& test_seq(int user) const;

    std::span<const std::int32_t> user_doc(int user) const;
    std::span<const std::int32_t> item_doc(int item) const;

    const Vocabulary& vocab() const { return vocab_; }
    int doc_len() const { return options_.doc_len; }
    const CorpusOptions& options() const { return options_; }
    const CorpusStats& stats() const { return stats_; }

    void save(const std::string& path) const;
    static Corpus load(const std::string& path);

private:
    CorpusOptions options_;
    CorpusStats stats_;
    Vocabulary vocab_;
    std::vector<std::string> user_names_;
    std::vector<std::string> item_names_;  // [0] is the null item placeholder
    std::unordered_map<std::string, int> user_index_;
    std::unordered_map<std::string, int> item_index_;
    std::vector<std::vector<int>> train_;
    std::vector<std::vector<int>> test_;
    std::vector<std::vector<std::int32_t>> user_docs_;
    std::vector<std::vector<std::int32_t>> item_docs_;

    void rebuild_indexes();
    friend struct CorpusIo;
};

/// One training window: exactly `history.size()` == L ids (null-padded on
/// the left, most recent last), the next item as target, and x sampled
/// negatives that avoid the user's whole train sequence.
struct TrainingInstance {
    int user = 0;
    std::vector<int> history;
    int target = 0;
    std::vector<int> negatives;
};

std::vector<TrainingInstance> make_training_instances(const Corpus& corpus, int history_len,
                                                      int negatives, std::uint64_t seed);

enum class Protocol { PerUser, PerStep };

std::string protocol_name(Protocol p);
Protocol protocol_from_name(const std::string& name);

/// A ranking task: candidates = relevant ∪ sampled negatives, where the
/// negatives avoid the user's entire (train + test) sequence.
struct TestInstance {
    int user = 0;
    std::vector<int> history;    // length L, null-padded on the left
    std::vector<int> relevant;   // deduplicated
    std::vector<int> candidates; // relevant items first, then negatives
};

std::vector<TestInstance> make_test_instances(const Corpus& corpus, int history_len,
                                              int num_negatives, std::uint64_t seed,
                                              Protocol protocol);

}  // namespace rns
