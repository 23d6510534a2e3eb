#include "rns/synthetic.hpp"

#include <random>
#include <string>

#include "rns/error.hpp"

namespace rns {

namespace {

std::string item_name_for(int index) { return "i" + std::to_string(index); }

std::string group_word(int group, int word) {
    return "g" + std::to_string(group) + "w" + std::to_string(word);
}

}  // namespace

int synthetic_group_of(const std::string& item_name, const SyntheticOptions& options) {
    if (item_name.empty() || item_name[0] != 'i')
        throw ContractError("not a synthetic item id: " + item_name);
    const int index = std::stoi(item_name.substr(1));
    const int groups = options.items / options.group_size;
    return std::min(index / options.group_size, groups - 1);
}

std::vector<Interaction> generate_synthetic(const SyntheticOptions& options) {
    if (options.users < 1 || options.items < 2)
        throw ConfigError("synthetic corpus needs at least one user and two items");
    if (options.items < 2 * options.users * options.history_len)
        throw ConfigError("synthetic corpus needs items >= 2 * users * history_len, got " +
                          std::to_string(options.items) + " items for " +
                          std::to_string(options.users) + " users at L=" +
                          std::to_string(options.history_len));
    if (options.pattern_strength < 0.0 || options.pattern_strength > 1.0)
        throw ConfigError("pattern_strength must lie in [0, 1]");
    if (options.group_size < 1 || options.group_size > options.items)
        throw ConfigError("group_size must lie in [1, items]");
    if (options.seq_len < 2) throw ConfigError("seq_len must be at least 2");

    const int groups = options.items / options.group_size;
    auto group_of = [&](int item) {
        return std::min(item / options.group_size, groups - 1);
    };
    auto group_begin = [&](int group) { return group * options.group_size; };
    auto group_count = [&](int group) {
        // the last group absorbs the remainder
        return group == groups - 1 ? options.items - group_begin(group) : options.group_size;
    };

    std::mt19937_64 rng(options.seed);
    std::uniform_int_distribution<int> any_item(0, options.items - 1);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::uniform_int_distribution<int> any_word(0, options.words_per_group - 1);

    // global per-group rotation so the catalog gets covered evenly
    std::vector<int> rotation(static_cast<std::size_t>(groups), 0);
    auto next_in_group = [&](int group) {
        const int count = group_count(group);
        const int offset = rotation[static_cast<std::size_t>(group)]++ % count;
        return group_begin(group) + offset;
    };

    std::vector<Interaction> out;
    out.reserve(static_cast<std::size_t>(options.users) * options.seq_len);
    for (int u = 0; u < options.users; ++u) {
        int current = any_item(rng);
        for (int t = 0; t < options.seq_len; ++t) {
            Interaction row;
            row.user = "u" + std::to_string(u);
            row.item = item_name_for(current);
            row.timestamp = t;
            const int group = group_of(current);
            std::string review;
            for (int w = 0; w < options.words_per_review; ++w) {
                if (w) review += ' ';
                review += group_word(group, any_word(rng));
            }
            row.review = std::move(review);
            out.push_back(std::move(row));

            if (coin(rng) < options.pattern_strength) {
                current = next_in_group((group + options.group_hop) % groups);
            } else {
                current = any_item(rng);
            }
        }
    }
    return out;
}

std::vector<Interaction> generate_synthetic(int users, int items, int history_len,
                                            double pattern_strength, std::uint64_t seed) {
    SyntheticOptions options;
    options.users = users;
    options.items = items;
    options.history_len = history_len;
    options.pattern_strength = pattern_strength;
    options.seed = seed;
    return generate_synthetic(options);
}

}  // namespace rns
