// Command-line surface for the review-driven sequential recommender:
//   synth -> prepare -> train -> evaluate / ablate / sweep / inspect
// Machine-readable output goes to stdout (or --out) as JSON or CSV; progress
// logs go to stderr. Exit codes: 0 success, 1 runtime failure, 2 usage or
// validation error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <rns/corpus.hpp>
#include <rns/error.hpp>
#include <rns/evaluation.hpp>
#include <rns/model.hpp>
#include <rns/synthetic.hpp>
#include <rns/training.hpp>

using nlohmann::json;

namespace {

struct ModelFlags {
    int embed_dim = 25;
    int aspects = 5;
    int filters = 10;
    std::vector<int> filter_heights = {1, 3, 5, 7, 9};
    int history = 5;
    double alpha = 0.1;
    bool no_union = false;
    bool no_individual = false;
    bool no_position = false;
    bool no_aspects = false;
    bool shared_word_emb = false;
    std::uint64_t init_seed = 1;

    void attach(CLI::App* cmd) {
        cmd->add_option("--embed-dim", embed_dim, "word embedding width d")
            ->capture_default_str();
        cmd->add_option("--aspects", aspects, "aspect count K")->capture_default_str();
        cmd->add_option("--filters", filters, "filter count n (representation width)")
            ->capture_default_str();
        cmd->add_option("--filter-heights", filter_heights,
                        "distinct filter heights, filters split evenly across them")
            ->delimiter(',')
            ->capture_default_str();
        cmd->add_option("--history", history, "history window length L")->capture_default_str();
        cmd->add_option("--alpha", alpha, "short-term fusion weight")->capture_default_str();
        cmd->add_flag("--no-union", no_union, "drop the union-level short-term path");
        cmd->add_flag("--no-individual", no_individual,
                      "drop the individual-level short-term path");
        cmd->add_flag("--no-position", no_position, "drop position embeddings");
        cmd->add_flag("--no-aspects", no_aspects,
                      "single channel with a fixed identity transform");
        cmd->add_flag("--shared-word-emb", shared_word_emb,
                      "share one word embedding table across both sides");
        cmd->add_option("--init-seed", init_seed, "parameter initialization seed")
            ->capture_default_str();
    }

    rns::ModelConfig to_config() const {
        rns::ModelConfig cfg;
        cfg.embed_dim = embed_dim;
        cfg.aspects = aspects;
        cfg.filters = filters;
        cfg.filter_heights = filter_heights;
        cfg.history_len = history;
        cfg.alpha = alpha;
        cfg.use_union = !no_union;
        cfg.use_individual = !no_individual;
        cfg.use_position = !no_position;
        cfg.use_aspects = !no_aspects;
        cfg.shared_word_emb = shared_word_emb;
        return cfg;
    }

    json echo() const {
        const rns::ModelConfig cfg = to_config();
        return json{{"embed_dim", cfg.embed_dim},
                    {"aspects", cfg.aspects},
                    {"filters", cfg.filters},
                    {"filter_heights", cfg.filter_heights},
                    {"history", cfg.history_len},
                    {"alpha", cfg.alpha},
                    {"use_union", cfg.use_union},
                    {"use_individual", cfg.use_individual},
                    {"use_position", cfg.use_position},
                    {"use_aspects", cfg.use_aspects},
                    {"shared_word_emb", cfg.shared_word_emb},
                    {"init_seed", init_seed}};
    }
};

struct TrainFlags {
    double learning_rate = 0.001;
    int negatives = 3;
    double lambda = 0.0001;
    int epochs = 30;
    int batch_size = 128;
    std::uint64_t seed = 42;
    int patience = 0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--lr", learning_rate, "Adam learning rate")->capture_default_str();
        cmd->add_option("--negatives", negatives, "sampled negatives per training instance")
            ->capture_default_str();
        cmd->add_option("--lambda", lambda, "L2 coefficient")->capture_default_str();
        cmd->add_option("--epochs", epochs, "training epochs")->capture_default_str();
        cmd->add_option("--batch-size", batch_size, "instances per Adam step")
            ->capture_default_str();
        cmd->add_option("--seed", seed, "training seed (shuffling and negatives)")
            ->capture_default_str();
        cmd->add_option("--patience", patience,
                        "early-stop patience on the held-out last train item (0 = off)")
            ->capture_default_str();
    }

    rns::TrainConfig to_config() const {
        rns::TrainConfig cfg;
        cfg.learning_rate = learning_rate;
        cfg.negatives = negatives;
        cfg.lambda = lambda;
        cfg.epochs = epochs;
        cfg.batch_size = batch_size;
        cfg.seed = seed;
        cfg.patience = patience;
        return cfg;
    }

    json echo() const {
        return json{{"lr", learning_rate},   {"negatives", negatives},
                    {"lambda", lambda},      {"epochs", epochs},
                    {"batch_size", batch_size}, {"seed", seed},
                    {"patience", patience}};
    }
};

struct EvalFlags {
    std::string protocol = "per-user";
    int cutoff = 5;
    int num_negatives = 100;
    std::uint64_t eval_seed = 7;
    std::int64_t tie_shuffle = -1;  // < 0 keeps the deterministic id tie-break

    void attach(CLI::App* cmd) {
        cmd->add_option("--protocol", protocol, "per-user or per-step")
            ->check(CLI::IsMember({"per-user", "per-step"}))
            ->capture_default_str();
        cmd->add_option("--cutoff", cutoff, "metric cutoff N")->capture_default_str();
        cmd->add_option("--num-negatives", num_negatives, "sampled negatives per test instance")
            ->capture_default_str();
        cmd->add_option("--eval-seed", eval_seed, "negative-sampling seed for test instances")
            ->capture_default_str();
        cmd->add_option("--tie-shuffle", tie_shuffle,
                        "break score ties with this random seed instead of item ids")
            ->capture_default_str();
    }

    rns::Protocol to_protocol() const { return rns::protocol_from_name(protocol); }

    rns::EvaluateOptions to_options() const {
        rns::EvaluateOptions opts;
        opts.cutoff = cutoff;
        if (tie_shuffle >= 0) opts.tie_shuffle = static_cast<std::uint64_t>(tie_shuffle);
        return opts;
    }

    json echo() const {
        return json{{"protocol", protocol},
                    {"cutoff", cutoff},
                    {"num_negatives", num_negatives},
                    {"eval_seed", eval_seed},
                    {"tie_shuffle", tie_shuffle}};
    }
};

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text << "\n";
    } else {
        std::ofstream out(out_path);
        if (!out) throw rns::IoError("cannot write output file: " + out_path);
        out << text << "\n";
    }
}

json report_json(const rns::MetricReport& report) {
    return json{{"protocol", rns::protocol_name(report.protocol)},
                {"N", report.cutoff},
                {"instances", report.instances},
                {"precision", report.precision},
                {"recall", report.recall},
                {"ndcg", report.ndcg},
                {"hr", report.hr}};
}

json stats_json(const rns::CorpusStats& stats) {
    return json{{"users", stats.users},
                {"items", stats.items},
                {"interactions", stats.interactions},
                {"sparsity", stats.sparsity},
                {"avg_actions_per_user", stats.avg_actions_per_user}};
}

rns::MetricReport run_evaluation(const rns::Corpus& corpus, const rns::ModelParams& params,
                                 const EvalFlags& eval, std::ostream* csv) {
    auto instances = rns::make_test_instances(corpus, params.config.history_len,
                                              eval.num_negatives, eval.eval_seed,
                                              eval.to_protocol());
    rns::EvaluateOptions opts = eval.to_options();
    opts.per_instance_csv = csv;
    return rns::evaluate(params, corpus, instances, eval.to_protocol(), opts);
}

// ---- synth ---------------------------------------------------------------

struct SynthCmd {
    rns::SyntheticOptions gen;
    std::string out_path;

    void attach(CLI::App* cmd) {
        cmd->add_option("--users", gen.users, "user count")->capture_default_str();
        cmd->add_option("--items", gen.items, "item catalog size")->capture_default_str();
        cmd->add_option("--history", gen.history_len, "history length the corpus must support")
            ->capture_default_str();
        cmd->add_option("--pattern-strength", gen.pattern_strength,
                        "probability of following the planted chain")
            ->capture_default_str();
        cmd->add_option("--seed", gen.seed, "generator seed")->capture_default_str();
        cmd->add_option("--seq-len", gen.seq_len, "interactions per user")
            ->capture_default_str();
        cmd->add_option("--group-size", gen.group_size, "items per group")
            ->capture_default_str();
        cmd->add_option("--group-hop", gen.group_hop,
                        "successor group distance (0 keeps the group)")
            ->capture_default_str();
        cmd->add_option("--out", out_path, "output JSON-lines path")->required();
    }

    void run() const {
        auto rows = rns::generate_synthetic(gen);
        std::ofstream out(out_path);
        if (!out) throw rns::IoError("cannot write synthetic corpus: " + out_path);
        for (const auto& r : rows) {
            json line = {{"reviewerID", r.user},
                         {"asin", r.item},
                         {"unixReviewTime", r.timestamp},
                         {"reviewText", r.review},
                         {"overall", 5.0}};
            out << line.dump() << "\n";
        }
        json summary = {{"rows", rows.size()},
                        {"out", out_path},
                        {"config",
                         {{"users", gen.users},
                          {"items", gen.items},
                          {"history", gen.history_len},
                          {"pattern_strength", gen.pattern_strength},
                          {"seed", gen.seed},
                          {"seq_len", gen.seq_len},
                          {"group_size", gen.group_size},
                          {"group_hop", gen.group_hop}}}};
        std::cout << summary.dump() << "\n";
    }
};

// ---- prepare ---------------------------------------------------------------

struct PrepareCmd {
    std::string input;
    std::string out_path;
    std::string stats_out;
    bool stats = false;
    rns::CorpusOptions opts;

    void attach(CLI::App* cmd) {
        cmd->add_option("--input", input, "raw JSON-lines review file")
            ->required()
            ->check(CLI::ExistingFile);
        cmd->add_option("--out", out_path, "corpus cache path to write");
        cmd->add_flag("--stats", stats, "emit the dataset statistics JSON");
        cmd->add_option("--stats-out", stats_out, "statistics path (default stdout)");
        cmd->add_option("--min-user-interactions", opts.min_user_interactions,
                        "drop users with fewer interactions")
            ->capture_default_str();
        cmd->add_option("--train-ratio", opts.train_ratio, "chronological train fraction")
            ->capture_default_str();
        cmd->add_option("--doc-len", opts.doc_len, "document length in tokens")
            ->capture_default_str();
        cmd->add_option("--min-count", opts.min_count, "vocabulary frequency threshold")
            ->capture_default_str();
    }

    void run() const {
        if (out_path.empty() && !stats)
            throw rns::ConfigError("prepare needs --out and/or --stats");
        auto parsed = rns::parse_reviews(input);
        if (parsed.malformed)
            std::cerr << "prepare: skipped " << parsed.malformed << " malformed lines\n";
        rns::Corpus corpus = rns::Corpus::build(parsed.interactions, opts);
        if (!out_path.empty()) corpus.save(out_path);
        if (stats) {
            json out = stats_json(corpus.stats());
            out["config"] = {{"input", input},
                             {"min_user_interactions", opts.min_user_interactions},
                             {"train_ratio", opts.train_ratio},
                             {"doc_len", opts.doc_len},
                             {"min_count", opts.min_count}};
            emit(out.dump(2), stats_out);
        }
    }
};

// ---- train -----------------------------------------------------------------

struct TrainCmd {
    std::string corpus_path;
    std::string out_dir = ".";
    int checkpoint_every = 0;
    ModelFlags model;
    TrainFlags trainer;

    void attach(CLI::App* cmd) {
        cmd->add_option("--corpus", corpus_path, "corpus cache from prepare")
            ->required()
            ->check(CLI::ExistingFile);
        cmd->add_option("--out-dir", out_dir, "directory for checkpoints")
            ->capture_default_str();
        cmd->add_option("--checkpoint-every", checkpoint_every,
                        "write ckpt-{epoch}.rnsm every k epochs (0 = final only)")
            ->capture_default_str();
        model.attach(cmd);
        trainer.attach(cmd);
    }

    void run() const {
        rns::Corpus corpus = rns::Corpus::load(corpus_path);
        rns::ModelConfig mcfg = model.to_config();
        mcfg.validate(corpus.doc_len());
        rns::TrainConfig tcfg = trainer.to_config();
        tcfg.validate();
        std::filesystem::create_directories(out_dir);

        rns::ModelParams params =
            rns::ModelParams::init(mcfg, corpus.vocab().size(), model.init_seed);

        int last_epoch = 0;
        rns::TrainHooks hooks;
        hooks.on_epoch = [](const rns::EpochLog& log) {
            json line = {{"epoch", log.epoch},
                         {"mean_loss", log.mean_loss},
                         {"wall_ms", log.wall_ms},
                         {"lr", log.lr}};
            if (log.has_validation) line["validation_loss"] = log.validation_loss;
            std::cerr << line.dump() << "\n";
        };
        hooks.on_epoch_end = [&](int epoch, const rns::ModelParams& p) {
            last_epoch = epoch;
            if (checkpoint_every > 0 && epoch % checkpoint_every == 0)
                rns::save_checkpoint(
                    p, (std::filesystem::path(out_dir) / checkpoint_name(epoch)).string());
        };
        auto losses = rns::train(corpus, params, tcfg, hooks);

        const auto final_path =
            (std::filesystem::path(out_dir) / checkpoint_name(last_epoch)).string();
        rns::save_checkpoint(params, final_path);

        json summary = {{"final_checkpoint", final_path},
                        {"epochs_run", losses.size()},
                        {"final_mean_loss", losses.empty() ? 0.0 : losses.back()},
                        {"parameter_count", params.parameter_count()},
                        {"config", config_echo()}};
        std::cout << summary.dump() << "\n";
    }

    static std::string checkpoint_name(int epoch) {
        return "ckpt-" + std::to_string(epoch) + ".rnsm";
    }

    json config_echo() const {
        json cfg = {{"corpus", corpus_path},
                    {"out_dir", out_dir},
                    {"checkpoint_every", checkpoint_every}};
        cfg.update(model.echo());
        cfg.update(trainer.echo());
        return cfg;
    }
};

// ---- evaluate ----------------------------------------------------------------

struct EvaluateCmd {
    std::string corpus_path;
    std::string checkpoint;
    std::string out_path;
    std::string csv_path;
    EvalFlags eval;

    void attach(CLI::App* cmd) {
        cmd->add_option("--corpus", corpus_path, "corpus cache from prepare")
            ->required()
            ->check(CLI::ExistingFile);
        cmd->add_option("--checkpoint", checkpoint, "model checkpoint from train")
            ->required()
            ->check(CLI::ExistingFile);
        cmd->add_option("--out", out_path, "report path (default stdout)");
        cmd->add_option("--per-instance-csv", csv_path, "write per-instance rows here");
        eval.attach(cmd);
    }

    void run() const {
        rns::Corpus corpus = rns::Corpus::load(corpus_path);
        rns::ModelParams params = rns::load_checkpoint(checkpoint);
        params.config.validate(corpus.doc_len());

        std::ofstream csv;
        std::ostream* csv_stream = nullptr;
        if (!csv_path.empty()) {
            csv.open(csv_path);
            if (!csv) throw rns::IoError("cannot write per-instance csv: " + csv_path);
            csv_stream = &csv;
        }
        rns::MetricReport report = run_evaluation(corpus, params, eval, csv_stream);
        json out = report_json(report);
        out["config"] = config_echo();
        emit(out.dump(2), out_path);
    }

    json config_echo() const {
        json cfg = {{"corpus", corpus_path}, {"checkpoint", checkpoint}};
        cfg.update(eval.echo());
        return cfg;
    }
};

// ---- ablate -----------------------------------------------------------------

struct AblateCmd {
    std::string corpus_path;
    std::string out_path;
    std::vector<std::string> variants = {"full", "no-individual", "no-union", "no-position",
                                         "no-aspect"};
    ModelFlags model;
    TrainFlags trainer;
    EvalFlags eval;

    void attach(CLI::App* cmd) {
        cmd->add_option("--corpus", corpus_path, "corpus cache from prepare")
            ->required()
            ->check(CLI::ExistingFile);
        cmd->add_option("--out", out_path, "report path (default stdout)");
        cmd->add_option("--variants", variants,
                        "subset of full,no-individual,no-union,no-position,no-aspect")
            ->delimiter(',')
            ->capture_default_str();
        model.attach(cmd);
        trainer.attach(cmd);
        eval.attach(cmd);
    }

    static rns::ModelConfig variant_config(rns::ModelConfig base, const std::string& name) {
        if (name == "full") return base;
        if (name == "no-individual") {
            base.use_individual = false;
        } else if (name == "no-union") {
            base.use_union = false;
        } else if (name == "no-position") {
            base.use_position = false;
        } else if (name == "no-aspect") {
            base.use_aspects = false;
        } else {
            throw rns::ConfigError("unknown ablation variant '" + name + "'");
        }
        return base;
    }

    void run() const {
        rns::Corpus corpus = rns::Corpus::load(corpus_path);
        rns::TrainConfig tcfg = trainer.to_config();
        tcfg.validate();
        // validate every variant before any training starts
        std::vector<rns::ModelConfig> configs;
        for (const auto& name : variants) {
            rns::ModelConfig cfg = variant_config(model.to_config(), name);
            cfg.validate(corpus.doc_len());
            configs.push_back(cfg);
        }

        json results = json::array();
        for (std::size_t i = 0; i < variants.size(); ++i) {
            std::cerr << "ablate: training variant " << variants[i] << "\n";
            rns::ModelParams params =
                rns::ModelParams::init(configs[i], corpus.vocab().size(), model.init_seed);
            rns::train(corpus, params, tcfg);
            rns::MetricReport report = run_evaluation(corpus, params, eval, nullptr);
            json entry = report_json(report);
            entry["variant"] = variants[i];
            entry["parameter_count"] = params.parameter_count();
            results.push_back(std::move(entry));
        }
        json out = {{"results", results}, {"config", config_echo()}};
        emit(out.dump(2), out_path);
    }

    json config_echo() const {
        json cfg = {{"corpus", corpus_path}, {"variants", variants}};
        cfg.update(model.echo());
        cfg.update(trainer.echo());
        cfg.update(eval.echo());
        return cfg;
    }
};

// ---- sweep ------------------------------------------------------------------

struct SweepCmd {
    std::string corpus_path;
    std::string out_path;
    std::string param = "alpha";
    std::vector<double> values;
    ModelFlags model;
    TrainFlags trainer;
    EvalFlags eval;

    void attach(CLI::App* cmd) {
        cmd->add_option("--corpus", corpus_path, "corpus cache from prepare")
            ->required()
            ->check(CLI::ExistingFile);
        cmd->add_option("--out", out_path, "csv path (default stdout)");
        cmd->add_option("--param", param, "L or alpha")
            ->check(CLI::IsMember({"L", "alpha"}))
            ->capture_default_str();
        cmd->add_option("--values", values, "comma-separated sweep values")
            ->delimiter(',')
            ->required();
        model.attach(cmd);
        trainer.attach(cmd);
        eval.attach(cmd);
    }

    void run() const {
        rns::Corpus corpus = rns::Corpus::load(corpus_path);
        rns::TrainConfig tcfg = trainer.to_config();
        tcfg.validate();
        // validate the whole grid up front
        std::vector<rns::ModelConfig> configs;
        for (double v : values) {
            rns::ModelConfig cfg = model.to_config();
            if (param == "L") {
                const int l = static_cast<int>(v);
                if (static_cast<double>(l) != v)
                    throw rns::ConfigError("L sweep values must be integers");
                cfg.history_len = l;
            } else {
                cfg.alpha = v;
            }
            cfg.validate(corpus.doc_len());
            configs.push_back(cfg);
        }

        std::ostringstream csv;
        csv << "param,value,precision,recall,ndcg,hr\n";
        for (std::size_t i = 0; i < values.size(); ++i) {
            std::cerr << "sweep: " << param << " = " << values[i] << "\n";
            rns::ModelParams params =
                rns::ModelParams::init(configs[i], corpus.vocab().size(), model.init_seed);
            rns::train(corpus, params, tcfg);
            rns::MetricReport report = run_evaluation(corpus, params, eval, nullptr);
            csv << param << ',' << values[i] << ',' << report.precision << ','
                << report.recall << ',' << report.ndcg << ',' << report.hr << "\n";
        }
        std::string text = csv.str();
        text.pop_back();  // emit() appends the final newline
        emit(text, out_path);
    }
};

// ---- inspect ----------------------------------------------------------------

struct InspectCmd {
    std::string corpus_path;
    std::string checkpoint;
    std::string user;
    std::string out_path;
    std::string protocol = "per-user";

    void attach(CLI::App* cmd) {
        cmd->add_option("--corpus", corpus_path, "corpus cache from prepare")
            ->required()
            ->check(CLI::ExistingFile);
        cmd->add_option("--checkpoint", checkpoint, "model checkpoint from train")
            ->required()
            ->check(CLI::ExistingFile);
        cmd->add_option("--user", user, "external user id to inspect")->required();
        cmd->add_option("--protocol", protocol, "per-user or per-step")
            ->check(CLI::IsMember({"per-user", "per-step"}))
            ->capture_default_str();
        cmd->add_option("--out", out_path, "report path (default stdout)");
    }

    void run() const {
        rns::Corpus corpus = rns::Corpus::load(corpus_path);
        const int uid = corpus.user_id(user);
        if (uid < 0) throw rns::ConfigError("unknown user id '" + user + "'");
        rns::ModelParams params = rns::load_checkpoint(checkpoint);
        params.config.validate(corpus.doc_len());
        const int history_len = params.config.history_len;

        // (history, relevant) pairs for this user under the chosen protocol
        std::vector<std::pair<std::vector<int>, std::vector<int>>> cases;
        const auto& train = corpus.train_seq(uid);
        const auto& test = corpus.test_seq(uid);
        if (test.empty()) throw rns::ConfigError("user '" + user + "' has no test items");
        auto window = [&](const std::vector<int>& seq, std::size_t end) {
            std::vector<int> hist(static_cast<std::size_t>(history_len), rns::Corpus::kNullItem);
            const std::size_t take =
                std::min<std::size_t>(end, static_cast<std::size_t>(history_len));
            for (std::size_t k = 0; k < take; ++k)
                hist[static_cast<std::size_t>(history_len) - take + k] = seq[end - take + k];
            return hist;
        };
        if (protocol == "per-user") {
            std::vector<int> relevant;
            for (int item : test)
                if (std::find(relevant.begin(), relevant.end(), item) == relevant.end())
                    relevant.push_back(item);
            cases.emplace_back(window(train, train.size()), relevant);
        } else {
            std::vector<int> full(train.begin(), train.end());
            full.insert(full.end(), test.begin(), test.end());
            for (std::size_t p = train.size(); p < full.size(); ++p)
                cases.emplace_back(window(full, p), std::vector<int>{full[p]});
        }

        rns::EvalCache cache = rns::build_eval_cache(corpus, params);
        json records = json::array();
        for (std::size_t idx = 0; idx < cases.size(); ++idx) {
            const auto& [history, relevant] = cases[idx];
            std::vector<rns::CandidateTrace> traces;
            rns::score_with_cache(cache, params, uid, history, relevant, &traces);
            json history_names = json::array();
            for (int id : history)
                history_names.push_back(id == rns::Corpus::kNullItem ? json(nullptr)
                                                                     : json(corpus.item_name(id)));
            for (const auto& trace : traces) {
                records.push_back(json{{"instance", idx},
                                       {"user", user},
                                       {"candidate_item", corpus.item_name(trace.item)},
                                       {"history", history_names},
                                       {"union_weights", trace.union_weights},
                                       {"pointer_position", trace.pointer_position},
                                       {"beta_union", trace.beta_union},
                                       {"beta_individual", trace.beta_individual},
                                       {"score", trace.score}});
            }
        }
        json out = {{"records", records},
                    {"config",
                     {{"corpus", corpus_path},
                      {"checkpoint", checkpoint},
                      {"user", user},
                      {"protocol", protocol}}}};
        emit(out.dump(2), out_path);
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"review-driven neural sequential recommender"};
    app.require_subcommand(1);

    SynthCmd synth;
    synth.attach(app.add_subcommand("synth", "generate a planted-pattern review corpus")
                     ->fallthrough());
    PrepareCmd prepare;
    prepare.attach(app.add_subcommand("prepare", "build the corpus cache from raw reviews"));
    TrainCmd train;
    train.attach(app.add_subcommand("train", "train a model on a prepared corpus"));
    EvaluateCmd evaluate;
    evaluate.attach(app.add_subcommand("evaluate", "rank held-out items and report metrics"));
    AblateCmd ablate;
    ablate.attach(app.add_subcommand("ablate", "train and evaluate ablation variants"));
    SweepCmd sweep;
    sweep.attach(app.add_subcommand("sweep", "sweep L or alpha and tabulate metrics"));
    InspectCmd inspect;
    inspect.attach(app.add_subcommand("inspect", "dump attention weights for one user"));

    for (CLI::App* sub : app.get_subcommands({})) sub->set_config("--config");

    try {
        app.parse(argc, argv);
        if (app.got_subcommand("synth")) synth.run();
        if (app.got_subcommand("prepare")) prepare.run();
        if (app.got_subcommand("train")) train.run();
        if (app.got_subcommand("evaluate")) evaluate.run();
        if (app.got_subcommand("ablate")) ablate.run();
        if (app.got_subcommand("sweep")) sweep.run();
        if (app.got_subcommand("inspect")) inspect.run();
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const rns::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
