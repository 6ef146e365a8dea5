// Command-line driver: one subcommand per pipeline stage plus run-all and verify.

#include <chrono>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "chaosssl/config.hpp"
#include "chaosssl/errors.hpp"
#include "chaosssl/pipeline.hpp"
#include "chaosssl/verify.hpp"

namespace {

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> map;
    std::optional<int> ssl_epochs;
    std::optional<std::string> out;
};

chaosssl::ExperimentConfig resolve(const Flags& f) {
    using namespace chaosssl;
    ExperimentConfig cfg;
    try {
        if (!f.config.empty()) cfg = load_config(f.config);
        if (f.seed) cfg.seed = *f.seed;
        if (f.map) {
            cfg.map_kind = parse_map_kind(*f.map);
            cfg.map_param.reset();
        }
        if (f.ssl_epochs) cfg.pretrain.epochs = *f.ssl_epochs;
        if (f.out) cfg.output_dir = *f.out;
        cfg.propagate();
        cfg.validate();
    } catch (const std::exception& e) {
        throw StageError("config", e.what());
    }
    return cfg;
}

void add_common(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config, "YAML config file (defaults apply when omitted)");
    cmd->add_option("--seed", f.seed, "global seed");
    cmd->add_option("--map", f.map, "chaotic map")->check(CLI::IsMember({"logistic", "tent", "sine"}, CLI::ignore_case));
    cmd->add_option("--ssl-epochs", f.ssl_epochs, "contrastive pre-training epochs")->check(CLI::PositiveNumber);
    cmd->add_option("--out", f.out, "run directory");
}

template <typename Fn>
void timed(const std::string& name, Fn&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cerr << name << ": done in " << s << " s\n";
}

void print_summary(const chaosssl::PipelineReport& r) {
    std::cout << "tiny (ssl)      acc " << r.tiny.accuracy << "  macro_f1 " << r.tiny.macro_f1 << "\n";
    if (r.tiny_baseline) {
        std::cout << "tiny (random)   acc " << r.tiny_baseline->accuracy << "  macro_f1 " << r.tiny_baseline->macro_f1
                  << "\n";
    }
    std::cout << "large           acc " << r.large.accuracy << "  macro_f1 " << r.large.macro_f1 << "\n";
    std::cout << "fusion          acc " << r.fusion.accuracy << "  macro_f1 " << r.fusion.macro_f1 << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    using namespace chaosssl;
    CLI::App app{"Chaos-augmented contrastive pre-training and feature fusion"};
    app.require_subcommand(1);

    Flags flags;
    auto* gen = app.add_subcommand("gen-data", "generate the synthetic texture dataset");
    auto* pre = app.add_subcommand("pretrain", "contrastive pre-training of the tiny encoder");
    auto* fine = app.add_subcommand("finetune", "fine-tune the tiny and large classifiers");
    auto* fuse = app.add_subcommand("fuse", "train the attention fusion head");
    auto* eval = app.add_subcommand("evaluate", "score every model on the test split, write metrics.json");
    auto* all = app.add_subcommand("run-all", "every stage in order");
    auto* ver = app.add_subcommand("verify", "oracle and property checks");
    auto* dump = app.add_subcommand("print-config", "print the effective config as YAML (defaults only) or JSON");
    for (auto* cmd : {gen, pre, fine, fuse, eval, all, dump}) add_common(cmd, flags);

    bool with_experiment = false;
    std::string verify_dir = "chaosssl-verify";
    ver->add_flag("--experiment", with_experiment, "also run the end-to-end and determinism checks (minutes)");
    ver->add_option("--out", verify_dir, "scratch directory for file and pipeline checks");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*ver) {
            VerifyOptions opts;
            opts.work_dir = verify_dir;
            opts.include_experiment = with_experiment;
            const auto results = run_verify(opts, std::cout);
            for (const auto& r : results)
                if (!r.passed()) return 1;
            return 0;
        }
        if (*dump) {
            if (flags.config.empty() && !flags.seed && !flags.map && !flags.ssl_epochs && !flags.out) {
                std::cout << default_config_yaml();
            } else {
                std::cout << config_json(resolve(flags)) << "\n";
            }
            return 0;
        }
        const ExperimentConfig cfg = resolve(flags);
        if (*gen) timed("gen-data", [&] { stage_gen_data(cfg); });
        if (*pre) timed("pretrain", [&] { stage_pretrain(cfg); });
        if (*fine) timed("finetune", [&] { stage_finetune(cfg); });
        if (*fuse) timed("fuse", [&] { stage_fuse(cfg); });
        if (*eval) timed("evaluate", [&] { print_summary(stage_evaluate(cfg)); });
        if (*all) {
            cfg.validate();
            timed("gen-data", [&] { stage_gen_data(cfg); });
            timed("pretrain", [&] { stage_pretrain(cfg); });
            timed("finetune", [&] { stage_finetune(cfg); });
            timed("fuse", [&] { stage_fuse(cfg); });
            timed("evaluate", [&] { print_summary(stage_evaluate(cfg)); });
        }
    } catch (const StageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: [internal] " << e.what() << "\n";
        return 3;
    }
    return 0;
}
