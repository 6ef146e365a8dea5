#include "chaosssl/pipeline.hpp"

#include <json.hpp>

#include "binary_io.hpp"
#include "chaosssl/errors.hpp"

namespace chaosssl {

namespace {

// Sub-seed tags for parameter initialization.
constexpr std::uint64_t kTinyInit = 10;
constexpr std::uint64_t kLargeInit = 11;
constexpr std::uint64_t kProjectorInit = 12;
constexpr std::uint64_t kTinyHeadInit = 13;
constexpr std::uint64_t kLargeHeadInit = 14;
constexpr std::uint64_t kFusionHeadInit = 15;

template <typename Fn>
auto in_stage(const std::string& stage, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(stage, e.what());
    }
}

std::map<std::string, std::string> base_meta(const ExperimentConfig& cfg, const std::string& stage, int epochs) {
    return {{"stage", stage},
            {"epochs", std::to_string(epochs)},
            {"seed", std::to_string(cfg.seed)},
            {"map", to_string(cfg.map_kind)},
            {"config_hash", config_hash(cfg)}};
}

Rng init_rng(const ExperimentConfig& cfg, std::uint64_t tag) { return Rng(cfg.stage_seed(tag)); }

Dataset load_train(const ExperimentConfig& cfg) {
    const RunPaths paths{cfg.output_dir};
    return load_dataset(paths.data() / "train.bin", paths.data() / "train.labels", cfg.dataset.num_classes);
}

Dataset load_test(const ExperimentConfig& cfg) {
    const RunPaths paths{cfg.output_dir};
    return load_dataset(paths.data() / "test.bin", paths.data() / "test.labels", cfg.dataset.num_classes);
}

void check_width(const Mlp& encoder, std::size_t expected, const std::string& what) {
    if (encoder.input_dim() != expected) {
        throw ContractError(what + " expects inputs of width " + std::to_string(encoder.input_dim()) + ", data has " +
                            std::to_string(expected));
    }
}

nlohmann::json metrics_json(const MetricsReport& m) {
    return {{"accuracy", m.accuracy}, {"macro_f1", m.macro_f1}, {"confusion", m.confusion}};
}

}  // namespace

// --- Checkpoint conversions --------------------------------------------------------

Checkpoint encoder_checkpoint(const Mlp& encoder, std::map<std::string, std::string> metadata) {
    metadata["model"] = "encoder";
    return {std::move(metadata), encoder.named_parameters("encoder")};
}

Mlp encoder_from_checkpoint(const Checkpoint& ckpt) { return Mlp::from_named(ckpt.tensors, "encoder", true); }

Checkpoint classifier_checkpoint(const Classifier& model, std::map<std::string, std::string> metadata) {
    metadata["model"] = "classifier";
    return {std::move(metadata), model.named_parameters()};
}

Classifier classifier_from_checkpoint(const Checkpoint& ckpt) {
    Classifier model{Mlp::from_named(ckpt.tensors, "encoder", true), {}};
    Tensor w = ckpt.tensor("head.weight").clone();
    Tensor b = ckpt.tensor("head.bias").clone();
    w.set_requires_grad(true);
    b.set_requires_grad(true);
    if (w.dim() != 2 || w.cols() != model.encoder.output_dim() || b.numel() != w.rows()) {
        throw ContractError("classifier head does not fit the encoder");
    }
    model.head.layer = {w, b};
    return model;
}

Checkpoint fusion_checkpoint(const FusionModel& model, std::map<std::string, std::string> metadata) {
    metadata["model"] = "fusion";
    return {std::move(metadata), model.named_parameters()};
}

FusionModel fusion_from_checkpoint(const Checkpoint& ckpt) { return FusionModel::from_named(ckpt.tensors); }

MetricsReport evaluate(const Classifier& model, const Dataset& test) {
    if (test.size() == 0) throw ContractError("cannot evaluate on an empty test set");
    if (model.head.num_classes() != test.num_classes) throw ContractError("model class count does not match test labels");
    return evaluate(test.labels, predict(model, test.images), test.num_classes);
}

MetricsReport evaluate(const FusionModel& model, const Dataset& test) {
    if (test.size() == 0) throw ContractError("cannot evaluate on an empty test set");
    if (model.num_classes() != test.num_classes) throw ContractError("model class count does not match test labels");
    return evaluate(test.labels, predict(model, test.images), test.num_classes);
}

std::string PipelineReport::to_json() const {
    nlohmann::json j = metrics_json(fusion);
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    j["map"] = map_kind;
    j["stages"] = {{"tiny_ssl", metrics_json(tiny)}, {"large", metrics_json(large)}, {"fusion", metrics_json(fusion)}};
    if (tiny_baseline) j["stages"]["tiny_baseline"] = metrics_json(*tiny_baseline);
    j["pretrain_epoch_losses"] = pretrain_epoch_losses;
    return j.dump(2) + "\n";
}

// --- Stages ----------------------------------------------------------------------

void stage_gen_data(const ExperimentConfig& cfg) {
    in_stage("gen-data", [&] {
        save_split(RunPaths{cfg.output_dir}.data(), gen_dataset(cfg.dataset));
    });
}

std::vector<double> stage_pretrain(const ExperimentConfig& cfg) {
    return in_stage("pretrain", [&] {
        const RunPaths paths{cfg.output_dir};
        const Dataset train = load_train(cfg);
        Rng enc_rng = init_rng(cfg, kTinyInit);
        Rng proj_rng = init_rng(cfg, kProjectorInit);
        ContrastiveModel model{make_encoder(cfg.tiny_encoder(), enc_rng),
                               Mlp::random(cfg.tiny_feature_dim, cfg.projector.layer_dims, false, proj_rng)};
        check_width(model.encoder, train.images.front().size(), "tiny encoder");
        save_checkpoint(paths.encoder_init(), encoder_checkpoint(model.encoder, base_meta(cfg, "init", 0)));

        auto result = pretrain(train.images, cfg.augment, cfg.map_spec(), cfg.pretrain, std::move(model));
        auto meta = base_meta(cfg, "pretrain", cfg.pretrain.epochs);
        meta["epoch_losses"] = nlohmann::json(result.epoch_losses).dump();
        save_checkpoint(paths.ssl_encoder(), encoder_checkpoint(result.encoder, std::move(meta)));
        return result.epoch_losses;
    });
}

void stage_finetune(const ExperimentConfig& cfg) {
    in_stage("finetune", [&] {
        const RunPaths paths{cfg.output_dir};
        const Dataset train = load_train(cfg);
        const auto data = train.view();

        auto run = [&](Mlp encoder, std::uint64_t head_tag, const FinetuneConfig& ft, const std::string& stage,
                       const std::filesystem::path& out) {
            check_width(encoder, train.images.front().size(), stage);
            Rng head_rng = init_rng(cfg, head_tag);
            Classifier model{std::move(encoder), {}};
            model.head = ClassifierHead::random(model.encoder.output_dim(), train.num_classes, head_rng);
            finetune(model, data, ft);
            save_checkpoint(out, classifier_checkpoint(model, base_meta(cfg, stage, ft.epochs)));
        };

        run(encoder_from_checkpoint(load_checkpoint(paths.ssl_encoder())), kTinyHeadInit, cfg.finetune_tiny,
            "finetune-tiny", paths.tiny());
        Rng large_rng = init_rng(cfg, kLargeInit);
        run(make_encoder(cfg.large_encoder(), large_rng), kLargeHeadInit, cfg.finetune_large, "finetune-large",
            paths.large());
        if (cfg.baseline) {
            // Same initialization and schedule as the tiny model, minus pretraining.
            run(encoder_from_checkpoint(load_checkpoint(paths.encoder_init())), kTinyHeadInit, cfg.finetune_tiny,
                "finetune-tiny-baseline", paths.tiny_baseline());
        }
    });
}

void stage_fuse(const ExperimentConfig& cfg) {
    in_stage("fuse", [&] {
        const RunPaths paths{cfg.output_dir};
        const Dataset train = load_train(cfg);
        Classifier large = classifier_from_checkpoint(load_checkpoint(paths.large()));
        Classifier tiny = classifier_from_checkpoint(load_checkpoint(paths.tiny()));
        Rng head_rng = init_rng(cfg, kFusionHeadInit);
        FusionModel model = FusionModel::assemble(std::move(large.encoder), std::move(tiny.encoder), train.num_classes, head_rng);
        train_fusion(model, train.view(), cfg.fusion);
        save_checkpoint(paths.fusion(), fusion_checkpoint(model, base_meta(cfg, "fuse", cfg.fusion.epochs)));
    });
}

PipelineReport stage_evaluate(const ExperimentConfig& cfg) {
    return in_stage("evaluate", [&] {
        const RunPaths paths{cfg.output_dir};
        const Dataset test = load_test(cfg);
        PipelineReport report;
        report.fusion = evaluate(fusion_from_checkpoint(load_checkpoint(paths.fusion())), test);
        report.tiny = evaluate(classifier_from_checkpoint(load_checkpoint(paths.tiny())), test);
        report.large = evaluate(classifier_from_checkpoint(load_checkpoint(paths.large())), test);
        if (cfg.baseline && std::filesystem::exists(paths.tiny_baseline())) {
            report.tiny_baseline = evaluate(classifier_from_checkpoint(load_checkpoint(paths.tiny_baseline())), test);
        }
        const Checkpoint ssl = load_checkpoint(paths.ssl_encoder());
        if (ssl.metadata.count("epoch_losses")) {
            report.pretrain_epoch_losses = nlohmann::json::parse(ssl.meta("epoch_losses")).get<std::vector<double>>();
        }
        report.map_kind = to_string(cfg.map_kind);
        report.config_hash = config_hash(cfg);
        report.seed = cfg.seed;
        binary::write_text(paths.metrics(), report.to_json());
        return report;
    });
}

PipelineReport run_pipeline(const ExperimentConfig& cfg) {
    in_stage("config", [&] { cfg.validate(); });
    stage_gen_data(cfg);
    stage_pretrain(cfg);
    stage_finetune(cfg);
    stage_fuse(cfg);
    return stage_evaluate(cfg);
}

}  // namespace chaosssl
