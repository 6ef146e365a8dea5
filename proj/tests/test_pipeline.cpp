#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "chaosssl/errors.hpp"
#include "chaosssl/pipeline.hpp"

using namespace chaosssl;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config(const std::string& name, int epochs) {
    ExperimentConfig cfg = parse_config(R"(
dataset: {images_per_class: 30, height: 12, width: 12}
encoder_tiny: {hidden: [32], feature_dim: 16}
encoder_large: {hidden: [48], feature_dim: 24}
projector: {dims: [32, 32, 128]}
pretrain: {batch_size: 25}
)");
    cfg.output_dir = fs::temp_directory_path() / ("chaosssl_pipeline_" + name);
    fs::remove_all(cfg.output_dir);
    cfg.pretrain.epochs = cfg.finetune_tiny.epochs = cfg.finetune_large.epochs = cfg.fusion.epochs = epochs;
    return cfg;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("untrained pipeline scores near chance") {
    const ExperimentConfig cfg = small_config("untrained", 0);
    const PipelineReport r = run_pipeline(cfg);
    CHECK(r.pretrain_epoch_losses.empty());
    CHECK(r.fusion.accuracy <= 0.5);
    CHECK(r.fusion.confusion.size() == 4);
    CHECK(fs::exists(RunPaths{cfg.output_dir}.metrics()));
    fs::remove_all(cfg.output_dir);
}

TEST_CASE("a short run writes every artifact and reproduces byte for byte") {
    const ExperimentConfig a = small_config("det_a", 1);
    ExperimentConfig b = small_config("det_b", 1);
    const PipelineReport ra = run_pipeline(a);
    const PipelineReport rb = run_pipeline(b);
    const RunPaths pa{a.output_dir}, pb{b.output_dir};
    for (auto member : {&RunPaths::encoder_init, &RunPaths::ssl_encoder, &RunPaths::tiny, &RunPaths::large,
                        &RunPaths::tiny_baseline, &RunPaths::fusion, &RunPaths::metrics}) {
        REQUIRE(fs::exists((pa.*member)()));
        CHECK(slurp((pa.*member)()) == slurp((pb.*member)()));
    }
    CHECK(ra.pretrain_epoch_losses.size() == 1);
    CHECK(ra.to_json() == rb.to_json());
    CHECK(ra.tiny_baseline.has_value());
    const std::string json = slurp(pa.metrics());
    for (const char* key : {"\"accuracy\"", "\"macro_f1\"", "\"confusion\"", "\"config_hash\"", "\"seed\""})
        CHECK(json.find(key) != std::string::npos);
    fs::remove_all(a.output_dir);
    fs::remove_all(b.output_dir);
}

TEST_CASE("stage failures are tagged with the stage name") {
    const ExperimentConfig cfg = small_config("missing", 0);
    try {
        stage_finetune(cfg);
        FAIL("expected a StageError");
    } catch (const StageError& e) {
        CHECK(e.stage() == "finetune");
    }
    try {
        stage_evaluate(cfg);
        FAIL("expected a StageError");
    } catch (const StageError& e) {
        CHECK(e.stage() == "evaluate");
    }
    stage_gen_data(cfg);
    try {
        stage_fuse(cfg);
        FAIL("expected a StageError");
    } catch (const StageError& e) {
        CHECK(e.stage() == "fuse");
    }
    fs::remove_all(cfg.output_dir);
}
