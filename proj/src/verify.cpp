#include "chaosssl/verify.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "binary_io.hpp"
#include "chaosssl/checkpoint.hpp"
#include "chaosssl/chaos_maps.hpp"
#include "chaosssl/contrastive.hpp"
#include "chaosssl/dataset.hpp"
#include "chaosssl/errors.hpp"
#include "chaosssl/finetune.hpp"
#include "chaosssl/fusion.hpp"
#include "chaosssl/metrics.hpp"
#include "chaosssl/pipeline.hpp"

namespace chaosssl {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string sci(double v) {
    std::ostringstream os;
    os << std::scientific << std::setprecision(2) << v;
    return os.str();
}

Tensor normal_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    std::vector<double> v(rows * cols);
    for (double& x : v) x = dist(rng);
    return Tensor::from({rows, cols}, std::move(v));
}

// |a - n| / max(|a|, |n|, floor). The floor keeps exact zeros (dead ReLU
// units) and gradients at rounding-noise level from dominating the ratio.
constexpr double kGradFloor = 1e-6;
constexpr double kFdStep = 1e-5;

double rel_error(double analytic, double numeric) {
    return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), kGradFloor});
}

struct GradCheck {
    double max_rel = 0.0;
    std::size_t samples = 0;
};

// Compares backward() against central differences on randomly drawn scalar
// parameters.
GradCheck sample_gradients(const std::vector<Tensor>& params, const std::function<Tensor()>& loss_fn,
                           std::size_t samples, Rng& rng) {
    for (auto p : params) p.zero_grad();
    backward(loss_fn());
    std::vector<std::vector<double>> analytic;
    std::size_t total = 0;
    for (const auto& p : params) {
        analytic.emplace_back(p.grad().begin(), p.grad().end());
        if (analytic.back().empty()) analytic.back().assign(p.numel(), 0.0);
        total += p.numel();
    }

    const auto value = [&](const Tensor&) { return loss_fn().item(); };
    std::uniform_int_distribution<std::size_t> pick(0, total - 1);
    GradCheck out;
    for (std::size_t s = 0; s < samples; ++s) {
        std::size_t flat = pick(rng), which = 0;
        while (flat >= params[which].numel()) flat -= params[which++].numel();
        const double numeric = finite_diff_at(value, params[which], flat, kFdStep);
        out.max_rel = std::max(out.max_rel, rel_error(analytic[which][flat], numeric));
        ++out.samples;
    }
    return out;
}

bool same_bits(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

template <typename Fn>
bool throws_load_error(Fn&& fn) {
    try {
        fn();
    } catch (const LoadError&) {
        return true;
    } catch (...) {
        return false;
    }
    return false;
}

std::vector<char> file_bytes(const fs::path& p) { return binary::read_file(p); }

ExperimentOptions with_defaults(ExperimentOptions opts) {
    if (!opts.runner) opts.runner = [](const ExperimentConfig& cfg) { run_pipeline(cfg); };
    if (!opts.rerun) opts.rerun = opts.runner;
    return opts;
}

ExperimentConfig config_for_seed(const ExperimentOptions& opts, std::uint64_t seed, const fs::path& dir) {
    ExperimentConfig cfg = opts.base;
    cfg.seed = seed;
    cfg.output_dir = dir;
    cfg.propagate();
    return cfg;
}

PipelineReport read_report(const ExperimentConfig& cfg) {
    // Scores the stored checkpoints again; this also rewrites metrics.json
    // with identical content.
    return stage_evaluate(cfg);
}

}  // namespace

std::string format_result(const CheckResult& r) {
    std::ostringstream os;
    os << (r.passed() ? "PASS" : "FAIL") << " [criterion " << r.id << "] " << r.name << " (" << std::fixed
       << std::setprecision(2) << r.seconds << " s";
    if (r.limit_seconds > 0.0) os << ", limit " << r.limit_seconds << " s";
    os << "): " << r.detail;
    if (r.property_ok && !r.passed()) os << " [runtime limit exceeded]";
    return os.str();
}

// --- NT-Xent: vectorized loss against the double-loop oracle -----------------

CheckResult check_nt_xent_oracle() {
    CheckResult r{2, "NT-Xent fast loss matches brute-force oracle", false, 0.0, 5.0, ""};
    const auto t0 = Clock::now();
    constexpr double kTol = 1e-10;
    constexpr double kTau = 0.5;
    double worst = 0.0;
    std::size_t batches = 0;
    Rng rng(20240601);
    for (std::size_t n = 1; n <= 4; ++n) {
        const auto pairing = standard_pairing(n);
        for (std::size_t width : {std::size_t{2}, std::size_t{128}}) {
            for (int b = 0; b < 50; ++b) {
                const Tensor z = normal_matrix(2 * n, width, rng);
                worst = std::max(worst, std::abs(nt_xent_loss(z, pairing, kTau).item() - nt_xent_oracle(z, pairing, kTau)));
                ++batches;
            }
        }
    }
    // Two identical rows: the positive is the only candidate, so the loss is 0.
    bool identical_zero = true;
    for (std::size_t width : {std::size_t{2}, std::size_t{128}}) {
        for (int b = 0; b < 50; ++b) {
            const Tensor row = normal_matrix(1, width, rng);
            std::vector<double> both(row.data().begin(), row.data().end());
            both.insert(both.end(), row.data().begin(), row.data().end());
            const Tensor z = Tensor::from({2, width}, std::move(both));
            identical_zero = identical_zero && nt_xent_loss(z, standard_pairing(1), kTau).item() == 0.0;
        }
    }
    r.seconds = seconds_since(t0);
    r.property_ok = worst <= kTol && identical_zero;
    r.detail = "max |fast - oracle| = " + sci(worst) + " over " + std::to_string(batches) + " batches (tol " + sci(kTol) +
               "); N=1 identical pair gives exactly 0: " + (identical_zero ? "yes" : "no");
    return r;
}

// --- Composite gradients against finite differences -----------------------------

CheckResult check_gradient_fidelity() {
    CheckResult r{3, "Composite gradients match central finite differences", false, 0.0, 60.0, ""};
    const auto t0 = Clock::now();
    constexpr double kTol = 1e-4;
    constexpr std::size_t kSamples = 150;
    Rng rng(77);

    // encoder -> projector -> NT-Xent
    const EncoderSpec enc{12, {10}, 8};
    const auto proj = ProjectorSpec::reduced_for_tests({8, 8, 4});
    const ContrastiveModel ssl = ContrastiveModel::random(enc, proj, rng);
    const Tensor views = normal_matrix(6, 12, rng);
    const auto pairing = standard_pairing(3);
    std::vector<Tensor> ssl_params = ssl.encoder.parameters();
    for (const auto& p : ssl.projector.parameters()) ssl_params.push_back(p);
    const GradCheck g_ssl = sample_gradients(
        ssl_params, [&] { return nt_xent_loss(ssl.project(ssl.encode(views)), pairing, 0.5); }, kSamples, rng);

    // backbones -> SE gate -> classifier -> cross-entropy
    Mlp b1 = Mlp::random(12, {10, 6}, true, rng);
    Mlp b2 = Mlp::random(12, {7, 5}, true, rng);
    const FusionModel fusion = FusionModel::assemble(std::move(b1), std::move(b2), 3, rng);
    const Tensor batch = normal_matrix(8, 12, rng);
    const std::vector<int> labels{0, 1, 2, 0, 1, 2, 2, 1};
    std::vector<Tensor> fusion_params = fusion.backbone_parameters();
    for (const auto& p : fusion.head_parameters()) fusion_params.push_back(p);
    const GradCheck g_fusion = sample_gradients(
        fusion_params, [&] { return cross_entropy(fusion.forward(batch), labels); }, kSamples, rng);

    r.seconds = seconds_since(t0);
    r.property_ok = g_ssl.max_rel <= kTol && g_fusion.max_rel <= kTol && g_ssl.samples >= 100 && g_fusion.samples >= 100;
    r.detail = "SSL chain max rel err " + sci(g_ssl.max_rel) + " (" + std::to_string(g_ssl.samples) +
               " params), fusion chain max rel err " + sci(g_fusion.max_rel) + " (" + std::to_string(g_fusion.samples) +
               " params); tol " + sci(kTol) + ", step " + sci(kFdStep) + ", floor " + sci(kGradFloor);
    return r;
}

// --- Chaotic maps ----------------------------------------------------------------

CheckResult check_chaotic_maps() {
    CheckResult r{4, "Chaotic map range, Tent fixed point, Logistic sensitivity, determinism", false, 0.0, 5.0, ""};
    const auto t0 = Clock::now();
    Rng rng(4242);
    std::ostringstream detail;

    // (a) outputs stay in [0,1]
    bool in_range = true;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (MapKind kind : {MapKind::Logistic, MapKind::Tent, MapKind::Sine}) {
        const auto spec = ChaoticMapSpec::defaults(kind);
        for (int i = 0; i < 10000; ++i) {
            const double x = i == 0 ? 0.0 : i == 1 ? 1.0 : unit(rng);
            const double once = map_step(x, spec);
            const double many = iterate_map(x, sample_k(rng, spec), spec);
            in_range = in_range && once >= 0.0 && once <= 1.0 && many >= 0.0 && many <= 1.0;
        }
    }
    detail << "(a) range " << (in_range ? "ok" : "VIOLATED");

    // (b) Tent fixed point 2/3: one step moves by <= 1e-15, k steps by <= k * 1e-15
    const auto tent = ChaoticMapSpec::defaults(MapKind::Tent);
    const double fixed = 2.0 / 3.0;
    double worst_step = std::abs(map_step(fixed, tent) - fixed);
    bool fixed_ok = worst_step <= 1e-15;
    for (int k = 1; k <= tent.k_max; ++k) {
        const double drift = std::abs(iterate_map(fixed, k, tent) - fixed);
        fixed_ok = fixed_ok && drift <= k * 1e-15;
        worst_step = std::max(worst_step, drift / k);
    }
    detail << "; (b) Tent 2/3 drift per step " << sci(worst_step) << (fixed_ok ? "" : " EXCEEDS 1e-15");

    // (c) Logistic orbits from x0 and x0 + 1e-8 separate by > 0.01 within 50 steps
    const auto logistic = ChaoticMapSpec::defaults(MapKind::Logistic);
    std::uniform_real_distribution<double> interior(0.01, 0.99);
    int diverged = 0;
    for (int i = 0; i < 100; ++i) {
        const auto gaps = sensitivity_probe(interior(rng), 1e-8, 50, logistic);
        diverged += std::any_of(gaps.begin(), gaps.end(), [](double g) { return g > 0.01; });
    }
    const bool sensitive = diverged >= 90;
    detail << "; (c) Logistic divergence " << diverged << "/100";

    // (d) the pixel-wise transform is a pure function
    ImageTensor img(3, 16, 16);
    for (double& v : img.pixels()) v = unit(rng);
    bool deterministic = true;
    for (MapKind kind : {MapKind::Logistic, MapKind::Tent, MapKind::Sine}) {
        const auto spec = ChaoticMapSpec::defaults(kind);
        for (int k = spec.k_min; k <= spec.k_max; ++k) {
            const ImageTensor a = chaotic_transform(img, k, spec);
            const ImageTensor b = chaotic_transform(img, k, spec);
            deterministic = deterministic && std::memcmp(a.pixels().data(), b.pixels().data(), a.size() * sizeof(double)) == 0;
        }
    }
    detail << "; (d) repeat calls bit-identical: " << (deterministic ? "yes" : "no");

    r.seconds = seconds_since(t0);
    r.property_ok = in_range && fixed_ok && sensitive && deterministic;
    r.detail = detail.str();
    return r;
}

// --- Schedule, metrics and cross-entropy exactness ---------------------------------

CheckResult check_schedule_and_metrics() {
    CheckResult r{5, "Cosine schedule, macro-F1 and uniform-logit cross-entropy exactness", false, 0.0, 0.0, ""};
    const auto t0 = Clock::now();
    std::ostringstream detail;

    bool schedule_ok = true;
    for (const auto& [lr_max, lr_min] : {std::pair{1e-3, 0.0}, std::pair{1e-3, 1e-5}, std::pair{0.1, 0.01}}) {
        for (int t_max : {1, 2, 10, 20, 30}) {
            schedule_ok = schedule_ok && cosine_annealing_lr(0, t_max, lr_max, lr_min) == lr_max &&
                          cosine_annealing_lr(t_max, t_max, lr_max, lr_min) == lr_min;
            if (t_max % 2 == 0) {
                schedule_ok = schedule_ok &&
                              cosine_annealing_lr(t_max / 2, t_max, lr_max, lr_min) == lr_min + 0.5 * (lr_max - lr_min);
            }
        }
    }
    detail << "schedule endpoints/midpoint exact: " << (schedule_ok ? "yes" : "no");

    const auto m = metrics_from_confusion({{3, 2}, {1, 4}});
    const double f1_expected = (2.0 / 3.0 + 8.0 / 11.0) / 2.0;
    const double f1_err = std::abs(m.macro_f1 - f1_expected);
    const bool f1_ok = f1_err <= 1e-9 && std::abs(m.macro_f1 - 0.6969696969696969) <= 1e-9;
    detail << "; macro-F1 " << std::setprecision(12) << m.macro_f1 << " (err " << sci(f1_err) << ")";

    double ce_err = 0.0;
    for (std::size_t classes = 2; classes <= 10; ++classes) {
        for (double level : {0.0, -3.5, 12.25}) {
            std::vector<int> labels;
            for (std::size_t i = 0; i < 2 * classes; ++i) labels.push_back(static_cast<int>(i % classes));
            const Tensor logits = Tensor::full({labels.size(), classes}, level);
            ce_err = std::max(ce_err, std::abs(cross_entropy(logits, labels).item() - std::log(double(classes))));
        }
    }
    const bool ce_ok = ce_err <= 1e-12;
    detail << "; uniform-logit CE - ln M max err " << sci(ce_err);

    r.seconds = seconds_since(t0);
    r.property_ok = schedule_ok && f1_ok && ce_ok;
    r.detail = detail.str();
    return r;
}

// --- End-to-end experiment ---------------------------------------------------------

CheckResult check_end_to_end(const ExperimentOptions& in) {
    const auto opts = with_defaults(in);
    CheckResult r{6, "SSL beats random init on >= 2/3 seeds; fusion within 2pp of best backbone", false, 0.0, 600.0, ""};
    const auto t0 = Clock::now();
    std::ostringstream detail;
    detail << std::fixed << std::setprecision(4);
    int ssl_wins = 0;
    bool fusion_ok = true;
    try {
        for (const auto seed : opts.seeds) {
            const auto cfg = config_for_seed(opts, seed, opts.work_dir / ("seed_" + std::to_string(seed)));
            if (!cfg.baseline) throw ContractError("the experiment needs the random-init baseline enabled");
            const auto ts = Clock::now();
            opts.runner(cfg);
            const PipelineReport rep = read_report(cfg);
            const double ssl = rep.tiny.accuracy, base = rep.tiny_baseline->accuracy, large = rep.large.accuracy,
                         fused = rep.fusion.accuracy;
            const bool win = ssl > base;
            const bool fuse_here = fused >= std::max(ssl, large) - 0.02;
            ssl_wins += win;
            fusion_ok = fusion_ok && fuse_here;
            detail << (seed == opts.seeds.front() ? "" : "; ") << "seed " << seed << ": ssl " << ssl << " vs random "
                   << base << (win ? " (win)" : " (loss)") << ", large " << large << ", fusion " << fused
                   << (fuse_here ? "" : " (below max-2pp)");
            if (!rep.pretrain_epoch_losses.empty()) {
                detail << ", NT-Xent " << rep.pretrain_epoch_losses.front() << " -> " << rep.pretrain_epoch_losses.back();
            }
            if (opts.log) *opts.log << "  seed " << seed << " finished in " << seconds_since(ts) << " s\n" << std::flush;
        }
        const int needed = static_cast<int>((2 * opts.seeds.size() + 2) / 3);
        r.property_ok = ssl_wins >= needed && fusion_ok;
        detail << "; SSL wins " << ssl_wins << "/" << opts.seeds.size();
    } catch (const std::exception& e) {
        detail << "; error: " << e.what();
        r.property_ok = false;
    }
    r.seconds = seconds_since(t0);
    r.detail = detail.str();
    return r;
}

std::string compare_trees(const fs::path& a, const fs::path& b) {
    std::vector<fs::path> files_a, files_b;
    for (const auto& e : fs::recursive_directory_iterator(a))
        if (e.is_regular_file()) files_a.push_back(fs::relative(e.path(), a));
    for (const auto& e : fs::recursive_directory_iterator(b))
        if (e.is_regular_file()) files_b.push_back(fs::relative(e.path(), b));
    std::sort(files_a.begin(), files_a.end());
    std::sort(files_b.begin(), files_b.end());
    if (files_a != files_b) return "file lists differ";
    if (files_a.empty()) return "no files to compare";
    for (const auto& rel : files_a)
        if (file_bytes(a / rel) != file_bytes(b / rel)) return rel.string() + " differs";
    return {};
}

CheckResult check_determinism(const ExperimentOptions& in) {
    const auto opts = with_defaults(in);
    CheckResult r{7, "run-all twice with one seed gives byte-identical outputs", false, 0.0, 0.0, ""};
    const auto t0 = Clock::now();
    try {
        const auto seed = opts.seeds.front();
        fs::path first = opts.work_dir / ("seed_" + std::to_string(seed));
        if (!fs::exists(first / "metrics.json")) {
            first = opts.work_dir / "determinism_a";
            fs::remove_all(first);
            opts.runner(config_for_seed(opts, seed, first));
        }
        const fs::path second = opts.work_dir / "determinism_b";
        fs::remove_all(second);
        opts.rerun(config_for_seed(opts, seed, second));
        const std::string diff = compare_trees(first, second);
        std::size_t files = 0;
        for (const auto& e : fs::recursive_directory_iterator(second)) files += e.is_regular_file();
        r.property_ok = diff.empty();
        r.detail = diff.empty() ? std::to_string(files) + " files byte-identical (metrics.json, checkpoints, dataset)"
                                : "mismatch: " + diff;
    } catch (const std::exception& e) {
        r.detail = std::string("error: ") + e.what();
    }
    r.seconds = seconds_since(t0);
    return r;
}

// --- Persistence -----------------------------------------------------------------

CheckResult check_persistence(const fs::path& work_dir) {
    CheckResult r{8, "Checkpoint and dataset files round-trip bit-exactly; damaged files are rejected", false, 0.0, 0.0,
                  ""};
    const auto t0 = Clock::now();
    std::ostringstream detail;
    const fs::path dir = work_dir / "persistence";
    try {
        fs::remove_all(dir);
        Rng rng(8);

        // Checkpoint: awkward values included on purpose.
        Checkpoint ckpt;
        ckpt.metadata = {{"stage", "pretrain"}, {"seed", "8"}, {"note", std::string("a\0b", 3)}};
        ckpt.tensors.emplace_back("dense", normal_matrix(7, 5, rng));
        ckpt.tensors.emplace_back(
            "edge", Tensor::from({6}, {-0.0, 5e-324, 1.7976931348623157e308, -2.2250738585072014e-308, 1.0 / 3.0, 0.1}));
        ckpt.tensors.emplace_back("cube", Tensor::from({2, 2, 2}, {1, 2, 3, 4, 5, 6, 7, 8}));
        const fs::path ck = dir / "model.ckpt";
        save_checkpoint(ck, ckpt);
        const Checkpoint back = load_checkpoint(ck);
        bool ck_ok = back.metadata == ckpt.metadata && back.tensors.size() == ckpt.tensors.size();
        for (std::size_t i = 0; ck_ok && i < ckpt.tensors.size(); ++i) {
            const auto& [na, ta] = ckpt.tensors[i];
            const auto& [nb, tb] = back.tensors[i];
            ck_ok = na == nb && ta.shape() == tb.shape();
            for (std::size_t j = 0; ck_ok && j < ta.numel(); ++j) ck_ok = same_bits(ta.data()[j], tb.data()[j]);
        }
        ck_ok = ck_ok && serialize_checkpoint(back) == file_bytes(ck);

        const auto good = file_bytes(ck);
        int ck_rejected = 0, ck_cases = 0;
        for (std::size_t cut : {std::size_t{0}, std::size_t{3}, std::size_t{8}, good.size() / 2, good.size() - 4,
                                good.size() - 1}) {
            binary::write_file(dir / "cut.ckpt", std::vector<char>(good.begin(), good.begin() + cut));
            ++ck_cases;
            ck_rejected += throws_load_error([&] { load_checkpoint(dir / "cut.ckpt"); });
        }
        for (std::size_t pos : {std::size_t{1}, std::size_t{5}, good.size() / 3, good.size() / 2, good.size() - 2}) {
            auto bad = good;
            bad[pos] = static_cast<char>(bad[pos] ^ 0x5a);
            binary::write_file(dir / "flip.ckpt", bad);
            ++ck_cases;
            ck_rejected += throws_load_error([&] { load_checkpoint(dir / "flip.ckpt"); });
        }
        {
            auto longer = good;
            longer.push_back('x');
            binary::write_file(dir / "long.ckpt", longer);
            ++ck_cases;
            ck_rejected += throws_load_error([&] { load_checkpoint(dir / "long.ckpt"); });
        }
        ++ck_cases;
        ck_rejected += throws_load_error([&] { load_checkpoint(dir / "missing.ckpt"); });
        detail << "checkpoint round trip " << (ck_ok ? "bit-exact" : "MISMATCH") << ", damaged rejected " << ck_rejected
               << "/" << ck_cases;

        // Dataset: generate, save, load, save again.
        TextureDatasetSpec spec;
        spec.num_classes = 3;
        spec.images_per_class = 6;
        spec.height = spec.width = 8;
        spec.seed = 8;
        const DatasetSplit split = gen_dataset(spec);
        save_split(dir / "data", split);
        const DatasetSplit loaded = load_split(dir / "data", spec.num_classes);
        bool ds_ok = loaded.train.images == split.train.images && loaded.train.labels == split.train.labels &&
                     loaded.test.images == split.test.images && loaded.test.labels == split.test.labels;
        save_split(dir / "data2", loaded);
        ds_ok = ds_ok && compare_trees(dir / "data", dir / "data2").empty();

        const auto bin = file_bytes(dir / "data" / "train.bin");
        const fs::path labels = dir / "data" / "train.labels";
        int ds_rejected = 0, ds_cases = 0;
        auto expect_reject = [&](const std::vector<char>& bytes, const fs::path& label_file) {
            binary::write_file(dir / "bad.bin", bytes);
            ++ds_cases;
            ds_rejected += throws_load_error([&] { load_dataset(dir / "bad.bin", label_file, spec.num_classes); });
        };
        for (std::size_t cut : {std::size_t{0}, std::size_t{4}, std::size_t{20}, bin.size() / 2, bin.size() - 1})
            expect_reject(std::vector<char>(bin.begin(), bin.begin() + cut), labels);
        {
            auto bad = bin;
            bad[0] = 'X';  // magic
            expect_reject(bad, labels);
            bad = bin;
            bad[4] = 9;  // version
            expect_reject(bad, labels);
            bad = bin;
            bad[8] = static_cast<char>(bad[8] + 1);  // image count
            expect_reject(bad, labels);
            bad = bin;
            const float two = 2.0f;
            std::memcpy(bad.data() + 24, &two, sizeof two);  // first pixel out of range
            expect_reject(bad, labels);
            bad = bin;
            bad.push_back(0);
            expect_reject(bad, labels);
        }
        {
            auto text = binary::read_text(labels);
            binary::write_text(dir / "short.labels", text.substr(0, text.rfind('\n', text.size() - 2) + 1));
            expect_reject(bin, dir / "short.labels");
            binary::write_text(dir / "junk.labels", "0\nzero\n" + text.substr(4));
            expect_reject(bin, dir / "junk.labels");
            binary::write_text(dir / "range.labels", "7\n" + text.substr(2));
            expect_reject(bin, dir / "range.labels");
        }
        detail << "; dataset round trip " << (ds_ok ? "bit-exact" : "MISMATCH") << ", damaged rejected " << ds_rejected
               << "/" << ds_cases;
        r.property_ok = ck_ok && ds_ok && ck_rejected == ck_cases && ds_rejected == ds_cases;
    } catch (const std::exception& e) {
        detail << "; error: " << e.what();
    }
    r.seconds = seconds_since(t0);
    r.detail = detail.str();
    return r;
}

std::vector<CheckResult> run_verify(const VerifyOptions& opts, std::ostream& out) {
    std::vector<CheckResult> results;
    auto record = [&](CheckResult r) {
        out << format_result(r) << "\n" << std::flush;
        results.push_back(std::move(r));
    };
    record(check_nt_xent_oracle());
    record(check_gradient_fidelity());
    record(check_chaotic_maps());
    record(check_schedule_and_metrics());
    if (opts.include_experiment) {
        ExperimentOptions exp;
        exp.work_dir = opts.work_dir;
        exp.log = &out;
        record(check_end_to_end(exp));
        record(check_determinism(exp));
    }
    record(check_persistence(opts.work_dir));
    std::sort(results.begin(), results.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    return results;
}

}  // namespace chaosssl
