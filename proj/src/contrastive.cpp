#include "chaosssl/contrastive.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "chaosssl/errors.hpp"

namespace chaosssl {

namespace {

// Stream tags keep shuffling and view generation on unrelated generators.
constexpr std::uint64_t kShuffleStream = 0x5348;
constexpr std::uint64_t kViewStream = 0x5649;

}  // namespace

EncoderSpec EncoderSpec::tiny(std::size_t input_dim) { return {input_dim, {256, 128}, 64}; }
EncoderSpec EncoderSpec::large(std::size_t input_dim) { return {input_dim, {512, 256}, 128}; }

std::vector<std::size_t> EncoderSpec::widths() const {
    auto w = hidden_dims;
    w.push_back(feature_dim);
    return w;
}

void EncoderSpec::validate() const {
    if (input_dim == 0 || feature_dim == 0) throw ContractError("encoder widths must be positive");
    for (auto w : hidden_dims)
        if (w == 0) throw ContractError("encoder widths must be positive");
}

ProjectorSpec ProjectorSpec::reduced_for_tests(std::vector<std::size_t> dims) {
    ProjectorSpec spec;
    spec.layer_dims = std::move(dims);
    spec.fixed_output_ = false;
    return spec;
}

void ProjectorSpec::validate() const {
    if (layer_dims.size() != 3) throw ContractError("the projector has exactly three layers");
    for (auto w : layer_dims)
        if (w == 0) throw ContractError("projector widths must be positive");
    if (fixed_output_ && layer_dims.back() != kProjectionDim) {
        throw ContractError("projector output must be " + std::to_string(kProjectionDim) + " wide");
    }
}

Mlp make_encoder(const EncoderSpec& spec, Rng& rng) {
    spec.validate();
    return Mlp::random(spec.input_dim, spec.widths(), /*relu_on_output=*/true, rng);
}

ContrastiveModel ContrastiveModel::random(const EncoderSpec& enc, const ProjectorSpec& proj, Rng& rng) {
    proj.validate();
    Mlp encoder = make_encoder(enc, rng);
    Mlp projector = Mlp::random(enc.feature_dim, proj.layer_dims, /*relu_on_output=*/false, rng);
    return {std::move(encoder), std::move(projector)};
}

Tensor ContrastiveModel::encode(const Tensor& batch) const { return encoder.forward(batch); }

Tensor ContrastiveModel::encode(std::span<const ImageTensor> images) const {
    return encoder.forward(images_to_batch(images));
}

Tensor ContrastiveModel::project(const Tensor& features) const {
    if (features.dim() != 2 || features.cols() != projector.input_dim()) {
        throw ContractError("projector expects feature width " + std::to_string(projector.input_dim()));
    }
    return projector.forward(features);
}

std::vector<std::size_t> standard_pairing(std::size_t n_pairs) {
    std::vector<std::size_t> pairing(2 * n_pairs);
    for (std::size_t i = 0; i < n_pairs; ++i) {
        pairing[i] = i + n_pairs;
        pairing[i + n_pairs] = i;
    }
    return pairing;
}

void validate_pairing(std::span<const std::size_t> pairing, std::size_t rows) {
    if (rows == 0 || rows % 2 != 0) throw ContractError("contrastive batch needs an even, nonzero row count");
    if (pairing.size() != rows) throw ContractError("pairing must name one partner per row");
    for (std::size_t i = 0; i < rows; ++i) {
        const auto j = pairing[i];
        if (j >= rows || j == i || pairing[j] != i) throw ContractError("pairing is not a perfect matching");
    }
}

Tensor nt_xent_loss(const Tensor& z, std::span<const std::size_t> pairing, double temperature) {
    if (!(temperature > 0.0)) throw ContractError("temperature must be positive");
    if (z.dim() != 2) throw DimensionError("NT-Xent expects a 2-D batch");
    validate_pairing(pairing, z.rows());
    const Tensor unit = normalize_rows(z);
    const Tensor logits = scale(matmul(unit, transpose(unit)), 1.0 / temperature);
    const Tensor log_denominator = logsumexp_rows(logits, /*exclude_diagonal=*/true);
    const Tensor positive = gather_cols(logits, pairing);
    return mean(sub(log_denominator, positive));
}

double nt_xent_oracle(const Tensor& z, std::span<const std::size_t> pairing, double temperature) {
    if (!(temperature > 0.0)) throw ContractError("temperature must be positive");
    if (z.dim() != 2) throw DimensionError("NT-Xent expects a 2-D batch");
    validate_pairing(pairing, z.rows());
    const std::size_t rows = z.rows(), width = z.cols();

    auto dot = [&](std::size_t a, std::size_t b) {
        double s = 0.0;
        for (std::size_t k = 0; k < width; ++k) s += z.at(a, k) * z.at(b, k);
        return s;
    };
    auto sim = [&](std::size_t a, std::size_t b) { return dot(a, b) / (std::sqrt(dot(a, a)) * std::sqrt(dot(b, b))); };
    for (std::size_t i = 0; i < rows; ++i)
        if (dot(i, i) == 0.0) throw DomainError("NT-Xent row " + std::to_string(i) + " has zero norm");

    double total = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
        const double numerator = std::exp(sim(i, pairing[i]) / temperature);
        double denominator = 0.0;
        for (std::size_t k = 0; k < rows; ++k)
            if (k != i) denominator += std::exp(sim(i, k) / temperature);
        total += -std::log(numerator / denominator);
    }
    return total / static_cast<double>(rows);
}

void PretrainConfig::validate() const {
    if (epochs < 0) throw ContractError("epochs must be nonnegative");
    if (batch_size < 1) throw ContractError("batch size must be at least 1");
    if (!(temperature > 0.0)) throw ContractError("temperature must be positive");
    if (lr_encoder < 0.0 || lr_projector < 0.0) throw ContractError("learning rates must be nonnegative");
}

PretrainResult pretrain(std::span<const ImageTensor> images, const AugmentConfig& aug, const ChaoticMapSpec& map,
                        const PretrainConfig& cfg, ContrastiveModel model) {
    cfg.validate();
    aug.validate();
    map.validate();
    if (images.empty()) throw ContractError("pretraining needs a nonempty dataset");
    if (cfg.batch_size > images.size()) {
        throw ContractError("batch size " + std::to_string(cfg.batch_size) + " exceeds dataset size " +
                            std::to_string(images.size()));
    }

    std::vector<ParamGroup> groups{{"encoder", model.encoder.parameters(), cfg.lr_encoder},
                                   {"projector", model.projector.parameters(), cfg.lr_projector}};
    AdamWState state{cfg.adamw, {}, {}, 0};
    PretrainResult result;

    const std::size_t n = cfg.batch_size;
    const std::size_t batches = images.size() / n;
    const std::size_t dim = images.front().size();
    const auto pairing = standard_pairing(n);
    std::vector<std::size_t> order(images.size());

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), 0);
        Rng shuffle_rng = derive_rng(cfg.seed, kShuffleStream, static_cast<std::uint64_t>(epoch));
        std::shuffle(order.begin(), order.end(), shuffle_rng);

        double epoch_total = 0.0;
        for (std::size_t b = 0; b < batches; ++b) {
            // Rows [0, n) hold first views, rows [n, 2n) the chaotic views.
            std::vector<double> data(2 * n * dim);
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t idx = order[b * n + i];
                Rng view_rng = derive_rng(cfg.seed ^ kViewStream, static_cast<std::uint64_t>(epoch), idx);
                const ViewPair views = make_contrastive_views(images[idx], view_rng, aug, map);
                if (views.v1.size() != dim) throw DimensionError("dataset images must share one shape");
                std::transform(views.v1.pixels().begin(), views.v1.pixels().end(), data.begin() + i * dim,
                               to_model_input);
                std::transform(views.v_chaos.pixels().begin(), views.v_chaos.pixels().end(),
                               data.begin() + (n + i) * dim, to_model_input);
            }
            const Tensor batch = Tensor::from({2 * n, dim}, std::move(data));

            zero_grad(groups);
            const Tensor loss = nt_xent_loss(model.project(model.encode(batch)), pairing, cfg.temperature);
            backward(loss);
            adamw_step(groups, state);

            result.batch_losses.push_back(loss.item());
            epoch_total += loss.item();
        }
        result.epoch_losses.push_back(batches ? epoch_total / static_cast<double>(batches) : 0.0);
    }
    result.encoder = std::move(model.encoder);
    return result;
}

}  // namespace chaosssl
