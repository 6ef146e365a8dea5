#include "chaosssl/config.hpp"

#include <openssl/sha.h>
#include <yaml-cpp/yaml.h>

#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <json.hpp>

#include "chaosssl/errors.hpp"

namespace chaosssl {

namespace {

// Reads keys of one mapping node and rejects anything it was not asked about.
class Section {
public:
    Section(const YAML::Node& node, std::string name) : node_(node), name_(std::move(name)) {
        if (node_ && !node_.IsMap()) throw ContractError("config section '" + name_ + "' must be a mapping");
    }

    template <typename T>
    void get(const std::string& key, T& out) {
        seen_.insert(key);
        if (!node_ || !node_[key]) return;
        try {
            out = node_[key].as<T>();
        } catch (const YAML::Exception& e) {
            throw ContractError("config key '" + name_ + "." + key + "': " + e.what());
        }
    }

    void get(const std::string& key, Range& out) {
        std::vector<double> pair{out.lo, out.hi};
        get(key, pair);
        if (pair.size() != 2) throw ContractError("config key '" + name_ + "." + key + "' needs [lo, hi]");
        out = {pair[0], pair[1]};
    }

    Section sub(const std::string& key) {
        seen_.insert(key);
        return Section(node_ ? node_[key] : YAML::Node(), name_.empty() ? key : name_ + "." + key);
    }

    void finish() const {
        if (!node_) return;
        for (const auto& kv : node_) {
            const auto key = kv.first.as<std::string>();
            if (!seen_.count(key)) throw ContractError("unknown config key '" + (name_.empty() ? key : name_ + "." + key) + "'");
        }
    }

private:
    YAML::Node node_;
    std::string name_;
    std::set<std::string> seen_;
};

void read_finetune(Section s, FinetuneConfig& f) {
    s.get("epochs", f.epochs);
    s.get("lr_max", f.lr_max);
    s.get("lr_min", f.lr_min);
    s.get("batch_size", f.batch_size);
    s.finish();
}

nlohmann::json finetune_json(const FinetuneConfig& f) {
    return {{"epochs", f.epochs}, {"lr_max", f.lr_max}, {"lr_min", f.lr_min}, {"batch_size", f.batch_size}};
}

}  // namespace

ExperimentConfig::ExperimentConfig() {
    finetune_large.epochs = 20;
    propagate();
}

ChaoticMapSpec ExperimentConfig::map_spec() const {
    auto spec = ChaoticMapSpec::defaults(map_kind);
    if (map_param) spec.param = *map_param;
    spec.epsilon = map_epsilon;
    spec.k_min = k_min;
    spec.k_max = k_max;
    spec.reclamp_each_step = reclamp_each_step;
    return spec;
}

EncoderSpec ExperimentConfig::tiny_encoder() const { return {dataset.image_size(), tiny_hidden, tiny_feature_dim}; }
EncoderSpec ExperimentConfig::large_encoder() const { return {dataset.image_size(), large_hidden, large_feature_dim}; }

std::uint64_t ExperimentConfig::stage_seed(std::uint64_t tag) const {
    Rng rng = derive_rng(seed, 0x53544147, tag);
    return rng();
}

void ExperimentConfig::propagate() {
    dataset.seed = seed;
    pretrain.seed = stage_seed(1);
    finetune_tiny.seed = stage_seed(2);
    finetune_large.seed = stage_seed(3);
    fusion.seed = stage_seed(4);
    pretrain.adamw = finetune_tiny.adamw = finetune_large.adamw = fusion.adamw = adamw;
}

void ExperimentConfig::validate() const {
    map_spec().validate();
    augment.validate();
    dataset.validate();
    tiny_encoder().validate();
    large_encoder().validate();
    projector.validate();
    pretrain.validate();
    finetune_tiny.validate();
    finetune_large.validate();
    fusion.validate();
}

ExperimentConfig parse_config(const std::string& yaml_text) {
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::Exception& e) {
        throw ContractError(std::string("config is not valid YAML: ") + e.what());
    }
    ExperimentConfig cfg;
    if (!root || root.IsNull()) {
        cfg.propagate();
        return cfg;
    }
    Section top(root, "");
    top.get("seed", cfg.seed);
    std::string out = cfg.output_dir.string();
    top.get("output_dir", out);
    cfg.output_dir = out;
    top.get("baseline", cfg.baseline);

    {
        auto s = top.sub("map");
        std::string kind = to_string(cfg.map_kind);
        s.get("kind", kind);
        cfg.map_kind = parse_map_kind(kind);
        double param = 0.0;
        s.get("param", param);
        if (root["map"] && root["map"]["param"]) cfg.map_param = param;
        s.get("epsilon", cfg.map_epsilon);
        s.get("k_min", cfg.k_min);
        s.get("k_max", cfg.k_max);
        s.get("reclamp_each_step", cfg.reclamp_each_step);
        s.finish();
    }
    {
        auto s = top.sub("augment");
        auto& a = cfg.augment;
        s.get("hflip_prob", a.hflip_prob);
        s.get("brightness", a.brightness);
        s.get("contrast", a.contrast);
        s.get("saturation", a.saturation);
        s.get("grayscale_prob", a.grayscale_prob);
        s.get("blur_sigma", a.blur_sigma);
        s.get("blur_kernel_size", a.blur_kernel_size);
        s.finish();
    }
    {
        auto s = top.sub("dataset");
        auto& d = cfg.dataset;
        s.get("num_classes", d.num_classes);
        s.get("images_per_class", d.images_per_class);
        s.get("channels", d.channels);
        s.get("height", d.height);
        s.get("width", d.width);
        s.get("base_frequency", d.base_frequency);
        s.get("frequency_step", d.frequency_step);
        s.get("base_orientation_deg", d.base_orientation_deg);
        s.get("orientation_step_deg", d.orientation_step_deg);
        s.get("noise", d.noise);
        s.get("frequency_jitter", d.frequency_jitter);
        s.get("orientation_jitter_deg", d.orientation_jitter_deg);
        s.get("train_fraction", d.train_fraction);
        s.finish();
    }
    {
        auto s = top.sub("encoder_tiny");
        s.get("hidden", cfg.tiny_hidden);
        s.get("feature_dim", cfg.tiny_feature_dim);
        s.finish();
    }
    {
        auto s = top.sub("encoder_large");
        s.get("hidden", cfg.large_hidden);
        s.get("feature_dim", cfg.large_feature_dim);
        s.finish();
    }
    {
        auto s = top.sub("projector");
        s.get("dims", cfg.projector.layer_dims);
        s.finish();
    }
    {
        auto s = top.sub("adamw");
        s.get("beta1", cfg.adamw.beta1);
        s.get("beta2", cfg.adamw.beta2);
        s.get("eps", cfg.adamw.eps);
        s.get("weight_decay", cfg.adamw.weight_decay);
        s.finish();
    }
    {
        auto s = top.sub("pretrain");
        auto& p = cfg.pretrain;
        s.get("epochs", p.epochs);
        s.get("batch_size", p.batch_size);
        s.get("temperature", p.temperature);
        s.get("lr_encoder", p.lr_encoder);
        s.get("lr_projector", p.lr_projector);
        s.finish();
    }
    read_finetune(top.sub("finetune_tiny"), cfg.finetune_tiny);
    read_finetune(top.sub("finetune_large"), cfg.finetune_large);
    {
        auto s = top.sub("fusion");
        auto& f = cfg.fusion;
        s.get("epochs", f.epochs);
        s.get("lr_backbone", f.lr_backbone);
        s.get("lr_head", f.lr_head);
        s.get("batch_size", f.batch_size);
        s.finish();
    }
    top.finish();
    cfg.propagate();
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string default_config_yaml() {
    return R"(# Experiment configuration. Keys marked "interpretation" are settings the
# method leaves open; the value here is this project's choice.
seed: 0
output_dir: chaosssl-run
baseline: true            # also fine-tune the tiny encoder without SSL, for comparison

map:
  kind: tent              # logistic | tent | sine
  # param: 2.0            # defaults per kind: logistic 3.99, tent 2.0, sine 1.0
  epsilon: 1.0e-6         # interpretation: clamp margin
  k_min: 1
  k_max: 5
  reclamp_each_step: false  # interpretation: clamp only the initial state

augment:                  # interpretation: magnitudes and probabilities
  hflip_prob: 0.5
  brightness: [0.6, 1.4]
  contrast: [0.6, 1.4]
  saturation: [0.6, 1.4]
  grayscale_prob: 0.2
  blur_sigma: [0.1, 2.0]
  blur_kernel_size: 5

dataset:
  num_classes: 4
  images_per_class: 600
  channels: 3
  height: 32
  width: 32
  base_frequency: 4.0
  frequency_step: 0.15    # relative frequency change between adjacent classes
  base_orientation_deg: 0.0
  orientation_step_deg: 10.0
  noise: 0.3             # interpretation: pixel noise std-dev before rescaling
  frequency_jitter: 0.05  # interpretation: relative std-dev of the per-image frequency
  orientation_jitter_deg: 4.0  # interpretation: std-dev of the per-image orientation
  train_fraction: 0.8333333333333334

encoder_tiny:             # interpretation: desk-scale stand-in for the small backbone
  hidden: [256, 128]
  feature_dim: 64
encoder_large:            # interpretation: desk-scale stand-in for the large backbone
  hidden: [512, 256]
  feature_dim: 128
projector:
  dims: [256, 256, 128]   # interpretation: hidden widths; output fixed at 128

adamw:                    # interpretation: standard values
  beta1: 0.9
  beta2: 0.999
  eps: 1.0e-8
  weight_decay: 0.01

pretrain:
  epochs: 30
  batch_size: 64          # interpretation
  temperature: 0.5        # interpretation
  lr_encoder: 1.0e-3      # interpretation: desk-scale (1e-7 for a pretrained backbone)
  lr_projector: 1.0e-3

finetune_tiny:
  epochs: 10
  lr_max: 1.0e-3          # interpretation
  lr_min: 0.0             # interpretation
  batch_size: 64          # interpretation
finetune_large:
  epochs: 20
  lr_max: 1.0e-3
  lr_min: 0.0
  batch_size: 64

fusion:
  epochs: 10
  lr_backbone: 1.0e-6
  lr_head: 1.0e-4
  batch_size: 64          # interpretation
)";
}

std::string config_json(const ExperimentConfig& c) {
    const auto map = c.map_spec();
    const auto& a = c.augment;
    const auto& d = c.dataset;
    nlohmann::json j = {
        {"seed", c.seed},
        {"baseline", c.baseline},
        {"map",
         {{"kind", to_string(map.kind)},
          {"param", map.param},
          {"epsilon", map.epsilon},
          {"k_min", map.k_min},
          {"k_max", map.k_max},
          {"reclamp_each_step", map.reclamp_each_step}}},
        {"augment",
         {{"hflip_prob", a.hflip_prob},
          {"brightness", {a.brightness.lo, a.brightness.hi}},
          {"contrast", {a.contrast.lo, a.contrast.hi}},
          {"saturation", {a.saturation.lo, a.saturation.hi}},
          {"grayscale_prob", a.grayscale_prob},
          {"blur_sigma", {a.blur_sigma.lo, a.blur_sigma.hi}},
          {"blur_kernel_size", a.blur_kernel_size}}},
        {"dataset",
         {{"num_classes", d.num_classes},
          {"images_per_class", d.images_per_class},
          {"channels", d.channels},
          {"height", d.height},
          {"width", d.width},
          {"base_frequency", d.base_frequency},
          {"frequency_step", d.frequency_step},
          {"base_orientation_deg", d.base_orientation_deg},
          {"orientation_step_deg", d.orientation_step_deg},
          {"noise", d.noise},
          {"frequency_jitter", d.frequency_jitter},
          {"orientation_jitter_deg", d.orientation_jitter_deg},
          {"train_fraction", d.train_fraction}}},
        {"encoder_tiny", {{"hidden", c.tiny_hidden}, {"feature_dim", c.tiny_feature_dim}}},
        {"encoder_large", {{"hidden", c.large_hidden}, {"feature_dim", c.large_feature_dim}}},
        {"projector", {{"dims", c.projector.layer_dims}}},
        {"adamw",
         {{"beta1", c.adamw.beta1}, {"beta2", c.adamw.beta2}, {"eps", c.adamw.eps}, {"weight_decay", c.adamw.weight_decay}}},
        {"pretrain",
         {{"epochs", c.pretrain.epochs},
          {"batch_size", c.pretrain.batch_size},
          {"temperature", c.pretrain.temperature},
          {"lr_encoder", c.pretrain.lr_encoder},
          {"lr_projector", c.pretrain.lr_projector}}},
        {"finetune_tiny", finetune_json(c.finetune_tiny)},
        {"finetune_large", finetune_json(c.finetune_large)},
        {"fusion",
         {{"epochs", c.fusion.epochs},
          {"lr_backbone", c.fusion.lr_backbone},
          {"lr_head", c.fusion.lr_head},
          {"batch_size", c.fusion.batch_size}}},
    };
    return j.dump();
}

std::string config_hash(const ExperimentConfig& cfg) {
    const std::string text = config_json(cfg);
    unsigned char digest[SHA256_DIGEST_LENGTH];
    SHA256(reinterpret_cast<const unsigned char*>(text.data()), text.size(), digest);
    std::ostringstream os;
    for (unsigned char b : digest) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(b);
    return os.str();
}

}  // namespace chaosssl
