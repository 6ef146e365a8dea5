#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "chaosssl/finetune.hpp"
#include "chaosssl/image.hpp"

namespace chaosssl {

// One class of the synthetic texture task: an oriented sinusoidal grating.
struct TextureClass {
    double frequency = 4.0;        // cycles across the image width
    double orientation_deg = 0.0;  // grating direction
    double noise = 0.3;            // std-dev of additive Gaussian noise before rescaling
    // Per-image spread around the class centre: relative std-dev of the
    // frequency and std-dev of the orientation.
    double frequency_jitter = 0.0;
    double orientation_jitter_deg = 0.0;
};

// Fine-grained by construction: adjacent classes differ by a small relative
// frequency step and a small rotation, so texture rather than shape carries
// the label.
struct TextureDatasetSpec {
    std::size_t num_classes = 4;
    std::size_t images_per_class = 600;
    std::size_t channels = 3;
    std::size_t height = 32;
    std::size_t width = 32;
    double base_frequency = 4.0;
    double frequency_step = 0.15;  // relative: f_c = base * (1 + step)^c
    double base_orientation_deg = 0.0;
    double orientation_step_deg = 10.0;
    double noise = 0.3;
    // Per-image spread; makes neighbouring classes overlap slightly.
    double frequency_jitter = 0.05;
    double orientation_jitter_deg = 4.0;
    double train_fraction = 5.0 / 6.0;
    std::uint64_t seed = 0;
    // Overrides the generated table when non-empty (one entry per class).
    std::vector<TextureClass> class_overrides;

    std::vector<TextureClass> class_table() const;
    std::size_t train_per_class() const;
    std::size_t image_size() const { return channels * height * width; }
    void validate() const;
};

struct Dataset {
    std::vector<ImageTensor> images;
    std::vector<int> labels;
    std::size_t num_classes = 0;

    std::size_t size() const noexcept { return images.size(); }
    LabeledImages view() const { return {images, labels, num_classes}; }
};

struct DatasetSplit {
    Dataset train;
    Dataset test;
};

// Grating with a random phase and jittered frequency/orientation plus per-pixel noise, min-max rescaled to [0,1]
// and rounded to float precision so the on-disk format is lossless.
ImageTensor gen_texture(std::size_t class_id, const TextureDatasetSpec& spec, Rng& rng);

// Stratified split; within each split images are ordered class by class.
DatasetSplit gen_dataset(const TextureDatasetSpec& spec);

// Binary container: "CSDS", u32 version, u32 count, C, H, W, then float32
// pixels; all little-endian. Labels go to a text sidecar, one per line.
inline constexpr std::uint32_t kDatasetVersion = 1;

void save_dataset(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                  const Dataset& ds);
// num_classes = 0 infers max(label) + 1.
Dataset load_dataset(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                     std::size_t num_classes = 0);

// <dir>/train.bin, train.labels, test.bin, test.labels
void save_split(const std::filesystem::path& dir, const DatasetSplit& split);
DatasetSplit load_split(const std::filesystem::path& dir, std::size_t num_classes);

}  // namespace chaosssl
