#include "chaosssl/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "binary_io.hpp"
#include "chaosssl/errors.hpp"

namespace chaosssl {

namespace {
constexpr std::string_view kDatasetMagic = "CSDS";
}

std::vector<TextureClass> TextureDatasetSpec::class_table() const {
    if (!class_overrides.empty()) return class_overrides;
    std::vector<TextureClass> table(num_classes);
    for (std::size_t c = 0; c < num_classes; ++c) {
        table[c].frequency = base_frequency * std::pow(1.0 + frequency_step, static_cast<double>(c));
        table[c].orientation_deg = base_orientation_deg + orientation_step_deg * static_cast<double>(c);
        table[c].noise = noise;
        table[c].frequency_jitter = frequency_jitter;
        table[c].orientation_jitter_deg = orientation_jitter_deg;
    }
    return table;
}

std::size_t TextureDatasetSpec::train_per_class() const {
    return static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(images_per_class)));
}

void TextureDatasetSpec::validate() const {
    if (num_classes < 2) throw ContractError("dataset needs at least two classes");
    if (images_per_class < 1) throw ContractError("dataset needs at least one image per class");
    if (channels == 0 || height == 0 || width == 0) throw ContractError("image dimensions must be positive");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ContractError("train fraction must lie in (0,1)");
    if (!class_overrides.empty() && class_overrides.size() != num_classes) {
        throw ContractError("class table must have one entry per class");
    }
    const auto per_class = train_per_class();
    if (per_class == 0 || per_class == images_per_class) throw ContractError("split leaves an empty train or test set");
    for (const auto& c : class_table()) {
        if (!(c.frequency > 0.0) || c.noise < 0.0) throw ContractError("class frequencies must be positive, noise nonnegative");
        if (c.frequency_jitter < 0.0 || c.orientation_jitter_deg < 0.0) throw ContractError("jitter must be nonnegative");
    }
}

ImageTensor gen_texture(std::size_t class_id, const TextureDatasetSpec& spec, Rng& rng) {
    if (class_id >= spec.num_classes) {
        throw ContractError("class " + std::to_string(class_id) + " outside [0, " + std::to_string(spec.num_classes) + ")");
    }
    const TextureClass cls = spec.class_table()[class_id];
    const double phase = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double frequency = cls.frequency * std::max(0.05, 1.0 + cls.frequency_jitter * gauss(rng));
    const double theta = (cls.orientation_deg + cls.orientation_jitter_deg * gauss(rng)) * std::numbers::pi / 180.0;

    const std::size_t plane = spec.height * spec.width;
    std::vector<double> grating(plane);
    for (std::size_t y = 0; y < spec.height; ++y) {
        for (std::size_t x = 0; x < spec.width; ++x) {
            const double u = static_cast<double>(x) / static_cast<double>(spec.width);
            const double v = static_cast<double>(y) / static_cast<double>(spec.height);
            grating[y * spec.width + x] =
                std::sin(2.0 * std::numbers::pi * frequency * (u * std::cos(theta) + v * std::sin(theta)) + phase);
        }
    }

    std::vector<double> px(spec.channels * plane);
    for (std::size_t c = 0; c < spec.channels; ++c)
        for (std::size_t i = 0; i < plane; ++i) {
            const double n = cls.noise > 0.0 ? cls.noise * gauss(rng) : 0.0;
            px[c * plane + i] = grating[i] + n;
        }

    const auto [lo_it, hi_it] = std::minmax_element(px.begin(), px.end());
    const double lo = *lo_it;
    const double span = *hi_it - lo;
    for (double& v : px) {
        const double unit = span > 0.0 ? (v - lo) / span : 0.5;
        v = std::clamp(static_cast<double>(static_cast<float>(unit)), 0.0, 1.0);
    }
    return ImageTensor(spec.channels, spec.height, spec.width, std::move(px));
}

DatasetSplit gen_dataset(const TextureDatasetSpec& spec) {
    spec.validate();
    DatasetSplit split;
    split.train.num_classes = split.test.num_classes = spec.num_classes;
    const std::size_t n_train = spec.train_per_class();
    for (std::size_t c = 0; c < spec.num_classes; ++c) {
        for (std::size_t i = 0; i < spec.images_per_class; ++i) {
            Rng rng = derive_rng(spec.seed, c, i);
            Dataset& dst = i < n_train ? split.train : split.test;
            dst.images.push_back(gen_texture(c, spec, rng));
            dst.labels.push_back(static_cast<int>(c));
        }
    }
    return split;
}

void save_dataset(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                  const Dataset& ds) {
    if (ds.images.empty()) throw ContractError("refusing to save an empty dataset");
    if (ds.labels.size() != ds.images.size()) throw ContractError("image and label counts differ");
    const auto& first = ds.images.front();
    binary::Writer w;
    w.bytes(kDatasetMagic);
    w.u32(kDatasetVersion);
    w.u32(static_cast<std::uint32_t>(ds.images.size()));
    w.u32(static_cast<std::uint32_t>(first.channels()));
    w.u32(static_cast<std::uint32_t>(first.height()));
    w.u32(static_cast<std::uint32_t>(first.width()));
    for (const auto& img : ds.images) {
        if (!img.same_shape(first)) throw DimensionError("all images in a dataset must share one shape");
        for (double v : img.pixels()) w.f32(static_cast<float>(v));
    }
    binary::write_file(images_path, w.buffer());

    std::ostringstream labels;
    for (int y : ds.labels) labels << y << '\n';
    binary::write_text(labels_path, labels.str());
}

Dataset load_dataset(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                     std::size_t num_classes) {
    const auto bytes = binary::read_file(images_path);
    binary::Reader r(bytes, images_path.string());
    if (r.bytes(kDatasetMagic.size()) != kDatasetMagic) r.fail("bad magic, not a dataset file");
    const auto version = r.u32();
    if (version != kDatasetVersion) r.fail("unsupported version " + std::to_string(version));
    const std::size_t count = r.u32(), c = r.u32(), h = r.u32(), w = r.u32();
    if (count == 0 || c == 0 || h == 0 || w == 0) r.fail("zero dimension in header");
    const std::size_t per_image = c * h * w;
    if (r.remaining() != count * per_image * sizeof(float)) {
        r.fail("payload has " + std::to_string(r.remaining()) + " bytes, header implies " +
               std::to_string(count * per_image * sizeof(float)));
    }

    Dataset ds;
    ds.images.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::vector<double> px(per_image);
        for (double& v : px) {
            v = r.f32();
            if (!(v >= 0.0 && v <= 1.0)) r.fail("pixel outside [0,1] in image " + std::to_string(i));
        }
        ds.images.emplace_back(c, h, w, std::move(px));
    }

    std::istringstream labels(binary::read_text(labels_path));
    std::string line;
    int max_label = -1;
    while (std::getline(labels, line)) {
        if (line.empty()) continue;
        std::size_t used = 0;
        int y = 0;
        try {
            y = std::stoi(line, &used);
        } catch (const std::exception&) {
            throw LoadError(labels_path.string() + ": malformed label '" + line + "'");
        }
        if (used != line.size() || y < 0) throw LoadError(labels_path.string() + ": malformed label '" + line + "'");
        ds.labels.push_back(y);
        max_label = std::max(max_label, y);
    }
    if (ds.labels.size() != count) {
        throw LoadError(labels_path.string() + ": " + std::to_string(ds.labels.size()) + " labels for " +
                        std::to_string(count) + " images");
    }
    ds.num_classes = num_classes ? num_classes : static_cast<std::size_t>(std::max(max_label + 1, 2));
    if (static_cast<std::size_t>(max_label) >= ds.num_classes) throw LoadError(labels_path.string() + ": label exceeds class count");
    return ds;
}

void save_split(const std::filesystem::path& dir, const DatasetSplit& split) {
    save_dataset(dir / "train.bin", dir / "train.labels", split.train);
    save_dataset(dir / "test.bin", dir / "test.labels", split.test);
}

DatasetSplit load_split(const std::filesystem::path& dir, std::size_t num_classes) {
    return {load_dataset(dir / "train.bin", dir / "train.labels", num_classes),
            load_dataset(dir / "test.bin", dir / "test.labels", num_classes)};
}

}  // namespace chaosssl
