#include "binary_io.hpp"

#include <fstream>
#include <iterator>

namespace chaosssl::binary {

std::vector<char> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::vector<char>& data) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw IoError("write to " + path.string() + " failed");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    write_file(path, std::vector<char>(text.begin(), text.end()));
}

std::string read_text(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    return {bytes.begin(), bytes.end()};
}

}  // namespace chaosssl::binary
