#include "texlat/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include <json.hpp>

#include "texlat/error.hpp"

namespace texlat {
namespace fs = std::filesystem;

namespace {

bool is_image_file(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext == ".pgm";
}

std::vector<fs::path> class_files(const fs::path& dir, const std::string& name) {
    if (!fs::is_directory(dir)) throw DataError("class directory not found: " + name);
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && is_image_file(e.path())) files.push_back(e.path());
    if (files.empty()) throw DataError("class '" + name + "' contains no images");
    std::sort(files.begin(), files.end());
    return files;
}

} // namespace

DatasetManifest load_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open manifest " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("invalid manifest " + path.string() + ": " + e.what());
    }
    DatasetManifest m;
    try {
        const fs::path root = j.at("root").get<std::string>();
        m.root = root.is_absolute() ? root : path.parent_path() / root;
        if (j.contains("classes")) m.classes = j["classes"].get<std::vector<std::string>>();
        m.train_per_class = j.value("train", std::size_t{0});
        m.eval_per_class = j.value("eval", std::size_t{0});
        m.preprocess.size = j.value("size", m.preprocess.size);
        m.preprocess.mean = j.value("mean", m.preprocess.mean);
        m.preprocess.std = j.value("std", m.preprocess.std);
    } catch (const nlohmann::json::exception& e) {
        throw DataError("invalid manifest " + path.string() + ": " + e.what());
    }
    if (m.preprocess.size == 0 || !(m.preprocess.std > 0)) throw DataError("invalid preprocessing in " + path.string());
    return m;
}

DatasetManifest open_dataset(const fs::path& path) {
    if (fs::is_directory(path)) {
        DatasetManifest m;
        m.root = path;
        return m;
    }
    if (path.extension() == ".json") return load_manifest(path);
    throw DataError("not a dataset directory or manifest: " + path.string());
}

DatasetSplit split_dataset(const DatasetManifest& manifest) {
    if (!fs::is_directory(manifest.root)) throw DataError("dataset root not found: " + manifest.root.string());
    std::vector<std::string> classes = manifest.classes;
    if (classes.empty()) {
        for (const auto& e : fs::directory_iterator(manifest.root))
            if (e.is_directory()) classes.push_back(e.path().filename().string());
        std::sort(classes.begin(), classes.end());
    }
    if (classes.empty()) throw DataError("dataset has no class directories: " + manifest.root.string());

    DatasetSplit split;
    for (const auto& name : classes) {
        const auto files = class_files(manifest.root / name, name);
        const std::size_t train = manifest.train_per_class == 0 ? files.size() : manifest.train_per_class;
        if (train + manifest.eval_per_class > files.size()) {
            throw DataError("class '" + name + "' has " + std::to_string(files.size()) + " images, split needs " +
                            std::to_string(train + manifest.eval_per_class));
        }
        for (std::size_t i = 0; i < train + manifest.eval_per_class; ++i) {
            DatasetEntry e{files[i], name + "/" + files[i].filename().string(), name};
            (i < train ? split.train : split.eval).push_back(std::move(e));
        }
    }
    return split;
}

Image preprocess(const Image& img, const Preprocess& p) {
    if (img.empty()) throw DataError("empty image");
    Image square = img;
    if (!img.is_square()) {
        const std::size_t s = std::min(img.width(), img.height());
        const std::size_t ox = (img.width() - s) / 2, oy = (img.height() - s) / 2;
        square = Image(s, s);
        for (std::size_t y = 0; y < s; ++y)
            for (std::size_t x = 0; x < s; ++x) square(x, y) = img(ox + x, oy + y);
    }
    const Image sized = square.width() == p.size ? square : resize_area(square, p.size, p.size);
    return normalize(sized, p.mean, p.std);
}

} // namespace texlat
