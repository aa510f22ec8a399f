#pragma once

// Class-folder image datasets: root/<class>/<image>.pgm, optionally described
// by a JSON manifest.

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "texlat/image.hpp"

namespace texlat {

struct Preprocess {
    std::size_t size = 128;
    double mean = 127.0;
    double std = 40.0;
};

struct DatasetManifest {
    std::filesystem::path root;
    std::vector<std::string> classes;  // empty: every subdirectory, sorted
    std::size_t train_per_class = 0;   // 0: every image goes to training
    std::size_t eval_per_class = 0;    // taken after the training images
    Preprocess preprocess;
};

struct DatasetEntry {
    std::filesystem::path path;
    std::string id;     // "<class>/<file name>"
    std::string label;  // class name
};

struct DatasetSplit {
    std::vector<DatasetEntry> train;
    std::vector<DatasetEntry> eval;
};

/// Reads a manifest; root is resolved relative to the manifest's directory.
/// Keys: root, classes, train, eval, size, mean, std (all optional but root).
DatasetManifest load_manifest(const std::filesystem::path& path);

/// A directory is a dataset root; a .json file is a manifest.
DatasetManifest open_dataset(const std::filesystem::path& path);

/// Per class, image files sorted by name: the first train_per_class go to
/// train and the next eval_per_class to eval. Throws DataError for a missing
/// or empty class and for counts larger than what is available.
DatasetSplit split_dataset(const DatasetManifest& manifest);

/// Centre-crops to a square, resamples to p.size and normalizes.
Image preprocess(const Image& img, const Preprocess& p);

} // namespace texlat
