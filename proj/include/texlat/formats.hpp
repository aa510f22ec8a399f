#pragma once

// On-disk containers. All numbers are little-endian; floats are 64-bit.
//
//   statistic vector  "PSSV" u32 version, u32 N, K, M, u64 D, D x f64
//   feature archive   "PSSA" u32 version, u32 N, K, M, u64 D, u64 count,
//                     count x (char id[128], char label[64], D x f64)
//   texture code      "TXCD" u32 version, u32 N, K, M, u32 side, u64 d, d x f64

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "texlat/pss.hpp"

namespace texlat {

inline constexpr std::uint32_t kVectorFormatVersion = 1;
inline constexpr std::uint32_t kArchiveFormatVersion = 1;
inline constexpr std::uint32_t kCodeFormatVersion = 1;
inline constexpr std::size_t kArchiveIdBytes = 128;
inline constexpr std::size_t kArchiveLabelBytes = 64;

struct ArchiveRecord {
    std::string id;
    std::string label;
    std::vector<double> values;
};

struct FeatureArchive {
    PssParams params;
    std::vector<ArchiveRecord> records;

    std::vector<PssVector> vectors() const;
};

struct TextureCode {
    PssParams params;
    std::size_t side = 0;  // image size the code came from, 0 if unknown
    std::vector<double> values;
};

void save_pss(const PssVector& v, std::ostream& out);
void save_pss(const PssVector& v, const std::filesystem::path& path);
PssVector load_pss(std::istream& in);
PssVector load_pss(const std::filesystem::path& path);
/// Two columns, name,value, one row per entry in layout order.
void write_pss_csv(const PssVector& v, std::ostream& out);

void save_archive(const FeatureArchive& a, std::ostream& out);
void save_archive(const FeatureArchive& a, const std::filesystem::path& path);
FeatureArchive load_archive(std::istream& in);
FeatureArchive load_archive(const std::filesystem::path& path);

void save_code(const TextureCode& c, std::ostream& out);
void save_code(const TextureCode& c, const std::filesystem::path& path);
TextureCode load_code(std::istream& in);
TextureCode load_code(const std::filesystem::path& path);

/// Shortest text that reads back to the same double, '.' decimal.
std::string format_double(double v);

/// Four-byte tag at the start of a file, or an empty string if it is shorter.
std::string file_magic(const std::filesystem::path& path);

} // namespace texlat
