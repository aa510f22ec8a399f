#include "texlat/formats.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "binary_io.hpp"
#include "texlat/error.hpp"

namespace texlat {
namespace {

void write_params(detail::BinaryWriter& w, const PssParams& p) {
    w.put<std::uint32_t>(static_cast<std::uint32_t>(p.scales));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(p.orientations));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(p.neighborhood));
}

PssParams read_params(detail::BinaryReader& r) {
    PssParams p;
    p.scales = r.get<std::uint32_t>();
    p.orientations = r.get<std::uint32_t>();
    p.neighborhood = r.get<std::uint32_t>();
    try {
        p.validate();
    } catch (const UsageError& e) {
        throw DataError(std::string("corrupt container: ") + e.what());
    }
    return p;
}

std::uint64_t read_dim(detail::BinaryReader& r, const PssParams& p) {
    const auto d = r.get<std::uint64_t>();
    if (d != pss_dim(p)) {
        throw DataError("corrupt container: dimension " + std::to_string(d) + " does not match the parameters (" +
                        std::to_string(pss_dim(p)) + ")");
    }
    return d;
}

template <class F>
void to_file(const std::filesystem::path& path, F&& write) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    write(out);
    out.flush();
    if (!out) throw DataError("failed writing " + path.string());
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    return in;
}

} // namespace

std::vector<PssVector> FeatureArchive::vectors() const {
    std::vector<PssVector> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back({params, r.values});
    return out;
}

void save_pss(const PssVector& v, std::ostream& out) {
    if (v.dim() != pss_dim(v.params)) throw UsageError("statistic vector length does not match its parameters");
    detail::BinaryWriter w(out);
    w.magic("PSSV");
    w.put<std::uint32_t>(kVectorFormatVersion);
    write_params(w, v.params);
    w.put<std::uint64_t>(v.dim());
    w.doubles(v.values.data(), v.dim());
    w.check("statistic vector");
}

void save_pss(const PssVector& v, const std::filesystem::path& path) {
    to_file(path, [&](std::ostream& o) { save_pss(v, o); });
}

PssVector load_pss(std::istream& in) {
    detail::BinaryReader r(in, "statistic vector file");
    r.expect_magic("PSSV");
    r.expect_version(kVectorFormatVersion);
    PssVector v;
    v.params = read_params(r);
    const auto d = read_dim(r, v.params);
    v.values.resize(d);
    r.doubles(v.values.data(), d);
    r.expect_end();
    return v;
}

PssVector load_pss(const std::filesystem::path& path) {
    auto in = open_in(path);
    return load_pss(in);
}

void write_pss_csv(const PssVector& v, std::ostream& out) {
    const PssLayout layout(v.params);
    if (v.dim() != layout.dim()) throw UsageError("statistic vector length does not match its parameters");
    std::ostringstream buf;
    buf.imbue(std::locale::classic());
    buf << "name,value\n";
    for (std::size_t i = 0; i < v.dim(); ++i) buf << layout.names()[i] << ',' << format_double(v.values[i]) << '\n';
    out << buf.str();
}

void save_archive(const FeatureArchive& a, std::ostream& out) {
    const std::size_t d = pss_dim(a.params);
    for (const auto& rec : a.records) {
        if (rec.values.size() != d) throw UsageError("archive record " + rec.id + " has the wrong length");
        if (rec.id.size() >= kArchiveIdBytes) throw UsageError("image id too long for the archive: " + rec.id);
        if (rec.label.size() >= kArchiveLabelBytes) throw UsageError("class label too long for the archive: " + rec.label);
    }
    detail::BinaryWriter w(out);
    w.magic("PSSA");
    w.put<std::uint32_t>(kArchiveFormatVersion);
    write_params(w, a.params);
    w.put<std::uint64_t>(d);
    w.put<std::uint64_t>(a.records.size());
    for (const auto& rec : a.records) {
        w.fixed_string(rec.id, kArchiveIdBytes);
        w.fixed_string(rec.label, kArchiveLabelBytes);
        w.doubles(rec.values.data(), d);
    }
    w.check("archive");
}

void save_archive(const FeatureArchive& a, const std::filesystem::path& path) {
    to_file(path, [&](std::ostream& o) { save_archive(a, o); });
}

FeatureArchive load_archive(std::istream& in) {
    detail::BinaryReader r(in, "feature archive");
    r.expect_magic("PSSA");
    r.expect_version(kArchiveFormatVersion);
    FeatureArchive a;
    a.params = read_params(r);
    const auto d = read_dim(r, a.params);
    const auto count = r.get<std::uint64_t>();
    r.require(count * (kArchiveIdBytes + kArchiveLabelBytes + d * sizeof(double)));
    a.records.resize(count);
    for (auto& rec : a.records) {
        rec.id = r.fixed_string(kArchiveIdBytes);
        rec.label = r.fixed_string(kArchiveLabelBytes);
        rec.values.resize(d);
        r.doubles(rec.values.data(), d);
    }
    r.expect_end();
    return a;
}

FeatureArchive load_archive(const std::filesystem::path& path) {
    auto in = open_in(path);
    return load_archive(in);
}

void save_code(const TextureCode& c, std::ostream& out) {
    detail::BinaryWriter w(out);
    w.magic("TXCD");
    w.put<std::uint32_t>(kCodeFormatVersion);
    write_params(w, c.params);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(c.side));
    w.put<std::uint64_t>(c.values.size());
    w.doubles(c.values.data(), c.values.size());
    w.check("code");
}

void save_code(const TextureCode& c, const std::filesystem::path& path) {
    to_file(path, [&](std::ostream& o) { save_code(c, o); });
}

TextureCode load_code(std::istream& in) {
    detail::BinaryReader r(in, "code file");
    r.expect_magic("TXCD");
    r.expect_version(kCodeFormatVersion);
    TextureCode c;
    c.params = read_params(r);
    c.side = r.get<std::uint32_t>();
    const auto d = r.get<std::uint64_t>();
    if (d == 0) throw DataError("corrupt container: empty code");
    r.require(d * sizeof(double));
    c.values.resize(d);
    r.doubles(c.values.data(), d);
    r.expect_end();
    return c;
}

TextureCode load_code(const std::filesystem::path& path) {
    auto in = open_in(path);
    return load_code(in);
}

std::string format_double(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string file_magic(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::string tag(4, '\0');
    in.read(tag.data(), 4);
    if (in.gcount() != 4) return {};
    return tag;
}

} // namespace texlat
