#pragma once

// Little-endian stream helpers for the container formats.

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "texlat/error.hpp"

namespace texlat::detail {

template <class T>
T to_little(T v) {
    if constexpr (std::endian::native == std::endian::big) {
        auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
        std::reverse(bytes.begin(), bytes.end());
        return std::bit_cast<T>(bytes);
    }
    return v;
}

class BinaryWriter {
public:
    explicit BinaryWriter(std::ostream& out) : out_(out) {}

    void magic(std::string_view tag) { out_.write(tag.data(), static_cast<std::streamsize>(tag.size())); }

    template <class T>
    void put(T v) {
        const T le = to_little(v);
        out_.write(reinterpret_cast<const char*>(&le), sizeof(T));
    }

    void doubles(const double* p, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) put(p[i]);
    }

    void fixed_string(const std::string& s, std::size_t width) {
        std::string buf(width, '\0');
        std::copy_n(s.begin(), std::min(s.size(), width), buf.begin());
        out_.write(buf.data(), static_cast<std::streamsize>(width));
    }

    void check(const std::string& what) const {
        if (!out_) throw DataError("failed writing " + what);
    }

private:
    std::ostream& out_;
};

class BinaryReader {
public:
    BinaryReader(std::istream& in, std::string what) : in_(in), what_(std::move(what)) {}

    void expect_magic(std::string_view tag) {
        std::string buf(tag.size(), '\0');
        in_.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (!in_ || buf != tag) throw DataError("corrupt container: " + what_ + " does not start with '" + std::string(tag) + "'");
    }

    void expect_version(std::uint32_t expected) {
        const auto v = get<std::uint32_t>();
        if (v != expected) {
            throw DataError("version mismatch: " + what_ + " has format version " + std::to_string(v) +
                            ", this build reads version " + std::to_string(expected));
        }
    }

    template <class T>
    T get() {
        T v{};
        in_.read(reinterpret_cast<char*>(&v), sizeof(T));
        if (!in_) throw DataError("truncated " + what_);
        return to_little(v);
    }

    void doubles(double* p, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) p[i] = get<double>();
    }

    std::string fixed_string(std::size_t width) {
        std::string buf(width, '\0');
        in_.read(buf.data(), static_cast<std::streamsize>(width));
        if (!in_) throw DataError("truncated " + what_);
        buf.resize(std::strlen(buf.c_str()));
        return buf;
    }

    /// Guards allocations driven by header fields against the bytes actually left.
    void require(std::uint64_t bytes) {
        const auto here = in_.tellg();
        in_.seekg(0, std::ios::end);
        const auto end = in_.tellg();
        in_.seekg(here);
        if (here < 0 || end < 0 || static_cast<std::uint64_t>(end - here) < bytes) throw DataError("truncated " + what_);
    }

    void expect_end() {
        if (in_.peek() != std::char_traits<char>::eof()) throw DataError("corrupt container: trailing bytes in " + what_);
    }

private:
    std::istream& in_;
    std::string what_;
};

} // namespace texlat::detail
