#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "mivs/errors.hpp"

// Little-endian binary primitives shared by the dataset and checkpoint formats.
// Header lines are stored as: u16 length, then that many ASCII "key=value" bytes.

namespace mivs::binio {

static_assert(sizeof(float) == 4, "requires 32-bit IEEE-754 float");

template <typename T>
inline T byteswap_if_big(T v) {
    if constexpr (std::endian::native == std::endian::little) {
        return v;
    } else {
        unsigned char* p = reinterpret_cast<unsigned char*>(&v);
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(p[i], p[sizeof(T) - 1 - i]);
        return v;
    }
}

class Writer {
public:
    explicit Writer(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw std::runtime_error("cannot open for writing: " + path);
    }

    void raw(const void* data, std::size_t n) {
        out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
        offset_ += n;
    }

    void magic(const char (&m)[9]) { raw(m, 8); }

    void u16(std::uint16_t v) { v = byteswap_if_big(v); raw(&v, 2); }

    void header_line(const std::string& key, const std::string& value) {
        std::string line = key + "=" + value;
        if (line.size() > 0xffff) throw std::invalid_argument("header line too long");
        u16(static_cast<std::uint16_t>(line.size()));
        raw(line.data(), line.size());
    }

    void byte(std::uint8_t v) { raw(&v, 1); }

    void f32(float v) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        bits = byteswap_if_big(bits);
        raw(&bits, 4);
    }

    void f32_array(const float* p, std::size_t n) {
        if constexpr (std::endian::native == std::endian::little) {
            raw(p, n * 4);
        } else {
            for (std::size_t i = 0; i < n; ++i) f32(p[i]);
        }
    }

    bool good() const { return out_.good(); }
    std::size_t offset() const { return offset_; }

private:
    std::ofstream out_;
    std::size_t offset_ = 0;
};

class Reader {
public:
    explicit Reader(const std::string& path) : in_(path, std::ios::binary) {
        if (!in_) throw std::runtime_error("cannot open for reading: " + path);
    }

    void raw(void* data, std::size_t n) {
        in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n)
            throw FormatError("unexpected end of file", offset_);
        offset_ += n;
    }

    void expect_magic(const char (&m)[9]) {
        char buf[8];
        raw(buf, 8);
        if (std::memcmp(buf, m, 8) != 0) throw FormatError("bad magic", 0);
    }

    std::uint16_t u16() {
        std::uint16_t v;
        raw(&v, 2);
        return byteswap_if_big(v);
    }

    /// Reads one length-prefixed header line and splits at the first '='.
    std::pair<std::string, std::string> header_line() {
        std::uint16_t n = u16();
        std::string line(n, '\0');
        raw(line.data(), n);
        auto eq = line.find('=');
        if (eq == std::string::npos) throw FormatError("header line missing '='", offset_);
        return {line.substr(0, eq), line.substr(eq + 1)};
    }

    std::uint8_t byte() {
        std::uint8_t v;
        raw(&v, 1);
        return v;
    }

    float f32() {
        std::uint32_t bits;
        raw(&bits, 4);
        bits = byteswap_if_big(bits);
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }

    void f32_array(float* p, std::size_t n) {
        if constexpr (std::endian::native == std::endian::little) {
            raw(p, n * 4);
        } else {
            for (std::size_t i = 0; i < n; ++i) p[i] = f32();
        }
    }

    bool at_eof() {
        if (in_.peek() == std::char_traits<char>::eof()) return true;
        return false;
    }

    std::size_t offset() const { return offset_; }

private:
    std::ifstream in_;
    std::size_t offset_ = 0;
};

} // namespace mivs::binio
