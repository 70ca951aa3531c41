#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "quadsketch/errors.hpp"

// Little-endian primitives shared by the SDFG/VQCB/CNTM file formats.

namespace quadsketch {

static_assert(std::endian::native == std::endian::little,
              "file formats are little-endian; byte swap not implemented");

inline void write_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline void write_u16(std::ostream& out, std::uint16_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline void write_u64(std::ostream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline void write_u8(std::ostream& out, std::uint8_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline void write_f32(std::ostream& out, float v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
inline T read_le(std::istream& in, const char* what) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw IoError(std::string("unexpected end of file reading ") + what);
    return v;
}

inline std::uint32_t read_u32(std::istream& in, const char* what) { return read_le<std::uint32_t>(in, what); }
inline std::uint16_t read_u16(std::istream& in, const char* what) { return read_le<std::uint16_t>(in, what); }
inline std::uint64_t read_u64(std::istream& in, const char* what) { return read_le<std::uint64_t>(in, what); }
inline std::uint8_t read_u8(std::istream& in, const char* what) { return read_le<std::uint8_t>(in, what); }
inline float read_f32(std::istream& in, const char* what) { return read_le<float>(in, what); }

inline void expect_magic(std::istream& in, const char magic[4], const char* format_name) {
    char buf[4] = {0, 0, 0, 0};
    in.read(buf, 4);
    if (!in || std::memcmp(buf, magic, 4) != 0)
        throw IoError(std::string("bad magic, not a ") + format_name + " file");
}

} // namespace quadsketch
