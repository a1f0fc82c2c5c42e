#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "cshift/core/image.hpp"

namespace cshift {

// CSMAP tensor file, bit-exact across platforms:
//   magic "CSMAP\0" (6 bytes) | version u16le = 1 | h,w,c u32le |
//   h*w*c float32le, row-major (y, x, channel).
// 20-byte header, then the payload.

namespace csmap_detail {

constexpr char kMagic[6] = {'C', 'S', 'M', 'A', 'P', '\0'};
constexpr uint16_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "CSMAP I/O assumes a little-endian host");

inline void put_u16(std::string& out, uint16_t v) { out.append(reinterpret_cast<const char*>(&v), 2); }
inline void put_u32(std::string& out, uint32_t v) { out.append(reinterpret_cast<const char*>(&v), 4); }

}  // namespace csmap_detail

inline void write_map(const PredictionMap& map, const std::filesystem::path& path) {
    validate_map(map);
    std::string buf;
    buf.reserve(20 + map.image.data.size() * 4);
    buf.append(csmap_detail::kMagic, 6);
    csmap_detail::put_u16(buf, csmap_detail::kVersion);
    csmap_detail::put_u32(buf, static_cast<uint32_t>(map.image.h));
    csmap_detail::put_u32(buf, static_cast<uint32_t>(map.image.w));
    csmap_detail::put_u32(buf, static_cast<uint32_t>(map.image.c));
    buf.append(reinterpret_cast<const char*>(map.image.data.data()), map.image.data.size() * 4);

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw WriteError("cannot open for writing: " + path.string());
    f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!f) throw WriteError("short write: " + path.string());
}

// Reads a CSMAP file. The task spec supplies the expected name/kind/channel
// contract. Loads never mutate data (round trips stay bit-exact);
// classification payloads outside the simplex tolerance are rejected.
inline PredictionMap read_map(const std::filesystem::path& path, const TaskSpec& task) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for reading: " + path.string());
    char header[20];
    if (!f.read(header, sizeof(header))) throw FormatError("truncated header: " + path.string());
    if (std::memcmp(header, csmap_detail::kMagic, 6) != 0)
        throw FormatError("bad magic: " + path.string());
    uint16_t version;
    uint32_t h, w, c;
    std::memcpy(&version, header + 6, 2);
    std::memcpy(&h, header + 8, 4);
    std::memcpy(&w, header + 12, 4);
    std::memcpy(&c, header + 16, 4);
    if (version != csmap_detail::kVersion)
        throw FormatError("unsupported version " + std::to_string(version) + ": " + path.string());
    if (h == 0 || w == 0 || c == 0 || h > (1u << 20) || w > (1u << 20) || c > 4096)
        throw FormatError("implausible dimensions: " + path.string());

    PredictionMap map(task, static_cast<int>(h), static_cast<int>(w));
    if (static_cast<int>(c) != task.channels)
        throw FormatError("channel mismatch for task '" + task.name + "': " + path.string());
    if (!f.read(reinterpret_cast<char*>(map.image.data.data()),
                static_cast<std::streamsize>(map.image.data.size() * 4)))
        throw FormatError("truncated payload: " + path.string());
    char extra;
    if (f.read(&extra, 1)) throw FormatError("trailing bytes: " + path.string());

    const std::string err = check_map(map);
    if (!err.empty()) throw InvalidMap("invalid payload in " + path.string() + ": " + err);
    return map;
}

}  // namespace cshift
