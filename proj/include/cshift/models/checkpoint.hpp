#pragma once

#include <cstring>
#include <filesystem>
#include <fstream>

#include "cshift/models/edge_model.hpp"

namespace cshift {

// CSPRM parameter checkpoint, sibling of the CSMAP container:
//   "CSPRM\0" | version u16le = 1 | arch u8 | src/dst names (u16le length +
//   bytes each) | param count u32le | float32le payload.

namespace csprm_detail {
constexpr char kMagic[6] = {'C', 'S', 'P', 'R', 'M', '\0'};
constexpr uint16_t kVersion = 1;
}  // namespace csprm_detail

inline void write_checkpoint(const EdgeModel& model, const std::filesystem::path& path) {
    std::string buf;
    buf.append(csprm_detail::kMagic, 6);
    auto put_u16 = [&](uint16_t v) { buf.append(reinterpret_cast<const char*>(&v), 2); };
    auto put_u32 = [&](uint32_t v) { buf.append(reinterpret_cast<const char*>(&v), 4); };
    put_u16(csprm_detail::kVersion);
    buf.push_back(model.core.arch == ArchKind::PatchLinear ? '\0' : '\1');
    put_u16(static_cast<uint16_t>(model.src.name.size()));
    buf.append(model.src.name);
    put_u16(static_cast<uint16_t>(model.dst.name.size()));
    buf.append(model.dst.name);
    put_u32(static_cast<uint32_t>(model.core.params.size()));
    buf.append(reinterpret_cast<const char*>(model.core.params.data()), model.core.params.size() * 4);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw WriteError("cannot open for writing: " + path.string());
    f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!f) throw WriteError("short write: " + path.string());
}

// Restores parameters into a model constructed from the given task specs.
inline EdgeModel read_checkpoint(const std::filesystem::path& path, const TaskSpec& src,
                                 const TaskSpec& dst) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for reading: " + path.string());
    char magic[6];
    if (!f.read(magic, 6) || std::memcmp(magic, csprm_detail::kMagic, 6) != 0)
        throw FormatError("bad checkpoint magic: " + path.string());
    auto get_u16 = [&]() {
        uint16_t v;
        if (!f.read(reinterpret_cast<char*>(&v), 2)) throw FormatError("truncated checkpoint: " + path.string());
        return v;
    };
    auto get_u32 = [&]() {
        uint32_t v;
        if (!f.read(reinterpret_cast<char*>(&v), 4)) throw FormatError("truncated checkpoint: " + path.string());
        return v;
    };
    if (get_u16() != csprm_detail::kVersion) throw FormatError("unsupported checkpoint version: " + path.string());
    char arch_tag;
    if (!f.read(&arch_tag, 1)) throw FormatError("truncated checkpoint: " + path.string());
    auto get_name = [&]() {
        const uint16_t len = get_u16();
        std::string s(len, '\0');
        if (!f.read(s.data(), len)) throw FormatError("truncated checkpoint: " + path.string());
        return s;
    };
    const std::string src_name = get_name();
    const std::string dst_name = get_name();
    if (src_name != src.name || dst_name != dst.name)
        throw FormatError("checkpoint edge " + src_name + "->" + dst_name + " does not match requested " +
                          src.name + "->" + dst.name);
    EdgeModel model(src, dst, arch_tag == '\0' ? ArchKind::PatchLinear : ArchKind::ShallowConv);
    const uint32_t count = get_u32();
    if (count != model.core.params.size()) throw FormatError("checkpoint parameter count mismatch: " + path.string());
    if (!f.read(reinterpret_cast<char*>(model.core.params.data()), std::streamsize(count) * 4))
        throw FormatError("truncated checkpoint payload: " + path.string());
    for (float v : model.core.params)
        if (!std::isfinite(v)) throw InvalidMap("non-finite parameters in " + path.string());
    return model;
}

}  // namespace cshift
