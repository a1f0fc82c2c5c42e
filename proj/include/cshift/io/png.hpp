#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>

#include "cshift/core/image.hpp"

namespace cshift::io {

// Minimal 8-bit RGB PNG writer for human inspection of generated scenes.
// Uses stored (uncompressed) deflate blocks so the output is fully
// deterministic and needs no codec dependency.

namespace png_detail {

inline uint32_t crc32(const uint8_t* data, size_t n, uint32_t crc = 0xffffffffu) {
    static const auto table = [] {
        std::array<uint32_t, 256> t{};
        for (uint32_t i = 0; i < 256; ++i) {
            uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    for (size_t i = 0; i < n; ++i) crc = table[(crc ^ data[i]) & 0xff] ^ (crc >> 8);
    return crc;
}

inline void put_u32be(std::string& out, uint32_t v) {
    out.push_back(static_cast<char>(v >> 24));
    out.push_back(static_cast<char>(v >> 16));
    out.push_back(static_cast<char>(v >> 8));
    out.push_back(static_cast<char>(v));
}

inline void chunk(std::string& out, const char type[4], const std::string& payload) {
    put_u32be(out, static_cast<uint32_t>(payload.size()));
    std::string body(type, 4);
    body += payload;
    out += body;
    put_u32be(out, ~crc32(reinterpret_cast<const uint8_t*>(body.data()), body.size()));
}

}  // namespace png_detail

inline void write_png_rgb(const ImageF& rgb, const std::filesystem::path& path) {
    if (rgb.c != 3) throw ShapeError("write_png_rgb expects a 3-channel image");
    const int h = rgb.h, w = rgb.w;

    // Raw scanlines, filter byte 0 per row.
    std::string raw;
    raw.reserve(size_t(h) * (size_t(w) * 3 + 1));
    for (int y = 0; y < h; ++y) {
        raw.push_back('\0');
        for (int x = 0; x < w; ++x)
            for (int ch = 0; ch < 3; ++ch) {
                float v = rgb.at(y, x, ch);
                v = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
                raw.push_back(static_cast<char>(static_cast<int>(v * 255.0f + 0.5f)));
            }
    }

    // zlib wrapper with stored deflate blocks.
    std::string z;
    z.push_back(0x78);
    z.push_back(0x01);
    size_t off = 0;
    while (off < raw.size()) {
        const size_t len = std::min<size_t>(65535, raw.size() - off);
        const bool final = off + len == raw.size();
        z.push_back(final ? 1 : 0);
        z.push_back(static_cast<char>(len & 0xff));
        z.push_back(static_cast<char>(len >> 8));
        z.push_back(static_cast<char>(~len & 0xff));
        z.push_back(static_cast<char>((~len >> 8) & 0xff));
        z.append(raw, off, len);
        off += len;
    }
    uint32_t a = 1, b = 0;
    for (unsigned char ch : raw) {
        a = (a + ch) % 65521;
        b = (b + a) % 65521;
    }
    png_detail::put_u32be(z, (b << 16) | a);

    std::string out("\x89PNG\r\n\x1a\n", 8);
    std::string ihdr;
    png_detail::put_u32be(ihdr, static_cast<uint32_t>(w));
    png_detail::put_u32be(ihdr, static_cast<uint32_t>(h));
    ihdr.push_back(8);   // bit depth
    ihdr.push_back(2);   // color type: truecolor
    ihdr.push_back(0);
    ihdr.push_back(0);
    ihdr.push_back(0);
    png_detail::chunk(out, "IHDR", ihdr);
    png_detail::chunk(out, "IDAT", z);
    png_detail::chunk(out, "IEND", "");

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw WriteError("cannot open for writing: " + path.string());
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw WriteError("short write: " + path.string());
}

}  // namespace cshift::io
