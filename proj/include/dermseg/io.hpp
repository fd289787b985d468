#pragma once

// PNG and JPEG file access on top of libpng and libjpeg.

#include <csetjmp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <jpeglib.h>
#include <png.h>

#include "dermseg/image.hpp"

namespace dermseg::io {

static_assert(sizeof(Rgb) == 3, "RgbImage pixels must be tightly packed");

namespace fs = std::filesystem;

inline std::vector<unsigned char> read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const fs::path& path, const std::string& bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("write failed for " + path.string());
}

inline bool is_png(const std::vector<unsigned char>& bytes)
{
    return bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0;
}

inline bool is_jpeg(const std::vector<unsigned char>& bytes)
{
    return bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF;
}

namespace detail {

struct PngImage {
    png_image img{};
    PngImage()
    {
        img.version = PNG_IMAGE_VERSION;
    }
    ~PngImage() { png_image_free(&img); }
    PngImage(const PngImage&) = delete;
    PngImage& operator=(const PngImage&) = delete;
};

inline std::vector<unsigned char> decode_png(const std::vector<unsigned char>& bytes, png_uint_32 format,
                                             int& width, int& height, const std::string& name)
{
    PngImage p;
    if (!png_image_begin_read_from_memory(&p.img, bytes.data(), bytes.size())) {
        throw Error("PNG decode failed for " + name + ": " + p.img.message);
    }
    p.img.format = format;
    std::vector<unsigned char> buf(PNG_IMAGE_SIZE(p.img));
    if (!png_image_finish_read(&p.img, nullptr, buf.data(), 0, nullptr)) {
        throw Error("PNG decode failed for " + name + ": " + p.img.message);
    }
    width = static_cast<int>(p.img.width);
    height = static_cast<int>(p.img.height);
    return buf;
}

inline std::string encode_png(const unsigned char* pixels, int width, int height, png_uint_32 format)
{
    PngImage p;
    p.img.width = static_cast<png_uint_32>(width);
    p.img.height = static_cast<png_uint_32>(height);
    p.img.format = format;
    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&p.img, nullptr, &size, 0, pixels, 0, nullptr)) {
        throw Error(std::string("PNG encode failed: ") + p.img.message);
    }
    std::string out(size, '\0');
    if (!png_image_write_to_memory(&p.img, out.data(), &size, 0, pixels, 0, nullptr)) {
        throw Error(std::string("PNG encode failed: ") + p.img.message);
    }
    out.resize(size);
    return out;
}

struct JpegError {
    jpeg_error_mgr mgr{};
    std::jmp_buf jump{};
    char message[JMSG_LENGTH_MAX] = {};
};

inline void jpeg_error_exit(j_common_ptr cinfo)
{
    auto* err = reinterpret_cast<JpegError*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, err->message);
    std::longjmp(err->jump, 1);
}

inline void jpeg_silence(j_common_ptr, int) {}

// Kept free of C++ objects with destructors between setjmp and longjmp.
inline bool decode_jpeg_raw(const std::vector<unsigned char>& bytes, std::vector<unsigned char>& out,
                            int& width, int& height, JpegError& err)
{
    jpeg_decompress_struct cinfo{};
    cinfo.err = jpeg_std_error(&err.mgr);
    err.mgr.error_exit = jpeg_error_exit;
    err.mgr.emit_message = jpeg_silence;
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        return false;
    }
    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);
    width = static_cast<int>(cinfo.output_width);
    height = static_cast<int>(cinfo.output_height);
    out.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3);
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = out.data() + static_cast<std::size_t>(cinfo.output_scanline) * width * 3;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return true;
}

inline bool encode_jpeg_raw(const unsigned char* pixels, int width, int height, int quality,
                            unsigned char*& mem, unsigned long& size, JpegError& err)
{
    jpeg_compress_struct cinfo{};
    cinfo.err = jpeg_std_error(&err.mgr);
    err.mgr.error_exit = jpeg_error_exit;
    if (setjmp(err.jump)) {
        jpeg_destroy_compress(&cinfo);
        return false;
    }
    jpeg_create_compress(&cinfo);
    jpeg_mem_dest(&cinfo, &mem, &size);
    cinfo.image_width = static_cast<JDIMENSION>(width);
    cinfo.image_height = static_cast<JDIMENSION>(height);
    cinfo.input_components = 3;
    cinfo.in_color_space = JCS_RGB;
    jpeg_set_defaults(&cinfo);
    jpeg_set_quality(&cinfo, quality, TRUE);
    jpeg_start_compress(&cinfo, TRUE);
    while (cinfo.next_scanline < cinfo.image_height) {
        auto row = const_cast<JSAMPROW>(pixels + static_cast<std::size_t>(cinfo.next_scanline) * width * 3);
        jpeg_write_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_compress(&cinfo);
    jpeg_destroy_compress(&cinfo);
    return true;
}

inline RgbImage to_rgb_image(const std::vector<unsigned char>& buf, int width, int height)
{
    RgbImage img(width, height);
    for (std::size_t i = 0; i < img.size(); ++i) {
        img[i] = {buf[3 * i], buf[3 * i + 1], buf[3 * i + 2]};
    }
    return img;
}

}  // namespace detail

/// Decodes a JPEG or PNG (detected from content) to 8-bit RGB.
inline RgbImage read_rgb(const fs::path& path)
{
    const auto bytes = read_file(path);
    int w = 0, h = 0;
    if (is_png(bytes)) {
        const auto buf = detail::decode_png(bytes, PNG_FORMAT_RGB, w, h, path.string());
        return detail::to_rgb_image(buf, w, h);
    }
    if (is_jpeg(bytes)) {
        std::vector<unsigned char> buf;
        detail::JpegError err;
        if (!detail::decode_jpeg_raw(bytes, buf, w, h, err)) {
            throw Error("JPEG decode failed for " + path.string() + ": " + err.message);
        }
        return detail::to_rgb_image(buf, w, h);
    }
    throw Error("unsupported image format: " + path.string());
}

/// Any PNG (gray, paletted, RGB); pixels whose gray value is >= 128 are foreground.
inline BinaryMask read_mask(const fs::path& path)
{
    const auto bytes = read_file(path);
    if (!is_png(bytes)) throw Error("mask is not a PNG: " + path.string());
    int w = 0, h = 0;
    const auto buf = detail::decode_png(bytes, PNG_FORMAT_GRAY, w, h, path.string());
    BinaryMask m(w, h);
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = buf[i] >= 128 ? 1 : 0;
    return m;
}

inline std::string encode_mask_png(const BinaryMask& mask)
{
    std::vector<unsigned char> buf(mask.size());
    for (std::size_t i = 0; i < mask.size(); ++i) buf[i] = mask[i] ? 255 : 0;
    return detail::encode_png(buf.data(), mask.width(), mask.height(), PNG_FORMAT_GRAY);
}

inline std::string encode_rgb_png(const RgbImage& img)
{
    return detail::encode_png(reinterpret_cast<const unsigned char*>(img.data().data()), img.width(),
                              img.height(), PNG_FORMAT_RGB);
}

inline void write_mask(const fs::path& path, const BinaryMask& mask) { write_file(path, encode_mask_png(mask)); }

inline void write_rgb_png(const fs::path& path, const RgbImage& img) { write_file(path, encode_rgb_png(img)); }

inline void write_jpeg(const fs::path& path, const RgbImage& img, int quality = 95)
{
    unsigned char* mem = nullptr;
    unsigned long size = 0;
    detail::JpegError err;
    const bool ok = detail::encode_jpeg_raw(reinterpret_cast<const unsigned char*>(img.data().data()),
                                            img.width(), img.height(), quality, mem, size, err);
    std::unique_ptr<unsigned char, decltype(&std::free)> guard(mem, &std::free);
    if (!ok) throw Error(std::string("JPEG encode failed: ") + err.message);
    write_file(path, std::string(reinterpret_cast<const char*>(mem), size));
}

}  // namespace dermseg::io
