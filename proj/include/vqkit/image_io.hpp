#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <jpeglib.h>
#include <png.h>

#include "vqkit/error.hpp"
#include "vqkit/image.hpp"

namespace vqkit {

namespace iodetail {

inline std::string lower_ext(const std::string& path) {
    std::string ext = std::filesystem::path(path).extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return ext;
}

inline ImageBuffer from_rgb8(const std::vector<unsigned char>& bytes, int w, int h) {
    ImageBuffer img = ImageBuffer::create(w, h);
    for (size_t i = 0; i < img.samples.size(); ++i) {
        img.samples[i] = bytes[i] / 255.0;
    }
    return img;
}

inline std::vector<unsigned char> to_rgb8(const ImageBuffer& img) {
    std::vector<unsigned char> bytes(img.samples.size());
    for (size_t i = 0; i < img.samples.size(); ++i) {
        const double v = std::clamp(img.samples[i], 0.0, 1.0);
        bytes[i] = static_cast<unsigned char>(std::lround(v * 255.0));
    }
    return bytes;
}

inline ImageBuffer read_png(const std::string& path) {
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&png, path.c_str())) {
        throw Error(ErrorCode::IoError, "png read failed: " + path + ": " + png.message);
    }
    png.format = PNG_FORMAT_RGB;
    std::vector<unsigned char> bytes(PNG_IMAGE_SIZE(png));
    if (!png_image_finish_read(&png, nullptr, bytes.data(), 0, nullptr)) {
        const std::string message = png.message;
        png_image_free(&png);
        throw Error(ErrorCode::IoError, "png decode failed: " + path + ": " + message);
    }
    return from_rgb8(bytes, static_cast<int>(png.width), static_cast<int>(png.height));
}

inline void write_png(const ImageBuffer& img, const std::string& path) {
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(img.width);
    png.height = static_cast<png_uint_32>(img.height);
    png.format = PNG_FORMAT_RGB;
    const auto bytes = to_rgb8(img);
    if (!png_image_write_to_file(&png, path.c_str(), 0, bytes.data(), 0, nullptr)) {
        throw Error(ErrorCode::IoError, "png write failed: " + path + ": " + png.message);
    }
}

inline ImageBuffer read_jpeg(const std::string& path) {
    FILE* fp = std::fopen(path.c_str(), "rb");
    if (!fp) throw Error(ErrorCode::IoError, "cannot open " + path);
    jpeg_decompress_struct cinfo{};
    jpeg_error_mgr jerr{};
    cinfo.err = jpeg_std_error(&jerr);
    jpeg_create_decompress(&cinfo);
    jpeg_stdio_src(&cinfo, fp);
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);
    const int w = cinfo.output_width, h = cinfo.output_height;
    std::vector<unsigned char> bytes(static_cast<size_t>(w) * h * 3);
    while (cinfo.output_scanline < cinfo.output_height) {
        unsigned char* row = bytes.data() + static_cast<size_t>(cinfo.output_scanline) * w * 3;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    std::fclose(fp);
    return from_rgb8(bytes, w, h);
}

inline void write_jpeg(const ImageBuffer& img, const std::string& path, int quality) {
    FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
    jpeg_compress_struct cinfo{};
    jpeg_error_mgr jerr{};
    cinfo.err = jpeg_std_error(&jerr);
    jpeg_create_compress(&cinfo);
    jpeg_stdio_dest(&cinfo, fp);
    cinfo.image_width = img.width;
    cinfo.image_height = img.height;
    cinfo.input_components = 3;
    cinfo.in_color_space = JCS_RGB;
    jpeg_set_defaults(&cinfo);
    jpeg_set_quality(&cinfo, quality, TRUE);
    jpeg_start_compress(&cinfo, TRUE);
    const auto bytes = to_rgb8(img);
    while (cinfo.next_scanline < cinfo.image_height) {
        const unsigned char* row = bytes.data() + static_cast<size_t>(cinfo.next_scanline) * img.width * 3;
        jpeg_write_scanlines(&cinfo, const_cast<unsigned char**>(&row), 1);
    }
    jpeg_finish_compress(&cinfo);
    jpeg_destroy_compress(&cinfo);
    std::fclose(fp);
}

inline ImageBuffer read_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    std::string magic;
    int w = 0, h = 0, maxval = 0;
    in >> magic >> w >> h >> maxval;
    if (magic != "P6" || maxval != 255 || w <= 0 || h <= 0) {
        throw Error(ErrorCode::IoError, "unsupported ppm: " + path);
    }
    in.get();  // single whitespace after header
    std::vector<unsigned char> bytes(static_cast<size_t>(w) * h * 3);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!in) throw Error(ErrorCode::IoError, "truncated ppm: " + path);
    return from_rgb8(bytes, w, h);
}

inline void write_ppm(const ImageBuffer& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
    out << "P6\n" << img.width << " " << img.height << "\n255\n";
    const auto bytes = to_rgb8(img);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

}  // namespace iodetail

inline ImageBuffer read_image(const std::string& path) {
    const std::string ext = iodetail::lower_ext(path);
    if (ext == ".png") return iodetail::read_png(path);
    if (ext == ".jpg" || ext == ".jpeg") return iodetail::read_jpeg(path);
    if (ext == ".ppm") return iodetail::read_ppm(path);
    throw Error(ErrorCode::IoError, "unsupported image format: " + path);
}

inline void write_image(const ImageBuffer& img, const std::string& path, int jpeg_quality = 92) {
    const std::string ext = iodetail::lower_ext(path);
    if (ext == ".png") return iodetail::write_png(img, path);
    if (ext == ".jpg" || ext == ".jpeg") return iodetail::write_jpeg(img, path, jpeg_quality);
    if (ext == ".ppm") return iodetail::write_ppm(img, path);
    throw Error(ErrorCode::IoError, "unsupported image format: " + path);
}

/// Reads a directory of frames (sorted by filename) as a sequence.
inline FrameSequence read_frame_dir(const std::string& dir, double fps = 30.0) {
    std::vector<std::string> paths;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string ext = iodetail::lower_ext(entry.path().string());
        if (ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".ppm") {
            paths.push_back(entry.path().string());
        }
    }
    std::sort(paths.begin(), paths.end());
    FrameSequence seq;
    seq.fps = fps;
    for (const auto& p : paths) seq.frames.push_back(read_image(p));
    if (seq.frames.size() < 2) {
        throw Error(ErrorCode::IoError, "frame directory needs at least 2 frames: " + dir);
    }
    return seq;
}

inline void write_frame_dir(const FrameSequence& seq, const std::string& dir) {
    std::filesystem::create_directories(dir);
    char name[32];
    for (size_t i = 0; i < seq.frames.size(); ++i) {
        std::snprintf(name, sizeof(name), "frame_%06zu.png", i + 1);
        write_image(seq.frames[i], (std::filesystem::path(dir) / name).string());
    }
}

}  // namespace vqkit
