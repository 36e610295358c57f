#pragma once

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "vqkit/distortion.hpp"
#include "vqkit/error.hpp"
#include "vqkit/image.hpp"
#include "vqkit/image_io.hpp"

namespace vqkit {

inline constexpr const char* kEncoderEnvVar = "ENCODER_BIN";

enum class VideoCodec { H264, H265 };

namespace codecdetail {

inline std::string encoder_binary() {
    const char* bin = std::getenv(kEncoderEnvVar);
    if (!bin || !*bin) {
        throw Error(ErrorCode::CodecUnavailable,
                    std::string("set ") + kEncoderEnvVar + " to an ffmpeg-compatible encoder");
    }
    return bin;
}

inline std::string stderr_excerpt(const std::string& path, size_t max_bytes = 400) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();
    if (text.size() > max_bytes) text = text.substr(text.size() - max_bytes);
    return text;
}

inline void run_or_throw(const std::string& command, const std::string& stderr_path) {
    const int status = std::system((command + " 2>" + stderr_path).c_str());
    const int exit_code = status < 0 ? -1 : WEXITSTATUS(status);
    if (exit_code == 127 || exit_code == 126) {
        throw Error(ErrorCode::CodecUnavailable, "encoder binary not runnable");
    }
    if (exit_code != 0) {
        throw Error(ErrorCode::EncodeFailed,
                    "encoder exited with " + std::to_string(exit_code) + ": " +
                        stderr_excerpt(stderr_path));
    }
}

}  // namespace codecdetail

/// Encode-decode round trip through an external encoder (ffmpeg CLI layout).
/// H.264 uses the fast preset, H.265 the veryslow preset; CRF follows the
/// ladder ({24, 36, 48} by severity).
inline FrameSequence encode_video_external(const FrameSequence& seq, VideoCodec codec, int severity,
                                           const std::string& workdir, const SeverityLadder& ladder) {
    seq.validate();
    const auto category = codec == VideoCodec::H264 ? DistortionCategory::H264Compression
                                                    : DistortionCategory::H265Compression;
    DistortionSpec spec{category, severity, 0};
    spec.validate();
    if (seq.frames.front().width % 2 != 0 || seq.frames.front().height % 2 != 0) {
        throw Error(ErrorCode::InvalidArgument, "codec path requires even frame dimensions");
    }
    const int crf = static_cast<int>(ladder.param(category, severity, "crf"));
    const std::string bin = codecdetail::encoder_binary();

    namespace fs = std::filesystem;
    const fs::path base = fs::path(workdir);
    const fs::path in_dir = base / "codec_in";
    const fs::path out_dir = base / "codec_out";
    fs::create_directories(in_dir);
    fs::remove_all(out_dir);
    fs::create_directories(out_dir);
    write_frame_dir(seq, in_dir.string());

    const fs::path video = base / (codec == VideoCodec::H264 ? "clip_h264.mp4" : "clip_h265.mp4");
    const std::string stderr_path = (base / "codec_stderr.log").string();
    const char* encoder_name = codec == VideoCodec::H264 ? "libx264" : "libx265";
    const char* preset = codec == VideoCodec::H264 ? "fast" : "veryslow";

    {
        std::ostringstream cmd;
        cmd << bin << " -y -loglevel error -framerate " << seq.fps << " -i '"
            << (in_dir / "frame_%06d.png").string() << "' -c:v " << encoder_name << " -preset "
            << preset << " -crf " << crf << " -pix_fmt yuv420p '" << video.string() << "'";
        codecdetail::run_or_throw(cmd.str(), stderr_path);
    }
    {
        std::ostringstream cmd;
        cmd << bin << " -y -loglevel error -i '" << video.string() << "' '"
            << (out_dir / "frame_%06d.png").string() << "'";
        codecdetail::run_or_throw(cmd.str(), stderr_path);
    }

    FrameSequence decoded = read_frame_dir(out_dir.string(), seq.fps);
    if (decoded.frames.size() != seq.frames.size()) {
        throw Error(ErrorCode::EncodeFailed,
                    "frame count changed: " + std::to_string(seq.frames.size()) + " -> " +
                        std::to_string(decoded.frames.size()));
    }
    return decoded;
}

/// JPEG2000 degradation through the external encoder (wavelet codecs are not
/// built in). The ladder's qscale drives the encoder quality knob.
inline ImageBuffer jpeg2000_roundtrip_external(const ImageBuffer& img, int severity,
                                               const std::string& workdir,
                                               const SeverityLadder& ladder) {
    DistortionSpec spec{DistortionCategory::Jpeg2000Compression, severity, 0};
    spec.validate();
    const int qscale =
        static_cast<int>(ladder.param(DistortionCategory::Jpeg2000Compression, severity, "qscale"));
    const std::string bin = codecdetail::encoder_binary();

    namespace fs = std::filesystem;
    fs::create_directories(workdir);
    const fs::path base = fs::path(workdir);
    const std::string stderr_path = (base / "jp2_stderr.log").string();
    const fs::path in_png = base / "jp2_in.png";
    const fs::path coded = base / "coded.jp2";
    const fs::path out_png = base / "jp2_out.png";
    write_image(img, in_png.string());
    {
        std::ostringstream cmd;
        cmd << bin << " -y -loglevel error -i '" << in_png.string()
            << "' -c:v jpeg2000 -q:v " << qscale << " '" << coded.string() << "'";
        codecdetail::run_or_throw(cmd.str(), stderr_path);
    }
    {
        std::ostringstream cmd;
        cmd << bin << " -y -loglevel error -i '" << coded.string() << "' '" << out_png.string()
            << "'";
        codecdetail::run_or_throw(cmd.str(), stderr_path);
    }
    ImageBuffer out = read_image(out_png.string());
    if (!out.same_size(img)) {
        throw Error(ErrorCode::EncodeFailed, "jpeg2000 round trip changed dimensions");
    }
    return out;
}

}  // namespace vqkit
