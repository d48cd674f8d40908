#pragma once

#include <filesystem>

#include "sagasr/audio.h"

namespace sagasr::io {

// Reads PCM 16/24-bit and IEEE float32 RIFF/WAVE files (plain or
// WAVE_FORMAT_EXTENSIBLE). Samples are scaled to [-1, 1).
AudioBuffer read_wav(const std::filesystem::path& path);

// Writes IEEE float32 little-endian.
void write_wav(const std::filesystem::path& path, const AudioBuffer& audio);

// PCM 16-bit writer, used to exercise the integer read path.
void write_wav_pcm16(const std::filesystem::path& path, const AudioBuffer& audio);

}  // namespace sagasr::io
