#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

// SGT1 tensor files:
//   "SGT1" | dtype u8 | ndim u8 | ndim x u64 dims (LE) | row-major LE payload
// dtype 1 is float32. dtype 2 (float64) is used inside checkpoints, where
// parameters must round-trip bit-exactly.
namespace sagasr::io {

enum class DType : std::uint8_t { kFloat32 = 1, kFloat64 = 2 };

struct Tensor {
  std::vector<std::uint64_t> dims;
  std::vector<double> values;
  DType dtype = DType::kFloat32;

  std::uint64_t count() const;
};

void write_sgt1(std::ostream& out, std::span<const std::uint64_t> dims,
                std::span<const double> data, DType dtype = DType::kFloat32);
// Reads one tensor from the current stream position.
Tensor read_sgt1(std::istream& in);

void sgt1_write(const std::filesystem::path& path, std::span<const std::uint64_t> dims,
                std::span<const double> data, DType dtype = DType::kFloat32);
// Whole-file read: trailing or missing payload bytes are reported as
// "payload size mismatch".
Tensor sgt1_read(const std::filesystem::path& path);

// Little-endian primitives shared with the checkpoint format.
void put_u32(std::ostream& out, std::uint32_t v);
void put_u64(std::ostream& out, std::uint64_t v);
std::uint32_t get_u32(std::istream& in);
std::uint64_t get_u64(std::istream& in);

}  // namespace sagasr::io
