#include "sagasr/io/sgt1.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>

namespace sagasr::io {
namespace {

constexpr char kMagic[4] = {'S', 'G', 'T', '1'};
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 40;

void put_bytes_le(std::ostream& out, std::uint64_t v, int n) {
  char buf[8];
  for (int i = 0; i < n; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(buf, n);
}

std::uint64_t get_bytes_le(std::istream& in, int n) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), n);
  if (in.gcount() != n) throw std::runtime_error("sgt1: truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

std::size_t element_size(DType d) { return d == DType::kFloat32 ? 4 : 8; }

struct Header {
  DType dtype;
  std::vector<std::uint64_t> dims;
  std::uint64_t count;
};

Header read_header(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (in.gcount() != 4) throw std::runtime_error("sgt1: truncated");
  if (std::memcmp(magic, kMagic, 4) != 0) throw std::runtime_error("sgt1: bad magic");
  Header h;
  const auto code = static_cast<std::uint8_t>(get_bytes_le(in, 1));
  if (code != 1 && code != 2) {
    throw std::runtime_error("sgt1: unsupported dtype code " + std::to_string(code));
  }
  h.dtype = static_cast<DType>(code);
  const auto ndim = static_cast<std::uint8_t>(get_bytes_le(in, 1));
  h.count = 1;
  for (int i = 0; i < ndim; ++i) {
    const std::uint64_t d = get_bytes_le(in, 8);
    if (d != 0 && h.count > kMaxElements / d) throw std::runtime_error("sgt1: dim overflow");
    h.count *= d;
    h.dims.push_back(d);
  }
  return h;
}

void read_payload(std::istream& in, const Header& h, Tensor& t) {
  t.values.resize(h.count);
  for (std::uint64_t i = 0; i < h.count; ++i) {
    if (h.dtype == DType::kFloat32) {
      t.values[i] = std::bit_cast<float>(static_cast<std::uint32_t>(get_bytes_le(in, 4)));
    } else {
      t.values[i] = std::bit_cast<double>(get_bytes_le(in, 8));
    }
  }
}

}  // namespace

std::uint64_t Tensor::count() const {
  std::uint64_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

void put_u32(std::ostream& out, std::uint32_t v) { put_bytes_le(out, v, 4); }
void put_u64(std::ostream& out, std::uint64_t v) { put_bytes_le(out, v, 8); }
std::uint32_t get_u32(std::istream& in) { return static_cast<std::uint32_t>(get_bytes_le(in, 4)); }
std::uint64_t get_u64(std::istream& in) { return get_bytes_le(in, 8); }

void write_sgt1(std::ostream& out, std::span<const std::uint64_t> dims,
                std::span<const double> data, DType dtype) {
  if (dims.size() > std::numeric_limits<std::uint8_t>::max()) {
    throw std::invalid_argument("sgt1: too many dimensions");
  }
  std::uint64_t count = 1;
  for (auto d : dims) {
    if (d != 0 && count > kMaxElements / d) throw std::invalid_argument("sgt1: dim overflow");
    count *= d;
  }
  if (count != data.size()) throw std::invalid_argument("sgt1: payload size mismatch");
  for (double v : data) {
    if (!std::isfinite(v)) throw std::invalid_argument("sgt1: non-finite value");
  }
  out.write(kMagic, 4);
  put_bytes_le(out, static_cast<std::uint8_t>(dtype), 1);
  put_bytes_le(out, dims.size(), 1);
  for (auto d : dims) put_u64(out, d);
  for (double v : data) {
    if (dtype == DType::kFloat32) {
      put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    } else {
      put_u64(out, std::bit_cast<std::uint64_t>(v));
    }
  }
  if (!out) throw std::runtime_error("sgt1: write failed");
}

Tensor read_sgt1(std::istream& in) {
  const Header h = read_header(in);
  Tensor t;
  t.dims = h.dims;
  t.dtype = h.dtype;
  read_payload(in, h, t);
  return t;
}

void sgt1_write(const std::filesystem::path& path, std::span<const std::uint64_t> dims,
                std::span<const double> data, DType dtype) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("sgt1: cannot open " + path.string() + " for writing");
  write_sgt1(out, dims, data, dtype);
}

Tensor sgt1_read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("sgt1: cannot open " + path.string());
  const auto file_size = std::filesystem::file_size(path);
  const Header h = read_header(in);
  const std::uint64_t header_size = 4 + 1 + 1 + 8 * h.dims.size();
  const std::uint64_t payload = file_size - header_size;
  if (payload != h.count * element_size(h.dtype)) {
    throw std::runtime_error("sgt1: payload size mismatch");
  }
  Tensor t;
  t.dims = h.dims;
  t.dtype = h.dtype;
  read_payload(in, h, t);
  return t;
}

}  // namespace sagasr::io
