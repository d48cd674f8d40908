#include "sagasr/net/checkpoint.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "sagasr/io/sgt1.h"

namespace sagasr::net {
namespace {

constexpr char kMagic[4] = {'S', 'G', 'C', 'K'};
constexpr std::uint32_t kMaxNameLength = 4096;

using Entries = std::map<std::string, io::Tensor>;

io::Tensor tensor_of(const Matrix& m) {
  io::Tensor t;
  t.dims = {m.rows(), m.cols()};
  t.values = m.values();
  t.dtype = io::DType::kFloat64;
  return t;
}

io::Tensor tensor_of(std::vector<double> v) {
  io::Tensor t;
  t.dims = {v.size()};
  t.values = std::move(v);
  t.dtype = io::DType::kFloat64;
  return t;
}

Matrix matrix_of(const io::Tensor& t, const std::string& name) {
  if (t.dims.size() != 2) throw std::runtime_error("checkpoint: " + name + " is not 2-D");
  return Matrix(t.dims[0], t.dims[1], t.values);
}

const io::Tensor& require(const Entries& e, const std::string& name) {
  auto it = e.find(name);
  if (it == e.end()) throw std::runtime_error("checkpoint: missing entry " + name);
  return it->second;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const MiniDit& model,
                     const OptimState* optim, const std::map<std::string, double>& extra) {
  const ModelConfig& c = model.config();
  Entries entries;
  entries["meta.model"] = tensor_of(std::vector<double>{
      static_cast<double>(c.channels), static_cast<double>(c.d_model),
      static_cast<double>(c.n_blocks), static_cast<double>(c.n_heads),
      static_cast<double>(c.d_cond), static_cast<double>(c.fourier_m),
      static_cast<double>(c.mlp_ratio), c.rolloff_conditioning ? 1.0 : 0.0});
  for (const auto& [k, v] : extra) entries["meta.extra." + k] = tensor_of(std::vector<double>{v});
  for (const auto& [name, p] : model.params()) entries["param." + name] = tensor_of(p.value);
  if (optim != nullptr) {
    const AdamWConfig& a = optim->cfg;
    entries["adam.config"] =
        tensor_of(std::vector<double>{a.lr, a.beta1, a.beta2, a.eps, a.weight_decay});
    entries["adam.step"] = tensor_of(std::vector<double>{static_cast<double>(optim->step)});
    for (const auto& [name, m] : optim->m) entries["adam.m." + name] = tensor_of(m);
    for (const auto& [name, v] : optim->v) entries["adam.v." + name] = tensor_of(v);
  }

  std::ostringstream buf(std::ios::binary);
  buf.write(kMagic, 4);
  io::put_u32(buf, kCheckpointVersion);
  io::put_u32(buf, static_cast<std::uint32_t>(entries.size()));
  for (const auto& [name, t] : entries) {
    io::put_u32(buf, static_cast<std::uint32_t>(name.size()));
    buf.write(name.data(), static_cast<std::streamsize>(name.size()));
    io::write_sgt1(buf, t.dims, t.values, io::DType::kFloat64);
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("checkpoint: cannot open " + path.string() + " for writing");
  const std::string bytes = buf.str();
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("checkpoint: write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path.string());

  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() != 4) throw std::runtime_error("checkpoint: truncated");
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error("checkpoint: bad magic: expected 'SGCK', got '" +
                             std::string(magic, 4) + "'");
  }
  Entries entries;
  try {
    const std::uint32_t version = io::get_u32(in);
    if (version != kCheckpointVersion) {
      throw std::runtime_error("checkpoint: version mismatch: expected " +
                               std::to_string(kCheckpointVersion) + ", got " +
                               std::to_string(version));
    }
    const std::uint32_t count = io::get_u32(in);
    for (std::uint32_t i = 0; i < count; ++i) {
      const std::uint32_t len = io::get_u32(in);
      if (len > kMaxNameLength) throw std::runtime_error("checkpoint: corrupt entry name");
      std::string name(len, '\0');
      in.read(name.data(), len);
      if (in.gcount() != static_cast<std::streamsize>(len)) {
        throw std::runtime_error("checkpoint: truncated");
      }
      entries[name] = io::read_sgt1(in);
    }
    if (in.peek() != std::char_traits<char>::eof()) {
      throw std::runtime_error("checkpoint: trailing bytes");
    }
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    if (msg.rfind("sgt1: truncated", 0) == 0) throw std::runtime_error("checkpoint: truncated");
    throw;
  }

  const auto& meta = require(entries, "meta.model").values;
  if (meta.size() != 8) throw std::runtime_error("checkpoint: bad meta.model");
  ModelConfig cfg;
  cfg.channels = static_cast<std::size_t>(meta[0]);
  cfg.d_model = static_cast<std::size_t>(meta[1]);
  cfg.n_blocks = static_cast<std::size_t>(meta[2]);
  cfg.n_heads = static_cast<std::size_t>(meta[3]);
  cfg.d_cond = static_cast<std::size_t>(meta[4]);
  cfg.fourier_m = static_cast<std::size_t>(meta[5]);
  cfg.mlp_ratio = static_cast<std::size_t>(meta[6]);
  cfg.rolloff_conditioning = meta[7] != 0.0;

  Checkpoint ck;
  ck.model = std::make_unique<MiniDit>(cfg);
  for (auto& [name, p] : ck.model->params()) {
    Matrix m = matrix_of(require(entries, "param." + name), name);
    if (!m.same_shape(p.value)) {
      throw std::runtime_error("checkpoint: shape mismatch for " + name);
    }
    p.value = std::move(m);
  }
  for (const auto& [name, t] : entries) {
    if (name.rfind("meta.extra.", 0) == 0 && t.values.size() == 1) {
      ck.extra[name.substr(11)] = t.values[0];
    }
  }
  if (entries.count("adam.step") != 0) {
    OptimState st;
    const auto& a = require(entries, "adam.config").values;
    if (a.size() != 5) throw std::runtime_error("checkpoint: bad adam.config");
    st.cfg = {a[0], a[1], a[2], a[3], a[4]};
    st.step = static_cast<std::uint64_t>(require(entries, "adam.step").values.at(0));
    for (const auto& [name, p] : ck.model->params()) {
      auto mit = entries.find("adam.m." + name);
      auto vit = entries.find("adam.v." + name);
      if (mit != entries.end()) st.m[name] = matrix_of(mit->second, name);
      if (vit != entries.end()) st.v[name] = matrix_of(vit->second, name);
    }
    ck.optim = std::move(st);
  }
  return ck;
}

}  // namespace sagasr::net
