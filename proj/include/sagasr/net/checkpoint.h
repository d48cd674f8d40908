#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "sagasr/net/model.h"
#include "sagasr/net/optim.h"

// Checkpoint layout (all integers little-endian):
//   "SGCK" | version u32 | entry count u32 |
//   entries sorted by name: name length u32 | UTF-8 name | SGT1 float64 tensor
// Entry names: "meta.model", "meta.extra.<key>", "param.<name>",
// "adam.config", "adam.step", "adam.m.<name>", "adam.v.<name>".
namespace sagasr::net {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::unique_ptr<MiniDit> model;
  std::optional<OptimState> optim;
  std::map<std::string, double> extra;  // e.g. training frame count
};

void save_checkpoint(const std::filesystem::path& path, const MiniDit& model,
                     const OptimState* optim,
                     const std::map<std::string, double>& extra = {});

// Throws on a missing, truncated, or foreign file; nothing is returned
// unless the whole file parsed.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace sagasr::net
