#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sagasr/audio.h"
#include "sagasr/matrix.h"

namespace sagasr::metrics {

inline constexpr double kLsdEpsilon = 1e-10;

// Log-spectral distance on STFT power (nfft 2048, hop 512, mono mix):
// frame mean of sqrt(bin mean of (log10(P_est + eps) - log10(P_ref + eps))^2).
double lsd(const AudioBuffer& ref, const AudioBuffer& est);
// Same formula on precomputed power arrays [frames x bins].
double lsd_power(const Matrix& ref_power, const Matrix& est_power);

struct GaussianStats {
  std::vector<double> mean;
  Matrix cov;  // [d x d], exactly symmetric
};

// Sample mean and unbiased covariance of the rows of `embeddings` [n x d].
GaussianStats fit_gaussian(const Matrix& embeddings);

// |mu_a - mu_b|^2 + tr(Ca) + tr(Cb) - 2 tr((Ca^1/2 Cb Ca^1/2)^1/2), clamped at 0.
double frechet_distance(const GaussianStats& a, const GaussianStats& b);

struct EvalPair {
  std::string id;
  std::filesystem::path ref;
  std::filesystem::path est;
};

struct EvalEntry {
  std::string id;
  double lsd = 0.0;
  std::string status;  // "ok", "missing", or "error: <reason>"
  bool ok() const { return status == "ok"; }
};

struct EvalReport {
  std::vector<EvalEntry> entries;  // sorted by id
  std::size_t scored = 0;
  double mean_lsd = 0.0;
  double std_lsd = 0.0;  // population standard deviation of scored files
  std::optional<double> fd;
  std::size_t failures() const { return entries.size() - scored; }
};

// Per-file LSD with per-file error isolation; optional FD from two SGT1
// embedding tensors [n x d].
EvalReport eval_corpus(std::vector<EvalPair> pairs,
                       const std::optional<std::filesystem::path>& emb_ref = std::nullopt,
                       const std::optional<std::filesystem::path>& emb_est = std::nullopt);

// TSV: header "id\tlsd\tstatus", one row per entry, then "# mean_lsd=",
// "# std_lsd=" and (when present) "# fd=" lines, 17 significant digits.
std::string format_report(const EvalReport& report);

}  // namespace sagasr::metrics
