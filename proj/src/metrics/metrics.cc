#include "sagasr/metrics/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "sagasr/dsp/stft.h"
#include "sagasr/io/sgt1.h"
#include "sagasr/io/wav.h"
#include "sagasr/linalg.h"
#include "sagasr/parallel.h"

namespace sagasr::metrics {
namespace {

Matrix power_of(const AudioBuffer& audio) {
  const dsp::Spectrogram spec = dsp::stft(audio);
  Matrix p(spec.frames(), spec.bins());
  for (std::size_t t = 0; t < spec.frames(); ++t) {
    for (std::size_t k = 0; k < spec.bins(); ++k) p(t, k) = std::norm(spec.at(t, k));
  }
  return p;
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Matrix read_embeddings(const std::filesystem::path& path) {
  const io::Tensor t = io::sgt1_read(path);
  if (t.dims.size() != 2) {
    throw std::runtime_error("eval: embedding file " + path.string() + " is not [n x d]");
  }
  return Matrix(t.dims[0], t.dims[1], t.values);
}

}  // namespace

double lsd_power(const Matrix& ref_power, const Matrix& est_power) {
  if (!ref_power.same_shape(est_power)) {
    throw std::invalid_argument("lsd: shape mismatch " + ref_power.shape_string() + " vs " +
                                est_power.shape_string());
  }
  if (ref_power.size() == 0) throw std::invalid_argument("lsd: empty input");
  double total = 0.0;
  for (std::size_t t = 0; t < ref_power.rows(); ++t) {
    double acc = 0.0;
    for (std::size_t k = 0; k < ref_power.cols(); ++k) {
      const double d = std::log10(est_power(t, k) + kLsdEpsilon) -
                       std::log10(ref_power(t, k) + kLsdEpsilon);
      acc += d * d;
    }
    total += std::sqrt(acc / static_cast<double>(ref_power.cols()));
  }
  return total / static_cast<double>(ref_power.rows());
}

double lsd(const AudioBuffer& ref, const AudioBuffer& est) {
  if (ref.num_samples() != est.num_samples()) {
    throw std::invalid_argument("lsd: length mismatch (" + std::to_string(ref.num_samples()) +
                                " vs " + std::to_string(est.num_samples()) + ")");
  }
  if (ref.sample_rate() != est.sample_rate()) {
    throw std::invalid_argument("lsd: sample rate mismatch");
  }
  return lsd_power(power_of(ref), power_of(est));
}

GaussianStats fit_gaussian(const Matrix& x) {
  const std::size_t n = x.rows(), d = x.cols();
  if (n < 2) throw std::invalid_argument("fit_gaussian: need at least 2 samples");
  GaussianStats g;
  g.mean.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) g.mean[j] += x(i, j);
  }
  for (double& m : g.mean) m /= static_cast<double>(n);
  g.cov = Matrix(d, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < d; ++a) {
      const double da = x(i, a) - g.mean[a];
      for (std::size_t b = a; b < d; ++b) g.cov(a, b) += da * (x(i, b) - g.mean[b]);
    }
  }
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = a; b < d; ++b) {
      g.cov(a, b) /= static_cast<double>(n - 1);
      g.cov(b, a) = g.cov(a, b);
    }
  }
  return g;
}

double frechet_distance(const GaussianStats& a, const GaussianStats& b) {
  const std::size_t d = a.mean.size();
  if (b.mean.size() != d || a.cov.rows() != d || a.cov.cols() != d || b.cov.rows() != d ||
      b.cov.cols() != d) {
    throw std::invalid_argument("frechet_distance: dimension mismatch");
  }
  double mean_term = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double diff = a.mean[i] - b.mean[i];
    mean_term += diff * diff;
  }
  const Matrix sa = linalg::sqrtm_psd(a.cov);
  Matrix m = matmul(matmul(sa, b.cov), sa);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      const double s = 0.5 * (m(i, j) + m(j, i));
      m(i, j) = m(j, i) = s;
    }
  }
  double cross = 0.0;
  for (double ev : linalg::eigh(m).values) cross += std::sqrt(std::max(ev, 0.0));
  const double fd = mean_term + linalg::trace(a.cov) + linalg::trace(b.cov) - 2.0 * cross;
  return std::max(fd, 0.0);
}

EvalReport eval_corpus(std::vector<EvalPair> pairs,
                       const std::optional<std::filesystem::path>& emb_ref,
                       const std::optional<std::filesystem::path>& emb_est) {
  std::sort(pairs.begin(), pairs.end(),
            [](const EvalPair& x, const EvalPair& y) { return x.id < y.id; });
  EvalReport report;
  report.entries.resize(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t i) {
    EvalEntry& e = report.entries[i];
    e.id = pairs[i].id;
    if (!std::filesystem::exists(pairs[i].est) || !std::filesystem::exists(pairs[i].ref)) {
      e.status = "missing";
      return;
    }
    try {
      e.lsd = lsd(io::read_wav(pairs[i].ref), io::read_wav(pairs[i].est));
      e.status = "ok";
    } catch (const std::exception& ex) {
      e.status = std::string("error: ") + ex.what();
    }
  });

  double sum = 0.0;
  for (const EvalEntry& e : report.entries) {
    if (e.ok()) {
      sum += e.lsd;
      ++report.scored;
    }
  }
  if (report.scored > 0) {
    report.mean_lsd = sum / static_cast<double>(report.scored);
    double var = 0.0;
    for (const EvalEntry& e : report.entries) {
      if (e.ok()) var += (e.lsd - report.mean_lsd) * (e.lsd - report.mean_lsd);
    }
    report.std_lsd = std::sqrt(var / static_cast<double>(report.scored));
  }
  if (emb_ref.has_value() != emb_est.has_value()) {
    throw std::invalid_argument("eval: embedding files must be given for both sides");
  }
  if (emb_ref) {
    report.fd = frechet_distance(fit_gaussian(read_embeddings(*emb_ref)),
                                 fit_gaussian(read_embeddings(*emb_est)));
  }
  return report;
}

std::string format_report(const EvalReport& report) {
  std::string out = "id\tlsd\tstatus\n";
  for (const EvalEntry& e : report.entries) {
    std::string status = e.status;
    std::replace(status.begin(), status.end(), '\t', ' ');
    std::replace(status.begin(), status.end(), '\n', ' ');
    out += e.id + "\t" + (e.ok() ? fmt17(e.lsd) : std::string("nan")) + "\t" + status + "\n";
  }
  out += "# mean_lsd=" + fmt17(report.mean_lsd) + "\n";
  out += "# std_lsd=" + fmt17(report.std_lsd) + "\n";
  if (report.fd) out += "# fd=" + fmt17(*report.fd) + "\n";
  return out;
}

}  // namespace sagasr::metrics
