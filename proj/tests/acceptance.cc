// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <memory>
#include <numbers>
#include <random>
#include <string>

#include "grad_suite.h"
#include "sagasr/dsp/fft.h"
#include "sagasr/dsp/iir.h"
#include "sagasr/dsp/lf_replace.h"
#include "sagasr/dsp/rolloff.h"
#include "sagasr/dsp/stft.h"
#include "sagasr/flow/flow.h"
#include "sagasr/metrics/metrics.h"
#include "sagasr/net/optim.h"
#include "sagasr/net/toy_data.h"
#include "sagasr/net/train.h"
#include "sagasr/pipeline/super_resolve.h"

using namespace sagasr;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(const std::string& name, const std::function<Outcome()>& check) {
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(r, c);
  for (double& v : m.values()) v = g(rng);
  return m;
}

AudioBuffer noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> x(n);
  for (double& v : x) v = u(rng);
  return AudioBuffer::mono(std::move(x), 44100);
}

Outcome interpolation_consistency() {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> ut(0.001, 0.999);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const flow::LatentSeq z0{random_matrix(4, 6, rng)}, z1{random_matrix(4, 6, rng)};
    const double t = ut(rng), h = 1e-4;
    const auto up = flow::interpolate(z0, z1, t + h), down = flow::interpolate(z0, z1, t - h);
    const auto v = flow::target_velocity(z0, z1);
    for (std::size_t i = 0; i < v.data.size(); ++i) {
      worst = std::max(worst, std::abs((up.data[i] - down.data[i]) / (2 * h) - v.data[i]));
    }
  }
  return {worst < 1e-8, fmt("max |fd - v| = %.3g over 1000 draws", worst)};
}

Outcome guidance_reductions() {
  std::mt19937_64 rng(2);
  bool ok = true;
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix u0 = random_matrix(5, 7, rng), ua = random_matrix(5, 7, rng),
                 uf = random_matrix(5, 7, rng);
    ok = ok && flow::cfg_combine(u0, ua, uf, {1.0, 1.0}) == uf;
    ok = ok && flow::cfg_combine(u0, ua, uf, {1.0, 0.0}) == ua;
  }
  const double hand =
      flow::cfg_combine(Matrix(1, 1, 0.0), Matrix(1, 1, 1.0), Matrix(1, 1, 2.0), {1.4, 1.2})[0];
  ok = ok && std::abs(hand - 2.6) < 1e-12;
  return {ok, fmt("exact reductions over 100 draws; (0,1,2) at (1.4,1.2) -> %.17g", hand)};
}

Outcome euler_exactness() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const flow::TSchedule def = flow::linear_quadratic_schedule();
  bool ok = def.steps() == 100 && def[0] == 0.0 && def[100] == 1.0 &&
            std::abs(def[1] - 0.001) < 1e-15;
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> knots;
    if (trial == 0) {
      knots = def.knots();
    } else {
      const std::size_t n = 2 + trial * 3;
      std::vector<double> inner(n - 1);
      for (double& v : inner) v = u(rng);
      std::sort(inner.begin(), inner.end());
      knots.push_back(0.0);
      knots.insert(knots.end(), inner.begin(), inner.end());
      knots.push_back(1.0);
    }
    const Matrix a = random_matrix(3, 4, rng);
    const Matrix z = flow::euler_sample(
        [&](const Matrix& zz, double t) {
          Matrix v(zz.rows(), zz.cols());
          for (std::size_t i = 0; i < v.size(); ++i) v[i] = (a[i] - zz[i]) / (1.0 - t);
          return v;
        },
        random_matrix(3, 4, rng), flow::TSchedule(knots));
    for (std::size_t i = 0; i < z.size(); ++i) worst = std::max(worst, std::abs(z[i] - a[i]));
  }
  ok = ok && worst < 1e-9;
  return {ok, fmt("max |z_1 - a| = %.3g over 50 schedules incl. default", worst)};
}

Outcome gradient_suite() {
  const auto t0 = Clock::now();
  net::ModelConfig cfg = test_support::small_model_config();
  cfg.channels = net::kToyBands;
  double worst = 0.0;
  std::size_t checked = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto r = test_support::check_model_gradients(cfg, 1000 + seed);
    worst = std::max(worst, r.max_rel);
    checked += r.checked;
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-3 && secs < 60.0 && checked > 0,
          fmt("max relative error %.3g", worst) + " over " + std::to_string(checked) +
              " coordinates, 20 parameter points, " + fmt("%.1f s", secs)};
}

struct ToyRun {
  double lsd_cond = 0.0, lsd_plain = 0.0, baseline = 0.0, secs = 0.0;
  std::unique_ptr<net::MiniDit> conditioned;
  net::ToyDataset test;
};

ToyRun run_toy() {
  const auto t0 = Clock::now();
  ToyRun out;
  std::mt19937_64 data_rng(1), test_rng(2);
  const auto train_set = net::make_toy_dataset(512, data_rng);
  net::ToyConfig test_cfg;
  test_cfg.keep_audio = true;
  out.test = net::make_toy_dataset(32, test_rng, test_cfg);
  for (bool cond : {true, false}) {
    net::ModelConfig mc;
    mc.rolloff_conditioning = cond;
    auto model = std::make_unique<net::MiniDit>(mc, 3);
    net::TrainConfig tc;
    tc.steps = 2000;
    tc.seed = 4;
    net::train(*model, train_set, tc);
    const auto ev = pipeline::evaluate_toy(*model, out.test, {1.4, 1.2}, 100, 5);
    out.baseline = ev.baseline_lsd;
    if (cond) {
      out.lsd_cond = ev.model_lsd;
      out.conditioned = std::move(model);
    } else {
      out.lsd_plain = ev.model_lsd;
    }
  }
  out.secs = seconds_since(t0);
  return out;
}

Outcome toy_end_to_end(const ToyRun& r) {
  const bool ok = r.lsd_cond < r.baseline && r.lsd_cond < r.lsd_plain && r.secs < 1800.0;
  return {ok, fmt("mel-LSD conditioned %.4f, ", r.lsd_cond) +
                  fmt("without roll-off %.4f, ", r.lsd_plain) +
                  fmt("zero-high-band baseline %.4f, ", r.baseline) + fmt("%.0f s", r.secs)};
}

Outcome controllability(const ToyRun& r) {
  const double targets[4] = {0.3, 0.5, 0.7, 0.95};
  const double lowest_hz = dsp::denormalize_rolloff(targets[0], 44100);
  std::size_t eligible = 0, monotone = 0;
  std::string rows;
  for (const auto& item : r.test.items) {
    if (dsp::spectral_rolloff(item.x_l) >= lowest_hz) continue;
    ++eligible;
    double prev = -1.0;
    bool inc = true;
    rows += " [";
    for (double target : targets) {
      pipeline::SampleConfig sc;
      sc.target_rolloff = target;
      sc.seed = 7;
      sc.class_label = item.label;
      const double hz = dsp::spectral_rolloff(pipeline::super_resolve(*r.conditioned, item.x_l, sc).audio);
      inc = inc && hz > prev;
      prev = hz;
      rows += fmt("%.0f", hz) + (target < 0.9 ? " " : "");
    }
    rows += "]";
    monotone += inc ? 1 : 0;
  }
  return {eligible > 0 && monotone == eligible,
          std::to_string(monotone) + "/" + std::to_string(eligible) +
              " inputs (roll-off below the lowest target) strictly increasing; output Hz:" + rows};
}

Outcome dsp_suite() {
  std::string detail;
  bool ok = true;
  double worst_db = 0.0;
  for (int order = 2; order <= 10; ++order) {
    for (double fc : {2000.0, 4000.0, 8000.0, 16000.0}) {
      const auto sos = dsp::design_lowpass({dsp::FilterFamily::kButterworth, order, fc}, 44100);
      const double g = 20.0 * std::log10(std::abs(sos.response(fc, 44100)));
      worst_db = std::max(worst_db, std::abs(g + 3.0103));
    }
  }
  ok = ok && worst_db < 0.1;
  detail += fmt("butterworth |gain+3.01 dB| <= %.3g; ", worst_db);

  double max_radius = 0.0;
  int designed = 0;
  for (dsp::FilterFamily fam : dsp::kAllFamilies) {
    for (int order = 2; order <= 10; ++order) {
      for (double fc : {2000.0, 4000.0, 8000.0, 16000.0}) {
        max_radius = std::max(max_radius, dsp::design_lowpass({fam, order, fc}, 44100).max_pole_radius());
        ++designed;
      }
    }
  }
  ok = ok && designed == 144 && max_radius < 1.0 - 1e-9;
  detail += std::to_string(designed) + fmt(" cascades, max pole radius %.9f; ", max_radius);

  double stft_err = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto x = noise(6000 + 37 * seed, seed);
    const auto y = dsp::istft(dsp::stft(x), x.num_samples());
    for (std::size_t i = 2048; i + 2048 < x.num_samples(); ++i) {
      stft_err = std::max(stft_err, std::abs(y.channel(0)[i] - x.channel(0)[i]));
    }
  }
  ok = ok && stft_err < 1e-6;
  detail += fmt("istft(stft) max err %.3g; ", stft_err);

  dsp::Spectrogram flat(3, 2048, 512, 44100);
  for (auto& v : flat.data()) v = {1.0, 0.0};
  const double roll = dsp::spectral_rolloff(flat);
  ok = ok && std::abs(roll - 21725.7) <= 44100.0 / 2048.0;
  detail += fmt("flat roll-off %.4f Hz; ", roll);

  const auto in = dsp::apply_filter(noise(16384, 12),
                                    dsp::design_lowpass({dsp::FilterFamily::kElliptic, 8, 3500.0}, 44100));
  const auto gen = noise(16384, 13);
  const auto out = dsp::low_frequency_replacement(gen, in, 4000.0);
  auto split = [](const AudioBuffer& a) {
    const auto spec = dsp::rfft(a.channel(0));
    double lo = 0.0, hi = 0.0;
    for (std::size_t k = 0; k < spec.size(); ++k) {
      const double f = static_cast<double>(k) * 44100.0 / static_cast<double>(a.num_samples());
      (f < 4000.0 ? lo : hi) += std::norm(spec[k]);
    }
    return std::pair{lo, hi};
  };
  const auto [in_lo, in_hi] = split(in);
  const auto [gen_lo, gen_hi] = split(gen);
  const auto [out_lo, out_hi] = split(out);
  (void)in_hi;
  (void)gen_lo;
  const double d_lo = std::abs(10.0 * std::log10(out_lo / in_lo));
  const double d_hi = std::abs(10.0 * std::log10(out_hi / gen_hi));
  ok = ok && d_lo < 0.1 && d_hi < 0.1;
  detail += fmt("LF split error %.3g / %.3g dB", d_lo, d_hi);
  return {ok, detail};
}

Outcome metric_suite() {
  bool ok = true;
  const auto x = noise(44100, 20);
  AudioBuffer x10 = x;
  for (double& v : x10.channel(0)) v *= 10.0;
  const double ident = metrics::lsd(x, x), scaled = metrics::lsd(x, x10);
  ok = ok && ident == 0.0 && std::abs(scaled - 2.0) < 1e-9;
  std::string detail = fmt("LSD identity %.3g, x10 scaling %.15f; ", ident, scaled);

  auto diag = [](std::vector<double> mean, const std::vector<double>& var) {
    metrics::GaussianStats s{std::move(mean), Matrix(var.size(), var.size())};
    for (std::size_t i = 0; i < var.size(); ++i) s.cov(i, i) = var[i];
    return s;
  };
  const double one_d = metrics::frechet_distance(diag({0.0}, {1.0}), diag({1.0}, {1.0}));
  ok = ok && std::abs(one_d - 1.0) < 1e-8;
  detail += fmt("FD 1-D %.15f; ", one_d);

  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> uv(0.01, 4.0), um(-2.0, 2.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 1 + trial % 8;
    std::vector<double> ma(d), mb(d), va(d), vb(d);
    double expect = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      ma[i] = um(rng);
      mb[i] = um(rng);
      va[i] = uv(rng);
      vb[i] = uv(rng);
      const double ds = std::sqrt(va[i]) - std::sqrt(vb[i]);
      expect += (ma[i] - mb[i]) * (ma[i] - mb[i]) + ds * ds;
    }
    worst = std::max(worst, std::abs(metrics::frechet_distance(diag(ma, va), diag(mb, vb)) - expect));
  }
  ok = ok && worst < 1e-8;
  detail += fmt("FD diagonal max err %.3g over 100 cases", worst);
  return {ok, detail};
}

Outcome scheduler() {
  const double lr0 = net::inverse_lr(0);
  bool ok = std::abs(lr0 - 0.01) < 1e-15;
  const flow::TSchedule s = flow::linear_quadratic_schedule();
  ok = ok && s[0] == 0.0 && s[s.steps()] == 1.0;
  for (std::size_t i = 0; i < s.steps(); ++i) ok = ok && s[i + 1] > s[i];
  return {ok, fmt("inverse_lr(0) = %.17g; default knots [0, 1], strictly increasing", lr0)};
}

}  // namespace

int main() {
  report("interpolation/velocity consistency", interpolation_consistency);
  report("guidance reductions", guidance_reductions);
  report("euler exactness", euler_exactness);
  report("gradient suite", gradient_suite);
  ToyRun toy;
  std::string toy_error;
  try {
    toy = run_toy();
  } catch (const std::exception& e) {
    toy_error = e.what();
  }
  auto guarded = [&](Outcome (*fn)(const ToyRun&)) {
    return [&, fn] {
      if (!toy_error.empty()) return Outcome{false, "toy run failed: " + toy_error};
      return fn(toy);
    };
  };
  report("toy end-to-end", guarded(toy_end_to_end));
  report("roll-off controllability", guarded(controllability));
  report("dsp suite", dsp_suite);
  report("metric suite", metric_suite);
  report("scheduler", scheduler);
  std::printf("%d failure(s)\n", failures);
  return failures == 0 ? 0 : 1;
}
