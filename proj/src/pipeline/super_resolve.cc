#include "sagasr/pipeline/super_resolve.h"

#include <algorithm>
#include <random>
#include <stdexcept>

#include "sagasr/degrade/degrade.h"
#include "sagasr/dsp/lf_replace.h"
#include "sagasr/dsp/resample.h"
#include "sagasr/dsp/rolloff.h"
#include "sagasr/net/toy_data.h"

namespace sagasr::pipeline {

flow::TSchedule sampling_schedule(std::size_t steps) {
  if (steps < 4) throw std::invalid_argument("sample: need at least 4 steps");
  return flow::linear_quadratic_schedule(steps, steps / 4, 10 * steps);
}

SampleResult super_resolve(const net::MiniDit& model, const AudioBuffer& input,
                           const SampleConfig& cfg) {
  input.validate();
  if (input.empty()) throw std::invalid_argument("sample: empty input");
  if (!(cfg.target_rolloff > 0.0 && cfg.target_rolloff < 1.0)) {
    throw std::invalid_argument("sample: target roll-off must lie in (0, 1)");
  }
  const AudioBuffer x = input.sample_rate() == degrade::kTargetRate
                            ? input
                            : dsp::resample(input, degrade::kTargetRate);
  const AudioBuffer mono = x.to_mono();
  const net::MelCodec codec(model.config().channels, degrade::kTargetRate);

  SampleResult out;
  out.input_rolloff_hz = dsp::spectral_rolloff(mono);
  out.f_l = dsp::normalize_rolloff(out.input_rolloff_hz, degrade::kTargetRate);
  out.z_l = codec.mask(codec.encode(mono), out.input_rolloff_hz);

  embed::CondBundle cond;
  cond.f_l = out.f_l;
  cond.f_h = cfg.target_rolloff;
  if (cfg.class_label) {
    cond.cond_seq = net::class_condition(*cfg.class_label, model.config().d_cond);
  } else {
    cond.cond_seq = Matrix(0, model.config().d_cond);
    cond.text_null = true;
  }

  const flow::TSchedule sched = sampling_schedule(cfg.steps);
  std::mt19937_64 rng(cfg.seed);
  const std::size_t bands = out.z_l.rows(), frames = out.z_l.cols();
  out.z_gen = Matrix(bands, frames);
  for (std::size_t start = 0; start < frames; start += net::kToyFrames) {
    const std::size_t len = std::min(net::kToyFrames, frames - start);
    Matrix chunk(bands, net::kToyFrames);
    for (std::size_t b = 0; b < bands; ++b) {
      for (std::size_t t = 0; t < len; ++t) chunk(b, t) = out.z_l(b, start + t);
    }
    const Matrix gen = flow::guided_sample(model, chunk, cond, cfg.scales, sched, rng);
    for (std::size_t b = 0; b < bands; ++b) {
      for (std::size_t t = 0; t < len; ++t) out.z_gen(b, start + t) = gen(b, t);
    }
  }

  const AudioBuffer decoded = codec.decode(out.z_gen, mono, out.input_rolloff_hz);
  AudioBuffer generated(x.channels(), x.num_samples(), degrade::kTargetRate);
  for (std::size_t c = 0; c < x.channels(); ++c) {
    std::copy(decoded.channel(0).begin(), decoded.channel(0).end(),
              generated.channel(c).begin());
  }
  out.audio = dsp::low_frequency_replacement(generated, x, out.input_rolloff_hz);
  return out;
}

ToyEval evaluate_toy(const net::MiniDit& model, const net::ToyDataset& test,
                     const flow::GuidanceScales& scales, std::size_t steps, std::uint64_t seed) {
  if (test.items.empty()) throw std::invalid_argument("evaluate_toy: empty test set");
  const net::MelCodec codec(model.config().channels, degrade::kTargetRate);
  const flow::TSchedule sched = sampling_schedule(steps);
  std::mt19937_64 rng(seed);
  ToyEval ev;
  for (const net::ToyItem& item : test.items) {
    const Matrix gen =
        flow::guided_sample(model, item.z_l, test.cond_for(item), scales, sched, rng);
    const Matrix spliced = net::mel_lf_replace(gen, item.z_l, codec.cutoff_band(item.cutoff_hz));
    ev.per_item.push_back(net::mel_lsd(item.z_h, spliced));
    ev.model_lsd += ev.per_item.back();
    ev.baseline_lsd += net::mel_lsd(item.z_h, item.z_l);
  }
  const double n = static_cast<double>(test.items.size());
  ev.model_lsd /= n;
  ev.baseline_lsd /= n;
  return ev;
}

}  // namespace sagasr::pipeline
