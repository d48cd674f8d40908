#include "sagasr/degrade/degrade.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sagasr/dsp/resample.h"

namespace sagasr::degrade {

std::string mode_name(ResampleMode m) {
  return m == ResampleMode::kFilterOnly ? "filter" : "filter+resample";
}

ResampleMode parse_mode(const std::string& name) {
  if (name == "filter") return ResampleMode::kFilterOnly;
  if (name == "filter+resample") return ResampleMode::kFilterAndResample;
  throw std::invalid_argument("unknown degradation mode: " + name);
}

void DegradeConfig::validate() const {
  if (!(cutoff_min_hz > 0.0 && cutoff_min_hz < cutoff_max_hz)) {
    throw std::invalid_argument("degrade: need 0 < cutoff_min < cutoff_max");
  }
  if (order_min < 2 || order_max > 10 || order_min > order_max) {
    throw std::invalid_argument("degrade: order range must lie within [2, 10]");
  }
  if (families.empty()) {
    throw std::invalid_argument("degrade: no filter families enabled");
  }
}

Rng stream_for(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

dsp::FilterSpec sample_degradation(Rng& rng, const DegradeConfig& cfg) {
  cfg.validate();
  std::uniform_real_distribution<double> cutoff(cfg.cutoff_min_hz, cfg.cutoff_max_hz);
  std::uniform_int_distribution<std::size_t> family(0, cfg.families.size() - 1);
  std::uniform_int_distribution<int> order(cfg.order_min, cfg.order_max);
  dsp::FilterSpec spec;
  spec.cutoff_hz = cutoff(rng);
  spec.family = cfg.families[family(rng)];
  spec.order = order(rng);
  return spec;
}

AudioBuffer degrade(const AudioBuffer& audio, const dsp::FilterSpec& spec,
                    ResampleMode mode) {
  const auto sos = dsp::design_lowpass(spec, audio.sample_rate());
  AudioBuffer filtered = dsp::apply_filter(audio, sos);
  if (mode == ResampleMode::kFilterOnly) return filtered;

  const int low_rate = static_cast<int>(std::lround(2.0 * spec.cutoff_hz));
  const AudioBuffer low = dsp::resample(filtered, low_rate);
  const AudioBuffer back = dsp::resample(low, audio.sample_rate());
  AudioBuffer out(audio.channels(), audio.num_samples(), audio.sample_rate());
  const std::size_t n = std::min(back.num_samples(), audio.num_samples());
  for (std::size_t c = 0; c < audio.channels(); ++c) {
    std::copy_n(back.channel(c).begin(), n, out.channel(c).begin());
  }
  return out;
}

AudioBuffer segment(const AudioBuffer& audio, Rng& rng, double duration_s) {
  const auto len = static_cast<std::size_t>(
      std::llround(duration_s * audio.sample_rate()));
  if (audio.num_samples() < len) throw std::invalid_argument("segment: too short");
  std::uniform_int_distribution<std::size_t> start_dist(0, audio.num_samples() - len);
  const std::size_t start = start_dist(rng);
  AudioBuffer out(audio.channels(), len, audio.sample_rate());
  for (std::size_t c = 0; c < audio.channels(); ++c) {
    auto src = audio.channel(c);
    std::copy_n(src.begin() + static_cast<long>(start), len, out.channel(c).begin());
  }
  return out;
}

}  // namespace sagasr::degrade
