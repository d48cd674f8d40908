#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "sagasr/audio.h"
#include "sagasr/degrade/degrade.h"
#include "sagasr/dsp/mel.h"
#include "sagasr/embed/embed.h"
#include "sagasr/matrix.h"

// Mel-frame super-resolution toy task.
//
// A latent z is a 64-band HTK-mel log power frame sequence,
//   z = (log10(P_mel + 1e-8) + 8) / 4,
// with STFT power normalized by (nfft/2)^2 so a full-scale sine sits near 1
// and silence maps to exactly 0.
namespace sagasr::net {

inline constexpr std::size_t kToyBands = 64;
inline constexpr std::size_t kToyFrames = 16;
inline constexpr std::size_t kToySamples = (kToyFrames - 1) * 512;
inline constexpr std::size_t kToyClasses = 3;
inline constexpr std::size_t kToyCondRows = 4;

class MelCodec {
 public:
  explicit MelCodec(std::size_t bands = kToyBands, int sample_rate = 44100);

  const dsp::MelFilterbank& filterbank() const { return fb_; }
  std::size_t bands() const { return fb_.bands(); }
  int sample_rate() const { return fb_.sample_rate(); }

  // [bands x frames], mono mix of the input.
  Matrix encode(const AudioBuffer& audio) const;

  // First band whose center lies at or above hz.
  std::size_t cutoff_band(double hz) const { return fb_.first_band_at_or_above(hz); }
  // Copy of z with every band at or above the cutoff band set to 0.
  Matrix mask(const Matrix& z, double cutoff_hz) const;

  // Pseudo-inverse mel projection to linear power, then an inverse STFT with
  // the phase of `phase_ref` below cutoff_hz and zero phase above. The result
  // has the length and rate of `phase_ref`, mono.
  AudioBuffer decode(const Matrix& z, const AudioBuffer& phase_ref, double cutoff_hz) const;

 private:
  dsp::MelFilterbank fb_;
};

// Frame-mean of the per-frame RMS log10-power difference, in the units of
// the log-spectral distance (one z unit is 4 decades of power).
double mel_lsd(const Matrix& ref, const Matrix& est);

// Bands below `band` from z_l, the rest from generated.
Matrix mel_lf_replace(const Matrix& generated, const Matrix& z_l, std::size_t band);

struct ToyConfig {
  std::size_t d_cond = 32;
  bool keep_audio = false;
  degrade::DegradeConfig degradation;
};

struct ToyItem {
  Matrix z_h;  // [64 x 16]
  Matrix z_l;  // mel of the degraded audio, zero from the cutoff band up
  double cutoff_hz = 0.0;
  double bandwidth_hz = 0.0;  // brickwall edge of the clean signal
  double f_l_hz = 0.0;
  double f_h_hz = 0.0;
  double f_l = 0.0;  // normalized
  double f_h = 0.0;
  std::size_t label = 0;
  AudioBuffer x_h;  // only with keep_audio
  AudioBuffer x_l;
};

struct ToyDataset {
  std::vector<ToyItem> items;
  std::size_t d_cond = 32;

  std::size_t size() const { return items.size(); }
  // Roll-offs and class condition of an item, nothing nulled.
  embed::CondBundle cond_for(const ToyItem& item) const;
};

// Deterministic per-class condition sequence [kToyCondRows x d_cond].
Matrix class_condition(std::size_t label, std::size_t d_cond);

// One clean clip of kToySamples at 44.1 kHz: class 0 all harmonics, class 1
// odd harmonics, class 2 tilted noise; nothing at or above bandwidth_hz.
AudioBuffer synth_toy_audio(std::mt19937_64& rng, std::size_t label, double bandwidth_hz);

ToyItem make_toy_item(std::mt19937_64& rng, const MelCodec& codec, const ToyConfig& cfg);
ToyDataset make_toy_dataset(std::size_t n_items, std::mt19937_64& rng,
                            const ToyConfig& cfg = {});

}  // namespace sagasr::net
