#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <random>

#include "grad_suite.h"
#include "sagasr/net/checkpoint.h"
#include "sagasr/net/model.h"
#include "sagasr/net/optim.h"
#include "sagasr/net/toy_data.h"
#include "sagasr/net/train.h"

using namespace sagasr;
using namespace sagasr::net;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(r, c);
  for (double& v : m.values()) v = g(rng);
  return m;
}

void randomize(MiniDit& model, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 0.3);
  for (auto& [name, p] : model.params()) {
    for (double& v : p.value.values()) v = g(rng);
  }
}

embed::CondBundle some_cond(std::size_t d_cond, std::mt19937_64& rng) {
  embed::CondBundle c;
  c.cond_seq = random_matrix(3, d_cond, rng);
  c.f_l = 0.25;
  c.f_h = 0.75;
  return c;
}

std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("sagasr_test_net_" + name);
}

}  // namespace

TEST(MiniDit, OutputShapeMatchesInput) {
  const ModelConfig cfg = test_support::small_model_config();
  MiniDit model(cfg, 1);
  randomize(model, 2);
  std::mt19937_64 rng(3);
  for (std::size_t frames : {1u, 7u, 32u}) {
    const Matrix z = random_matrix(cfg.channels, frames, rng);
    const Matrix out = model.evaluate(z, z, some_cond(cfg.d_cond, rng), 0.5);
    EXPECT_EQ(out.rows(), cfg.channels);
    EXPECT_EQ(out.cols(), frames);
    for (double v : out.values()) EXPECT_TRUE(std::isfinite(v));
  }
  EXPECT_THROW(model.evaluate(Matrix(cfg.channels + 1, 4), Matrix(cfg.channels + 1, 4),
                              some_cond(cfg.d_cond, rng), 0.5),
               std::invalid_argument);
}

TEST(MiniDit, FreshModelPredictsZeroAndZeroParamsGiveZero) {
  const ModelConfig cfg = test_support::small_model_config();
  std::mt19937_64 rng(4);
  const Matrix z = random_matrix(cfg.channels, 5, rng);
  MiniDit fresh(cfg, 5);
  const Matrix u_fresh = fresh.evaluate(z, z, some_cond(cfg.d_cond, rng), 0.3);
  for (double v : u_fresh.values()) EXPECT_EQ(v, 0.0);

  MiniDit model(cfg, 6);
  for (auto& [name, p] : model.params()) p.value = Matrix(p.value.rows(), p.value.cols());
  const Matrix u_zero = model.evaluate(z, z, some_cond(cfg.d_cond, rng), 0.3);
  for (double v : u_zero.values()) EXPECT_EQ(v, 0.0);
}

TEST(MiniDit, CrossAttentionIsPermutationInvariant) {
  const ModelConfig cfg = test_support::small_model_config();
  MiniDit model(cfg, 7);
  randomize(model, 8);
  std::mt19937_64 rng(9);
  const Matrix z = random_matrix(cfg.channels, 6, rng);
  embed::CondBundle a = some_cond(cfg.d_cond, rng);
  embed::CondBundle b = a;
  for (std::size_t c = 0; c < cfg.d_cond; ++c) std::swap(b.cond_seq(0, c), b.cond_seq(2, c));
  const Matrix oa = model.evaluate(z, z, a, 0.4), ob = model.evaluate(z, z, b, 0.4);
  for (std::size_t i = 0; i < oa.size(); ++i) EXPECT_NEAR(oa[i], ob[i], 1e-12);
}

TEST(MiniDit, NullTextIgnoresPayload) {
  const ModelConfig cfg = test_support::small_model_config();
  MiniDit model(cfg, 10);
  randomize(model, 11);
  std::mt19937_64 rng(12);
  const Matrix z = random_matrix(cfg.channels, 4, rng);
  embed::CondBundle a = some_cond(cfg.d_cond, rng), b = some_cond(cfg.d_cond, rng);
  a.text_null = b.text_null = true;
  EXPECT_EQ(model.evaluate(z, z, a, 0.6), model.evaluate(z, z, b, 0.6));
  embed::CondBundle empty = a;
  empty.text_null = false;
  empty.cond_seq = Matrix(0, cfg.d_cond);
  EXPECT_EQ(model.evaluate(z, z, a, 0.6), model.evaluate(z, z, empty, 0.6));
}

TEST(MiniDit, AudioNullIgnoresLowResolutionInput) {
  const ModelConfig cfg = test_support::small_model_config();
  MiniDit model(cfg, 13);
  randomize(model, 14);
  std::mt19937_64 rng(15);
  const Matrix z = random_matrix(cfg.channels, 4, rng);
  embed::CondBundle c = some_cond(cfg.d_cond, rng);
  c.audio_null = true;
  EXPECT_EQ(model.evaluate(z, random_matrix(cfg.channels, 4, rng), c, 0.2),
            model.evaluate(z, random_matrix(cfg.channels, 4, rng), c, 0.2));
}

TEST(MiniDit, GradientsMatchFiniteDifferences) {
  const ModelConfig cfg = test_support::small_model_config();
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto r = test_support::check_model_gradients(cfg, 100 + seed);
    EXPECT_GT(r.checked, 100u);
    EXPECT_LT(r.max_rel, 1e-3) << "seed " << seed;
  }
}

TEST(MiniDit, UnusedNullTextGetsZeroGradient) {
  const ModelConfig cfg = test_support::small_model_config();
  MiniDit model(cfg, 16);
  randomize(model, 17);
  std::mt19937_64 rng(18);
  flow::FmDraw draw;
  draw.t = 0.5;
  draw.z0 = random_matrix(cfg.channels, 4, rng);
  const Matrix z1 = random_matrix(cfg.channels, 4, rng);
  model.params().zero_grad();
  flow::fm_loss(model, z1, z1, some_cond(cfg.d_cond, rng), draw);
  for (double g : model.params().at("null.text").grad.values()) EXPECT_EQ(g, 0.0);
  for (double g : model.params().at("null.audio").grad.values()) EXPECT_EQ(g, 0.0);
}

TEST(MiniDit, GradientScalesWithLossWeight) {
  const ModelConfig cfg = test_support::small_model_config();
  MiniDit model(cfg, 19);
  randomize(model, 20);
  std::mt19937_64 rng(21);
  flow::FmDraw draw;
  draw.t = 0.3;
  draw.z0 = random_matrix(cfg.channels, 4, rng);
  const Matrix z1 = random_matrix(cfg.channels, 4, rng);
  const auto cond = some_cond(cfg.d_cond, rng);
  model.params().zero_grad();
  flow::fm_loss(model, z1, z1, cond, draw, 1.0);
  std::map<std::string, Matrix> single;
  for (auto& [name, p] : model.params()) single[name] = p.grad;
  model.params().zero_grad();
  flow::fm_loss(model, z1, z1, cond, draw, 2.0);
  for (auto& [name, p] : model.params()) {
    for (std::size_t i = 0; i < p.grad.size(); ++i) {
      EXPECT_NEAR(p.grad[i], 2.0 * single[name][i], 1e-12 * (1.0 + std::abs(p.grad[i])));
    }
  }
}

TEST(MiniDit, NoRolloffVariantHasNoRolloffParameters) {
  ModelConfig cfg = test_support::small_model_config();
  cfg.rolloff_conditioning = false;
  MiniDit model(cfg, 22);
  EXPECT_FALSE(model.params().contains("fourier.freqs"));
  EXPECT_FALSE(model.params().contains("global.w"));
  randomize(model, 23);
  std::mt19937_64 rng(24);
  const Matrix z = random_matrix(cfg.channels, 4, rng);
  embed::CondBundle a = some_cond(cfg.d_cond, rng), b = a;
  b.f_l = 0.01;
  b.f_h = 0.99;
  EXPECT_EQ(model.evaluate(z, z, a, 0.5), model.evaluate(z, z, b, 0.5));
}

TEST(AdamW, FirstStepMovesByLearningRate) {
  ag::ParameterSet ps;
  ps.add("w", Matrix(1, 3));
  ps.at("w").grad = Matrix(1, 3, std::vector<double>{1.0, -2.0, 0.5});
  OptimState st;
  st.cfg.lr = 1e-3;
  adamw_step(ps, st, 1.0);
  EXPECT_EQ(st.step, 1u);
  EXPECT_NEAR(ps.at("w").value[0], -1e-3, 1e-3 * 1e-6);
  EXPECT_NEAR(ps.at("w").value[1], 1e-3, 1e-3 * 1e-6);
  EXPECT_NEAR(ps.at("w").value[2], -1e-3, 1e-3 * 1e-6);
}

TEST(AdamW, ZeroGradientAndDecay) {
  ag::ParameterSet ps;
  ps.add("w", Matrix(2, 2, 3.0));
  OptimState st;
  st.cfg.lr = 0.1;
  adamw_step(ps, st, 1.0);
  for (double v : ps.at("w").value.values()) EXPECT_EQ(v, 3.0);

  st.cfg.weight_decay = 0.01;
  adamw_step(ps, st, 0.5);
  for (double v : ps.at("w").value.values()) EXPECT_NEAR(v, 3.0 * (1.0 - 0.1 * 0.5 * 0.01), 1e-15);
}

TEST(AdamW, NonFiniteUpdateLeavesParameters) {
  ag::ParameterSet ps;
  ps.add("w", Matrix(1, 2, 1.0));
  ps.at("w").grad[1] = std::numeric_limits<double>::quiet_NaN();
  OptimState st;
  EXPECT_THROW(adamw_step(ps, st, 1.0), std::runtime_error);
  EXPECT_EQ(ps.at("w").value[0], 1.0);
  EXPECT_EQ(ps.at("w").value[1], 1.0);
}

TEST(AdamW, InsertionOrderDoesNotMatter) {
  ag::ParameterSet a, b;
  a.add("x", Matrix(1, 2, 1.0));
  a.add("y", Matrix(1, 2, -1.0));
  b.add("y", Matrix(1, 2, -1.0));
  b.add("x", Matrix(1, 2, 1.0));
  OptimState sa, sb;
  for (int s = 0; s < 3; ++s) {
    for (auto* ps : {&a, &b}) {
      ps->at("x").grad = Matrix(1, 2, std::vector<double>{0.3, -0.1 * s});
      ps->at("y").grad = Matrix(1, 2, std::vector<double>{0.2 * s, 0.7});
    }
    adamw_step(a, sa, 1.0);
    adamw_step(b, sb, 1.0);
  }
  EXPECT_EQ(a.at("x").value, b.at("x").value);
  EXPECT_EQ(a.at("y").value, b.at("y").value);
}

TEST(InverseLr, EndpointsAndMonotone) {
  EXPECT_EQ(inverse_lr(0), 1.0 - 0.99);
  EXPECT_NEAR(inverse_lr(0), 0.01, 1e-15);
  EXPECT_NEAR(inverse_lr(1000, 1e6, 0.5, 0.0), 1.0 / std::sqrt(1.001), 1e-15);
  EXPECT_EQ(inverse_lr(0, 1e6, 0.5, 0.0), 1.0);
  double prev = inverse_lr(2000);
  for (std::uint64_t s = 2001; s <= 30000; ++s) {
    const double cur = inverse_lr(s);
    ASSERT_LE(cur, prev) << s;
    prev = cur;
  }
  for (std::uint64_t s = 0; s < 500; ++s) EXPECT_LT(inverse_lr(s), inverse_lr(s + 1));
}

TEST(ToyData, MaskingAndRolloffOrdering) {
  std::mt19937_64 rng(30);
  const auto data = make_toy_dataset(24, rng);
  const MelCodec codec;
  ASSERT_EQ(data.size(), 24u);
  for (const auto& item : data.items) {
    ASSERT_EQ(item.z_h.rows(), kToyBands);
    ASSERT_EQ(item.z_h.cols(), kToyFrames);
    ASSERT_TRUE(item.z_l.same_shape(item.z_h));
    const std::size_t band = codec.cutoff_band(item.cutoff_hz);
    for (std::size_t b = band; b < kToyBands; ++b) {
      for (std::size_t f = 0; f < kToyFrames; ++f) EXPECT_EQ(item.z_l(b, f), 0.0);
    }
    EXPECT_LT(item.f_l, item.f_h);
    EXPECT_GE(item.f_l, 0.0);
    EXPECT_LT(item.f_h, 1.0);
    EXPECT_LT(item.label, kToyClasses);
    const auto cond = data.cond_for(item);
    EXPECT_EQ(cond.cond_seq, class_condition(item.label, data.d_cond));
    EXPECT_FALSE(cond.text_null);
    EXPECT_FALSE(cond.audio_null);
  }
}

TEST(ToyData, Deterministic) {
  std::mt19937_64 a(31), b(31);
  const auto da = make_toy_dataset(6, a), db = make_toy_dataset(6, b);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(da.items[i].z_h, db.items[i].z_h);
    EXPECT_EQ(da.items[i].z_l, db.items[i].z_l);
    EXPECT_EQ(da.items[i].cutoff_hz, db.items[i].cutoff_hz);
  }
  EXPECT_NE(class_condition(0, 8), class_condition(1, 8));
  EXPECT_EQ(class_condition(2, 8), class_condition(2, 8));
}

TEST(MelCodec, SilenceAndLsd) {
  const MelCodec codec;
  const auto silence = AudioBuffer::mono(std::vector<double>(kToySamples, 0.0), 44100);
  const Matrix z = codec.encode(silence);
  EXPECT_EQ(z.rows(), kToyBands);
  EXPECT_EQ(z.cols(), kToyFrames);
  for (double v : z.values()) EXPECT_NEAR(v, 0.0, 1e-12);
  Matrix shifted = z;
  for (double& v : shifted.values()) v += 0.25;
  EXPECT_NEAR(mel_lsd(z, shifted), 1.0, 1e-12);
  EXPECT_EQ(mel_lsd(z, z), 0.0);
}

namespace {

ModelConfig tiny_toy_config() {
  ModelConfig cfg;
  cfg.d_model = 16;
  cfg.n_blocks = 1;
  cfg.n_heads = 2;
  cfg.d_cond = 8;
  cfg.fourier_m = 8;
  cfg.mlp_ratio = 2;
  return cfg;
}

}  // namespace

TEST(Train, DeterministicAndLossDecreases) {
  std::mt19937_64 drng(40);
  ToyConfig tc;
  tc.d_cond = 8;
  const auto data = make_toy_dataset(32, drng, tc);
  TrainConfig cfg;
  cfg.steps = 240;
  cfg.batch = 4;
  cfg.seed = 41;
  MiniDit a(tiny_toy_config(), 42), b(tiny_toy_config(), 42);
  std::size_t calls = 0;
  const auto ra = train(a, data, cfg, [&](std::size_t, double) { ++calls; });
  const auto rb = train(b, data, cfg);
  EXPECT_EQ(calls, cfg.steps);
  ASSERT_EQ(ra.loss_curve.size(), cfg.steps);
  EXPECT_EQ(ra.loss_curve, rb.loss_curve);
  for (auto& [name, p] : a.params()) EXPECT_EQ(p.value, b.params().at(name).value) << name;
  EXPECT_EQ(ra.optim.step, cfg.steps);
  EXPECT_LT(smoothed(ra.loss_curve, cfg.steps - 1, 40), smoothed(ra.loss_curve, 39, 40));
  for (double l : ra.loss_curve) EXPECT_GT(l, 0.0);
}

TEST(Train, ResumeContinuesStepCounter) {
  std::mt19937_64 drng(43);
  ToyConfig tc;
  tc.d_cond = 8;
  const auto data = make_toy_dataset(8, drng, tc);
  TrainConfig cfg;
  cfg.batch = 2;
  cfg.seed = 44;
  MiniDit b(tiny_toy_config(), 45);
  TrainConfig more = cfg;
  more.steps = 3;
  const auto first = train(b, data, more);
  EXPECT_EQ(first.optim.step, 3u);
  const auto second = train(b, data, more, first.optim);
  EXPECT_EQ(second.optim.step, 6u);
  EXPECT_TRUE(std::isfinite(second.loss_curve.back()));
}

TEST(Train, DivergenceReportsStep) {
  std::mt19937_64 drng(46);
  ToyConfig tc;
  tc.d_cond = 8;
  auto data = make_toy_dataset(4, drng, tc);
  for (auto& item : data.items) item.z_h[0] = std::numeric_limits<double>::quiet_NaN();
  TrainConfig cfg;
  cfg.steps = 3;
  cfg.batch = 2;
  MiniDit model(tiny_toy_config(), 47);
  try {
    train(model, data, cfg);
    FAIL() << "expected divergence";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("divergence at step 0"), std::string::npos) << e.what();
  }
}

TEST(Checkpoint, RoundTripIsByteIdentical) {
  const ModelConfig cfg = test_support::small_model_config();
  MiniDit model(cfg, 50);
  randomize(model, 51);
  OptimState st;
  st.cfg.lr = 2e-4;
  st.cfg.weight_decay = 0.01;
  for (auto& [name, p] : model.params()) p.grad = Matrix(p.value.rows(), p.value.cols(), 0.1);
  adamw_step(model.params(), st, 0.5);
  const auto p1 = temp_path("a.sgck"), p2 = temp_path("b.sgck");
  save_checkpoint(p1, model, &st, {{"frames", 16.0}});
  const Checkpoint ck = load_checkpoint(p1);
  ASSERT_TRUE(ck.model);
  EXPECT_EQ(ck.model->config(), cfg);
  for (auto& [name, p] : model.params()) EXPECT_EQ(ck.model->params().at(name).value, p.value);
  ASSERT_TRUE(ck.optim.has_value());
  EXPECT_EQ(ck.optim->step, st.step);
  EXPECT_EQ(ck.optim->cfg.lr, st.cfg.lr);
  EXPECT_EQ(ck.optim->m, st.m);
  EXPECT_EQ(ck.optim->v, st.v);
  EXPECT_EQ(ck.extra.at("frames"), 16.0);
  save_checkpoint(p2, *ck.model, &*ck.optim, ck.extra);
  EXPECT_EQ(read_bytes(p1), read_bytes(p2));

  std::mt19937_64 rng(52);
  const Matrix z = random_matrix(cfg.channels, 3, rng);
  const auto cond = some_cond(cfg.d_cond, rng);
  EXPECT_EQ(model.evaluate(z, z, cond, 0.5), ck.model->evaluate(z, z, cond, 0.5));

  save_checkpoint(p2, model, nullptr);
  EXPECT_FALSE(load_checkpoint(p2).optim.has_value());
  std::filesystem::remove(p1);
  std::filesystem::remove(p2);
}

TEST(Checkpoint, RejectsBadFiles) {
  MiniDit model(test_support::small_model_config(), 53);
  const auto p = temp_path("c.sgck");
  save_checkpoint(p, model, nullptr);
  const std::string bytes = read_bytes(p);

  auto expect_error = [&](const std::string& content, const std::string& needle) {
    {
      std::ofstream out(p, std::ios::binary | std::ios::trunc);
      out << content;
    }
    try {
      load_checkpoint(p);
      FAIL() << "expected error containing " << needle;
    } catch (const std::exception& e) {
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };
  expect_error(bytes.substr(0, bytes.size() - 5), "truncated");
  expect_error(bytes.substr(0, 6), "truncated");
  expect_error("XXXX" + bytes.substr(4), "bad magic");
  std::string wrong_version = bytes;
  wrong_version[4] = 9;
  expect_error(wrong_version, "version mismatch: expected 1, got 9");
  expect_error(bytes + "z", "trailing bytes");
  std::filesystem::remove(p);
  EXPECT_THROW(load_checkpoint(p), std::runtime_error);
}
