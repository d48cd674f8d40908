#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "sagasr/audio.h"
#include "sagasr/degrade/degrade.h"
#include "sagasr/dsp/resample.h"
#include "sagasr/dsp/rolloff.h"
#include "sagasr/flow/flow.h"
#include "sagasr/io/run_config.h"
#include "sagasr/io/wav.h"
#include "sagasr/metrics/metrics.h"
#include "sagasr/net/checkpoint.h"
#include "sagasr/net/train.h"
#include "sagasr/parallel.h"
#include "sagasr/pipeline/super_resolve.h"

namespace fs = std::filesystem;
using namespace sagasr;

namespace {

struct CommonOptions {
  std::string config_file;
  std::vector<std::string> overrides;
  std::string seed;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config_file, "key=value config file");
  cmd->add_option("--set", o.overrides, "override one key (key=value), repeatable");
  cmd->add_option("--seed", o.seed, "random seed (falls back to $SAGA_SEED, then 0)");
}

// Layers: defaults < config file < --set < dedicated flags. The seed comes
// from --seed, else SAGA_SEED, else the config.
io::RunConfig resolve(std::map<std::string, std::string> defaults, const CommonOptions& o,
                      const std::map<std::string, std::string>& flags) {
  io::RunConfig cfg(std::move(defaults));
  if (!o.config_file.empty()) cfg.merge_file(o.config_file);
  for (const std::string& kv : o.overrides) cfg.merge_text(kv);
  for (const auto& [k, v] : flags) cfg.set(k, v);
  if (cfg.has("seed")) {
    if (!o.seed.empty()) {
      cfg.set("seed", o.seed);
    } else if (const char* env = std::getenv("SAGA_SEED"); env != nullptr && *env != '\0') {
      cfg.set("seed", env);
    }
  }
  std::cerr << "# resolved config\n";
  std::istringstream lines(cfg.dump());
  for (std::string line; std::getline(lines, line);) std::cerr << "# " << line << "\n";
  return cfg;
}

std::vector<fs::path> wav_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::string ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
    if (ext == ".wav") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::vector<dsp::FilterFamily> parse_families(const std::string& csv) {
  std::vector<dsp::FilterFamily> out;
  std::stringstream ss(csv);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(dsp::parse_family(item));
  }
  return out;
}

int cmd_degrade(const std::string& in_dir, const std::string& out_dir, const CommonOptions& o) {
  const io::RunConfig cfg = resolve({{"seed", "0"},
                                     {"cutoff_min_hz", "2000"},
                                     {"cutoff_max_hz", "16000"},
                                     {"order_min", "2"},
                                     {"order_max", "10"},
                                     {"families", "butterworth,chebyshev1,bessel,elliptic"},
                                     {"mode", "filter"},
                                     {"segment_seconds", "0"}},
                                    o, {});
  degrade::DegradeConfig dc;
  dc.seed = cfg.get_u64("seed");
  dc.cutoff_min_hz = cfg.get_double("cutoff_min_hz");
  dc.cutoff_max_hz = cfg.get_double("cutoff_max_hz");
  dc.order_min = static_cast<int>(cfg.get_int("order_min"));
  dc.order_max = static_cast<int>(cfg.get_int("order_max"));
  dc.families = parse_families(cfg.get("families"));
  dc.resample_mode = degrade::parse_mode(cfg.get("mode"));
  dc.validate();
  const double seg = cfg.get_double("segment_seconds");

  const auto inputs = wav_files(in_dir);
  if (inputs.empty()) throw std::runtime_error("no input files in " + in_dir);
  fs::create_directories(fs::path(out_dir) / "high");
  fs::create_directories(fs::path(out_dir) / "low");

  std::vector<std::string> rows(inputs.size()), errors(inputs.size());
  parallel_for(inputs.size(), [&](std::size_t i) {
    const std::string id = inputs[i].stem().string();
    try {
      degrade::Rng rng = degrade::stream_for(dc.seed, i);
      AudioBuffer x = io::read_wav(inputs[i]);
      if (x.sample_rate() != degrade::kTargetRate) x = dsp::resample(x, degrade::kTargetRate);
      if (seg > 0.0) x = degrade::segment(x, rng, seg);
      const dsp::FilterSpec spec = degrade::sample_degradation(rng, dc);
      const AudioBuffer low = degrade::degrade(x, spec, dc.resample_mode);
      io::write_wav(fs::path(out_dir) / "high" / (id + ".wav"), x);
      io::write_wav(fs::path(out_dir) / "low" / (id + ".wav"), low);
      rows[i] = id + "\t" + fmt("%.6f", spec.cutoff_hz) + "\t" +
                std::string(dsp::family_name(spec.family)) + "\t" + std::to_string(spec.order) +
                "\t" + degrade::mode_name(dc.resample_mode) + "\t" + std::to_string(dc.seed);
    } catch (const std::exception& e) {
      errors[i] = id + ": " + e.what();
    }
  });

  std::ofstream manifest(fs::path(out_dir) / "manifest.tsv", std::ios::trunc);
  manifest << "id\tcutoff_hz\tfamily\torder\tmode\tseed\n";
  std::size_t failed = 0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (errors[i].empty()) {
      manifest << rows[i] << "\n";
    } else {
      ++failed;
      std::cerr << "error: " << errors[i] << "\n";
    }
  }
  std::cout << "degraded " << inputs.size() - failed << "/" << inputs.size() << " files\n";
  return failed == 0 ? 0 : 1;
}

int cmd_rolloff(const std::string& wav, double roll_percent) {
  const AudioBuffer x = io::read_wav(wav);
  const double hz = dsp::spectral_rolloff(x, roll_percent);
  std::printf("rolloff_hz=%.6f normalized=%.6f\n", hz,
              dsp::normalize_rolloff(hz, x.sample_rate()));
  return 0;
}

int cmd_train(const CommonOptions& o, const std::map<std::string, std::string>& flags) {
  const io::RunConfig cfg = resolve({{"seed", "0"},
                                     {"steps", "2000"},
                                     {"batch", "16"},
                                     {"lr", "1e-3"},
                                     {"weight_decay", "0"},
                                     {"n_items", "512"},
                                     {"d_model", "64"},
                                     {"n_blocks", "2"},
                                     {"n_heads", "4"},
                                     {"d_cond", "32"},
                                     {"rolloff_conditioning", "true"},
                                     {"checkpoint", "model.sgck"},
                                     {"loss_tsv", "loss.tsv"}},
                                    o, flags);
  const std::uint64_t seed = cfg.get_u64("seed");
  net::ModelConfig mc;
  mc.d_model = static_cast<std::size_t>(cfg.get_int("d_model"));
  mc.n_blocks = static_cast<std::size_t>(cfg.get_int("n_blocks"));
  mc.n_heads = static_cast<std::size_t>(cfg.get_int("n_heads"));
  mc.d_cond = static_cast<std::size_t>(cfg.get_int("d_cond"));
  mc.rolloff_conditioning = cfg.get_bool("rolloff_conditioning");
  net::TrainConfig tc;
  tc.steps = static_cast<std::size_t>(cfg.get_int("steps"));
  tc.batch = static_cast<std::size_t>(cfg.get_int("batch"));
  tc.adam.lr = cfg.get_double("lr");
  tc.adam.weight_decay = cfg.get_double("weight_decay");
  tc.seed = degrade::stream_for(seed, 2)();

  net::ToyConfig toy;
  toy.d_cond = mc.d_cond;
  std::mt19937_64 data_rng = degrade::stream_for(seed, 0);
  const net::ToyDataset data =
      net::make_toy_dataset(static_cast<std::size_t>(cfg.get_int("n_items")), data_rng, toy);
  net::MiniDit model(mc, degrade::stream_for(seed, 1)());

  std::ofstream loss(cfg.get("loss_tsv"), std::ios::trunc);
  if (!loss) throw std::runtime_error("cannot open " + cfg.get("loss_tsv"));
  const auto result = net::train(model, data, tc, [&](std::size_t step, double l) {
    loss << step << "\t" << fmt("%.17g", l) << "\n";
    if ((step + 1) % 100 == 0) {
      std::cerr << "step " << step + 1 << " loss=" << fmt("%.5f", l) << "\n";
    }
  });
  net::save_checkpoint(cfg.get("checkpoint"), model, &result.optim,
                       {{"frames", static_cast<double>(net::kToyFrames)}});
  std::cout << "trained " << tc.steps << " steps, final smoothed loss "
            << fmt("%.6f", net::smoothed(result.loss_curve, result.loss_curve.size() - 1, 50))
            << "\n";
  return 0;
}

int cmd_sample(const std::string& ckpt, const std::string& in_wav, const std::string& out_wav,
               const CommonOptions& o, const std::map<std::string, std::string>& flags) {
  const io::RunConfig cfg = resolve({{"seed", "0"},
                                     {"target_rolloff", "0.95"},
                                     {"sa", "1.4"},
                                     {"st", "1.2"},
                                     {"steps", "100"},
                                     {"class", "none"}},
                                    o, flags);
  const net::Checkpoint ck = net::load_checkpoint(ckpt);
  pipeline::SampleConfig sc;
  sc.seed = cfg.get_u64("seed");
  sc.target_rolloff = cfg.get_double("target_rolloff");
  sc.scales = {cfg.get_double("sa"), cfg.get_double("st")};
  sc.steps = static_cast<std::size_t>(cfg.get_int("steps"));
  if (cfg.get("class") != "none") sc.class_label = static_cast<std::size_t>(cfg.get_int("class"));
  const auto result = pipeline::super_resolve(*ck.model, io::read_wav(in_wav), sc);
  io::write_wav(out_wav, result.audio);
  std::printf("input_rolloff_hz=%.6f output_rolloff_hz=%.6f\n", result.input_rolloff_hz,
              dsp::spectral_rolloff(result.audio));
  return 0;
}

int cmd_eval(const std::string& ref_dir, const std::string& est_dir, const std::string& emb_ref,
             const std::string& emb_est, const std::string& out) {
  const auto refs = wav_files(ref_dir);
  if (refs.empty()) throw std::runtime_error("no matches: no reference files in " + ref_dir);
  std::vector<metrics::EvalPair> pairs;
  std::size_t matched = 0;
  for (const fs::path& r : refs) {
    const fs::path est = fs::path(est_dir) / r.filename();
    matched += fs::exists(est) ? 1 : 0;
    pairs.push_back({r.stem().string(), r, est});
  }
  if (matched == 0) throw std::runtime_error("no matches between " + ref_dir + " and " + est_dir);
  std::optional<fs::path> er, ee;
  if (!emb_ref.empty()) er = emb_ref;
  if (!emb_est.empty()) ee = emb_est;
  const auto report = metrics::eval_corpus(std::move(pairs), er, ee);
  const std::string text = metrics::format_report(report);
  std::cout << text;
  if (!out.empty()) {
    std::ofstream f(out, std::ios::trunc);
    f << text;
    if (!f) throw std::runtime_error("cannot write " + out);
  }
  for (const auto& e : report.entries) {
    if (!e.ok()) std::cerr << "failed: " << e.id << " (" << e.status << ")\n";
  }
  return report.failures() == 0 ? 0 : 1;
}

int cmd_schedule_dump(std::size_t steps, std::size_t n_linear, std::size_t big_n) {
  std::cout << flow::dump_schedule(flow::linear_quadratic_schedule(steps, n_linear, big_n));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Roll-off conditioned flow-matching audio super-resolution (toy scale)"};
  app.require_subcommand(1);

  CommonOptions deg_opts, train_opts, sample_opts;
  std::string in_dir, out_dir;
  auto* deg = app.add_subcommand("degrade", "Simulate low-pass degradation of a WAV directory");
  deg->add_option("in_dir", in_dir)->required();
  deg->add_option("out_dir", out_dir)->required();
  add_common(deg, deg_opts);

  std::string roll_wav;
  double roll_percent = dsp::kDefaultRollPercent;
  auto* roll = app.add_subcommand("rolloff", "Print the spectral roll-off of a WAV file");
  roll->add_option("wav", roll_wav)->required();
  roll->add_option("--roll-percent", roll_percent)->check(CLI::Range(0.0, 1.0));

  std::string steps_flag, ckpt_flag, loss_flag, nocond_flag;
  auto* tr = app.add_subcommand("train", "Train the toy model");
  add_common(tr, train_opts);
  tr->add_option("--steps", steps_flag);
  tr->add_option("--checkpoint,-o", ckpt_flag);
  tr->add_option("--loss-tsv", loss_flag);
  bool no_rolloff = false;
  tr->add_flag("--no-rolloff", no_rolloff, "train without roll-off conditioning");

  std::string s_ckpt, s_in, s_out, s_target, s_sa, s_st, s_steps, s_class;
  auto* sa = app.add_subcommand("sample", "Super-resolve a low-resolution WAV");
  sa->add_option("checkpoint", s_ckpt)->required();
  sa->add_option("input", s_in)->required();
  sa->add_option("--out,-o", s_out)->required();
  sa->add_option("--target-rolloff", s_target);
  sa->add_option("--sa", s_sa);
  sa->add_option("--st", s_st);
  sa->add_option("--steps", s_steps);
  sa->add_option("--class", s_class);
  add_common(sa, sample_opts);

  std::string e_ref, e_est, e_emb_ref, e_emb_est, e_out;
  auto* ev = app.add_subcommand("eval", "LSD (and optional FD) report over matched WAVs");
  ev->add_option("ref_dir", e_ref)->required();
  ev->add_option("est_dir", e_est)->required();
  ev->add_option("--emb-ref", e_emb_ref);
  ev->add_option("--emb-est", e_emb_est);
  ev->add_option("--out,-o", e_out);

  std::size_t d_steps = 100, d_linear = 25, d_big = 1000;
  auto* sd = app.add_subcommand("schedule-dump", "Print the sampling time grid");
  sd->add_option("--steps", d_steps);
  sd->add_option("--n-linear", d_linear);
  sd->add_option("--big-n", d_big);

  CLI11_PARSE(app, argc, argv);

  auto collect = [](std::initializer_list<std::pair<const char*, const std::string*>> kv) {
    std::map<std::string, std::string> m;
    for (const auto& [k, v] : kv) {
      if (!v->empty()) m[k] = *v;
    }
    return m;
  };

  try {
    if (deg->parsed()) return cmd_degrade(in_dir, out_dir, deg_opts);
    if (roll->parsed()) return cmd_rolloff(roll_wav, roll_percent);
    if (tr->parsed()) {
      auto flags = collect({{"steps", &steps_flag}, {"checkpoint", &ckpt_flag},
                            {"loss_tsv", &loss_flag}});
      if (no_rolloff) flags["rolloff_conditioning"] = "false";
      return cmd_train(train_opts, flags);
    }
    if (sa->parsed()) {
      return cmd_sample(s_ckpt, s_in, s_out, sample_opts,
                        collect({{"target_rolloff", &s_target}, {"sa", &s_sa}, {"st", &s_st},
                                 {"steps", &s_steps}, {"class", &s_class}}));
    }
    if (ev->parsed()) return cmd_eval(e_ref, e_est, e_emb_ref, e_emb_est, e_out);
    if (sd->parsed()) return cmd_schedule_dump(d_steps, d_linear, d_big);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
