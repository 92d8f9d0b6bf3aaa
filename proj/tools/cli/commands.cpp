// SPDX-License-Identifier: Apache-2.0
#include "commands.hpp"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>

#include "CLI11.hpp"
#include "idn/analysis.hpp"
#include "idn/checkpoint.hpp"
#include "idn/dataset.hpp"
#include "idn/error.hpp"
#include "idn/metrics.hpp"
#include "idn/parallel.hpp"
#include "idn/pipeline.hpp"
#include "idn/training.hpp"
#include "run_config.hpp"

namespace fs = std::filesystem;

namespace idn::cli {
namespace {

struct Globals {
  std::string config_file;
  std::uint64_t seed = 1;
  int threads = 0;
  std::string precision = "f32";
  std::vector<std::string> overrides;
};

struct TrainArgs {
  std::size_t scale = 0;
  std::string data;
  std::string manifest;
  std::string out = "checkpoints";
  std::optional<std::size_t> iters;
  bool resume = false;
  bool no_augment = false;
};

struct SrArgs {
  std::string checkpoint;
  std::string input;
  std::string output;
  std::string method = "idn";
  std::size_t scale = 0;
};

struct EvalArgs {
  std::string checkpoint;
  std::string gt;
  std::string lr;
  std::string method = "idn";
  std::size_t scale = 0;
  std::string report;
};

struct InspectArgs {
  std::string checkpoint;
  std::string image;
  std::string out = "inspect";
};

struct BenchArgs {
  std::string checkpoint;
  std::string data;
  std::size_t scale = 0;
  std::size_t repeats = 3;
  std::size_t warmup = 1;
  std::string report;
};

std::string checkpoint_name(std::size_t scale) { return "idn_x" + std::to_string(scale) + ".ckpt"; }

RunConfig build_config(const Globals& g, std::size_t scale_flag) {
  RunConfig rc;
  if (!g.config_file.empty()) rc.load_file(g.config_file);
  for (const auto& kv : g.overrides) rc.set_assignment(kv);
  if (scale_flag != 0) rc.set("model.scale", std::to_string(scale_flag));
  return rc;
}

Checkpoint load_for_scale(const std::string& path, std::size_t scale) {
  if (path.empty()) throw UsageError("--checkpoint is required");
  Checkpoint ck = load_checkpoint(path);
  if (scale != 0 && ck.config.scale != scale) {
    throw UsageError("checkpoint " + path + " is for x" + std::to_string(ck.config.scale) +
                     " but x" + std::to_string(scale) + " was requested");
  }
  return ck;
}

template <class T>
int cmd_train(const Globals& g, const TrainArgs& a, std::ostream& out) {
  RunConfig rc = build_config(g, a.scale);
  const IdnConfig config = rc.model();
  TrainSchedule schedule = rc.schedule(g.seed);
  if (a.iters) schedule.max_iterations = *a.iters;
  if (a.data.empty() && a.manifest.empty()) throw UsageError("train needs --data DIR");

  const fs::path out_dir(a.out);
  const std::string name = checkpoint_name(config.scale);
  ModelParams<T> params;
  std::optional<ResumeState<T>> resume;
  if (a.resume) {
    const Checkpoint ck = load_checkpoint(out_dir / name);
    if (!(ck.config == config)) throw ConfigError("resume checkpoint was trained with a different model config");
    params = ck.params.template cast<T>();
    fs::path rp = out_dir / name;
    rp += ".resume";
    resume = load_resume<T>(rp);
  } else {
    params = init_params<T>(config, g.seed);
  }

  TrainingCorpus::Options opts;
  opts.augment = rc.get_bool("train.augment") && !a.no_augment;
  opts.cache_capacity = rc.get_size("train.cache");
  std::optional<fs::path> manifest;
  if (!a.manifest.empty()) manifest = fs::path(a.manifest);
  TrainingCorpus corpus = TrainingCorpus::from_directory(a.data, manifest, opts);

  TrainOutputs outputs;
  outputs.directory = out_dir;
  outputs.checkpoint_name = name;
  outputs.on_log = [&](const LogEntry& e) { out << format_log_entry(e) << '\n' << std::flush; };
  const TrainResult<T> result =
      train_loop(schedule, config, std::move(params), corpus, outputs, resume ? &*resume : nullptr);
  out << "trained " << result.iterations << " iterations; checkpoint " << (out_dir / name).string()
      << '\n';
  return kExitOk;
}

std::vector<fs::path> inputs_of(const fs::path& input) {
  std::error_code ec;
  if (fs::is_directory(input, ec)) {
    auto files = list_images(input, std::nullopt);
    if (files.empty()) throw IoError("no PNG images in " + input.string());
    return files;
  }
  if (!fs::exists(input, ec)) throw IoError("input not found: " + input.string());
  return {input};
}

template <class T>
int cmd_sr(const Globals& g, const SrArgs& a, std::ostream& out) {
  const Upscaler method = parse_upscaler(a.method);
  if (a.input.empty() || a.output.empty()) throw UsageError("sr needs --input and --output");
  IdnConfig config;
  std::optional<ModelParams<T>> params;
  if (method == Upscaler::Idn) {
    const Checkpoint ck = load_for_scale(a.checkpoint, a.scale);
    config = ck.config;
    params = ck.params.template cast<T>();
  } else {
    config = build_config(g, a.scale).model();
  }
  const fs::path input(a.input);
  const bool many = fs::is_directory(input);
  const fs::path output(a.output);
  if (many) fs::create_directories(output);
  for (const auto& file : inputs_of(input)) {
    const ImageRGB image = load_png(file);
    const ImageRGB up = super_resolve_image<T>(image, method, params ? &*params : nullptr, config);
    const fs::path dest = many ? output / file.filename() : output;
    if (!many && dest.has_parent_path()) fs::create_directories(dest.parent_path());
    save_png(dest, up);
    out << file.string() << " -> " << dest.string() << " (" << up.width << "x" << up.height << ")\n";
  }
  return kExitOk;
}

template <class T>
int cmd_eval(const Globals& g, const EvalArgs& a, std::ostream& out) {
  const Upscaler method = parse_upscaler(a.method);
  if (a.gt.empty()) throw UsageError("eval needs --gt DIR");
  RunConfig rc = build_config(g, a.scale);
  const EvalProtocol protocol = rc.protocol();
  IdnConfig config;
  std::optional<ModelParams<T>> params;
  if (method == Upscaler::Idn) {
    const Checkpoint ck = load_for_scale(a.checkpoint, a.scale);
    config = ck.config;
    params = ck.params.template cast<T>();
  } else {
    config = rc.model();
  }
  const std::size_t m = config.scale;

  const auto gt_files = list_images(a.gt, std::nullopt);
  if (gt_files.empty()) throw IoError("no PNG images in " + a.gt);
  std::map<std::string, fs::path> lr_files;
  if (!a.lr.empty()) {
    for (const auto& f : list_images(a.lr, std::nullopt)) lr_files[f.filename().string()] = f;
    std::vector<std::string> orphans;
    std::set<std::string> gt_names;
    for (const auto& f : gt_files) {
      gt_names.insert(f.filename().string());
      if (!lr_files.count(f.filename().string())) orphans.push_back("gt/" + f.filename().string());
    }
    for (const auto& [n, f] : lr_files) {
      if (!gt_names.count(n)) orphans.push_back("lr/" + n);
    }
    if (!orphans.empty()) {
      std::string msg = "unpaired files:";
      for (const auto& o : orphans) msg += " " + o;
      throw IoError(msg);
    }
  }

  std::vector<MetricRow> rows;
  for (const auto& file : gt_files) {
    const ImagePlane y = luminance(load_png(file));
    DegradedPair pair;
    if (a.lr.empty()) {
      pair = degrade(y, m);
    } else {
      pair.hr = mod_crop(y, m);
      pair.lr = luminance(load_png(lr_files.at(file.filename().string())));
      if (pair.hr.height != m * pair.lr.height || pair.hr.width != m * pair.lr.width) {
        throw ShapeError(file.filename().string() + ": LR size does not match GT / scale");
      }
    }
    const ImagePlane up = method == Upscaler::Idn ? super_resolve(pair.lr, *params, config)
                                                  : bicubic_upscale(pair.lr, m);
    rows.push_back({file.filename().string(), psnr(up, pair.hr, protocol, m),
                    ssim(up, pair.hr, protocol, m)});
  }
  if (a.report.empty()) {
    write_metric_report(out, rows);
  } else {
    std::ofstream f(a.report);
    if (!f) throw IoError("cannot write report " + a.report);
    write_metric_report(f, rows);
    if (!f) throw IoError("failed writing report " + a.report);
    const MetricRow mean = mean_row(rows);
    out << "mean PSNR " << format_metric(mean.psnr) << " dB, SSIM " << format_metric(mean.ssim)
        << " over " << rows.size() << " images\n";
  }
  return kExitOk;
}

template <class T>
int cmd_inspect(const Globals&, const InspectArgs& a, std::ostream& out) {
  if (a.image.empty()) throw UsageError("inspect needs --image PATH");
  const Checkpoint ck = load_for_scale(a.checkpoint, 0);
  const ModelParams<T> params = ck.params.template cast<T>();
  const DegradedPair pair = degrade(luminance(load_png(a.image)), ck.config.scale);
  const fs::path dir(a.out);
  const auto maps = feature_map_summary(params, ck.config, pair.lr);
  write_feature_maps(dir, maps);
  const ResidualAnalysis residual = residual_histogram(params, ck.config, pair.lr, pair.hr);
  write_residual_analysis(dir, residual);
  out << "wrote " << maps.size() << " unit maps and 2 residual histograms to " << dir.string()
      << '\n';
  return kExitOk;
}

template <class T>
int cmd_bench(const Globals&, const BenchArgs& a, std::ostream& out) {
  if (a.data.empty()) throw UsageError("bench needs --data DIR");
  const Checkpoint ck = load_for_scale(a.checkpoint, a.scale);
  const ModelParams<T> params = ck.params.template cast<T>();
  const TimingReport report = bench(params, ck.config, a.data, a.repeats, a.warmup);
  if (!a.report.empty()) {
    std::ofstream f(a.report);
    if (!f) throw IoError("cannot write report " + a.report);
    write_timing_report(f, report);
  }
  write_timing_report(out, report);
  return kExitOk;
}

template <class Fn>
int dispatch(const std::string& precision, Fn&& fn) {
  if (precision == "f64") return fn(double{});
  return fn(float{});
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Information distillation network for single-image super-resolution", "idn"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_file, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--threads", g.threads, "kernel threads (default: IDN_THREADS or 1)")
      ->check(CLI::PositiveNumber);
  app.add_option("--precision", g.precision, "floating point precision")
      ->check(CLI::IsMember({"f32", "f64"}));
  app.add_option("--set", g.overrides, "override a config key (key=value)");

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "train a model");
  train->add_option("--scale", ta.scale, "upscaling factor (2, 3 or 4)");
  train->add_option("--data", ta.data, "directory of training PNGs");
  train->add_option("--manifest", ta.manifest, "file listing training images in order");
  train->add_option("--out", ta.out, "output directory for checkpoints and loss.log");
  train->add_option("--iters", ta.iters, "total iteration budget across phases");
  train->add_flag("--resume", ta.resume, "continue from the checkpoint in --out");
  train->add_flag("--no-augment", ta.no_augment, "disable the 40-fold augmentation");
  train->add_option("overrides", g.overrides, "key=value config overrides");

  SrArgs sa;
  auto* sr = app.add_subcommand("sr", "super-resolve PNG images");
  sr->add_option("--checkpoint", sa.checkpoint, "model checkpoint");
  sr->add_option("--input", sa.input, "PNG file or directory")->required();
  sr->add_option("--output", sa.output, "output file or directory")->required();
  sr->add_option("--method", sa.method, "idn or bicubic")->check(CLI::IsMember({"idn", "bicubic"}));
  sr->add_option("--scale", sa.scale, "upscaling factor (must match the checkpoint)");
  sr->add_option("overrides", g.overrides, "key=value config overrides");

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "PSNR/SSIM on the luminance channel");
  eval->add_option("--checkpoint", ea.checkpoint, "model checkpoint");
  eval->add_option("--gt", ea.gt, "directory of ground-truth PNGs")->required();
  eval->add_option("--lr", ea.lr, "directory of matching LR inputs (default: degrade the GT)");
  eval->add_option("--method", ea.method, "idn or bicubic")->check(CLI::IsMember({"idn", "bicubic"}));
  eval->add_option("--scale", ea.scale, "upscaling factor");
  eval->add_option("--report", ea.report, "write the TSV report here instead of stdout");
  eval->add_option("overrides", g.overrides, "key=value config overrides");

  InspectArgs ia;
  auto* inspect = app.add_subcommand("inspect", "feature maps and residual histograms");
  inspect->add_option("--checkpoint", ia.checkpoint, "model checkpoint")->required();
  inspect->add_option("--image", ia.image, "ground-truth PNG")->required();
  inspect->add_option("--out", ia.out, "output directory");

  BenchArgs ba;
  auto* benchc = app.add_subcommand("bench", "time the forward pass");
  benchc->add_option("--checkpoint", ba.checkpoint, "model checkpoint");
  benchc->add_option("--data", ba.data, "directory of ground-truth PNGs")->required();
  benchc->add_option("--scale", ba.scale, "upscaling factor (must match the checkpoint)");
  benchc->add_option("--repeats", ba.repeats, "timed runs per image")->check(CLI::PositiveNumber);
  benchc->add_option("--warmup", ba.warmup, "untimed runs per image")->check(CLI::PositiveNumber);
  benchc->add_option("--report", ba.report, "also write the report here");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "idn: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (g.threads > 0) set_num_threads(g.threads);
    if (*train) return dispatch(g.precision, [&](auto t) { return cmd_train<decltype(t)>(g, ta, out); });
    if (*sr) return dispatch(g.precision, [&](auto t) { return cmd_sr<decltype(t)>(g, sa, out); });
    if (*eval) return dispatch(g.precision, [&](auto t) { return cmd_eval<decltype(t)>(g, ea, out); });
    if (*inspect) {
      return dispatch(g.precision, [&](auto t) { return cmd_inspect<decltype(t)>(g, ia, out); });
    }
    if (*benchc) return dispatch(g.precision, [&](auto t) { return cmd_bench<decltype(t)>(g, ba, out); });
  } catch (const ConfigError& e) {
    err << "idn: config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "idn: usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "idn: error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace idn::cli
