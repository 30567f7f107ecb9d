// SPDX-License-Identifier: Apache-2.0
//
// diar: command-line front end over the C API.
#include <cstdio>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "diar/diar.h"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct ConfigDeleter {
  void operator()(diar_config* c) const { diar_config_destroy(c); }
};
using ConfigPtr = std::unique_ptr<diar_config, ConfigDeleter>;

struct CommonFlags {
  std::string config;
  std::optional<std::string> seed, segment_sec, downsample, target_dbfs, model, classes, epochs, batch;
  std::vector<std::string> sets;  // raw key=value overrides
  std::string out;
};

void print_line(const char* line, void*) { std::printf("%s\n", line); }
void print_err(const char* line, void*) { std::fprintf(stderr, "%s\n", line); }

int fail(diar_status st) {
  std::fprintf(stderr, "diar: %s: %s\n", diar_status_name(st), diar_last_error());
  return st == DIAR_E_USAGE ? kExitUsage : kExitData;
}

// Config file first, then --set pairs, then dedicated flags.
diar_status build_config(const CommonFlags& f, ConfigPtr& out) {
  diar_config* raw = nullptr;
  if (auto st = diar_config_create(&raw); st != DIAR_OK) return st;
  out.reset(raw);
  if (!f.config.empty()) {
    if (auto st = diar_config_load(raw, f.config.c_str()); st != DIAR_OK) return st;
  }
  for (const auto& kv : f.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "diar: --set expects KEY=VALUE, got '%s'\n", kv.c_str());
      return DIAR_E_USAGE;
    }
    if (auto st = diar_config_set(raw, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()); st != DIAR_OK) {
      return st;
    }
  }
  const std::pair<const char*, const std::optional<std::string>*> flags[] = {
      {"seed", &f.seed},       {"segment-sec", &f.segment_sec}, {"downsample", &f.downsample},
      {"target-dbfs", &f.target_dbfs}, {"model", &f.model},     {"classes", &f.classes},
      {"epochs", &f.epochs},   {"batch", &f.batch},
  };
  for (const auto& [key, value] : flags) {
    if (*value) {
      if (auto st = diar_config_set(raw, key, (*value)->c_str()); st != DIAR_OK) return st;
    }
  }
  return DIAR_OK;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-speaker diarization toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(diar_version()));

  CommonFlags f;
  app.add_option("--config", f.config, "key=value settings file")->check(CLI::ExistingFile);
  app.add_option("--seed", f.seed, "random seed");
  app.add_option("--segment-sec", f.segment_sec, "segment duration in seconds (0.1)");
  app.add_option("--downsample", f.downsample, "decimation factor (4)");
  app.add_option("--target-dbfs", f.target_dbfs, "normalization target (-20)");
  app.add_option("--model", f.model, "slp, mlp, rnn, cnn or a catalog name such as mlp-200-100");
  app.add_option("--classes", f.classes, "2 (per channel) or 4 (joint)");
  app.add_option("--epochs", f.epochs, "training epochs");
  app.add_option("--batch", f.batch, "mini-batch size");
  app.add_option("--set", f.sets, "extra KEY=VALUE setting")->take_all();
  app.add_option("--out", f.out, "output directory or file");
  app.fallthrough();

  std::vector<std::string> inputs;
  auto* normalize = app.add_subcommand("normalize", "normalize WAV files to the target level");
  normalize->add_option("inputs", inputs, "WAV files")->required()->check(CLI::ExistingFile);

  std::optional<std::string> n_files, duration, speech_fraction, noise_dbfs;
  auto* synth = app.add_subcommand("synth", "generate a synthetic two-speaker corpus");
  synth->add_option("--n-files", n_files, "number of files");
  synth->add_option("--duration", duration, "seconds per file");
  synth->add_option("--speech-fraction", speech_fraction, "speech share per channel");
  synth->add_option("--noise-dbfs", noise_dbfs, "background noise level");

  std::string data;
  auto* prepare = app.add_subcommand("prepare", "segment, label and split a WAV/CSV corpus");
  prepare->add_option("--data", data, "directory of NAME.wav / NAME.csv pairs")->required();

  auto* train = app.add_subcommand("train", "train a model on prepared data");
  train->add_option("--data", data, "prepared directory")->required();

  std::string checkpoint;
  std::string split = "test";
  auto* evaluate = app.add_subcommand("evaluate", "per-file accuracy on a split");
  evaluate->add_option("--checkpoint", checkpoint, "model.dknn")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--data", data, "prepared directory")->required();
  evaluate->add_option("--split", split, "train, validation or test")->check(CLI::IsMember({"train", "validation", "test"}));

  std::string wav, csv;
  auto* predict = app.add_subcommand("predict", "write predicted speech intervals as CSV");
  predict->add_option("--checkpoint", checkpoint, "model.dknn")->required()->check(CLI::ExistingFile);
  predict->add_option("--wav", wav, "two-channel WAV file")->required();

  int channel = 1;
  long from = 0, to = -1;
  auto* plot = app.add_subcommand("plot", "SVG of label vs prediction ticks");
  plot->add_option("--checkpoint", checkpoint, "model.dknn")->required()->check(CLI::ExistingFile);
  plot->add_option("--wav", wav, "two-channel WAV file")->required();
  plot->add_option("--csv", csv, "label CSV")->required();
  plot->add_option("--channel", channel, "1 or 2")->check(CLI::Range(1, 2));
  plot->add_option("--from", from, "first segment index")->check(CLI::NonNegativeNumber);
  plot->add_option("--to", to, "end segment index (exclusive)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  diar_set_log_callback(print_err, nullptr);
  ConfigPtr config;
  if (auto st = build_config(f, config); st != DIAR_OK) return fail(st);

  auto need_out = [&](const char* what) {
    if (f.out.empty()) {
      std::fprintf(stderr, "diar: --out %s is required\n", what);
      return false;
    }
    return true;
  };

  diar_status st = DIAR_OK;
  if (*normalize) {
    if (!need_out("DIR")) return kExitUsage;
    std::vector<const char*> paths;
    for (const auto& p : inputs) paths.push_back(p.c_str());
    st = diar_normalize(config.get(), paths.data(), paths.size(), f.out.c_str());
  } else if (*synth) {
    if (!need_out("DIR")) return kExitUsage;
    const std::pair<const char*, const std::optional<std::string>*> extra[] = {
        {"n-files", &n_files}, {"duration", &duration}, {"speech-fraction", &speech_fraction}, {"noise-dbfs", &noise_dbfs}};
    for (const auto& [key, value] : extra) {
      if (*value && (st = diar_config_set(config.get(), key, (*value)->c_str())) != DIAR_OK) return fail(st);
    }
    st = diar_synth(config.get(), f.out.c_str());
  } else if (*prepare) {
    if (!need_out("DIR")) return kExitUsage;
    st = diar_prepare(config.get(), data.c_str(), f.out.c_str(), print_err, nullptr);
  } else if (*train) {
    if (!need_out("DIR")) return kExitUsage;
    st = diar_train(config.get(), data.c_str(), f.out.c_str(), print_err, nullptr);
  } else if (*evaluate) {
    st = diar_evaluate(checkpoint.c_str(), data.c_str(), split.c_str(), print_line, nullptr);
  } else if (*predict) {
    if (!need_out("CSV")) return kExitUsage;
    st = diar_predict(checkpoint.c_str(), wav.c_str(), f.out.c_str());
  } else if (*plot) {
    if (!need_out("SVG")) return kExitUsage;
    st = diar_plot(checkpoint.c_str(), wav.c_str(), csv.c_str(), channel, from, to, f.out.c_str());
  }
  return st == DIAR_OK ? 0 : fail(st);
}
