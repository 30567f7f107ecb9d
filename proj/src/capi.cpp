// SPDX-License-Identifier: Apache-2.0
#include "diar/diar.h"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <exception>
#include <new>
#include <string>
#include <vector>

#include "diar/audio_io.hpp"
#include "diar/config.hpp"
#include "diar/error.hpp"
#include "diar/log.hpp"
#include "diar/nn.hpp"
#include "diar/pipeline.hpp"
#include "diar/trainer.hpp"

struct diar_config {
  diar::Config values;
};

struct diar_model {
  diar::nn::Checkpoint checkpoint;
};

namespace {

thread_local std::string g_last_error;

diar_status to_status(diar::ErrorCode code) { return static_cast<diar_status>(static_cast<int>(code)); }

template <typename F>
diar_status guarded(F&& f) {
  g_last_error.clear();
  try {
    f();
    return DIAR_OK;
  } catch (const diar::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return DIAR_E_INTERNAL;
}

void require(bool ok, const char* what) {
  if (!ok) throw diar::Error(diar::ErrorCode::InvalidArgument, what);
}

diar::Settings settings_of(const diar_config* config) {
  return config ? diar::Settings::from_config(config->values) : diar::Settings{};
}

diar::pipeline::LineFn line_fn(diar_line_fn fn, void* user) {
  if (fn == nullptr) return {};
  return [fn, user](std::string_view line) {
    const std::string copy(line);
    fn(copy.c_str(), user);
  };
}

}  // namespace

extern "C" {

const char* diar_version(void) { return "1.0.0"; }

const char* diar_status_name(diar_status status) {
  switch (status) {
    case DIAR_OK: return "ok";
    case DIAR_E_INTERNAL: return "internal";
    default:
      if (status >= DIAR_E_USAGE && status <= DIAR_E_SHAPE_MISMATCH) {
        return diar::error_code_name(static_cast<diar::ErrorCode>(status));
      }
      return "unknown";
  }
}

const char* diar_last_error(void) { return g_last_error.c_str(); }

void diar_set_log_callback(diar_line_fn fn, void* user) {
  if (fn == nullptr) {
    diar::set_log_sink({});
    return;
  }
  diar::set_log_sink([fn, user](diar::LogLevel level, std::string_view msg) {
    const std::string line = (level == diar::LogLevel::Warning ? "warning: " : "") + std::string(msg);
    fn(line.c_str(), user);
  });
}

diar_status diar_config_create(diar_config** out) {
  return guarded([&] {
    require(out != nullptr, "null output pointer");
    *out = new diar_config{};
  });
}

void diar_config_destroy(diar_config* config) { delete config; }

diar_status diar_config_load(diar_config* config, const char* path) {
  return guarded([&] {
    require(config && path, "null argument");
    auto merged = config->values;
    merged.merge(diar::Config::load(path));
    diar::Settings::from_config(merged);
    config->values = std::move(merged);
  });
}

diar_status diar_config_set(diar_config* config, const char* key, const char* value) {
  return guarded([&] {
    require(config && key && value, "null argument");
    auto merged = config->values;
    merged.set(key, value);
    diar::Settings::from_config(merged);
    config->values = std::move(merged);
  });
}

diar_status diar_config_get(const diar_config* config, const char* key, char* buf, size_t buf_size,
                            size_t* needed) {
  return guarded([&] {
    require(config && key, "null argument");
    const auto value = settings_of(config).to_config().get(key);
    if (!value) throw diar::Error(diar::ErrorCode::Usage, std::string("unknown key '") + key + "'");
    if (needed) *needed = value->size() + 1;
    if (buf && buf_size > 0) {
      const std::size_t n = std::min(buf_size - 1, value->size());
      std::memcpy(buf, value->data(), n);
      buf[n] = '\0';
    }
  });
}

diar_status diar_normalize(const diar_config* config, const char* const* inputs, size_t n_inputs,
                           const char* out_dir) {
  return guarded([&] {
    require(out_dir && (inputs || n_inputs == 0), "null argument");
    std::vector<std::filesystem::path> paths;
    for (size_t i = 0; i < n_inputs; ++i) {
      require(inputs[i] != nullptr, "null input path");
      paths.emplace_back(inputs[i]);
    }
    diar::pipeline::normalize_files(settings_of(config), paths, out_dir);
  });
}

diar_status diar_synth(const diar_config* config, const char* out_dir) {
  return guarded([&] {
    require(out_dir != nullptr, "null argument");
    diar::pipeline::synth(settings_of(config), out_dir);
  });
}

diar_status diar_prepare(const diar_config* config, const char* data_dir, const char* out_dir,
                         diar_line_fn progress, void* user) {
  return guarded([&] {
    require(data_dir && out_dir, "null argument");
    diar::pipeline::prepare(settings_of(config), data_dir, out_dir, line_fn(progress, user));
  });
}

diar_status diar_train(const diar_config* config, const char* prepared_dir, const char* out_dir,
                       diar_line_fn progress, void* user) {
  return guarded([&] {
    require(prepared_dir && out_dir, "null argument");
    diar::pipeline::train(settings_of(config), prepared_dir, out_dir, line_fn(progress, user));
  });
}

diar_status diar_evaluate(const char* model_path, const char* prepared_dir, const char* split, diar_line_fn out,
                          void* user) {
  return guarded([&] {
    require(model_path && prepared_dir && split, "null argument");
    const auto files = diar::pipeline::evaluate(model_path, prepared_dir, split);
    std::vector<double> acc;
    char buf[64];
    for (const auto& f : files) {
      acc.push_back(f.accuracy);
      std::snprintf(buf, sizeof buf, "%.6f", f.accuracy);
      if (out) out((f.file_id + "\t" + buf).c_str(), user);
    }
    std::snprintf(buf, sizeof buf, "%.6f", diar::average_accuracy(acc));
    if (out) out((std::string("MEAN\t") + buf).c_str(), user);
  });
}

diar_status diar_predict(const char* model_path, const char* wav_path, const char* out_csv) {
  return guarded([&] {
    require(model_path && wav_path && out_csv, "null argument");
    diar::pipeline::predict(model_path, wav_path, out_csv);
  });
}

diar_status diar_plot(const char* model_path, const char* wav_path, const char* csv_path, int channel,
                      long from_segment, long to_segment, const char* out_svg) {
  return guarded([&] {
    require(model_path && wav_path && csv_path && out_svg, "null argument");
    if (from_segment < 0) throw diar::Error(diar::ErrorCode::Usage, "plot range start must be >= 0");
    diar::PlotRange range;
    range.from = static_cast<std::size_t>(from_segment);
    if (to_segment >= 0) range.to = static_cast<std::size_t>(to_segment);
    diar::pipeline::plot(model_path, wav_path, csv_path, channel, range, out_svg);
  });
}

diar_status diar_measure_dbfs(const double* samples, size_t n, double* out_dbfs) {
  return guarded([&] {
    require((samples || n == 0) && out_dbfs, "null argument");
    *out_dbfs = diar::measure_dbfs({samples, n}).dbfs;
  });
}

diar_status diar_model_load(const char* path, diar_model** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = new diar_model{diar::nn::load_checkpoint(path)};
  });
}

void diar_model_free(diar_model* model) { delete model; }

size_t diar_model_input_size(const diar_model* model) {
  return model ? model->checkpoint.spec.input_size() : 0;
}

diar_status diar_model_predict(const diar_model* model, const double* rows, size_t n_rows, int* classes) {
  return guarded([&] {
    require(model && (rows || n_rows == 0) && (classes || n_rows == 0), "null argument");
    if (n_rows == 0) return;
    const std::size_t width = model->checkpoint.spec.input_size();
    diar::nn::Tensor inputs({n_rows, width}, std::vector<double>(rows, rows + n_rows * width));
    const auto pred = diar::predict_segments(model->checkpoint.spec, model->checkpoint.params, inputs);
    std::copy(pred.classes.begin(), pred.classes.end(), classes);
  });
}

}  // extern "C"
