// SPDX-License-Identifier: Apache-2.0
#include "diar/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "diar/audio_io.hpp"
#include "diar/error.hpp"
#include "diar/labelset.hpp"
#include "diar/log.hpp"

namespace diar::pipeline {
namespace {

constexpr char kManifest[] = "manifest.tsv";
constexpr char kSplit[] = "split.tsv";
constexpr char kPrepareConf[] = "prepare.conf";
constexpr char kFeatures[] = "features.dkfc";

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(ErrorCode::Io, "cannot create directory " + dir.string());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_tsv(const fs::path& path) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(read_text(path));
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    rows.push_back(std::move(fields));
  }
  return rows;
}

template <typename T>
T field_number(const std::string& s, const fs::path& where) {
  T v{};
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size()) {
    throw Error(ErrorCode::Malformed, where.string() + ": bad number '" + s + "'");
  }
  return v;
}

std::string tier_of(int channel) { return std::string(channel == 0 ? kTierCh1 : kTierCh2); }

std::string channel_id(const std::string& file_id, int channel) {
  return file_id + "/ch" + std::to_string(channel + 1);
}

std::size_t decimated_width(const Settings& s, int sample_rate) {
  return samples_per_segment(sample_rate, s.segment_sec) / s.downsample;
}

StftParams stft_params(const Settings& s) {
  StftParams p;
  p.log_power = s.log_power;
  return p;
}

// Copies the settings that shape preprocessed data.
void copy_preprocessing(const Settings& from, Settings& to) {
  to.segment_sec = from.segment_sec;
  to.downsample = from.downsample;
  to.target_dbfs = from.target_dbfs;
  to.normalize = from.normalize;
  to.log_power = from.log_power;
}

bool same_preprocessing(const Settings& a, const Settings& b) {
  return a.segment_sec == b.segment_sec && a.downsample == b.downsample && a.target_dbfs == b.target_dbfs &&
         a.normalize == b.normalize && a.log_power == b.log_power;
}

// Four-class rows carry both channels. Recurrent rows interleave the two
// channels step by step so every time step sees both microphones.
nn::Tensor waveform_rows(const nn::ModelSpec& spec, const SegmentMatrix& a, const SegmentMatrix* b) {
  const std::size_t n = a.n_segments;
  const std::size_t w = a.samples_per_segment;
  if (b == nullptr) {
    return nn::Tensor({n, w}, a.data);
  }
  if (b->n_segments != n || b->samples_per_segment != w) {
    throw Error(ErrorCode::ShapeMismatch, "channel segment matrices differ in shape");
  }
  const std::size_t width = 2 * w;
  nn::Tensor rows({n, width});
  for (std::size_t i = 0; i < n; ++i) {
    double* dst = rows.data.data() + i * width;
    const auto ra = a.row(i);
    const auto rb = b->row(i);
    if (spec.kind == nn::ModelKind::Rnn) {
      const auto half = static_cast<std::size_t>(spec.step_width / 2);
      for (std::size_t t = 0; t < static_cast<std::size_t>(spec.steps); ++t) {
        std::copy_n(ra.begin() + static_cast<std::ptrdiff_t>(t * half), half, dst + 2 * t * half);
        std::copy_n(rb.begin() + static_cast<std::ptrdiff_t>(t * half), half, dst + (2 * t + 1) * half);
      }
    } else {
      std::copy(ra.begin(), ra.end(), dst);
      std::copy(rb.begin(), rb.end(), dst + w);
    }
  }
  return rows;
}

nn::Tensor spectrogram_rows(const FeatureArray& a, const FeatureArray* b) {
  const std::size_t n = a.dims[0];
  const std::size_t plane = std::size_t{a.dims[1]} * a.dims[2];
  const std::size_t channels = b ? 2 : 1;
  if (b && b->dims != a.dims) throw Error(ErrorCode::ShapeMismatch, "channel spectrograms differ in shape");
  nn::Tensor rows({n, channels * plane});
  for (std::size_t i = 0; i < n; ++i) {
    double* dst = rows.data.data() + i * channels * plane;
    std::copy_n(a.values.begin() + static_cast<std::ptrdiff_t>(i * plane), plane, dst);
    if (b) std::copy_n(b->values.begin() + static_cast<std::ptrdiff_t>(i * plane), plane, dst + plane);
  }
  return rows;
}

nn::Tensor rows_for_file(const nn::ModelSpec& spec, int classes, const std::array<AlignedDataset, 2>& ch,
                         const Settings& settings, int channel) {
  if (spec.kind == nn::ModelKind::Cnn) {
    const auto params = stft_params(settings);
    std::array<FeatureArray, 2> feats;
    for (int k = 0; k < 2; ++k) {
      const auto& seg = ch[static_cast<std::size_t>(k)].segments;
      feats[static_cast<std::size_t>(k)] = spectrogram_stack(seg.data, seg.samples_per_segment, seg.effective_rate, params);
    }
    return classes == 4 ? spectrogram_rows(feats[0], &feats[1]) : spectrogram_rows(feats[static_cast<std::size_t>(channel)], nullptr);
  }
  return classes == 4 ? waveform_rows(spec, ch[0].segments, &ch[1].segments)
                      : waveform_rows(spec, ch[static_cast<std::size_t>(channel)].segments, nullptr);
}

// Greedy run-length conversion of a binary vector into S/N intervals.
void append_intervals(IntervalTable& table, const std::vector<int>& speech, const std::string& tier,
                      double segment_sec) {
  std::size_t start = 0;
  for (std::size_t i = 1; i <= speech.size(); ++i) {
    if (i == speech.size() || speech[i] != speech[start]) {
      table.rows.push_back({static_cast<double>(start) * segment_sec, tier,
                            std::string(speech[start] ? kTextSpeech : kTextNonSpeech),
                            static_cast<double>(i) * segment_sec});
      start = i;
    }
  }
}

}  // namespace

std::vector<fs::path> normalize_files(const Settings& settings, const std::vector<fs::path>& inputs,
                                      const fs::path& out_dir) {
  if (inputs.empty()) throw Error(ErrorCode::Usage, "normalize needs at least one input file");
  ensure_dir(out_dir);
  std::vector<fs::path> outputs;
  for (const auto& in : inputs) {
    const auto clip = normalize_to_dbfs(read_wav(in), {settings.target_dbfs});
    const auto out = out_dir / in.filename();
    if (fs::exists(out) && fs::equivalent(out, in)) {
      throw Error(ErrorCode::Usage, "normalize would overwrite its input " + in.string());
    }
    write_wav(clip, out);
    outputs.push_back(out);
  }
  return outputs;
}

std::vector<CorpusEntry> synth(const Settings& settings, const fs::path& out_dir) {
  CorpusSpec spec;
  spec.n_files = settings.n_files;
  spec.duration = settings.duration;
  spec.speech_fraction = settings.speech_fraction;
  spec.noise_dbfs = settings.noise_dbfs;
  spec.crosstalk_db = settings.crosstalk_db;
  spec.seed = settings.seed;
  spec.segment_duration = settings.segment_sec;
  return synth_corpus(spec, out_dir);
}

std::array<AlignedDataset, 2> load_channels(const Settings& settings, const fs::path& wav, const fs::path& csv,
                                            const std::string& file_id) {
  auto clip = read_wav(wav);
  if (clip.channels.size() != 2) {
    throw Error(ErrorCode::UnsupportedFormat, wav.string() + ": expected two channels, one per speaker");
  }
  if (settings.normalize) clip = normalize_to_dbfs(clip, {settings.target_dbfs});
  const auto table = clean_intervals(read_label_csv(csv.string())).table;

  std::array<AlignedDataset, 2> out;
  for (int k = 0; k < 2; ++k) {
    auto segments = downsample_segments(
        segment_channel(clip.channels[static_cast<std::size_t>(k)], clip.sample_rate, settings.segment_sec),
        settings.downsample);
    auto labels = intervals_to_labels(table, tier_of(k), segments.n_segments, settings.segment_sec);
    out[static_cast<std::size_t>(k)] = align(std::move(segments), std::move(labels), channel_id(file_id, k));
  }
  return out;
}

Prepared prepare(const Settings& settings, const fs::path& data_dir, const fs::path& out_dir,
                 const LineFn& progress) {
  if (!fs::is_directory(data_dir)) throw Error(ErrorCode::Io, "not a directory: " + data_dir.string());
  std::vector<fs::path> wavs;
  for (const auto& e : fs::directory_iterator(data_dir)) {
    if (e.is_regular_file() && e.path().extension() == ".wav") wavs.push_back(e.path());
  }
  std::sort(wavs.begin(), wavs.end());

  Prepared prepared;
  prepared.dir = out_dir;
  prepared.settings = settings;
  const bool want_features = nn::parse_model_kind(settings.model.substr(0, settings.model.find('-'))) == nn::ModelKind::Cnn;
  FeatureCache cache;
  cache.params = stft_params(settings);

  for (const auto& wav : wavs) {
    auto csv = wav;
    csv.replace_extension(".csv");
    if (!fs::exists(csv)) {
      log_warning("skipping " + wav.string() + ": no matching label file");
      continue;
    }
    const std::string id = wav.stem().string();
    const auto channels = load_channels(settings, wav, csv, id);
    PreparedEntry entry;
    entry.file_id = id;
    entry.wav = fs::absolute(wav);
    entry.csv = fs::absolute(csv);
    entry.sample_rate = static_cast<int>(std::lround(channels[0].segments.effective_rate * static_cast<double>(settings.downsample)));
    entry.n_segments = channels[0].segments.n_segments;
    for (int k = 0; k < 2; ++k) {
      const auto& labels = channels[static_cast<std::size_t>(k)].labels.classes;
      entry.speech_fraction[static_cast<std::size_t>(k)] =
          labels.empty() ? 0.0 : static_cast<double>(std::count(labels.begin(), labels.end(), 1)) / static_cast<double>(labels.size());
      if (want_features) {
        const auto& seg = channels[static_cast<std::size_t>(k)].segments;
        cache.entries.emplace(channel_id(id, k), spectrogram_stack(seg.data, seg.samples_per_segment,
                                                                   seg.effective_rate, cache.params));
      }
    }
    if (!prepared.entries.empty() && prepared.entries.front().sample_rate != entry.sample_rate) {
      throw Error(ErrorCode::InvalidArgument, "all files must share one sample rate");
    }
    if (progress) progress(id + "\t" + std::to_string(entry.n_segments) + " segments");
    prepared.entries.push_back(std::move(entry));
  }
  if (prepared.entries.empty()) throw Error(ErrorCode::InvalidArgument, "no wav/csv pairs in " + data_dir.string());

  std::vector<std::string> ids;
  for (const auto& e : prepared.entries) ids.push_back(e.file_id);
  prepared.split = split_files(ids, settings.seed);

  ensure_dir(out_dir);
  std::ostringstream manifest;
  manifest << "file_id\twav\tcsv\tsample_rate\tn_segments\tspeech_ch1\tspeech_ch2\n";
  for (const auto& e : prepared.entries) {
    manifest << e.file_id << '\t' << e.wav.string() << '\t' << e.csv.string() << '\t' << e.sample_rate << '\t'
             << e.n_segments << '\t' << e.speech_fraction[0] << '\t' << e.speech_fraction[1] << '\n';
  }
  write_text(out_dir / kManifest, manifest.str());

  std::ostringstream split;
  split << "file_id\tsplit\n";
  for (const auto& id : prepared.split.train) split << id << "\ttrain\n";
  for (const auto& id : prepared.split.validation) split << id << "\tvalidation\n";
  for (const auto& id : prepared.split.test) split << id << "\ttest\n";
  write_text(out_dir / kSplit, split.str());

  std::string conf;
  const auto config = settings.to_config();
  for (const auto& [k, v] : config.values()) conf += k + '=' + v + '\n';
  write_text(out_dir / kPrepareConf, conf);

  if (want_features) {
    cache_write(cache, out_dir / kFeatures);
    prepared.has_features = true;
  } else {
    std::error_code ec;
    fs::remove(out_dir / kFeatures, ec);
  }
  return prepared;
}

Prepared load_prepared(const fs::path& dir) {
  Prepared p;
  p.dir = dir;
  p.settings = Settings::from_config(Config::load(dir / kPrepareConf));
  for (const auto& row : read_tsv(dir / kManifest)) {
    if (row.size() != 7) throw Error(ErrorCode::Malformed, (dir / kManifest).string() + ": expected 7 columns");
    PreparedEntry e;
    e.file_id = row[0];
    e.wav = row[1];
    e.csv = row[2];
    e.sample_rate = field_number<int>(row[3], dir / kManifest);
    e.n_segments = field_number<std::size_t>(row[4], dir / kManifest);
    e.speech_fraction = {std::stod(row[5]), std::stod(row[6])};
    p.entries.push_back(std::move(e));
  }
  p.split.seed = p.settings.seed;
  for (const auto& row : read_tsv(dir / kSplit)) {
    if (row.size() != 2) throw Error(ErrorCode::Malformed, (dir / kSplit).string() + ": expected 2 columns");
    if (row[1] == "train") p.split.train.push_back(row[0]);
    else if (row[1] == "validation") p.split.validation.push_back(row[0]);
    else if (row[1] == "test") p.split.test.push_back(row[0]);
    else throw Error(ErrorCode::Malformed, (dir / kSplit).string() + ": unknown split '" + row[1] + "'");
  }
  p.has_features = fs::exists(dir / kFeatures);
  if (p.entries.empty()) throw Error(ErrorCode::Malformed, dir.string() + ": empty manifest");
  return p;
}

nn::ModelSpec model_spec_for(const Settings& s, std::size_t segment_width, std::array<int, 2> spectrogram_shape) {
  // Accept both bare kinds (rnn) and catalog names (rnn-3x150, mlp-300-50).
  const auto dash = s.model.find('-');
  const auto kind = nn::parse_model_kind(s.model.substr(0, dash));
  std::vector<int> widths = s.hidden;
  int layers = s.lstm_layers;
  int cells = s.lstm_cells;
  if (dash != std::string::npos) {
    const auto tail = s.model.substr(dash + 1);
    try {
      if (kind == nn::ModelKind::Rnn) {
        const auto x = tail.find('x');
        if (x == std::string::npos) throw std::invalid_argument("rnn");
        layers = std::stoi(tail.substr(0, x));
        cells = std::stoi(tail.substr(x + 1));
      } else {
        widths.clear();
        std::istringstream parts(tail);
        for (std::string w; std::getline(parts, w, '-');) widths.push_back(std::stoi(w));
      }
    } catch (const std::exception&) {
      throw Error(ErrorCode::Usage, "cannot parse model name '" + s.model + "'");
    }
  }

  const int n_out = s.classes == 4 ? 4 : 1;
  const int channels = s.classes == 4 ? 2 : 1;
  const int width = static_cast<int>(segment_width);
  nn::ModelSpec spec;
  switch (kind) {
    case nn::ModelKind::Slp:
      spec = nn::ModelSpec::slp(channels * width, widths.empty() ? 100 : widths.front(), n_out);
      if (widths.size() > 1) throw Error(ErrorCode::Usage, "slp takes a single hidden width");
      break;
    case nn::ModelKind::Mlp:
      spec = nn::ModelSpec::mlp(channels * width, widths.empty() ? std::vector<int>{100, 50} : widths, n_out);
      break;
    case nn::ModelKind::Rnn:
      spec = nn::ModelSpec::rnn(channels * width, s.steps, layers, cells, n_out);
      if (s.steps > 0) spec.step_width = channels * (width / s.steps);
      break;
    case nn::ModelKind::Cnn:
      spec = default_cnn({channels, spectrogram_shape[0], spectrogram_shape[1]}, n_out);
      if (!widths.empty()) spec.hidden = widths;
      break;
  }
  spec.dropout = s.dropout;
  try {
    spec.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::Usage, e.what());
  }
  return spec;
}

std::vector<TrainItem> build_items(const Prepared& prepared, const nn::ModelSpec& spec, int classes,
                                   const std::vector<std::string>& file_ids, const FeatureCache* features) {
  std::vector<TrainItem> items;
  for (const auto& id : file_ids) {
    const auto it = std::find_if(prepared.entries.begin(), prepared.entries.end(),
                                 [&](const PreparedEntry& e) { return e.file_id == id; });
    if (it == prepared.entries.end()) throw Error(ErrorCode::Malformed, "split names unknown file '" + id + "'");

    std::array<LabelVector, 2> labels;
    std::array<nn::Tensor, 2> inputs;
    nn::Tensor joint;
    if (spec.kind == nn::ModelKind::Cnn) {
      if (features == nullptr) throw Error(ErrorCode::Usage, "cnn models need a prepared spectrogram cache");
      const auto table = clean_intervals(read_label_csv(it->csv.string())).table;
      std::array<const FeatureArray*, 2> feats{};
      for (int k = 0; k < 2; ++k) {
        const auto f = features->entries.find(channel_id(id, k));
        if (f == features->entries.end()) throw Error(ErrorCode::Malformed, "feature cache lacks " + channel_id(id, k));
        feats[static_cast<std::size_t>(k)] = &f->second;
        labels[static_cast<std::size_t>(k)] = intervals_to_labels(table, tier_of(k), f->second.dims[0], prepared.settings.segment_sec);
      }
      if (classes == 4) {
        joint = spectrogram_rows(*feats[0], feats[1]);
      } else {
        for (int k = 0; k < 2; ++k) inputs[static_cast<std::size_t>(k)] = spectrogram_rows(*feats[static_cast<std::size_t>(k)], nullptr);
      }
    } else {
      const auto ch = load_channels(prepared.settings, it->wav, it->csv, id);
      for (int k = 0; k < 2; ++k) labels[static_cast<std::size_t>(k)] = ch[static_cast<std::size_t>(k)].labels;
      if (classes == 4) {
        joint = waveform_rows(spec, ch[0].segments, &ch[1].segments);
      } else {
        for (int k = 0; k < 2; ++k) inputs[static_cast<std::size_t>(k)] = waveform_rows(spec, ch[static_cast<std::size_t>(k)].segments, nullptr);
      }
    }

    if (classes == 4) {
      items.push_back({id, std::move(joint), merge_four_class(labels[0], labels[1]).classes});
    } else {
      for (int k = 0; k < 2; ++k) {
        items.push_back({id, std::move(inputs[static_cast<std::size_t>(k)]), labels[static_cast<std::size_t>(k)].classes});
      }
    }
  }
  return items;
}

TrainReport train(const Settings& settings, const fs::path& prepared_dir, const fs::path& out_dir,
                  const LineFn& progress) {
  const auto prepared = load_prepared(prepared_dir);
  Settings s = settings;
  copy_preprocessing(prepared.settings, s);

  const std::size_t width = decimated_width(s, prepared.entries.front().sample_rate);
  const auto stft = stft_params(s);
  const auto spec = model_spec_for(s, width, {static_cast<int>(stft.height()), static_cast<int>(stft.frames(width))});

  std::optional<FeatureCache> features;
  if (spec.kind == nn::ModelKind::Cnn) {
    if (!prepared.has_features) {
      throw Error(ErrorCode::Usage, "prepared data has no spectrogram cache; run prepare with --model cnn");
    }
    features = cache_read(prepared_dir / kFeatures);
    if (!(features->params == stft)) throw Error(ErrorCode::Malformed, "spectrogram cache parameters do not match");
  }
  const FeatureCache* cache = features ? &*features : nullptr;

  DatasetSplits data;
  data.train = build_items(prepared, spec, s.classes, prepared.split.train, cache);
  data.validation = build_items(prepared, spec, s.classes, prepared.split.validation, cache);
  data.test = build_items(prepared, spec, s.classes, prepared.split.test, cache);

  Hyperparams hp;
  hp.batch_size = s.batch;
  hp.epochs = s.epochs;
  hp.learning_rate = s.lr;
  hp.dropout = s.dropout;
  hp.eval_every = s.eval_every;
  hp.seed = s.seed;
  if (progress) progress("training " + spec.serialize().substr(0, spec.serialize().find('\n')) + " on " +
                         std::to_string(data.train.size()) + " items");
  auto result = diar::train(spec, data, hp, progress);

  ensure_dir(out_dir);
  nn::Checkpoint checkpoint{spec, std::move(result.params), {}};
  const auto config = s.to_config();
  for (const auto& [k, v] : config.values()) checkpoint.metadata[k] = v;
  nn::save_checkpoint(checkpoint, out_dir / "model.dknn");
  write_text(out_dir / "train.log", format_train_log(result.report));
  write_text(out_dir / "summary.txt", format_train_summary(result.report));
  return result.report;
}

std::vector<FileAccuracy> evaluate(const fs::path& model_path, const fs::path& prepared_dir, std::string_view split) {
  const auto model = nn::load_checkpoint(model_path);
  const auto s = Settings::from_config([&] {
    Config c;
    for (const auto& [k, v] : model.metadata) c.set(k, v);
    return c;
  }());
  const auto prepared = load_prepared(prepared_dir);
  if (!same_preprocessing(s, prepared.settings)) {
    throw Error(ErrorCode::Usage, "model and prepared data were preprocessed with different settings");
  }
  const std::vector<std::string>* ids = nullptr;
  if (split == "train") ids = &prepared.split.train;
  else if (split == "validation") ids = &prepared.split.validation;
  else if (split == "test") ids = &prepared.split.test;
  else throw Error(ErrorCode::Usage, "unknown split '" + std::string(split) + "'");
  if (ids->empty()) throw Error(ErrorCode::InvalidArgument, "split '" + std::string(split) + "' is empty");

  std::optional<FeatureCache> features;
  if (model.spec.kind == nn::ModelKind::Cnn) features = cache_read(prepared_dir / kFeatures);
  const auto items = build_items(prepared, model.spec, s.classes, *ids, features ? &*features : nullptr);
  return evaluate_files(model.spec, model.params, items);
}

std::vector<LabelVector> predict_file(const nn::Checkpoint& model, const fs::path& wav) {
  Config c;
  for (const auto& [k, v] : model.metadata) c.set(k, v);
  const auto s = Settings::from_config(c);

  auto clip = read_wav(wav);
  if (clip.channels.size() != 2) {
    throw Error(ErrorCode::UnsupportedFormat, wav.string() + ": expected two channels, one per speaker");
  }
  if (s.normalize) clip = normalize_to_dbfs(clip, {s.target_dbfs});
  std::array<AlignedDataset, 2> ch;
  for (int k = 0; k < 2; ++k) {
    auto seg = downsample_segments(segment_channel(clip.channels[static_cast<std::size_t>(k)], clip.sample_rate, s.segment_sec), s.downsample);
    LabelVector empty{std::vector<int>(seg.n_segments, 0), LabelScheme::Binary, s.segment_sec};
    ch[static_cast<std::size_t>(k)] = {std::move(seg), std::move(empty), channel_id(wav.stem().string(), k)};
  }
  std::vector<LabelVector> out;
  if (s.classes == 4) {
    auto pred = predict_segments(model.spec, model.params, rows_for_file(model.spec, 4, ch, s, 0));
    pred.segment_duration = s.segment_sec;
    out.push_back(std::move(pred));
  } else {
    for (int k = 0; k < 2; ++k) {
      auto pred = predict_segments(model.spec, model.params, rows_for_file(model.spec, 2, ch, s, k));
      pred.segment_duration = s.segment_sec;
      out.push_back(std::move(pred));
    }
  }
  return out;
}

void predict(const fs::path& model_path, const fs::path& wav, const fs::path& out_csv) {
  const auto model = nn::load_checkpoint(model_path);
  const auto preds = predict_file(model, wav);
  IntervalTable table;
  const double seg = preds.front().segment_duration;
  if (preds.size() == 1) {
    std::array<std::vector<int>, 2> speech;
    for (int c : preds.front().classes) {
      speech[0].push_back(c & 1);
      speech[1].push_back((c >> 1) & 1);
    }
    append_intervals(table, speech[0], tier_of(0), seg);
    append_intervals(table, speech[1], tier_of(1), seg);
  } else {
    append_intervals(table, preds[0].classes, tier_of(0), seg);
    append_intervals(table, preds[1].classes, tier_of(1), seg);
  }
  std::stable_sort(table.rows.begin(), table.rows.end(),
                   [](const IntervalRow& a, const IntervalRow& b) { return a.tmin < b.tmin; });
  write_text(out_csv, format_label_csv(table));
}

void plot(const fs::path& model_path, const fs::path& wav, const fs::path& csv, int channel, PlotRange range,
          const fs::path& out_svg) {
  if (channel != 1 && channel != 2) throw Error(ErrorCode::Usage, "channel must be 1 or 2");
  const auto model = nn::load_checkpoint(model_path);
  auto preds = predict_file(model, wav);
  const auto table = clean_intervals(read_label_csv(csv.string())).table;
  const double seg = preds.front().segment_duration;
  const std::size_t n = preds.front().size();
  LabelVector truth;
  LabelVector pred;
  if (preds.size() == 1) {
    truth = merge_four_class(intervals_to_labels(table, tier_of(0), n, seg), intervals_to_labels(table, tier_of(1), n, seg));
    pred = std::move(preds.front());
  } else {
    truth = intervals_to_labels(table, tier_of(channel - 1), n, seg);
    pred = std::move(preds[static_cast<std::size_t>(channel - 1)]);
  }
  render_comparison(truth, pred, out_svg, range);
}

}  // namespace diar::pipeline
