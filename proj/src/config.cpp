// SPDX-License-Identifier: Apache-2.0
#include "diar/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "diar/error.hpp"

namespace diar {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw Error(ErrorCode::Usage, "invalid value '" + std::string(value) + "' for " + std::string(key));
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (value.empty() || ec != std::errc{} || end != value.data() + value.size()) bad_value(key, value);
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
  if (value == "0" || value == "false" || value == "no" || value == "off") return false;
  bad_value(key, value);
}

std::string format_double(double v) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

}  // namespace

Config Config::parse(std::string_view text) {
  Config c;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = trim(text.substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::Usage, "config line " + std::to_string(line_no) + " has no '='");
    }
    c.set(std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))));
  }
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void Config::set(std::string key, std::string value) {
  if (key.empty()) throw Error(ErrorCode::Usage, "empty config key");
  values_[std::move(key)] = std::move(value);
}

void Config::merge(const Config& overrides) {
  for (const auto& [k, v] : overrides.values_) values_[k] = v;
}

std::optional<std::string> Config::get(std::string_view key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

const std::vector<std::string>& settings_keys() {
  static const std::vector<std::string> keys{
      "seed", "segment-sec", "downsample", "target-dbfs", "normalize", "model", "classes", "hidden",
      "lstm-layers", "lstm-cells", "steps", "log-power", "epochs", "batch", "lr", "dropout", "eval-every",
      "n-files", "duration", "speech-fraction", "noise-dbfs", "crosstalk-db"};
  return keys;
}

Settings Settings::from_config(const Config& config) {
  Settings s;
  for (const auto& [key, value] : config.values()) {
    const std::string_view v = value;
    if (key == "seed") s.seed = parse_number<std::uint64_t>(key, v);
    else if (key == "segment-sec") s.segment_sec = parse_number<double>(key, v);
    else if (key == "downsample") s.downsample = parse_number<std::size_t>(key, v);
    else if (key == "target-dbfs") s.target_dbfs = parse_number<double>(key, v);
    else if (key == "normalize") s.normalize = parse_bool(key, v);
    else if (key == "model") s.model = value;
    else if (key == "classes") s.classes = parse_number<int>(key, v);
    else if (key == "hidden") {
      s.hidden.clear();
      std::size_t start = 0;
      while (start <= v.size() && !v.empty()) {
        auto comma = v.find(',', start);
        if (comma == std::string_view::npos) comma = v.size();
        s.hidden.push_back(parse_number<int>(key, trim(v.substr(start, comma - start))));
        start = comma + 1;
      }
    }
    else if (key == "lstm-layers") s.lstm_layers = parse_number<int>(key, v);
    else if (key == "lstm-cells") s.lstm_cells = parse_number<int>(key, v);
    else if (key == "steps") s.steps = parse_number<int>(key, v);
    else if (key == "log-power") s.log_power = parse_bool(key, v);
    else if (key == "epochs") s.epochs = parse_number<std::size_t>(key, v);
    else if (key == "batch") s.batch = parse_number<std::size_t>(key, v);
    else if (key == "lr") s.lr = parse_number<double>(key, v);
    else if (key == "dropout") s.dropout = parse_number<double>(key, v);
    else if (key == "eval-every") s.eval_every = parse_number<std::size_t>(key, v);
    else if (key == "n-files") s.n_files = parse_number<std::size_t>(key, v);
    else if (key == "duration") s.duration = parse_number<double>(key, v);
    else if (key == "speech-fraction") s.speech_fraction = parse_number<double>(key, v);
    else if (key == "noise-dbfs") s.noise_dbfs = parse_number<double>(key, v);
    else if (key == "crosstalk-db") s.crosstalk_db = parse_number<double>(key, v);
    else throw Error(ErrorCode::Usage, "unknown setting '" + key + "'");
  }
  if (s.classes != 2 && s.classes != 4) throw Error(ErrorCode::Usage, "classes must be 2 or 4");
  if (!(s.segment_sec > 0.0)) throw Error(ErrorCode::Usage, "segment-sec must be positive");
  if (s.downsample == 0) throw Error(ErrorCode::Usage, "downsample must be at least 1");
  return s;
}

Config Settings::to_config() const {
  Config c;
  c.set("seed", std::to_string(seed));
  c.set("segment-sec", format_double(segment_sec));
  c.set("downsample", std::to_string(downsample));
  c.set("target-dbfs", format_double(target_dbfs));
  c.set("normalize", normalize ? "true" : "false");
  c.set("model", model);
  c.set("classes", std::to_string(classes));
  std::string h;
  for (int w : hidden) h += (h.empty() ? "" : ",") + std::to_string(w);
  c.set("hidden", h);
  c.set("lstm-layers", std::to_string(lstm_layers));
  c.set("lstm-cells", std::to_string(lstm_cells));
  c.set("steps", std::to_string(steps));
  c.set("log-power", log_power ? "true" : "false");
  c.set("epochs", std::to_string(epochs));
  c.set("batch", std::to_string(batch));
  c.set("lr", format_double(lr));
  c.set("dropout", format_double(dropout));
  c.set("eval-every", std::to_string(eval_every));
  c.set("n-files", std::to_string(n_files));
  c.set("duration", format_double(duration));
  c.set("speech-fraction", format_double(speech_fraction));
  c.set("noise-dbfs", format_double(noise_dbfs));
  c.set("crosstalk-db", format_double(crosstalk_db));
  return c;
}

}  // namespace diar
