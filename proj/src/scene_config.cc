// Copyright 2026 The dsekit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "dsekit/scene_config.h"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace dsekit {

namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> SplitList(const std::string& value) {
  std::vector<std::string> items;
  std::stringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) items.push_back(Trim(item));
  return items;
}

double ToDouble(const std::string& s) {
  if (s == "inf" || s == "+inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    throw std::invalid_argument("expected a number, got '" + s + "'");
  return v;
}

std::uint64_t ToUnsigned(const std::string& s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw std::invalid_argument("expected a non-negative integer, got '" + s +
                                "'");
  return v;
}

bool ToBool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw std::invalid_argument("expected true/false, got '" + s + "'");
}

std::string FormatDouble(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

template <typename T, typename Fn>
std::string JoinList(const std::vector<T>& items, Fn&& format) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += format(items[i]);
  }
  return out;
}

}  // namespace

SceneSpec ParseSceneDocument(const std::string& text) {
  SceneSpec spec;
  // Per-speaker lists are expanded once num_speakers is known.
  std::optional<std::vector<std::string>> kinds, distances, gains;

  using Setter = std::function<void(const std::string&)>;
  const std::map<std::string, Setter> setters = {
      {"num_speakers", [&](const std::string& v) { spec.num_speakers = ToUnsigned(v); }},
      {"num_mics", [&](const std::string& v) { spec.num_mics = ToUnsigned(v); }},
      {"target_index", [&](const std::string& v) { spec.target_index = ToUnsigned(v); }},
      {"source_kinds", [&](const std::string& v) { kinds = SplitList(v); }},
      {"distance_m", [&](const std::string& v) { distances = SplitList(v); }},
      {"direct_gain", [&](const std::string& v) { gains = SplitList(v); }},
      {"speed_of_sound_mps", [&](const std::string& v) { spec.speed_of_sound = ToDouble(v); }},
      {"reverb_tail_frames", [&](const std::string& v) { spec.reverb.tail_frames = ToUnsigned(v); }},
      {"reverb_decay_per_frame", [&](const std::string& v) { spec.reverb.decay_rate = ToDouble(v); }},
      {"reverb_level", [&](const std::string& v) { spec.reverb.level = ToDouble(v); }},
      {"reverb_tap_seed", [&](const std::string& v) { spec.reverb.tap_seed = ToUnsigned(v); }},
      {"noise_snr_db", [&](const std::string& v) { spec.noise_snr_db = ToDouble(v); }},
      {"leakage_db", [&](const std::string& v) { spec.leakage_db = ToDouble(v); }},
      {"residual_interference_db", [&](const std::string& v) { spec.residual_interference_db = ToDouble(v); }},
      {"partition_subbands", [&](const std::string& v) { spec.partition_subbands = ToBool(v); }},
      {"duration_s", [&](const std::string& v) { spec.duration_s = ToDouble(v); }},
      {"seed", [&](const std::string& v) { spec.seed = ToUnsigned(v); }},
      {"sample_rate_hz", [&](const std::string& v) { spec.stft.sample_rate = ToDouble(v); }},
      {"stft_window_ms", [&](const std::string& v) { spec.stft.window_ms = ToDouble(v); }},
      {"stft_hop_ms", [&](const std::string& v) { spec.stft.hop_ms = ToDouble(v); }},
      {"stft_fft_size", [&](const std::string& v) { spec.stft.fft_size = ToUnsigned(v); }},
      {"stft_window", [&](const std::string& v) { spec.stft.window = ParseWindowKind(v); }},
  };

  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "scene config line " + std::to_string(line_no);
    if (eq == std::string::npos)
      throw std::invalid_argument(where + ": expected 'key = value'");
    const std::string key = Trim(line.substr(0, eq));
    const std::string value = Trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end())
      throw std::invalid_argument(where + ": unknown key '" + key + "'");
    try {
      it->second(value);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(where + " (" + key + "): " + e.what());
    }
  }

  auto expand = [&](const std::optional<std::vector<std::string>>& items,
                    const char* key, auto convert, auto& target) {
    if (!items) {
      if (target.size() == 1 && spec.num_speakers > 1)
        target.assign(spec.num_speakers, target.front());
      return;
    }
    if (items->size() != 1 && items->size() != spec.num_speakers)
      throw std::invalid_argument(std::string("scene config: ") + key +
                                  " needs 1 or num_speakers values");
    target.clear();
    for (std::size_t n = 0; n < spec.num_speakers; ++n)
      target.push_back(convert(items->size() == 1 ? items->front() : (*items)[n]));
  };
  expand(kinds, "source_kinds", ParseSourceKind, spec.source_kinds);
  expand(distances, "distance_m", ToDouble, spec.distance_m);
  expand(gains, "direct_gain", ToDouble, spec.direct_gain);
  return spec;
}

SceneSpec ReadSceneDocument(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path.string() + ": cannot open scene config");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseSceneDocument(buffer.str());
}

std::string FormatSceneDocument(const SceneSpec& spec) {
  std::ostringstream out;
  out << "num_speakers = " << spec.num_speakers << "\n"
      << "num_mics = " << spec.num_mics << "\n"
      << "target_index = " << spec.target_index << "\n"
      << "source_kinds = "
      << JoinList(spec.source_kinds, [](SourceKind k) { return ToString(k); })
      << "\n"
      << "distance_m = " << JoinList(spec.distance_m, FormatDouble) << "\n"
      << "direct_gain = " << JoinList(spec.direct_gain, FormatDouble) << "\n"
      << "speed_of_sound_mps = " << FormatDouble(spec.speed_of_sound) << "\n"
      << "reverb_tail_frames = " << spec.reverb.tail_frames << "\n"
      << "reverb_decay_per_frame = " << FormatDouble(spec.reverb.decay_rate) << "\n"
      << "reverb_level = " << FormatDouble(spec.reverb.level) << "\n"
      << "reverb_tap_seed = " << spec.reverb.tap_seed << "\n"
      << "noise_snr_db = " << FormatDouble(spec.noise_snr_db) << "\n"
      << "leakage_db = " << FormatDouble(spec.leakage_db) << "\n"
      << "residual_interference_db = " << FormatDouble(spec.residual_interference_db) << "\n"
      << "partition_subbands = " << (spec.partition_subbands ? "true" : "false") << "\n"
      << "duration_s = " << FormatDouble(spec.duration_s) << "\n"
      << "seed = " << spec.seed << "\n"
      << "sample_rate_hz = " << FormatDouble(spec.stft.sample_rate) << "\n"
      << "stft_window_ms = " << FormatDouble(spec.stft.window_ms) << "\n"
      << "stft_hop_ms = " << FormatDouble(spec.stft.hop_ms) << "\n";
  if (spec.stft.fft_size) out << "stft_fft_size = " << *spec.stft.fft_size << "\n";
  out << "stft_window = " << ToString(spec.stft.window) << "\n";
  return out.str();
}

}  // namespace dsekit
