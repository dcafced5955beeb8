// Copyright 2026 The dsekit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "dsekit/segments.h"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace dsekit {

using nlohmann::json;

SegmentList::SegmentList(std::vector<Segment> entries)
    : entries_(std::move(entries)) {
  std::map<std::string, double> last_end;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const Segment& s = entries_[i];
    if (!(s.start_s >= 0.0) || !(s.start_s < s.end_s) || !std::isfinite(s.end_s))
      throw std::invalid_argument("segment " + std::to_string(i) + " (" +
                                  s.speaker_id + "): need 0 <= start < end");
    auto it = last_end.find(s.speaker_id);
    if (it != last_end.end() && s.start_s < it->second)
      throw std::invalid_argument(
          "segment " + std::to_string(i) + " (" + s.speaker_id +
          "): overlaps or precedes the speaker's previous segment");
    last_end[s.speaker_id] = s.end_s;
  }
}

bool SegmentList::HasSpeaker(const std::string& speaker_id) const {
  for (const auto& s : entries_)
    if (s.speaker_id == speaker_id) return true;
  return false;
}

SegmentList SegmentList::Parse(const std::string& jsonl) {
  std::vector<Segment> entries;
  std::istringstream in(jsonl);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      entries.push_back({j.at("speaker_id").get<std::string>(),
                         j.at("start_s").get<double>(),
                         j.at("end_s").get<double>()});
    } catch (const json::exception& e) {
      throw std::invalid_argument("segments line " + std::to_string(line_no) +
                                  ": " + e.what());
    }
  }
  return SegmentList(std::move(entries));
}

SegmentList SegmentList::Read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path.string() + ": cannot open segments");
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return Parse(buffer.str());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

std::string SegmentList::ToJsonLines() const {
  std::string out;
  for (const auto& s : entries_) {
    json j;
    j["speaker_id"] = s.speaker_id;
    j["start_s"] = s.start_s;
    j["end_s"] = s.end_s;
    out += j.dump() + "\n";
  }
  return out;
}

void SegmentList::Write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error(path.string() + ": cannot write segments");
  out << ToJsonLines();
}

Waveform MaskByTimestamps(const Waveform& wave, const SegmentList& segments,
                          const std::string& speaker_id,
                          std::vector<std::string>* warnings) {
  if (!segments.empty() && !segments.HasSpeaker(speaker_id))
    throw std::invalid_argument("mask: no segments for speaker '" + speaker_id +
                                "'");
  Waveform out;
  out.sample_rate = wave.sample_rate;
  out.samples.assign(wave.size(), 0.0);
  const std::size_t n = wave.size();
  for (const auto& s : segments.Entries()) {
    if (s.speaker_id != speaker_id) continue;
    const double first = std::round(s.start_s * wave.sample_rate);
    const double last = std::round(s.end_s * wave.sample_rate);
    if (last > static_cast<double>(n) && warnings)
      warnings->push_back("segment [" + std::to_string(s.start_s) + ", " +
                          std::to_string(s.end_s) + ") of " + speaker_id +
                          " extends past the end of the " +
                          std::to_string(wave.DurationSeconds()) +
                          " s waveform; clipped");
    const auto i0 = static_cast<std::size_t>(std::min(first, static_cast<double>(n)));
    const auto i1 = static_cast<std::size_t>(std::min(last, static_cast<double>(n)));
    for (std::size_t i = i0; i < i1; ++i) out.samples[i] = wave.samples[i];
  }
  return out;
}

}  // namespace dsekit
