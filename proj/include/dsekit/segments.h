// Copyright 2026 The dsekit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef DSEKIT_SEGMENTS_H_
#define DSEKIT_SEGMENTS_H_

#include <filesystem>
#include <string>
#include <vector>

#include "dsekit/spectral.h"

namespace dsekit {

struct Segment {
  std::string speaker_id;
  double start_s = 0.0;
  double end_s = 0.0;

  bool operator==(const Segment&) const = default;
};

// Speaker-tagged time intervals. Stored on disk as JSON lines:
//   {"speaker_id": "spk0", "start_s": 0.25, "end_s": 1.5}
class SegmentList {
 public:
  SegmentList() = default;
  // Throws std::invalid_argument unless 0 <= start < end for every entry and
  // each speaker's entries are sorted and non-overlapping.
  explicit SegmentList(std::vector<Segment> entries);

  const std::vector<Segment>& Entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  bool HasSpeaker(const std::string& speaker_id) const;

  static SegmentList Parse(const std::string& jsonl);
  static SegmentList Read(const std::filesystem::path& path);
  std::string ToJsonLines() const;
  void Write(const std::filesystem::path& path) const;

 private:
  std::vector<Segment> entries_;
};

// Zeroes every sample outside the speaker's segments; samples inside are
// copied unchanged. Segments reaching past the end of the waveform are
// clipped and a message is appended to warnings (if given). Throws if the
// list is non-empty and has no entry for the speaker.
Waveform MaskByTimestamps(const Waveform& wave, const SegmentList& segments,
                          const std::string& speaker_id,
                          std::vector<std::string>* warnings = nullptr);

}  // namespace dsekit

#endif  // DSEKIT_SEGMENTS_H_
