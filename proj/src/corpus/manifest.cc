// wavprom/corpus/manifest.cc

// Copyright 2025  Wavprom Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "wavprom/corpus/manifest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <unordered_map>

#include <json.hpp>

#include "wavprom/base/error.h"
#include "wavprom/base/parallel.h"
#include "wavprom/corpus/wav.h"

namespace wavprom {

namespace {

using nlohmann::json;

struct Row {
  int line = 0;
  std::string utterance_id;
  std::string speaker_id;
  int word_index = 0;
  std::string token;
  std::string audio_path;
  double word_start_s = 0.0;
  double word_end_s = 0.0;
  double pause_before_ms = 0.0;
  RaterVotes votes;
};

template <typename T>
T GetField(const json& j, const char* key, int line) {
  auto it = j.find(key);
  if (it == j.end())
    ThrowValidation("manifest line ", line, ": missing field '", key, "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    ThrowValidation("manifest line ", line, ": field '", key, "' has wrong type");
  }
}

Row ParseRow(const std::string& text, int line) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    ThrowValidation("manifest line ", line, ": malformed JSON (", e.what(), ")");
  }
  Row r;
  r.line = line;
  r.utterance_id = GetField<std::string>(j, "utterance_id", line);
  r.speaker_id = GetField<std::string>(j, "speaker_id", line);
  r.word_index = GetField<int>(j, "word_index", line);
  r.token = GetField<std::string>(j, "token", line);
  r.audio_path = GetField<std::string>(j, "audio_path", line);
  r.word_start_s = GetField<double>(j, "word_start_s", line);
  r.word_end_s = GetField<double>(j, "word_end_s", line);
  r.pause_before_ms = GetField<double>(j, "pause_before_ms", line);
  r.votes.prominence_votes = GetField<int>(j, "prominence_votes", line);
  r.votes.boundary_votes = GetField<int>(j, "boundary_votes", line);
  r.votes.num_raters = GetField<int>(j, "num_raters", line);
  if (r.word_end_s <= r.word_start_s)
    ThrowValidation("manifest line ", line, ": word_end_s <= word_start_s");
  if (r.pause_before_ms < 0.0)
    ThrowValidation("manifest line ", line, ": negative pause_before_ms");
  return r;
}

int ToSample(double seconds) {
  return static_cast<int>(std::llround(seconds * kSampleRateHz));
}

}  // namespace

Corpus LoadManifest(const std::string& path, const ManifestOptions& options) {
  std::ifstream in(path);
  if (!in) ThrowValidation("cannot open manifest: ", path);
  const auto base_dir = std::filesystem::path(path).parent_path();

  std::vector<std::vector<Row>> groups;  // rows grouped per utterance, in order
  std::unordered_map<std::string, size_t> group_index;
  std::string text;
  int line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.empty() || text.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    Row r = ParseRow(text, line);
    auto it = group_index.find(r.utterance_id);
    if (it == group_index.end()) {
      group_index.emplace(r.utterance_id, groups.size());
      groups.push_back({std::move(r)});
    } else {
      if (it->second != groups.size() - 1)
        ThrowValidation("manifest line ", line, ": utterance '", r.utterance_id,
                        "' is not contiguous");
      groups[it->second].push_back(std::move(r));
    }
  }

  Corpus corpus;
  if (groups.empty()) {
    std::cerr << "warning: manifest is empty: " << path << "\n";
    corpus.max_segment_samples = options.max_segment_samples > 0
                                     ? options.max_segment_samples
                                     : kDefaultMaxSegmentSamples;
    return corpus;
  }

  // Validate per-utterance ordering and vote ranges up front so errors carry
  // line numbers.
  for (auto& rows : groups) {
    for (size_t i = 0; i < rows.size(); ++i) {
      const Row& r = rows[i];
      if (r.word_index != static_cast<int>(i))
        ThrowValidation("manifest line ", r.line, ": word_index ", r.word_index,
                        " out of order (expected ", i, ")");
      if (r.speaker_id != rows[0].speaker_id)
        ThrowValidation("manifest line ", r.line,
                        ": speaker_id differs within utterance '", r.utterance_id, "'");
      try {
        (void)AggregateVotes(r.votes);
      } catch (const ValidationError& e) {
        ThrowValidation("manifest line ", r.line, ": ", e.what());
      }
    }
  }

  // Load each referenced audio file once.
  std::map<std::string, std::vector<double>> audio;
  for (const auto& rows : groups) {
    for (const Row& r : rows) {
      std::filesystem::path p(r.audio_path);
      if (p.is_relative()) p = base_dir / p;
      std::string resolved = p.string();
      if (audio.count(resolved)) continue;
      try {
        audio.emplace(resolved, ReadWav(resolved));
      } catch (const Error& e) {
        ThrowValidation("manifest line ", r.line, ": ", e.what());
      }
    }
  }
  auto resolve = [&](const std::string& rel) -> const std::vector<double>& {
    std::filesystem::path p(rel);
    if (p.is_relative()) p = base_dir / p;
    return audio.at(p.string());
  };

  // Determine the fixed segment length; 0 means corpus maximum.
  int max_samples = options.max_segment_samples;
  if (max_samples <= 0) {
    max_samples = 1;
    for (const auto& rows : groups) {
      for (const Row& r : rows) {
        const auto& wave = resolve(r.audio_path);
        int start = ToSample(r.word_start_s);
        int end = std::min<int>(ToSample(r.word_end_s), static_cast<int>(wave.size()));
        if (start >= end)
          ThrowValidation("manifest line ", r.line, ": word span outside audio file");
        double included_ms = std::min(r.pause_before_ms, kPauseCapMs);
        int pause_len = static_cast<int>(std::llround(included_ms * kSampleRateHz / 1000.0));
        max_samples = std::max(max_samples, pause_len + (end - start));
      }
    }
  }

  corpus.max_segment_samples = max_samples;
  corpus.utterances.resize(groups.size());

  ParallelFor(static_cast<int>(groups.size()), options.jobs, [&](int g) {
    const auto& rows = groups[g];
    Utterance& utt = corpus.utterances[g];
    utt.utterance_id = rows[0].utterance_id;
    utt.speaker_id = rows[0].speaker_id;
    for (const Row& r : rows) {
      const auto& wave = resolve(r.audio_path);
      int start = ToSample(r.word_start_s);
      int end = std::min<int>(ToSample(r.word_end_s), static_cast<int>(wave.size()));
      if (start < 0 || start >= end)
        ThrowValidation("manifest line ", r.line, ": word span outside audio file");
      std::vector<double> word(wave.begin() + start, wave.begin() + end);
      std::vector<double> pause_audio(wave.begin(), wave.begin() + start);
      WordSegment seg;
      seg.samples = PrepareSegment(word, pause_audio, r.pause_before_ms, max_samples);
      if (options.normalize_amplitude) {
        double peak = 0.0;
        for (double s : seg.samples) peak = std::max(peak, std::fabs(s));
        if (peak > 0.0)
          for (double& s : seg.samples) s /= peak;
      }
      seg.token = r.token;
      seg.pause_before_ms = r.pause_before_ms;
      seg.start_s = r.word_start_s;
      seg.end_s = r.word_end_s;
      utt.words.push_back(std::move(seg));
      utt.labels.push_back(AggregateVotes(r.votes));
    }
  });

  return corpus;
}

}  // namespace wavprom
