// wavprom/tests/corpus-test.cc

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "wavprom/base/error.h"
#include "wavprom/base/rng.h"
#include "wavprom/corpus/manifest.h"
#include "wavprom/corpus/types.h"
#include "wavprom/corpus/wav.h"

using namespace wavprom;
namespace fs = std::filesystem;

TEST_CASE("vote aggregation is exact rational division") {
  CHECK(AggregateVotes({7, 0, 7}).prominence_degree == 1.0);
  CHECK(AggregateVotes({0, 0, 7}).prominence_degree == 0.0);
  CHECK(AggregateVotes({4, 2, 7}).prominence_degree == 4.0 / 7.0);
  CHECK(AggregateVotes({4, 2, 7}).boundary_degree == 2.0 / 7.0);

  // Round trip: votes = round(degree * num_raters), for every vote count.
  for (int v = 0; v <= 7; ++v) {
    ProsodyLabels labels = AggregateVotes({v, 7 - v, 7});
    CHECK(static_cast<int>(std::llround(labels.prominence_degree * 7)) == v);
    CHECK(static_cast<int>(std::llround(labels.boundary_degree * 7)) == 7 - v);
    CHECK(labels.prominence_degree >= 0.0);
    CHECK(labels.prominence_degree <= 1.0);
  }
}

TEST_CASE("vote validation names the offending field") {
  CHECK_THROWS_WITH_AS(AggregateVotes({9, 0, 7}),
                       doctest::Contains("prominence_votes"), ValidationError);
  CHECK_THROWS_WITH_AS(AggregateVotes({0, -1, 7}),
                       doctest::Contains("boundary_votes"), ValidationError);
  CHECK_THROWS_WITH_AS(AggregateVotes({0, 0, 0}), doctest::Contains("num_raters"),
                       ValidationError);
}

TEST_CASE("prepare_segment pads to the fixed length") {
  std::vector<double> word(16000, 0.25);
  auto out = PrepareSegment(word, {}, 0.0, 28660);
  REQUIRE(static_cast<int>(out.size()) == 28660);
  for (int i = 0; i < 16000; ++i) CHECK(out[i] == 0.25);
  for (int i = 16000; i < 28660; ++i) REQUIRE(out[i] == 0.0);  // 12,660 zeros
}

TEST_CASE("prepare_segment caps the pause at 500 ms") {
  std::vector<double> word(100, 1.0);
  std::vector<double> pause_audio(20000);
  for (size_t i = 0; i < pause_audio.size(); ++i)
    pause_audio[i] = static_cast<double>(i);
  // 800 ms requested -> exactly 8,000 samples included, the most recent ones.
  auto out = PrepareSegment(word, pause_audio, 800.0, 28660);
  REQUIRE(static_cast<int>(out.size()) == 28660);
  CHECK(out[0] == pause_audio[20000 - 8000]);
  CHECK(out[7999] == pause_audio[19999]);
  CHECK(out[8000] == 1.0);
  CHECK(out[8100] == 0.0);
}

TEST_CASE("prepare_segment identity case") {
  Rng rng(3);
  std::vector<double> word(28660);
  for (auto& s : word) s = rng.Uniform(-1, 1);
  auto out = PrepareSegment(word, {}, 0.0, 28660);
  CHECK(out == word);
}

TEST_CASE("prepare_segment truncates the word tail when oversized") {
  std::vector<double> word(30000, 0.5);
  auto out = PrepareSegment(word, {}, 100.0, 28660);
  REQUIRE(static_cast<int>(out.size()) == 28660);
  int pause_len = 1600;  // 100 ms at 16 kHz
  for (int i = 0; i < pause_len; ++i) CHECK(out[i] == 0.0);
  for (int i = pause_len; i < 28660; ++i) REQUIRE(out[i] == 0.5);
}

TEST_CASE("prepare_segment fills missing pause audio with zeros") {
  std::vector<double> word(10, 1.0);
  std::vector<double> pause_audio(100, 0.7);  // only 100 of 1600 available
  auto out = PrepareSegment(word, pause_audio, 100.0, 2000);
  for (int i = 0; i < 1500; ++i) REQUIRE(out[i] == 0.0);
  for (int i = 1500; i < 1600; ++i) REQUIRE(out[i] == 0.7);
  CHECK(out[1600] == 1.0);
}

TEST_CASE("prepare_segment rejects empty words") {
  CHECK_THROWS_AS(PrepareSegment({}, {}, 0.0, 100), ValidationError);
}

TEST_CASE("wav round trip") {
  Rng rng(5);
  std::vector<double> samples(4000);
  for (auto& s : samples) s = rng.Uniform(-0.9, 0.9);
  fs::path dir = fs::temp_directory_path() / "wavprom-wav-test";
  fs::create_directories(dir);
  std::string path = (dir / "roundtrip.wav").string();
  WriteWav(path, samples);
  auto back = ReadWav(path);
  REQUIRE(back.size() == samples.size());
  for (size_t i = 0; i < samples.size(); ++i)
    CHECK(std::fabs(back[i] - samples[i]) < 1.0 / 32768.0 + 1e-9);
}

namespace {

// Writes a small manifest + wav fixture and returns the manifest path.
std::string WriteFixture(const fs::path& dir, int prominence_votes = 3) {
  fs::create_directories(dir / "wav");
  // One utterance, 3 words at known offsets in a 2 s file.
  std::vector<double> wave(32000, 0.0);
  Rng rng(17);
  auto put_word = [&](int start, int len) {
    for (int i = 0; i < len; ++i)
      wave[start + i] = 0.4 * std::sin(2.0 * M_PI * 220.0 * i / 16000.0);
  };
  put_word(1600, 3200);   // word 0: 0.1 - 0.3 s
  put_word(6400, 3200);   // word 1: 0.4 - 0.6 s
  put_word(12800, 4800);  // word 2: 0.8 - 1.1 s
  WriteWav((dir / "wav" / "u0.wav").string(), wave);

  std::ofstream m(dir / "manifest.jsonl");
  auto row = [&](int idx, double start, double end, double pause, int pv) {
    m << "{\"utterance_id\":\"u0\",\"speaker_id\":\"s0\",\"word_index\":" << idx
      << ",\"token\":\"w" << idx << "\",\"audio_path\":\"wav/u0.wav\""
      << ",\"word_start_s\":" << start << ",\"word_end_s\":" << end
      << ",\"pause_before_ms\":" << pause << ",\"prominence_votes\":" << pv
      << ",\"boundary_votes\":2,\"num_raters\":7}\n";
  };
  row(0, 0.1, 0.3, 100.0, prominence_votes);
  row(1, 0.4, 0.6, 100.0, 5);
  row(2, 0.8, 1.1, 200.0, 0);
  m.close();
  return (dir / "manifest.jsonl").string();
}

}  // namespace

TEST_CASE("manifest loads utterances with prepared segments") {
  fs::path dir = fs::temp_directory_path() / "wavprom-manifest-test";
  fs::remove_all(dir);
  std::string path = WriteFixture(dir);

  ManifestOptions opt;
  opt.max_segment_samples = 8000;
  Corpus corpus = LoadManifest(path, opt);
  REQUIRE(corpus.utterances.size() == 1);
  const Utterance& u = corpus.utterances[0];
  CHECK(u.utterance_id == "u0");
  CHECK(u.speaker_id == "s0");
  REQUIRE(u.NumWords() == 3);
  REQUIRE(u.labels.size() == 3);
  CHECK(u.labels[0].prominence_degree == 3.0 / 7.0);
  CHECK(u.labels[2].prominence_degree == 0.0);
  for (const auto& w : u.words) {
    REQUIRE(static_cast<int>(w.samples.size()) == 8000);
    for (double s : w.samples) REQUIRE(std::isfinite(s));
  }
  // Word 1: 100 ms pause -> 1600 samples of (near) silence, then signal.
  const auto& seg = u.words[1].samples;
  double pause_energy = 0.0, word_energy = 0.0;
  for (int i = 0; i < 1600; ++i) pause_energy += seg[i] * seg[i];
  for (int i = 1600; i < 4800; ++i) word_energy += seg[i] * seg[i];
  CHECK(word_energy > 100.0 * pause_energy);
}

TEST_CASE("manifest auto length picks the corpus maximum") {
  fs::path dir = fs::temp_directory_path() / "wavprom-manifest-auto";
  fs::remove_all(dir);
  std::string path = WriteFixture(dir);
  ManifestOptions opt;
  opt.max_segment_samples = 0;
  Corpus corpus = LoadManifest(path, opt);
  // Longest word: 0.3 s = 4800 samples plus its 200 ms (3200-sample) pause.
  CHECK(corpus.max_segment_samples == 8000);
}

TEST_CASE("manifest validation errors carry line numbers") {
  fs::path dir = fs::temp_directory_path() / "wavprom-manifest-bad";
  fs::remove_all(dir);
  std::string path = WriteFixture(dir, /*prominence_votes=*/9);
  CHECK_THROWS_WITH_AS(LoadManifest(path), doctest::Contains("line 1"),
                       ValidationError);
}

TEST_CASE("empty manifest loads as empty corpus") {
  fs::path dir = fs::temp_directory_path() / "wavprom-manifest-empty";
  fs::create_directories(dir);
  std::ofstream(dir / "manifest.jsonl").close();
  Corpus corpus = LoadManifest((dir / "manifest.jsonl").string());
  CHECK(corpus.utterances.empty());
}

TEST_CASE("manifest rejects missing audio and bad ordering") {
  fs::path dir = fs::temp_directory_path() / "wavprom-manifest-misc";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream m(dir / "missing.jsonl");
    m << "{\"utterance_id\":\"u0\",\"speaker_id\":\"s0\",\"word_index\":0,"
         "\"token\":\"w\",\"audio_path\":\"wav/nope.wav\",\"word_start_s\":0.0,"
         "\"word_end_s\":0.5,\"pause_before_ms\":0,\"prominence_votes\":1,"
         "\"boundary_votes\":1,\"num_raters\":7}\n";
  }
  CHECK_THROWS_AS(LoadManifest((dir / "missing.jsonl").string()), ValidationError);

  std::string good = WriteFixture(dir / "good");
  {
    std::ifstream in(good);
    std::string l0, l1, l2;
    std::getline(in, l0);
    std::getline(in, l1);
    std::getline(in, l2);
    std::ofstream out(dir / "outoforder.jsonl");
    out << l1 << "\n" << l0 << "\n" << l2 << "\n";
  }
  fs::create_directories(dir / "wav");
  fs::copy_file(dir / "good" / "wav" / "u0.wav", dir / "wav" / "u0.wav",
                fs::copy_options::overwrite_existing);
  CHECK_THROWS_WITH_AS(LoadManifest((dir / "outoforder.jsonl").string()),
                       doctest::Contains("word_index"), ValidationError);
}

TEST_CASE("manifest rejects wrong sample rate") {
  fs::path dir = fs::temp_directory_path() / "wavprom-manifest-rate";
  fs::remove_all(dir);
  fs::create_directories(dir / "wav");
  std::vector<double> wave(8000, 0.1);
  WriteWav((dir / "wav" / "u0.wav").string(), wave, 8000.0);
  std::ofstream m(dir / "manifest.jsonl");
  m << "{\"utterance_id\":\"u0\",\"speaker_id\":\"s0\",\"word_index\":0,"
       "\"token\":\"w\",\"audio_path\":\"wav/u0.wav\",\"word_start_s\":0.0,"
       "\"word_end_s\":0.5,\"pause_before_ms\":0,\"prominence_votes\":1,"
       "\"boundary_votes\":1,\"num_raters\":7}\n";
  m.close();
  CHECK_THROWS_WITH_AS(LoadManifest((dir / "manifest.jsonl").string()),
                       doctest::Contains("sample rate"), ValidationError);
}
