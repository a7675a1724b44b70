// wavprom/synth/generator.cc

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

#include "wavprom/synth/generator.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "wavprom/base/error.h"
#include "wavprom/base/parallel.h"
#include "wavprom/base/rng.h"
#include "wavprom/corpus/types.h"
#include "wavprom/corpus/wav.h"

namespace wavprom {

namespace {

using nlohmann::json;

constexpr double kBoundaryTauMs = 150.0;
constexpr int kNumHarmonics = 5;

// Fixed token list; a small vocabulary keeps lexical-embedding fixtures easy
// to cover.
const char* kVocab[] = {
    "the",   "a",     "boy",    "girl",  "story", "read",  "tree",   "river",
    "house", "dog",   "cat",    "bird",  "was",   "is",    "ran",    "walked",
    "said",  "small", "big",    "old",   "new",   "happy", "sad",    "fast",
    "slow",  "morning", "night", "school", "book", "word",  "green",  "blue",
    "red",   "tall",  "short",  "friend", "garden", "road", "cloud",  "rain",
    "sun",   "moon",  "window", "door",  "water", "stone", "bridge", "field"};
constexpr int kVocabSize = static_cast<int>(sizeof(kVocab) / sizeof(kVocab[0]));

struct WordDraw {
  std::string token;
  double duration_ms = 0.0;
  double amplitude = 0.0;
  double excursion = 0.0;
  double pause_before_ms = 0.0;
  double pause_after_ms = 0.0;
  double f0_start_hz = 0.0;
};

// Maps a standard-normal x into [lo, hi] geometrically; tails clip at the
// range so z-scores stay well behaved.
double GeomMap(double x, double lo, double hi) {
  double q = std::clamp((x + 2.0) / 4.0, 0.0, 1.0);
  return lo * std::pow(hi / lo, q);
}

std::vector<double> SynthesizeWord(const WordDraw& w, double sr) {
  const int n = static_cast<int>(std::llround(w.duration_ms * sr / 1000.0));
  std::vector<double> out(static_cast<size_t>(n), 0.0);
  // Harmonic amplitudes 1/h, normalized so the envelope peak equals the drawn
  // amplitude.
  double norm = 0.0;
  for (int h = 1; h <= kNumHarmonics; ++h) norm += 1.0 / h;

  const double f_end = w.f0_start_hz * (1.0 + w.excursion);
  double phase = 0.0;
  for (int i = 0; i < n; ++i) {
    double frac = n > 1 ? static_cast<double>(i) / (n - 1) : 0.0;
    double f0 = w.f0_start_hz + (f_end - w.f0_start_hz) * frac;  // linear ramp
    phase += f0 / sr;
    double s = 0.0;
    for (int h = 1; h <= kNumHarmonics; ++h)
      s += std::sin(2.0 * M_PI * h * phase) / h;
    double envelope = 0.5 * (1.0 - std::cos(2.0 * M_PI * frac));  // raised cosine
    out[i] = w.amplitude * envelope * s / norm;
  }
  return out;
}

void ValidateConfig(const SynthConfig& c) {
  WAVPROM_REQUIRE(c.num_speakers >= 1, "synth: num_speakers must be >= 1");
  WAVPROM_REQUIRE(c.utterances_per_speaker >= 1,
                  "synth: utterances_per_speaker must be >= 1");
  WAVPROM_REQUIRE(c.words_min >= 1 && c.words_min <= c.words_max,
                  "synth: words range invalid");
  WAVPROM_REQUIRE(c.base_f0_min_hz > 0 && c.base_f0_min_hz <= c.base_f0_max_hz,
                  "synth: base_f0 range invalid");
  WAVPROM_REQUIRE(c.duration_min_ms > 0 && c.duration_min_ms <= c.duration_max_ms,
                  "synth: duration range invalid");
  WAVPROM_REQUIRE(c.amplitude_min > 0 && c.amplitude_min <= c.amplitude_max &&
                      c.amplitude_max <= 1.0,
                  "synth: amplitude range invalid");
  WAVPROM_REQUIRE(c.excursion_min >= 0 && c.excursion_min <= c.excursion_max,
                  "synth: excursion range invalid");
  WAVPROM_REQUIRE(c.pause_min_ms >= 0 && c.pause_min_ms <= c.pause_max_ms,
                  "synth: pause range invalid");
  WAVPROM_REQUIRE(c.boundary_pause_min_ms <= c.boundary_pause_max_ms,
                  "synth: boundary pause range invalid");
  WAVPROM_REQUIRE(c.boundary_prob >= 0.0 && c.boundary_prob <= 1.0,
                  "synth: boundary_prob must be in [0,1]");
  WAVPROM_REQUIRE(c.noise_level >= 0.0, "synth: noise_level must be >= 0");
  WAVPROM_REQUIRE(c.num_raters >= 1, "synth: num_raters must be >= 1");
}

}  // namespace

std::vector<double> PlantedProminence(const std::vector<double>& duration_ms,
                                      const std::vector<double>& amplitude,
                                      const std::vector<double>& excursion) {
  const size_t n = duration_ms.size();
  WAVPROM_REQUIRE(amplitude.size() == n && excursion.size() == n,
                  "planted rule: feature length mismatch");
  auto zscores = [n](const std::vector<double>& v) {
    std::vector<double> z(n, 0.0);
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= static_cast<double>(n);
    double sd = std::sqrt(var);
    // Zero-variance guard, with headroom for accumulation rounding on
    // identical values.
    if (sd <= 1e-9 * std::max(1.0, std::fabs(mean))) return z;
    for (size_t i = 0; i < n; ++i) z[i] = (v[i] - mean) / sd;
    return z;
  };
  std::vector<double> zd = zscores(duration_ms), za = zscores(amplitude),
                      ze = zscores(excursion);
  std::vector<double> score(n);
  for (size_t i = 0; i < n; ++i)
    score[i] = 1.0 / (1.0 + std::exp(-(zd[i] + za[i] + ze[i])));
  return score;
}

double PlantedBoundary(double pause_after_ms) {
  return pause_after_ms / (pause_after_ms + kBoundaryTauMs);
}

int QuantizeToVotes(double score, int num_raters) {
  double scaled = score * num_raters;
  int votes = static_cast<int>(scaled >= 0 ? std::floor(scaled + 0.5)
                                           : std::ceil(scaled - 0.5));
  return std::clamp(votes, 0, num_raters);
}

GeneratedCorpus GenerateCorpus(const SynthConfig& config, const std::string& out_dir) {
  ValidateConfig(config);
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(fs::path(out_dir) / "wav", ec);
  if (ec) ThrowValidation("cannot create output directory ", out_dir, ": ", ec.message());

  const double sr = kSampleRateHz;
  Rng master(config.seed);

  std::vector<double> speaker_f0(config.num_speakers);
  for (int s = 0; s < config.num_speakers; ++s) {
    Rng r = master.Fork(0x5350ULL + static_cast<uint64_t>(s));
    speaker_f0[s] = r.Uniform(config.base_f0_min_hz, config.base_f0_max_hz);
  }

  const int total_utts = config.num_speakers * config.utterances_per_speaker;
  struct UttResult {
    std::string utterance_id;
    std::string speaker_id;
    std::vector<WordDraw> words;
    std::vector<double> word_start_s, word_end_s;
    std::vector<double> prom_score, bound_score;
    std::vector<int> prom_votes, bound_votes;
  };
  std::vector<UttResult> results(total_utts);

  ParallelFor(total_utts, config.jobs, [&](int idx) {
    const int spk = idx / config.utterances_per_speaker;
    const int utt = idx % config.utterances_per_speaker;
    Rng rng = master.Fork(0x55AAULL + static_cast<uint64_t>(idx));

    UttResult& res = results[idx];
    res.speaker_id = StrCat("spk", spk < 10 ? "0" : "", spk);
    res.utterance_id = StrCat(res.speaker_id, "_u", utt < 10 ? "0" : "", utt);

    const int num_words =
        static_cast<int>(rng.UniformInt(config.words_min, config.words_max));
    const double load = config.latent_loading;
    const double resid = std::sqrt(std::max(0.0, 1.0 - load * load));

    res.words.resize(num_words);
    for (int i = 0; i < num_words; ++i) {
      WordDraw& w = res.words[i];
      w.token = kVocab[rng.UniformInt(0, kVocabSize - 1)];
      double u = rng.Gaussian();
      double xd = load * u + resid * rng.Gaussian();
      double xa = load * u + resid * rng.Gaussian();
      double xe = load * u + resid * rng.Gaussian();
      w.duration_ms = GeomMap(xd, config.duration_min_ms, config.duration_max_ms);
      w.amplitude = GeomMap(xa, config.amplitude_min, config.amplitude_max);
      w.excursion = GeomMap(xe, config.excursion_min, config.excursion_max);
      w.f0_start_hz = speaker_f0[spk] * rng.Uniform(0.96, 1.04);

      bool is_boundary =
          (i == num_words - 1) || rng.Uniform() < config.boundary_prob;
      w.pause_after_ms =
          is_boundary
              ? rng.Uniform(config.boundary_pause_min_ms, config.boundary_pause_max_ms)
              : rng.Uniform(config.pause_min_ms, config.pause_max_ms);
      if (is_boundary) w.duration_ms *= config.boundary_lengthening;
    }
    res.words[0].pause_before_ms = rng.Uniform(40.0, 100.0);
    for (int i = 1; i < num_words; ++i)
      res.words[i].pause_before_ms = res.words[i - 1].pause_after_ms;

    // Labels from the realized per-word parameters.
    std::vector<double> d(num_words), a(num_words), e(num_words);
    for (int i = 0; i < num_words; ++i) {
      d[i] = res.words[i].duration_ms;
      a[i] = res.words[i].amplitude;
      e[i] = res.words[i].excursion;
    }
    res.prom_score = PlantedProminence(d, a, e);
    res.bound_score.resize(num_words);
    res.prom_votes.resize(num_words);
    res.bound_votes.resize(num_words);
    for (int i = 0; i < num_words; ++i) {
      res.bound_score[i] = PlantedBoundary(res.words[i].pause_after_ms);
      res.prom_votes[i] = QuantizeToVotes(res.prom_score[i], config.num_raters);
      res.bound_votes[i] = QuantizeToVotes(res.bound_score[i], config.num_raters);
    }

    // Assemble the utterance waveform: [pause][word][pause][word]...[pause].
    std::vector<double> wave;
    res.word_start_s.resize(num_words);
    res.word_end_s.resize(num_words);
    for (int i = 0; i < num_words; ++i) {
      int pause_n = static_cast<int>(
          std::llround(res.words[i].pause_before_ms * sr / 1000.0));
      wave.insert(wave.end(), pause_n, 0.0);
      res.word_start_s[i] = static_cast<double>(wave.size()) / sr;
      auto word_wave = SynthesizeWord(res.words[i], sr);
      wave.insert(wave.end(), word_wave.begin(), word_wave.end());
      res.word_end_s[i] = static_cast<double>(wave.size()) / sr;
    }
    int tail_n = static_cast<int>(
        std::llround(res.words[num_words - 1].pause_after_ms * sr / 1000.0));
    wave.insert(wave.end(), tail_n, 0.0);

    if (config.noise_level > 0.0)
      for (double& s : wave) s += config.noise_level * rng.Gaussian();

    WriteWav((fs::path(out_dir) / "wav" / (res.utterance_id + ".wav")).string(),
             wave, sr);
  });

  // Manifest rows in (speaker, utterance, word) order.
  GeneratedCorpus out;
  out.manifest_path = (fs::path(out_dir) / "manifest.jsonl").string();
  out.oracle_path = (fs::path(out_dir) / "oracle.json").string();

  std::ofstream manifest(out.manifest_path, std::ios::trunc);
  if (!manifest) ThrowError("cannot write manifest: ", out.manifest_path);
  json oracle_words = json::array();
  for (const auto& res : results) {
    ++out.num_utterances;
    for (size_t i = 0; i < res.words.size(); ++i) {
      const WordDraw& w = res.words[i];
      json row = {
          {"utterance_id", res.utterance_id},
          {"speaker_id", res.speaker_id},
          {"word_index", static_cast<int>(i)},
          {"token", w.token},
          {"audio_path", StrCat("wav/", res.utterance_id, ".wav")},
          {"word_start_s", res.word_start_s[i]},
          {"word_end_s", res.word_end_s[i]},
          {"pause_before_ms", w.pause_before_ms},
          {"prominence_votes", res.prom_votes[i]},
          {"boundary_votes", res.bound_votes[i]},
          {"num_raters", config.num_raters},
      };
      manifest << row.dump() << "\n";
      ++out.num_words;

      oracle_words.push_back({
          {"utterance_id", res.utterance_id},
          {"word_index", static_cast<int>(i)},
          {"duration_ms", w.duration_ms},
          {"amplitude", w.amplitude},
          {"excursion", w.excursion},
          {"pause_after_ms", w.pause_after_ms},
          {"base_f0_hz", w.f0_start_hz},
          {"prominence_score", res.prom_score[i]},
          {"boundary_score", res.bound_score[i]},
          {"prominence_votes", res.prom_votes[i]},
          {"boundary_votes", res.bound_votes[i]},
      });
    }
  }
  manifest.close();

  json oracle = {
      {"rule",
       {{"prominence", "sigmoid(z(duration_ms) + z(amplitude) + z(excursion)), "
                       "z-scores within utterance, zero variance -> z = 0"},
        {"boundary", "pause_after_ms / (pause_after_ms + 150)"},
        {"quantization", "round half away from zero to votes out of num_raters"},
        {"num_raters", config.num_raters}}},
      {"seed", config.seed},
      {"words", oracle_words},
  };
  std::ofstream oracle_out(out.oracle_path, std::ios::trunc);
  if (!oracle_out) ThrowError("cannot write oracle: ", out.oracle_path);
  oracle_out << oracle.dump(2) << "\n";

  return out;
}

}  // namespace wavprom
