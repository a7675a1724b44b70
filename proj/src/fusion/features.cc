// wavprom/fusion/features.cc

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

#include "wavprom/fusion/features.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "wavprom/base/error.h"

namespace wavprom {

WordFeatureTable LoadFeatureTable(const std::string& path, int expected_dim) {
  std::ifstream in(path);
  if (!in) ThrowValidation("cannot open feature table: ", path);
  std::string line;
  if (!std::getline(in, line)) ThrowValidation("feature table is empty: ", path);

  // Header: utterance_id,word_index,f1..fD
  {
    std::stringstream ss(line);
    std::string col;
    int cols = 0;
    while (std::getline(ss, col, ',')) ++cols;
    if (cols != expected_dim + 2)
      ThrowValidation("feature table ", path, ": header has ", cols - 2,
                      " feature columns, expected ", expected_dim);
  }

  WordFeatureTable table;
  table.dim = expected_dim;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    if (!std::getline(ss, cell, ','))
      ThrowValidation("feature table ", path, " line ", line_no, ": empty row");
    std::string utt_id = cell;
    if (!std::getline(ss, cell, ','))
      ThrowValidation("feature table ", path, " line ", line_no,
                      ": missing word_index");
    int word_index = 0;
    try {
      word_index = std::stoi(cell);
    } catch (...) {
      ThrowValidation("feature table ", path, " line ", line_no,
                      ": bad word_index '", cell, "'");
    }
    Vector values;
    values.reserve(expected_dim);
    while (std::getline(ss, cell, ',')) {
      try {
        values.push_back(std::stod(cell));
      } catch (...) {
        ThrowValidation("feature table word (", utt_id, ", ", word_index,
                        "): bad value '", cell, "'");
      }
    }
    if (static_cast<int>(values.size()) != expected_dim)
      ThrowValidation("feature table word (", utt_id, ", ", word_index, "): has ",
                      values.size(), " dims, expected ", expected_dim);
    table.rows[{utt_id, word_index}] = std::move(values);
  }
  return table;
}

void WriteFeatureTable(const WordFeatureTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) ThrowError("cannot write feature table: ", path);
  out << "utterance_id,word_index";
  for (int i = 1; i <= table.dim; ++i) out << ",f" << i;
  out << "\n";
  out.precision(12);
  for (const auto& [key, values] : table.rows) {
    out << key.first << "," << key.second;
    for (double v : values) out << "," << v;
    out << "\n";
  }
}

void ValidateCoverage(const WordFeatureTable& table, const Corpus& corpus) {
  for (const auto& utt : corpus.utterances)
    for (int w = 0; w < utt.NumWords(); ++w)
      if (table.Find(utt.utterance_id, w) == nullptr)
        ThrowValidation("feature table missing word (", utt.utterance_id, ", ", w, ")");
}

FeatureStats ComputeFeatureStats(
    const WordFeatureTable& table,
    const std::vector<std::pair<std::string, int>>& train_words) {
  WAVPROM_REQUIRE(!train_words.empty(), "feature stats: no training words");
  const int dim = table.dim;
  FeatureStats stats;
  stats.mean.assign(dim, 0.0);
  stats.sd.assign(dim, 0.0);
  for (const auto& [utt, idx] : train_words) {
    const Vector* v = table.Find(utt, idx);
    if (v == nullptr)
      ThrowValidation("feature table missing word (", utt, ", ", idx, ")");
    for (int i = 0; i < dim; ++i) stats.mean[i] += (*v)[i];
  }
  const double n = static_cast<double>(train_words.size());
  for (int i = 0; i < dim; ++i) stats.mean[i] /= n;
  for (const auto& [utt, idx] : train_words) {
    const Vector& v = *table.Find(utt, idx);
    for (int i = 0; i < dim; ++i) {
      double d = v[i] - stats.mean[i];
      stats.sd[i] += d * d;
    }
  }
  for (int i = 0; i < dim; ++i) {
    stats.sd[i] = std::sqrt(stats.sd[i] / n);
    if (stats.sd[i] < 1e-12) stats.sd[i] = 1.0;  // constant dim: pass through
  }
  return stats;
}

Vector Standardize(const Vector& raw, const FeatureStats& stats) {
  Vector out(raw.size());
  for (size_t i = 0; i < raw.size(); ++i)
    out[i] = (raw[i] - stats.mean[i]) / stats.sd[i];
  return out;
}

Vector FuseWordVector(const Vector& cnn_embed, const Vector* acoustic,
                      const Vector* lexical) {
  Vector out;
  out.reserve(cnn_embed.size() + (acoustic ? acoustic->size() : 0) +
              (lexical ? lexical->size() : 0));
  out.insert(out.end(), cnn_embed.begin(), cnn_embed.end());
  if (acoustic != nullptr) out.insert(out.end(), acoustic->begin(), acoustic->end());
  if (lexical != nullptr) out.insert(out.end(), lexical->begin(), lexical->end());
  for (double v : out)
    if (!std::isfinite(v)) ThrowValidation("fuse: non-finite input component");
  return out;
}

namespace {

double Rms(const double* x, int n) {
  double e = 0.0;
  for (int i = 0; i < n; ++i) e += x[i] * x[i];
  return std::sqrt(e / std::max(1, n));
}

// Autocorrelation F0 estimate over lags for 80..400 Hz; 0 when unvoiced-ish.
double EstimateF0(const double* x, int n, double sr) {
  const int min_lag = static_cast<int>(sr / 400.0);
  const int max_lag = std::min(n - 1, static_cast<int>(sr / 80.0));
  if (max_lag <= min_lag) return 0.0;
  double e0 = 0.0;
  for (int i = 0; i < n; ++i) e0 += x[i] * x[i];
  if (e0 < 1e-12) return 0.0;
  double best = 0.0;
  int best_lag = 0;
  for (int lag = min_lag; lag <= max_lag; ++lag) {
    double ac = 0.0;
    for (int i = 0; i + lag < n; ++i) ac += x[i] * x[i + lag];
    if (ac > best) {
      best = ac;
      best_lag = lag;
    }
  }
  if (best_lag == 0 || best < 0.3 * e0) return 0.0;
  return sr / best_lag;
}

double GoertzelLogEnergy(const double* x, int n, double freq_hz, double sr) {
  const double w = 2.0 * M_PI * freq_hz / sr;
  const double coeff = 2.0 * std::cos(w);
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    s0 = x[i] + coeff * s1 - s2;
    s2 = s1;
    s1 = s0;
  }
  double power = s1 * s1 + s2 * s2 - coeff * s1 * s2;
  return std::log(power / std::max(1, n) + 1e-10);
}

}  // namespace

WordFeatureTable ComputeStandinFeatures(const Corpus& corpus, int dim) {
  WAVPROM_REQUIRE(dim == 34 || dim == 27, "stand-in features: dim must be 34 or 27");
  const double sr = kSampleRateHz;
  WordFeatureTable table;
  table.dim = dim;

  // 17 mel-spaced band centers between 60 Hz and 4 kHz.
  Vector band_hz(17);
  auto mel = [](double f) { return 2595.0 * std::log10(1.0 + f / 700.0); };
  auto hz = [](double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); };
  for (int i = 0; i < 17; ++i)
    band_hz[i] = hz(mel(60.0) + (mel(4000.0) - mel(60.0)) * i / 16.0);

  for (const auto& utt : corpus.utterances) {
    for (int wi = 0; wi < utt.NumWords(); ++wi) {
      const WordSegment& seg = utt.words[wi];
      // Locate the word inside the prepared window: pause prefix, then word.
      // A tiny window can truncate the word entirely; clamp so at least one
      // in-bounds sample remains.
      double included_ms = std::min(seg.pause_before_ms, kPauseCapMs);
      int pause_len = static_cast<int>(std::llround(included_ms * sr / 1000.0));
      pause_len = std::min<int>(pause_len, static_cast<int>(seg.samples.size()) - 1);
      pause_len = std::max(pause_len, 0);
      int word_len = std::min<int>(
          static_cast<int>(std::llround((seg.end_s - seg.start_s) * sr)),
          static_cast<int>(seg.samples.size()) - pause_len);
      word_len = std::max(word_len, 1);
      const double* word = seg.samples.data() + pause_len;

      double duration_s = seg.end_s - seg.start_s;
      double pause_after_ms =
          wi + 1 < utt.NumWords() ? utt.words[wi + 1].pause_before_ms : 0.0;

      double peak = 0.0, mean_abs = 0.0;
      for (int i = 0; i < word_len; ++i) {
        peak = std::max(peak, std::fabs(word[i]));
        mean_abs += std::fabs(word[i]);
      }
      mean_abs /= word_len;
      double rms = Rms(word, word_len);

      int zc = 0;
      for (int i = 1; i < word_len; ++i)
        if ((word[i] >= 0.0) != (word[i - 1] >= 0.0)) ++zc;
      double zcr = static_cast<double>(zc) / word_len;

      double centroid = 0.0, total_abs = 0.0;
      int peak_at = 0;
      double env_peak = 0.0;
      for (int i = 0; i < word_len; ++i) {
        double a = std::fabs(word[i]);
        centroid += a * i;
        total_abs += a;
        if (a > env_peak) {
          env_peak = a;
          peak_at = i;
        }
      }
      centroid = total_abs > 0.0 ? centroid / (total_abs * word_len) : 0.5;
      double attack_frac = static_cast<double>(peak_at) / word_len;

      const int third = std::max(1, word_len / 3);
      const int slice = std::min(third, 1024);
      double f0_first = EstimateF0(word, slice, sr);
      double f0_mid = EstimateF0(word + third, std::min(slice, word_len - third), sr);
      double f0_last =
          EstimateF0(word + std::max(0, word_len - slice), slice, sr);
      double f0_max = std::max({f0_first, f0_mid, f0_last});
      double f0_min = std::min({f0_first, f0_mid, f0_last});
      double f0_slope = duration_s > 0.0 ? (f0_last - f0_first) / duration_s : 0.0;

      Vector f;
      f.reserve(dim);
      if (dim == 34) {
        f = {duration_s,
             std::log(duration_s + 1e-4),
             included_ms / 1000.0,
             std::min(pause_after_ms, kPauseCapMs) / 1000.0,
             rms,
             std::log(rms + 1e-6),
             peak,
             mean_abs,
             rms * rms * word_len / sr,  // energy
             zcr,
             centroid,
             attack_frac,
             f0_first,
             f0_mid,
             f0_last,
             f0_max,
             f0_max - f0_min};
      } else {
        f = {duration_s,
             std::log(duration_s + 1e-4),
             included_ms / 1000.0,
             std::min(pause_after_ms, kPauseCapMs) / 1000.0,
             rms,
             std::log(rms + 1e-6),
             peak,
             zcr,
             centroid,
             f0_slope};
      }
      for (double b : band_hz)
        f.push_back(GoertzelLogEnergy(word, word_len, b, sr));
      if (static_cast<int>(f.size()) != dim)
        ThrowError("stand-in features: internal dimension error");
      table.rows[{utt.utterance_id, wi}] = std::move(f);
    }
  }
  return table;
}

}  // namespace wavprom
