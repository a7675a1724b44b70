// wavprom/train/checkpoint.cc

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

#include "wavprom/train/checkpoint.h"

#include <cstring>
#include <fstream>

#include <json.hpp>

#include "wavprom/base/error.h"

namespace wavprom {

namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'W', 'A', 'V', 'P', 'R', 'O', 'M', 'C'};
constexpr uint32_t kVersion = 1;

template <typename T>
void WriteRaw(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T ReadRaw(std::ifstream& in, const std::string& path) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) ThrowError("truncated checkpoint: ", path);
  return v;
}

json StatsToJson(const FeatureStats& s) {
  return {{"mean", s.mean}, {"sd", s.sd}};
}

FeatureStats StatsFromJson(const json& j) {
  FeatureStats s;
  s.mean = j.at("mean").get<Vector>();
  s.sd = j.at("sd").get<Vector>();
  return s;
}

}  // namespace

Checkpoint Checkpoint::FromModel(Model* model) {
  Checkpoint ck;
  ck.spec = model->spec();
  model->VisitParams([&](const ParamRef& ref) {
    ck.tensors[ref.name] = Vector(ref.value, ref.value + ref.size);
  });
  return ck;
}

void Checkpoint::ApplyTo(Model* model) const {
  size_t applied = 0;
  model->VisitParams([&](const ParamRef& ref) {
    auto it = tensors.find(ref.name);
    if (it == tensors.end()) ThrowError("checkpoint missing tensor '", ref.name, "'");
    if (static_cast<int64_t>(it->second.size()) != ref.size)
      ThrowError("checkpoint tensor '", ref.name, "' has ", it->second.size(),
                 " values, model expects ", ref.size);
    std::copy(it->second.begin(), it->second.end(), ref.value);
    ++applied;
  });
  if (applied != tensors.size())
    ThrowError("checkpoint has ", tensors.size(), " tensors, model consumed ", applied);
}

std::unique_ptr<Model> Checkpoint::BuildModel() const {
  auto model = std::make_unique<Model>(spec, seed);
  ApplyTo(model.get());
  return model;
}

void Checkpoint::Save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) ThrowError("cannot write checkpoint: ", path);

  json history_json = json::array();
  for (const auto& h : history)
    history_json.push_back(
        {{"epoch", h.epoch}, {"train_loss", h.train_loss}, {"val_loss", h.val_loss}});
  json meta = {
      {"spec", json::parse(ModelSpecToJson(spec))},
      {"history", history_json},
      {"best_epoch", best_epoch},
      {"best_val_loss", best_val_loss},
      {"seed", seed},
  };
  if (!stats_prominence.mean.empty())
    meta["stats_prominence"] = StatsToJson(stats_prominence);
  if (!stats_boundary.mean.empty())
    meta["stats_boundary"] = StatsToJson(stats_boundary);
  const std::string meta_str = meta.dump();

  out.write(kMagic, sizeof(kMagic));
  WriteRaw(out, kVersion);
  WriteRaw(out, static_cast<uint64_t>(meta_str.size()));
  out.write(meta_str.data(), static_cast<std::streamsize>(meta_str.size()));
  WriteRaw(out, static_cast<uint64_t>(tensors.size()));
  for (const auto& [name, values] : tensors) {
    WriteRaw(out, static_cast<uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    WriteRaw(out, static_cast<uint64_t>(values.size()));
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(double)));
  }
  if (!out) ThrowError("short write: ", path);
}

Checkpoint Checkpoint::Load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) ThrowValidation("cannot open checkpoint: ", path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    ThrowValidation("not a checkpoint file: ", path);
  uint32_t version = ReadRaw<uint32_t>(in, path);
  if (version != kVersion)
    ThrowValidation("unsupported checkpoint version ", version, ": ", path);

  uint64_t meta_len = ReadRaw<uint64_t>(in, path);
  std::string meta_str(meta_len, '\0');
  in.read(meta_str.data(), static_cast<std::streamsize>(meta_len));
  if (!in) ThrowError("truncated checkpoint: ", path);

  Checkpoint ck;
  try {
    json meta = json::parse(meta_str);
    ck.spec = ModelSpecFromJson(meta.at("spec").dump());
    for (const auto& h : meta.at("history"))
      ck.history.push_back({h.at("epoch").get<int>(),
                            h.at("train_loss").get<double>(),
                            h.at("val_loss").get<double>()});
    ck.best_epoch = meta.at("best_epoch").get<int>();
    ck.best_val_loss = meta.at("best_val_loss").get<double>();
    ck.seed = meta.at("seed").get<uint64_t>();
    if (meta.contains("stats_prominence"))
      ck.stats_prominence = StatsFromJson(meta.at("stats_prominence"));
    if (meta.contains("stats_boundary"))
      ck.stats_boundary = StatsFromJson(meta.at("stats_boundary"));
  } catch (const json::exception& e) {
    ThrowValidation("corrupt checkpoint metadata in ", path, ": ", e.what());
  }

  uint64_t n_tensors = ReadRaw<uint64_t>(in, path);
  for (uint64_t i = 0; i < n_tensors; ++i) {
    uint32_t name_len = ReadRaw<uint32_t>(in, path);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    uint64_t count = ReadRaw<uint64_t>(in, path);
    Vector values(count);
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) ThrowError("truncated checkpoint tensor '", name, "': ", path);
    ck.tensors[name] = std::move(values);
  }
  return ck;
}

}  // namespace wavprom
