// wavprom/mtl/spec.cc

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

#include "wavprom/mtl/spec.h"

#include <json.hpp>

#include "wavprom/base/error.h"

namespace wavprom {

using nlohmann::json;

std::string VariantName(ArchitectureVariant v) {
  switch (v) {
    case ArchitectureVariant::kSingle: return "SINGLE";
    case ArchitectureVariant::kSharedCnnHeads: return "SHARED_CNN_HEADS";
    case ArchitectureVariant::kCondA: return "COND_A";
    case ArchitectureVariant::kCondB: return "COND_B";
    case ArchitectureVariant::kCondSharedSinc: return "COND_SHARED_SINC";
  }
  ThrowError("unknown architecture variant");
}

ArchitectureVariant VariantFromName(const std::string& name) {
  if (name == "SINGLE") return ArchitectureVariant::kSingle;
  if (name == "SHARED_CNN_HEADS") return ArchitectureVariant::kSharedCnnHeads;
  if (name == "COND_A") return ArchitectureVariant::kCondA;
  if (name == "COND_B") return ArchitectureVariant::kCondB;
  if (name == "COND_SHARED_SINC") return ArchitectureVariant::kCondSharedSinc;
  ThrowValidation("unknown architecture '", name,
                  "' (expected SINGLE, SHARED_CNN_HEADS, COND_A, COND_B or "
                  "COND_SHARED_SINC)");
}

ModelSpec DefaultModelSpec(ArchitectureVariant variant) {
  ModelSpec spec;
  spec.variant = variant;
  spec.frontend = DefaultFrontendSpec(FirstLayerKind::kSinc);
  if (variant == ArchitectureVariant::kSingle) spec.loss.alpha = 1.0;
  return spec;
}

std::vector<std::string> ModelSpecViolations(const ModelSpec& spec) {
  std::vector<std::string> bad;
  if (!(spec.loss.alpha >= 0.0 && spec.loss.alpha <= 1.0))
    bad.push_back(StrCat("alpha must be in [0,1], got ", spec.loss.alpha));
  else if (spec.variant == ArchitectureVariant::kSingle && spec.loss.alpha != 1.0)
    bad.push_back(StrCat("SINGLE requires alpha = 1, got ", spec.loss.alpha));
  if (spec.loss.scale_prom < 0.0 || spec.loss.scale_bound < 0.0)
    bad.push_back("loss scales must be >= 0");
  if (spec.variant == ArchitectureVariant::kCondSharedSinc &&
      spec.frontend.first_layer != FirstLayerKind::kSinc)
    bad.push_back("COND_SHARED_SINC requires a sinc first layer");
  if (spec.frontend.NumLayers() < 1) {
    bad.push_back("frontend needs >= 1 conv layer");
  } else {
    for (size_t i = 0; i < spec.frontend.layers.size(); ++i) {
      const auto& l = spec.frontend.layers[i];
      if (l.num_filters < 1 || l.kernel_width < 1 || l.stride < 1 ||
          l.pool_width < 1)
        bad.push_back(StrCat("conv layer ", i, " dimensions must be positive"));
    }
    if (spec.frontend.first_layer == FirstLayerKind::kSinc &&
        spec.frontend.layers[0].kernel_width % 2 == 0)
      bad.push_back("sinc kernel width must be odd");
  }
  if (spec.head.gru_layers < 1) bad.push_back("gru_layers must be >= 1");
  if (spec.head.gru_hidden < 1) bad.push_back("gru_hidden must be >= 1");
  if (spec.head.fc1_dim < 1) bad.push_back("fc1_dim must be >= 1");
  if (!(spec.head.inter_layer_dropout >= 0.0 && spec.head.inter_layer_dropout < 1.0))
    bad.push_back("gru dropout must be in [0,1)");
  if (!(spec.head.fc1_dropout >= 0.0 && spec.head.fc1_dropout < 1.0))
    bad.push_back("fc1 dropout must be in [0,1)");
  if (spec.max_segment_samples < 1)
    bad.push_back("max_segment_samples must be positive");
  if (spec.fusion.use_lexical) {
    if (spec.fusion.lexical.embedding_dim < 1 ||
        spec.fusion.lexical.projection_dim < 1)
      bad.push_back("lexical dims must be positive");
    if (!(spec.fusion.lexical.dropout >= 0.0 && spec.fusion.lexical.dropout < 1.0))
      bad.push_back("lexical dropout must be in [0,1)");
  }
  if (spec.fusion.use_acoustic_features) {
    if (spec.fusion.acoustic_dim_prominence < 1 ||
        spec.fusion.acoustic_dim_boundary < 1)
      bad.push_back("acoustic feature dims must be positive");
  }
  return bad;
}

void ValidateModelSpec(const ModelSpec& spec) {
  std::vector<std::string> bad = ModelSpecViolations(spec);
  if (bad.empty()) return;
  std::string joined = "invalid model config:";
  for (const auto& b : bad) joined += "\n  - " + b;
  throw ValidationError(joined);
}

std::string ModelSpecToJson(const ModelSpec& spec) {
  json layers = json::array();
  for (const auto& l : spec.frontend.layers)
    layers.push_back({{"filters", l.num_filters},
                      {"kernel", l.kernel_width},
                      {"stride", l.stride},
                      {"pool", l.pool_width}});
  json j = {
      {"architecture", VariantName(spec.variant)},
      {"frontend",
       {{"first_layer",
         spec.frontend.first_layer == FirstLayerKind::kSinc ? "sinc" : "standard"},
        {"layers", layers},
        {"sample_rate_hz", spec.frontend.sample_rate_hz},
        {"sinc_min_hz", spec.frontend.sinc_min_hz}}},
      {"head",
       {{"gru_layers", spec.head.gru_layers},
        {"gru_hidden", spec.head.gru_hidden},
        {"bidirectional", spec.head.bidirectional},
        {"inter_layer_dropout", spec.head.inter_layer_dropout},
        {"fc1_dim", spec.head.fc1_dim},
        {"fc1_dropout", spec.head.fc1_dropout}}},
      {"fusion",
       {{"use_acoustic_features", spec.fusion.use_acoustic_features},
        {"use_lexical", spec.fusion.use_lexical},
        {"acoustic_dim_prominence", spec.fusion.acoustic_dim_prominence},
        {"acoustic_dim_boundary", spec.fusion.acoustic_dim_boundary},
        {"lexical",
         {{"embedding_dim", spec.fusion.lexical.embedding_dim},
          {"projection_dim", spec.fusion.lexical.projection_dim},
          {"dropout", spec.fusion.lexical.dropout},
          {"vocabulary_path", spec.fusion.lexical.vocabulary_path}}}}},
      {"loss",
       {{"alpha", spec.loss.alpha},
        {"scale_prom", spec.loss.scale_prom},
        {"scale_bound", spec.loss.scale_bound}}},
      {"max_segment_samples", spec.max_segment_samples},
      {"condition_detach", spec.condition_detach},
  };
  return j.dump();
}

ModelSpec ModelSpecFromJson(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    ThrowValidation("model spec: malformed JSON (", e.what(), ")");
  }
  try {
    ModelSpec spec;
    spec.variant = VariantFromName(j.at("architecture").get<std::string>());
    const json& fe = j.at("frontend");
    spec.frontend.first_layer = fe.at("first_layer").get<std::string>() == "sinc"
                                    ? FirstLayerKind::kSinc
                                    : FirstLayerKind::kStandard;
    spec.frontend.layers.clear();
    for (const auto& l : fe.at("layers")) {
      ConvBlockSpec b;
      b.num_filters = l.at("filters").get<int>();
      b.kernel_width = l.at("kernel").get<int>();
      b.stride = l.at("stride").get<int>();
      b.pool_width = l.at("pool").get<int>();
      spec.frontend.layers.push_back(b);
    }
    spec.frontend.sample_rate_hz = fe.at("sample_rate_hz").get<double>();
    spec.frontend.sinc_min_hz = fe.at("sinc_min_hz").get<double>();
    const json& h = j.at("head");
    spec.head.gru_layers = h.at("gru_layers").get<int>();
    spec.head.gru_hidden = h.at("gru_hidden").get<int>();
    spec.head.bidirectional = h.at("bidirectional").get<bool>();
    spec.head.inter_layer_dropout = h.at("inter_layer_dropout").get<double>();
    spec.head.fc1_dim = h.at("fc1_dim").get<int>();
    spec.head.fc1_dropout = h.at("fc1_dropout").get<double>();
    const json& f = j.at("fusion");
    spec.fusion.use_acoustic_features = f.at("use_acoustic_features").get<bool>();
    spec.fusion.use_lexical = f.at("use_lexical").get<bool>();
    spec.fusion.acoustic_dim_prominence = f.at("acoustic_dim_prominence").get<int>();
    spec.fusion.acoustic_dim_boundary = f.at("acoustic_dim_boundary").get<int>();
    const json& lx = f.at("lexical");
    spec.fusion.lexical.embedding_dim = lx.at("embedding_dim").get<int>();
    spec.fusion.lexical.projection_dim = lx.at("projection_dim").get<int>();
    spec.fusion.lexical.dropout = lx.at("dropout").get<double>();
    spec.fusion.lexical.vocabulary_path = lx.at("vocabulary_path").get<std::string>();
    const json& lo = j.at("loss");
    spec.loss.alpha = lo.at("alpha").get<double>();
    spec.loss.scale_prom = lo.at("scale_prom").get<double>();
    spec.loss.scale_bound = lo.at("scale_bound").get<double>();
    spec.max_segment_samples = j.at("max_segment_samples").get<int>();
    spec.condition_detach = j.at("condition_detach").get<bool>();
    return spec;
  } catch (const json::exception& e) {
    ThrowValidation("model spec: missing or mistyped field (", e.what(), ")");
  }
}

}  // namespace wavprom
