// Copyright 2026 The GraphSentry Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "graphsentry/vector_lab.h"

#include <cmath>

#include "byte_io.h"
#include "graphsentry/error.h"
#include "graphsentry/onnx_io.h"

namespace graphsentry {

namespace {

constexpr uint32_t kDumpVersion = 1;
constexpr uint32_t kVectorVersion = 1;
constexpr double kMinSeparation = 1e-9;

}  // namespace

std::string_view PromptClassName(PromptClass c) {
  return c == PromptClass::kBenign ? "benign" : "harmful";
}

PromptClass PromptClassFromName(std::string_view name) {
  if (name == "benign") return PromptClass::kBenign;
  if (name == "harmful") return PromptClass::kHarmful;
  throw Error(ErrorCode::kClassLabelUnknown, "unknown class '" + std::string(name) + "'");
}

void ActivationDump::CheckShape() const {
  const size_t expected = static_cast<size_t>(layer_count) * hidden_dim;
  if (layer_count == 0 || hidden_dim == 0) {
    throw Error(ErrorCode::kMalformedDump, "dump needs L >= 1 and d >= 1");
  }
  for (size_t i = 0; i < records.size(); ++i) {
    const ActivationRecord& r = records[i];
    if (r.label != PromptClass::kBenign && r.label != PromptClass::kHarmful) {
      throw Error(ErrorCode::kClassLabelUnknown, "record " + std::to_string(i));
    }
    if (r.values.size() != expected) {
      throw Error(ErrorCode::kMalformedDump,
                  "record " + std::to_string(i) + " holds " +
                      std::to_string(r.values.size()) + " values, expected " +
                      std::to_string(expected));
    }
  }
}

void ActivationDump::Validate() const {
  CheckShape();
  size_t benign = 0;
  for (const ActivationRecord& r : records) benign += r.label == PromptClass::kBenign;
  if (benign == 0 || benign == records.size()) {
    throw Error(ErrorCode::kEmptyClass,
                benign == 0 ? "no benign records" : "no harmful records");
  }
}

std::vector<float> TokenAverage(const Tensor& per_token) {
  if (per_token.dtype() != DType::kFloat32) {
    throw Error(ErrorCode::kUnsupportedDtype, "token_average expects f32");
  }
  const Shape& s = per_token.shape();
  const bool batched = s.size() == 3 && s[0] == 1;
  if (s.size() != 2 && !batched) {
    throw Error(ErrorCode::kShapeMismatch,
                "token_average expects [tokens, d], got " + ShapeToString(s));
  }
  const int64_t tokens = s[s.size() - 2];
  const int64_t d = s.back();
  if (tokens == 0) throw Error(ErrorCode::kEmptySequence, "no tokens to average");
  std::vector<double> acc(static_cast<size_t>(d), 0.0);
  auto data = per_token.f32();
  for (int64_t t = 0; t < tokens; ++t) {
    for (int64_t j = 0; j < d; ++j) acc[j] += data[t * d + j];
  }
  std::vector<float> out(acc.size());
  for (size_t j = 0; j < acc.size(); ++j) {
    out[j] = static_cast<float>(acc[j] / static_cast<double>(tokens));
  }
  return out;
}

std::vector<double> SeparationProfile::Separations() const {
  std::vector<double> out;
  out.reserve(layers.size());
  for (const LayerSeparation& l : layers) out.push_back(l.separation);
  return out;
}

SeparationProfile ComputeSeparationProfile(const ActivationDump& dump) {
  dump.Validate();
  const int64_t layers = dump.layer_count;
  const size_t d = dump.hidden_dim;
  SeparationProfile profile;
  profile.layers.resize(static_cast<size_t>(layers));
  // Layers are independent; each writes only its own slot.
#pragma omp parallel for schedule(static)
  for (int64_t l = 0; l < layers; ++l) {
    LayerSeparation& out = profile.layers[l];
    out.benign_mean.assign(d, 0.0);
    out.harmful_mean.assign(d, 0.0);
    size_t nb = 0, nh = 0;
    for (const ActivationRecord& r : dump.records) {
      auto v = r.Layer(static_cast<uint32_t>(l), dump.hidden_dim);
      const bool benign = r.label == PromptClass::kBenign;
      std::vector<double>& acc = benign ? out.benign_mean : out.harmful_mean;
      ++(benign ? nb : nh);
      for (size_t j = 0; j < d; ++j) acc[j] += v[j];
    }
    double sq = 0.0;
    for (size_t j = 0; j < d; ++j) {
      out.benign_mean[j] /= static_cast<double>(nb);
      out.harmful_mean[j] /= static_cast<double>(nh);
      const double diff = out.benign_mean[j] - out.harmful_mean[j];
      sq += diff * diff;
    }
    out.separation = std::sqrt(sq);
  }
  return profile;
}

LayerSelection SelectLayer(const SeparationProfile& profile) {
  LayerSelection sel;
  if (profile.layers.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "profile has no layers");
  }
  double best = profile.layers[0].separation;
  for (size_t l = 1; l < profile.layers.size(); ++l) {
    if (profile.layers[l].separation > best) {
      best = profile.layers[l].separation;
      sel.layer = static_cast<int64_t>(l);
    }
  }
  if (best == 0.0) {
    sel.degenerate = true;
    sel.warning = "DegenerateSeparation: every layer has zero separation";
  }
  return sel;
}

Tensor UncensoringVector::AblationMatrix() const {
  const size_t d = direction.size();
  std::vector<float> m(d * d);
  for (size_t i = 0; i < d; ++i) {
    for (size_t j = 0; j < d; ++j) {
      m[i * d + j] = static_cast<float>(alpha * static_cast<double>(direction[i]) *
                                        static_cast<double>(direction[j]));
    }
  }
  const auto n = static_cast<int64_t>(d);
  return Tensor::F32({n, n}, std::move(m));
}

UncensoringVector BuildUncensoringVector(const SeparationProfile& profile,
                                         int64_t layer, double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw Error(ErrorCode::kInvalidArgument, "alpha must be positive");
  }
  if (layer < 0 || layer >= static_cast<int64_t>(profile.layers.size())) {
    throw Error(ErrorCode::kInvalidArgument,
                "layer " + std::to_string(layer) + " out of range");
  }
  const LayerSeparation& ls = profile.layers[layer];
  if (ls.separation < kMinSeparation) {
    throw Error(ErrorCode::kZeroSeparation,
                "layer " + std::to_string(layer) + " separation below 1e-9");
  }
  UncensoringVector v;
  v.layer = layer;
  v.alpha = alpha;
  v.direction.resize(ls.benign_mean.size());
  for (size_t j = 0; j < v.direction.size(); ++j) {
    v.direction[j] =
        static_cast<float>((ls.benign_mean[j] - ls.harmful_mean[j]) / ls.separation);
  }
  return v;
}

std::vector<uint8_t> EncodeDump(const ActivationDump& dump) {
  dump.CheckShape();
  bytes::Writer w;
  w.Magic("AVD1");
  w.Put(kDumpVersion);
  w.Put(dump.layer_count);
  w.Put(dump.hidden_dim);
  w.Put(static_cast<uint32_t>(dump.records.size()));
  for (const ActivationRecord& r : dump.records) {
    w.Put(static_cast<uint8_t>(r.label));
    w.Put(r.prompt_id);
    w.PutArray(std::span<const float>(r.values));
  }
  return w.Take();
}

ActivationDump DecodeDump(std::span<const uint8_t> data) {
  bytes::Reader r(data, ErrorCode::kMalformedDump);
  r.ExpectMagic("AVD1");
  const auto version = r.Get<uint32_t>("version");
  if (version != kDumpVersion) r.Fail("unsupported version " + std::to_string(version));
  ActivationDump dump;
  dump.layer_count = r.Get<uint32_t>("layer count");
  dump.hidden_dim = r.Get<uint32_t>("hidden dim");
  const auto count = r.Get<uint32_t>("record count");
  if (dump.layer_count == 0 || dump.hidden_dim == 0) r.Fail("L and d must be positive");
  const size_t per_record = static_cast<size_t>(dump.layer_count) * dump.hidden_dim;
  const size_t record_bytes = 1 + 8 + per_record * sizeof(float);
  // Reject absurd counts before allocating.
  if (record_bytes != 0 && count > r.remaining() / record_bytes + 1) {
    r.Fail("header declares " + std::to_string(count) + " records but only " +
           std::to_string(r.remaining()) + " bytes follow");
  }
  dump.records.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    if (r.remaining() < record_bytes) {
      r.Fail("record " + std::to_string(i) + " is short: " +
             std::to_string(r.remaining()) + " of " + std::to_string(record_bytes) +
             " bytes present");
    }
    ActivationRecord rec;
    const auto label = r.Get<uint8_t>("class");
    if (label > 1) {
      throw Error(ErrorCode::kClassLabelUnknown,
                  "record " + std::to_string(i) + " has class byte " + std::to_string(label));
    }
    rec.label = static_cast<PromptClass>(label);
    rec.prompt_id = r.Get<uint64_t>("prompt id");
    rec.values = r.GetArray<float>(per_record, "activations");
    dump.records.push_back(std::move(rec));
  }
  r.ExpectEnd();
  return dump;
}

void WriteDump(const std::filesystem::path& path, const ActivationDump& dump) {
  WriteFileBytes(path, EncodeDump(dump));
}

ActivationDump ReadDump(const std::filesystem::path& path) {
  return DecodeDump(ReadFileBytes(path));
}

std::vector<uint8_t> EncodeVector(const UncensoringVector& v) {
  bytes::Writer w;
  w.Magic("UVEC");
  w.Put(kVectorVersion);
  w.Put(static_cast<uint32_t>(v.layer));
  w.Put(static_cast<uint32_t>(v.direction.size()));
  w.Put(v.alpha);
  w.PutArray(std::span<const float>(v.direction));
  return w.Take();
}

UncensoringVector DecodeVector(std::span<const uint8_t> data) {
  bytes::Reader r(data, ErrorCode::kMalformedDump);
  r.ExpectMagic("UVEC");
  const auto version = r.Get<uint32_t>("version");
  if (version != kVectorVersion) r.Fail("unsupported version " + std::to_string(version));
  UncensoringVector v;
  v.layer = r.Get<uint32_t>("layer");
  const auto d = r.Get<uint32_t>("dim");
  v.alpha = r.Get<double>("alpha");
  v.direction = r.GetArray<float>(d, "direction");
  r.ExpectEnd();
  if (d == 0 || !(v.alpha > 0.0)) r.Fail("vector needs d >= 1 and alpha > 0");
  double sq = 0.0;
  for (float x : v.direction) sq += static_cast<double>(x) * x;
  if (std::fabs(std::sqrt(sq) - 1.0) > 1e-6) r.Fail("direction is not unit length");
  return v;
}

void WriteVector(const std::filesystem::path& path, const UncensoringVector& v) {
  WriteFileBytes(path, EncodeVector(v));
}

UncensoringVector ReadVector(const std::filesystem::path& path) {
  return DecodeVector(ReadFileBytes(path));
}

}  // namespace graphsentry
