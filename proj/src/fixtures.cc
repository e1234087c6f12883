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


#include "graphsentry/fixtures.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "graphsentry/error.h"
#include "graphsentry/graph_builder.h"
#include "graphsentry/random.h"
#include "json.hpp"

namespace graphsentry {

namespace {

using nlohmann::json;

Tensor RandomF32(Rng& rng, Shape shape, float lo, float hi) {
  std::vector<float> v(static_cast<size_t>(ShapeNumElements(shape)));
  for (float& x : v) x = rng.UniformF(lo, hi);
  return Tensor::F32(std::move(shape), std::move(v));
}

Tensor RandomAround(Rng& rng, Shape shape, float center, float spread) {
  return RandomF32(rng, std::move(shape), center - spread, center + spread);
}

std::string Itos(int64_t v) { return std::to_string(v); }

struct Naming {
  NamingScheme scheme;

  std::string Layer(int64_t i, const std::string& part) const {
    return scheme == NamingScheme::kLlama ? "layers." + Itos(i) + "." + part
                                          : "model.layers." + Itos(i) + "." + part;
  }
  std::string NormOutput(const std::string& node) const {
    return scheme == NamingScheme::kLlama ? node + ".out" : node + "/output_0";
  }
  std::string Top(const std::string& part) const {
    return scheme == NamingScheme::kLlama ? part : "model." + part;
  }
};

std::string ValueInfoLine(const ValueInfo& vi) {
  return vi.name + " " + ValueInfoToString(vi);
}

}  // namespace

void ValidateToyConfig(const ToyModelConfig& c) {
  auto bad = [](const std::string& msg) { throw Error(ErrorCode::kInvalidConfig, msg); };
  if (c.layers < 1 || c.layers > 64) bad("layers must be in [1, 64]");
  if (c.hidden_dim < 2 || c.hidden_dim > 4096) bad("hidden_dim must be in [2, 4096]");
  if (c.vocab_size < 2 || c.vocab_size > 1 << 20) bad("vocab_size must be in [2, 2^20]");
  if (c.seq_len < 0 || c.seq_len > 1 << 16) bad("seq_len must be 0 (symbolic) or positive");
  if (c.cache_len < 1 || c.cache_len > 1 << 16) bad("cache_len must be positive");
}

Graph GenerateToyModel(const ToyModelConfig& c) {
  ValidateToyConfig(c);
  Rng rng(c.seed);
  const Naming nm{c.naming};
  const int64_t d = c.hidden_dim;
  const int64_t ff = 4 * d;
  const float wscale = 1.0f / std::sqrt(static_cast<float>(d));
  const float fscale = 1.0f / std::sqrt(static_cast<float>(ff));

  Graph g;
  g.name = "toy_l" + Itos(c.layers) + "_d" + Itos(d) + "_s" + std::to_string(c.seed);
  GraphBuilder b(&g);
  const Dim seq = c.seq_len > 0 ? Dim::Fixed(c.seq_len) : Dim::Symbolic("seq");
  b.Input("input_ids", DType::kInt64, {Dim::Fixed(1), seq});
  b.Input("key_cache", DType::kFloat32,
          {Dim::Fixed(c.layers), Dim::Fixed(c.cache_len), Dim::Fixed(d)});

  auto weight = [&](const std::string& name, Tensor t) {
    return b.Constant(name, t, /*as_initializer=*/true);
  };
  auto layer_norm = [&](const std::string& node, const std::string& x) {
    const std::string scale = weight(node + ".weight", RandomAround(rng, {d}, 1.0f, 0.1f));
    const std::string bias = weight(node + ".bias", RandomAround(rng, {d}, 0.0f, 0.1f));
    return b.OpNamed("LayerNormalization", {x, scale, bias}, node, nm.NormOutput(node),
                     {{"axis", int64_t{-1}}, {"epsilon", 1e-5f}});
  };

  const std::string table =
      weight(nm.Top("embed_tokens.weight"), RandomF32(rng, {c.vocab_size, d}, -1.0f, 1.0f));
  std::string h = b.Op("Gather", {table, "input_ids"}, nm.Top("embed_tokens"),
                       {{"axis", int64_t{0}}});
  std::vector<std::string> presents;
  for (int64_t i = 0; i < c.layers; ++i) {
    auto L = [&](const std::string& part) { return nm.Layer(i, part); };
    const std::string ln1 = layer_norm(L("input_layernorm"), h);
    const std::string wq = weight(L("self_attn.q_proj.weight"),
                                  RandomF32(rng, {d, d}, -wscale, wscale));
    const std::string wk = weight(L("self_attn.k_proj.weight"),
                                  RandomF32(rng, {d, d}, -wscale, wscale));
    const std::string wo = weight(L("self_attn.o_proj.weight"),
                                  RandomF32(rng, {d, d}, -wscale, wscale));
    const std::string q = b.Op("MatMul", {ln1, wq}, L("self_attn.q_proj"));
    const std::string k = b.Op("MatMul", {ln1, wk}, L("self_attn.k_proj"));
    const std::string past =
        b.Op("Slice", {"key_cache"}, L("self_attn.past_key"),
             {{"starts", std::vector<int64_t>{i}},
              {"ends", std::vector<int64_t>{i + 1}},
              {"axes", std::vector<int64_t>{0}}});
    const std::string kall =
        b.Op("Concat", {past, k}, L("self_attn.key_concat"), {{"axis", int64_t{1}}});
    presents.push_back(b.Op("Slice", {kall}, L("self_attn.present_key"),
                            {{"starts", std::vector<int64_t>{-c.cache_len}},
                             {"ends", std::vector<int64_t>{std::numeric_limits<int64_t>::max()}},
                             {"axes", std::vector<int64_t>{1}}}));
    const std::string ksum =
        b.Op("ReduceSum", {kall}, L("self_attn.key_sum"),
             {{"axes", std::vector<int64_t>{1}}, {"keepdims", int64_t{1}}});
    const std::string kw =
        b.Op("Softmax", {ksum}, L("self_attn.key_weights"), {{"axis", int64_t{-1}}});
    const std::string ctx = b.Op("Mul", {q, kw}, L("self_attn.context"));
    const std::string attn = b.Op("MatMul", {ctx, wo}, L("self_attn.o_proj"));
    const std::string h1 = b.Op("Add", {h, attn}, L("attn_residual"));
    const std::string ln2 = layer_norm(L("post_attention_layernorm"), h1);
    const std::string w1 =
        weight(L("mlp.up_proj.weight"), RandomF32(rng, {d, ff}, -wscale, wscale));
    const std::string w2 =
        weight(L("mlp.down_proj.weight"), RandomF32(rng, {ff, d}, -fscale, fscale));
    const std::string up = b.Op("MatMul", {ln2, w1}, L("mlp.up_proj"));
    const std::string act = b.Op("Relu", {up}, L("mlp.act"));
    const std::string down = b.Op("MatMul", {act, w2}, L("mlp.down_proj"));
    h = b.Op("Add", {h1, down}, L("mlp_residual"));
  }
  const std::string norm = layer_norm(nm.Top("norm"), h);
  const std::string head =
      weight("lm_head.weight", RandomF32(rng, {d, c.vocab_size}, -wscale, wscale));
  b.OpNamed("MatMul", {norm, head}, "lm_head", "logits");
  b.OpNamed("Concat", presents, "key_cache_concat", "key_cache_out", {{"axis", int64_t{0}}});
  b.Output("logits");
  b.Output("key_cache_out");
  CheckValid(g);
  return g;
}

std::string FixtureManifest::ToText() const {
  std::ostringstream os;
  os << "# graphsentry fixture manifest v1\n";
  os << "fixture " << fixture << "\n";
  for (const std::string& i : inputs) os << "input " << i << "\n";
  for (const std::string& o : outputs) os << "output " << o << "\n";
  for (const std::string& a : expected_aliases) os << "alias " << a << "\n";
  return os.str();
}

FixtureManifest FixtureManifest::Parse(const std::string& text) {
  FixtureManifest m;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  bool seen_fixture = false;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const size_t sp = line.find(' ');
    if (sp == std::string::npos) {
      throw Error(ErrorCode::kMalformedManifest, "line " + Itos(line_no) + ": no value");
    }
    const std::string key = line.substr(0, sp);
    const std::string value = line.substr(sp + 1);
    if (key == "fixture") {
      m.fixture = value;
      seen_fixture = true;
    } else if (key == "input") {
      m.inputs.push_back(value);
    } else if (key == "output") {
      m.outputs.push_back(value);
    } else if (key == "alias") {
      m.expected_aliases.push_back(value);
    } else {
      throw Error(ErrorCode::kMalformedManifest,
                  "line " + Itos(line_no) + ": unknown key '" + key + "'");
    }
  }
  if (!seen_fixture) throw Error(ErrorCode::kMalformedManifest, "missing fixture line");
  return m;
}

FixtureManifest ToyManifest(const ToyModelConfig& c) {
  const Graph g = GenerateToyModel(c);
  const Naming nm{c.naming};
  FixtureManifest m;
  m.fixture = g.name;
  for (const ValueInfo& vi : g.inputs) m.inputs.push_back(ValueInfoLine(vi));
  m.outputs = g.outputs;
  for (int64_t i = 0; i < c.layers; ++i) {
    m.expected_aliases.push_back(nm.NormOutput(nm.Layer(i, "input_layernorm")));
    m.expected_aliases.push_back(nm.NormOutput(nm.Layer(i, "post_attention_layernorm")));
  }
  std::sort(m.expected_aliases.begin(), m.expected_aliases.end());
  return m;
}

TensorMap RandomToyInputs(const ToyModelConfig& c, int64_t seq_len, uint64_t seed,
                          const std::vector<int64_t>& avoid_tokens) {
  if (seq_len < 1) throw Error(ErrorCode::kInvalidConfig, "seq_len must be positive");
  std::vector<int64_t> allowed;
  const std::set<int64_t> avoid(avoid_tokens.begin(), avoid_tokens.end());
  for (int64_t t = 1; t < c.vocab_size; ++t) {
    if (!avoid.count(t)) allowed.push_back(t);
  }
  if (allowed.empty()) throw Error(ErrorCode::kInvalidConfig, "no token left to sample");
  Rng rng(seed);
  std::vector<int64_t> ids(static_cast<size_t>(seq_len));
  for (int64_t& t : ids) t = allowed[rng.Int(0, static_cast<int64_t>(allowed.size()) - 1)];
  TensorMap m;
  m["input_ids"] = Tensor::I64({1, seq_len}, std::move(ids));
  m["key_cache"] = RandomF32(rng, {c.layers, c.cache_len, c.hidden_dim}, -1.0f, 1.0f);
  return m;
}

std::vector<ToyModelConfig> CleanCorpusConfigs() {
  std::vector<ToyModelConfig> out;
  const int64_t dims[] = {4, 8, 12, 16};
  for (int i = 0; i < 20; ++i) {
    ToyModelConfig c;
    c.layers = 1 + i % 3;
    c.hidden_dim = dims[i % 4];
    c.vocab_size = i % 2 == 0 ? 32 : 16;
    c.cache_len = 2 + i % 3;
    c.seq_len = i % 5 == 4 ? 6 : 0;
    c.seed = 1000 + static_cast<uint64_t>(i);
    c.naming = i % 2 == 0 ? NamingScheme::kLlama : NamingScheme::kPhi;
    out.push_back(c);
  }
  return out;
}

std::string SyntheticTruth::ToJson() const {
  json j;
  j["layer"] = layer;
  j["delta"] = delta;
  j["direction"] = direction;
  j["seed"] = seed;
  return j.dump(2) + "\n";
}

SyntheticTruth SyntheticTruth::FromJson(const std::string& text) {
  try {
    const json j = json::parse(text);
    SyntheticTruth t;
    t.layer = j.at("layer").get<uint32_t>();
    t.delta = j.at("delta").get<double>();
    t.direction = j.at("direction").get<std::vector<double>>();
    t.seed = j.at("seed").get<uint64_t>();
    return t;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedManifest, std::string("truth file: ") + e.what());
  }
}

SyntheticDump GenerateSyntheticDump(const SyntheticDumpConfig& c) {
  auto bad = [](const std::string& msg) { throw Error(ErrorCode::kInvalidConfig, msg); };
  if (c.layers < 1 || c.hidden_dim < 1) bad("layers and hidden_dim must be positive");
  if (c.per_class_count < 1) bad("per_class_count must be at least 1");
  if (c.planted_layer >= c.layers) bad("planted_layer out of range");
  if (!(c.noise_sigma >= 0.0) || !std::isfinite(c.delta)) bad("invalid delta or sigma");
  Rng rng(c.seed);
  const size_t d = c.hidden_dim;

  std::vector<double> dir(d);
  if (c.planted_direction.empty()) {
    for (double& x : dir) x = rng.Normal();
  } else {
    if (c.planted_direction.size() != d) bad("planted_direction length must equal hidden_dim");
    for (size_t j = 0; j < d; ++j) dir[j] = c.planted_direction[j];
  }
  double norm = 0.0;
  for (double x : dir) norm += x * x;
  norm = std::sqrt(norm);
  if (!(norm > 0.0)) bad("planted_direction must be non-zero");
  for (double& x : dir) x /= norm;

  std::vector<std::vector<double>> base(c.layers, std::vector<double>(d));
  for (auto& layer : base) {
    for (double& x : layer) x = rng.Uniform(-1.0, 1.0);
  }

  SyntheticDump out;
  out.dump.layer_count = c.layers;
  out.dump.hidden_dim = c.hidden_dim;
  out.truth = {c.planted_layer, c.delta, dir, c.seed};
  uint64_t prompt_id = 0;
  for (PromptClass cls : {PromptClass::kBenign, PromptClass::kHarmful}) {
    const double sign = cls == PromptClass::kBenign ? 1.0 : -1.0;
    for (uint32_t r = 0; r < c.per_class_count; ++r) {
      ActivationRecord rec;
      rec.label = cls;
      rec.prompt_id = prompt_id++;
      rec.values.reserve(c.layers * d);
      for (uint32_t l = 0; l < c.layers; ++l) {
        for (size_t j = 0; j < d; ++j) {
          double v = base[l][j];
          if (l == c.planted_layer) v += sign * c.delta * dir[j];
          if (c.noise_sigma > 0.0) v += c.noise_sigma * rng.Normal();
          rec.values.push_back(static_cast<float>(v));
        }
      }
      out.dump.records.push_back(std::move(rec));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Random graphs

namespace {

struct PoolValue {
  std::string name;
  Shape shape;
};

class RandomGraphBuilder {
 public:
  RandomGraphBuilder(uint64_t seed, const RandomGraphOptions& opt)
      : rng_(seed), opt_(opt), b_(&g_) {
    g_.name = "random_" + std::to_string(seed);
  }

  Graph Build() {
    const int64_t rows = Dim();
    const int64_t cols = Dim();
    const int inputs = static_cast<int>(rng_.Int(1, 2));
    for (int i = 0; i < inputs; ++i) {
      const Shape s = i == 0 || rng_.Bernoulli(0.5) ? Shape{rows, cols} : Shape{rows, Dim()};
      const std::string name = "x" + std::to_string(i);
      b_.Input(name, DType::kFloat32, {Dim::Fixed(s[0]), Dim::Fixed(s[1])});
      pool_.push_back({name, s});
    }
    const int target = static_cast<int>(rng_.Int(1, opt_.max_nodes));
    for (int attempt = 0; attempt < 400 && static_cast<int>(g_.nodes.size()) < target;
         ++attempt) {
      // Steps are transactional: one that overshoots the target or strands a
      // value (a partial multi-node emission) is rolled back.
      const Graph graph_before = g_;
      const std::vector<PoolValue> pool_before = pool_;
      const std::set<std::string> signatures_before = signatures_;
      const size_t first_new = g_.nodes.size();
      Step(target - static_cast<int>(g_.nodes.size()));
      if (static_cast<int>(g_.nodes.size()) > target || Strands(first_new)) {
        g_ = graph_before;
        pool_ = pool_before;
        signatures_ = signatures_before;
      }
    }
    std::set<std::string> consumed;
    for (const Node& n : g_.nodes) {
      consumed.insert(n.inputs.begin(), n.inputs.end());
      for (const std::string& c : ImplicitInputs(n)) consumed.insert(c);
    }
    for (const PoolValue& v : pool_) {
      if (g_.Producer(v.name) && !consumed.count(v.name)) g_.outputs.push_back(v.name);
    }
    if (g_.outputs.empty()) {
      // Only reachable when no node was added; fall back to a single Relu.
      Emit("Relu", {pool_[0].name}, {}, pool_[0].shape);
      g_.outputs.push_back(pool_.back().name);
    }
    CheckValid(g_);
    return std::move(g_);
  }

 private:
  int64_t Dim() { return rng_.Int(1, opt_.max_dim); }

  // True if a node from `first` on produces a value that is neither in the
  // pool nor consumed.
  bool Strands(size_t first) const {
    std::set<std::string> live;
    for (const PoolValue& v : pool_) live.insert(v.name);
    for (const Node& n : g_.nodes) {
      live.insert(n.inputs.begin(), n.inputs.end());
      for (const std::string& c : ImplicitInputs(n)) live.insert(c);
    }
    for (size_t i = first; i < g_.nodes.size(); ++i) {
      for (const std::string& o : g_.nodes[i].outputs) {
        if (!live.count(o)) return true;
      }
    }
    return false;
  }

  const PoolValue& Pick() { return pool_[rng_.Int(0, static_cast<int64_t>(pool_.size()) - 1)]; }

  const PoolValue* PickShaped(const Shape& s) {
    std::vector<const PoolValue*> hits;
    for (const PoolValue& v : pool_) {
      if (v.shape == s) hits.push_back(&v);
    }
    if (hits.empty()) return nullptr;
    return hits[rng_.Int(0, static_cast<int64_t>(hits.size()) - 1)];
  }

  std::string NewConstant(Shape s, float lo, float hi, bool avoid_zero = false) {
    Tensor t = RandomF32(rng_, std::move(s), lo, hi);
    if (avoid_zero) {
      for (float& x : t.mutable_f32()) x = x < 0 ? x - 0.5f : x + 0.5f;
    }
    const std::string name = "c" + std::to_string(const_counter_++);
    const bool as_init = rng_.Bernoulli(0.7);
    b_.Constant(name, t, as_init);
    return name;
  }

  std::string Signature(const std::string& op, const std::vector<std::string>& in,
                        const Attributes& attrs) {
    std::string s = op;
    for (const auto& [k, v] : attrs) s += "|" + k + "=" + AttributeToString(v);
    for (const std::string& i : in) s += "|" + i;
    return s;
  }

  bool Emit(const std::string& op, std::vector<std::string> in, Attributes attrs,
            Shape out) {
    if (!signatures_.insert(Signature(op, in, attrs)).second) return false;
    const std::string name = "n" + std::to_string(node_counter_++);
    b_.Op(op, std::move(in), name, std::move(attrs));
    pool_.push_back({name, std::move(out)});
    return true;
  }

  // Adds one operator (two for Where and Cast pairs, more for If).
  void Step(int budget) {
    static const char* kOps[] = {"Add",     "Sub",    "Mul",       "Div",    "Relu",
                                 "Identity", "MatMul", "Gemm",      "Softmax", "ReduceSum",
                                 "ReduceMax", "ReduceMin", "LayerNormalization", "Where",
                                 "Concat",  "Slice",  "Cast",      "If"};
    const std::string op = kOps[rng_.Int(0, std::size(kOps) - 1)];
    const PoolValue x = Pick();
    const int64_t r = x.shape[0];
    const int64_t c = x.shape[1];
    if (op == "Add" || op == "Sub" || op == "Mul" || op == "Div") {
      std::string y;
      Shape ys = rng_.Bernoulli(0.3) ? Shape{1, c} : Shape{r, c};
      const PoolValue* other = op == "Div" ? nullptr : PickShaped(x.shape);
      if (other && rng_.Bernoulli(0.5)) {
        y = other->name;
      } else {
        // Only non-zero constants are used as divisors so values stay finite.
        y = NewConstant(ys, -1.5f, 1.5f, op == "Div");
      }
      Emit(op, {x.name, y}, {}, x.shape);
    } else if (op == "Relu" || op == "Identity") {
      Emit(op, {x.name}, {}, x.shape);
    } else if (op == "MatMul") {
      const int64_t k = Dim();
      Emit(op, {x.name, NewConstant({c, k}, -1.0f, 1.0f)}, {}, {r, k});
    } else if (op == "Gemm") {
      const int64_t k = Dim();
      const bool trans_b = rng_.Bernoulli(0.5);
      std::vector<std::string> in = {
          x.name, NewConstant(trans_b ? Shape{k, c} : Shape{c, k}, -1.0f, 1.0f)};
      if (rng_.Bernoulli(0.6)) in.push_back(NewConstant({k}, -1.0f, 1.0f));
      static const float kScales[] = {1.0f, 0.5f, 2.0f};
      Attributes a = {{"transB", int64_t{trans_b}}};
      if (rng_.Bernoulli(0.5)) a["alpha"] = kScales[rng_.Int(0, 2)];
      if (rng_.Bernoulli(0.5)) a["beta"] = kScales[rng_.Int(0, 2)];
      Emit(op, std::move(in), std::move(a), {r, k});
    } else if (op == "Softmax") {
      const int64_t axis = rng_.Int(-1, 1);
      Emit(op, {x.name}, {{"axis", axis}}, x.shape);
    } else if (op == "ReduceSum" || op == "ReduceMax" || op == "ReduceMin") {
      const int64_t choice = rng_.Int(0, 2);
      Attributes a = {{"keepdims", int64_t{1}}};
      Shape out = {1, 1};
      if (choice < 2) {
        a["axes"] = std::vector<int64_t>{choice};
        out = choice == 0 ? Shape{1, c} : Shape{r, 1};
      }
      Emit(op, {x.name}, std::move(a), out);
    } else if (op == "LayerNormalization") {
      std::vector<std::string> in = {x.name, NewConstant({c}, 0.5f, 1.5f)};
      if (rng_.Bernoulli(0.6)) in.push_back(NewConstant({c}, -0.5f, 0.5f));
      Attributes a = {{"axis", int64_t{-1}}};
      if (rng_.Bernoulli(0.5)) a["epsilon"] = 1e-3f;
      Emit(op, std::move(in), std::move(a), x.shape);
    } else if (op == "Where" && budget >= 2) {
      const PoolValue* other = PickShaped(x.shape);
      const std::string y = other && other->name != x.name && rng_.Bernoulli(0.6)
                                ? other->name
                                : NewConstant(x.shape, -1.0f, 1.0f);
      const std::string cond = "n" + std::to_string(node_counter_);
      if (!Emit("Greater", {x.name, y}, {}, x.shape)) return;
      pool_.pop_back();  // boolean values never join the f32 pool
      Emit("Where", {cond, x.name, y}, {}, x.shape);
    } else if (op == "Concat") {
      const int64_t axis = rng_.Int(0, 1);
      const PoolValue* other = nullptr;
      for (const PoolValue& v : pool_) {
        if (v.name != x.name && v.shape[1 - axis] == x.shape[1 - axis] &&
            v.shape[axis] + x.shape[axis] <= 2 * opt_.max_dim && rng_.Bernoulli(0.5)) {
          other = &v;
          break;
        }
      }
      std::string y;
      Shape ys = x.shape;
      if (other) {
        y = other->name;
        ys = other->shape;
      } else {
        ys[axis] = Dim();
        y = NewConstant(ys, -1.0f, 1.0f);
      }
      Shape out = x.shape;
      out[axis] += ys[axis];
      if (out[axis] > opt_.max_dim) return;
      Emit(op, {x.name, y}, {{"axis", axis}}, out);
    } else if (op == "Slice") {
      const int64_t axis = rng_.Int(0, 1);
      const int64_t dim = x.shape[axis];
      const bool reverse = rng_.Bernoulli(0.2);
      int64_t start, end, step;
      int64_t len;
      if (reverse) {
        start = dim - 1;
        end = rng_.Bernoulli(0.5) ? -dim - 1 : std::numeric_limits<int64_t>::min();
        step = -1;
        len = dim;
      } else {
        start = rng_.Int(0, dim - 1);
        end = rng_.Int(start + 1, dim);
        step = rng_.Int(1, 2);
        len = (end - start + step - 1) / step;
        if (rng_.Bernoulli(0.3)) start -= dim;  // negative form of the same index
        if (end == dim && rng_.Bernoulli(0.4)) end = std::numeric_limits<int64_t>::max();
      }
      Shape out = x.shape;
      out[axis] = len;
      Attributes a = {{"starts", std::vector<int64_t>{start}},
                      {"ends", std::vector<int64_t>{end}},
                      {"axes", std::vector<int64_t>{axis}}};
      if (step != 1) a["steps"] = std::vector<int64_t>{step};
      Emit(op, {x.name}, std::move(a), out);
    } else if (op == "Cast" && budget >= 2) {
      const int64_t via = rng_.Bernoulli(0.5) ? 7 : 9;  // i64 or bool round trip
      const std::string mid = "n" + std::to_string(node_counter_);
      if (!Emit("Cast", {x.name}, {{"to", via}}, x.shape)) return;
      pool_.pop_back();
      Emit("Cast", {mid}, {{"to", int64_t{1}}}, x.shape);
    } else if (op == "If" && opt_.allow_if && budget >= 3) {
      EmitIf(x);
    }
  }

  void EmitIf(const PoolValue& x) {
    const std::string id = std::to_string(node_counter_);
    const std::string thr = NewConstant({1, 1}, -1.0f, 1.0f);
    const std::string cmp = "n" + std::to_string(node_counter_);
    if (!Emit("Greater", {x.name, thr}, {}, x.shape)) return;
    pool_.pop_back();
    const std::string cond = "n" + std::to_string(node_counter_);
    Emit("ReduceMax", {cmp}, {{"keepdims", int64_t{0}}}, {});
    pool_.pop_back();
    auto branch = [&](const std::string& tag, bool add) {
      auto sub = std::make_shared<Graph>();
      sub->name = "if" + id + "_" + tag;
      const std::string k = "if" + id + "_" + tag + "_k";
      const std::string out = "if" + id + "_" + tag + "_out";
      sub->initializers[k] = RandomF32(rng_, {1, x.shape[1]}, -1.0f, 1.0f);
      Node n;
      n.name = out;
      n.op_type = add ? "Add" : "Mul";
      n.inputs = {x.name, k};
      n.outputs = {out};
      sub->nodes.push_back(std::move(n));
      sub->outputs = {out};
      return GraphPtr(sub);
    };
    Emit("If", {cond}, {{"then_branch", branch("then", true)},
                        {"else_branch", branch("else", false)}},
         x.shape);
  }

  Rng rng_;
  RandomGraphOptions opt_;
  Graph g_;
  GraphBuilder b_;
  std::vector<PoolValue> pool_;
  std::set<std::string> signatures_;
  int node_counter_ = 0;
  int const_counter_ = 0;
};

}  // namespace

Graph GenerateRandomGraph(uint64_t seed, const RandomGraphOptions& options) {
  if (options.max_nodes < 1 || options.max_dim < 1) {
    throw Error(ErrorCode::kInvalidConfig, "max_nodes and max_dim must be positive");
  }
  return RandomGraphBuilder(seed, options).Build();
}

TensorMap RandomInputsFor(const Graph& graph, uint64_t seed) {
  Rng rng(seed);
  TensorMap m;
  for (const ValueInfo& vi : graph.inputs) {
    Shape s;
    for (const Dim& dim : vi.shape) s.push_back(dim.symbolic() ? 3 : dim.value);
    const auto n = static_cast<size_t>(ShapeNumElements(s));
    switch (vi.dtype) {
      case DType::kFloat32:
        m[vi.name] = RandomF32(rng, s, -2.0f, 2.0f);
        break;
      case DType::kInt64: {
        std::vector<int64_t> v(n);
        for (int64_t& x : v) x = rng.Int(0, 15);
        m[vi.name] = Tensor::I64(s, std::move(v));
        break;
      }
      case DType::kBool: {
        std::vector<uint8_t> v(n);
        for (uint8_t& x : v) x = rng.Bernoulli(0.5);
        m[vi.name] = Tensor::Bool(s, std::move(v));
        break;
      }
    }
  }
  return m;
}

}  // namespace graphsentry
