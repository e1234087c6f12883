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


#include "graphsentry/cli.h"

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "graphsentry/digest.h"
#include "graphsentry/error.h"
#include "graphsentry/fixtures.h"
#include "graphsentry/graph.h"
#include "graphsentry/injector.h"
#include "graphsentry/interpreter.h"
#include "graphsentry/onnx_io.h"
#include "graphsentry/registry.h"
#include "graphsentry/sentinel.h"
#include "graphsentry/tensor_bundle.h"
#include "graphsentry/text_dump.h"
#include "graphsentry/vector_lab.h"
#include "json.hpp"

namespace graphsentry {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

[[noreturn]] void Usage(const std::string& msg) { throw Error(ErrorCode::kUsageError, msg); }

std::vector<int64_t> ParseIntList(const std::string& text, const char* flag) {
  std::vector<int64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    size_t used = 0;
    int64_t v = 0;
    try {
      v = std::stoll(item, &used);
    } catch (const std::exception&) {
      used = std::string::npos;
    }
    if (item.empty() || used != item.size()) {
      Usage(std::string(flag) + " expects comma-separated integers, got '" + text + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) Usage(std::string(flag) + " must not be empty");
  return out;
}

std::vector<std::string> SplitList(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string ReadText(const fs::path& path) {
  const std::vector<uint8_t> bytes = ReadFileBytes(path);
  return std::string(bytes.begin(), bytes.end());
}

void WriteText(const fs::path& path, const std::string& text) {
  WriteFileBytes(path, std::vector<uint8_t>(text.begin(), text.end()));
}

// Writes `text` to `path`, or to `out` when no path was given.
void Emit(std::ostream& out, const std::string& path, const std::string& text) {
  if (path.empty()) {
    out << text;
  } else {
    WriteText(path, text);
  }
}

NamingScheme NamingFromName(const std::string& name) {
  if (name == "llama") return NamingScheme::kLlama;
  if (name == "phi") return NamingScheme::kPhi;
  Usage("--naming must be llama or phi, got '" + name + "'");
}

json TensorListing(const TensorMap& tensors) {
  json a = json::array();
  for (const auto& [name, t] : tensors) {
    a.push_back({{"name", name},
                 {"type", TensorSummary(t)},
                 {"sha256", HexDigest(DigestAlgorithm::kSha256, t.RawBytes())}});
  }
  return a;
}

RegistryStore& OpenStore(const std::string& store, const std::string& url,
                         std::unique_ptr<RegistryStore>* holder) {
  if (store.empty() == url.empty()) Usage("give exactly one of --store or --url");
  if (!store.empty()) {
    *holder = std::make_unique<LocalStore>(store);
  } else {
    *holder = std::make_unique<RemoteStore>(url);
  }
  return **holder;
}

struct Options {
  // Shared positional arguments and common flags.
  std::string model, model2, out, config;
  // run
  std::string inputs, backend = "parallel";
  uint64_t random_seed = 0;
  bool random_inputs = false, capture = false;
  // extract-vector
  double alpha = kDefaultAlpha;
  int64_t layer = -1;
  // inject
  std::string vector, mode = "if_guarded", trigger_tokens, patterns, report;
  uint64_t seed = 0;
  int64_t replacement_token = 0, cache_axis = 0, cache_start = 0, cache_length = 1;
  // hash / verify
  std::string algorithm = "SHA-256", model_id, created_at, manifest;
  bool no_weights = false;
  // scan
  std::string ruleset;
  // registry
  std::string store, url, version, publisher, published_at;
  // fixtures
  std::string kind = "toy", naming = "llama", truth, fixture_manifest, avoid_tokens;
  int64_t layers = 2, hidden_dim = 8, vocab_size = 32, seq_len = 0, cache_len = 4;
  int64_t per_class = 100, planted_layer = 0, input_seq_len = 6;
  double delta = 1.0, noise_sigma = 0.1;
};

int CmdInspect(const Options& o, std::ostream& out) {
  Emit(out, o.out, TextDump(LoadModel(o.model)));
  return kExitOk;
}

int CmdRun(const Options& o, std::ostream& out) {
  const Graph g = LoadModel(o.model);
  if (o.inputs.empty() == !o.random_inputs) Usage("give exactly one of --inputs or --random-seed");
  ExecutionRequest req;
  req.graph = &g;
  req.inputs = o.random_inputs ? RandomInputsFor(g, o.random_seed) : ReadBundle(o.inputs);
  req.capture_intermediates = o.capture;
  if (o.backend == "parallel") {
    req.backend = KernelBackend::kParallel;
  } else if (o.backend == "reference") {
    req.backend = KernelBackend::kReference;
  } else {
    Usage("--backend must be parallel or reference");
  }
  ExecutionResult res = Execute(req);
  json j;
  j["outputs"] = TensorListing(res.outputs);
  if (o.capture) j["intermediates"] = TensorListing(res.intermediates);
  if (!o.out.empty()) {
    TensorMap all = res.outputs;
    all.insert(res.intermediates.begin(), res.intermediates.end());
    WriteBundle(o.out, all);
  }
  out << j.dump(2) << "\n";
  return kExitOk;
}

int CmdInstrument(const Options& o, std::ostream& out) {
  Graph g = LoadModel(o.model);
  const size_t before = g.outputs.size();
  PromoteOutputs(g);
  SaveModel(o.out, g);
  out << "promoted " << g.outputs.size() - before << " values; " << g.outputs.size()
      << " outputs total\n";
  return kExitOk;
}

void CheckAlpha(double alpha) {
  if (!(alpha >= kMinAlpha && alpha <= kMaxAlpha)) {
    std::ostringstream msg;
    msg << "--alpha must lie in [" << kMinAlpha << ", " << kMaxAlpha << "]";
    Usage(msg.str());
  }
}

int CmdExtractVector(const Options& o, std::ostream& out, std::ostream& err) {
  CheckAlpha(o.alpha);
  const ActivationDump dump = ReadDump(o.model);
  const SeparationProfile profile = ComputeSeparationProfile(dump);
  const LayerSelection sel = SelectLayer(profile);
  if (sel.degenerate) err << sel.warning << "\n";
  const int64_t layer = o.layer >= 0 ? o.layer : sel.layer;
  const std::vector<double> d = profile.Separations();
  std::ostringstream table;
  table.precision(9);
  table << "layer\tseparation\n";
  for (size_t l = 0; l < d.size(); ++l) table << l << "\t" << d[l] << "\n";
  table << "selected\t" << sel.layer << "\n";
  if (layer != sel.layer) table << "override\t" << layer << "\n";
  const UncensoringVector v = BuildUncensoringVector(profile, layer, o.alpha);
  WriteVector(o.out, v);
  out << table.str();
  return kExitOk;
}

int CmdInject(const Options& o, std::ostream& out, const CLI::App& sub) {
  const Graph g = LoadModel(o.model);
  UncensoringVector v = ReadVector(o.vector);
  if (sub.count("--alpha")) {
    CheckAlpha(o.alpha);
    v.alpha = o.alpha;
  }
  InjectionPlan plan;
  plan.mode = InjectionModeFromName(o.mode);
  if (!o.patterns.empty()) plan.alias_patterns = SplitList(o.patterns);
  const TriggerSpec spec =
      MakeTriggerSpec(g, ParseIntList(o.trigger_tokens, "--trigger-tokens"), o.replacement_token,
                      o.seed, CacheSlice{o.cache_axis, o.cache_start, o.cache_length});
  const InjectionResult res = Inject(g, plan, v, spec);
  SaveModel(o.out, res.graph);
  Emit(out, o.report, res.report.ToJson());
  return kExitOk;
}

int CmdHash(const Options& o, std::ostream& out) {
  const Graph g = LoadModel(o.model);
  HashOptions opts;
  opts.algorithm = DigestAlgorithmFromName(o.algorithm);
  opts.include_weights = !o.no_weights;
  opts.model_id = o.model_id.empty() ? fs::path(o.model).stem().string() : o.model_id;
  opts.created_at = o.created_at;
  Emit(out, o.out, CanonicalHash(g, opts).ToJson());
  return kExitOk;
}

int CmdDiff(const Options& o, std::ostream& out) {
  const DiffReport r = Diff(LoadModel(o.model), LoadModel(o.model2));
  Emit(out, o.out, r.ToJson());
  return r.empty() ? kExitOk : kExitFindings;
}

int CmdScan(const Options& o, std::ostream& out) {
  const Ruleset rs = o.ruleset.empty() ? Ruleset::Default() : Ruleset::FromFile(o.ruleset);
  const ScanReport r = Scan(LoadModel(o.model), rs);
  Emit(out, o.out, r.ToJson());
  return r.clean() ? kExitOk : kExitFindings;
}

int CmdVerify(const Options& o, std::ostream& out) {
  const HashManifest m = HashManifest::FromJson(ReadText(o.model2));
  const Verdict v = VerifyAgainstManifest(LoadModel(o.model), m);
  out << VerdictName(v) << "\n";
  return v == Verdict::kPass ? kExitOk : kExitFindings;
}

int CmdPublish(const Options& o, std::ostream& out) {
  if (o.store.empty()) Usage("registry publish needs --store");
  if (o.manifest.empty() == o.model.empty()) Usage("give exactly one of --manifest or --model");
  RegistryEntry e;
  e.model_id = o.model_id;
  e.version = o.version;
  e.publisher = o.publisher;
  e.published_at = o.published_at.empty() ? UtcNow() : o.published_at;
  if (!o.manifest.empty()) {
    e.manifest = HashManifest::FromJson(ReadText(o.manifest));
  } else {
    HashOptions opts;
    opts.model_id = o.model_id;
    opts.created_at = e.published_at;
    e.manifest = CanonicalHash(LoadModel(o.model), opts);
  }
  LocalStore store(o.store);
  const PublishReceipt r = store.Publish(e);
  json j = {{"model_id", r.model_id},
            {"version", r.version},
            {"entry_digest", r.entry_digest},
            {"line", r.line}};
  out << j.dump(2) << "\n";
  return kExitOk;
}

int CmdLookup(const Options& o, std::ostream& out) {
  std::unique_ptr<RegistryStore> holder;
  RegistryStore& store = OpenStore(o.store, o.url, &holder);
  const RegistryEntry e = store.Lookup(o.model_id, o.version);
  out << json::parse(e.ToLine()).dump(2) << "\n";
  return kExitOk;
}

int CmdCheck(const Options& o, std::ostream& out) {
  std::unique_ptr<RegistryStore> holder;
  RegistryStore& store = OpenStore(o.store, o.url, &holder);
  const ArtifactVerdict v = CheckArtifact(store, o.model_id, o.version, LoadModel(o.model));
  out << ArtifactVerdictName(v) << "\n";
  return v == ArtifactVerdict::kVerified ? kExitOk : kExitFindings;
}

ToyModelConfig ToyConfigFrom(const Options& o) {
  ToyModelConfig c;
  c.layers = o.layers;
  c.hidden_dim = o.hidden_dim;
  c.vocab_size = o.vocab_size;
  c.seq_len = o.seq_len;
  c.cache_len = o.cache_len;
  c.seed = o.seed;
  c.naming = NamingFromName(o.naming);
  return c;
}

int CmdFixtures(const Options& o, std::ostream& out) {
  if (o.kind == "toy") {
    const ToyModelConfig c = ToyConfigFrom(o);
    SaveModel(o.out, GenerateToyModel(c));
    if (!o.fixture_manifest.empty()) WriteText(o.fixture_manifest, ToyManifest(c).ToText());
    out << "wrote " << o.out << "\n";
  } else if (o.kind == "inputs") {
    const ToyModelConfig c = ToyConfigFrom(o);
    ValidateToyConfig(c);
    const int64_t seq = c.seq_len > 0 ? c.seq_len : o.input_seq_len;
    std::vector<int64_t> avoid;
    if (!o.avoid_tokens.empty()) avoid = ParseIntList(o.avoid_tokens, "--avoid-tokens");
    WriteBundle(o.out, RandomToyInputs(c, seq, o.seed, avoid));
    out << "wrote " << o.out << "\n";
  } else if (o.kind == "dump") {
    SyntheticDumpConfig c;
    if (o.layers <= 0 || o.hidden_dim <= 0 || o.per_class <= 0 || o.planted_layer < 0) {
      throw Error(ErrorCode::kInvalidConfig, "dump extents must be positive");
    }
    c.layers = static_cast<uint32_t>(o.layers);
    c.hidden_dim = static_cast<uint32_t>(o.hidden_dim);
    c.per_class_count = static_cast<uint32_t>(o.per_class);
    c.planted_layer = static_cast<uint32_t>(o.planted_layer);
    c.delta = o.delta;
    c.noise_sigma = o.noise_sigma;
    c.seed = o.seed;
    const SyntheticDump d = GenerateSyntheticDump(c);
    WriteDump(o.out, d.dump);
    if (!o.truth.empty()) WriteText(o.truth, d.truth.ToJson());
    out << "wrote " << o.out << "\n";
  } else if (o.kind == "random") {
    SaveModel(o.out, GenerateRandomGraph(o.seed));
    out << "wrote " << o.out << "\n";
  } else if (o.kind == "corpus") {
    fs::create_directories(o.out);
    for (const ToyModelConfig& c : CleanCorpusConfigs()) {
      const FixtureManifest m = ToyManifest(c);
      SaveModel(fs::path(o.out) / (m.fixture + ".onnx"), GenerateToyModel(c));
      WriteText(fs::path(o.out) / (m.fixture + ".manifest"), m.ToText());
      out << m.fixture << "\n";
    }
  } else {
    Usage("--kind must be toy, inputs, dump, random or corpus");
  }
  return kExitOk;
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"graphsentry: model graph surgery and integrity toolkit", "graphsentry"};
  app.require_subcommand(1);
  app.set_config("--config", "", "INI/TOML file with the same keys as the flags; flags win");
  Options o;

  auto* inspect = app.add_subcommand("inspect", "Print a deterministic text dump of a model");
  inspect->add_option("model", o.model, "Model file")->required();
  inspect->add_option("-o,--out", o.out, "Write the dump here instead of stdout");

  auto* run = app.add_subcommand("run", "Execute a model on bound inputs");
  run->add_option("model", o.model, "Model file")->required();
  run->add_option("--inputs", o.inputs, "ATB1 tensor bundle with the input bindings");
  run->add_option("--random-seed", o.random_seed, "Bind random inputs drawn from this seed");
  run->add_option("-o,--out", o.out, "Write outputs (and captures) as an ATB1 bundle");
  run->add_flag("--capture", o.capture, "Capture every intermediate value");
  run->add_option("--backend", o.backend, "parallel or reference kernels");

  auto* instrument = app.add_subcommand("instrument", "Promote every node output to a graph output");
  instrument->add_option("model", o.model, "Model file")->required();
  instrument->add_option("-o,--out", o.out, "Output model file")->required();

  auto* extract = app.add_subcommand("extract-vector", "Compute the ablation vector of a dump");
  extract->add_option("dump", o.model, "AVD1 activation dump")->required();
  extract->add_option("-o,--out", o.out, "Output UVEC file")->required();
  extract->add_option("--alpha", o.alpha, "Scale, within [0.1, 10]");
  extract->add_option("--layer", o.layer, "Override the selected layer");

  auto* inject = app.add_subcommand("inject", "Rewrite a model with trigger-gated ablation");
  inject->add_option("model", o.model, "Model file")->required();
  inject->add_option("--vector", o.vector, "UVEC file")->required();
  inject->add_option("-o,--out", o.out, "Output model file")->required();
  inject->add_option("--mode", o.mode, "if | if_guarded | obfuscated");
  inject->add_option("--trigger-tokens", o.trigger_tokens, "Comma-separated token ids")
      ->required();
  inject->add_option("--alpha", o.alpha, "Override the vector's scale");
  inject->add_option("--seed", o.seed, "Seed for the cache marker")->required();
  inject->add_option("--replacement-token", o.replacement_token, "Token written over triggers");
  inject->add_option("--patterns", o.patterns, "Comma-separated alias regexes");
  inject->add_option("--report", o.report, "Write the injection report here instead of stdout");
  inject->add_option("--cache-axis", o.cache_axis, "Axis of the marked cache slice");
  inject->add_option("--cache-start", o.cache_start, "Start of the marked cache slice");
  inject->add_option("--cache-length", o.cache_length, "Length of the marked cache slice");

  auto* hash = app.add_subcommand("hash", "Compute a canonical hash manifest");
  hash->add_option("model", o.model, "Model file")->required();
  hash->add_option("-o,--out", o.out, "Write the manifest here instead of stdout");
  hash->add_flag("--no-weights", o.no_weights, "Hash topology only");
  hash->add_option("--algorithm", o.algorithm, "SHA-256, SHA-384 or SHA-512");
  hash->add_option("--model-id", o.model_id, "Model id (default: file stem)");
  hash->add_option("--created-at", o.created_at, "Timestamp to record (default: now)");

  auto* diff = app.add_subcommand("diff", "Structural diff of two models");
  diff->add_option("base", o.model, "Baseline model")->required();
  diff->add_option("candidate", o.model2, "Candidate model")->required();
  diff->add_option("-o,--out", o.out, "Write the report here instead of stdout");

  auto* scan = app.add_subcommand("scan", "Scan a model for backdoor-shaped structures");
  scan->add_option("model", o.model, "Model file")->required();
  scan->add_option("--ruleset", o.ruleset, "Ruleset JSON (default: built-in)");
  scan->add_option("-o,--out", o.out, "Write the report here instead of stdout");

  auto* verify = app.add_subcommand("verify", "Check a model against a hash manifest");
  verify->add_option("model", o.model, "Model file")->required();
  verify->add_option("manifest", o.model2, "Manifest file")->required();

  auto* registry = app.add_subcommand("registry", "Manifest registry operations");
  registry->require_subcommand(1);
  auto* publish = registry->add_subcommand("publish", "Append a manifest to a local store");
  publish->add_option("--store", o.store, "Registry file (.gsr)")->required();
  publish->add_option("--manifest", o.manifest, "Manifest to publish");
  publish->add_option("--model", o.model, "Model to hash and publish");
  publish->add_option("--model-id", o.model_id, "Model id")->required();
  publish->add_option("--version", o.version, "Version")->required();
  publish->add_option("--publisher", o.publisher, "Publisher (informational)");
  publish->add_option("--published-at", o.published_at, "Timestamp (default: now)");
  auto* lookup = registry->add_subcommand("lookup", "Print a registry entry");
  auto* check = registry->add_subcommand("check", "Verify a model against its registry entry");
  for (CLI::App* s : {lookup, check}) {
    s->add_option("--store", o.store, "Registry file (.gsr)");
    s->add_option("--url", o.url, "Registry URL (http://host[:port]/path)");
    s->add_option("--model-id", o.model_id, "Model id")->required();
    s->add_option("--version", o.version, "Version or 'latest'")->required();
  }
  check->add_option("model", o.model, "Model file")->required();

  auto* fixtures = app.add_subcommand("fixtures", "Generate fixtures");
  fixtures->require_subcommand(1);
  auto* gen = fixtures->add_subcommand("gen", "Generate a fixture");
  gen->add_option("--kind", o.kind, "toy | inputs | dump | random | corpus");
  gen->add_option("--seed", o.seed, "Generator seed")->required();
  gen->add_option("-o,--out", o.out, "Output file (directory for corpus)")->required();
  gen->add_option("--manifest", o.fixture_manifest, "Toy: also write the fixture manifest");
  gen->add_option("--truth", o.truth, "Dump: also write the planted truth as JSON");
  gen->add_option("--layers", o.layers, "Layer count");
  gen->add_option("--hidden-dim", o.hidden_dim, "Hidden width");
  gen->add_option("--vocab-size", o.vocab_size, "Toy vocabulary size");
  gen->add_option("--seq-len", o.seq_len, "Toy sequence length (0: symbolic)");
  gen->add_option("--cache-len", o.cache_len, "Toy cache length");
  gen->add_option("--naming", o.naming, "Toy naming scheme: llama or phi");
  gen->add_option("--input-seq-len", o.input_seq_len, "Inputs: bound length for symbolic seq");
  gen->add_option("--avoid-tokens", o.avoid_tokens, "Inputs: comma-separated tokens to avoid");
  gen->add_option("--per-class", o.per_class, "Dump: records per class");
  gen->add_option("--planted-layer", o.planted_layer, "Dump: layer carrying the direction");
  gen->add_option("--delta", o.delta, "Dump: planted offset");
  gen->add_option("--noise-sigma", o.noise_sigma, "Dump: noise standard deviation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    err << "error[" << ErrorCodeName(ErrorCode::kUsageError) << "]: " << e.what() << "\n";
    const CLI::App* failed = &app;
    for (const CLI::App* s = &app; s;) {
      failed = s;
      auto subs = s->get_subcommands();
      s = subs.empty() ? nullptr : subs.front();
    }
    err << failed->help();
    return kExitError;
  }

  try {
    if (*inspect) return CmdInspect(o, out);
    if (*run) {
      o.random_inputs = run->count("--random-seed") > 0;
      return CmdRun(o, out);
    }
    if (*instrument) return CmdInstrument(o, out);
    if (*extract) return CmdExtractVector(o, out, err);
    if (*inject) return CmdInject(o, out, *inject);
    if (*hash) return CmdHash(o, out);
    if (*diff) return CmdDiff(o, out);
    if (*scan) return CmdScan(o, out);
    if (*verify) return CmdVerify(o, out);
    if (*publish) return CmdPublish(o, out);
    if (*lookup) return CmdLookup(o, out);
    if (*check) return CmdCheck(o, out);
    if (*gen) return CmdFixtures(o, out);
  } catch (const Error& e) {
    err << "error[" << ErrorCodeName(e.code()) << "]: " << e.what() << "\n";
    if (e.code() == ErrorCode::kUsageError) err << app.help();
    return kExitError;
  } catch (const std::exception& e) {
    err << "error[" << ErrorCodeName(ErrorCode::kIoError) << "]: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace graphsentry
