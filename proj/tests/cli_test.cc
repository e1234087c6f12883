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


#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "graphsentry/cli.h"
#include "graphsentry/error.h"
#include "graphsentry/onnx_io.h"
#include "graphsentry/sentinel.h"
#include "graphsentry/tensor_bundle.h"
#include "graphsentry/vector_lab.h"
#include "json.hpp"
#include "test_support.h"

namespace graphsentry {
namespace {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

CliResult Cli(std::vector<std::string> args) {
  args.insert(args.begin(), "graphsentry");
  std::vector<char*> argv;
  for (std::string& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  CliResult r;
  r.code = RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string ReadText(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runs the installed binary through the shell; returns the exit status.
int Spawn(const std::string& args, std::string* out) {
  const std::string cmd = std::string(GRAPHSENTRY_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* p = ::popen(cmd.c_str(), "r");
  if (!p) return -1;
  char buf[4096];
  size_t n;
  while ((n = std::fread(buf, 1, sizeof(buf), p)) > 0) out->append(buf, n);
  const int status = ::pclose(p);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    chain_ = tmp_.File("chain.onnx");
    SaveModel(chain_, testing::ThreeNodeChain());
  }

  // Toy model, its vector and an injected copy.
  void Pipeline(const std::string& mode = "if") {
    toy_ = tmp_.File("toy.onnx");
    ASSERT_EQ(Cli({"fixtures", "gen", "--kind", "toy", "--seed", "3", "-o", toy_}).code, 0);
    const std::string dump = tmp_.File("d.avd");
    ASSERT_EQ(Cli({"fixtures", "gen", "--kind", "dump", "--seed", "4", "--layers", "2",
                   "--hidden-dim", "8", "--per-class", "20", "--planted-layer", "1", "-o", dump})
                  .code,
              0);
    vec_ = tmp_.File("v.uvec");
    ASSERT_EQ(Cli({"extract-vector", dump, "-o", vec_}).code, 0);
    injected_ = tmp_.File("inj_" + mode + ".onnx");
    const CliResult r = Cli({"inject", toy_, "--vector", vec_, "-o", injected_, "--mode", mode,
                             "--trigger-tokens", "9,7", "--seed", "11"});
    ASSERT_EQ(r.code, 0) << r.err;
  }

  testing::TempDir tmp_;
  std::string chain_, toy_, vec_, injected_;
};

TEST_F(CliTest, InspectMatchesGolden) {
  const std::string golden =
      ReadText(std::string(GRAPHSENTRY_SOURCE_DIR) + "/tests/golden/chain_inspect.txt");
  const CliResult r = Cli({"inspect", chain_});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, golden);
  EXPECT_EQ(Cli({"inspect", chain_, "-o", tmp_.File("dump.txt")}).code, 0);
  EXPECT_EQ(ReadText(tmp_.File("dump.txt")), golden);
}

TEST_F(CliTest, ReportsAreByteStable) {
  Pipeline();
  for (const std::vector<std::string>& args :
       {std::vector<std::string>{"inspect", injected_}, {"scan", injected_},
        {"diff", toy_, injected_}, {"hash", injected_, "--created-at", "2026-01-01T00:00:00Z"}}) {
    const CliResult a = Cli(args);
    const CliResult b = Cli(args);
    EXPECT_EQ(a.out, b.out) << args[0];
    EXPECT_EQ(a.code, b.code);
    EXPECT_FALSE(a.out.empty());
  }
  // Injection itself is reproducible byte for byte.
  const std::string again = tmp_.File("again.onnx");
  ASSERT_EQ(Cli({"inject", toy_, "--vector", vec_, "-o", again, "--mode", "if",
                 "--trigger-tokens", "9,7", "--seed", "11"})
                .code,
            0);
  EXPECT_EQ(ReadText(again), ReadText(injected_));
}

TEST_F(CliTest, HashTwiceIsIdentical) {
  const CliResult a = Cli({"hash", chain_, "-o", tmp_.File("a.gsm"), "--created-at", "2026-05-05T00:00:00Z"});
  const CliResult b = Cli({"hash", chain_, "-o", tmp_.File("b.gsm"), "--created-at", "2026-05-05T00:00:00Z"});
  EXPECT_EQ(a.code, 0);
  EXPECT_EQ(ReadText(tmp_.File("a.gsm")), ReadText(tmp_.File("b.gsm")));
  const HashManifest m = HashManifest::FromJson(ReadText(tmp_.File("a.gsm")));
  EXPECT_EQ(m.model_id, "chain");
  EXPECT_EQ(m, CanonicalHash(testing::ThreeNodeChain(),
                             {.model_id = "chain", .created_at = "2026-05-05T00:00:00Z"}));
  // Without --created-at only the timestamp may differ.
  HashManifest x = HashManifest::FromJson(Cli({"hash", chain_}).out);
  HashManifest y = HashManifest::FromJson(Cli({"hash", chain_}).out);
  x.created_at = y.created_at = "";
  EXPECT_EQ(x, y);
  const HashManifest topo = HashManifest::FromJson(
      Cli({"hash", chain_, "--no-weights", "--algorithm", "sha384"}).out);
  EXPECT_FALSE(topo.weights_digest.has_value());
  EXPECT_EQ(topo.algorithm, "SHA-384");
}

TEST_F(CliTest, InjectThenScanFindsIt) {
  Pipeline();
  EXPECT_EQ(Cli({"scan", toy_}).code, 0);
  const CliResult r = Cli({"scan", injected_});
  EXPECT_EQ(r.code, 2);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_FALSE(j.at("clean").get<bool>());
  EXPECT_GE(j.at("findings").size(), 1u);
  Pipeline("obfuscated");
  EXPECT_EQ(Cli({"scan", injected_}).code, 2);
}

TEST_F(CliTest, DiffExitCodes) {
  const CliResult same = Cli({"diff", chain_, chain_});
  EXPECT_EQ(same.code, 0);
  EXPECT_TRUE(nlohmann::json::parse(same.out).at("empty").get<bool>());
  Pipeline();
  const CliResult changed = Cli({"diff", toy_, injected_, "-o", tmp_.File("d.json")});
  EXPECT_EQ(changed.code, 2);
  EXPECT_FALSE(nlohmann::json::parse(ReadText(tmp_.File("d.json"))).at("empty").get<bool>());
}

TEST_F(CliTest, VerifyAndRegistry) {
  Pipeline();
  ASSERT_EQ(Cli({"hash", toy_, "-o", tmp_.File("toy.gsm")}).code, 0);
  EXPECT_EQ(Cli({"verify", toy_, tmp_.File("toy.gsm")}).out, "pass\n");
  const CliResult bad = Cli({"verify", injected_, tmp_.File("toy.gsm")});
  EXPECT_EQ(bad.code, 2);
  EXPECT_EQ(bad.out, "topology_mismatch\n");

  const std::string store = tmp_.File("r.gsr");
  const CliResult pub = Cli({"registry", "publish", "--store", store, "--manifest",
                             tmp_.File("toy.gsm"), "--model-id", "toy", "--version", "1.0",
                             "--publisher", "ci"});
  ASSERT_EQ(pub.code, 0) << pub.err;
  EXPECT_EQ(nlohmann::json::parse(pub.out).at("line").get<int>(), 1);
  EXPECT_EQ(Cli({"registry", "publish", "--store", store, "--model", toy_, "--model-id", "toy",
                 "--version", "1.1"})
                .code,
            0);
  const CliResult dup = Cli({"registry", "publish", "--store", store, "--model", toy_,
                             "--model-id", "toy", "--version", "1.1"});
  EXPECT_EQ(dup.code, 1);
  EXPECT_NE(dup.err.find("error[DuplicateEntry]"), std::string::npos);

  const CliResult look = Cli({"registry", "lookup", "--store", store, "--model-id", "toy",
                              "--version", "latest"});
  EXPECT_EQ(look.code, 0);
  EXPECT_EQ(nlohmann::json::parse(look.out).at("version"), "1.1");
  EXPECT_EQ(Cli({"registry", "lookup", "--store", store, "--model-id", "nope", "--version", "1"})
                .code,
            1);
  const CliResult ok = Cli({"registry", "check", "--store", store, "--model-id", "toy",
                            "--version", "1.0", toy_});
  EXPECT_EQ(ok.code, 0);
  EXPECT_EQ(ok.out, "verified\n");
  const CliResult tampered = Cli({"registry", "check", "--store", store, "--model-id", "toy",
                                  "--version", "1.0", injected_});
  EXPECT_EQ(tampered.code, 2);
  EXPECT_EQ(tampered.out, "tampered(topology)\n");
  const CliResult unknown = Cli({"registry", "check", "--store", store, "--model-id", "ghost",
                                 "--version", "1.0", toy_});
  EXPECT_EQ(unknown.code, 2);
  EXPECT_EQ(unknown.out, "unknown_model\n");
}

TEST_F(CliTest, RunWithBundlesAndBackends) {
  Pipeline();
  const std::string in = tmp_.File("in.atb");
  ASSERT_EQ(Cli({"fixtures", "gen", "--kind", "inputs", "--seed", "5", "--input-seq-len", "4",
                 "--avoid-tokens", "9", "-o", in})
                .code,
            0);
  const CliResult a = Cli({"run", toy_, "--inputs", in, "-o", tmp_.File("a.atb")});
  const CliResult b = Cli({"run", injected_, "--inputs", in, "--backend", "reference"});
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  // Untriggered: identical output digests.
  EXPECT_EQ(nlohmann::json::parse(a.out).at("outputs"), nlohmann::json::parse(b.out).at("outputs"));
  const TensorMap saved = ReadBundle(tmp_.File("a.atb"));
  EXPECT_TRUE(saved.count("logits"));
  const CliResult cap = Cli({"run", chain_, "--random-seed", "1", "--capture"});
  EXPECT_EQ(cap.code, 0);
  EXPECT_TRUE(nlohmann::json::parse(cap.out).contains("intermediates"));
  EXPECT_EQ(Cli({"run", chain_}).code, 1);
  EXPECT_EQ(Cli({"run", chain_, "--random-seed", "1", "--backend", "gpu"}).code, 1);
}

TEST_F(CliTest, InstrumentAndExtract) {
  const CliResult r = Cli({"instrument", chain_, "-o", tmp_.File("i.onnx")});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(LoadModel(tmp_.File("i.onnx")).outputs.size(), 3u);
  ASSERT_EQ(Cli({"fixtures", "gen", "--kind", "dump", "--seed", "2", "--layers", "3",
                 "--hidden-dim", "4", "--per-class", "10", "--planted-layer", "2", "-o",
                 tmp_.File("d.avd")})
                .code,
            0);
  const CliResult e = Cli({"extract-vector", tmp_.File("d.avd"), "-o", tmp_.File("v.uvec"),
                           "--alpha", "1.5"});
  EXPECT_EQ(e.code, 0);
  EXPECT_NE(e.out.find("selected\t2\n"), std::string::npos);
  EXPECT_EQ(ReadVector(tmp_.File("v.uvec")).alpha, 1.5);
  EXPECT_EQ(Cli({"extract-vector", tmp_.File("d.avd"), "-o", tmp_.File("w.uvec"), "--alpha", "50"})
                .code,
            1);
}

TEST_F(CliTest, ConfigFileFillsFlagsAndFlagsWin) {
  Pipeline();
  const std::string cfg = tmp_.File("gs.ini");
  std::ofstream(cfg) << "[inject]\nmode=obfuscated\ntrigger-tokens=\"9,7\"\nseed=11\n";
  const std::string out = tmp_.File("cfg.onnx");
  const CliResult r = Cli({"--config", cfg, "inject", toy_, "--vector", vec_, "-o", out});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(nlohmann::json::parse(r.out).at("mode"), "obfuscated");
  const CliResult w = Cli({"--config", cfg, "inject", toy_, "--vector", vec_, "-o", out,
                           "--mode", "if"});
  ASSERT_EQ(w.code, 0) << w.err;
  EXPECT_EQ(nlohmann::json::parse(w.out).at("mode"), "if_guarded");
}

TEST_F(CliTest, ErrorsCarryStableCodes) {
  const CliResult usage = Cli({"inject", chain_});
  EXPECT_EQ(usage.code, 1);
  EXPECT_EQ(usage.err.rfind("error[UsageError]", 0), 0u);
  EXPECT_NE(usage.err.find("--trigger-tokens"), std::string::npos);
  const CliResult missing = Cli({"inspect", tmp_.File("absent.onnx")});
  EXPECT_EQ(missing.code, 1);
  EXPECT_EQ(missing.err.rfind("error[IoError]", 0), 0u);
  const CliResult none = Cli({});
  EXPECT_EQ(none.code, 1);
  const CliResult bad_tokens = Cli({"inject", chain_, "--vector", "v", "-o", "x",
                                    "--trigger-tokens", "9,x", "--seed", "1"});
  EXPECT_EQ(bad_tokens.code, 1);
  EXPECT_EQ(Cli({"--help"}).code, 0);
  EXPECT_EQ(Cli({"fixtures", "gen", "--kind", "nope", "--seed", "1", "-o", "x"}).code, 1);
}

TEST_F(CliTest, CorpusGeneration) {
  const CliResult r = Cli({"fixtures", "gen", "--kind", "corpus", "--seed", "0", "-o",
                           tmp_.File("corpus")});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 20);
  for (const auto& entry : std::filesystem::directory_iterator(tmp_.File("corpus"))) {
    if (entry.path().extension() == ".onnx") {
      EXPECT_EQ(Cli({"scan", entry.path().string()}).code, 0) << entry.path();
    }
  }
}

TEST_F(CliTest, BinaryExitCodes) {
  Pipeline();
  std::string out;
  EXPECT_EQ(Spawn("scan " + toy_, &out), 0);
  EXPECT_EQ(Spawn("scan " + injected_, &out), 2);
  EXPECT_EQ(Spawn("inspect /nonexistent.onnx", &out), 1);
  out.clear();
  EXPECT_EQ(Spawn("inspect " + chain_, &out), 0);
  EXPECT_EQ(out, ReadText(std::string(GRAPHSENTRY_SOURCE_DIR) + "/tests/golden/chain_inspect.txt"));
}

}  // namespace
}  // namespace graphsentry
