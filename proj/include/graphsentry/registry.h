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


// Registry of published hash manifests.
//
// A registry is a UTF-8 text file (".gsr") holding one key-sorted JSON entry
// per line. Local stores append under an exclusive lock and never rewrite
// earlier lines. Remote stores fetch the same file over HTTP GET, honouring
// ETag so an unchanged registry is not transferred twice.

#ifndef GRAPHSENTRY_REGISTRY_H_
#define GRAPHSENTRY_REGISTRY_H_

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "graphsentry/graph.h"
#include "graphsentry/sentinel.h"

namespace graphsentry {

// Version selector resolving to the lexicographically greatest version.
// Caveat: the order is plain byte order, so "1.10" sorts before "1.2".
inline constexpr std::string_view kLatestVersion = "latest";

struct RegistryEntry {
  std::string model_id;
  std::string version;
  HashManifest manifest;
  std::string publisher;
  std::string published_at;

  // One line of key-sorted JSON, no trailing newline.
  std::string ToLine() const;
  static RegistryEntry FromLine(const std::string& line);  // kMalformedManifest
  friend bool operator==(const RegistryEntry&, const RegistryEntry&) = default;
};

struct PublishReceipt {
  std::string model_id;
  std::string version;
  std::string entry_digest;  // SHA-256 hex of the entry line
  int64_t line = 0;          // 1-based line number in the store file
};

// Parses registry file text. Blank lines are ignored; a malformed line or a
// duplicate (model_id, version) throws kStoreIO naming the line.
std::vector<RegistryEntry> ParseRegistry(const std::string& text);

// Resolves `version` (or kLatestVersion) among `entries`. Throws kNotFound.
RegistryEntry FindEntry(const std::vector<RegistryEntry>& entries,
                        std::string_view model_id, std::string_view version);

class RegistryStore {
 public:
  virtual ~RegistryStore() = default;
  // Current snapshot of all entries in file order. Throws kStoreIO.
  virtual std::vector<RegistryEntry> Entries() = 0;

  RegistryEntry Lookup(std::string_view model_id, std::string_view version);
};

class LocalStore : public RegistryStore {
 public:
  // The file need not exist until the first publish.
  explicit LocalStore(std::filesystem::path path) : path_(std::move(path)) {}

  std::vector<RegistryEntry> Entries() override;

  // Throws kDuplicateEntry, kStoreIO, or kInvalidArgument for an empty id or
  // version or the reserved version "latest".
  PublishReceipt Publish(const RegistryEntry& entry);

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Read-only store behind an "http://host[:port]/path" URL.
class RemoteStore : public RegistryStore {
 public:
  explicit RemoteStore(std::string url);  // kInvalidArgument for bad URLs

  std::vector<RegistryEntry> Entries() override;

  // True if the last Entries() call was answered with 304 Not Modified.
  bool last_fetch_cached() const;

 private:
  std::string host_;
  int port_ = 80;
  std::string path_;
  mutable std::mutex mu_;
  std::optional<std::string> etag_;
  std::vector<RegistryEntry> cached_;
  bool last_cached_ = false;
};

enum class ArtifactVerdict { kVerified, kTamperedTopology, kTamperedWeights, kUnknownModel };
std::string_view ArtifactVerdictName(ArtifactVerdict v);

// Looks up the entry and verifies `graph` against its manifest. Throws
// kStoreIO for unreadable stores.
ArtifactVerdict CheckArtifact(RegistryStore& store, std::string_view model_id,
                              std::string_view version, const Graph& graph);

}  // namespace graphsentry

#endif  // GRAPHSENTRY_REGISTRY_H_
