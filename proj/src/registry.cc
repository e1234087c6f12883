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


#include "graphsentry/registry.h"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "graphsentry/digest.h"
#include "graphsentry/error.h"
#include "httplib.h"
#include "json.hpp"

namespace graphsentry {

namespace {

using nlohmann::json;

[[noreturn]] void StoreIO(const std::string& msg) { throw Error(ErrorCode::kStoreIO, msg); }

std::string Errno() { return std::strerror(errno); }

// Closes the descriptor and releases its lock on scope exit.
class LockedFile {
 public:
  explicit LockedFile(const std::filesystem::path& path) {
    fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd_ < 0) StoreIO("cannot open " + path.string() + ": " + Errno());
    if (::flock(fd_, LOCK_EX) != 0) {
      const std::string err = Errno();
      ::close(fd_);
      StoreIO("cannot lock " + path.string() + ": " + err);
    }
  }
  ~LockedFile() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  LockedFile(const LockedFile&) = delete;
  LockedFile& operator=(const LockedFile&) = delete;

  std::string ReadAll() const {
    std::string out;
    char buf[1 << 16];
    off_t offset = 0;
    for (;;) {
      const ssize_t n = ::pread(fd_, buf, sizeof(buf), offset);
      if (n < 0) {
        if (errno == EINTR) continue;
        StoreIO("read failed: " + Errno());
      }
      if (n == 0) break;
      out.append(buf, static_cast<size_t>(n));
      offset += n;
    }
    return out;
  }

  void Append(const std::string& data) const {
    size_t done = 0;
    while (done < data.size()) {
      const ssize_t n = ::write(fd_, data.data() + done, data.size() - done);
      if (n < 0) {
        if (errno == EINTR) continue;
        StoreIO("write failed: " + Errno());
      }
      done += static_cast<size_t>(n);
    }
    if (::fsync(fd_) != 0) StoreIO("fsync failed: " + Errno());
  }

 private:
  int fd_ = -1;
};

}  // namespace

std::string RegistryEntry::ToLine() const {
  json j;
  j["model_id"] = model_id;
  j["version"] = version;
  j["manifest"] = json::parse(manifest.ToJson());
  j["publisher"] = publisher;
  j["published_at"] = published_at;
  return j.dump();
}

RegistryEntry RegistryEntry::FromLine(const std::string& line) {
  RegistryEntry e;
  try {
    const json j = json::parse(line);
    e.model_id = j.at("model_id").get<std::string>();
    e.version = j.at("version").get<std::string>();
    e.publisher = j.at("publisher").get<std::string>();
    e.published_at = j.at("published_at").get<std::string>();
    e.manifest = HashManifest::FromJson(j.at("manifest").dump());
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::kMalformedManifest, std::string("registry entry: ") + ex.what());
  }
  return e;
}

std::vector<RegistryEntry> ParseRegistry(const std::string& text) {
  std::vector<RegistryEntry> entries;
  std::set<std::pair<std::string, std::string>> keys;
  std::istringstream in(text);
  std::string line;
  int64_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    RegistryEntry e;
    try {
      e = RegistryEntry::FromLine(line);
    } catch (const Error& ex) {
      StoreIO("registry line " + std::to_string(number) + ": " + ex.what());
    }
    if (!keys.emplace(e.model_id, e.version).second) {
      StoreIO("registry line " + std::to_string(number) + ": duplicate " + e.model_id + "@" +
              e.version);
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

RegistryEntry FindEntry(const std::vector<RegistryEntry>& entries, std::string_view model_id,
                        std::string_view version) {
  const RegistryEntry* best = nullptr;
  for (const RegistryEntry& e : entries) {
    if (e.model_id != model_id) continue;
    if (version == kLatestVersion) {
      if (!best || e.version > best->version) best = &e;
    } else if (e.version == version) {
      return e;
    }
  }
  if (!best) {
    throw Error(ErrorCode::kNotFound,
                "no entry for " + std::string(model_id) + "@" + std::string(version));
  }
  return *best;
}

RegistryEntry RegistryStore::Lookup(std::string_view model_id, std::string_view version) {
  return FindEntry(Entries(), model_id, version);
}

std::vector<RegistryEntry> LocalStore::Entries() {
  std::error_code ec;
  if (!std::filesystem::exists(path_, ec)) return {};
  std::ifstream in(path_, std::ios::binary);
  if (!in) StoreIO("cannot read " + path_.string());
  std::stringstream ss;
  ss << in.rdbuf();
  if (in.bad()) StoreIO("cannot read " + path_.string());
  return ParseRegistry(ss.str());
}

PublishReceipt LocalStore::Publish(const RegistryEntry& entry) {
  if (entry.model_id.empty() || entry.version.empty() || entry.version == kLatestVersion) {
    throw Error(ErrorCode::kInvalidArgument,
                "entry needs a model id and a version other than 'latest'");
  }
  const std::string line = entry.ToLine();
  LockedFile file(path_);
  std::string existing = file.ReadAll();
  for (const RegistryEntry& e : ParseRegistry(existing)) {
    if (e.model_id == entry.model_id && e.version == entry.version) {
      throw Error(ErrorCode::kDuplicateEntry,
                  entry.model_id + "@" + entry.version + " is already published");
    }
  }
  std::string data;
  if (!existing.empty() && existing.back() != '\n') data = "\n";
  data += line + "\n";
  file.Append(data);
  existing += data;
  PublishReceipt r;
  r.model_id = entry.model_id;
  r.version = entry.version;
  r.entry_digest = HexDigest(DigestAlgorithm::kSha256, line);
  r.line = std::count(existing.begin(), existing.end(), '\n');
  return r;
}

RemoteStore::RemoteStore(std::string url) {
  static const std::regex kUrl(R"(^http://([A-Za-z0-9.\-]+|\[[0-9A-Fa-f:]+\])(?::(\d{1,5}))?(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, kUrl)) {
    throw Error(ErrorCode::kInvalidArgument, "unsupported registry URL '" + url + "'");
  }
  host_ = m[1].str();
  if (m[2].matched) port_ = std::stoi(m[2].str());
  path_ = m[3].matched ? m[3].str() : "/";
  if (port_ <= 0 || port_ > 65535) throw Error(ErrorCode::kInvalidArgument, "bad port in " + url);
}

std::vector<RegistryEntry> RemoteStore::Entries() {
  std::lock_guard<std::mutex> lock(mu_);
  httplib::Client client(host_, port_);
  client.set_connection_timeout(5);
  client.set_read_timeout(10);
  httplib::Headers headers;
  if (etag_) headers.emplace("If-None-Match", *etag_);
  auto res = client.Get(path_, headers);
  if (!res) {
    StoreIO("GET http://" + host_ + ":" + std::to_string(port_) + path_ + " failed: " +
            httplib::to_string(res.error()));
  }
  if (res->status == 304 && etag_) {
    last_cached_ = true;
    return cached_;
  }
  if (res->status != 200) StoreIO("GET " + path_ + " returned HTTP " + std::to_string(res->status));
  std::vector<RegistryEntry> entries = ParseRegistry(res->body);
  last_cached_ = false;
  if (res->has_header("ETag")) {
    etag_ = res->get_header_value("ETag");
  } else {
    etag_.reset();
  }
  cached_ = entries;
  return entries;
}

bool RemoteStore::last_fetch_cached() const {
  std::lock_guard<std::mutex> lock(mu_);
  return last_cached_;
}

std::string_view ArtifactVerdictName(ArtifactVerdict v) {
  switch (v) {
    case ArtifactVerdict::kVerified:
      return "verified";
    case ArtifactVerdict::kTamperedTopology:
      return "tampered(topology)";
    case ArtifactVerdict::kTamperedWeights:
      return "tampered(weights)";
    case ArtifactVerdict::kUnknownModel:
      return "unknown_model";
  }
  return "?";
}

ArtifactVerdict CheckArtifact(RegistryStore& store, std::string_view model_id,
                              std::string_view version, const Graph& graph) {
  RegistryEntry entry;
  try {
    entry = store.Lookup(model_id, version);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kNotFound) return ArtifactVerdict::kUnknownModel;
    throw;
  }
  switch (VerifyAgainstManifest(graph, entry.manifest)) {
    case Verdict::kPass:
      return ArtifactVerdict::kVerified;
    case Verdict::kTopologyMismatch:
      return ArtifactVerdict::kTamperedTopology;
    case Verdict::kWeightsMismatch:
      return ArtifactVerdict::kTamperedWeights;
  }
  return ArtifactVerdict::kUnknownModel;
}

}  // namespace graphsentry
