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


// Message digests over OpenSSL's EVP interface.

#ifndef GRAPHSENTRY_DIGEST_H_
#define GRAPHSENTRY_DIGEST_H_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>

namespace graphsentry {

enum class DigestAlgorithm { kSha256, kSha384, kSha512 };

// Canonical names are "SHA-256", "SHA-384", "SHA-512"; lookups also accept
// the lowercase undashed forms. Unknown names throw kAlgorithmUnsupported.
std::string_view DigestAlgorithmName(DigestAlgorithm algorithm);
DigestAlgorithm DigestAlgorithmFromName(std::string_view name);

class Hasher {
 public:
  explicit Hasher(DigestAlgorithm algorithm = DigestAlgorithm::kSha256);
  ~Hasher();
  Hasher(const Hasher&) = delete;
  Hasher& operator=(const Hasher&) = delete;

  Hasher& Update(std::span<const uint8_t> data);
  Hasher& Update(std::string_view text);
  // Appends a little-endian u64; used to delimit variable-length fields.
  Hasher& UpdateU64(uint64_t v);
  // Lowercase hex. The hasher cannot be updated afterwards.
  std::string HexFinal();

 private:
  struct State;
  std::unique_ptr<State> state_;
};

std::string HexDigest(DigestAlgorithm algorithm, std::span<const uint8_t> data);
std::string HexDigest(DigestAlgorithm algorithm, std::string_view text);

}  // namespace graphsentry

#endif  // GRAPHSENTRY_DIGEST_H_
