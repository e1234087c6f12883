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


#include "graphsentry/digest.h"

#include <openssl/evp.h>

#include "graphsentry/error.h"

namespace graphsentry {

struct Hasher::State {
  EVP_MD_CTX* ctx = nullptr;
  bool finished = false;
};

std::string_view DigestAlgorithmName(DigestAlgorithm algorithm) {
  switch (algorithm) {
    case DigestAlgorithm::kSha256: return "SHA-256";
    case DigestAlgorithm::kSha384: return "SHA-384";
    case DigestAlgorithm::kSha512: return "SHA-512";
  }
  return "?";
}

DigestAlgorithm DigestAlgorithmFromName(std::string_view name) {
  if (name == "SHA-256" || name == "sha256") return DigestAlgorithm::kSha256;
  if (name == "SHA-384" || name == "sha384") return DigestAlgorithm::kSha384;
  if (name == "SHA-512" || name == "sha512") return DigestAlgorithm::kSha512;
  throw Error(ErrorCode::kAlgorithmUnsupported,
              "digest algorithm '" + std::string(name) + "' is not supported");
}

namespace {

const EVP_MD* Md(DigestAlgorithm algorithm) {
  switch (algorithm) {
    case DigestAlgorithm::kSha256: return EVP_sha256();
    case DigestAlgorithm::kSha384: return EVP_sha384();
    case DigestAlgorithm::kSha512: return EVP_sha512();
  }
  return nullptr;
}

[[noreturn]] void CryptoFailure(const char* what) {
  throw Error(ErrorCode::kIoError, std::string("digest failure in ") + what);
}

}  // namespace

Hasher::Hasher(DigestAlgorithm algorithm) : state_(std::make_unique<State>()) {
  state_->ctx = EVP_MD_CTX_new();
  if (!state_->ctx || EVP_DigestInit_ex(state_->ctx, Md(algorithm), nullptr) != 1) {
    EVP_MD_CTX_free(state_->ctx);
    CryptoFailure("init");
  }
}

Hasher::~Hasher() { EVP_MD_CTX_free(state_->ctx); }

Hasher& Hasher::Update(std::span<const uint8_t> data) {
  if (state_->finished) throw Error(ErrorCode::kInvalidArgument, "hasher already finalized");
  if (!data.empty() && EVP_DigestUpdate(state_->ctx, data.data(), data.size()) != 1) {
    CryptoFailure("update");
  }
  return *this;
}

Hasher& Hasher::Update(std::string_view text) {
  return Update(std::span<const uint8_t>(reinterpret_cast<const uint8_t*>(text.data()),
                                         text.size()));
}

Hasher& Hasher::UpdateU64(uint64_t v) {
  uint8_t buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<uint8_t>(v >> (8 * i));
  return Update(std::span<const uint8_t>(buf, 8));
}

std::string Hasher::HexFinal() {
  if (state_->finished) throw Error(ErrorCode::kInvalidArgument, "hasher already finalized");
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_DigestFinal_ex(state_->ctx, md, &len) != 1) CryptoFailure("final");
  state_->finished = true;
  static const char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xf]);
  }
  return out;
}

std::string HexDigest(DigestAlgorithm algorithm, std::span<const uint8_t> data) {
  return Hasher(algorithm).Update(data).HexFinal();
}

std::string HexDigest(DigestAlgorithm algorithm, std::string_view text) {
  return Hasher(algorithm).Update(text).HexFinal();
}

}  // namespace graphsentry
