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


// Command-line front end. Exit codes: 0 success or clean, 2 findings or a
// mismatch, 1 error. Errors print "error[Code]: message" on `err`.

#ifndef GRAPHSENTRY_CLI_H_
#define GRAPHSENTRY_CLI_H_

#include <ostream>

namespace graphsentry {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitFindings = 2;

int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace graphsentry

#endif  // GRAPHSENTRY_CLI_H_
