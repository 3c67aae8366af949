// Copyright 2026 The ovb Authors
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


#ifndef OVB_TOOLS_CLI_H_
#define OVB_TOOLS_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace ovb::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

// Runs one invocation; args excludes the program name. Machine-readable
// output goes to out, diagnostics and summaries to err.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

// Flat "key = value" config file; '#' starts a comment. Keys are long flag
// names without the leading dashes.
std::vector<std::pair<std::string, std::string>> parse_config(
    const std::string& contents);

}  // namespace ovb::cli

#endif  // OVB_TOOLS_CLI_H_
