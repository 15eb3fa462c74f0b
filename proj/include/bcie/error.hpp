// Copyright 2026 The BCIE Authors
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

#ifndef BCIE_ERROR_HPP
#define BCIE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace bcie {

// Values mirror bcie_status in bcie.h.
enum class ErrorCode {
  kUsage = 1,
  kData = 2,
  kNumerical = 3,
  kIo = 4,
  kNotFound = 5,
  kConflict = 6,
  kGone = 7,
  kDimension = 8,
  kExhausted = 9,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUsage: return "usage";
    case ErrorCode::kData: return "data";
    case ErrorCode::kNumerical: return "numerical";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kConflict: return "conflict";
    case ErrorCode::kGone: return "gone";
    case ErrorCode::kDimension: return "dimension";
    case ErrorCode::kExhausted: return "exhausted";
  }
  return "internal";
}

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace bcie

#endif  // BCIE_ERROR_HPP
