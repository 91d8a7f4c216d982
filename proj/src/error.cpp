// Copyright 2026 The robustream Authors
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

#include "robustream/error.hpp"

namespace robustream {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput: return "InvalidInput";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kStreamExhausted: return "StreamExhausted";
    case ErrorCode::kPruneFailed: return "PruneFailed";
    case ErrorCode::kFilterStuck: return "FilterStuck";
    case ErrorCode::kNumericalFailure: return "NumericalFailure";
    case ErrorCode::kIo: return "IoError";
  }
  return "Unknown";
}

}  // namespace robustream
