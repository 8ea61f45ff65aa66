// Copyright 2026 The Restoragent Authors.
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

#ifndef RESTORAGENT_ERROR_H_
#define RESTORAGENT_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace restoragent {

enum class ErrorCode {
  kIo,
  kFormat,
  kInvalidParam,
  kInvalidImage,
  kShapeMismatch,
  kTooSmall,
  kStorage,
  kDimMismatch,
  kNoCandidateTool,
  kBackendUnavailable,
  kProtocol,
  kUnknownTool,
  kToolFailure,
  kShapeViolation,
  kDegeneratePolicy,
  kLengthMismatch,
  kConfig,
};

std::string_view ErrorCodeName(ErrorCode code);

// Every domain failure in the library is reported as an Error carrying one of
// the codes above. The CLI maps these to exit status 1.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code),
        message_(message) {}

  ErrorCode code() const { return code_; }
  // The message without the code prefix.
  const std::string& message() const { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace restoragent

#endif  // RESTORAGENT_ERROR_H_
