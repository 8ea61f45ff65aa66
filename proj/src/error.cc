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

#include "restoragent/error.h"

namespace restoragent {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kFormat: return "FormatError";
    case ErrorCode::kInvalidParam: return "InvalidParam";
    case ErrorCode::kInvalidImage: return "InvalidImage";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kTooSmall: return "TooSmall";
    case ErrorCode::kStorage: return "StorageError";
    case ErrorCode::kDimMismatch: return "DimMismatch";
    case ErrorCode::kNoCandidateTool: return "NoCandidateTool";
    case ErrorCode::kBackendUnavailable: return "BackendUnavailable";
    case ErrorCode::kProtocol: return "ProtocolError";
    case ErrorCode::kUnknownTool: return "UnknownTool";
    case ErrorCode::kToolFailure: return "ToolFailure";
    case ErrorCode::kShapeViolation: return "ShapeViolation";
    case ErrorCode::kDegeneratePolicy: return "DegeneratePolicy";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kConfig: return "ConfigError";
  }
  return "Error";
}

}  // namespace restoragent
