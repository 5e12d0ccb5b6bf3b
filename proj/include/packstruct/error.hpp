// Copyright 2026 The packstruct Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace packstruct {

enum class ErrorKind {
  kInvalidArgument,
  kDimensionMismatch,
  kEmptyInput,
  kEmptyMask,
  kNotQuadrilateral,
  kDegenerateQuad,
  kAtInfinity,
  kPalletCountError,
  kSideCountError,
  kMixedPackageCategories,
  kEmptySide,
  kEmptySideMask,
  kAmbiguousSides,
  kVerticalCountMismatch,
  kGenerationError,
  kPairingError,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kEmptyInput: return "EmptyInput";
    case ErrorKind::kEmptyMask: return "EmptyMask";
    case ErrorKind::kNotQuadrilateral: return "NotQuadrilateral";
    case ErrorKind::kDegenerateQuad: return "DegenerateQuad";
    case ErrorKind::kAtInfinity: return "AtInfinity";
    case ErrorKind::kPalletCountError: return "PalletCountError";
    case ErrorKind::kSideCountError: return "SideCountError";
    case ErrorKind::kMixedPackageCategories: return "MixedPackageCategories";
    case ErrorKind::kEmptySide: return "EmptySide";
    case ErrorKind::kEmptySideMask: return "EmptySideMask";
    case ErrorKind::kAmbiguousSides: return "AmbiguousSides";
    case ErrorKind::kVerticalCountMismatch: return "VerticalCountMismatch";
    case ErrorKind::kGenerationError: return "GenerationError";
    case ErrorKind::kPairingError: return "PairingError";
  }
  return "Unknown";
}

/// Library error. `values` carries the integer payload of count errors,
/// e.g. {k} for PalletCountError(k) or {left, right} for
/// VerticalCountMismatch(left, right).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::vector<int> values = {})
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind),
        values_(std::move(values)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::vector<int>& values() const noexcept { return values_; }

  const std::string& unit_id() const noexcept { return unit_id_; }
  void set_unit_id(std::string id) { unit_id_ = std::move(id); }

 private:
  ErrorKind kind_;
  std::vector<int> values_;
  std::string unit_id_;
};

/// Document parse failure. `record_index` is -1 for envelope-level problems.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, int record_index = -1)
      : std::runtime_error(record_index >= 0
                               ? "record " + std::to_string(record_index) + ": " + message
                               : message),
        record_index_(record_index) {}

  int record_index() const noexcept { return record_index_; }

 private:
  int record_index_;
};

}  // namespace packstruct
