// Copyright 2026 The rxopt Authors
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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rxopt {

enum class ErrorKind {
  NotPositiveDefinite,
  NonFiniteIntegrand,
  DimensionMismatch,
  EmptyDataset,
  SingularGram,
  DivergedLoss,
  RankExceedsDimension,
  UnsupportedCombination,
  FeatureDimensionOverflow,
  RankDeficientDesign,
  ZeroNoiseVariance,
  TestPartitionEmpty,
  FoldTooSmall,
  MissingColumn,
  NonNumericCell,
  EmptyFile,
  IoFailure,
  MixedModes,
  InvalidArgument,
  ConfigError,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the ErrorKind tags so
/// callers can branch on the condition without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

}  // namespace rxopt
