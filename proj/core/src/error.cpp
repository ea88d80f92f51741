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

#include "rxopt/error.hpp"

namespace rxopt {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::NonFiniteIntegrand: return "NonFiniteIntegrand";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::SingularGram: return "SingularGram";
    case ErrorKind::DivergedLoss: return "DivergedLoss";
    case ErrorKind::RankExceedsDimension: return "RankExceedsDimension";
    case ErrorKind::UnsupportedCombination: return "UnsupportedCombination";
    case ErrorKind::FeatureDimensionOverflow: return "FeatureDimensionOverflow";
    case ErrorKind::RankDeficientDesign: return "RankDeficientDesign";
    case ErrorKind::ZeroNoiseVariance: return "ZeroNoiseVariance";
    case ErrorKind::TestPartitionEmpty: return "TestPartitionEmpty";
    case ErrorKind::FoldTooSmall: return "FoldTooSmall";
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::NonNumericCell: return "NonNumericCell";
    case ErrorKind::EmptyFile: return "EmptyFile";
    case ErrorKind::IoFailure: return "IoFailure";
    case ErrorKind::MixedModes: return "MixedModes";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace rxopt
