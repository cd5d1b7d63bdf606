// Copyright 2026 ecgpipe contributors
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

namespace ecgpipe {

enum class Errc {
  // i/o and decoding
  FileNotFound,
  UnsupportedFormat,
  CorruptImage,
  ZeroDimension,
  // dataset
  MissingClassDir,
  EmptyClass,
  DuplicatePath,
  ClassTooSmall,
  // augment
  CountMismatch,
  // model
  ShapeMismatch,
  LabelOutOfRange,
  EmptySplit,
  MissingSample,
  BadSpec,
  // eval
  LengthMismatch,
  EmptyMatrix,
  ZeroN,
  SingleClass,
  FoldCountMismatch,
  // scorecam
  NoActivationCapability,
  LayerNotFound,
  ClassOutOfRange,
  DimensionMismatch,
  // cli / config
  BadConfig,
  Internal,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::FileNotFound: return "FileNotFound";
    case Errc::UnsupportedFormat: return "UnsupportedFormat";
    case Errc::CorruptImage: return "CorruptImage";
    case Errc::ZeroDimension: return "ZeroDimension";
    case Errc::MissingClassDir: return "MissingClassDir";
    case Errc::EmptyClass: return "EmptyClass";
    case Errc::DuplicatePath: return "DuplicatePath";
    case Errc::ClassTooSmall: return "ClassTooSmall";
    case Errc::CountMismatch: return "CountMismatch";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::LabelOutOfRange: return "LabelOutOfRange";
    case Errc::EmptySplit: return "EmptySplit";
    case Errc::MissingSample: return "MissingSample";
    case Errc::BadSpec: return "BadSpec";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::EmptyMatrix: return "EmptyMatrix";
    case Errc::ZeroN: return "ZeroN";
    case Errc::SingleClass: return "SingleClass";
    case Errc::FoldCountMismatch: return "FoldCountMismatch";
    case Errc::NoActivationCapability: return "NoActivationCapability";
    case Errc::LayerNotFound: return "LayerNotFound";
    case Errc::ClassOutOfRange: return "ClassOutOfRange";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::BadConfig: return "BadConfig";
    case Errc::Internal: return "Internal";
  }
  return "Unknown";
}

// true for errors caused by user input (bad files, bad config); such errors
// map to process exit code 2, everything else to 1.
inline bool errc_is_user_error(Errc c) {
  switch (c) {
    case Errc::ShapeMismatch:
    case Errc::Internal:
      return false;
    default:
      return true;
  }
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, Errc code, const std::string& what) {
  if (!cond) raise(code, what);
}

}  // namespace ecgpipe
