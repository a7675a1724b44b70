// wavprom/base/error.h

// Copyright 2025  Wavprom Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef WAVPROM_BASE_ERROR_H_
#define WAVPROM_BASE_ERROR_H_

#include <sstream>
#include <stdexcept>
#include <string>

namespace wavprom {

// Base error for runtime failures (I/O, divergence, ...). CLI maps this to
// exit code 1.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid user input: bad config values, malformed manifests, vote counts out
// of range. CLI maps this to exit code 2.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& msg) : Error(msg) {}
};

namespace internal {
inline void StrAppend(std::ostringstream&) {}
template <typename T, typename... Rest>
void StrAppend(std::ostringstream& os, const T& v, const Rest&... rest) {
  os << v;
  StrAppend(os, rest...);
}
}  // namespace internal

template <typename... Args>
std::string StrCat(const Args&... args) {
  std::ostringstream os;
  internal::StrAppend(os, args...);
  return os.str();
}

template <typename... Args>
[[noreturn]] void ThrowError(const Args&... args) {
  throw Error(StrCat(args...));
}

template <typename... Args>
[[noreturn]] void ThrowValidation(const Args&... args) {
  throw ValidationError(StrCat(args...));
}

#define WAVPROM_REQUIRE(cond, ...)                  \
  do {                                              \
    if (!(cond)) ::wavprom::ThrowValidation(__VA_ARGS__); \
  } while (0)

}  // namespace wavprom

#endif  // WAVPROM_BASE_ERROR_H_
