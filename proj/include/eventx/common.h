// Copyright 2026 The EventX Authors.
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

#ifndef EVENTX_COMMON_H_
#define EVENTX_COMMON_H_

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace evx {

// Half-open token range [start, end).
struct TokenSpan {
  int start = 0;
  int end = 0;

  int length() const { return end - start; }
  bool empty() const { return end <= start; }
  bool contains(const TokenSpan &other) const {
    return start <= other.start && other.end <= end;
  }
  friend bool operator==(const TokenSpan &, const TokenSpan &) = default;
  friend auto operator<=>(const TokenSpan &, const TokenSpan &) = default;
};

// Number of tokens strictly between two spans; 0 when they touch or overlap.
int TokenGap(const TokenSpan &a, const TokenSpan &b);

// Errors. All derive from Error so callers can catch the family.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file. Message carries path and line.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Well-formed input that violates a structural invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

// A precondition of an operation was broken by the caller.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Warnings go through a replaceable sink (stderr by default).
using WarningSink = std::function<void(std::string_view)>;
void SetWarningSink(WarningSink sink);
void Warn(std::string_view message);

// Collects warnings for the lifetime of the object, restoring the previous
// sink on destruction.
class ScopedWarningCapture {
 public:
  ScopedWarningCapture();
  ~ScopedWarningCapture();
  ScopedWarningCapture(const ScopedWarningCapture &) = delete;
  ScopedWarningCapture &operator=(const ScopedWarningCapture &) = delete;

  const std::vector<std::string> &messages() const { return messages_; }

 private:
  std::vector<std::string> messages_;
  WarningSink previous_;
};

// String helpers shared by several modules.
std::string ToLower(std::string_view s);
std::vector<std::string> SplitWhitespace(std::string_view s);
std::string Join(const std::vector<std::string> &parts, std::string_view sep);

}  // namespace evx

#endif  // EVENTX_COMMON_H_
