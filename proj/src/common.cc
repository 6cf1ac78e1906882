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

#include "eventx/common.h"

#include <algorithm>
#include <cctype>
#include <iostream>
#include <mutex>
#include <sstream>

namespace evx {

int TokenGap(const TokenSpan &a, const TokenSpan &b) {
  if (a.end <= b.start) return b.start - a.end;
  if (b.end <= a.start) return a.start - b.end;
  return 0;
}

namespace {

std::mutex &SinkMutex() {
  static std::mutex mu;
  return mu;
}

WarningSink &Sink() {
  static WarningSink sink = [](std::string_view msg) {
    std::cerr << "warning: " << msg << "\n";
  };
  return sink;
}

}  // namespace

void SetWarningSink(WarningSink sink) {
  std::lock_guard<std::mutex> lock(SinkMutex());
  Sink() = std::move(sink);
}

void Warn(std::string_view message) {
  WarningSink sink;
  {
    std::lock_guard<std::mutex> lock(SinkMutex());
    sink = Sink();
  }
  if (sink) sink(message);
}

ScopedWarningCapture::ScopedWarningCapture() {
  std::lock_guard<std::mutex> lock(SinkMutex());
  previous_ = Sink();
  Sink() = [this](std::string_view msg) { messages_.emplace_back(msg); };
}

ScopedWarningCapture::~ScopedWarningCapture() {
  std::lock_guard<std::mutex> lock(SinkMutex());
  Sink() = std::move(previous_);
}

std::string ToLower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::vector<std::string> SplitWhitespace(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::string Join(const std::vector<std::string> &parts, std::string_view sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace evx
