// Copyright 2026 The Gauth Authors
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

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gauth {

// All protocol and simulator times are integer milliseconds. Protocol-level
// "now" values are milliseconds since the Unix epoch; simulator times are
// milliseconds since the start of a run. One millisecond is the simulator tick.
using Millis = std::chrono::milliseconds;

inline std::int64_t unix_seconds(Millis epoch_ms) {
  auto ms = epoch_ms.count();
  // floor division so pre-epoch instants still land in the right second
  return ms >= 0 ? ms / 1000 : -((-ms + 999) / 1000);
}

inline Millis from_seconds(double s) {
  return Millis{static_cast<std::int64_t>(s * 1000.0 + (s >= 0 ? 0.5 : -0.5))};
}

inline double to_seconds(Millis ms) { return static_cast<double>(ms.count()) / 1000.0; }

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised for malformed text (payloads, wire lines, keys, scenario files).
// `field` names the first offending field or location.
class ParseError : public Error {
 public:
  ParseError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

inline bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

inline bool all_alnum(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
  });
}

// Zero-padded decimal rendering; throws if the value needs more digits.
inline std::string pad_digits(std::uint64_t value, std::size_t width) {
  std::string s = std::to_string(value);
  if (s.size() > width) throw Error("value " + s + " exceeds " + std::to_string(width) + " digits");
  return std::string(width - s.size(), '0') + s;
}

}  // namespace gauth
