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
#include <cstdint>

namespace gauth::protocol {

// Lamport clock whose counter lives in the same unit as the 11-digit
// timestamps on the wire (seconds). Two things are tracked separately:
//
//  - `logical` orders events: it never decreases, jumps past every received
//    stamp, and is never behind the local wall clock when stamping a send.
//  - `peer_offset` is the wall-clock estimate (received - local_time) that
//    timers use. Ordering and offset estimation are distinct concerns.
class LamportClock {
 public:
  explicit LamportClock(std::int64_t local_time = 0) : local_time_(local_time) {}

  void set_local_time(std::int64_t seconds) { local_time_ = seconds; }

  // Stamp for an outgoing message.
  std::uint64_t stamp() {
    const auto wall = static_cast<std::uint64_t>(std::max<std::int64_t>(local_time_, 0));
    logical_ = std::max(logical_ + 1, wall);
    return logical_;
  }

  // Receipt rule: logical = max(logical, received) + 1.
  void update(std::uint64_t received) {
    logical_ = std::max(logical_, received) + 1;
    peer_offset_ = static_cast<std::int64_t>(received) - local_time_;
  }

  std::uint64_t logical() const noexcept { return logical_; }
  std::int64_t local_time() const noexcept { return local_time_; }
  std::int64_t peer_offset() const noexcept { return peer_offset_; }

  // Test hook: start from an arbitrary counter.
  void set_logical(std::uint64_t v) { logical_ = v; }

 private:
  std::int64_t local_time_ = 0;
  std::uint64_t logical_ = 0;
  std::int64_t peer_offset_ = 0;
};

inline LamportClock& lamport_update(LamportClock& clock, std::uint64_t received_ts) {
  clock.update(received_ts);
  return clock;
}

}  // namespace gauth::protocol
