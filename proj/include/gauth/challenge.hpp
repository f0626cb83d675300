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

// The challenge a terminal shows as a visual code, and the nonce sources
// behind it.
//
// Canonical text form (ASCII, bit-exact):
//
//   GAUTH|v1|sid=<4 digits>|tid=<1-16 alnum>|nonce=<6 digits>|ts=<11 digits>|opt=<flags>
//
// Flags are single characters. 'C' marks a terminal that requires continuous
// authentication; any other flag is carried through decode/encode untouched.

#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gauth/common.hpp"
#include "gauth/otp.hpp"

namespace gauth::challenge {

inline constexpr std::string_view kMagic = "GAUTH";
inline constexpr std::string_view kVersion = "v1";
inline constexpr std::size_t kSidDigits = 4;
inline constexpr std::size_t kNonceDigits = 6;
inline constexpr std::size_t kTimestampDigits = 11;
inline constexpr std::size_t kMaxTidChars = 16;
inline constexpr std::uint64_t kMaxTimestamp = 99'999'999'999ULL;

struct Options {
  bool continuous = false;
  std::string unknown;  // unrecognized flags, preserved in arrival order

  friend bool operator==(const Options&, const Options&) = default;
};

struct ChallengePayload {
  std::string sid;
  std::string tid;
  std::string nonce;
  std::uint64_t timestamp = 0;  // seconds since epoch, rendered as 11 digits
  Options options;

  friend bool operator==(const ChallengePayload&, const ChallengePayload&) = default;
};

inline void validate_sid(std::string_view sid) {
  if (sid.size() != kSidDigits || !all_digits(sid))
    throw ParseError("sid", "expected exactly 4 decimal digits, got '" + std::string(sid) + "'");
}

inline void validate_tid(std::string_view tid) {
  if (tid.empty() || tid.size() > kMaxTidChars || !all_alnum(tid))
    throw ParseError("tid", "expected 1-16 alphanumeric characters, got '" + std::string(tid) + "'");
}

inline void validate_nonce(std::string_view nonce) {
  if (nonce.size() != kNonceDigits || !all_digits(nonce))
    throw ParseError("nonce", "expected exactly 6 decimal digits, got '" + std::string(nonce) + "'");
}

inline void validate_flags(std::string_view flags) {
  for (char c : flags)
    if (c < '!' || c > '~' || c == '|')
      throw ParseError("opt", "flag characters must be printable ASCII other than '|'");
}

inline std::uint64_t parse_timestamp(std::string_view text, const char* field = "ts") {
  if (text.size() != kTimestampDigits || !all_digits(text))
    throw ParseError(field, "expected exactly 11 decimal digits, got '" + std::string(text) + "'");
  return std::stoull(std::string(text));
}

inline void validate(const ChallengePayload& p) {
  validate_sid(p.sid);
  validate_tid(p.tid);
  validate_nonce(p.nonce);
  if (p.timestamp > kMaxTimestamp) throw ParseError("ts", "timestamp does not fit in 11 digits");
  validate_flags(p.options.unknown);
  if (p.options.unknown.find('C') != std::string::npos)
    throw ParseError("opt", "'C' belongs in Options::continuous, not the unknown flag set");
}

inline std::string encode_flags(const Options& o) { return (o.continuous ? "C" : "") + o.unknown; }

inline Options decode_flags(std::string_view flags) {
  validate_flags(flags);
  Options o;
  for (char c : flags) {
    if (c == 'C')
      o.continuous = true;
    else
      o.unknown.push_back(c);
  }
  return o;
}

inline std::string encode_payload(const ChallengePayload& p) {
  validate(p);
  std::string out;
  out.reserve(80);
  out.append(kMagic).append("|").append(kVersion);
  out.append("|sid=").append(p.sid);
  out.append("|tid=").append(p.tid);
  out.append("|nonce=").append(p.nonce);
  out.append("|ts=").append(pad_digits(p.timestamp, kTimestampDigits));
  out.append("|opt=").append(encode_flags(p.options));
  return out;
}

namespace detail {

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

// Splits "key=value", insisting on the expected key.
inline std::string_view field_value(std::string_view part, std::string_view key) {
  if (part.size() < key.size() + 1 || part.substr(0, key.size()) != key || part[key.size()] != '=')
    throw ParseError(std::string(key), "expected '" + std::string(key) + "=...', got '" + std::string(part) + "'");
  return part.substr(key.size() + 1);
}

}  // namespace detail

// Strict parse; either the whole payload or a ParseError naming the first bad
// field. Nothing partial is ever returned.
inline ChallengePayload decode_payload(std::string_view s) {
  static constexpr std::string_view kFields[] = {"prefix", "version", "sid", "tid", "nonce", "ts", "opt"};
  const auto parts = detail::split(s, '|');
  if (parts[0] != kMagic) throw ParseError("prefix", "payload does not start with GAUTH");
  if (parts.size() < 2 || parts[1] != kVersion)
    throw ParseError("version", parts.size() < 2 ? "missing" : "unsupported version '" + std::string(parts[1]) + "'");
  if (parts.size() < std::size(kFields)) throw ParseError(std::string(kFields[parts.size()]), "missing (truncated payload)");
  if (parts.size() > std::size(kFields)) throw ParseError("opt", "unexpected trailing fields");

  ChallengePayload p;
  p.sid = std::string(detail::field_value(parts[2], "sid"));
  validate_sid(p.sid);
  p.tid = std::string(detail::field_value(parts[3], "tid"));
  validate_tid(p.tid);
  p.nonce = std::string(detail::field_value(parts[4], "nonce"));
  validate_nonce(p.nonce);
  p.timestamp = parse_timestamp(detail::field_value(parts[5], "ts"));
  p.options = decode_flags(detail::field_value(parts[6], "opt"));
  return p;
}

// Cost of the canonical text in QR byte mode.
inline std::size_t optical_bits(const ChallengePayload& p) { return 8 * encode_payload(p).size(); }

enum class NonceMode { service_random, terminal_hotp };

// Service-random nonces come from a seeded generator (seed from
// std::random_device when none is given). Terminal-HOTP nonces are
// hotp_generate(K_N, counter, 6) with the counter advancing per draw.
class NonceSource {
 public:
  static NonceSource service_random(std::optional<std::uint64_t> seed = std::nullopt,
                                    std::uint32_t range = 1'000'000) {
    if (range == 0 || range > 1'000'000) throw Error("nonce range must be in [1, 10^6]");
    std::uint64_t s = seed ? *seed : (std::uint64_t{std::random_device{}()} << 32) ^ std::random_device{}();
    return NonceSource(RandomState{std::mt19937_64(s), range});
  }

  static NonceSource terminal_hotp(otp::OtpKey k_n, otp::HotpCounter counter = {}) {
    return NonceSource(HotpState{std::move(k_n), counter});
  }

  NonceMode mode() const noexcept {
    return std::holds_alternative<RandomState>(state_) ? NonceMode::service_random : NonceMode::terminal_hotp;
  }

  // HOTP counter of a terminal source; nullopt in service-random mode.
  std::optional<std::uint64_t> counter() const {
    if (auto* h = std::get_if<HotpState>(&state_)) return h->counter.value;
    return std::nullopt;
  }

  std::string next() {
    if (auto* r = std::get_if<RandomState>(&state_)) {
      // rejection sampling keeps the draw unbiased for any range
      const std::uint64_t limit = std::mt19937_64::max() - (std::mt19937_64::max() % r->range);
      std::uint64_t v;
      do {
        v = r->rng();
      } while (v >= limit);
      return pad_digits(v % r->range, kNonceDigits);
    }
    auto& h = std::get<HotpState>(state_);
    auto code = otp::hotp_generate(h.key, h.counter.value, kNonceDigits);
    ++h.counter.value;
    return code.digits();
  }

 private:
  struct RandomState {
    std::mt19937_64 rng;
    std::uint32_t range;
  };
  struct HotpState {
    otp::OtpKey key;
    otp::HotpCounter counter;
  };

  template <typename S>
  explicit NonceSource(S s) : state_(std::move(s)) {}

  std::variant<RandomState, HotpState> state_;
};

inline std::string next_nonce(NonceSource& src) { return src.next(); }

}  // namespace gauth::challenge
