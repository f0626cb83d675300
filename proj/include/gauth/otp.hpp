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

// HMAC-SHA1 one-time passwords (RFC 4226 HOTP, RFC 6238 TOTP).
//
// User codes are TOTP over K_U; terminal-generated challenge nonces are HOTP
// over K_N so the service can check them without talking to the terminal.

#pragma once

#include <openssl/evp.h>
#include <openssl/hmac.h>

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gauth/base32.hpp"
#include "gauth/common.hpp"

namespace gauth::otp {

inline constexpr std::size_t kMinKeyBytes = 10;
inline constexpr std::size_t kDefaultWidth = 6;

class OtpKey {
 public:
  explicit OtpKey(std::vector<std::uint8_t> bytes, std::string label = {})
      : bytes_(std::move(bytes)), label_(std::move(label)) {
    if (bytes_.size() < kMinKeyBytes)
      throw Error("otp key must be at least " + std::to_string(kMinKeyBytes) + " bytes, got " +
                  std::to_string(bytes_.size()));
  }

  static OtpKey from_ascii(std::string_view text, std::string label = {}) {
    return OtpKey({text.begin(), text.end()}, std::move(label));
  }
  static OtpKey from_base32(std::string_view text, std::string label = {}) {
    return OtpKey(base32::decode(text), std::move(label));
  }

  std::span<const std::uint8_t> bytes() const noexcept { return bytes_; }
  const std::string& label() const noexcept { return label_; }
  std::string to_base32() const { return base32::encode(bytes_, false); }

  friend bool operator==(const OtpKey& a, const OtpKey& b) { return a.bytes_ == b.bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
  std::string label_;
};

// A decimal code of fixed width, leading zeros included.
class OtpCode {
 public:
  // Throws ParseError for anything that is not 6..8 decimal digits.
  static OtpCode parse(std::string_view digits) {
    if (digits.size() < 6 || digits.size() > 8)
      throw ParseError("otp", "expected 6-8 digits, got " + std::to_string(digits.size()) + " characters");
    if (!all_digits(digits)) throw ParseError("otp", "non-decimal character in '" + std::string(digits) + "'");
    return OtpCode(std::string(digits));
  }

  static OtpCode from_value(std::uint32_t value, std::size_t width) { return OtpCode(pad_digits(value, width)); }

  const std::string& digits() const noexcept { return digits_; }
  std::size_t width() const noexcept { return digits_.size(); }

  friend bool operator==(const OtpCode&, const OtpCode&) = default;

 private:
  explicit OtpCode(std::string digits) : digits_(std::move(digits)) {}
  std::string digits_;
};

struct TotpParams {
  std::int64_t time_step = 30;  // seconds
  std::int64_t t0 = 0;          // seconds since epoch
  int skew_window = 1;          // steps accepted on either side

  void validate() const {
    if (time_step <= 0) throw Error("totp time_step must be positive");
    if (skew_window < 0) throw Error("totp skew_window must be non-negative");
  }
};

struct HotpCounter {
  std::uint64_t value = 0;
  int lookahead = 3;
};

// Independent of code width: compares every position even after a mismatch.
inline bool constant_time_equal(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  unsigned char diff = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    diff |= static_cast<unsigned char>(a[i] ^ b[i]);
  return diff == 0;
}

namespace detail {

inline std::array<std::uint8_t, 20> hmac_sha1(std::span<const std::uint8_t> key, std::uint64_t counter) {
  std::array<std::uint8_t, 8> msg{};
  for (int i = 7; i >= 0; --i) {
    msg[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(counter & 0xFF);
    counter >>= 8;
  }
  std::array<std::uint8_t, 20> mac{};
  unsigned int len = 0;
  if (HMAC(EVP_sha1(), key.data(), static_cast<int>(key.size()), msg.data(), msg.size(), mac.data(), &len) ==
          nullptr ||
      len != mac.size())
    throw Error("HMAC-SHA1 failed");
  return mac;
}

inline std::uint32_t pow10(std::size_t width) {
  std::uint32_t m = 1;
  for (std::size_t i = 0; i < width; ++i) m *= 10;
  return m;
}

}  // namespace detail

inline OtpCode hotp_generate(const OtpKey& key, std::uint64_t counter, std::size_t width = kDefaultWidth) {
  if (width < 6 || width > 8) throw Error("hotp width must be in [6, 8]");
  const auto mac = detail::hmac_sha1(key.bytes(), counter);
  const std::size_t offset = mac[19] & 0x0F;
  const std::uint32_t binary = (static_cast<std::uint32_t>(mac[offset] & 0x7F) << 24) |
                               (static_cast<std::uint32_t>(mac[offset + 1]) << 16) |
                               (static_cast<std::uint32_t>(mac[offset + 2]) << 8) |
                               static_cast<std::uint32_t>(mac[offset + 3]);
  return OtpCode::from_value(binary % detail::pow10(width), width);
}

inline std::uint64_t totp_counter(std::int64_t unix_time, const TotpParams& params) {
  params.validate();
  if (unix_time < params.t0) throw Error("unix_time precedes the TOTP epoch t0");
  return static_cast<std::uint64_t>((unix_time - params.t0) / params.time_step);
}

inline OtpCode totp_generate(const OtpKey& key, std::int64_t unix_time, const TotpParams& params = {},
                             std::size_t width = kDefaultWidth) {
  return hotp_generate(key, totp_counter(unix_time, params), width);
}

enum class VerifyStatus { accepted, mismatch, malformed };

struct TotpVerdict {
  VerifyStatus status = VerifyStatus::mismatch;
  int offset = 0;  // matched step offset; meaningful only when accepted
  bool accepted() const noexcept { return status == VerifyStatus::accepted; }
};

inline TotpVerdict totp_verify(const OtpKey& key, const OtpCode& candidate, std::int64_t unix_time,
                               const TotpParams& params = {}) {
  const auto center = static_cast<std::int64_t>(totp_counter(unix_time, params));
  bool matched = false;
  int matched_offset = 0;
  // Every offset is evaluated so timing does not reveal which one matched.
  for (int off = -params.skew_window; off <= params.skew_window; ++off) {
    const std::int64_t step = center + off;
    if (step < 0) continue;
    const auto expected = hotp_generate(key, static_cast<std::uint64_t>(step), candidate.width());
    if (constant_time_equal(expected.digits(), candidate.digits()) && !matched) {
      matched = true;
      matched_offset = off;
    }
  }
  return matched ? TotpVerdict{VerifyStatus::accepted, matched_offset} : TotpVerdict{VerifyStatus::mismatch, 0};
}

// Raw-text entry point for verifiers that receive codes off the wire.
inline TotpVerdict totp_verify(const OtpKey& key, std::string_view candidate, std::int64_t unix_time,
                               const TotpParams& params = {}) {
  std::optional<OtpCode> code;
  try {
    code = OtpCode::parse(candidate);
  } catch (const ParseError&) {
    return {VerifyStatus::malformed, 0};
  }
  return totp_verify(key, *code, unix_time, params);
}

struct HotpVerdict {
  bool accepted = false;
  std::uint64_t counter = 0;  // counter value after the call
};

// Accepts a code from [value, value + lookahead]; on success the counter moves
// past the matched position so the same code can never verify again.
inline HotpVerdict hotp_verify_window(const OtpKey& key, const OtpCode& candidate, HotpCounter& counter) {
  for (int i = 0; i <= counter.lookahead; ++i) {
    const std::uint64_t c = counter.value + static_cast<std::uint64_t>(i);
    if (constant_time_equal(hotp_generate(key, c, candidate.width()).digits(), candidate.digits())) {
      counter.value = c + 1;
      return {true, counter.value};
    }
  }
  return {false, counter.value};
}

}  // namespace gauth::otp
