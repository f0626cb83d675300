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

// Network messages between device and service. One ASCII line each,
// newline-terminated; see docs/wire_format.md.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "gauth/challenge.hpp"
#include "gauth/common.hpp"
#include "gauth/otp.hpp"

namespace gauth::protocol {

inline constexpr std::size_t kMaxUidChars = 64;

inline void validate_uid(std::string_view uid) {
  const bool ok = !uid.empty() && uid.size() <= kMaxUidChars &&
                  std::all_of(uid.begin(), uid.end(), [](char c) {
                    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                           c == '.' || c == '_' || c == '@' || c == '-';
                  });
  if (!ok) throw ParseError("uid", "expected 1-64 characters from [A-Za-z0-9._@-], got '" + std::string(uid) + "'");
}

struct AuthRequest {
  std::string uid;
  otp::OtpCode otp = otp::OtpCode::from_value(0, 6);
  std::string sid;
  std::string tid;
  std::string nonce;
  std::uint64_t challenge_ts = 0;  // echoed from the scanned payload
  bool reauth = false;
  std::uint64_t lamport_ts = 0;

  friend bool operator==(const AuthRequest&, const AuthRequest&) = default;
};

struct AuthAck {
  bool ok = false;
  bool continuous_required = false;
  std::optional<std::int64_t> t_reauth;  // seconds; present iff continuous_required
  std::uint64_t lamport_ts = 0;

  friend bool operator==(const AuthAck&, const AuthAck&) = default;
};

enum class EndCause { user_logout, service_terminate, lock_expired };

inline std::string_view to_string(EndCause c) {
  switch (c) {
    case EndCause::user_logout: return "logout";
    case EndCause::service_terminate: return "terminate";
    case EndCause::lock_expired: return "lock-expired";
  }
  return "?";
}

// Service -> device: leave continuous mode for `tid`.
struct SessionEnd {
  std::string tid;
  EndCause cause = EndCause::user_logout;
  std::uint64_t lamport_ts = 0;

  friend bool operator==(const SessionEnd&, const SessionEnd&) = default;
};

namespace wire_detail {

using challenge::detail::field_value;
using challenge::detail::split;

inline std::string ts11(std::uint64_t v) { return pad_digits(v, challenge::kTimestampDigits); }

inline std::string_view strip_newline(std::string_view line) {
  if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
  return line;
}

inline bool parse_flag(std::string_view v, const char* field) {
  if (v == "0") return false;
  if (v == "1") return true;
  throw ParseError(field, "expected 0 or 1, got '" + std::string(v) + "'");
}

inline void expect_header(const std::vector<std::string_view>& parts, std::string_view magic) {
  if (parts[0] != magic) throw ParseError("prefix", "expected " + std::string(magic));
  if (parts.size() < 2 || parts[1] != "v1") throw ParseError("version", "expected v1");
}

}  // namespace wire_detail

inline std::string encode_request(const AuthRequest& r) {
  validate_uid(r.uid);
  challenge::validate_sid(r.sid);
  challenge::validate_tid(r.tid);
  challenge::validate_nonce(r.nonce);
  using wire_detail::ts11;
  return "AUTHREQ|v1|uid=" + r.uid + "|otp=" + r.otp.digits() + "|sid=" + r.sid + "|tid=" + r.tid +
         "|nonce=" + r.nonce + "|ts=" + ts11(r.challenge_ts) + "|reauth=" + (r.reauth ? "1" : "0") +
         "|lts=" + ts11(r.lamport_ts) + "\n";
}

inline AuthRequest decode_request(std::string_view line) {
  using namespace wire_detail;
  const auto parts = split(strip_newline(line), '|');
  expect_header(parts, "AUTHREQ");
  static constexpr const char* kFields[] = {"prefix", "version", "uid", "otp", "sid", "tid", "nonce", "ts", "reauth", "lts"};
  if (parts.size() < std::size(kFields)) throw ParseError(kFields[parts.size()], "missing (truncated message)");
  if (parts.size() > std::size(kFields)) throw ParseError("lts", "unexpected trailing fields");
  AuthRequest r;
  r.uid = std::string(field_value(parts[2], "uid"));
  validate_uid(r.uid);
  r.otp = otp::OtpCode::parse(field_value(parts[3], "otp"));
  r.sid = std::string(field_value(parts[4], "sid"));
  challenge::validate_sid(r.sid);
  r.tid = std::string(field_value(parts[5], "tid"));
  challenge::validate_tid(r.tid);
  r.nonce = std::string(field_value(parts[6], "nonce"));
  challenge::validate_nonce(r.nonce);
  r.challenge_ts = challenge::parse_timestamp(field_value(parts[7], "ts"));
  r.reauth = parse_flag(field_value(parts[8], "reauth"), "reauth");
  r.lamport_ts = challenge::parse_timestamp(field_value(parts[9], "lts"), "lts");
  return r;
}

inline std::string encode_ack(const AuthAck& a) {
  if (a.continuous_required != a.t_reauth.has_value())
    throw ParseError("treauth", "t_reauth must be present iff continuous authentication is required");
  std::string out = std::string("AUTHACK|v1|status=") + (a.ok ? "OK" : "FAIL") + "|cont=" + (a.continuous_required ? "1" : "0");
  if (a.t_reauth) out += "|treauth=" + std::to_string(*a.t_reauth);
  return out + "|lts=" + wire_detail::ts11(a.lamport_ts) + "\n";
}

inline AuthAck decode_ack(std::string_view line) {
  using namespace wire_detail;
  const auto parts = split(strip_newline(line), '|');
  expect_header(parts, "AUTHACK");
  if (parts.size() < 4) throw ParseError(parts.size() < 3 ? "status" : "cont", "missing (truncated message)");
  AuthAck a;
  const auto status = field_value(parts[2], "status");
  if (status == "OK")
    a.ok = true;
  else if (status != "FAIL")
    throw ParseError("status", "expected OK or FAIL");
  a.continuous_required = parse_flag(field_value(parts[3], "cont"), "cont");
  std::size_t next = 4;
  if (a.continuous_required) {
    if (parts.size() <= next) throw ParseError("treauth", "missing (truncated message)");
    const auto v = field_value(parts[next++], "treauth");
    if (!all_digits(v) || v.size() > 9) throw ParseError("treauth", "expected positive integer seconds");
    a.t_reauth = std::stoll(std::string(v));
    if (*a.t_reauth <= 0) throw ParseError("treauth", "expected positive integer seconds");
  }
  if (parts.size() <= next) throw ParseError("lts", "missing (truncated message)");
  if (parts.size() > next + 1) throw ParseError("lts", "unexpected trailing fields");
  a.lamport_ts = challenge::parse_timestamp(field_value(parts[next], "lts"), "lts");
  return a;
}

inline std::string encode_session_end(const SessionEnd& e) {
  challenge::validate_tid(e.tid);
  return "ENDSESS|v1|tid=" + e.tid + "|cause=" + std::string(to_string(e.cause)) + "|lts=" +
         wire_detail::ts11(e.lamport_ts) + "\n";
}

inline SessionEnd decode_session_end(std::string_view line) {
  using namespace wire_detail;
  const auto parts = split(strip_newline(line), '|');
  expect_header(parts, "ENDSESS");
  static constexpr const char* kFields[] = {"prefix", "version", "tid", "cause", "lts"};
  if (parts.size() < std::size(kFields)) throw ParseError(kFields[parts.size()], "missing (truncated message)");
  if (parts.size() > std::size(kFields)) throw ParseError("lts", "unexpected trailing fields");
  SessionEnd e;
  e.tid = std::string(field_value(parts[2], "tid"));
  challenge::validate_tid(e.tid);
  const auto cause = field_value(parts[3], "cause");
  if (cause == "logout")
    e.cause = EndCause::user_logout;
  else if (cause == "terminate")
    e.cause = EndCause::service_terminate;
  else if (cause == "lock-expired")
    e.cause = EndCause::lock_expired;
  else
    throw ParseError("cause", "unknown cause '" + std::string(cause) + "'");
  e.lamport_ts = challenge::parse_timestamp(field_value(parts[4], "lts"), "lts");
  return e;
}

}  // namespace gauth::protocol
