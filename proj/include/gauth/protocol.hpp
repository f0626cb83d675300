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

// Device, terminal and service state machines.
//
// A login runs: the challenge reaches the terminal screen (pushed by the
// service when it drives the UI, generated by the terminal otherwise), the
// device scans it, sends one AuthRequest over its pinned channel, and the
// service answers with an AuthAck. A terminal that drives its own UI learns
// the outcome from a separate service notification.

#pragma once

#include <deque>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gauth/challenge.hpp"
#include "gauth/common.hpp"
#include "gauth/lamport.hpp"
#include "gauth/otp.hpp"
#include "gauth/wire.hpp"

namespace gauth::protocol {

using challenge::ChallengePayload;

// What a device learns about a service at association time. `fingerprint`
// stands in for the service certificate.
struct ServiceIdentity {
  std::string fingerprint;
  std::string sid;
  std::string uri;
};

struct Credential {
  std::string service_fingerprint;
  std::string sid;
  std::string service_uri;
  std::string uid;
  otp::OtpKey k_u;
};

class DeviceStore {
 public:
  const Credential& associate(const ServiceIdentity& service, std::string uid, otp::OtpKey k_u) {
    challenge::validate_sid(service.sid);
    validate_uid(uid);
    for (const auto& c : creds_)
      if (c.service_fingerprint == service.fingerprint && c.uid == uid)
        throw Error("device already associated with service " + service.sid + " as " + uid);
    creds_.push_back(Credential{service.fingerprint, service.sid, service.uri, std::move(uid), std::move(k_u)});
    return creds_.back();
  }

  const Credential* find_by_sid(std::string_view sid) const {
    for (const auto& c : creds_)
      if (c.sid == sid) return &c;
    return nullptr;
  }

  std::size_t size() const noexcept { return creds_.size(); }

 private:
  std::vector<Credential> creds_;
};

// Device -> service transport. Confidentiality is assumed; what is modeled is
// server authentication: the channel only opens to an endpoint presenting the
// fingerprint and URI stored with the credential.
class SecureChannel {
 public:
  static std::optional<SecureChannel> open(const Credential& cred, const ServiceIdentity& endpoint) {
    if (cred.service_fingerprint != endpoint.fingerprint || cred.service_uri != endpoint.uri) return std::nullopt;
    return SecureChannel(endpoint);
  }

  // Serializes the request into its wire line.
  std::string send(const AuthRequest& req) {
    ++sent_;
    return encode_request(req);
  }

  const ServiceIdentity& peer() const noexcept { return peer_; }
  std::size_t messages_sent() const noexcept { return sent_; }

 private:
  explicit SecureChannel(ServiceIdentity peer) : peer_(std::move(peer)) {}
  ServiceIdentity peer_;
  std::size_t sent_ = 0;
};

enum class UiMode { service_driven, terminal_driven };

inline std::string_view to_string(UiMode m) {
  return m == UiMode::service_driven ? "service-driven" : "terminal-driven";
}

struct TerminalRegistration {
  std::string tid;
  std::string sid;
  std::optional<otp::OtpKey> k_n;  // terminal-driven only
  otp::HotpCounter nonce_counter;
  UiMode ui_mode = UiMode::service_driven;
  bool continuous = false;  // terminal requires continuous authentication

  void validate() const {
    challenge::validate_tid(tid);
    challenge::validate_sid(sid);
    if (k_n.has_value() != (ui_mode == UiMode::terminal_driven))
      throw Error("terminal " + tid + ": K_N must be present iff the UI is terminal-driven");
    if (nonce_counter.lookahead < 0) throw Error("terminal " + tid + ": negative HOTP lookahead");
  }
};

// ---------------------------------------------------------------------------
// Device

struct NoMatch {};  // no credential for the scanned SID; nothing is sent

struct Ignored {  // pinned to another terminal while in continuous mode
  std::string pinned_tid;
};

using ScanResult = std::variant<AuthRequest, NoMatch, Ignored>;

class Device {
 public:
  explicit Device(otp::TotpParams totp = {}) : totp_(totp) {}

  DeviceStore& store() noexcept { return store_; }
  const DeviceStore& store() const noexcept { return store_; }
  LamportClock& clock() noexcept { return clock_; }

  bool in_continuous_mode() const noexcept { return pinned_tid_.has_value(); }
  const std::optional<std::string>& pinned_tid() const noexcept { return pinned_tid_; }
  std::optional<std::int64_t> t_reauth() const noexcept { return t_reauth_; }

  ScanResult on_scan(const ChallengePayload& p, Millis now) {
    clock_.set_local_time(unix_seconds(now));
    clock_.update(p.timestamp);
    if (pinned_tid_ && *pinned_tid_ != p.tid) return Ignored{*pinned_tid_};
    const Credential* cred = store_.find_by_sid(p.sid);
    if (cred == nullptr) return NoMatch{};
    AuthRequest req;
    req.uid = cred->uid;
    req.otp = otp::totp_generate(cred->k_u, unix_seconds(now), totp_);
    req.sid = p.sid;
    req.tid = p.tid;
    req.nonce = p.nonce;
    req.challenge_ts = p.timestamp;
    req.reauth = pinned_tid_.has_value();
    req.lamport_ts = clock_.stamp();
    return req;
  }

  void on_ack(const AuthRequest& sent, const AuthAck& ack, Millis now) {
    clock_.set_local_time(unix_seconds(now));
    clock_.update(ack.lamport_ts);
    if (ack.ok && ack.continuous_required && !pinned_tid_) {
      pinned_tid_ = sent.tid;
      t_reauth_ = ack.t_reauth;
    }
  }

  void on_session_end(const SessionEnd& end, Millis now) {
    clock_.set_local_time(unix_seconds(now));
    clock_.update(end.lamport_ts);
    if (pinned_tid_ && *pinned_tid_ == end.tid) {
      pinned_tid_.reset();
      t_reauth_.reset();
    }
  }

 private:
  otp::TotpParams totp_;
  DeviceStore store_;
  LamportClock clock_;
  std::optional<std::string> pinned_tid_;
  std::optional<std::int64_t> t_reauth_;
};

// ---------------------------------------------------------------------------
// Terminal

enum class Screen { login, in_session, locked };

inline std::string_view to_string(Screen s) {
  switch (s) {
    case Screen::login: return "login";
    case Screen::in_session: return "in-session";
    case Screen::locked: return "locked";
  }
  return "?";
}

class Terminal {
 public:
  explicit Terminal(TerminalRegistration reg) : reg_(std::move(reg)) {
    reg_.validate();
    if (reg_.ui_mode == UiMode::terminal_driven)
      nonces_.emplace(challenge::NonceSource::terminal_hotp(*reg_.k_n, reg_.nonce_counter));
  }

  const TerminalRegistration& registration() const noexcept { return reg_; }
  const std::string& tid() const noexcept { return reg_.tid; }
  Screen screen() const noexcept { return screen_; }
  const std::optional<std::string>& session_owner() const noexcept { return owner_; }
  const std::optional<ChallengePayload>& displayed() const noexcept { return displayed_; }
  LamportClock& clock() noexcept { return clock_; }

  // Terminal-driven generation: fresh HOTP nonce under K_N.
  ChallengePayload issue_challenge(Millis now) {
    if (!nonces_) throw Error("terminal " + reg_.tid + " does not generate its own challenges");
    clock_.set_local_time(unix_seconds(now));
    ChallengePayload p;
    p.sid = reg_.sid;
    p.tid = reg_.tid;
    p.nonce = nonces_->next();
    p.timestamp = clock_.stamp();
    p.options.continuous = reg_.continuous;
    return p;
  }

  std::optional<std::uint64_t> nonce_counter() const { return nonces_ ? nonces_->counter() : std::nullopt; }

  void display(ChallengePayload p) { displayed_ = std::move(p); }

  // Outcome notification from the service. Failure leaves the current
  // challenge on screen.
  void on_notify(bool success, const std::string& uid) {
    if (!success) return;
    if (screen_ == Screen::login || (screen_ == Screen::locked && owner_ == uid)) {
      screen_ = Screen::in_session;
      owner_ = uid;
      if (!reg_.continuous) displayed_.reset();
    }
  }

  void lock() {
    if (screen_ == Screen::in_session) screen_ = Screen::locked;
  }

  void logout() {
    screen_ = Screen::login;
    owner_.reset();
    displayed_.reset();
  }

  // Removes a re-authentication code once it has been answered.
  void clear_code() {
    if (screen_ == Screen::in_session) displayed_.reset();
  }

 private:
  TerminalRegistration reg_;
  std::optional<challenge::NonceSource> nonces_;
  LamportClock clock_;
  Screen screen_ = Screen::login;
  std::optional<std::string> owner_;
  std::optional<ChallengePayload> displayed_;
};

// ---------------------------------------------------------------------------
// Service

struct ServicePolicy {
  otp::TotpParams totp;
  std::int64_t t_reauth = 5;  // seconds, announced on continuous terminals
  Millis pending_expiry{120'000};
  std::uint32_t nonce_range = 1'000'000;
  std::optional<std::uint64_t> nonce_seed;
  bool throttle_enabled = true;
  int throttle_failures = 5;
  Millis throttle_window{60'000};
  Millis throttle_refusal{30'000};
  std::size_t consumed_history = 64;  // per terminal, for distinct failure reasons
};

enum class FailReason {
  none,
  malformed,
  wrong_service,
  unknown_uid,
  throttled,
  unknown_terminal,
  terminal_busy,
  bad_otp,
  unknown_nonce,
  nonce_consumed,
  nonce_stale,
};

inline std::string_view to_string(FailReason r) {
  switch (r) {
    case FailReason::none: return "ok";
    case FailReason::malformed: return "malformed";
    case FailReason::wrong_service: return "wrong-service";
    case FailReason::unknown_uid: return "unknown-uid";
    case FailReason::throttled: return "throttled";
    case FailReason::unknown_terminal: return "unknown-terminal";
    case FailReason::terminal_busy: return "terminal-busy";
    case FailReason::bad_otp: return "bad-otp";
    case FailReason::unknown_nonce: return "unknown-nonce";
    case FailReason::nonce_consumed: return "nonce-consumed";
    case FailReason::nonce_stale: return "nonce-stale";
  }
  return "?";
}

struct Verification {
  AuthAck ack;
  FailReason reason = FailReason::none;  // service-side only; never on the wire
  bool notify_terminal = false;          // terminal-driven UI: step 5 is due

  bool accepted() const noexcept { return reason == FailReason::none; }
};

struct LogEntry {
  Millis at;
  std::string uid;
  std::string tid;
  bool reauth = false;
  FailReason reason = FailReason::none;
};

class Service {
 public:
  explicit Service(ServiceIdentity identity, ServicePolicy policy = {})
      : identity_(std::move(identity)),
        policy_(policy),
        random_nonces_(challenge::NonceSource::service_random(policy.nonce_seed, policy.nonce_range)) {
    challenge::validate_sid(identity_.sid);
    policy_.totp.validate();
  }

  const ServiceIdentity& identity() const noexcept { return identity_; }
  const ServicePolicy& policy() const noexcept { return policy_; }
  LamportClock& clock() noexcept { return clock_; }
  const std::vector<LogEntry>& log() const noexcept { return log_; }

  void enroll_user(std::string uid, otp::OtpKey k_u) {
    validate_uid(uid);
    if (!users_.try_emplace(uid, User{std::move(k_u), {}, Millis{0}}).second) throw Error("user " + uid + " already enrolled");
  }

  void register_terminal(const TerminalRegistration& reg) {
    reg.validate();
    if (reg.sid != identity_.sid) throw Error("terminal " + reg.tid + " belongs to service " + reg.sid);
    if (!terminals_.try_emplace(reg.tid, TerminalState{reg, std::nullopt, {}, std::nullopt}).second)
      throw Error("terminal " + reg.tid + " already registered");
  }

  bool has_terminal(const std::string& tid) const { return terminals_.count(tid) != 0; }
  const TerminalRegistration& terminal(const std::string& tid) const { return state(tid).reg; }

  // Service-driven UI: draws a random nonce, records it as the terminal's
  // single pending nonce (the previous one becomes stale) and returns the
  // payload to render.
  ChallengePayload issue_challenge(const std::string& tid, Millis now) {
    auto& t = state(tid);
    if (t.reg.ui_mode != UiMode::service_driven)
      throw Error("terminal " + tid + " generates its own challenges");
    retire_pending(t);
    clock_.set_local_time(unix_seconds(now));
    ChallengePayload p;
    p.sid = identity_.sid;
    p.tid = tid;
    p.nonce = random_nonces_.next();
    p.timestamp = clock_.stamp();
    p.options.continuous = t.reg.continuous;
    t.pending = Pending{p.nonce, now, false};
    return p;
  }

  std::optional<std::string> pending_nonce(const std::string& tid) const {
    const auto& t = state(tid);
    if (t.pending && !t.pending->consumed) return t.pending->nonce;
    return std::nullopt;
  }

  std::optional<std::string> session_owner(const std::string& tid) const { return state(tid).owner; }
  void release_session(const std::string& tid) { state(tid).owner.reset(); }

  Verification verify(const AuthRequest& req, Millis now) {
    clock_.set_local_time(unix_seconds(now));
    clock_.update(req.lamport_ts);
    const FailReason reason = check(req, now);
    Verification v;
    v.reason = reason;
    v.ack.ok = reason == FailReason::none;
    auto tit = terminals_.find(req.tid);
    if (v.ack.ok && tit->second.reg.continuous) {
      v.ack.continuous_required = true;
      v.ack.t_reauth = policy_.t_reauth;
    }
    if (tit != terminals_.end() && tit->second.reg.ui_mode == UiMode::terminal_driven && !req.reauth)
      v.notify_terminal = true;
    v.ack.lamport_ts = clock_.stamp();
    log_.push_back(LogEntry{now, req.uid, req.tid, req.reauth, reason});
    return v;
  }

  // Entry point for raw wire lines; anything unparsable is a `malformed` fail.
  Verification verify_line(std::string_view line, Millis now) {
    try {
      return verify(decode_request(line), now);
    } catch (const ParseError&) {
      Verification v;
      v.reason = FailReason::malformed;
      clock_.set_local_time(unix_seconds(now));
      v.ack.lamport_ts = clock_.stamp();
      log_.push_back(LogEntry{now, {}, {}, false, FailReason::malformed});
      return v;
    }
  }

  // The expiry half of the pending-nonce rule, for callers that refresh the
  // login screen.
  bool pending_expired(const std::string& tid, Millis now) const {
    const auto& t = state(tid);
    return t.pending && now - t.pending->issued_at >= policy_.pending_expiry;
  }

 private:
  struct User {
    otp::OtpKey k_u;
    std::deque<Millis> failures;
    Millis refused_until{0};
  };

  struct Pending {
    std::string nonce;
    Millis issued_at;
    bool consumed = false;
  };

  struct TerminalState {
    TerminalRegistration reg;  // holds the service-side HOTP counter
    std::optional<Pending> pending;
    std::deque<std::pair<std::string, bool>> retired;  // nonce, consumed?
    std::optional<std::string> owner;
  };

  TerminalState& state(const std::string& tid) {
    auto it = terminals_.find(tid);
    if (it == terminals_.end()) throw Error("unknown terminal " + tid);
    return it->second;
  }
  const TerminalState& state(const std::string& tid) const {
    auto it = terminals_.find(tid);
    if (it == terminals_.end()) throw Error("unknown terminal " + tid);
    return it->second;
  }

  void remember(TerminalState& t, std::string nonce, bool consumed) {
    t.retired.emplace_back(std::move(nonce), consumed);
    while (t.retired.size() > policy_.consumed_history) t.retired.pop_front();
  }

  void retire_pending(TerminalState& t) {
    if (t.pending) remember(t, t.pending->nonce, t.pending->consumed);
    t.pending.reset();
  }

  FailReason retired_reason(const TerminalState& t, const std::string& nonce) const {
    for (auto it = t.retired.rbegin(); it != t.retired.rend(); ++it)
      if (otp::constant_time_equal(it->first, nonce))
        return it->second ? FailReason::nonce_consumed : FailReason::nonce_stale;
    return FailReason::unknown_nonce;
  }

  FailReason check_nonce(TerminalState& t, const AuthRequest& req, Millis now) {
    if (t.reg.ui_mode == UiMode::service_driven) {
      if (t.pending && otp::constant_time_equal(t.pending->nonce, req.nonce)) {
        if (t.pending->consumed) return FailReason::nonce_consumed;
        if (now - t.pending->issued_at >= policy_.pending_expiry) return FailReason::nonce_stale;
        t.pending->consumed = true;
        return FailReason::none;
      }
      return retired_reason(t, req.nonce);
    }
    auto verdict = otp::hotp_verify_window(*t.reg.k_n, otp::OtpCode::parse(req.nonce), t.reg.nonce_counter);
    if (verdict.accepted) {
      remember(t, req.nonce, true);
      return FailReason::none;
    }
    return retired_reason(t, req.nonce);
  }

  void record_failure(User& u, Millis now) {
    if (!policy_.throttle_enabled) return;
    u.failures.push_back(now);
    while (!u.failures.empty() && now - u.failures.front() >= policy_.throttle_window) u.failures.pop_front();
    if (static_cast<int>(u.failures.size()) >= policy_.throttle_failures) {
      u.refused_until = now + policy_.throttle_refusal;
      u.failures.clear();
    }
  }

  // OTP is checked before the nonce and the nonce is consumed only when both
  // pass, so a wrong OTP never burns the displayed challenge.
  FailReason check(const AuthRequest& req, Millis now) {
    if (req.sid != identity_.sid) return FailReason::wrong_service;
    auto uit = users_.find(req.uid);
    if (uit == users_.end()) return FailReason::unknown_uid;
    User& user = uit->second;
    // Throttling covers logins only; re-auth traffic of an established session
    // is pinned to its owner below.
    if (!req.reauth && policy_.throttle_enabled && now < user.refused_until) return FailReason::throttled;
    auto tit = terminals_.find(req.tid);
    if (tit == terminals_.end()) return fail(user, req, now, FailReason::unknown_terminal);
    TerminalState& term = tit->second;
    if (term.owner && *term.owner != req.uid) return fail(user, req, now, FailReason::terminal_busy);
    if (!otp::totp_verify(user.k_u, req.otp, unix_seconds(now), policy_.totp).accepted())
      return fail(user, req, now, FailReason::bad_otp);
    const FailReason nonce = check_nonce(term, req, now);
    if (nonce != FailReason::none) return fail(user, req, now, nonce);
    user.failures.clear();
    term.owner = req.uid;
    return FailReason::none;
  }

  FailReason fail(User& user, const AuthRequest& req, Millis now, FailReason reason) {
    if (!req.reauth) record_failure(user, now);
    return reason;
  }

  ServiceIdentity identity_;
  ServicePolicy policy_;
  challenge::NonceSource random_nonces_;
  LamportClock clock_;
  std::map<std::string, User> users_;
  std::map<std::string, TerminalState> terminals_;
  std::vector<LogEntry> log_;
};

// ---------------------------------------------------------------------------
// Operation-level helpers mirroring the protocol steps.

inline const Credential& associate_device(Device& device, const ServiceIdentity& service, std::string uid,
                                          otp::OtpKey k_u) {
  return device.store().associate(service, std::move(uid), std::move(k_u));
}

// Puts a fresh challenge on the terminal screen. Service-driven terminals get
// it from the service (which records the pending nonce); terminal-driven ones
// generate it under K_N.
inline ChallengePayload terminal_issue_challenge(Terminal& terminal, Service& service, Millis now) {
  ChallengePayload p = terminal.registration().ui_mode == UiMode::service_driven
                           ? service.issue_challenge(terminal.tid(), now)
                           : terminal.issue_challenge(now);
  terminal.display(p);
  return p;
}

inline ScanResult device_on_scan(Device& device, const ChallengePayload& p, Millis now) { return device.on_scan(p, now); }

inline Verification service_verify(Service& service, const AuthRequest& req, Millis now) {
  return service.verify(req, now);
}

inline void service_notify_terminal(Terminal& terminal, bool success, const std::string& uid) {
  if (terminal.registration().ui_mode != UiMode::terminal_driven)
    throw Error("outcome notification is only sent to terminal-driven terminals");
  terminal.on_notify(success, uid);
}

}  // namespace gauth::protocol
