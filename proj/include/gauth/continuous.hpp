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

// Service-side continuous-authentication sessions.
//
// Every T seconds a new challenge goes on the terminal. If no valid re-auth
// answers it within L seconds the terminal locks, keeping that challenge on
// the lock screen; answering it later unlocks transparently. A session locked
// for longer than the grace period is logged out.
//
// Deadlines sit on a fixed grid (start + kT) while the session stays active;
// unlocking restarts the grid at the unlock time.
//
// Window of exposure: for a walk-away at time w, W is the time from w until
// the session first leaves the active phase. Since the device cannot answer
// the next challenge, W <= T + L.

#pragma once

#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "gauth/challenge.hpp"
#include "gauth/common.hpp"
#include "gauth/protocol.hpp"

namespace gauth::continuous {

using challenge::ChallengePayload;
using protocol::EndCause;

enum class Phase { active, locked, logged_out };

inline std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::active: return "active";
    case Phase::locked: return "locked";
    case Phase::logged_out: return "logged-out";
  }
  return "?";
}

struct SessionPolicy {
  Millis t_reauth{5000};
  Millis lock_timeout{1000};
  std::optional<Millis> logout_grace;  // defaults to 10 * t_reauth
  Millis leniency{0};                  // extra lock time after recent terminal input

  Millis grace() const { return logout_grace.value_or(10 * t_reauth); }

  void validate() const {
    if (t_reauth.count() <= 0) throw Error("t_reauth must be positive");
    if (lock_timeout.count() < 0) throw Error("lock timeout must be non-negative");
    if (grace().count() < 0 || leniency.count() < 0) throw Error("negative session timeout");
  }
};

struct ExposureEntry {
  std::string tid;
  std::string uid;
  Millis walk_away;
  Millis detected;
  Millis window() const { return detected - walk_away; }
};

struct SessionState {
  std::string uid;
  std::string tid;
  Phase phase = Phase::active;
  SessionPolicy policy;
  Millis started{0};
  Millis next_deadline{0};
  std::optional<ChallengePayload> last_challenge;
  std::optional<Millis> awaiting_since;  // deadline of an unanswered challenge
  Millis lock_at{0};
  Millis locked_since{0};
  std::optional<Millis> last_input;
  std::optional<EndCause> end_cause;
  std::uint64_t reauths = 0;
  std::vector<Millis> open_walk_aways;
  std::vector<ExposureEntry> exposure_log;
};

inline SessionState start_session(std::string uid, std::string tid, SessionPolicy policy, Millis now) {
  policy.validate();
  SessionState s;
  s.uid = std::move(uid);
  s.tid = std::move(tid);
  s.policy = policy;
  s.started = now;
  s.next_deadline = now + policy.t_reauth;
  return s;
}

// Gate on the login ack: only an ok ack asking for continuous authentication
// opens a session, with the T it announced.
inline std::optional<SessionState> start_session(const protocol::AuthAck& ack, std::string uid, std::string tid,
                                                 SessionPolicy policy, Millis now) {
  if (!ack.ok || !ack.continuous_required || !ack.t_reauth) return std::nullopt;
  policy.t_reauth = Millis{*ack.t_reauth * 1000};
  return start_session(std::move(uid), std::move(tid), policy, now);
}

namespace detail {

inline void leave_active(SessionState& s, Millis now) {
  for (Millis w : s.open_walk_aways) s.exposure_log.push_back(ExposureEntry{s.tid, s.uid, w, now});
  s.open_walk_aways.clear();
}

}  // namespace detail

using ChallengeIssuer = std::function<ChallengePayload(const std::string& tid, Millis now)>;

// Deadline reached: put up a fresh challenge and arm the lock timer. Returns
// the displayed payload; the caller schedules on_lock_timer at s.lock_at.
inline ChallengePayload on_deadline(SessionState& s, Millis now, const ChallengeIssuer& issue) {
  if (s.phase != Phase::active) throw Error("deadline on a session that is not active");
  if (now < s.next_deadline) throw Error("deadline fired early");
  ChallengePayload p = issue(s.tid, now);
  s.last_challenge = p;
  s.awaiting_since = s.next_deadline;
  s.lock_at = now + s.policy.lock_timeout;
  if (s.policy.leniency.count() > 0 && s.last_input && *s.last_input >= now - s.policy.t_reauth)
    s.lock_at += s.policy.leniency;
  s.next_deadline += s.policy.t_reauth;
  return p;
}

// Lock timer. Returns true if the session locked.
inline bool on_lock_timer(SessionState& s, Millis now) {
  if (s.phase != Phase::active || !s.awaiting_since || now < s.lock_at) return false;
  s.phase = Phase::locked;
  s.locked_since = now;
  detail::leave_active(s, now);
  return true;
}

enum class ReauthStatus { accepted, rejected, ignored };

struct ReauthOutcome {
  ReauthStatus status = ReauthStatus::ignored;
  protocol::Verification verification;
  bool unlocked = false;
};

// Verifies through the service. An accepted re-auth cancels the lock timer,
// or unlocks a locked session and restarts its grid. Rejections leave timers
// alone. Requests for other terminals or users are not this session's.
inline ReauthOutcome on_reauth(SessionState& s, protocol::Service& service, const protocol::AuthRequest& req,
                               Millis now) {
  ReauthOutcome out;
  if (req.tid != s.tid || req.uid != s.uid) return out;
  if (s.phase == Phase::logged_out) {
    out.status = ReauthStatus::rejected;
    return out;
  }
  out.verification = service.verify(req, now);
  if (!out.verification.accepted()) {
    out.status = ReauthStatus::rejected;
    return out;
  }
  out.status = ReauthStatus::accepted;
  ++s.reauths;
  s.awaiting_since.reset();
  if (s.phase == Phase::locked) {
    s.phase = Phase::active;
    s.next_deadline = now + s.policy.t_reauth;
    out.unlocked = true;
  }
  return out;
}

inline void note_walk_away(SessionState& s, Millis t) {
  if (s.phase == Phase::active)
    s.open_walk_aways.push_back(t);
  else
    s.exposure_log.push_back(ExposureEntry{s.tid, s.uid, t, t});
}

// The user came back before anything noticed; those absences exposed nothing.
inline void note_return(SessionState& s) { s.open_walk_aways.clear(); }

inline void note_input(SessionState& s, Millis t) { s.last_input = t; }

// W for a recorded walk-away, once the session has left the active phase.
inline std::optional<Millis> window_of_exposure(const SessionState& s, Millis walk_away) {
  for (const auto& e : s.exposure_log)
    if (e.walk_away == walk_away) return e.window();
  return std::nullopt;
}

// Returns false (no-op) if the session already ended.
inline bool end_session(SessionState& s, EndCause cause, Millis now) {
  if (s.phase == Phase::logged_out) return false;
  if (s.phase == Phase::active) detail::leave_active(s, now);
  s.phase = Phase::logged_out;
  s.end_cause = cause;
  s.awaiting_since.reset();
  return true;
}

// Grace timer for locked sessions. Returns true if it logged the session out.
inline bool on_grace_timer(SessionState& s, Millis now) {
  if (s.phase != Phase::locked || now - s.locked_since < s.policy.grace()) return false;
  return end_session(s, EndCause::lock_expired, now);
}

// Sessions keyed by terminal.
class SessionRegistry {
 public:
  SessionState& open(SessionState s) {
    auto tid = s.tid;
    auto [it, inserted] = sessions_.insert_or_assign(tid, std::move(s));
    return it->second;
  }

  SessionState* find(const std::string& tid) {
    auto it = sessions_.find(tid);
    return it == sessions_.end() ? nullptr : &it->second;
  }

  const std::map<std::string, SessionState>& all() const noexcept { return sessions_; }

 private:
  std::map<std::string, SessionState> sessions_;
};

inline std::string format_seconds(Millis t) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(3) << to_seconds(t);
  return os.str();
}

inline void write_exposure_header(std::ostream& out) { out << "tid,uid,walk_away_t,detect_t,W\n"; }

inline void write_exposure_row(std::ostream& out, const ExposureEntry& e) {
  out << e.tid << ',' << e.uid << ',' << format_seconds(e.walk_away) << ',' << format_seconds(e.detected) << ','
      << format_seconds(e.window()) << '\n';
}

}  // namespace gauth::continuous
