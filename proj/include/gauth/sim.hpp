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

// Deterministic simulation of one scenario.
//
// Parties exchange wire lines through the event queue; the network adds a
// sampled round trip, half on each leg. All randomness comes from streams
// derived from the run seed:
//   1 optics, 2 network, 3 service nonces, 4 adversary guesses,
//   5 randomized timeline times.
//
// Protocol objects run on Unix milliseconds (epoch + simulated time); the
// trace and the metrics use simulated milliseconds.

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "gauth/continuous.hpp"
#include "gauth/optics.hpp"
#include "gauth/protocol.hpp"
#include "gauth/rng.hpp"
#include "gauth/scenario.hpp"
#include "gauth/simnet.hpp"

namespace gauth::sim {

using continuous::ExposureEntry;
using scenario::ScenarioConfig;

enum class AttemptKind { login, reauth, unlock, replay, guess };

inline std::string_view to_string(AttemptKind k) {
  switch (k) {
    case AttemptKind::login: return "login";
    case AttemptKind::reauth: return "reauth";
    case AttemptKind::unlock: return "unlock";
    case AttemptKind::replay: return "replay";
    case AttemptKind::guess: return "guess";
  }
  return "?";
}

enum class Outcome { pending, success, failure, no_match, ignored, scan_failed };

inline std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::pending: return "pending";
    case Outcome::success: return "success";
    case Outcome::failure: return "failure";
    case Outcome::no_match: return "no-match";
    case Outcome::ignored: return "ignored";
    case Outcome::scan_failed: return "scan-failed";
  }
  return "?";
}

// One authentication attempt as the device sees it. For re-auth attempts
// `started` is when the challenge went on screen.
struct AttemptRecord {
  std::uint64_t id = 0;
  AttemptKind kind = AttemptKind::login;
  std::string uid;
  std::string tid;
  Millis started{0};
  Millis finished{0};
  Outcome outcome = Outcome::pending;
  std::string reason;

  Millis latency() const { return finished - started; }
};

struct BatterySample {
  std::string uid;
  double minute = 0;
  double level = 0;
};

struct RunMetrics {
  std::vector<AttemptRecord> attempts;
  std::vector<ExposureEntry> exposures;  // simulated time
  std::vector<BatterySample> battery;
  std::map<std::string, std::uint64_t> failures_by_reason;
  std::map<std::string, std::uint64_t> session_ends;  // by cause
  std::uint64_t lock_events = 0;
  std::uint64_t unlock_events = 0;
  std::uint64_t step1_pushes = 0;   // service -> terminal challenge pushes
  std::uint64_t step5_notifies = 0;  // service -> terminal outcome notifications
  std::uint64_t sessions_opened = 0;
  std::uint64_t events_processed = 0;

  std::uint64_t count(Outcome o, std::optional<AttemptKind> kind = std::nullopt) const {
    return static_cast<std::uint64_t>(std::count_if(attempts.begin(), attempts.end(), [&](const AttemptRecord& a) {
      return a.outcome == o && (!kind || a.kind == *kind);
    }));
  }
  std::uint64_t count(AttemptKind kind) const {
    return static_cast<std::uint64_t>(std::count_if(attempts.begin(), attempts.end(), [&](const AttemptRecord& a) {
      return a.kind == kind && a.outcome != Outcome::scan_failed;
    }));
  }
  // Presentations that decoded and reached the device logic.
  std::uint64_t decoded_attempts() const { return attempts.size() - count(Outcome::scan_failed); }

  std::optional<Millis> max_window() const {
    std::optional<Millis> m;
    for (const auto& e : exposures)
      if (!m || e.window() > *m) m = e.window();
    return m;
  }
};

struct RunResult {
  std::string scenario;
  std::uint64_t seed = 0;
  Millis duration{0};
  std::vector<std::string> trace;  // CSV rows without header
  RunMetrics metrics;
};

class World {
 public:
  World(ScenarioConfig cfg, std::uint64_t seed)
      : cfg_(std::move(cfg)),
        seed_(seed),
        epoch_(Millis{cfg_.epoch * 1000}),
        optics_rng_(Rng::derive(seed, 1)),
        net_rng_(Rng::derive(seed, 2)),
        guess_rng_(Rng::derive(seed, 4)),
        latency_(cfg_.latency_models.at(cfg_.location)),
        table_(cfg_.optics_table ? optics::AccuracyTable::load_file(*cfg_.optics_table)
                                 : optics::AccuracyTable::measured_default()) {
    cfg_.validate();
    auto policy = cfg_.service_policy;
    policy.nonce_seed = Rng::derive(seed, 3);
    service_ = std::make_unique<protocol::Service>(cfg_.service, policy);
    for (const auto& tc : cfg_.terminals) {
      protocol::TerminalRegistration reg;
      reg.tid = tc.tid;
      reg.sid = cfg_.service.sid;
      if (tc.k_n) reg.k_n = otp::OtpKey::from_base32(*tc.k_n);
      reg.nonce_counter = tc.counter;
      reg.ui_mode = tc.ui_mode;
      reg.continuous = tc.continuous;
      service_->register_terminal(reg);
      challenge::ChallengePayload probe{cfg_.service.sid, tc.tid, "000000", 0, {tc.continuous, {}}};
      auto density = tc.bits ? optics::CodeDensity::for_bits(*tc.bits)
                             : optics::CodeDensity::fitting(challenge::optical_bits(probe));
      // surfaces uncalibrated geometries (strict mode) before the run starts
      optics::decode_probability(tc.geometry, density, table_, cfg_.strict_optics, cfg_.distance_factor);
      terminals_.emplace(tc.tid, TerminalSim{tc, protocol::Terminal(reg), density});
    }
    for (const auto& uc : cfg_.users) {
      otp::OtpKey key = otp::OtpKey::from_base32(uc.k_u);
      service_->enroll_user(uc.uid, key);
      UserSim u{uc, protocol::Device(cfg_.service_policy.totp), std::nullopt, false, std::nullopt, false, {}};
      if (uc.associated) {
        const auto& cred = u.device.store().associate(cfg_.service, uc.uid, key);
        u.channel = protocol::SecureChannel::open(cred, cfg_.service);
      }
      users_.emplace(uc.uid, std::move(u));
    }
    Rng times(Rng::derive(seed, 5));
    for (auto& a : cfg_.timeline)
      if (a.at_max) {
        const auto span = static_cast<double>((*a.at_max - a.at).count());
        a.at += Millis{static_cast<std::int64_t>(std::floor(times.uniform01() * span))};
        a.at_max.reset();
      }
  }

  RunResult run() {
    for (const auto& tc : cfg_.terminals) {
      const std::string tid = tc.tid;
      q_.schedule(Millis{0}, tid, simnet::EventKind::timer, "boot", [this, tid] { show_login(tid); });
    }
    for (const auto& a : cfg_.timeline) {
      if (a.at > cfg_.duration) continue;
      q_.schedule(a.at, a.user.empty() ? a.terminal : a.user, simnet::EventKind::scenario_action,
                  std::string(to_string(a.kind)), [this, a] { perform(a); });
    }
    q_.run_until(cfg_.duration);
    for (const auto& tc : cfg_.terminals)
      if (auto* s = sessions_.find(tc.tid)) harvest(*s);
    sample_battery();
    RunResult r;
    r.scenario = cfg_.name;
    r.seed = seed_;
    r.duration = cfg_.duration;
    r.trace = std::move(trace_);
    metrics_.events_processed = q_.processed();
    r.metrics = std::move(metrics_);
    return r;
  }

 private:
  struct TerminalSim {
    scenario::TerminalConfig cfg;
    protocol::Terminal term;
    optics::CodeDensity density;
    std::uint64_t login_gen = 0;
  };

  struct UserSim {
    scenario::UserConfig cfg;
    protocol::Device device;
    std::optional<protocol::SecureChannel> channel;
    bool present = false;
    std::optional<std::string> at;
    bool busy = false;  // a scan pipeline or request is in progress
    std::vector<Millis> requests;
  };

  enum class ScanMode { capture, armed };

  // -- plumbing --------------------------------------------------------------

  Millis now() const { return q_.now(); }
  Millis abs_now() const { return epoch_ + q_.now(); }
  Millis device_now(const UserSim& u) const { return abs_now() + u.cfg.clock_offset; }
  Millis rel(Millis absolute) const { return absolute - epoch_; }

  void note(const std::string& party, std::string_view kind, std::string detail = {}) {
    while (!detail.empty() && detail.back() == '\n') detail.pop_back();
    std::replace(detail.begin(), detail.end(), ',', ';');
    trace_.push_back(std::to_string(now().count()) + "," + party + "," + std::string(kind) + "," + detail);
  }

  Millis round_trip() { return Millis{std::llround(latency_.sample(net_rng_))}; }

  AttemptRecord& begin(AttemptKind kind, const std::string& uid, const std::string& tid, Millis started) {
    AttemptRecord a;
    a.id = metrics_.attempts.size() + 1;
    a.kind = kind;
    a.uid = uid;
    a.tid = tid;
    a.started = started;
    metrics_.attempts.push_back(std::move(a));
    return metrics_.attempts.back();
  }

  void finish(std::uint64_t id, Outcome o, std::string reason = {}) {
    auto& a = metrics_.attempts.at(id - 1);
    a.finished = now();
    a.outcome = o;
    a.reason = std::move(reason);
    if (o == Outcome::failure) ++metrics_.failures_by_reason[a.reason];
    note(a.uid, "attempt-" + std::string(to_string(o)),
         "id=" + std::to_string(id) + " kind=" + std::string(to_string(a.kind)) + " tid=" + a.tid +
             (a.reason.empty() ? "" : " reason=" + a.reason) +
             " latency_ms=" + std::to_string(a.latency().count()));
  }

  static bool adversarial(AttemptKind k) { return k == AttemptKind::replay || k == AttemptKind::guess; }

  continuous::SessionState* live_session(const std::string& tid) {
    auto* s = sessions_.find(tid);
    return s && s->phase != continuous::Phase::logged_out ? s : nullptr;
  }

  // -- terminals and service -------------------------------------------------

  void show_login(const std::string& tid) {
    auto& t = terminals_.at(tid);
    auto p = protocol::terminal_issue_challenge(t.term, *service_, abs_now());
    const std::uint64_t gen = ++t.login_gen;
    if (t.cfg.ui_mode == protocol::UiMode::service_driven) {
      ++metrics_.step1_pushes;
      note("service", "step1-push", "tid=" + tid + " nonce=" + p.nonce);
      q_.schedule_in(cfg_.service_policy.pending_expiry, tid, simnet::EventKind::timer, "refresh",
                     [this, tid, gen] { refresh_login(tid, gen); });
    }
    note(tid, "display", "login " + challenge::encode_payload(p));
  }

  void refresh_login(const std::string& tid, std::uint64_t gen) {
    auto& t = terminals_.at(tid);
    if (t.login_gen != gen || t.term.screen() != protocol::Screen::login) return;
    note(tid, "refresh", "pending nonce expired");
    show_login(tid);
  }

  void schedule_deadline(const continuous::SessionState& s) {
    const std::string tid = s.tid;
    const Millis at = rel(s.next_deadline);
    q_.schedule(at, tid, simnet::EventKind::deadline, "deadline", [this, tid] { on_deadline(tid); });
  }

  void on_deadline(const std::string& tid) {
    auto* s = live_session(tid);
    if (!s || s->phase != continuous::Phase::active || s->next_deadline != abs_now()) return;
    auto& t = terminals_.at(tid);
    auto p = continuous::on_deadline(*s, abs_now(), [&](const std::string&, Millis at) {
      return protocol::terminal_issue_challenge(t.term, *service_, at);
    });
    if (t.cfg.ui_mode == protocol::UiMode::service_driven) {
      ++metrics_.step1_pushes;
      note("service", "step1-push", "tid=" + tid + " nonce=" + p.nonce);
    }
    note(tid, "display", "reauth " + challenge::encode_payload(p));
    q_.schedule(rel(s->lock_at), tid, simnet::EventKind::timer, "lock-timer", [this, tid] { on_lock_timer(tid); });
    schedule_deadline(*s);
    for (auto& [uid, u] : users_)
      if (watching(u, tid) && !u.busy) {
        u.busy = true;
        auto& a = begin(AttemptKind::reauth, uid, tid, now());
        scan(uid, tid, a.id, cfg_.retries, ScanMode::armed);
      }
  }

  void on_lock_timer(const std::string& tid) {
    auto* s = live_session(tid);
    if (!s || !continuous::on_lock_timer(*s, abs_now())) return;
    auto& t = terminals_.at(tid);
    t.term.lock();
    ++metrics_.lock_events;
    note(tid, "lock", "uid=" + s->uid);
    const Millis locked = s->locked_since;
    q_.schedule_in(s->policy.grace(), tid, simnet::EventKind::timer, "grace-timer", [this, tid, locked] {
      auto* live = live_session(tid);
      if (live && live->locked_since == locked && continuous::on_grace_timer(*live, abs_now()))
        end_session(tid, protocol::EndCause::lock_expired);
    });
    start_lock_screen_scan(tid);
  }

  // A present, pinned device keeps photographing the lock screen.
  void start_lock_screen_scan(const std::string& tid) {
    for (auto& [uid, u] : users_)
      if (watching(u, tid) && !u.busy) {
        u.busy = true;
        auto& a = begin(AttemptKind::unlock, uid, tid, now());
        const std::string user = uid;
        const std::uint64_t id = a.id;
        q_.schedule_in(cfg_.device_times.capture_autofocus, uid, simnet::EventKind::scan, "capture",
                       [this, user, tid, id] { scan(user, tid, id, cfg_.retries, ScanMode::capture); });
      }
  }

  bool watching(const UserSim& u, const std::string& tid) const {
    return u.present && u.at == tid && u.device.pinned_tid() == tid;
  }

  void end_session(const std::string& tid, protocol::EndCause cause) {
    auto* s = sessions_.find(tid);
    if (!s) return;
    continuous::end_session(*s, cause, abs_now());
    harvest(*s);
    ++metrics_.session_ends[std::string(protocol::to_string(cause))];
    service_->release_session(tid);
    terminals_.at(tid).term.logout();
    note(tid, "session-end", "uid=" + s->uid + " cause=" + std::string(protocol::to_string(cause)));
    service_->clock().set_local_time(unix_seconds(abs_now()));
    protocol::SessionEnd msg{tid, cause, service_->clock().stamp()};
    const std::string line = protocol::encode_session_end(msg);
    const std::string uid = s->uid;
    q_.schedule_in(round_trip() / 2, uid, simnet::EventKind::message_delivery, "ENDSESS", [this, uid, line] {
      auto& u = users_.at(uid);
      u.device.on_session_end(protocol::decode_session_end(line), device_now(u));
      note(uid, "recv", line);
    });
    show_login(tid);
  }

  void harvest(continuous::SessionState& s) {
    for (const auto& e : s.exposure_log)
      metrics_.exposures.push_back(ExposureEntry{e.tid, e.uid, rel(e.walk_away), rel(e.detected)});
    s.exposure_log.clear();
  }

  // -- device pipeline -------------------------------------------------------

  void scan(const std::string& uid, const std::string& tid, std::uint64_t id, int tries_left, ScanMode mode) {
    auto& u = users_.at(uid);
    auto& t = terminals_.at(tid);
    if (!u.present || u.at != tid) {
      u.busy = false;
      finish(id, Outcome::scan_failed, "user-absent");
      return;
    }
    if (!t.term.displayed()) {
      u.busy = false;
      finish(id, Outcome::scan_failed, "no-code");
      return;
    }
    const auto payload = *t.term.displayed();
    const auto outcome = optics::scan_attempt(t.cfg.geometry, t.density, table_, optics_rng_, cfg_.strict_optics,
                                              cfg_.distance_factor);
    if (outcome == optics::ScanOutcome::decoded) {
      note(uid, "scan-ok", "tid=" + tid + " nonce=" + payload.nonce);
      // an armed re-auth already holds its OTP; otherwise it is computed after decode
      const Millis work = cfg_.device_times.qr_decode +
                          (mode == ScanMode::armed ? Millis{0} : cfg_.device_times.otp_generation);
      q_.schedule_in(work, uid, simnet::EventKind::scan, "decoded",
                     [this, uid, payload, id] { present_payload(uid, payload, id); });
      return;
    }
    note(uid, "scan-fail", "tid=" + tid + " tries_left=" + std::to_string(tries_left));
    if (tries_left > 0) {
      const Millis wait = mode == ScanMode::armed ? cfg_.retry_interval : cfg_.device_times.capture_autofocus;
      q_.schedule_in(wait, uid, simnet::EventKind::scan, "retry",
                     [this, uid, tid, id, tries_left, mode] { scan(uid, tid, id, tries_left - 1, mode); });
      return;
    }
    u.busy = false;
    finish(id, Outcome::scan_failed, "unreadable");
    auto* s = live_session(tid);
    if (s && s->phase == continuous::Phase::locked && watching(u, tid)) {
      const Millis locked = s->locked_since;
      q_.schedule_in(s->policy.t_reauth, tid, simnet::EventKind::timer, "rescan", [this, tid, locked] {
        auto* live = live_session(tid);
        if (live && live->phase == continuous::Phase::locked && live->locked_since == locked)
          start_lock_screen_scan(tid);
      });
    }
  }

  // Device logic for a decoded payload; sends the request if one results.
  void present_payload(const std::string& uid, const challenge::ChallengePayload& p, std::uint64_t id) {
    auto& u = users_.at(uid);
    const bool own = !adversarial(metrics_.attempts.at(id - 1).kind);
    auto result = u.device.on_scan(p, device_now(u));
    if (std::holds_alternative<protocol::NoMatch>(result)) {
      if (own) u.busy = false;
      finish(id, Outcome::no_match, "no-credential");
      return;
    }
    if (auto* ig = std::get_if<protocol::Ignored>(&result)) {
      if (own) u.busy = false;
      finish(id, Outcome::ignored, "pinned-to-" + ig->pinned_tid);
      return;
    }
    const auto& req = std::get<protocol::AuthRequest>(result);
    if (!u.channel) {
      if (own) u.busy = false;
      finish(id, Outcome::no_match, "no-channel");
      return;
    }
    const std::string line = u.channel->send(req);
    u.requests.push_back(now());
    note(uid, "send", line);
    const Millis rtt = round_trip();
    const Millis there = rtt / 2;
    q_.schedule_in(there, "service", simnet::EventKind::message_delivery, "AUTHREQ",
                   [this, uid, line, id, rtt, there] { service_receive(uid, line, id, rtt - there); });
  }

  void service_receive(const std::string& uid, const std::string& line, std::uint64_t id, Millis back) {
    note("service", "recv", line);
    const auto req = protocol::decode_request(line);
    protocol::Verification v;
    bool accepted = false;
    auto* s = live_session(req.tid);
    if (s && s->uid == req.uid) {
      auto out = continuous::on_reauth(*s, *service_, req, abs_now());
      v = out.verification;
      accepted = out.status == continuous::ReauthStatus::accepted;
      if (accepted) {
        auto& t = terminals_.at(req.tid);
        if (out.unlocked) {
          t.term.on_notify(true, req.uid);
          ++metrics_.unlock_events;
          note(req.tid, "unlock", "uid=" + req.uid);
          schedule_deadline(*s);
        }
        t.term.clear_code();
        note(req.tid, "code-cleared", "nonce=" + req.nonce);
      }
    } else {
      v = service_->verify(req, abs_now());
      accepted = v.accepted();
      if (accepted) {
        auto& t = terminals_.at(req.tid);
        ++metrics_.sessions_opened;
        if (t.cfg.ui_mode == protocol::UiMode::service_driven) {
          t.term.on_notify(true, req.uid);
          note("service", "ui-update", "tid=" + req.tid + " uid=" + req.uid);
        }
        if (auto opened = continuous::start_session(v.ack, req.uid, req.tid, cfg_.session_policy, abs_now())) {
          harvest_previous(req.tid);
          auto& ns = sessions_.open(std::move(*opened));
          note("service", "session-start", "tid=" + req.tid + " uid=" + req.uid);
          schedule_deadline(ns);
        }
      }
      if (v.notify_terminal) {
        ++metrics_.step5_notifies;
        const std::string tid = req.tid, who = req.uid;
        const bool ok = accepted;
        note("service", "step5-notify", "tid=" + tid + " ok=" + std::string(ok ? "1" : "0"));
        q_.schedule_in(back, tid, simnet::EventKind::message_delivery, "notify", [this, tid, who, ok] {
          terminals_.at(tid).term.on_notify(ok, who);
          note(tid, "notified", "uid=" + who + " ok=" + std::string(ok ? "1" : "0"));
        });
      }
    }
    const std::string reason(protocol::to_string(v.reason));
    note("service", accepted ? "accept" : "reject", "uid=" + req.uid + " tid=" + req.tid + " reason=" + reason);
    const std::string ack = protocol::encode_ack(v.ack);
    q_.schedule_in(back, uid, simnet::EventKind::message_delivery, "AUTHACK", [this, uid, req, ack, id, reason] {
      auto& u = users_.at(uid);
      note(uid, "recv", ack);
      u.device.on_ack(req, protocol::decode_ack(ack), device_now(u));
      if (!adversarial(metrics_.attempts.at(id - 1).kind)) u.busy = false;
      const bool ok = reason == protocol::to_string(protocol::FailReason::none);
      finish(id, ok ? Outcome::success : Outcome::failure, ok ? "" : reason);
    });
  }

  void harvest_previous(const std::string& tid) {
    if (auto* old = sessions_.find(tid)) harvest(*old);
  }

  // -- timeline --------------------------------------------------------------

  const std::string& pick_user(const scenario::Action& a) const {
    return a.user.empty() ? cfg_.users.front().uid : a.user;
  }
  const std::string& pick_terminal(const scenario::Action& a) const {
    return a.terminal.empty() ? cfg_.terminals.front().tid : a.terminal;
  }

  void perform(const scenario::Action& a) {
    using scenario::ActionKind;
    switch (a.kind) {
      case ActionKind::login: return login(pick_user(a), pick_terminal(a));
      case ActionKind::walk_away: return walk_away(pick_user(a));
      case ActionKind::return_: return come_back(pick_user(a));
      case ActionKind::logout: return logout(pick_user(a));
      case ActionKind::input: {
        const auto& tid = pick_terminal(a);
        note(tid, "input");
        if (auto* s = live_session(tid)) continuous::note_input(*s, abs_now());
        return;
      }
      case ActionKind::capture: {
        const auto& tid = pick_terminal(a);
        const auto& shown = terminals_.at(tid).term.displayed();
        if (!shown) {
          note("adversary", "capture-none", "tid=" + tid);
          return;
        }
        photos_[a.photo] = *shown;
        note("adversary", "capture", a.photo + " " + challenge::encode_payload(*shown));
        return;
      }
      case ActionKind::replay: return present_many(a, AttemptKind::replay);
      case ActionKind::guess: return present_many(a, AttemptKind::guess);
      case ActionKind::terminate: {
        const auto& tid = pick_terminal(a);
        note("service", "terminate", "tid=" + tid);
        if (live_session(tid)) {
          end_session(tid, protocol::EndCause::service_terminate);
        } else if (terminals_.at(tid).term.screen() != protocol::Screen::login) {
          service_->release_session(tid);
          terminals_.at(tid).term.logout();
          show_login(tid);
        }
        return;
      }
    }
  }

  void login(const std::string& uid, const std::string& tid) {
    auto& u = users_.at(uid);
    u.present = true;
    u.at = tid;
    note(uid, "arrive", "tid=" + tid);
    if (u.busy) {
      note(uid, "busy");
      return;
    }
    u.busy = true;
    auto& a = begin(AttemptKind::login, uid, tid, now());
    const std::uint64_t id = a.id;
    note(uid, "voice-trigger");
    q_.schedule_in(cfg_.device_times.voice_activation + cfg_.device_times.capture_autofocus, uid,
                   simnet::EventKind::scan, "capture",
                   [this, uid, tid, id] { scan(uid, tid, id, cfg_.retries, ScanMode::capture); });
  }

  void walk_away(const std::string& uid) {
    auto& u = users_.at(uid);
    u.present = false;
    note(uid, "walk-away", u.at ? "tid=" + *u.at : "");
    if (u.at)
      if (auto* s = live_session(*u.at); s && s->uid == uid) continuous::note_walk_away(*s, abs_now());
  }

  void come_back(const std::string& uid) {
    auto& u = users_.at(uid);
    u.present = true;
    note(uid, "return", u.at ? "tid=" + *u.at : "");
    if (!u.at) return;
    auto* s = live_session(*u.at);
    if (!s || s->uid != uid) return;
    if (s->phase == continuous::Phase::active) continuous::note_return(*s);
    const bool unanswered = s->phase == continuous::Phase::locked || s->awaiting_since.has_value();
    if (!unanswered || u.busy || !watching(u, *u.at)) return;
    u.busy = true;
    const std::string tid = *u.at;
    const auto kind = s->phase == continuous::Phase::locked ? AttemptKind::unlock : AttemptKind::reauth;
    auto& a = begin(kind, uid, tid, now());
    const std::uint64_t id = a.id;
    q_.schedule_in(cfg_.device_times.capture_autofocus, uid, simnet::EventKind::scan, "capture",
                   [this, uid, tid, id] { scan(uid, tid, id, cfg_.retries, ScanMode::capture); });
  }

  void logout(const std::string& uid) {
    note(uid, "logout");
    for (auto& [tid, t] : terminals_) {
      if (auto* s = live_session(tid); s && s->uid == uid) {
        end_session(tid, protocol::EndCause::user_logout);
        return;
      }
      if (t.term.session_owner() == uid) {
        service_->release_session(tid);
        t.term.logout();
        ++metrics_.session_ends[std::string(protocol::to_string(protocol::EndCause::user_logout))];
        note(tid, "session-end", "uid=" + uid + " cause=logout");
        show_login(tid);
        return;
      }
    }
  }

  // Adversarial presentations are assumed to decode; they reach the victim's
  // device directly.
  void present_many(const scenario::Action& a, AttemptKind kind) {
    const std::string uid = pick_user(a);
    for (std::uint64_t i = 0; i < a.count; ++i) {
      const Millis at = now() + a.every * static_cast<std::int64_t>(i);
      if (at > cfg_.duration) break;
      q_.schedule(at, "adversary", simnet::EventKind::scan, std::string(to_string(kind)), [this, a, kind, uid] {
        challenge::ChallengePayload p;
        std::string tid;
        if (kind == AttemptKind::replay) {
          auto it = photos_.find(a.photo);
          if (it == photos_.end()) {
            note("adversary", "replay-none", "photo=" + a.photo);
            return;
          }
          p = it->second;
          tid = p.tid;
        } else {
          tid = pick_terminal(a);
          p.sid = cfg_.service.sid;
          p.tid = tid;
          p.nonce = pad_digits(static_cast<std::uint64_t>(guess_rng_.uniform01() * 1e6), challenge::kNonceDigits);
          p.timestamp = static_cast<std::uint64_t>(unix_seconds(abs_now()));
          p.options.continuous = terminals_.at(tid).cfg.continuous;
        }
        auto& rec = begin(kind, uid, tid, now());
        const std::uint64_t id = rec.id;
        note("adversary", "present", std::string(to_string(kind)) + " nonce=" + p.nonce + " to=" + uid);
        q_.schedule_in(cfg_.device_times.qr_decode + cfg_.device_times.otp_generation, uid, simnet::EventKind::scan,
                       "decoded", [this, uid, p, id] { present_payload(uid, p, id); });
      });
    }
  }

  // -- battery ---------------------------------------------------------------

  void sample_battery() {
    const double minutes = to_seconds(cfg_.duration) / 60.0;
    for (const auto& uc : cfg_.users) {
      const auto& u = users_.at(uc.uid);
      auto level_at = [&](double m) {
        const Millis t = from_seconds(m * 60.0);
        const auto sent = std::count_if(u.requests.begin(), u.requests.end(), [&](Millis r) { return r <= t; });
        return std::max(0.0, cfg_.battery.level - cfg_.battery.standby_drain * m -
                                 cfg_.battery.per_auth_cost * static_cast<double>(sent));
      };
      for (int m = 0; m < minutes; ++m) metrics_.battery.push_back({uc.uid, double(m), level_at(m)});
      metrics_.battery.push_back({uc.uid, minutes, level_at(minutes)});
    }
  }

  ScenarioConfig cfg_;
  std::uint64_t seed_;
  Millis epoch_;
  Rng optics_rng_;
  Rng net_rng_;
  Rng guess_rng_;
  simnet::LatencySampler latency_;
  optics::AccuracyTable table_;
  std::unique_ptr<protocol::Service> service_;
  std::map<std::string, TerminalSim> terminals_;
  std::map<std::string, UserSim> users_;
  std::map<std::string, challenge::ChallengePayload> photos_;
  continuous::SessionRegistry sessions_;
  simnet::EventQueue q_;
  std::vector<std::string> trace_;
  RunMetrics metrics_;
};

inline RunResult run(const ScenarioConfig& cfg, std::uint64_t seed) { return World(cfg, seed).run(); }
inline RunResult run(const ScenarioConfig& cfg) { return run(cfg, cfg.seed); }

// ---------------------------------------------------------------------------
// Output files

inline void write_trace(std::ostream& out, const RunResult& r) {
  out << "t_ms,party,kind,detail\n";
  for (const auto& row : r.trace) out << row << '\n';
}

inline void write_attempts(std::ostream& out, const RunResult& r) {
  out << "id,kind,uid,tid,start_ms,end_ms,latency_ms,outcome,reason\n";
  for (const auto& a : r.metrics.attempts)
    out << a.id << ',' << to_string(a.kind) << ',' << a.uid << ',' << a.tid << ',' << a.started.count() << ','
        << a.finished.count() << ',' << a.latency().count() << ',' << to_string(a.outcome) << ',' << a.reason
        << '\n';
}

inline void write_exposure(std::ostream& out, const RunResult& r) {
  continuous::write_exposure_header(out);
  for (const auto& e : r.metrics.exposures) continuous::write_exposure_row(out, e);
}

inline void write_battery(std::ostream& out, const RunResult& r) {
  out << "uid,minute,level\n";
  for (const auto& b : r.metrics.battery) {
    std::ostringstream row;
    row << std::fixed << std::setprecision(4) << b.minute << ',' << b.level;
    out << b.uid << ',' << row.str() << '\n';
  }
}

}  // namespace gauth::sim
