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

// Scenario files: INI-style sections of `key = value` lines plus a timeline
// of `at <seconds> <action> <args...>` directives. See docs/scenarios.md.

#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gauth/common.hpp"
#include "gauth/continuous.hpp"
#include "gauth/optics.hpp"
#include "gauth/otp.hpp"
#include "gauth/protocol.hpp"
#include "gauth/simnet.hpp"

namespace gauth::scenario {

struct TerminalConfig {
  std::string tid;
  protocol::UiMode ui_mode = protocol::UiMode::service_driven;
  bool continuous = false;
  std::optional<std::string> k_n;  // base32
  otp::HotpCounter counter;
  optics::ScanGeometry geometry;
  std::optional<int> bits;  // QR density rung; default fits the payload
  int line = 0;
};

struct UserConfig {
  std::string uid;
  std::string k_u;  // base32
  Millis clock_offset{0};
  bool associated = true;  // device holds a credential for the service
  int line = 0;
};

enum class ActionKind { login, walk_away, return_, logout, input, capture, replay, guess, terminate };

inline std::string_view to_string(ActionKind k) {
  switch (k) {
    case ActionKind::login: return "login";
    case ActionKind::walk_away: return "walk_away";
    case ActionKind::return_: return "return";
    case ActionKind::logout: return "logout";
    case ActionKind::input: return "input";
    case ActionKind::capture: return "capture";
    case ActionKind::replay: return "replay";
    case ActionKind::guess: return "guess";
    case ActionKind::terminate: return "terminate";
  }
  return "?";
}

struct Action {
  Millis at{0};
  std::optional<Millis> at_max;  // `at A..B`: uniform in [A, B) from the run seed
  ActionKind kind = ActionKind::login;
  std::string user;
  std::string terminal;
  std::string photo = "photo";
  std::uint64_t count = 1;
  Millis every{10};
  int line = 0;
};

struct Expectations {
  std::optional<std::uint64_t> successful_logins;
  std::optional<double> max_w;
  std::optional<std::uint64_t> lock_events;
  std::optional<std::uint64_t> replays_accepted;
  std::optional<std::uint64_t> reauths_per_minute;
};

struct ScenarioConfig {
  std::string name = "scenario";
  std::string source = "<memory>";
  std::uint64_t seed = 1;
  Millis duration{60'000};
  std::int64_t epoch = 1'700'000'000;  // Unix seconds at simulated t = 0

  protocol::ServiceIdentity service{"sha256:0000", "1234", "https://auth.example.test/gauth"};
  protocol::ServicePolicy service_policy;
  continuous::SessionPolicy session_policy;
  std::string location = "local";
  std::map<std::string, simnet::LatencyModel> latency_models = simnet::builtin_latency_models();

  simnet::DeviceTimeModel device_times;
  int retries = 2;
  Millis retry_interval{500};
  simnet::BatteryModel battery;

  std::optional<std::string> optics_table;  // path; default is the measured table
  bool strict_optics = false;
  int distance_factor = optics::kDefaultDistanceFactor;

  std::vector<TerminalConfig> terminals;
  std::vector<UserConfig> users;
  std::vector<Action> timeline;
  Expectations expect;

  const TerminalConfig* terminal(const std::string& tid) const {
    for (const auto& t : terminals)
      if (t.tid == tid) return &t;
    return nullptr;
  }
  const UserConfig* user(const std::string& uid) const {
    for (const auto& u : users)
      if (u.uid == uid) return &u;
    return nullptr;
  }

  // Reference and range checks; throws ParseError naming source:line.
  void validate() const;
};

namespace detail {

inline std::string trim(std::string s) {
  auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline std::string strip_comment(const std::string& line) {
  auto pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

inline double to_double(const std::string& v, const std::string& where) {
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw ParseError(where, "expected a number, got '" + v + "'");
}

inline std::uint64_t to_uint(const std::string& v, const std::string& where) {
  if (!all_digits(v) || v.size() > 19) throw ParseError(where, "expected a non-negative integer, got '" + v + "'");
  return std::stoull(v);
}

inline bool to_bool(const std::string& v, const std::string& where) {
  if (v == "yes" || v == "true" || v == "on" || v == "1") return true;
  if (v == "no" || v == "false" || v == "off" || v == "0") return false;
  throw ParseError(where, "expected yes/no, got '" + v + "'");
}

inline Millis to_millis(const std::string& v, const std::string& where) {
  const double s = to_double(v, where);
  if (s < 0) throw ParseError(where, "negative duration '" + v + "'");
  return from_seconds(s);
}

inline protocol::UiMode to_ui_mode(const std::string& v, const std::string& where) {
  if (v == "service-driven") return protocol::UiMode::service_driven;
  if (v == "terminal-driven") return protocol::UiMode::terminal_driven;
  throw ParseError(where, "ui_mode must be service-driven or terminal-driven, got '" + v + "'");
}

inline ActionKind to_action(const std::string& v, const std::string& where) {
  static const std::map<std::string, ActionKind> kinds{
      {"login", ActionKind::login},     {"walk_away", ActionKind::walk_away}, {"return", ActionKind::return_},
      {"logout", ActionKind::logout},   {"input", ActionKind::input},         {"capture", ActionKind::capture},
      {"replay", ActionKind::replay},   {"guess", ActionKind::guess},         {"terminate", ActionKind::terminate}};
  auto it = kinds.find(v);
  if (it == kinds.end()) throw ParseError(where, "unknown action '" + v + "'");
  return it->second;
}

class Parser {
 public:
  explicit Parser(std::string source) { cfg_.source = std::move(source); }

  ScenarioConfig parse(std::istream& in) {
    std::string raw;
    while (std::getline(in, raw)) {
      ++lineno_;
      const std::string line = trim(strip_comment(raw));
      if (line.empty()) continue;
      if (line.front() == '[') {
        section(line);
        continue;
      }
      if (section_ == "timeline") {
        timeline(line);
        continue;
      }
      auto eq = line.find('=');
      if (eq == std::string::npos) throw ParseError(where(), "expected 'key = value'");
      assign(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    if (pending_latency_) finish_latency();
    cfg_.validate();
    return std::move(cfg_);
  }

 private:
  std::string where() const { return cfg_.source + ":" + std::to_string(lineno_); }

  void section(const std::string& line) {
    if (line.back() != ']') throw ParseError(where(), "unterminated section header");
    if (pending_latency_) finish_latency();
    std::istringstream ss(line.substr(1, line.size() - 2));
    std::string kind, name, extra;
    ss >> kind >> name >> extra;
    if (!extra.empty()) throw ParseError(where(), "unexpected text in section header");
    static const std::vector<std::string> plain{"scenario", "service", "device", "optics", "timeline", "expect"};
    if (kind == "terminal" || kind == "user" || kind == "latency") {
      if (name.empty()) throw ParseError(where(), "[" + kind + "] needs a name");
      if (kind == "terminal") {
        challenge::validate_tid(name);
        if (cfg_.terminal(name)) throw ParseError(where(), "duplicate terminal " + name);
        cfg_.terminals.push_back(TerminalConfig{});
        cfg_.terminals.back().tid = name;
        cfg_.terminals.back().line = lineno_;
      } else if (kind == "user") {
        protocol::validate_uid(name);
        if (cfg_.user(name)) throw ParseError(where(), "duplicate user " + name);
        cfg_.users.push_back(UserConfig{});
        cfg_.users.back().uid = name;
        cfg_.users.back().line = lineno_;
      } else {
        pending_latency_ = simnet::LatencyModel{name, -1, -1, -1, -1};
        latency_line_ = lineno_;
      }
    } else if (std::find(plain.begin(), plain.end(), kind) == plain.end() || !name.empty()) {
      throw ParseError(where(), "unknown section [" + line.substr(1, line.size() - 2) + "]");
    }
    section_ = kind;
  }

  void finish_latency() {
    auto m = *pending_latency_;
    pending_latency_.reset();
    const std::string at = cfg_.source + ":" + std::to_string(latency_line_);
    if (m.mean < 0 || m.min < 0 || m.max < 0 || m.stddev < 0)
      throw ParseError(at, "[latency " + m.label + "] needs mean, min, max and stddev");
    try {
      m.validate();
    } catch (const Error& e) {
      throw ParseError(at, e.what());
    }
    cfg_.latency_models[m.label] = m;
  }

  void assign(const std::string& key, const std::string& value) {
    const std::string w = where();
    auto unknown = [&] { throw ParseError(w, "unknown key '" + key + "' in [" + section_ + "]"); };
    if (section_.empty()) throw ParseError(w, "key outside of any section");
    if (section_ == "scenario") {
      if (key == "name") cfg_.name = value;
      else if (key == "seed") cfg_.seed = to_uint(value, w);
      else if (key == "duration") cfg_.duration = to_millis(value, w);
      else if (key == "epoch") cfg_.epoch = static_cast<std::int64_t>(to_uint(value, w));
      else unknown();
    } else if (section_ == "service") {
      auto& pol = cfg_.service_policy;
      auto& ses = cfg_.session_policy;
      if (key == "sid") cfg_.service.sid = value;
      else if (key == "fingerprint") cfg_.service.fingerprint = value;
      else if (key == "uri") cfg_.service.uri = value;
      else if (key == "location") cfg_.location = value;
      else if (key == "t_reauth") {
        const auto t = to_uint(value, w);
        if (t == 0) throw ParseError(w, "t_reauth must be positive");
        pol.t_reauth = static_cast<std::int64_t>(t);
        ses.t_reauth = Millis{pol.t_reauth * 1000};
      } else if (key == "lock_timeout") ses.lock_timeout = to_millis(value, w);
      else if (key == "logout_grace") ses.logout_grace = to_millis(value, w);
      else if (key == "leniency") ses.leniency = to_millis(value, w);
      else if (key == "pending_expiry") pol.pending_expiry = to_millis(value, w);
      else if (key == "throttle") pol.throttle_enabled = to_bool(value, w);
      else if (key == "nonce_range") {
        const auto r = to_uint(value, w);
        if (r == 0 || r > 1'000'000) throw ParseError(w, "nonce_range must be in [1, 1000000]");
        pol.nonce_range = static_cast<std::uint32_t>(r);
      } else if (key == "skew_window") pol.totp.skew_window = static_cast<int>(to_uint(value, w));
      else unknown();
    } else if (section_ == "latency") {
      auto& m = *pending_latency_;
      if (key == "mean") m.mean = to_double(value, w);
      else if (key == "min") m.min = to_double(value, w);
      else if (key == "max") m.max = to_double(value, w);
      else if (key == "stddev") m.stddev = to_double(value, w);
      else unknown();
    } else if (section_ == "device") {
      auto& d = cfg_.device_times;
      if (key == "voice") d.voice_activation = to_millis(value, w);
      else if (key == "capture") d.capture_autofocus = to_millis(value, w);
      else if (key == "decode") d.qr_decode = to_millis(value, w);
      else if (key == "otp") d.otp_generation = to_millis(value, w);
      else if (key == "retries") cfg_.retries = static_cast<int>(to_uint(value, w));
      else if (key == "retry_interval") cfg_.retry_interval = to_millis(value, w);
      else if (key == "battery") cfg_.battery.level = to_double(value, w);
      else if (key == "standby_drain") cfg_.battery.standby_drain = to_double(value, w);
      else if (key == "per_auth_cost") cfg_.battery.per_auth_cost = to_double(value, w);
      else unknown();
    } else if (section_ == "optics") {
      if (key == "table") {
        std::filesystem::path p(value);
        if (p.is_relative() && cfg_.source != "<memory>")
          p = std::filesystem::path(cfg_.source).parent_path() / p;
        cfg_.optics_table = p.string();
      } else if (key == "strict") cfg_.strict_optics = to_bool(value, w);
      else if (key == "distance_factor") cfg_.distance_factor = static_cast<int>(to_uint(value, w));
      else unknown();
    } else if (section_ == "terminal") {
      auto& t = cfg_.terminals.back();
      if (key == "ui_mode") t.ui_mode = to_ui_mode(value, w);
      else if (key == "continuous") t.continuous = to_bool(value, w);
      else if (key == "k_n") t.k_n = value;
      else if (key == "counter") t.counter.value = to_uint(value, w);
      else if (key == "lookahead") t.counter.lookahead = static_cast<int>(to_uint(value, w));
      else if (key == "distance") t.geometry.distance_cm = to_double(value, w);
      else if (key == "angle") t.geometry.angle_deg = to_double(value, w);
      else if (key == "size") t.geometry.displayed_size_cm = to_double(value, w);
      else if (key == "bits") t.bits = static_cast<int>(to_uint(value, w));
      else unknown();
    } else if (section_ == "user") {
      auto& u = cfg_.users.back();
      if (key == "k_u") u.k_u = value;
      else if (key == "clock_offset") {
        const double s = to_double(value, w);
        u.clock_offset = from_seconds(s);
      } else if (key == "associated") u.associated = to_bool(value, w);
      else unknown();
    } else if (section_ == "expect") {
      auto& e = cfg_.expect;
      if (key == "successful_logins") e.successful_logins = to_uint(value, w);
      else if (key == "max_w") e.max_w = to_double(value, w);
      else if (key == "lock_events") e.lock_events = to_uint(value, w);
      else if (key == "replays_accepted") e.replays_accepted = to_uint(value, w);
      else if (key == "reauths_per_minute") e.reauths_per_minute = to_uint(value, w);
      else unknown();
    } else {
      unknown();
    }
  }

  // at <t>|<t1>..<t2> <action> [args] [count N] [every S] [photo NAME]
  void timeline(const std::string& line) {
    const std::string w = where();
    std::istringstream ss(line);
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) tok.push_back(t);
    if (tok.size() < 3 || tok[0] != "at") throw ParseError(w, "expected 'at <seconds> <action> ...'");
    Action a;
    a.line = lineno_;
    if (auto dots = tok[1].find(".."); dots != std::string::npos) {
      a.at = to_millis(tok[1].substr(0, dots), w);
      a.at_max = to_millis(tok[1].substr(dots + 2), w);
      if (*a.at_max <= a.at) throw ParseError(w, "empty time range " + tok[1]);
    } else {
      a.at = to_millis(tok[1], w);
    }
    a.kind = to_action(tok[2], w);
    std::vector<std::string> positional;
    for (std::size_t i = 3; i < tok.size(); ++i) {
      if (tok[i] == "count" || tok[i] == "every" || tok[i] == "photo" || tok[i] == "as") {
        if (i + 1 >= tok.size()) throw ParseError(w, "'" + tok[i] + "' needs a value");
        const std::string& v = tok[++i];
        if (tok[i - 1] == "count") {
          a.count = to_uint(v, w);
          if (a.count == 0) throw ParseError(w, "count must be positive");
        } else if (tok[i - 1] == "every") {
          a.every = to_millis(v, w);
        } else {
          a.photo = v;
        }
      } else {
        positional.push_back(tok[i]);
      }
    }
    // Positional arguments by action: login/guess <user> <terminal>;
    // walk_away/return/logout/replay <user>; input/capture/terminate <terminal>.
    auto need = [&](std::size_t n) {
      if (positional.size() > n) throw ParseError(w, "too many arguments for " + tok[2]);
    };
    switch (a.kind) {
      case ActionKind::login:
      case ActionKind::guess:
        need(2);
        if (positional.size() > 0) a.user = positional[0];
        if (positional.size() > 1) a.terminal = positional[1];
        break;
      case ActionKind::walk_away:
      case ActionKind::return_:
      case ActionKind::logout:
      case ActionKind::replay:
        need(1);
        if (!positional.empty()) a.user = positional[0];
        break;
      case ActionKind::input:
      case ActionKind::capture:
      case ActionKind::terminate:
        need(1);
        if (!positional.empty()) a.terminal = positional[0];
        break;
    }
    cfg_.timeline.push_back(std::move(a));
  }

  ScenarioConfig cfg_;
  std::string section_;
  int lineno_ = 0;
  std::optional<simnet::LatencyModel> pending_latency_;
  int latency_line_ = 0;
};

}  // namespace detail

inline void ScenarioConfig::validate() const {
  auto at = [&](int line) { return source + ":" + std::to_string(line); };
  try {
    challenge::validate_sid(service.sid);
    service_policy.totp.validate();
    session_policy.validate();
    device_times.validate();
    battery.validate();
  } catch (const Error& e) {
    throw ParseError(source, e.what());
  }
  if (!latency_models.count(location)) throw ParseError(source, "unknown latency location '" + location + "'");
  if (duration.count() <= 0) throw ParseError(source, "duration must be positive");
  if (retries < 0) throw ParseError(source, "retries must be non-negative");
  if (distance_factor < 1 || distance_factor > 10) throw ParseError(source, "distance_factor must be in [1, 10]");
  if (optics_table && !std::filesystem::exists(*optics_table))
    throw ParseError(source, "optics table not found: " + *optics_table);
  for (const auto& t : terminals) {
    if ((t.ui_mode == protocol::UiMode::terminal_driven) != t.k_n.has_value())
      throw ParseError(at(t.line), "terminal " + t.tid + ": k_n is required iff ui_mode = terminal-driven");
    try {
      if (t.k_n) otp::OtpKey::from_base32(*t.k_n);
      t.geometry.validate();
      if (t.bits) optics::CodeDensity::for_bits(*t.bits);
    } catch (const Error& e) {
      throw ParseError(at(t.line), "terminal " + t.tid + ": " + e.what());
    }
  }
  for (const auto& u : users) {
    if (u.k_u.empty()) throw ParseError(at(u.line), "user " + u.uid + ": k_u is required");
    try {
      otp::OtpKey::from_base32(u.k_u);
    } catch (const Error& e) {
      throw ParseError(at(u.line), "user " + u.uid + ": " + e.what());
    }
  }
  for (const auto& a : timeline) {
    const bool needs_user = a.kind == ActionKind::login || a.kind == ActionKind::guess ||
                            a.kind == ActionKind::walk_away || a.kind == ActionKind::return_ ||
                            a.kind == ActionKind::logout || a.kind == ActionKind::replay;
    const bool needs_terminal = a.kind == ActionKind::login || a.kind == ActionKind::guess ||
                                a.kind == ActionKind::input || a.kind == ActionKind::capture ||
                                a.kind == ActionKind::terminate;
    if (needs_user && !a.user.empty() && !user(a.user))
      throw ParseError(at(a.line), "unknown user '" + a.user + "'");
    if (needs_terminal && !a.terminal.empty() && !terminal(a.terminal))
      throw ParseError(at(a.line), "unknown terminal '" + a.terminal + "'");
    if (needs_user && a.user.empty() && users.size() != 1)
      throw ParseError(at(a.line), std::string(to_string(a.kind)) + " must name a user unless exactly one is declared");
    if (needs_terminal && a.terminal.empty() && terminals.size() != 1)
      throw ParseError(at(a.line), std::string(to_string(a.kind)) + " must name a terminal unless exactly one is declared");
  }
}

inline ScenarioConfig parse(std::istream& in, const std::string& source = "<memory>") {
  return detail::Parser(source).parse(in);
}

inline ScenarioConfig parse_string(const std::string& text, const std::string& source = "<memory>") {
  std::istringstream in(text);
  return parse(in, source);
}

inline ScenarioConfig load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open scenario file " + path);
  return parse(in, path);
}

}  // namespace gauth::scenario
