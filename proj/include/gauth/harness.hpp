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

// Command implementations behind tools/gauth. Each cmd_* writes to the given
// streams and returns a process exit status.

#pragma once

#include <boost/math/distributions/poisson.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "gauth/base32.hpp"
#include "gauth/optics.hpp"
#include "gauth/otp.hpp"
#include "gauth/scenario.hpp"
#include "gauth/sim.hpp"
#include "gauth/simnet.hpp"

namespace gauth::harness {

namespace fs = std::filesystem;

inline constexpr const char* kOutDirEnv = "GAUTH_OUT_DIR";
inline constexpr const char* kDefaultOutDir = "gauth-runs";

struct Check {
  std::string name;
  std::string expected;
  std::string actual;
  bool pass = false;
};

struct Stats {
  std::size_t n = 0;
  double mean = 0, min = 0, max = 0;

  static Stats of(const std::vector<double>& xs) {
    Stats s;
    s.n = xs.size();
    if (xs.empty()) return s;
    s.min = *std::min_element(xs.begin(), xs.end());
    s.max = *std::max_element(xs.begin(), xs.end());
    double sum = 0;
    for (double x : xs) sum += x;
    s.mean = sum / static_cast<double>(xs.size());
    return s;
  }
};

struct RunReport {
  sim::RunResult result;
  Stats login_latency;   // seconds
  Stats reauth_latency;  // seconds
  Stats window;          // W, seconds
  std::uint64_t successes = 0, failures = 0, no_matches = 0, ignored = 0, scan_failures = 0;
  bool reconciled = false;
  std::vector<Check> checks;

  bool expectations_met() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  }
};

inline std::string fixed(double v, int precision = 3) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << v;
  return os.str();
}

// Accepted re-auths per full minute, counted by challenge display time in
// windows (s + 60k, s + 60(k+1)] seconds with s just before the first one.
inline std::vector<std::uint64_t> reauths_per_minute(const sim::RunResult& r) {
  const auto& att = r.metrics.attempts;
  auto first = std::find_if(att.begin(), att.end(), [](const sim::AttemptRecord& a) {
    return a.kind == sim::AttemptKind::login && a.outcome == sim::Outcome::success;
  });
  std::vector<std::uint64_t> out;
  if (first == att.end()) return out;
  auto reauths = std::vector<Millis>{};
  for (const auto& a : att)
    if (a.kind == sim::AttemptKind::reauth && a.outcome == sim::Outcome::success) reauths.push_back(a.started);
  if (reauths.empty()) return out;
  const Millis start = reauths.front() - Millis{1};
  for (Millis lo = start; lo + Millis{60'000} <= r.duration; lo += Millis{60'000}) {
    const Millis hi = lo + Millis{60'000};
    out.push_back(static_cast<std::uint64_t>(
        std::count_if(reauths.begin(), reauths.end(), [&](Millis t) { return t > lo && t <= hi; })));
  }
  return out;
}

inline RunReport make_report(const scenario::ScenarioConfig& cfg, sim::RunResult result) {
  RunReport rep;
  const auto& m = result.metrics;
  std::vector<double> login, reauth, w;
  for (const auto& a : m.attempts) {
    switch (a.outcome) {
      case sim::Outcome::success: ++rep.successes; break;
      case sim::Outcome::failure: ++rep.failures; break;
      case sim::Outcome::no_match: ++rep.no_matches; break;
      case sim::Outcome::ignored: ++rep.ignored; break;
      case sim::Outcome::scan_failed: ++rep.scan_failures; break;
      case sim::Outcome::pending: break;
    }
    if (a.outcome != sim::Outcome::success) continue;
    if (a.kind == sim::AttemptKind::login) login.push_back(to_seconds(a.latency()));
    if (a.kind == sim::AttemptKind::reauth) reauth.push_back(to_seconds(a.latency()));
  }
  for (const auto& e : m.exposures) w.push_back(to_seconds(e.window()));
  rep.login_latency = Stats::of(login);
  rep.reauth_latency = Stats::of(reauth);
  rep.window = Stats::of(w);

  // Every finished attempt leaves exactly one attempt-* row in the trace.
  std::uint64_t trace_rows = 0;
  for (const auto& row : result.trace)
    if (row.find(",attempt-") != std::string::npos) ++trace_rows;
  const std::uint64_t finished = m.attempts.size() - static_cast<std::uint64_t>(m.count(sim::Outcome::pending));
  rep.reconciled = rep.successes + rep.failures + rep.no_matches + rep.ignored == m.decoded_attempts() -
                                                                                    m.count(sim::Outcome::pending) &&
                   trace_rows == finished;

  const auto& e = cfg.expect;
  auto add = [&](std::string name, std::string expected, std::string actual, bool pass) {
    rep.checks.push_back(Check{std::move(name), std::move(expected), std::move(actual), pass});
  };
  if (e.successful_logins) {
    const auto n = m.count(sim::Outcome::success, sim::AttemptKind::login);
    add("successful_logins", std::to_string(*e.successful_logins), std::to_string(n), n == *e.successful_logins);
  }
  if (e.max_w) {
    const double got = rep.window.n ? rep.window.max : 0.0;
    // one simulator tick of slack
    add("max_w", "<= " + fixed(*e.max_w), rep.window.n ? fixed(got) : "none", got <= *e.max_w + 0.001);
  }
  if (e.lock_events)
    add("lock_events", std::to_string(*e.lock_events), std::to_string(m.lock_events), m.lock_events == *e.lock_events);
  if (e.replays_accepted) {
    const auto n = m.count(sim::Outcome::success, sim::AttemptKind::replay);
    add("replays_accepted", std::to_string(*e.replays_accepted), std::to_string(n), n == *e.replays_accepted);
  }
  if (e.reauths_per_minute) {
    const auto per = reauths_per_minute(result);
    bool ok = !per.empty();
    std::string got;
    for (auto n : per) {
      ok = ok && n == *e.reauths_per_minute;
      got += (got.empty() ? "" : " ") + std::to_string(n);
    }
    add("reauths_per_minute", std::to_string(*e.reauths_per_minute), got.empty() ? "none" : got, ok);
  }
  rep.result = std::move(result);
  return rep;
}

inline void write_summary(std::ostream& out, const RunReport& rep) {
  const auto& r = rep.result;
  const auto& m = r.metrics;
  auto stats = [&](const char* label, const Stats& s) {
    out << label << ": n=" << s.n;
    if (s.n) out << " mean=" << fixed(s.mean) << " min=" << fixed(s.min) << " max=" << fixed(s.max);
    out << '\n';
  };
  out << "scenario: " << r.scenario << '\n';
  out << "seed: " << r.seed << '\n';
  out << "duration_s: " << fixed(to_seconds(r.duration)) << '\n';
  out << "events: " << m.events_processed << '\n';
  out << "attempts: " << (rep.successes + rep.failures + rep.no_matches + rep.ignored) << " (success "
      << rep.successes << ", failure " << rep.failures << ", no-match " << rep.no_matches << ", ignored "
      << rep.ignored << ")\n";
  out << "scan_failures: " << rep.scan_failures << '\n';
  for (auto kind : {sim::AttemptKind::login, sim::AttemptKind::reauth, sim::AttemptKind::unlock,
                    sim::AttemptKind::replay, sim::AttemptKind::guess}) {
    const auto n = m.count(kind);
    if (n)
      out << "  " << to_string(kind) << ": " << n << " (accepted " << m.count(sim::Outcome::success, kind) << ")\n";
  }
  out << "failures_by_reason:";
  if (m.failures_by_reason.empty()) out << " none";
  for (const auto& [reason, n] : m.failures_by_reason) out << ' ' << reason << '=' << n;
  out << '\n';
  stats("one_time_latency_s", rep.login_latency);
  stats("reauth_latency_s", rep.reauth_latency);
  stats("exposure_w_s", rep.window);
  out << "sessions_opened: " << m.sessions_opened << '\n';
  out << "lock_events: " << m.lock_events << '\n';
  out << "unlock_events: " << m.unlock_events << '\n';
  out << "session_ends:";
  if (m.session_ends.empty()) out << " none";
  for (const auto& [cause, n] : m.session_ends) out << ' ' << cause << '=' << n;
  out << '\n';
  out << "step1_pushes: " << m.step1_pushes << '\n';
  out << "step5_notifies: " << m.step5_notifies << '\n';
  std::map<std::string, const sim::BatterySample*> last;
  for (const auto& b : m.battery) last[b.uid] = &b;
  for (const auto& [uid, b] : last) {
    const double drained = m.battery.front().level - b->level;
    out << "battery " << uid << ": final=" << fixed(b->level, 4);
    if (b->minute > 0) out << " drain_per_min=" << fixed(drained / b->minute, 4);
    out << '\n';
  }
  out << "reconciled: " << (rep.reconciled ? "yes" : "no") << '\n';
  for (const auto& c : rep.checks)
    out << "check " << c.name << ": expected " << c.expected << ", got " << c.actual << " -> "
        << (c.pass ? "PASS" : "FAIL") << '\n';
}

// All files are rendered in memory first; nothing is written unless the run
// finished. An existing run directory is never overwritten.
inline void write_outputs(const fs::path& dir, const RunReport& rep) {
  std::vector<std::pair<std::string, std::string>> files;
  auto render = [&](const char* name, auto&& fn) {
    std::ostringstream os;
    fn(os);
    files.emplace_back(name, os.str());
  };
  render("trace.csv", [&](std::ostream& o) { sim::write_trace(o, rep.result); });
  render("auth.csv", [&](std::ostream& o) { sim::write_attempts(o, rep.result); });
  render("exposure.csv", [&](std::ostream& o) { sim::write_exposure(o, rep.result); });
  render("battery.csv", [&](std::ostream& o) { sim::write_battery(o, rep.result); });
  render("summary.txt", [&](std::ostream& o) { write_summary(o, rep); });
  if (fs::exists(dir) && !fs::is_empty(dir)) throw Error("run directory " + dir.string() + " already holds results");
  fs::create_directories(dir);
  for (const auto& [name, body] : files) {
    std::ofstream f(dir / name, std::ios::binary);
    f << body;
    if (!f) throw Error("cannot write " + (dir / name).string());
  }
}

inline fs::path run_directory(const fs::path& out, const std::string& scenario, std::uint64_t seed) {
  return out / (scenario + "-s" + std::to_string(seed));
}

inline std::string default_out_dir() {
  const char* env = std::getenv(kOutDirEnv);
  return env && *env ? env : kDefaultOutDir;
}

// ---------------------------------------------------------------------------
// run

struct RunOptions {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::uint64_t runs = 1;
  unsigned jobs = 1;
  bool strict_optics = false;
  bool check = false;  // expectation failures make the exit status nonzero
};

inline int cmd_run(const RunOptions& opt, std::ostream& out, std::ostream& err) {
  scenario::ScenarioConfig cfg;
  try {
    cfg = scenario::load_file(opt.scenario);
    if (opt.strict_optics) cfg.strict_optics = true;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  if (opt.runs == 0) {
    err << "error: --runs must be positive\n";
    return 2;
  }
  const std::uint64_t first = opt.seed.value_or(cfg.seed);
  const fs::path dir = opt.out.value_or(default_out_dir());
  std::vector<std::optional<RunReport>> reports(opt.runs);
  std::vector<std::string> errors(opt.runs);
  auto one = [&](std::uint64_t i) {
    try {
      RunReport rep = make_report(cfg, sim::run(cfg, first + i));
      write_outputs(run_directory(dir, cfg.name, first + i), rep);
      reports[i] = std::move(rep);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(opt.jobs, static_cast<unsigned>(opt.runs)));
  if (jobs == 1) {
    for (std::uint64_t i = 0; i < opt.runs; ++i) one(i);
  } else {
    std::mutex mu;
    std::uint64_t next = 0;
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j)
      pool.emplace_back([&] {
        for (;;) {
          std::uint64_t i;
          {
            std::lock_guard<std::mutex> lock(mu);
            if (next >= opt.runs) return;
            i = next++;
          }
          one(i);
        }
      });
    for (auto& t : pool) t.join();
  }

  int status = 0;
  std::vector<double> all_w;
  for (std::uint64_t i = 0; i < opt.runs; ++i) {
    if (!errors[i].empty()) {
      err << "error: seed " << first + i << ": " << errors[i] << '\n';
      status = 2;
      continue;
    }
    const auto& rep = *reports[i];
    if (opt.runs == 1) {
      write_summary(out, rep);
    } else {
      out << "seed " << rep.result.seed << ": attempts=" << rep.result.metrics.decoded_attempts()
          << " success=" << rep.successes << " locks=" << rep.result.metrics.lock_events
          << " max_w=" << (rep.window.n ? fixed(rep.window.max) : "none")
          << " checks=" << (rep.expectations_met() ? "PASS" : "FAIL") << '\n';
    }
    for (const auto& e : rep.result.metrics.exposures) all_w.push_back(to_seconds(e.window()));
    if (opt.check && (!rep.expectations_met() || !rep.reconciled) && status == 0) status = 1;
  }
  if (opt.runs > 1) {
    const auto w = Stats::of(all_w);
    out << "runs: " << opt.runs << " exposure_w_s: n=" << w.n;
    if (w.n) out << " mean=" << fixed(w.mean) << " max=" << fixed(w.max);
    out << '\n';
  }
  out << "output: " << dir.string() << '\n';
  return status;
}

// ---------------------------------------------------------------------------
// attack replay

struct AttackVerdict {
  std::uint64_t replays = 0;
  std::uint64_t replays_accepted = 0;
  std::uint64_t guesses = 0;
  std::uint64_t guesses_accepted = 0;
  std::uint64_t guess_bound = 0;  // largest plausible chance acceptances
  double guess_expected = 0;
  bool legit_unaffected = false;
  std::string legit_detail;

  bool pass() const { return replays_accepted == 0 && guesses_accepted <= guess_bound && legit_unaffected; }
};

struct LegitSummary {
  std::uint64_t successes = 0, failures = 0, locks = 0;
  std::map<std::string, std::uint64_t> ends;
  bool operator==(const LegitSummary&) const = default;
};

inline LegitSummary legit_summary(const sim::RunResult& r) {
  LegitSummary s;
  for (const auto& a : r.metrics.attempts) {
    if (a.kind == sim::AttemptKind::replay || a.kind == sim::AttemptKind::guess) continue;
    if (a.outcome == sim::Outcome::success) ++s.successes;
    if (a.outcome == sim::Outcome::failure) ++s.failures;
  }
  s.locks = r.metrics.lock_events;
  s.ends = r.metrics.session_ends;
  return s;
}

// Runs the scenario with and without its adversary actions and compares the
// legitimate user's outcomes.
inline AttackVerdict attack_replay(const scenario::ScenarioConfig& cfg, std::uint64_t seed) {
  using scenario::ActionKind;
  const bool has_replay = std::any_of(cfg.timeline.begin(), cfg.timeline.end(),
                                      [](const scenario::Action& a) { return a.kind == ActionKind::replay; });
  const bool has_capture = std::any_of(cfg.timeline.begin(), cfg.timeline.end(),
                                       [](const scenario::Action& a) { return a.kind == ActionKind::capture; });
  if (!has_replay || !has_capture) throw Error(cfg.source + ": scenario has no capture-then-replay adversary");
  const auto attacked = sim::run(cfg, seed);
  auto clean = cfg;
  std::erase_if(clean.timeline, [](const scenario::Action& a) {
    return a.kind == ActionKind::capture || a.kind == ActionKind::replay || a.kind == ActionKind::guess;
  });
  const auto baseline = sim::run(clean, seed);

  AttackVerdict v;
  const auto& m = attacked.metrics;
  v.replays = m.count(sim::AttemptKind::replay);
  v.replays_accepted = m.count(sim::Outcome::success, sim::AttemptKind::replay);
  v.guesses = m.count(sim::AttemptKind::guess);
  v.guesses_accepted = m.count(sim::Outcome::success, sim::AttemptKind::guess);
  // The victim's device attaches a valid OTP, so a guess only has to hit the
  // nonce: one value per pending challenge, or the HOTP look-ahead window.
  double per_guess = 1.0 / cfg.service_policy.nonce_range;
  for (const auto& t : cfg.terminals)
    if (t.ui_mode == protocol::UiMode::terminal_driven)
      per_guess = std::max(per_guess, (t.counter.lookahead + 1) / 1e6);
  v.guess_expected = static_cast<double>(v.guesses) * per_guess;
  if (v.guess_expected > 0) {
    boost::math::poisson_distribution<> dist(v.guess_expected);
    v.guess_bound = static_cast<std::uint64_t>(boost::math::quantile(boost::math::complement(dist, 1e-6)));
  }
  const auto a = legit_summary(attacked), b = legit_summary(baseline);
  v.legit_unaffected = a == b;
  std::ostringstream d;
  d << "legit success/failure/locks " << a.successes << '/' << a.failures << '/' << a.locks << " (baseline "
    << b.successes << '/' << b.failures << '/' << b.locks << ")";
  v.legit_detail = d.str();
  return v;
}

inline int cmd_attack_replay(const std::string& path, std::optional<std::uint64_t> seed, bool strict_optics,
                             std::ostream& out, std::ostream& err) {
  try {
    auto cfg = scenario::load_file(path);
    if (strict_optics) cfg.strict_optics = true;
    const auto v = attack_replay(cfg, seed.value_or(cfg.seed));
    out << "replays: " << v.replays << " accepted: " << v.replays_accepted << '\n';
    out << "guesses: " << v.guesses << " accepted: " << v.guesses_accepted << " (expected "
        << std::setprecision(3) << v.guess_expected << ", bound " << v.guess_bound << ")\n";
    out << v.legit_detail << '\n';
    out << "verdict: " << (v.pass() ? "PASS" : "FAIL") << '\n';
    return v.pass() ? 0 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

// ---------------------------------------------------------------------------
// calibrate

struct CalibrationRow {
  std::string name;
  double configured = 0;
  double empirical = 0;
  double deviation = 0;
  std::string unit;
  double tolerance = 0;
  bool pass = false;
  std::string note;
};

// Every cell of `table` scanned `samples` times at its nominal geometry with a
// code comfortably above the minimum size. Deviations in percentage points.
inline std::vector<CalibrationRow> calibrate_optics(const optics::AccuracyTable& table, std::uint64_t seed,
                                                    int samples = 10'000, double tolerance_pp = 1.5) {
  std::vector<CalibrationRow> rows;
  std::uint64_t stream = 0;
  for (const auto& [key, p] : table.cells()) {
    const auto [bits, cls, angle] = key;
    const auto density = optics::CodeDensity::for_bits(bits);
    optics::ScanGeometry g{optics::nominal_distance(cls), static_cast<double>(angle), 0};
    g.displayed_size_cm = 2 * optics::minimum_code_size(g.distance_cm, optics::kDefaultDistanceFactor, density);
    Rng rng(Rng::derive(seed, ++stream));
    int ok = 0;
    for (int i = 0; i < samples; ++i)
      if (optics::scan_attempt(g, density, table, rng, true) == optics::ScanOutcome::decoded) ++ok;
    CalibrationRow r;
    r.name = std::to_string(bits) + "b/" + std::string(optics::to_string(cls)) + "/" + std::to_string(angle) + "deg";
    r.configured = 100.0 * p;
    r.empirical = 100.0 * ok / samples;
    r.deviation = r.empirical - r.configured;
    r.unit = "%";
    r.tolerance = tolerance_pp;
    r.pass = std::abs(r.deviation) <= tolerance_pp;
    rows.push_back(r);
  }
  return rows;
}

inline std::vector<CalibrationRow> calibrate_latency(std::uint64_t seed, int samples = 100'000,
                                                     double tolerance_pct = 3.0) {
  std::vector<CalibrationRow> rows;
  std::uint64_t stream = 0;
  for (const auto& m : {simnet::LatencyModel::local(), simnet::LatencyModel::aws_oregon(),
                        simnet::LatencyModel::cloud_europe()}) {
    const simnet::LatencySampler sampler(m);
    Rng rng(Rng::derive(seed, ++stream));
    double sum = 0, lo = m.max, hi = m.min;
    int outside = 0;
    for (int i = 0; i < samples; ++i) {
      const double x = sampler.sample(rng);
      sum += x;
      lo = std::min(lo, x);
      hi = std::max(hi, x);
      if (x < m.min || x > m.max) ++outside;
    }
    CalibrationRow r;
    r.name = m.label;
    r.configured = m.mean;
    r.empirical = sum / samples;
    r.deviation = 100.0 * (r.empirical - m.mean) / m.mean;
    r.unit = "ms";
    r.tolerance = tolerance_pct;
    r.pass = std::abs(r.deviation) <= tolerance_pct && outside == 0;
    r.note = "range [" + fixed(lo, 1) + ", " + fixed(hi, 1) + "] outside=" + std::to_string(outside);
    rows.push_back(r);
  }
  return rows;
}

inline std::vector<CalibrationRow> calibrate_battery(const simnet::BatteryModel& model = {}) {
  std::vector<CalibrationRow> rows;
  auto add = [&](std::string name, double configured, double got, double lo, double hi, std::string note = {}) {
    CalibrationRow r;
    r.name = std::move(name);
    r.configured = configured;
    r.empirical = got;
    r.deviation = got - configured;
    r.unit = "%/min";
    r.tolerance = std::max(configured - lo, hi - configured);
    r.pass = got >= lo && got <= hi;
    r.note = std::move(note);
    rows.push_back(r);
  };
  const double t5 = simnet::drain_rate(model, 5);
  add("T=5s", 2.0, t5, 2.0 - 1e-9, 2.0 + 1e-9);
  add("T=15s", 0.85, simnet::drain_rate(model, 15), 0.80, 0.90);
  // one simulated minute through battery_step must match the rate
  const auto stepped = simnet::battery_step(model, 5, 1.0);
  add("T=5s step", 2.0, model.level - stepped.level, 2.0 - 1e-9, 2.0 + 1e-9);
  add("standby", 0.25, model.standby_drain, 0.25 - 1e-12, 0.25 + 1e-12);
  return rows;
}

inline void write_calibration(std::ostream& out, const std::vector<CalibrationRow>& rows) {
  out << std::left << std::setw(22) << "cell" << std::right << std::setw(12) << "configured" << std::setw(12)
      << "empirical" << std::setw(10) << "delta" << std::setw(8) << "tol" << "  unit   verdict\n";
  for (const auto& r : rows) {
    out << std::left << std::setw(22) << r.name << std::right << std::setw(12) << fixed(r.configured, 4)
        << std::setw(12) << fixed(r.empirical, 4) << std::setw(10) << fixed(r.deviation, 4) << std::setw(8)
        << fixed(r.tolerance, 2) << "  " << std::left << std::setw(6) << r.unit << " " << (r.pass ? "ok" : "OUT");
    if (!r.note.empty()) out << "  " << r.note;
    out << std::right << '\n';
  }
}

inline int cmd_calibrate(const std::string& component, std::uint64_t seed, std::optional<std::string> table_path,
                         std::ostream& out, std::ostream& err) {
  try {
    std::vector<CalibrationRow> rows;
    if (component == "optics") {
      const auto table = table_path ? optics::AccuracyTable::load_file(*table_path)
                                    : optics::AccuracyTable::measured_default();
      rows = calibrate_optics(table, seed);
      write_calibration(out, rows);
      for (int angle : table.angles())
        if (table.complete_at(angle))
          out << "mean accuracy at " << angle << " deg: " << fixed(optics::average_accuracy(table, angle), 4)
              << "%\n";
    } else if (component == "latency") {
      rows = calibrate_latency(seed);
      write_calibration(out, rows);
    } else if (component == "battery") {
      rows = calibrate_battery();
      write_calibration(out, rows);
    } else {
      err << "error: unknown component '" << component << "' (optics, latency, battery)\n";
      return 2;
    }
    const bool ok = std::all_of(rows.begin(), rows.end(), [](const CalibrationRow& r) { return r.pass; });
    out << "calibration " << component << ": " << (ok ? "PASS" : "FAIL") << '\n';
    return ok ? 0 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

// ---------------------------------------------------------------------------
// otp

struct OtpOptions {
  std::string key;  // base32
  std::string mode = "totp";
  std::optional<std::uint64_t> counter;
  std::optional<std::int64_t> time;  // Unix seconds
  std::size_t digits = 6;
  otp::TotpParams totp;
};

inline int cmd_otp(const OtpOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    const auto key = otp::OtpKey::from_base32(opt.key);
    if (opt.mode == "hotp") {
      if (!opt.counter || opt.time) throw Error("hotp needs --counter (and no --time)");
      out << otp::hotp_generate(key, *opt.counter, opt.digits).digits() << '\n';
    } else if (opt.mode == "totp") {
      if (!opt.time || opt.counter) throw Error("totp needs --time (and no --counter)");
      out << otp::totp_generate(key, *opt.time, opt.totp, opt.digits).digits() << '\n';
    } else {
      throw Error("unknown mode '" + opt.mode + "' (hotp, totp)");
    }
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace gauth::harness
