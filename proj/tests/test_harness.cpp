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


#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gauth/harness.hpp"

using namespace gauth;
using namespace gauth::harness;
namespace fs = std::filesystem;

namespace {

std::string fixture(const std::string& name) { return std::string(GAUTH_SCENARIO_DIR) + "/" + name + ".scn"; }

RunReport report(const std::string& name, std::optional<std::uint64_t> seed = std::nullopt) {
  const auto cfg = scenario::load_file(fixture(name));
  return make_report(cfg, sim::run(cfg, seed.value_or(cfg.seed)));
}

fs::path fresh_dir(const std::string& name) {
  fs::path p = fs::path(::testing::TempDir()) / ("gauth-test-" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::int64_t row_time(const std::string& row) { return std::stoll(row.substr(0, row.find(','))); }

std::size_t rows_with(const sim::RunResult& r, const std::string& needle) {
  return static_cast<std::size_t>(
      std::count_if(r.trace.begin(), r.trace.end(), [&](const std::string& row) { return row.find(needle) != std::string::npos; }));
}

}  // namespace

TEST(Fixtures, LoginLocalSucceedsOnce) {
  auto rep = report("login_local");
  EXPECT_EQ(rep.successes, 1u);
  EXPECT_TRUE(rep.reconciled);
  EXPECT_TRUE(rep.expectations_met());
  EXPECT_EQ(rep.login_latency.n, 1u);
  EXPECT_GE(rep.login_latency.min, 4.1 + 0.265);
  EXPECT_LE(rep.login_latency.max, 4.1 + 0.421);
}

TEST(Fixtures, WalkawayLocksOnceWithinBound) {
  for (std::uint64_t seed : {1u, 7u, 42u}) {
    auto rep = report("walkaway_t5_l1", seed);
    EXPECT_EQ(rep.result.metrics.lock_events, 1u) << seed;
    ASSERT_TRUE(rep.result.metrics.max_window().has_value());
    EXPECT_LE(*rep.result.metrics.max_window(), Millis{6001}) << seed;
    EXPECT_TRUE(rep.expectations_met()) << seed;
  }
}

TEST(Fixtures, AllExpectationsHold) {
  for (const auto& entry : fs::directory_iterator(GAUTH_SCENARIO_DIR)) {
    if (entry.path().extension() != ".scn") continue;
    auto rep = report(entry.path().stem().string());
    EXPECT_TRUE(rep.reconciled) << entry.path();
    for (const auto& c : rep.checks) EXPECT_TRUE(c.pass) << entry.path() << ' ' << c.name << ' ' << c.actual;
  }
}

TEST(Fixtures, CadenceTwelvePerMinute) {
  auto rep = report("cadence_t5");
  const auto per_minute = reauths_per_minute(rep.result);
  ASSERT_GE(per_minute.size(), 10u);
  for (auto n : per_minute) EXPECT_EQ(n, 12u);
  EXPECT_EQ(rep.result.metrics.lock_events, 0u);
}

TEST(Fixtures, StepOneAndFiveAreExclusive) {
  auto sd = report("service_driven").result.metrics;
  EXPECT_GT(sd.step1_pushes, 0u);
  EXPECT_EQ(sd.step5_notifies, 0u);
  auto td = report("terminal_driven").result.metrics;
  EXPECT_EQ(td.step1_pushes, 0u);
  EXPECT_EQ(td.step5_notifies, 2u);
}

TEST(Fixtures, LockedReturnUnlocks) {
  auto m = report("locked_return").result.metrics;
  EXPECT_EQ(m.lock_events, 1u);
  EXPECT_EQ(m.unlock_events, 1u);
  EXPECT_EQ(m.session_ends.at("logout"), 1u);
}

TEST(Trace, CausalAndWellFormed) {
  for (const char* name : {"walkaway_t5_l1", "service_driven", "terminal_driven", "locked_return"}) {
    auto r = report(name).result;
    std::int64_t last = 0;
    for (const auto& row : r.trace) {
      ASSERT_EQ(std::count(row.begin(), row.end(), ','), 3) << row;
      EXPECT_GE(row_time(row), last) << row;
      last = row_time(row);
      EXPECT_LE(last, r.duration.count());
    }
  }
}

TEST(Trace, SingleSendPerDecodedAttempt) {
  auto r = report("walkaway_t5_l1").result;
  std::uint64_t requests = 0;
  for (const auto& a : r.metrics.attempts)
    if (a.outcome == sim::Outcome::success || a.outcome == sim::Outcome::failure) ++requests;
  EXPECT_EQ(rows_with(r, ",send,AUTHREQ"), requests);
}

TEST(Battery, NonIncreasing) {
  auto r = report("cadence_t5").result;
  ASSERT_FALSE(r.metrics.battery.empty());
  double prev = 101;
  for (const auto& b : r.metrics.battery) {
    EXPECT_LE(b.level, prev);
    prev = b.level;
  }
  // roughly 2 % per minute while re-authenticating every 5 s
  EXPECT_NEAR(r.metrics.battery.front().level - r.metrics.battery.back().level,
              2.0 * (r.metrics.battery.back().minute - r.metrics.battery.front().minute), 1.0);
}

TEST(Pinning, ContinuousDeviceIgnoresOtherTerminal) {
  auto cfg = scenario::parse_string(R"([scenario]
name = pinning
duration = 40
[service]
sid = 1234
fingerprint = sha256:9f2c41d0
uri = https://auth.example.test/gauth
[terminal T01]
continuous = yes
distance = 120
size = 20
[terminal T02]
continuous = yes
distance = 120
size = 20
[user alice]
k_u = GEZDGNBVGY3TQOJQGEZDGNBVGY3TQOJQ
[timeline]
at 1 login alice T01
at 15 login alice T02
)");
  auto r = sim::run(cfg, 3);
  EXPECT_GE(r.metrics.count(sim::Outcome::ignored), 1u);
  for (const auto& a : r.metrics.attempts) {
    if (a.tid == "T02") {
      EXPECT_NE(a.outcome, sim::Outcome::success);
    }
  }
  for (const auto& row : r.trace) {
    if (row.find(",send,AUTHREQ") != std::string::npos) {
      EXPECT_EQ(row.find("|tid=T02|"), std::string::npos) << row;
    }
  }
}

TEST(Outputs, DeterministicBytes) {
  const auto cfg = scenario::load_file(fixture("walkaway_t5_l1"));
  auto a = fresh_dir("det-a"), b = fresh_dir("det-b");
  write_outputs(a, make_report(cfg, sim::run(cfg, 9)));
  write_outputs(b, make_report(cfg, sim::run(cfg, 9)));
  for (const char* f : {"trace.csv", "auth.csv", "exposure.csv", "battery.csv", "summary.txt"}) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  EXPECT_EQ(slurp(a / "trace.csv").substr(0, 20), "t_ms,party,kind,deta");
  EXPECT_EQ(slurp(a / "exposure.csv").substr(0, 30), "tid,uid,walk_away_t,detect_t,W");
  auto c = fresh_dir("det-c");
  write_outputs(c, make_report(cfg, sim::run(cfg, 10)));
  EXPECT_NE(slurp(a / "trace.csv"), slurp(c / "trace.csv"));
}

TEST(Outputs, RefusesToOverwrite) {
  const auto cfg = scenario::load_file(fixture("login_local"));
  auto dir = fresh_dir("overwrite");
  write_outputs(dir, make_report(cfg, sim::run(cfg)));
  const auto before = slurp(dir / "trace.csv");
  EXPECT_THROW(write_outputs(dir, make_report(cfg, sim::run(cfg, 99))), Error);
  EXPECT_EQ(slurp(dir / "trace.csv"), before);
}

TEST(Outputs, ReconciliationMatchesTrace) {
  auto rep = report("replay_attack");
  EXPECT_TRUE(rep.reconciled);
  std::size_t finished = 0;
  for (const auto& a : rep.result.metrics.attempts) finished += a.outcome != sim::Outcome::pending;
  EXPECT_EQ(rows_with(rep.result, ",attempt-"), finished);
}

TEST(Cli, RunUnknownScenario) {
  auto dir = fresh_dir("missing");
  std::ostringstream out, err;
  RunOptions opt;
  opt.scenario = "/nonexistent/nothing.scn";
  opt.out = dir.string();
  EXPECT_EQ(cmd_run(opt, out, err), 2);
  EXPECT_NE(err.str().find("nothing.scn"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir));
}

TEST(Cli, RunWritesRunDirectory) {
  auto dir = fresh_dir("run");
  std::ostringstream out, err;
  RunOptions opt;
  opt.scenario = fixture("login_local");
  opt.out = dir.string();
  opt.seed = 3;
  opt.check = true;
  EXPECT_EQ(cmd_run(opt, out, err), 0) << err.str();
  EXPECT_TRUE(fs::exists(dir / "login_local-s3" / "summary.txt"));
  EXPECT_NE(out.str().find("reconciled: yes"), std::string::npos);
  // a second run with the same seed must not clobber the first
  std::ostringstream out2, err2;
  EXPECT_EQ(cmd_run(opt, out2, err2), 2);
}

TEST(Cli, ParallelRunsMatchSerial) {
  auto serial = fresh_dir("serial"), parallel = fresh_dir("parallel");
  RunOptions opt;
  opt.scenario = fixture("walkaway_t5_l1");
  opt.seed = 100;
  opt.runs = 6;
  std::ostringstream o1, e1, o2, e2;
  opt.out = serial.string();
  ASSERT_EQ(cmd_run(opt, o1, e1), 0);
  opt.out = parallel.string();
  opt.jobs = 3;
  ASSERT_EQ(cmd_run(opt, o2, e2), 0);
  for (int s = 100; s < 106; ++s) {
    const auto name = "walkaway_t5_l1-s" + std::to_string(s);
    EXPECT_EQ(slurp(serial / name / "trace.csv"), slurp(parallel / name / "trace.csv"));
  }
}

TEST(Cli, Otp) {
  std::ostringstream out, err;
  OtpOptions o;
  o.key = "GEZDGNBVGY3TQOJQGEZDGNBVGY3TQOJQ";
  o.mode = "hotp";
  o.counter = 0;
  EXPECT_EQ(cmd_otp(o, out, err), 0);
  EXPECT_EQ(out.str(), "755224\n");
  out.str("");
  o.mode = "totp";
  o.counter.reset();
  o.time = 59;
  o.digits = 8;
  EXPECT_EQ(cmd_otp(o, out, err), 0);
  EXPECT_EQ(out.str(), "94287082\n");
  o.key = "1!";
  EXPECT_EQ(cmd_otp(o, out, err), 2);
  o.key = "GEZDGNBVGY3TQOJQGEZDGNBVGY3TQOJQ";
  o.counter = 1;
  EXPECT_EQ(cmd_otp(o, out, err), 2);
}

TEST(Cli, Calibrate) {
  std::ostringstream out, err;
  EXPECT_EQ(cmd_calibrate("battery", 1, std::nullopt, out, err), 0);
  EXPECT_NE(out.str().find("calibration battery: PASS"), std::string::npos);
  EXPECT_EQ(cmd_calibrate("gravity", 1, std::nullopt, out, err), 2);
  EXPECT_EQ(cmd_calibrate("optics", 1, std::string("/nonexistent/t.csv"), out, err), 2);
}

TEST(Attack, SmallReplayScenario) {
  auto cfg = scenario::parse_string(R"([scenario]
name = small_replay
duration = 40
[service]
sid = 1234
fingerprint = sha256:9f2c41d0
uri = https://auth.example.test/gauth
[terminal T01]
continuous = yes
distance = 120
size = 20
[user alice]
k_u = GEZDGNBVGY3TQOJQGEZDGNBVGY3TQOJQ
[timeline]
at 0.5 capture T01 as first
at 1 login alice T01
at 20 replay alice photo first count 500 every 0.002
at 30 guess alice T01 count 200 every 0.003
)");
  auto v = attack_replay(cfg, 4);
  EXPECT_EQ(v.replays, 500u);
  EXPECT_EQ(v.replays_accepted, 0u);
  EXPECT_EQ(v.guesses, 200u);
  EXPECT_TRUE(v.legit_unaffected) << v.legit_detail;
  EXPECT_TRUE(v.pass());
  auto no_adversary = cfg;
  no_adversary.timeline.resize(2);
  no_adversary.timeline.erase(no_adversary.timeline.begin());
  EXPECT_THROW(attack_replay(no_adversary, 4), Error);
}
