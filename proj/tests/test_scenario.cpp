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
#include <set>

#include "gauth/scenario.hpp"
#include "gauth/sim.hpp"

using namespace gauth;
using namespace gauth::scenario;

namespace {

const std::string kBase = R"([scenario]
name = unit
duration = 30

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
)";

// Parses and returns the location of the error, or "" on success.
std::string error_at(const std::string& text) {
  try {
    parse_string(text, "t.scn");
  } catch (const ParseError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST(Parse, Basics) {
  auto cfg = parse_string(kBase + "[timeline]\nat 1 login alice T01\nat 10..20 walk_away\n", "t.scn");
  EXPECT_EQ(cfg.name, "unit");
  EXPECT_EQ(cfg.duration, Millis{30'000});
  EXPECT_EQ(cfg.service.sid, "1234");
  ASSERT_EQ(cfg.terminals.size(), 1u);
  EXPECT_TRUE(cfg.terminals[0].continuous);
  EXPECT_EQ(cfg.terminals[0].geometry.distance_cm, 120);
  ASSERT_EQ(cfg.timeline.size(), 2u);
  EXPECT_EQ(cfg.timeline[0].kind, ActionKind::login);
  EXPECT_EQ(cfg.timeline[0].user, "alice");
  EXPECT_EQ(cfg.timeline[0].terminal, "T01");
  EXPECT_EQ(cfg.timeline[1].at, Millis{10'000});
  EXPECT_EQ(cfg.timeline[1].at_max, Millis{20'000});
  EXPECT_EQ(cfg.timeline[1].line, 19);
}

TEST(Parse, ServiceAndDeviceKeys) {
  auto cfg = parse_string(kBase + R"(
[service]
t_reauth = 7
lock_timeout = 1.5
logout_grace = 20
throttle = off
nonce_range = 1000
[device]
retries = 4
retry_interval = 0.25
capture = 1.0
[latency lab]
mean = 100
min = 50
max = 150
stddev = 10
[service]
location = lab
[timeline]
at 2 replay photo p1 count 5 every 0.002
at 3 capture as p1
)");
  EXPECT_EQ(cfg.service_policy.t_reauth, 7);
  EXPECT_EQ(cfg.session_policy.t_reauth, Millis{7000});
  EXPECT_EQ(cfg.session_policy.lock_timeout, Millis{1500});
  EXPECT_EQ(cfg.session_policy.grace(), Millis{20'000});
  EXPECT_FALSE(cfg.service_policy.throttle_enabled);
  EXPECT_EQ(cfg.service_policy.nonce_range, 1000u);
  EXPECT_EQ(cfg.retries, 4);
  EXPECT_EQ(cfg.retry_interval, Millis{250});
  EXPECT_EQ(cfg.device_times.capture_autofocus, Millis{1000});
  EXPECT_EQ(cfg.location, "lab");
  EXPECT_EQ(cfg.latency_models.at("lab").max, 150);
  EXPECT_EQ(cfg.timeline[0].count, 5u);
  EXPECT_EQ(cfg.timeline[0].every, Millis{2});
  EXPECT_EQ(cfg.timeline[0].photo, "p1");
  EXPECT_EQ(cfg.timeline[1].photo, "p1");
}

TEST(Parse, ErrorsCarryLineNumbers) {
  EXPECT_EQ(error_at(kBase + "[timeline]\nat 1 login mallory T01\n"), "t.scn:18");
  EXPECT_EQ(error_at(kBase + "[timeline]\nat 1 login alice T09\n"), "t.scn:18");
  EXPECT_EQ(error_at(kBase + "[timeline]\nat 1 dance alice\n"), "t.scn:18");
  EXPECT_EQ(error_at(kBase + "[timeline]\nat 5..3 walk_away\n"), "t.scn:18");
  EXPECT_EQ(error_at(kBase + "[timeline]\nwhen 5 walk_away\n"), "t.scn:18");
  EXPECT_EQ(error_at(kBase + "[timeline]\nat 1 replay count 0\n"), "t.scn:18");
  EXPECT_EQ(error_at(kBase + "[timeline]\nat 1 login alice T01 extra\n"), "t.scn:18");
  EXPECT_EQ(error_at(kBase + "[terminal T01]\n"), "t.scn:17");
  EXPECT_EQ(error_at(kBase + "[weather]\n"), "t.scn:17");
  EXPECT_EQ(error_at(kBase + "[scenario]\ncolour = red\n"), "t.scn:18");
  EXPECT_EQ(error_at(kBase + "[scenario]\nseed = -4\n"), "t.scn:18");
  EXPECT_EQ(error_at(kBase + "[scenario]\nno equals sign\n"), "t.scn:18");
  EXPECT_EQ(error_at("name = x\n"), "t.scn:1");
}

TEST(Parse, ValidationErrors) {
  // k_u fails base32 decoding; reported at the [user] header
  EXPECT_EQ(error_at(kBase + "[user bob]\nk_u = !!!\n"), "t.scn:17");
  EXPECT_EQ(error_at(kBase + "[user bob]\n"), "t.scn:17");
  EXPECT_EQ(error_at(kBase + "[terminal T02]\nui_mode = terminal-driven\n"), "t.scn:17");
  EXPECT_EQ(error_at(kBase + "[terminal T02]\nk_n = GEZDGNBVGY3TQOJQGEZDGNBVGY3TQOJQ\n"), "t.scn:17");
  EXPECT_EQ(error_at(kBase + "[service]\nlocation = mars\n"), "t.scn");
  EXPECT_EQ(error_at(kBase + "[optics]\ntable = /nonexistent/cal.csv\n"), "t.scn");
  EXPECT_EQ(error_at(kBase + "[latency lab]\nmean = 100\n"), "t.scn:17");
  EXPECT_EQ(error_at(kBase + "[user bob]\nk_u = MFRGGZDFMZTWQ2LKNNWG23TPOBYXE43U\n[timeline]\nat 1 walk_away\n"),
            "t.scn:20");
}

TEST(Parse, LoadFile) {
  EXPECT_THROW(load_file("/nonexistent/x.scn"), Error);
  for (const auto& entry : std::filesystem::directory_iterator(GAUTH_SCENARIO_DIR)) {
    if (entry.path().extension() != ".scn") continue;
    auto cfg = load_file(entry.path().string());
    EXPECT_EQ(cfg.name, entry.path().stem().string());
    EXPECT_FALSE(cfg.timeline.empty()) << entry.path();
  }
}

TEST(Run, EmptyScenarioIsEmpty) {
  auto cfg = parse_string("[scenario]\nname = empty\nduration = 10\n");
  auto r = sim::run(cfg);
  EXPECT_TRUE(r.trace.empty());
  EXPECT_TRUE(r.metrics.attempts.empty());
  EXPECT_TRUE(r.metrics.exposures.empty());
  EXPECT_TRUE(r.metrics.battery.empty());
  EXPECT_EQ(r.metrics.lock_events, 0u);
  EXPECT_EQ(r.metrics.sessions_opened, 0u);
  EXPECT_EQ(r.metrics.events_processed, 0u);
}

TEST(Run, RandomizedTimesDependOnSeedOnly) {
  const auto cfg = parse_string(kBase + "[timeline]\nat 1 login\nat 10..20 walk_away\n");
  auto walk_time = [&](std::uint64_t seed) {
    for (const auto& row : sim::run(cfg, seed).trace)
      if (row.find(",walk_away") != std::string::npos || row.find("walk-away") != std::string::npos)
        return std::stoll(row.substr(0, row.find(',')));
    return -1LL;
  };
  std::set<long long> seen;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto t = walk_time(seed);
    EXPECT_GE(t, 10'000);
    EXPECT_LT(t, 20'000);
    EXPECT_EQ(t, walk_time(seed));
    seen.insert(t);
  }
  EXPECT_GT(seen.size(), 10u);
}
