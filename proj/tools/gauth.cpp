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

// gauth: scenario runs, replay experiments, calibration checks, OTP codes.
//
//   gauth run --scenario F [--seed N] [--out D] [--runs N] [--jobs J] [--check]
//   gauth attack replay --scenario F [--seed N]
//   gauth calibrate optics|latency|battery [--seed N] [--table FILE]
//   gauth otp --key K --mode hotp|totp (--counter C | --time T) [--digits D]
//
// --strict-optics applies to every command. GAUTH_OUT_DIR sets the default
// output directory for `run`.

#include <CLI11.hpp>

#include <iostream>

#include "gauth/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Gauth protocol simulator"};
  app.require_subcommand(1);
  bool strict = false;
  app.add_flag("--strict-optics", strict, "Require exact optics calibration points");

  gauth::harness::RunOptions run_opt;
  std::uint64_t seed = 0;
  auto* run = app.add_subcommand("run", "Execute a scenario and write CSV results");
  run->add_option("--scenario", run_opt.scenario, "Scenario file")->required();
  auto* run_seed = run->add_option("--seed", seed, "Seed (default: the scenario's)");
  std::string out_dir;
  auto* run_out = run->add_option("--out", out_dir, "Output directory (default: $GAUTH_OUT_DIR or gauth-runs)");
  run->add_option("--runs", run_opt.runs, "Consecutive seeds to run")->check(CLI::PositiveNumber);
  run->add_option("--jobs", run_opt.jobs, "Runs executed in parallel")->check(CLI::PositiveNumber);
  run->add_flag("--check", run_opt.check, "Exit 1 when scenario expectations fail");

  auto* attack = app.add_subcommand("attack", "Adversary experiments");
  attack->require_subcommand(1);
  auto* replay = attack->add_subcommand("replay", "Capture-then-replay experiment");
  std::string attack_scenario;
  std::uint64_t attack_seed = 0;
  replay->add_option("--scenario", attack_scenario, "Scenario file")->required();
  auto* replay_seed = replay->add_option("--seed", attack_seed, "Seed (default: the scenario's)");

  auto* calibrate = app.add_subcommand("calibrate", "Monte-Carlo checks of the configured models");
  std::string component;
  std::uint64_t cal_seed = 1;
  std::string table;
  calibrate->add_option("component", component, "optics, latency or battery")
      ->required()
      ->check(CLI::IsMember({"optics", "latency", "battery"}));
  calibrate->add_option("--seed", cal_seed, "Seed");
  auto* cal_table = calibrate->add_option("--table", table, "Optics calibration file");

  gauth::harness::OtpOptions otp_opt;
  std::uint64_t counter = 0;
  std::int64_t unix_time = 0;
  auto* otp = app.add_subcommand("otp", "Print an HOTP or TOTP code");
  otp->add_option("--key", otp_opt.key, "Base32 key")->required();
  otp->add_option("--mode", otp_opt.mode, "hotp or totp")->required()->check(CLI::IsMember({"hotp", "totp"}));
  auto* otp_counter = otp->add_option("--counter", counter, "HOTP counter");
  auto* otp_time = otp->add_option("--time", unix_time, "Unix time in seconds");
  otp_counter->excludes(otp_time);
  otp->add_option("--digits", otp_opt.digits, "Code width")->check(CLI::Range(6, 8));
  otp->add_option("--step", otp_opt.totp.time_step, "TOTP time step in seconds")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  if (*run) {
    if (*run_seed) run_opt.seed = seed;
    if (*run_out) run_opt.out = out_dir;
    run_opt.strict_optics = strict;
    return gauth::harness::cmd_run(run_opt, std::cout, std::cerr);
  }
  if (*replay) {
    std::optional<std::uint64_t> s;
    if (*replay_seed) s = attack_seed;
    return gauth::harness::cmd_attack_replay(attack_scenario, s, strict, std::cout, std::cerr);
  }
  if (*calibrate) {
    std::optional<std::string> t;
    if (*cal_table) t = table;
    return gauth::harness::cmd_calibrate(component, cal_seed, t, std::cout, std::cerr);
  }
  if (*otp) {
    if (*otp_counter) otp_opt.counter = counter;
    if (*otp_time) otp_opt.time = unix_time;
    return gauth::harness::cmd_otp(otp_opt, std::cout, std::cerr);
  }
  return 0;
}
