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

#include <sstream>

#include "gauth/optics.hpp"

using namespace gauth;
using namespace gauth::optics;

namespace {

ScanGeometry at(double cm, double angle, double size = 40.0) { return ScanGeometry{cm, angle, size}; }

double empirical(const ScanGeometry& g, const CodeDensity& d, const AccuracyTable& t, std::uint64_t seed, int n) {
  Rng rng(seed);
  int ok = 0;
  for (int i = 0; i < n; ++i) ok += scan_attempt(g, d, t, rng, true) == ScanOutcome::decoded;
  return static_cast<double>(ok) / n;
}

}  // namespace

TEST(MinimumSize, Formula) {
  EXPECT_DOUBLE_EQ(minimum_code_size(50, 10, CodeDensity(208, 2)), 5.0);
  EXPECT_NEAR(minimum_code_size(120, 10, CodeDensity(1920, 10)), 27.36, 1e-12);
  EXPECT_DOUBLE_EQ(minimum_code_size(20, 10, CodeDensity(208, 2)), 2.0);
  EXPECT_DOUBLE_EQ(minimum_code_size(50, 5, CodeDensity(208, 2)), 10.0);
  EXPECT_THROW(minimum_code_size(0, 10, CodeDensity(208, 2)), Error);
  EXPECT_THROW(minimum_code_size(50, 0, CodeDensity(208, 2)), Error);
  EXPECT_THROW(minimum_code_size(50, 11, CodeDensity(208, 2)), Error);
  EXPECT_THROW(CodeDensity(208, 0), Error);
  EXPECT_THROW(CodeDensity(0, 2), Error);
}

TEST(Density, Ladder) {
  EXPECT_EQ(CodeDensity::for_bits(208).qr_version(), 2);
  EXPECT_EQ(CodeDensity::for_bits(816).modules(), 41);
  EXPECT_EQ(CodeDensity::for_bits(1920).modules(), 57);
  EXPECT_THROW(CodeDensity::for_bits(300), Error);
  EXPECT_EQ(CodeDensity::fitting(488).encoded_bits(), 816);
  EXPECT_EQ(CodeDensity::fitting(208).encoded_bits(), 208);
  EXPECT_THROW(CodeDensity::fitting(1921), Error);
}

TEST(DistanceClass, Thresholds) {
  EXPECT_EQ(classify_distance(20), DistanceClass::intimate);
  EXPECT_EQ(classify_distance(35), DistanceClass::intimate);
  EXPECT_EQ(classify_distance(35.1), DistanceClass::personal);
  EXPECT_EQ(classify_distance(85), DistanceClass::personal);
  EXPECT_EQ(classify_distance(85.1), DistanceClass::social);
  EXPECT_EQ(parse_distance_class("public"), DistanceClass::social);
  EXPECT_THROW(parse_distance_class("far"), ParseError);
}

TEST(DecodeProbability, TableCells) {
  const auto t = AccuracyTable::measured_default();
  EXPECT_DOUBLE_EQ(decode_probability(at(20, 0), CodeDensity::for_bits(208), t, true), 0.727);
  EXPECT_DOUBLE_EQ(decode_probability(at(20, 45), CodeDensity::for_bits(1920), t, true), 0.273);
  for (int bits : {208, 816, 1920})
    EXPECT_DOUBLE_EQ(decode_probability(at(120, 0, 40), CodeDensity::for_bits(bits), t, true), 1.0) << bits;
}

TEST(DecodeProbability, SizeGate) {
  const auto t = AccuracyTable::measured_default();
  const auto d = CodeDensity::for_bits(208);
  EXPECT_EQ(decode_probability(at(120, 0, 11.99), d, t), 0.0);
  EXPECT_EQ(decode_probability(at(120, 0, 12.0), d, t), 1.0);
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(scan_attempt(at(120, 0, 1.0), d, t, rng), ScanOutcome::failed);
}

TEST(DecodeProbability, StrictAndNearest) {
  const auto t = AccuracyTable::measured_default();
  const auto d = CodeDensity::for_bits(208);
  EXPECT_THROW(decode_probability(at(30, 0), d, t, true), Error);
  EXPECT_THROW(decode_probability(at(20, 10), d, t, true), Error);
  EXPECT_THROW(decode_probability(at(20, 0), CodeDensity(300, 2), t, true), Error);
  EXPECT_DOUBLE_EQ(decode_probability(at(30, 10), d, t), 0.727);
  EXPECT_DOUBLE_EQ(decode_probability(at(30, 40), d, t), 0.182);
  EXPECT_DOUBLE_EQ(decode_probability(at(60, 0), CodeDensity(900, 6), t), 0.909);
  EXPECT_THROW(decode_probability(at(20, 95), d, t), Error);
}

TEST(Average, DefaultTable) {
  const auto t = AccuracyTable::measured_default();
  EXPECT_EQ(t.size(), 18u);
  EXPECT_NEAR(average_accuracy(t, 0), 87.8, 0.1);
  EXPECT_NEAR(average_accuracy(t, 0), 87.8667, 1e-3);
  EXPECT_NEAR(average_accuracy(t, 45), 71.7111, 1e-3);
  EXPECT_THROW(average_accuracy(t, 30), Error);
}

TEST(Average, ConstantTableAndIncomplete) {
  AccuracyTable t;
  for (int bits : {208, 816, 1920})
    for (auto d : {DistanceClass::intimate, DistanceClass::personal, DistanceClass::social}) t.set(bits, d, 0, 1.0);
  EXPECT_DOUBLE_EQ(average_accuracy(t, 0), 100.0);
  AccuracyTable partial;
  partial.set(208, DistanceClass::intimate, 0, 0.5);
  EXPECT_THROW(average_accuracy(partial, 0), Error);
  EXPECT_THROW(t.set(208, DistanceClass::social, 0, 1.5), Error);
}

TEST(Table, SaveLoadRoundTrip) {
  const auto t = AccuracyTable::measured_default();
  std::stringstream ss;
  t.save(ss);
  EXPECT_EQ(AccuracyTable::load(ss).cells(), t.cells());
}

TEST(Table, LoadErrorsCarryLine) {
  std::istringstream bad("# header\n208,intimate,0,0.5\n208,far,0,0.5\n");
  try {
    AccuracyTable::load(bad, "cal.txt");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.field(), "cal.txt:3");
  }
  std::istringstream short_row("208,intimate,0\n");
  EXPECT_THROW(AccuracyTable::load(short_row), ParseError);
  std::istringstream junk("208,intimate,0,0.5x\n");
  EXPECT_THROW(AccuracyTable::load(junk), ParseError);
  std::istringstream range("208,intimate,0,2\n");
  EXPECT_THROW(AccuracyTable::load(range), ParseError);
  EXPECT_THROW(AccuracyTable::load_file("/nonexistent/table.csv"), Error);
}

TEST(MonteCarlo, CellFrequencies) {
  const auto t = AccuracyTable::measured_default();
  std::uint64_t seed = 100;
  for (const auto& [key, p] : t.cells()) {
    const auto [bits, dist, angle] = key;
    const auto d = CodeDensity::for_bits(bits);
    const double size = 2 * minimum_code_size(nominal_distance(dist), kDefaultDistanceFactor, d);
    const double f = empirical(at(nominal_distance(dist), angle, size), d, t, seed++, 10000);
    EXPECT_NEAR(f, p, 0.015) << bits << ' ' << to_string(dist) << ' ' << angle;
  }
}

TEST(MonteCarlo, DeterministicUnderSeed) {
  const auto t = AccuracyTable::measured_default();
  const auto d = CodeDensity::for_bits(816);
  Rng a(9), b(9);
  for (int i = 0; i < 500; ++i) ASSERT_EQ(scan_attempt(at(50, 45), d, t, a), scan_attempt(at(50, 45), d, t, b));
}
