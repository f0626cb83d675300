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

// Stochastic model of the screen-to-camera channel.
//
// A scan first passes a hard size gate (the code must be at least the
// minimum readable size for its distance and density) and then succeeds with
// the measured accuracy of the nearest calibrated cell. Cells are point
// measurements; nothing is interpolated between them.

#pragma once

#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "gauth/common.hpp"
#include "gauth/rng.hpp"

namespace gauth::optics {

enum class DistanceClass { intimate, personal, social };

inline constexpr double kIntimateCm = 20.0;
inline constexpr double kPersonalCm = 50.0;
inline constexpr double kSocialCm = 120.0;
inline constexpr int kDefaultDistanceFactor = 10;

inline std::string_view to_string(DistanceClass c) {
  switch (c) {
    case DistanceClass::intimate: return "intimate";
    case DistanceClass::personal: return "personal";
    case DistanceClass::social: return "social";
  }
  return "?";
}

inline DistanceClass parse_distance_class(std::string_view s) {
  if (s == "intimate") return DistanceClass::intimate;
  if (s == "personal") return DistanceClass::personal;
  if (s == "social" || s == "public") return DistanceClass::social;
  throw ParseError("distance_class", "unknown distance class '" + std::string(s) + "'");
}

// Midpoints between the calibrated 20/50/120 cm distances.
inline DistanceClass classify_distance(double cm) {
  if (cm <= 35.0) return DistanceClass::intimate;
  if (cm <= 85.0) return DistanceClass::personal;
  return DistanceClass::social;
}

inline double nominal_distance(DistanceClass c) {
  switch (c) {
    case DistanceClass::intimate: return kIntimateCm;
    case DistanceClass::personal: return kPersonalCm;
    case DistanceClass::social: return kSocialCm;
  }
  return 0;
}

struct ScanGeometry {
  double distance_cm = kPersonalCm;
  double angle_deg = 0.0;
  double displayed_size_cm = 10.0;

  void validate() const {
    if (!(distance_cm > 0)) throw Error("scan distance must be positive");
    if (!(angle_deg >= 0 && angle_deg < 90)) throw Error("scan angle must be in [0, 90)");
    if (!(displayed_size_cm > 0)) throw Error("displayed code size must be positive");
  }
};

// Capacity ladder of the readability experiments: encoded bits -> QR version.
inline const std::map<int, int>& capacity_ladder() {
  static const std::map<int, int> ladder{{208, 2}, {816, 6}, {1920, 10}};
  return ladder;
}

class CodeDensity {
 public:
  CodeDensity(int encoded_bits, int qr_version) : bits_(encoded_bits), version_(qr_version) {
    if (version_ < 1 || version_ > 40) throw Error("QR version must be in [1, 40]");
    if (bits_ <= 0) throw Error("encoded bits must be positive");
  }

  // Rung of the capacity ladder holding exactly `bits`.
  static CodeDensity for_bits(int bits) {
    auto it = capacity_ladder().find(bits);
    if (it == capacity_ladder().end())
      throw Error("encoded bits " + std::to_string(bits) + " not on the capacity ladder (208, 816, 1920)");
    return {bits, it->second};
  }

  // Smallest rung that can hold `bits`.
  static CodeDensity fitting(std::size_t bits) {
    for (auto [rung, version] : capacity_ladder())
      if (bits <= static_cast<std::size_t>(rung)) return {rung, version};
    throw Error("payload of " + std::to_string(bits) + " bits exceeds the largest calibrated code");
  }

  int encoded_bits() const noexcept { return bits_; }
  int qr_version() const noexcept { return version_; }
  int modules() const noexcept { return 17 + 4 * version_; }

 private:
  int bits_;
  int version_;
};

// (distance / factor) * (modules / 25); 25 modules is a version-2 code.
inline double minimum_code_size(double distance_cm, int distance_factor, const CodeDensity& density) {
  if (!(distance_cm > 0)) throw Error("distance must be positive");
  if (distance_factor < 1 || distance_factor > 10) throw Error("distance factor must be in [1, 10]");
  return (distance_cm / distance_factor) * (density.modules() / 25.0);
}

class AccuracyTable {
 public:
  using Key = std::tuple<int, DistanceClass, int>;  // bits, distance class, angle

  void set(int bits, DistanceClass d, int angle, double probability) {
    if (!(probability >= 0.0 && probability <= 1.0))
      throw Error("accuracy must be in [0, 1], got " + std::to_string(probability));
    cells_[{bits, d, angle}] = probability;
  }

  std::optional<double> at(int bits, DistanceClass d, int angle) const {
    auto it = cells_.find({bits, d, angle});
    if (it == cells_.end()) return std::nullopt;
    return it->second;
  }

  const std::map<Key, double>& cells() const noexcept { return cells_; }
  std::size_t size() const noexcept { return cells_.size(); }

  std::set<int> angles() const {
    std::set<int> out;
    for (const auto& [k, p] : cells_) out.insert(std::get<2>(k));
    return out;
  }
  std::set<int> bits() const {
    std::set<int> out;
    for (const auto& [k, p] : cells_) out.insert(std::get<0>(k));
    return out;
  }

  // Every (bits, distance class) pair present at this angle.
  bool complete_at(int angle) const {
    auto b = bits();
    if (b.empty()) return false;
    for (int bits_value : b)
      for (auto d : {DistanceClass::intimate, DistanceClass::personal, DistanceClass::social})
        if (!at(bits_value, d, angle)) return false;
    return true;
  }

  // Measured accuracies (11 scans per cell) at 0 and 45 degrees.
  static AccuracyTable measured_default() {
    AccuracyTable t;
    using D = DistanceClass;
    const double p0[3][3] = {{0.727, 0.727, 1.0}, {1.0, 0.909, 1.0}, {0.545, 1.0, 1.0}};
    const double p45[3][3] = {{0.182, 0.636, 1.0}, {0.727, 0.818, 1.0}, {0.273, 0.818, 1.0}};
    const int bits[3] = {208, 816, 1920};
    const D classes[3] = {D::intimate, D::personal, D::social};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        t.set(bits[i], classes[j], 0, p0[i][j]);
        t.set(bits[i], classes[j], 45, p45[i][j]);
      }
    return t;
  }

  // One cell per line: `bits,distance_class,angle,probability`. Blank lines
  // and lines starting with '#' are skipped.
  static AccuracyTable load(std::istream& in, const std::string& source = "<table>") {
    AccuracyTable t;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      auto first = line.find_first_not_of(" \t");
      if (first == std::string::npos || line[first] == '#') continue;
      std::vector<std::string> f;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) {
        auto a = cell.find_first_not_of(" \t");
        auto b = cell.find_last_not_of(" \t");
        f.push_back(a == std::string::npos ? "" : cell.substr(a, b - a + 1));
      }
      const std::string where = source + ":" + std::to_string(lineno);
      if (f.size() != 4) throw ParseError(where, "expected bits,distance_class,angle,probability");
      try {
        std::size_t used = 0;
        int bits = std::stoi(f[0], &used);
        if (used != f[0].size()) throw std::invalid_argument("bits");
        int angle = std::stoi(f[2], &used);
        if (used != f[2].size()) throw std::invalid_argument("angle");
        double p = std::stod(f[3], &used);
        if (used != f[3].size()) throw std::invalid_argument("probability");
        t.set(bits, parse_distance_class(f[1]), angle, p);
      } catch (const ParseError& e) {
        throw ParseError(where, e.what());
      } catch (const std::exception&) {
        throw ParseError(where, std::string("bad number in '") + line + "'");
      }
    }
    return t;
  }

  static AccuracyTable load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open calibration file " + path);
    return load(in, path);
  }

  void save(std::ostream& out) const {
    out << "# bits,distance_class,angle,probability\n";
    for (const auto& [k, p] : cells_)
      out << std::get<0>(k) << ',' << to_string(std::get<1>(k)) << ',' << std::get<2>(k) << ',' << p << '\n';
  }

 private:
  std::map<Key, double> cells_;
};

// Arithmetic mean, in percent, of every cell at `angle`.
inline double average_accuracy(const AccuracyTable& table, int angle) {
  if (!table.complete_at(angle)) throw Error("accuracy table incomplete at angle " + std::to_string(angle));
  double sum = 0;
  int n = 0;
  for (const auto& [k, p] : table.cells())
    if (std::get<2>(k) == angle) {
      sum += p;
      ++n;
    }
  return 100.0 * sum / n;
}

struct Bucket {
  int bits;
  DistanceClass distance;
  int angle;
};

// Calibrated cell for a geometry. Strict mode requires an exact calibration
// point (ladder bits, calibrated angle, one of the three nominal distances).
inline Bucket nearest_bucket(const ScanGeometry& g, const CodeDensity& density, const AccuracyTable& table,
                             bool strict) {
  const auto bits = table.bits();
  const auto angles = table.angles();
  if (bits.empty()) throw Error("empty accuracy table");
  const DistanceClass d = classify_distance(g.distance_cm);
  if (strict) {
    if (!bits.count(density.encoded_bits()))
      throw Error("strict optics: " + std::to_string(density.encoded_bits()) + " bits is not calibrated");
    const int angle = static_cast<int>(std::lround(g.angle_deg));
    if (static_cast<double>(angle) != g.angle_deg || !angles.count(angle))
      throw Error("strict optics: angle " + std::to_string(g.angle_deg) + " is not calibrated");
    if (g.distance_cm != nominal_distance(d))
      throw Error("strict optics: distance " + std::to_string(g.distance_cm) + " cm is not calibrated");
    return {density.encoded_bits(), d, angle};
  }
  auto nearest = [](const std::set<int>& options, double v) {
    int best = *options.begin();
    for (int o : options)
      if (std::abs(o - v) < std::abs(best - v)) best = o;
    return best;
  };
  return {nearest(bits, density.encoded_bits()), d, nearest(angles, g.angle_deg)};
}

// Probability that one scan decodes, including the size gate.
inline double decode_probability(const ScanGeometry& g, const CodeDensity& density, const AccuracyTable& table,
                                 bool strict = false, int distance_factor = kDefaultDistanceFactor) {
  g.validate();
  if (g.displayed_size_cm < minimum_code_size(g.distance_cm, distance_factor, density)) return 0.0;
  const Bucket b = nearest_bucket(g, density, table, strict);
  auto p = table.at(b.bits, b.distance, b.angle);
  if (!p) throw Error("accuracy table has no cell for " + std::to_string(b.bits) + " bits, " +
                      std::string(to_string(b.distance)) + ", " + std::to_string(b.angle) + " deg");
  return *p;
}

enum class ScanOutcome { decoded, failed };

// One independent Bernoulli trial. A draw is consumed even when the size gate
// fails so the random stream does not depend on geometry.
inline ScanOutcome scan_attempt(const ScanGeometry& g, const CodeDensity& density, const AccuracyTable& table,
                                Rng& rng, bool strict = false, int distance_factor = kDefaultDistanceFactor) {
  const double p = decode_probability(g, density, table, strict, distance_factor);
  return rng.bernoulli(p) ? ScanOutcome::decoded : ScanOutcome::failed;
}

}  // namespace gauth::optics
