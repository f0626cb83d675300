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

// Discrete-event scheduler plus the timing and energy models it drives:
// network latency per service location, device pipeline component times,
// and battery drain.

#pragma once

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <queue>
#include <string>
#include <vector>

#include "gauth/common.hpp"
#include "gauth/rng.hpp"

namespace gauth::simnet {

// ---------------------------------------------------------------------------
// Latency

// Round-trip authentication latency of one service location, milliseconds.
struct LatencyModel {
  std::string label;
  double mean = 0;
  double min = 0;
  double max = 0;
  double stddev = 0;

  void validate() const {
    if (!(min <= mean && mean <= max)) throw Error("latency model '" + label + "': need min <= mean <= max");
    if (!(stddev >= 0)) throw Error("latency model '" + label + "': negative stddev");
    if (min < 0) throw Error("latency model '" + label + "': negative latency");
  }

  // Measured round trips over 20 runs per location.
  static LatencyModel local() { return {"local", 329, 265, 421, 70}; }
  static LatencyModel aws_oregon() { return {"aws", 523, 451, 609, 134}; }
  static LatencyModel cloud_europe() { return {"europe", 703, 584, 2115, 476}; }
};

inline const std::map<std::string, LatencyModel>& builtin_latency_models() {
  static const std::map<std::string, LatencyModel> models{
      {"local", LatencyModel::local()}, {"aws", LatencyModel::aws_oregon()}, {"europe", LatencyModel::cloud_europe()}};
  return models;
}

// Normal with scale `stddev` truncated to [min, max], whose location is
// solved so that the truncated distribution has the configured mean. With
// the location fixed at the mean itself the truncation would shift the
// average (by +43% for the Europe row).
class LatencySampler {
 public:
  explicit LatencySampler(LatencyModel m) : model_(std::move(m)) {
    model_.validate();
    degenerate_ = model_.stddev == 0 || model_.min == model_.max;
    if (degenerate_) return;
    location_ = solve_location();
    const boost::math::normal n;
    const double a = (model_.min - location_) / model_.stddev;
    const double b = (model_.max - location_) / model_.stddev;
    upper_tail_ = a > 0;
    if (upper_tail_) {
      lo_ = boost::math::cdf(boost::math::complement(n, a));
      hi_ = boost::math::cdf(boost::math::complement(n, b));
    } else {
      lo_ = boost::math::cdf(n, a);
      hi_ = boost::math::cdf(n, b);
    }
  }

  const LatencyModel& model() const noexcept { return model_; }
  double location() const noexcept { return degenerate_ ? model_.mean : location_; }

  // Mean of the truncated distribution for a given parent location.
  double truncated_mean(double mu) const {
    const double s = model_.stddev;
    const double a = (model_.min - mu) / s;
    const double b = (model_.max - mu) / s;
    const boost::math::normal n;
    const double pdf_a = boost::math::pdf(n, a), pdf_b = boost::math::pdf(n, b);
    // mass via whichever tail keeps precision
    const double mass = a > 0 ? boost::math::cdf(boost::math::complement(n, a)) -
                                    boost::math::cdf(boost::math::complement(n, b))
                              : boost::math::cdf(n, b) - boost::math::cdf(n, a);
    if (!(mass > 0)) return mu < model_.min ? model_.min : model_.max;
    return mu + s * (pdf_a - pdf_b) / mass;
  }

  double sample(Rng& rng) const {
    if (degenerate_) return model_.mean;
    const boost::math::normal n;
    const double u = rng.uniform01();
    double z;
    if (upper_tail_) {
      // invert the survival function so deep upper tails keep precision
      const double q = std::clamp(lo_ - u * (lo_ - hi_), std::numeric_limits<double>::min(), 1.0);
      z = boost::math::quantile(boost::math::complement(n, q));
    } else {
      const double p = std::clamp(lo_ + u * (hi_ - lo_), std::numeric_limits<double>::min(), 1.0 - 1e-16);
      z = boost::math::quantile(n, p);
    }
    return std::clamp(location_ + model_.stddev * z, model_.min, model_.max);
  }

 private:
  double solve_location() const {
    // truncated_mean is increasing in mu; bisection on a wide bracket
    double lo = model_.min - 30 * model_.stddev;
    double hi = model_.max + 30 * model_.stddev;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (truncated_mean(mid) < model_.mean)
        lo = mid;
      else
        hi = mid;
    }
    return 0.5 * (lo + hi);
  }

  LatencyModel model_;
  bool degenerate_ = false;
  bool upper_tail_ = false;
  double location_ = 0;
  double lo_ = 0, hi_ = 0;  // CDF (or survival) values at min and max
};

inline double sample_latency(const LatencyModel& model, Rng& rng) { return LatencySampler(model).sample(rng); }

// ---------------------------------------------------------------------------
// Device pipeline

struct DeviceTimeModel {
  Millis voice_activation{1700};
  Millis capture_autofocus{1800};
  Millis qr_decode{200};
  Millis otp_generation{400};
  LatencyModel network = LatencyModel::local();

  void validate() const {
    for (auto v : {voice_activation, capture_autofocus, qr_decode, otp_generation})
      if (v.count() < 0) throw Error("device component times must be non-negative");
    network.validate();
  }

  // Fixed part of the pipeline; continuous re-auth skips voice activation.
  Millis fixed_part(bool one_time) const {
    return (one_time ? voice_activation : Millis{0}) + capture_autofocus + qr_decode + otp_generation;
  }
};

// Seconds from trigger to ack for one authentication.
inline double end_to_end_auth_time(const DeviceTimeModel& dt, bool one_time, Rng& rng) {
  return to_seconds(dt.fixed_part(one_time)) + sample_latency(dt.network, rng) / 1000.0;
}

inline double expected_auth_time(const DeviceTimeModel& dt, bool one_time) {
  return to_seconds(dt.fixed_part(one_time)) + dt.network.mean / 1000.0;
}

// ---------------------------------------------------------------------------
// Battery

struct BatteryModel {
  double level = 100.0;                       // percent
  double standby_drain = 0.25;                // percent per minute
  double per_auth_cost = (2.0 - 0.25) / 12.0;  // percent per authentication

  void validate() const {
    if (!(level >= 0 && level <= 100)) throw Error("battery level must be in [0, 100]");
    if (!(standby_drain >= 0) || !(per_auth_cost >= 0)) throw Error("battery drain rates must be non-negative");
  }
};

// Percent per minute while re-authenticating every `t_reauth` seconds.
inline double drain_rate(const BatteryModel& m, double t_reauth_s) {
  if (!(t_reauth_s > 0)) throw Error("t_reauth must be positive");
  return m.standby_drain + m.per_auth_cost * (60.0 / t_reauth_s);
}

inline BatteryModel battery_step(BatteryModel m, double t_reauth_s, double minutes) {
  if (minutes < 0) throw Error("battery step must not go back in time");
  m.level = std::max(0.0, m.level - minutes * drain_rate(m, t_reauth_s));
  return m;
}

// ---------------------------------------------------------------------------
// Event loop

enum class EventKind { deadline, message_delivery, scan, scenario_action, timer };

inline std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::deadline: return "deadline";
    case EventKind::message_delivery: return "message";
    case EventKind::scan: return "scan";
    case EventKind::scenario_action: return "action";
    case EventKind::timer: return "timer";
  }
  return "?";
}

struct SimEvent {
  Millis at;
  std::uint64_t seq = 0;  // insertion order breaks ties
  std::string target;
  EventKind kind = EventKind::timer;
  std::string detail;
  std::function<void()> action;
};

// Events run in (time, insertion) order. An action may only schedule at or
// after the current time.
class EventQueue {
 public:
  using TraceSink = std::function<void(const SimEvent&)>;

  Millis now() const noexcept { return now_; }
  bool empty() const noexcept { return queue_.empty(); }
  std::size_t pending() const noexcept { return queue_.size(); }
  std::size_t processed() const noexcept { return processed_; }

  void schedule(Millis at, std::string target, EventKind kind, std::string detail, std::function<void()> action) {
    if (at < now_)
      throw Error("event '" + detail + "' for " + target + " scheduled in the past (" + std::to_string(at.count()) +
                  " < " + std::to_string(now_.count()) + ")");
    queue_.push(SimEvent{at, next_seq_++, std::move(target), kind, std::move(detail), std::move(action)});
  }

  void schedule_in(Millis delay, std::string target, EventKind kind, std::string detail, std::function<void()> action) {
    schedule(now_ + delay, std::move(target), kind, std::move(detail), std::move(action));
  }

  // Processes events with at <= end. Returns the number processed.
  std::size_t run_until(Millis end, const TraceSink& trace = {}) {
    std::size_t n = 0;
    while (!queue_.empty() && queue_.top().at <= end) {
      SimEvent ev = queue_.top();
      queue_.pop();
      now_ = ev.at;
      if (trace) trace(ev);
      if (ev.action) ev.action();
      ++n;
      ++processed_;
    }
    if (now_ < end) now_ = end;
    return n;
  }

 private:
  struct Later {
    bool operator()(const SimEvent& a, const SimEvent& b) const {
      return a.at != b.at ? a.at > b.at : a.seq > b.seq;
    }
  };

  std::priority_queue<SimEvent, std::vector<SimEvent>, Later> queue_;
  Millis now_{0};
  std::uint64_t next_seq_ = 0;
  std::size_t processed_ = 0;
};

}  // namespace gauth::simnet
