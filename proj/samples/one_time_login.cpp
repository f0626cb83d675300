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


// One service-driven login, step by step, printing every message on the way.

#include <iostream>

#include "gauth/protocol.hpp"

using namespace gauth;
using namespace gauth::protocol;

int main() {
  const ServiceIdentity service_id{"sha256:9f2c41d0", "1234", "https://auth.example.test/gauth"};
  const auto k_u = otp::OtpKey::from_base32("GEZDGNBVGY3TQOJQGEZDGNBVGY3TQOJQ");

  Service service(service_id);
  service.enroll_user("alice", k_u);
  TerminalRegistration reg;
  reg.tid = "T01";
  reg.sid = service_id.sid;
  reg.continuous = true;
  service.register_terminal(reg);
  Terminal terminal(reg);

  Device glass;
  const Credential& cred = associate_device(glass, service_id, "alice", k_u);
  auto channel = SecureChannel::open(cred, service_id);
  if (!channel) {
    std::cerr << "service fingerprint mismatch\n";
    return 1;
  }

  const Millis now{1'700'000'000'000};
  const auto payload = terminal_issue_challenge(terminal, service, now);
  std::cout << "terminal shows: " << challenge::encode_payload(payload) << '\n';

  auto scanned = device_on_scan(glass, challenge::decode_payload(challenge::encode_payload(payload)), now);
  auto* req = std::get_if<AuthRequest>(&scanned);
  if (!req) {
    std::cerr << "device has no credential for this service\n";
    return 1;
  }
  const std::string line = channel->send(*req);
  std::cout << "device sends:   " << line;

  const Verification v = service.verify_line(line, now + Millis{300});
  std::cout << "service replies: " << encode_ack(v.ack);
  std::cout << "service log:    " << to_string(v.reason) << '\n';
  glass.on_ack(*req, v.ack, now + Millis{330});
  terminal.on_notify(v.accepted(), req->uid);

  std::cout << "terminal owner: " << terminal.session_owner().value_or("-") << ", device pinned to "
            << glass.pinned_tid().value_or("-") << " (T=" << glass.t_reauth().value_or(0) << " s)\n";

  const Verification replay = service.verify_line(line, now + Millis{2000});
  std::cout << "replay reply:   " << encode_ack(replay.ack);
  std::cout << "service log:    " << to_string(replay.reason) << '\n';
  return v.accepted() && !replay.accepted() ? 0 : 1;
}
