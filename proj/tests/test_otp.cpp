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

#include <random>

#include "gauth/base32.hpp"
#include "gauth/otp.hpp"
#include "oracle/sha1_oracle.hpp"

using namespace gauth;
using namespace gauth::otp;

namespace {

const std::string kRfcKey = "12345678901234567890";

OtpKey rfc_key() { return OtpKey::from_ascii(kRfcKey); }

}  // namespace

TEST(Sha1Oracle, KnownDigests) {
  EXPECT_EQ(oracle::hex(oracle::sha1({})), "da39a3ee5e6b4b0d3255bfef95601890afd80709");
  EXPECT_EQ(oracle::hex(oracle::sha1(oracle::ascii("abc"))), "a9993e364706816aba3e25717850c26c9cd0d89d");
  EXPECT_EQ(oracle::hex(oracle::hmac_sha1(oracle::ascii("Jefe"), oracle::ascii("what do ya want for nothing?"))),
            "effcdf6ae5eb2fa2d27416d5f184df9c259a7c79");
}

TEST(Hotp, Rfc4226Vectors) {
  const char* expected[] = {"755224", "287082", "359152", "969429", "338314",
                            "254676", "287922", "162583", "399871", "520489"};
  for (std::uint64_t c = 0; c < 10; ++c) EXPECT_EQ(hotp_generate(rfc_key(), c).digits(), expected[c]) << c;
}

TEST(Hotp, MatchesOracleOnRandomKeys) {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 200; ++i) {
    std::vector<std::uint8_t> key(10 + rng() % 60);
    for (auto& b : key) b = static_cast<std::uint8_t>(rng());
    const std::uint64_t counter = rng();
    const std::size_t width = 6 + rng() % 3;
    EXPECT_EQ(hotp_generate(OtpKey(key), counter, width).digits(),
              oracle::hotp(key, counter, static_cast<int>(width)));
  }
}

TEST(Hotp, DeterministicAndWidthExact) {
  EXPECT_EQ(hotp_generate(rfc_key(), 7), hotp_generate(rfc_key(), 7));
  for (std::size_t w : {6u, 7u, 8u})
    for (std::uint64_t c = 0; c < 50; ++c) EXPECT_EQ(hotp_generate(rfc_key(), c, w).width(), w);
  EXPECT_THROW(hotp_generate(rfc_key(), 0, 5), Error);
  EXPECT_THROW(hotp_generate(rfc_key(), 0, 9), Error);
}

TEST(Totp, Rfc6238Sha1Vectors) {
  const std::pair<std::int64_t, const char*> vectors[] = {
      {59, "94287082"},         {1111111109, "07081804"}, {1111111111, "14050471"},
      {1234567890, "89005924"}, {2000000000, "69279037"}, {20000000000, "65353130"}};
  for (auto [t, code] : vectors) EXPECT_EQ(totp_generate(rfc_key(), t, {}, 8).digits(), code) << t;
}

TEST(Totp, StepBoundaries) {
  EXPECT_EQ(totp_generate(rfc_key(), 30), totp_generate(rfc_key(), 59));
  EXPECT_EQ(totp_generate(rfc_key(), 59), hotp_generate(rfc_key(), 1));
  EXPECT_EQ(totp_generate(rfc_key(), 60), hotp_generate(rfc_key(), 2));
  TotpParams p;
  p.t0 = 100;
  EXPECT_THROW(totp_generate(rfc_key(), 99, p), Error);
  EXPECT_EQ(totp_generate(rfc_key(), 130, p), hotp_generate(rfc_key(), 1));
}

TEST(Totp, VerifyWindow) {
  const std::int64_t now = 1'700'000'000;
  auto v = totp_verify(rfc_key(), totp_generate(rfc_key(), now), now);
  EXPECT_TRUE(v.accepted());
  EXPECT_EQ(v.offset, 0);
  v = totp_verify(rfc_key(), totp_generate(rfc_key(), now - 30), now);
  EXPECT_TRUE(v.accepted());
  EXPECT_EQ(v.offset, -1);
  v = totp_verify(rfc_key(), totp_generate(rfc_key(), now + 30), now);
  EXPECT_TRUE(v.accepted());
  EXPECT_EQ(v.offset, 1);
  EXPECT_EQ(totp_verify(rfc_key(), totp_generate(rfc_key(), now - 60), now).status, VerifyStatus::mismatch);
  TotpParams strict;
  strict.skew_window = 0;
  EXPECT_FALSE(totp_verify(rfc_key(), totp_generate(rfc_key(), now - 30), now, strict).accepted());
}

TEST(Totp, MalformedCandidateIsDistinct) {
  EXPECT_EQ(totp_verify(rfc_key(), "12a456", 59).status, VerifyStatus::malformed);
  EXPECT_EQ(totp_verify(rfc_key(), "12345", 59).status, VerifyStatus::malformed);
  EXPECT_EQ(totp_verify(rfc_key(), "000000", 59).status, VerifyStatus::mismatch);
  EXPECT_THROW(OtpCode::parse("123456789"), ParseError);
}

TEST(Totp, GenerateVerifyDuality) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 300; ++i) {
    std::vector<std::uint8_t> key(20);
    for (auto& b : key) b = static_cast<std::uint8_t>(rng());
    const auto t = static_cast<std::int64_t>(rng() % 4'000'000'000ULL);
    auto v = totp_verify(OtpKey(key), totp_generate(OtpKey(key), t), t);
    EXPECT_TRUE(v.accepted());
    EXPECT_EQ(v.offset, 0);
  }
}

TEST(HotpWindow, AcceptAdvanceAndReplay) {
  HotpCounter c{10, 3};
  const auto code = hotp_generate(rfc_key(), 10);
  auto v = hotp_verify_window(rfc_key(), code, c);
  EXPECT_TRUE(v.accepted);
  EXPECT_EQ(c.value, 11u);
  // the consumed code is not regenerated anywhere in the new window
  for (std::uint64_t k = 11; k <= 14; ++k) ASSERT_NE(hotp_generate(rfc_key(), k), code);
  EXPECT_FALSE(hotp_verify_window(rfc_key(), code, c).accepted);
  EXPECT_EQ(c.value, 11u);
}

TEST(HotpWindow, LookaheadEdge) {
  HotpCounter c{0, 3};
  EXPECT_FALSE(hotp_verify_window(rfc_key(), hotp_generate(rfc_key(), 4), c).accepted);
  EXPECT_EQ(c.value, 0u);
  EXPECT_TRUE(hotp_verify_window(rfc_key(), hotp_generate(rfc_key(), 3), c).accepted);
  EXPECT_EQ(c.value, 4u);
}

TEST(HotpWindow, InOrderSequenceAdvancesByCount) {
  HotpCounter c{0, 3};
  for (std::uint64_t i = 0; i < 25; ++i) {
    const auto before = c.value;
    ASSERT_TRUE(hotp_verify_window(rfc_key(), hotp_generate(rfc_key(), i), c).accepted);
    EXPECT_GT(c.value, before);
  }
  EXPECT_EQ(c.value, 25u);
}

TEST(OtpKeyTest, Base32RoundTripAndErrors) {
  const auto key = OtpKey::from_base32("GEZDGNBVGY3TQOJQGEZDGNBVGY3TQOJQ");
  EXPECT_EQ(key, rfc_key());
  EXPECT_EQ(key.to_base32(), "GEZDGNBVGY3TQOJQGEZDGNBVGY3TQOJQ");
  EXPECT_EQ(OtpKey::from_base32("gezd gnbv gy3t qojq gezd gnbv gy3t qojq"), rfc_key());
  EXPECT_THROW(OtpKey::from_base32("not base32!"), ParseError);
  EXPECT_THROW(OtpKey::from_ascii("short"), Error);
  EXPECT_EQ(base32::encode({'f', 'o', 'o', 'b', 'a', 'r'}), "MZXW6YTBOI======");
}

TEST(ConstantTime, Equality) {
  EXPECT_TRUE(constant_time_equal("123456", "123456"));
  EXPECT_FALSE(constant_time_equal("123456", "123457"));
  EXPECT_FALSE(constant_time_equal("123456", "1234567"));
}
