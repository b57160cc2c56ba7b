// Copyright 2026 The Movo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "doctest.h"

#include "movo/encoding.hpp"

using namespace movo;

TEST_CASE("hex round trip and rejects")
{
  Bytes b{0x00, 0x01, 0xab, 0xff};
  CHECK(to_hex(b) == "0001abff");
  CHECK(from_hex("0001ABff") == b);
  CHECK_THROWS_AS(from_hex("abc"), std::invalid_argument);
  CHECK_THROWS_AS(from_hex("zz"), std::invalid_argument);
  CHECK(from_hex("").empty());
}

TEST_CASE("base64 matches the RFC 4648 vectors")
{
  const std::pair<const char*, const char*> vectors[] = {
      {"", ""},         {"f", "Zg=="},         {"fo", "Zm8="},         {"foo", "Zm9v"},
      {"foob", "Zm9vYg=="}, {"fooba", "Zm9vYmE="}, {"foobar", "Zm9vYmFy"},
  };
  for (auto [plain, enc] : vectors) {
    CHECK(to_base64(as_bytes(plain)) == enc);
    CHECK(to_string(from_base64(enc)) == plain);
  }
  CHECK_THROWS(from_base64("Zm9v!"));
}

TEST_CASE("canonical JSON keeps insertion order and has no whitespace")
{
  Json j;
  j["b"] = 1;
  j["a"] = "x y";
  j["c"] = Json::array({1, 2});
  CHECK(canonical(j) == R"({"b":1,"a":"x y","c":[1,2]})");
}

TEST_CASE("big-endian helpers")
{
  Bytes out;
  put_be32(out, 0x01020304u);
  put_be64(out, 0x0102030405060708ull);
  CHECK(out == Bytes{1, 2, 3, 4, 1, 2, 3, 4, 5, 6, 7, 8});
  CHECK(get_be32(out) == 0x01020304u);
  CHECK(get_be64(ByteView(out).subspan(4)) == 0x0102030405060708ull);
}
