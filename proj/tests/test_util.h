// Copyright 2026 The Attrguard Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Helpers shared by the unit tests.

#ifndef ATTRGUARD_TESTS_TEST_UTIL_H_
#define ATTRGUARD_TESTS_TEST_UTIL_H_

#include <stdlib.h>

#include <filesystem>
#include <string>
#include <vector>

#include "attrguard/corpus/profile.h"
#include "attrguard/status.h"
#include "gtest/gtest.h"

namespace attrguard {
namespace test {

inline std::string TestDataPath(const std::string& relative) {
  return std::string(ATTRGUARD_TEST_DATA_DIR) + "/" + relative;
}

inline std::string FixturePath(const std::string& name) {
  return TestDataPath("fixtures/" + name);
}

inline std::string ReadGolden(const std::string& name) {
  return ReadFile(TestDataPath("golden/" + name));
}

inline std::string ProtocolPath(const std::string& relative) {
  return TestDataPath("../protocol/" + relative);
}

template <typename Fn>
void ExpectErrorCode(ErrorCode code, Fn&& fn) {
  try {
    fn();
    ADD_FAILURE() << "expected error " << ErrorCodeName(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

// A fresh directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::string tmpl =
        (std::filesystem::temp_directory_path() / "attrguard_test_XXXXXX")
            .string();
    std::vector<char> buf(tmpl.begin(), tmpl.end());
    buf.push_back('\0');
    if (mkdtemp(buf.data()) == nullptr) {
      throw Error(ErrorCode::kIoError, "mkdtemp failed");
    }
    path_ = buf.data();
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string File(const std::string& name) const {
    return (path_ / name).string();
  }

 private:
  std::filesystem::path path_;
};

inline std::vector<Comment> Comments(const std::vector<std::string>& texts) {
  std::vector<Comment> out;
  for (size_t i = 0; i < texts.size(); ++i) {
    out.push_back({"2021-03-0" + std::to_string(1 + i % 9), texts[i]});
  }
  return out;
}

}  // namespace test
}  // namespace attrguard

#endif  // ATTRGUARD_TESTS_TEST_UTIL_H_
