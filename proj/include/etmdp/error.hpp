/*
 * Copyright 2026 The etmdp Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef ETMDP_ERROR_HPP
#define ETMDP_ERROR_HPP

#include <stdexcept>
#include <string>

namespace etmdp {

// Runtime failure inside the library (non-finite values, broken invariants).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid or unresolvable configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Filesystem or file-format failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace etmdp

#endif  // ETMDP_ERROR_HPP
