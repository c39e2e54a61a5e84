//
// Copyright 2026 The mia-audit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef MIA_AUDIT_ERROR_H_
#define MIA_AUDIT_ERROR_H_

#include <stdexcept>
#include <string>

namespace mia {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller-supplied value violates a documented precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent file contents.
class FormatError : public Error {
 public:
  using Error::Error;
};

// The operating system refused a read or write.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace mia

#endif  // MIA_AUDIT_ERROR_H_
