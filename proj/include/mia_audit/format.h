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

#ifndef MIA_AUDIT_FORMAT_H_
#define MIA_AUDIT_FORMAT_H_

#include <string>

#include "json.hpp"

namespace mia {

// Shortest text that parses back to the same double; "nan", "inf", "-inf"
// for non-finite values.
std::string FormatDouble(double v);

// NaN and infinities become null.
nlohmann::json JsonNumber(double v);

}  // namespace mia

#endif  // MIA_AUDIT_FORMAT_H_
