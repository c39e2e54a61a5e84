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

#ifndef MIA_AUDIT_PARALLEL_H_
#define MIA_AUDIT_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace mia {

// Worker count: MIA_AUDIT_THREADS when set to a positive integer, otherwise
// the hardware concurrency (at least 1).
std::size_t WorkerCount();

// Calls body(i) for every i in [0, n). Indices are split into contiguous
// blocks, one per worker; callers must only write to per-index state so the
// result does not depend on the worker count. The first exception thrown by
// any worker is rethrown after all workers finish.
void ParallelFor(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace mia

#endif  // MIA_AUDIT_PARALLEL_H_
