// Copyright 2026 The critsense Authors
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

#ifndef CRITSENSE_PARALLEL_HPP_
#define CRITSENSE_PARALLEL_HPP_

#include <cstddef>
#include <functional>

namespace critsense {

/// Machine core count (>= 1).
int hardware_threads();

/// Runs fn(i) for i in [0, n) on up to `threads` worker threads.
///
/// Tasks must be independent; each writes only to its own output slot, so the
/// result is identical for any thread count or scheduling order. If any task
/// throws, the exception thrown by the lowest index is rethrown after all
/// workers have joined.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace critsense

#endif  // CRITSENSE_PARALLEL_HPP_
