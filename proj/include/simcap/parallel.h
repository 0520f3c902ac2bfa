// Copyright 2026 The Simcap Authors
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

#ifndef SIMCAP_PARALLEL_H_
#define SIMCAP_PARALLEL_H_

#include <functional>
#include <vector>

namespace simcap {

// Runs fn(i) for i in [0, n). Work items must be independent; each item writes
// only to its own slot so the result is identical for any thread count.
// threads <= 1 runs inline on the calling thread.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

int hardware_threads();

}  // namespace simcap

#endif  // SIMCAP_PARALLEL_H_
