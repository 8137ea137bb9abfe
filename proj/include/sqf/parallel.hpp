/*
 * Copyright 2026 The sqf Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <functional>

namespace sqf {

/// Worker count: SQF_THREADS if set (>= 1), else hardware concurrency.
int thread_count();

/**
 * Runs body(i) for i in [0, n) on up to `threads` workers (0 = thread_count()).
 * Each index is visited exactly once; the first exception thrown by any body
 * is rethrown on the calling thread after all workers join.
 */
void parallel_for(std::size_t n, const std::function<void(std::size_t)> &body, int threads = 0);

} // namespace sqf
