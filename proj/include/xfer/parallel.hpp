/*
 * Copyright 2026 The xfer Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef XFER_PARALLEL_HPP_
#define XFER_PARALLEL_HPP_

#include <cstddef>
#include <functional>

namespace xfer {

// Upper bound on worker threads used by the library. 0 restores the default,
// which is XFER_THREADS when set and the hardware concurrency otherwise.
void set_thread_count(std::size_t threads);
std::size_t thread_count();

// Runs body(i) for every i in [begin, end), handing indices to workers
// dynamically. body(i) must not depend on the schedule so that results are
// the same for every thread count. The first exception thrown is rethrown.
void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t)>& body);

}  // namespace xfer

#endif  // XFER_PARALLEL_HPP_
