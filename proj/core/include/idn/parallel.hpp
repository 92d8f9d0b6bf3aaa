// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

namespace idn {

/// Number of worker threads kernels may use. Defaults to the IDN_THREADS
/// environment variable when set, otherwise 1.
int num_threads();
void set_num_threads(int n);

/// Runs body(i) for i in [0, count). Work items are independent, so the
/// result never depends on the thread count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace idn
