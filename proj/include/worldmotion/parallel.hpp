#pragma once

#include <functional>

namespace wm {

/// Worker count used when a caller passes 0.
int defaultThreadCount();

/// Runs body(i) for i in [0, count) on up to `threads` workers (0 = all
/// cores). The first exception thrown by any call is rethrown after all
/// workers stop.
void parallelFor(int count, int threads, const std::function<void(int)>& body);

}  // namespace wm
