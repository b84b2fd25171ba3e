#pragma once

#include <functional>

namespace rydopt {

// Runs fn(i) for i in [0, n). Scheduling is dynamic, so callers must write
// results into index-addressed slots and reduce in index order themselves;
// that keeps every reduction bit-identical for any worker count.
// Exceptions propagate to the caller (first one wins).
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

}  // namespace rydopt
