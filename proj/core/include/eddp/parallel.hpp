#pragma once

#include <functional>

namespace eddp {

/// Number of threads used for `requested` workers (0 means hardware default).
int resolve_workers(int requested);

/**
 * Runs body(0) .. body(count - 1), spreading indices over `workers`
 * threads. Each index must write only to its own output slot; callers
 * reduce afterwards in index order, so results do not depend on the
 * thread count. The first exception thrown by any body is rethrown.
 */
void parallel_for(int count, int workers, const std::function<void(int)>& body);

} // namespace eddp
