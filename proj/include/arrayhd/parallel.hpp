#pragma once

namespace arrayhd {

/// Worker count for parallel sections: `requested` if positive, otherwise the
/// hardware concurrency, in both cases capped by the ARRAYHD_THREADS
/// environment variable. Always >= 1. Worker count never changes results,
/// only wall time.
int resolve_threads(int requested);

}  // namespace arrayhd
