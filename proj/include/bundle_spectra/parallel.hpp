#pragma once

#include <cstddef>
#include <functional>

namespace bundle_spectra {

// Number of worker threads used by site-partitioned loops. Controlled by the
// environment variable BUNDLE_SPECTRA_THREADS (0 or unset = auto).
std::size_t worker_count();

// Runs body(lo, hi) over a partition of [begin, end) into contiguous chunks,
// one chunk per worker. Chunks are disjoint, so bodies may write to disjoint
// slices of shared output without synchronization. Reductions must not be
// performed through this function; deterministic results require the caller
// to reduce serially.
void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace bundle_spectra
