#pragma once

#include <cstddef>
#include <functional>

namespace mosco {

// Worker count used by assembly loops; 0 or negative means one per hardware thread.
void set_default_jobs(int jobs);
int default_jobs();

// Runs body(i) for i in [0, n) on up to `jobs` threads. Each index is handled by
// exactly one thread; callers write results into per-index slots so the outcome
// does not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, int jobs = 0);

}  // namespace mosco
