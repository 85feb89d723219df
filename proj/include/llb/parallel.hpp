#pragma once

#include <cstddef>
#include <functional>

namespace llb::par {

// Node-parallel execution with a determinism contract: every result is
// bitwise identical for any worker count.  Maps write disjoint output ranges,
// so scheduling cannot change them.  Reductions accumulate fixed-size blocks
// sequentially and combine the block partials in a fixed-shape binary tree;
// the block layout does not depend on the worker count, only on n.
//
// The worker count comes from LLB_THREADS (capped, >= 1) unless overridden
// with set_threads().

int threads();
void set_threads(int n);

// Runs body(begin, end) over a partition of [0, n).  Chunk boundaries are a
// scheduling detail; bodies must only write state indexed by their range.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

// Fixed-shape reductions.  block_sum(b, begin, end) must return the partial
// for block b covering [begin, end); blocks are BLOCK nodes wide.
inline constexpr std::size_t kReduceBlock = 1024;

double reduce_add(std::size_t n, const std::function<double(std::size_t, std::size_t)>& block_sum);
double reduce_max(std::size_t n, const std::function<double(std::size_t, std::size_t)>& block_max);

}  // namespace llb::par
