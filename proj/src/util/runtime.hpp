#pragma once

namespace rbc {

// Keeps large, short-lived training buffers on the heap instead of fresh
// mmap/munmap pairs per batch (glibc only; a no-op elsewhere).
void tune_allocator();

}  // namespace rbc
