#pragma once

namespace bam {

// Execution policy for the data-parallel kernels. `serial` runs the plain
// reference loops, `parallel` the OpenMP ones. Both produce bit-identical
// results; the serial path is kept for testing and benchmarking.
enum class Exec { serial, parallel };

}  // namespace bam
