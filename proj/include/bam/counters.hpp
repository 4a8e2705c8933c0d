#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bam/patterns.hpp"

namespace bam {

enum class Mode { auto_assoc, hetero };

const char* to_string(Mode m);
Mode mode_from_string(const std::string& s);

struct DerivedCounters {
  std::uint32_t m00, m01, m10, m11;
  std::uint32_t m0_i, m0_j;
};

// First order (unit usage) and second order (synapse usage) counters of a
// stored pattern set. Only M, the unit usages and the joint usage M11 are
// materialized; everything else is derived on demand. In auto mode M11 is
// symmetric and kept as an upper triangle whose diagonal doubles as the
// unit usage.
class CounterStore {
 public:
  CounterStore(int n_in, int n_out, Mode mode);

  void add(std::span<const std::uint8_t> address);  // auto mode
  void add(std::span<const std::uint8_t> address, std::span<const std::uint8_t> content);

  Mode mode() const { return mode_; }
  int n_in() const { return n_in_; }
  int n_out() const { return n_out_; }
  std::uint32_t pattern_count() const { return m_; }

  std::uint32_t unit_usage_in(int i) const { return m1_in_[i]; }
  std::uint32_t unit_usage_out(int j) const {
    return mode_ == Mode::auto_assoc ? m1_in_[j] : m1_out_[j];
  }
  std::uint32_t pair_usage(int i, int j) const {
    return mode_ == Mode::auto_assoc ? m11_[tri_index(i, j)]
                                     : m11_[static_cast<std::size_t>(i) * n_out_ + j];
  }

  DerivedCounters derived(int i, int j) const;

 private:
  std::size_t tri_index(int i, int j) const {
    if (i > j) std::swap(i, j);
    const std::size_t a = static_cast<std::size_t>(i);
    return a * n_in_ - a * (a - 1) / 2 + static_cast<std::size_t>(j - i);
  }

  Mode mode_;
  int n_in_, n_out_;
  std::uint32_t m_ = 0;
  std::vector<std::uint32_t> m1_in_;
  std::vector<std::uint32_t> m1_out_;  // empty in auto mode
  std::vector<std::uint32_t> m11_;
};

CounterStore store(const PatternSet& address, Mode mode, const PatternSet* content = nullptr);

DerivedCounters derived_counters(const CounterStore& s, int i, int j);

// Storage cost of an auto-associative store: (n(n+1)/2 + 1) * ceil(log2 M)
// bits. Requires M >= 2.
std::uint64_t memory_footprint_bits(const CounterStore& s);

}  // namespace bam
