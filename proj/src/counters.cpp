#include "bam/counters.hpp"

#include <bit>
#include <stdexcept>

namespace bam {

const char* to_string(Mode m) { return m == Mode::auto_assoc ? "auto" : "hetero"; }

Mode mode_from_string(const std::string& s) {
  if (s == "auto") return Mode::auto_assoc;
  if (s == "hetero") return Mode::hetero;
  throw std::invalid_argument("unknown mode: " + s);
}

CounterStore::CounterStore(int n_in, int n_out, Mode mode)
    : mode_(mode), n_in_(n_in), n_out_(n_out) {
  if (n_in < 1 || n_out < 1) throw std::invalid_argument("CounterStore: need n >= 1");
  if (mode == Mode::auto_assoc && n_in != n_out)
    throw std::invalid_argument("CounterStore: auto mode needs n_in == n_out");
  m1_in_.assign(n_in_, 0);
  if (mode_ == Mode::auto_assoc) {
    const std::size_t nt = static_cast<std::size_t>(n_in_);
    m11_.assign(nt * (nt + 1) / 2, 0);
  } else {
    m1_out_.assign(n_out_, 0);
    m11_.assign(static_cast<std::size_t>(n_in_) * n_out_, 0);
  }
}

void CounterStore::add(std::span<const std::uint8_t> address) {
  if (mode_ != Mode::auto_assoc)
    throw std::invalid_argument("CounterStore::add: hetero store needs a content pattern");
  if (static_cast<int>(address.size()) != n_in_)
    throw std::invalid_argument("CounterStore::add: pattern length mismatch");
  ++m_;
  // The triangle diagonal counts (i,i) coincidences, which is the unit usage.
  for (int i = 0; i < n_in_; ++i) {
    if (!address[i]) continue;
    ++m1_in_[i];
    std::uint32_t* row = m11_.data() + tri_index(i, i);
    for (int j = i; j < n_in_; ++j)
      if (address[j]) ++row[j - i];
  }
}

void CounterStore::add(std::span<const std::uint8_t> address,
                       std::span<const std::uint8_t> content) {
  if (mode_ != Mode::hetero)
    throw std::invalid_argument("CounterStore::add: auto store takes no content pattern");
  if (static_cast<int>(address.size()) != n_in_ || static_cast<int>(content.size()) != n_out_)
    throw std::invalid_argument("CounterStore::add: pattern length mismatch");
  ++m_;
  for (int j = 0; j < n_out_; ++j)
    if (content[j]) ++m1_out_[j];
  for (int i = 0; i < n_in_; ++i) {
    if (!address[i]) continue;
    ++m1_in_[i];
    std::uint32_t* row = m11_.data() + static_cast<std::size_t>(i) * n_out_;
    for (int j = 0; j < n_out_; ++j)
      if (content[j]) ++row[j];
  }
}

DerivedCounters CounterStore::derived(int i, int j) const {
  if (i < 0 || i >= n_in_ || j < 0 || j >= n_out_)
    throw std::out_of_range("CounterStore::derived: index out of range");
  const std::uint32_t m11 = pair_usage(i, j);
  const std::uint32_t m1_j = unit_usage_out(j);
  const std::uint32_t m0_i = m_ - unit_usage_in(i);
  const std::uint32_t m0_j = m_ - m1_j;
  const std::uint32_t m01 = m1_j - m11;
  const std::uint32_t m00 = m0_i - m01;
  const std::uint32_t m10 = m0_j - m00;
  return {m00, m01, m10, m11, m0_i, m0_j};
}

CounterStore store(const PatternSet& address, Mode mode, const PatternSet* content) {
  if (mode == Mode::hetero) {
    if (content == nullptr)
      throw std::invalid_argument("store: hetero mode needs a content pattern set");
    if (content->M != address.M)
      throw std::invalid_argument("store: address and content sets must have equal M");
    CounterStore s(address.n, content->n, mode);
    for (int mu = 0; mu < address.M; ++mu) s.add(address.pattern(mu), content->pattern(mu));
    return s;
  }
  CounterStore s(address.n, address.n, mode);
  for (int mu = 0; mu < address.M; ++mu) s.add(address.pattern(mu));
  return s;
}

DerivedCounters derived_counters(const CounterStore& s, int i, int j) {
  return s.derived(i, j);
}

std::uint64_t memory_footprint_bits(const CounterStore& s) {
  if (s.mode() != Mode::auto_assoc)
    throw std::invalid_argument("memory_footprint_bits: auto mode only");
  const std::uint64_t m = s.pattern_count();
  if (m < 2) throw std::invalid_argument("memory_footprint_bits: need M >= 2");
  const std::uint64_t n = static_cast<std::uint64_t>(s.n_in());
  const std::uint64_t ld = std::bit_width(m - 1);  // ceil(log2 M)
  return (n * (n + 1) / 2 + 1) * ld;
}

}  // namespace bam
