#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace bam {

// Willshaw patterns have i.i.d. Bernoulli(k/n) components, Palm patterns
// exactly k active units each.
enum class Family { willshaw, palm };

const char* to_string(Family f);
Family family_from_string(const std::string& s);

struct PatternSet {
  int n = 0;  // unit count
  int k = 0;  // target activity (mean for Willshaw, exact for Palm)
  int M = 0;  // pattern count
  Family family = Family::palm;
  std::uint64_t seed = 0;
  std::vector<std::uint8_t> bits;  // M x n, row major

  std::span<const std::uint8_t> pattern(int mu) const {
    return {bits.data() + static_cast<std::size_t>(mu) * n, static_cast<std::size_t>(n)};
  }
  int ones(int mu) const;
};

PatternSet gen_patterns(int n, int k, int M, Family family, std::uint64_t seed);

// One pattern per line as 0/1 characters, after a header line
// "n k M family seed".
void write_patterns(const PatternSet& set, std::ostream& out);

// Query noise: lambda is the fraction of retained correct ones, kappa the
// false-ones fraction relative to k. p10 = 1-lambda, p01 = kappa*k/(n-k).
struct QuerySpec {
  double lambda = 1.0;
  double kappa = 0.0;
  int n = 0;
  int k = 0;

  QuerySpec(double lambda, double kappa, int n, int k);

  double p10() const { return 1.0 - lambda; }
  double p01() const {
    return n == k ? 0.0 : kappa * static_cast<double>(k) / static_cast<double>(n - k);
  }
};

// Willshaw: each 1-component is kept independently with probability lambda
// and each 0-component set with probability p01. Palm: exactly
// round(lambda*k) of the pattern's ones are kept and round(kappa*k) false
// ones are added, both at uniformly chosen positions.
std::vector<std::uint8_t> make_query(std::span<const std::uint8_t> pattern,
                                     const QuerySpec& spec, Family family,
                                     std::uint64_t seed);

}  // namespace bam
