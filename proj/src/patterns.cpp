#include "bam/patterns.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "bam/rng.hpp"

namespace bam {

const char* to_string(Family f) {
  return f == Family::willshaw ? "willshaw" : "palm";
}

Family family_from_string(const std::string& s) {
  if (s == "willshaw") return Family::willshaw;
  if (s == "palm") return Family::palm;
  throw std::invalid_argument("unknown pattern family: " + s);
}

int PatternSet::ones(int mu) const {
  auto row = pattern(mu);
  return static_cast<int>(std::count(row.begin(), row.end(), std::uint8_t{1}));
}

namespace {

// Uniform k-subset of {0..n-1} via partial Fisher-Yates shuffle.
void fill_palm_row(std::uint8_t* row, int n, int k, SplitMix64& rng,
                   std::vector<int>& scratch) {
  scratch.resize(n);
  std::iota(scratch.begin(), scratch.end(), 0);
  for (int t = 0; t < k; ++t) {
    const int pick = t + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n - t)));
    std::swap(scratch[t], scratch[pick]);
    row[scratch[t]] = 1;
  }
}

}  // namespace

PatternSet gen_patterns(int n, int k, int M, Family family, std::uint64_t seed) {
  if (n < 1 || k < 1 || k > n) throw std::invalid_argument("gen_patterns: need 1 <= k <= n");
  if (M < 1) throw std::invalid_argument("gen_patterns: need M >= 1");

  PatternSet set;
  set.n = n;
  set.k = k;
  set.M = M;
  set.family = family;
  set.seed = seed;
  set.bits.assign(static_cast<std::size_t>(M) * n, 0);

  const double p = static_cast<double>(k) / static_cast<double>(n);
  std::vector<int> scratch;
  for (int mu = 0; mu < M; ++mu) {
    // One stream per pattern so a set is a prefix of any longer set with
    // the same seed.
    SplitMix64 rng(derive_stream(seed, StreamKind::pattern_row, static_cast<std::uint64_t>(mu)));
    std::uint8_t* row = set.bits.data() + static_cast<std::size_t>(mu) * n;
    if (family == Family::palm) {
      fill_palm_row(row, n, k, rng, scratch);
    } else {
      for (int i = 0; i < n; ++i) row[i] = rng.bernoulli(p) ? 1 : 0;
    }
  }
  return set;
}

void write_patterns(const PatternSet& set, std::ostream& out) {
  out << set.n << ' ' << set.k << ' ' << set.M << ' ' << to_string(set.family) << ' '
      << set.seed << '\n';
  for (int mu = 0; mu < set.M; ++mu) {
    auto row = set.pattern(mu);
    for (std::uint8_t b : row) out.put(b ? '1' : '0');
    out.put('\n');
  }
}

QuerySpec::QuerySpec(double lambda_, double kappa_, int n_, int k_)
    : lambda(lambda_), kappa(kappa_), n(n_), k(k_) {
  if (n < 1 || k < 1 || k > n) throw std::invalid_argument("QuerySpec: need 1 <= k <= n");
  if (lambda < 0.0 || lambda > 1.0) throw std::invalid_argument("QuerySpec: lambda outside [0,1]");
  if (kappa < 0.0 || p01() > 1.0)
    throw std::invalid_argument("QuerySpec: kappa outside [0,(n-k)/k]");
}

std::vector<std::uint8_t> make_query(std::span<const std::uint8_t> pattern,
                                     const QuerySpec& spec, Family family,
                                     std::uint64_t seed) {
  const int n = static_cast<int>(pattern.size());
  if (n != spec.n) throw std::invalid_argument("make_query: pattern length != spec.n");

  SplitMix64 rng(seed);
  std::vector<std::uint8_t> query(pattern.size(), 0);

  if (family == Family::willshaw) {
    const double keep_p = spec.lambda;
    const double add_p = spec.p01();
    for (int i = 0; i < n; ++i)
      query[i] = pattern[i] ? (rng.bernoulli(keep_p) ? 1 : 0) : (rng.bernoulli(add_p) ? 1 : 0);
    return query;
  }

  // Palm: exact counts of kept and added ones.
  std::vector<int> ones, zeros;
  ones.reserve(spec.k);
  for (int i = 0; i < n; ++i) (pattern[i] ? ones : zeros).push_back(i);
  const int keep = static_cast<int>(std::lround(spec.lambda * static_cast<double>(ones.size())));
  const int add = static_cast<int>(std::lround(spec.kappa * static_cast<double>(ones.size())));
  if (keep > static_cast<int>(ones.size()))
    throw std::invalid_argument("make_query: round(lambda*k) exceeds ones count");
  if (add > static_cast<int>(zeros.size()))
    throw std::invalid_argument("make_query: round(kappa*k) exceeds zeros count");

  auto pick = [&rng](std::vector<int>& idx, int count, std::vector<std::uint8_t>& out) {
    for (int t = 0; t < count; ++t) {
      const int j =
          t + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(idx.size() - t)));
      std::swap(idx[t], idx[j]);
      out[idx[t]] = 1;
    }
  };
  pick(ones, keep, query);
  pick(zeros, add, query);
  return query;
}

}  // namespace bam
