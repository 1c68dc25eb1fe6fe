#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace embscore {

// Sample Pearson correlation. Throws ZeroVariance if either side is
// constant, InvalidInput on length mismatch or n < 2.
double Pearson(std::span<const double> x, std::span<const double> y);

// Pair counts behind Kendall's tau-b. Ties in both x and y are counted in
// neither tied_x nor tied_y.
struct KendallCounts {
  std::uint64_t concordant = 0;
  std::uint64_t discordant = 0;
  std::uint64_t tied_x = 0;  // tied in x only
  std::uint64_t tied_y = 0;  // tied in y only
  std::uint64_t tied_xy = 0;
};

// O(n log n) pair counting (merge-sort inversion counting).
KendallCounts CountKendallPairs(std::span<const double> x, std::span<const double> y);

// tau-b = (C - D) / sqrt((C + D + Tx)(C + D + Ty)); AllTied when the
// denominator is zero.
double KendallTauB(const KendallCounts& counts);
double Kendall(std::span<const double> x, std::span<const double> y);

struct WilliamsResult {
  double t = 0.0;
  double p = 0.5;  // one-sided, P(T >= t)
  std::size_t df = 0;
};

// Williams test for r12 > r13 where both correlations share variable 1 and
// r23 is the correlation between variables 2 and 3.
WilliamsResult WilliamsTest(double r12, double r13, double r23, std::size_t n);

// One-sided upper-tail probability of Student's t.
double StudentTUpperTail(double t, double df);

// Fraction of bootstrap resamples in which metric A's Kendall tau against
// human is not above metric B's (ties and degenerate resamples count 1/2).
// Resample i draws its indices from substream (seed, i).
double BootstrapCompare(std::span<const double> metric_a,
                        std::span<const double> metric_b,
                        std::span<const double> human, std::size_t iterations,
                        std::uint64_t seed);

// Rank-sum AUC with mid-ranks for ties.
double RocAuc(const std::vector<bool>& labels, std::span<const double> scores);

}  // namespace embscore
