#include "embscore/stats.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "embscore/error.h"
#include "embscore/random.h"

namespace embscore {

namespace {

void CheckPaired(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorKind::kInvalidInput,
                "paired vectors differ in length (" + std::to_string(x.size()) +
                    " vs " + std::to_string(y.size()) + ")");
  }
  if (x.size() < 2) throw Error(ErrorKind::kInvalidInput, "need at least 2 pairs");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw Error(ErrorKind::kInvalidInput, "non-finite score at " + std::to_string(i));
    }
  }
}

std::uint64_t TiedPairs(const std::vector<double>& sorted) {
  std::uint64_t ties = 0;
  std::size_t run = 1;
  for (std::size_t i = 1; i <= sorted.size(); ++i) {
    if (i < sorted.size() && sorted[i] == sorted[i - 1]) {
      ++run;
    } else {
      ties += static_cast<std::uint64_t>(run) * (run - 1) / 2;
      run = 1;
    }
  }
  return ties;
}

// Sorts `v` ascending and returns the number of strict inversions removed.
std::uint64_t MergeSortInversions(std::vector<double>& v) {
  std::vector<double> buf(v.size());
  std::uint64_t swaps = 0;
  for (std::size_t width = 1; width < v.size(); width *= 2) {
    for (std::size_t lo = 0; lo < v.size(); lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, v.size());
      const std::size_t hi = std::min(lo + 2 * width, v.size());
      std::size_t a = lo, b = mid, out = lo;
      while (a < mid && b < hi) {
        if (v[b] < v[a]) {
          swaps += mid - a;
          buf[out++] = v[b++];
        } else {
          buf[out++] = v[a++];
        }
      }
      while (a < mid) buf[out++] = v[a++];
      while (b < hi) buf[out++] = v[b++];
    }
    std::swap(v, buf);
  }
  return swaps;
}

}  // namespace

double Pearson(std::span<const double> x, std::span<const double> y) {
  CheckPaired(x, y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw Error(ErrorKind::kZeroVariance, "correlation with a constant vector");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

KendallCounts CountKendallPairs(std::span<const double> x, std::span<const double> y) {
  CheckPaired(x, y);
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] != x[b] ? x[a] < x[b] : y[a] < y[b];
  });

  std::uint64_t ties_x = 0, ties_xy = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && x[order[j]] == x[order[i]]) ++j;
    const std::uint64_t run = j - i;
    ties_x += run * (run - 1) / 2;
    for (std::size_t a = i; a < j;) {
      std::size_t b = a + 1;
      while (b < j && y[order[b]] == y[order[a]]) ++b;
      const std::uint64_t r = b - a;
      ties_xy += r * (r - 1) / 2;
      a = b;
    }
    i = j;
  }

  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
  const std::uint64_t discordant = MergeSortInversions(ys);
  const std::uint64_t ties_y = TiedPairs(ys);

  const std::uint64_t total = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  KendallCounts c;
  c.discordant = discordant;
  c.tied_xy = ties_xy;
  c.tied_x = ties_x - ties_xy;
  c.tied_y = ties_y - ties_xy;
  c.concordant = total - ties_x - ties_y + ties_xy - discordant;
  return c;
}

double KendallTauB(const KendallCounts& c) {
  const double cd = static_cast<double>(c.concordant + c.discordant);
  const double den = std::sqrt((cd + static_cast<double>(c.tied_x)) *
                               (cd + static_cast<double>(c.tied_y)));
  if (den == 0.0) throw Error(ErrorKind::kAllTied, "every pair is tied");
  return (static_cast<double>(c.concordant) - static_cast<double>(c.discordant)) / den;
}

double Kendall(std::span<const double> x, std::span<const double> y) {
  return KendallTauB(CountKendallPairs(x, y));
}

double StudentTUpperTail(double t, double df) {
  boost::math::students_t dist(df);
  return boost::math::cdf(boost::math::complement(dist, t));
}

WilliamsResult WilliamsTest(double r12, double r13, double r23, std::size_t n) {
  if (n < 4) throw Error(ErrorKind::kDegenerateInput, "Williams test needs n >= 4");
  for (double r : {r12, r13, r23}) {
    if (!(std::fabs(r) <= 1.0)) {
      throw Error(ErrorKind::kDegenerateInput, "correlation outside [-1, 1]");
    }
  }
  const double k = 1.0 - r12 * r12 - r13 * r13 - r23 * r23 + 2.0 * r12 * r13 * r23;
  if (k <= 1e-12) {
    throw Error(ErrorKind::kDegenerateInput, "singular correlation matrix");
  }
  const double nd = static_cast<double>(n);
  const double rbar = 0.5 * (r12 + r13);
  const double num = (r12 - r13) * std::sqrt((nd - 1.0) * (1.0 + r23));
  const double den = std::sqrt(2.0 * k * (nd - 1.0) / (nd - 3.0) +
                               rbar * rbar * std::pow(1.0 - r23, 3));
  WilliamsResult res;
  res.t = num / den;
  res.df = n - 3;
  res.p = StudentTUpperTail(res.t, static_cast<double>(res.df));
  return res;
}

double BootstrapCompare(std::span<const double> metric_a,
                        std::span<const double> metric_b,
                        std::span<const double> human, std::size_t iterations,
                        std::uint64_t seed) {
  CheckPaired(metric_a, human);
  CheckPaired(metric_b, human);
  if (iterations == 0) throw Error(ErrorKind::kInvalidInput, "no bootstrap iterations");
  const std::size_t n = human.size();
  std::vector<double> a(n), b(n), h(n);
  double credit = 0.0;
  for (std::size_t it = 0; it < iterations; ++it) {
    CounterRng rng(seed, it);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t idx = rng.NextBelow(n);
      a[i] = metric_a[idx];
      b[i] = metric_b[idx];
      h[i] = human[idx];
    }
    try {
      const double ta = Kendall(a, h);
      const double tb = Kendall(b, h);
      if (ta < tb) {
        credit += 1.0;
      } else if (ta == tb) {
        credit += 0.5;
      }
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kAllTied) throw;
      credit += 0.5;
    }
  }
  return credit / static_cast<double>(iterations);
}

double RocAuc(const std::vector<bool>& labels, std::span<const double> scores) {
  if (labels.size() != scores.size()) {
    throw Error(ErrorKind::kInvalidInput, "labels and scores differ in length");
  }
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Twice the mid-rank keeps every quantity an integer.
  std::uint64_t pos = 0;
  std::uint64_t twice_rank_sum = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const std::uint64_t twice_mid = static_cast<std::uint64_t>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]]) {
        ++pos;
        twice_rank_sum += twice_mid;
      }
    }
    i = j;
  }
  const std::uint64_t neg = n - pos;
  if (pos == 0 || neg == 0) {
    throw Error(ErrorKind::kOneClassOnly, "AUC needs both positive and negative labels");
  }
  // U = R_pos - P(P+1)/2; doubled to stay integral.
  const std::uint64_t twice_u = twice_rank_sum - pos * (pos + 1);
  return static_cast<double>(twice_u) /
         (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

}  // namespace embscore
