#include "embscore/transport.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include "embscore/error.h"

namespace embscore {

namespace {

// Minimum-cost assignment of every row of `cost` (n <= m) to a distinct
// column. Returns the column chosen for each row.
std::vector<std::size_t> Hungarian(const Matrix& cost) {
  const std::size_t n = cost.rows();
  const std::size_t m = cost.cols();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0), minv(m + 1);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  std::vector<char> used(m + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n);
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

// Best total similarity over the rows/columns not yet used, as a full
// matching of the smaller side.
double BestRemaining(const Matrix& sim, const std::vector<char>& row_used,
                     const std::vector<char>& col_used) {
  std::vector<std::size_t> rows, cols;
  for (std::size_t i = 0; i < sim.rows(); ++i) if (!row_used[i]) rows.push_back(i);
  for (std::size_t j = 0; j < sim.cols(); ++j) if (!col_used[j]) cols.push_back(j);
  if (rows.empty() || cols.empty()) return 0.0;
  const bool transpose = rows.size() > cols.size();
  const auto& a = transpose ? cols : rows;
  const auto& b = transpose ? rows : cols;
  Matrix cost(a.size(), b.size());
  for (std::size_t x = 0; x < a.size(); ++x) {
    for (std::size_t y = 0; y < b.size(); ++y) {
      cost(x, y) = transpose ? -sim(b[y], a[x]) : -sim(a[x], b[y]);
    }
  }
  const auto match = Hungarian(cost);
  double total = 0.0;
  for (std::size_t x = 0; x < a.size(); ++x) total -= cost(x, match[x]);
  return total;
}

}  // namespace

Assignment OptimalAssignment(const SimilarityMatrix& sim) {
  const Matrix& s = sim.values;
  if (s.empty()) throw Error(ErrorKind::kEmptyMatrix, "assignment on an empty matrix");
  const std::size_t k = s.rows();
  const std::size_t l = s.cols();
  const std::size_t size = std::min(k, l);

  std::vector<char> row_used(k, 0), col_used(l, 0);
  const double best = BestRemaining(s, row_used, col_used);
  const double tol = 1e-10 * (1.0 + std::fabs(best));

  // Walk pairs in lexicographic order and keep each one that still admits
  // an optimal completion; this yields the smallest optimal pair list.
  Assignment out;
  double fixed = 0.0;
  for (std::size_t i = 0; i < k && out.matching.size() < size; ++i) {
    for (std::size_t j = 0; j < l; ++j) {
      if (col_used[j]) continue;
      row_used[i] = col_used[j] = 1;
      const double total = fixed + s(i, j) + BestRemaining(s, row_used, col_used);
      if (total >= best - tol) {
        fixed += s(i, j);
        out.matching.emplace_back(i, j);
        break;
      }
      row_used[i] = col_used[j] = 0;
    }
  }
  for (const auto& [i, j] : out.matching) out.total += s(i, j);
  return out;
}

namespace {

// Rational p/q with |x - p/q| <= tol and the smallest denominator found by
// continued-fraction convergents. Returns q = 0 if none with q <= max_q.
std::pair<std::int64_t, std::int64_t> Rationalize(double x, double tol,
                                                  std::int64_t max_q) {
  std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double frac = x;
  for (int iter = 0; iter < 64; ++iter) {
    const double a_d = std::floor(frac);
    if (a_d > 1e15) break;
    const auto a = static_cast<std::int64_t>(a_d);
    const std::int64_t p2 = a * p1 + p0;
    const std::int64_t q2 = a * q1 + q0;
    if (q2 > max_q) break;
    if (std::fabs(x - static_cast<double>(p2) / static_cast<double>(q2)) <= tol) {
      return {p2, q2};
    }
    p0 = p1; q0 = q1; p1 = p2; q1 = q2;
    const double rem = frac - a_d;
    if (rem <= 0.0) break;
    frac = 1.0 / rem;
  }
  return {0, 0};
}

constexpr double kMassTolerance = 1e-9;
constexpr std::int64_t kMaxDenominator = 1'000'000'000'000LL;

// Converts both mass vectors to integers with the same total.
std::int64_t ScaleMasses(const std::vector<double>& a, const std::vector<double>& b,
                         std::vector<std::int64_t>& ia, std::vector<std::int64_t>& ib) {
  std::vector<std::pair<std::int64_t, std::int64_t>> ratios;
  std::int64_t denom = 1;
  bool exact = true;
  for (const auto* masses : {&a, &b}) {
    for (double m : *masses) {
      const auto r = Rationalize(m, kMassTolerance / 2, 1'000'000'000LL);
      if (r.second == 0) {
        exact = false;
        break;
      }
      const std::int64_t g = std::gcd(denom, r.second);
      if (denom / g > kMaxDenominator / r.second) {
        exact = false;
        break;
      }
      denom = denom / g * r.second;
      ratios.push_back(r);
    }
    if (!exact) break;
  }
  if (!exact) denom = 1'000'000'000LL;

  std::size_t idx = 0;
  const auto convert = [&](const std::vector<double>& masses,
                           std::vector<std::int64_t>& out) {
    out.resize(masses.size());
    std::int64_t sum = 0;
    for (std::size_t i = 0; i < masses.size(); ++i, ++idx) {
      out[i] = exact ? ratios[idx].first * (denom / ratios[idx].second)
                     : std::llround(masses[i] * static_cast<double>(denom));
      sum += out[i];
    }
    // Put any rounding residue on the heaviest entry.
    const auto heaviest = std::max_element(out.begin(), out.end()) - out.begin();
    out[heaviest] += denom - sum;
    if (out[heaviest] < 0) {
      throw Error(ErrorKind::kInfeasibleMasses, "mass quantization failed");
    }
  };
  convert(a, ia);
  convert(b, ib);
  return denom;
}

void CheckMasses(const std::vector<double>& masses, const char* side) {
  double sum = 0.0;
  for (double m : masses) {
    if (!std::isfinite(m) || m < 0.0) {
      throw Error(ErrorKind::kInfeasibleMasses,
                  std::string(side) + " masses must be finite and non-negative");
    }
    sum += m;
  }
  if (std::fabs(sum - 1.0) > kMassTolerance) {
    throw Error(ErrorKind::kInfeasibleMasses,
                std::string(side) + " masses sum to " + std::to_string(sum));
  }
}

}  // namespace

TransportPlan SolveTransport(const TransportProblem& problem) {
  const std::size_t k = problem.cost.rows();
  const std::size_t l = problem.cost.cols();
  if (k == 0 || l == 0) throw Error(ErrorKind::kEmptyMatrix, "empty transport problem");
  if (problem.ref_mass.size() != k || problem.cand_mass.size() != l) {
    throw Error(ErrorKind::kDimensionMismatch, "mass vectors do not match the cost matrix");
  }
  CheckMasses(problem.ref_mass, "reference");
  CheckMasses(problem.cand_mass, "candidate");

  std::vector<std::int64_t> supply, demand;
  const std::int64_t denom = ScaleMasses(problem.ref_mass, problem.cand_mass, supply, demand);

  // Successive shortest paths on the bipartite graph. Node ids: rows 0..k-1,
  // columns k..k+l-1, source k+l, sink k+l+1. Row->column arcs are
  // uncapacitated, so residual capacity on them is unbounded forward and
  // equal to the current flow backward.
  const std::size_t source = k + l;
  const std::size_t sink = k + l + 1;
  const std::size_t nodes = k + l + 2;
  std::vector<std::int64_t> flow(k * l, 0);
  std::vector<std::int64_t> supply_left = supply;
  std::vector<std::int64_t> demand_left = demand;
  const double inf = std::numeric_limits<double>::infinity();
  const auto arc_cost = [&](std::size_t i, std::size_t j) {
    return problem.cost(i, j);
  };

  // Reverse row->column arcs carry negative cost, so paths are found with
  // Bellman-Ford rounds; the residual graph never has a negative cycle
  // because every intermediate flow is cost-optimal for its value.
  std::int64_t shipped = 0;
  std::vector<double> dist(nodes);
  std::vector<std::size_t> parent(nodes);
  while (shipped < denom) {
    std::fill(dist.begin(), dist.end(), inf);
    dist[source] = 0.0;
    parent[source] = source;
    for (std::size_t round = 0; round < nodes; ++round) {
      bool changed = false;
      const auto relax = [&](std::size_t u, std::size_t w, double c) {
        if (dist[u] + c < dist[w] - 1e-15) {
          dist[w] = dist[u] + c;
          parent[w] = u;
          changed = true;
        }
      };
      for (std::size_t i = 0; i < k; ++i) {
        if (supply_left[i] > 0) relax(source, i, 0.0);
      }
      for (std::size_t i = 0; i < k; ++i) {
        if (dist[i] == inf) continue;
        for (std::size_t j = 0; j < l; ++j) relax(i, k + j, arc_cost(i, j));
      }
      for (std::size_t j = 0; j < l; ++j) {
        const std::size_t u = k + j;
        if (dist[u] == inf) continue;
        if (demand_left[j] > 0) relax(u, sink, 0.0);
        for (std::size_t i = 0; i < k; ++i) {
          if (flow[i * l + j] > 0) relax(u, i, -arc_cost(i, j));
        }
      }
      if (!changed) break;
    }
    if (dist[sink] == inf) {
      throw Error(ErrorKind::kInfeasibleMasses, "no augmenting path");
    }
    // Bottleneck along the path.
    std::int64_t push = denom - shipped;
    std::size_t w = sink;
    while (w != source) {
      const std::size_t u = parent[w];
      if (u == source) {
        push = std::min(push, supply_left[w]);
      } else if (w == sink) {
        push = std::min(push, demand_left[u - k]);
      } else if (u >= k && w < k) {
        push = std::min(push, flow[w * l + (u - k)]);
      }
      w = u;
    }
    w = sink;
    while (w != source) {
      const std::size_t u = parent[w];
      if (u == source) {
        supply_left[w] -= push;
      } else if (w == sink) {
        demand_left[u - k] -= push;
      } else if (u < k) {
        flow[u * l + (w - k)] += push;
      } else {
        flow[w * l + (u - k)] -= push;
      }
      w = u;
    }
    shipped += push;
  }

  TransportPlan plan{Matrix(k, l), 0.0};
  const double d = static_cast<double>(denom);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < l; ++j) {
      plan.flow(i, j) = static_cast<double>(flow[i * l + j]) / d;
      plan.objective += plan.flow(i, j) * problem.cost(i, j);
    }
  }
  return plan;
}

double BigramMass(double first, double second) { return first + second; }

namespace {

struct Units {
  Matrix vectors;
  std::vector<double> mass;
};

Units BuildUnits(const EmbeddedSentence& s, int order, const IdfTable* idf,
                 const FilterPolicy& filter) {
  std::vector<std::size_t> keep;
  for (std::size_t t = 0; t < s.tokens.size(); ++t) {
    if (!IsFiltered(s.tokens.pieces[t], filter)) keep.push_back(t);
  }
  if (keep.empty()) {
    throw Error(s.tokens.empty() ? ErrorKind::kEmptySentence : ErrorKind::kEmptyAfterFilter,
                "no tokens to transport");
  }
  if (keep.size() < static_cast<std::size_t>(order)) {
    throw Error(ErrorKind::kTooShortForOrder,
                std::to_string(keep.size()) + " tokens cannot form units of order " +
                    std::to_string(order));
  }
  const auto weight = [&](std::size_t t) {
    return idf ? idf->Weight(s.tokens.pieces[t]) : 1.0;
  };
  const std::size_t dim = s.matrix.dim();
  Units u;
  if (order == 1) {
    u.vectors = Matrix(keep.size(), dim);
    for (std::size_t x = 0; x < keep.size(); ++x) {
      const auto row = s.matrix.values.row(keep[x]);
      std::copy(row.begin(), row.end(), u.vectors.row(x).begin());
      u.mass.push_back(weight(keep[x]));
    }
  } else {
    EmbeddingMatrix means{Matrix(keep.size() - 1, dim), false};
    for (std::size_t x = 0; x + 1 < keep.size(); ++x) {
      const auto a = s.matrix.values.row(keep[x]);
      const auto b = s.matrix.values.row(keep[x + 1]);
      for (std::size_t d = 0; d < dim; ++d) means.values(x, d) = 0.5 * (a[d] + b[d]);
      u.mass.push_back(BigramMass(weight(keep[x]), weight(keep[x + 1])));
    }
    u.vectors = NormalizeRows(means).values;
  }
  double total = std::accumulate(u.mass.begin(), u.mass.end(), 0.0);
  if (!(total > 0.0)) {
    std::fill(u.mass.begin(), u.mass.end(), 1.0);
    total = static_cast<double>(u.mass.size());
  }
  for (double& m : u.mass) m /= total;
  return u;
}

}  // namespace

double WmdScore(const EmbeddedSentence& ref, const EmbeddedSentence& cand,
                int order, const std::optional<IdfPair>& idf,
                const FilterPolicy& filter) {
  if (order != 1 && order != 2) {
    throw Error(ErrorKind::kInvalidInput, "WMD order must be 1 or 2");
  }
  if (!ref.matrix.normalized || !cand.matrix.normalized) {
    throw Error(ErrorKind::kNotNormalized, "WMD needs normalized embeddings");
  }
  if (ref.matrix.dim() != cand.matrix.dim()) {
    throw Error(ErrorKind::kDimensionMismatch, "WMD embedding dims differ");
  }
  const Units r = BuildUnits(ref, order, idf ? idf->reference.get() : nullptr, filter);
  const Units c = BuildUnits(cand, order, idf ? idf->candidate.get() : nullptr, filter);
  TransportProblem problem{Matrix(r.mass.size(), c.mass.size()), r.mass, c.mass};
  for (std::size_t i = 0; i < r.mass.size(); ++i) {
    for (std::size_t j = 0; j < c.mass.size(); ++j) {
      const double cos = std::clamp(Dot(r.vectors.row(i), c.vectors.row(j)), -1.0, 1.0);
      problem.cost(i, j) = 1.0 - cos;
    }
  }
  return -SolveTransport(problem).objective;
}

}  // namespace embscore
