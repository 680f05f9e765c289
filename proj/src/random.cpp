#include "bcs/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace bcs {

std::uint64_t splitmix64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Index Rng::below(Index bound)
{
  if (bound <= 0) { throw std::invalid_argument("Rng::below: bound must be positive"); }
  auto const b = static_cast<std::uint64_t>(bound);
  // Rejection sampling removes modulo bias.
  std::uint64_t const limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % b;
  std::uint64_t r;
  do {
    r = engine_();
  } while (r >= limit);
  return static_cast<Index>(r % b);
}

double Rng::normal()
{
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  double const f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

Complex Rng::unit_phase()
{
  double const theta = 2.0 * std::numbers::pi * uniform();
  return {std::cos(theta), std::sin(theta)};
}

std::vector<Index> Rng::subset(Index n, Index k)
{
  if (k < 0 || k > n) { throw std::invalid_argument("Rng::subset: need 0 <= k <= n"); }
  // Partial Fisher-Yates over an index table.
  std::vector<Index> pool(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) { pool[static_cast<std::size_t>(i)] = i; }
  for (Index i = 0; i < k; ++i) {
    Index const j = i + below(n - i);
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  pool.resize(static_cast<std::size_t>(k));
  std::sort(pool.begin(), pool.end());
  return pool;
}

CVector Rng::unit_vector(Index dim)
{
  CVector v(dim);
  for (Index i = 0; i < dim; ++i) { v(i) = Complex(normal(), normal()); }
  double const nrm = v.norm();
  return nrm > 0 ? CVector(v / nrm) : v;
}

} // namespace bcs
