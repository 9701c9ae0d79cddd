#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace kchem {

//! Fixed summation tree: contiguous blocks summed left to right, then a
//! pairwise tree over block sums.  The result depends only on the input
//! order, never on how many threads computed the block sums.
inline constexpr std::size_t kReduceBlock = 256;

double pairwise_sum(std::span<const double> values);

template<class Term>
double reproducible_sum(std::size_t count, Term&& term)
{
  std::size_t const blocks = (count + kReduceBlock - 1) / kReduceBlock;
  std::vector<double> partial(blocks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(blocks); ++b)
  {
    std::size_t const begin = static_cast<std::size_t>(b) * kReduceBlock;
    std::size_t const end = begin + kReduceBlock < count ? begin + kReduceBlock : count;
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i)
      s += term(i);
    partial[static_cast<std::size_t>(b)] = s;
  }
  return pairwise_sum(partial);
}

inline double reproducible_sum(std::span<const double> values)
{
  return reproducible_sum(values.size(), [values](std::size_t i) { return values[i]; });
}

}  // namespace kchem
