#include "kchem/reduce.hpp"

namespace kchem {

double pairwise_sum(std::span<const double> values)
{
  if (values.empty())
    return 0.0;
  if (values.size() <= 8)
  {
    double s = 0.0;
    for (double v : values)
      s += v;
    return s;
  }
  std::size_t const half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace kchem
