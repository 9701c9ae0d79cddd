#include <random>
#include <vector>

#include <omp.h>

#include "doctest.h"
#include "kchem/reduce.hpp"

using namespace kchem;

TEST_CASE("reproducible sums do not depend on the thread count")
{
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(100003);
  for (auto& x : v)
    x = u(rng) * std::pow(10.0, 8.0 * u(rng));
  int const saved = omp_get_max_threads();
  omp_set_num_threads(1);
  double const one = reproducible_sum(v);
  omp_set_num_threads(4);
  double const four = reproducible_sum(v);
  omp_set_num_threads(saved);
  CHECK(one == four);
  CHECK(pairwise_sum(std::vector<double>{}) == 0.0);
  CHECK(pairwise_sum(std::vector<double>{1.0, 2.0, 3.0}) == 6.0);
}
