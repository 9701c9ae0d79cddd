#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>

namespace kchem {

//! Cell-centred uniform grid on the periodic interval [0, length).
struct PeriodicGrid {
  std::size_t cells = 0;
  double length = 0.0;

  double spacing() const { return length / static_cast<double>(cells); }
  double center(std::size_t i) const { return (static_cast<double>(i) + 0.5) * spacing(); }

  //! Angular wavenumber of the signed discrete mode m.
  double wavenumber(double m) const { return 2.0 * std::numbers::pi * m / length; }

  //! Map x into [0, length).
  double wrap(double x) const
  {
    double r = std::fmod(x, length);
    if (r < 0.0)
      r += length;
    return r >= length ? 0.0 : r;
  }
};

//! Uniform cell grid on a bounded interval [lower, lower + cells * spacing).
struct IntervalGrid {
  double lower = 0.0;
  double spacing = 1.0;
  std::size_t cells = 0;

  double upper() const { return lower + spacing * static_cast<double>(cells); }
  double center(std::size_t i) const { return lower + (static_cast<double>(i) + 0.5) * spacing; }
};

}  // namespace kchem
