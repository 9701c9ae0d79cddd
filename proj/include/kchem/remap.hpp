#pragma once

#include <span>

namespace kchem {

//! Conservative periodic shift of cell masses by `shift` cells (positive
//! moves mass toward higher indices).  Each edge flux is read off a local
//! cubic primitive clipped to the upwind cell, so the result stays
//! nonnegative and the total is preserved to round-off.
void shift_periodic(std::span<const double> in, double shift, std::span<double> out);

struct RemapLoss {
  double low = 0.0;   //!< mass pushed below index 0
  double high = 0.0;  //!< mass pushed beyond the last cell
};

//! Conservative push-forward of cell masses under u -> slope * u + offset in
//! index coordinates (cell k spans [k, k+1]); requires 0 < slope <= 1.
//! `scratch` must hold in.size() + 1 values.
RemapLoss remap_affine(std::span<const double> in, double slope, double offset,
                       std::span<double> out, std::span<double> scratch);

}  // namespace kchem
