#pragma once

#include <cstdint>

namespace nmrsq {

/// Driving-phase diffusion for the parametric pump. The drive phase performs
/// a Wiener process with <dphi^2> = 2 * diffusion_factor * D * dt.
struct NoiseModel {
  double D = 0.0;                 // angular linewidth (rad/s)
  double diffusion_factor = 1.0;  // c_D
  double beta = 1.0;              // drive amplitude
  double phi0 = 1.5707963267948966;
  int n_traj = 1;
  double dt = 1e-3;  // seconds (or scaled time units)
  std::uint64_t master_seed = 0;

  void validate() const;
};

}  // namespace nmrsq
