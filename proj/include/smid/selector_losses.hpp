#pragma once

// Loss terms that shape the soft-Boolean selectors and bound the
// rotational states.

#include <span>

#include "smid/geometry.hpp"

namespace smid {

/// ||w|| - pi above pi, zero otherwise.
double loss_rot(const TangentRotation& omega);

/// | ||b||_1 - 1 |^2
double loss_norm(std::span<const double> b);

/// L2 norm of the negative entries of b.
double loss_pos(std::span<const double> b);

/// | ||m_w||_2 - 1 |
double loss_vec(const Vec3& m_w);

/// Sample standard deviation (N - 1 denominator).
double sample_std(std::span<const double> b);

/// | std(b) - 1/sqrt(N) |. Requires N >= 2.
double loss_std(std::span<const double> b);

}  // namespace smid
