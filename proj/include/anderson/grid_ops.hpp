#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "anderson/grid.hpp"

namespace anderson {

/// Discrete forms on grid functions with Dirichlet exterior. The gradient
/// norm counts every face between a node and its neighbor (or the zero
/// exterior), so that h^d <(-Delta_h)v, v> = dirichlet_grad_sq(v) exactly.

double l2_norm_sq(const GridSpec& g, std::span<const double> v);
double l2_norm(const GridSpec& g, std::span<const double> v);

/// ||grad v||_2^2 by forward differences, Dirichlet exterior.
double dirichlet_grad_sq(const GridSpec& g, std::span<const double> v);

/// out = (-Delta_h v) with the (2d+1)-point stencil and zero exterior.
void neg_laplacian_apply(const GridSpec& g, std::span<const double> v, std::span<double> out);

/// Multilinear interpolation of node values at a point, with ghost zeros on
/// the boundary of Q_R (one spacing beyond the outermost nodes).
/// Returns false if x lies outside the closed box.
bool interpolate(const GridSpec& g, std::span<const double> values, std::span<const double> x,
                 double& out);

} // namespace anderson
