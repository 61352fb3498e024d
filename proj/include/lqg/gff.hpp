#pragma once

#include <cstdint>

#include "lqg/grid.hpp"

namespace lqg {

// Samplers for the Gaussian free field in the (2 pi)^{-1} Dirichlet-energy
// convention: the discrete covariance is 2 pi K^{-1} where K is the
// finite-difference stiffness matrix of the grid. Sampling goes through the
// separable eigenbasis of K, O(n log n)-ish via two small matrix products.

FieldSample sample_dirichlet_gff(const GridSpec& grid, std::uint64_t seed);

// Free boundary on every side; the zero mode is dropped and the declared
// anchor average is subtracted exactly.
FieldSample sample_free_gff(const GridSpec& grid, Normalization anchor,
                            std::uint64_t seed);

// Per-side Dirichlet/Free flags; at least one Dirichlet side.
FieldSample sample_mixed_gff(const GridSpec& grid, std::uint64_t seed);

// Index rectangle describing an open subregion U of the grid (interior node
// range, boundary of U resolved on the grid).
struct SubRegion {
    int i0, i1, j0, j1;  // U = nodes with i0 < i < i1, j0 < j < j1
    bool contains(int i, int j) const { return i > i0 && i < i1 && j > j0 && j < j1; }
};

struct MarkovSplit {
    FieldSample h1;  // zero outside U, GFF law inside
    FieldSample h2;  // harmonic inside U, equals the parent outside
};

MarkovSplit markov_decompose(const FieldSample& field, const SubRegion& U);

// Strip decomposition: h1 constant on vertical lines (column averages),
// h2 the lateral remainder with zero column means.
void radial_lateral_decompose(const FieldSample& field, FieldSample& h1,
                              FieldSample& h2);

// Trapezoidal average over the circle of radius eps about p (internal
// coordinates), >= 64 arc samples, bilinear interpolation; reduces to a half
// circle when p lies on a horizontal boundary. Throws when the arc leaves
// the grid.
double circle_average(const FieldSample& field, Cpx p, double eps,
                      int min_samples = 64);

} // namespace lqg
