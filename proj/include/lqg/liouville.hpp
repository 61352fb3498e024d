#pragma once

#include <cstdint>
#include <vector>

#include "lqg/conformal.hpp"
#include "lqg/grid.hpp"
#include "lqg/stats.hpp"

namespace lqg {

// A bulk (alpha) or boundary (beta) insertion. at_infinity marks the point
// at infinity; on the strip the sign of z.real() picks the +inf / -inf end.
struct Insertion {
    double charge = 0;
    Cpx z{0};
    bool boundary = true;
    bool at_infinity = false;
};

struct LiouvilleSpec {
    GridSpec grid;
    std::vector<Insertion> insertions;
    double gamma = 1.0;
    double c_lo = -7.0, c_hi = 7.0;

    double Q() const { return gamma / 2 + 2 / gamma; }
    // total charge exponent in the c-integral e^{theta c} dc
    double theta() const;
    void validate() const;
};

// conformal weight Delta_alpha = (alpha/2)(Q - alpha/2)
double delta_charge(double charge, double gamma);

// The insertion constant of the Liouville law (H with optional insertion at
// infinity, the strip three-point family, or the plane). Strictly positive.
double log_insertion_constant(const LiouvilleSpec& spec);
double insertion_constant(const LiouvilleSpec& spec);

// Deterministic profile added to the free-boundary GFF: -2Q log|z|_+ type
// terms plus charge * Green singularities, evaluated at internal node p
// (Green values floored at half a cell around each insertion).
double liouville_profile(const LiouvilleSpec& spec, Cpx p);

// Weighted sample of the Liouville field: phi = h + profile + c with c
// uniform on the window and log_weight = log C + theta c + log(width).
// Values are field values in domain coordinates at the grid nodes.
FieldSample sample_liouville(const LiouvilleSpec& spec, std::uint64_t seed);

// scalar of the conformal covariance rule: prod |f'(z_i)|^{-2 Delta} over
// bulk insertions times |f'(s_j)|^{-Delta} over boundary ones
double covariance_factor(const ConformalMap& map,
                         const std::vector<Insertion>& insertions, double gamma);

// Statistical test of conformal covariance: weighted expectations of bounded
// probe functionals under (a) the law with mapped insertions and (b)
// factor x pushforward. Probes are c-localized bumps times tanh'd circle
// averages so window truncation is negligible.
stats::Report check_conformal_covariance(const LiouvilleSpec& spec,
                                         const ConformalMap& map,
                                         const GridSpec& target_grid,
                                         double extra_log_factor, int n_samples,
                                         std::uint64_t seed);

} // namespace lqg
