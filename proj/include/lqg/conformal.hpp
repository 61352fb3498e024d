#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "lqg/grid.hpp"

namespace lqg {

// log |z|_+ = log max(|z|, 1); infinity is never passed as a float, use the
// *_inf operation variants instead.
double log_abs_plus(Cpx z);

bool in_domain_closure(Domain d, Cpx z, double tol = 1e-9);

// ---------------------------------------------------------------------------
// Moebius maps z -> (az + b)/(cz + d)

struct MoebiusMap {
    Cpx a{1}, b{0}, c{0}, d{1};

    Cpx apply(Cpx z) const;
    Cpx apply_inf() const;              // image of the point at infinity
    Cpx deriv(Cpx z) const;             // (ad - bc)/(cz + d)^2
    MoebiusMap inverse() const;
    MoebiusMap compose(const MoebiusMap& inner) const;  // this(inner(z))
    double det_abs() const { return std::abs(a * d - b * c); }
    void validate() const;              // |ad - bc| > 1e-12
};

// A point constraint for moebius_fit; set inf=true for the point at infinity.
struct MPoint {
    Cpx z{0};
    bool inf = false;
};

struct MoebiusConstraint {
    MPoint from, to;
};

// Fits the unique Moebius isomorphism between the stated domains through the
// given constraints. Supported: three boundary pairs, or one interior pair
// plus one boundary pair. Throws on under/over-determined or degenerate data.
MoebiusMap moebius_fit(Domain from, Domain to,
                       const std::vector<MoebiusConstraint>& constraints);

// Canonical Cayley map f0 : H -> D, f0(i) = 0, f0(0) = 1
MoebiusMap cayley_map();

// ---------------------------------------------------------------------------
// Branch-cut argument

struct BranchCut {
    Cpx base{0};
    Cpx direction{0, 1};  // |direction| = 1
};

// Continuous argument of (z - base) on the complement of the cut ray, with a
// 2*pi jump across the cut. Normalized so the value on the ray opposite the
// cut equals the principal argument of that direction.
double branch_arg(Cpx z, const BranchCut& cut);

double dist_to_ray(Cpx z, const BranchCut& cut);

// ---------------------------------------------------------------------------
// Green's functions of the free-boundary GFF (paper normalization)

double green_function(Domain d, Cpx z, Cpx w);
// second argument at infinity (plane convention only)
double green_function_inf(Domain d, Cpx z);

// ---------------------------------------------------------------------------
// Conformal maps between reference domains, with enough structure for the
// two coordinate-change rules.

struct ConformalMap {
    Domain from = Domain::HalfPlane, to = Domain::HalfPlane;
    std::function<Cpx(Cpx)> f;      // domain coords -> domain coords
    std::function<Cpx(Cpx)> f_inv;
    std::function<Cpx(Cpx)> df;     // complex derivative of f

    Cpx dfinv(Cpx w) const { return 1.0 / df(f_inv(w)); }
};

ConformalMap conformal_from_moebius(Domain from, Domain to, const MoebiusMap& m);
ConformalMap conformal_identity(Domain d);
ConformalMap conformal_exp_strip_to_H();   // z -> e^z, S -> H
ConformalMap conformal_scale(Domain d, Cpx s);  // z -> s z

// LQG rule: h o f^{-1} + Q log |(f^{-1})'|, resampled on target_grid.
FieldSample lqg_pushforward(const FieldSample& field, const ConformalMap& map,
                            double gamma, const GridSpec& target_grid);

// Imaginary-geometry rule: h o f^{-1} - chi arg (f^{-1})', with the argument
// of the derivative taken through branch_arg against `cut` (a cut in the
// derivative's value plane; the paper only fixes cuts "e.g.", so it is a
// parameter here).
FieldSample ig_pushforward(const FieldSample& field, const ConformalMap& map,
                           double chi, const GridSpec& target_grid,
                           const BranchCut& cut = BranchCut{Cpx{0}, Cpx{-1, 0}});

// ---------------------------------------------------------------------------
// Discrete harmonic extension (damped SOR, deterministic sweep order).
// `boundary` holds Dirichlet data at boundary nodes of `grid` (interior
// entries ignored); sides listed in `neumann_sides` get zero discrete normal
// derivative instead. Throws if every side is Neumann or iterations exceed
// the cap before the residual drops below `tol`.
FieldSample harmonic_extension(const FieldSample& boundary, const GridSpec& grid,
                               const std::vector<Side>& neumann_sides = {},
                               double tol = 1e-8, int max_sweeps = 200000);

// max |5-point Laplacian| over interior nodes
double laplacian_residual(const FieldSample& f);

} // namespace lqg
