#include "lqg/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lqg {

namespace {
constexpr double kPi = std::numbers::pi;

bool is_boundary_point(Domain d, const MPoint& p, double tol = 1e-9) {
    if (p.inf) return d == Domain::HalfPlane || d == Domain::Strip;
    switch (d) {
        case Domain::HalfPlane: return std::fabs(p.z.imag()) < tol;
        case Domain::UnitDisk: return std::fabs(std::abs(p.z) - 1.0) < tol;
        case Domain::Strip:
            return std::fabs(p.z.imag()) < tol || std::fabs(p.z.imag() - kPi) < tol;
        case Domain::Plane: return false;
    }
    return false;
}

bool is_interior_point(Domain d, const MPoint& p, double tol = 1e-9) {
    if (p.inf) return d == Domain::Plane;
    switch (d) {
        case Domain::HalfPlane: return p.z.imag() > tol;
        case Domain::UnitDisk: return std::abs(p.z) < 1.0 - tol;
        case Domain::Strip: return p.z.imag() > tol && p.z.imag() < kPi - tol;
        case Domain::Plane: return true;
    }
    return false;
}

// Moebius sending (z1, z2, z3) to (0, 1, infinity); any zi may be infinite.
MoebiusMap to_zero_one_inf(const MPoint& p1, const MPoint& p2, const MPoint& p3) {
    // m(z) = (z - z1)(z2 - z3) / ((z - z3)(z2 - z1))
    MoebiusMap m;
    if (p1.inf) {
        // (z2 - z3)/(z - z3)
        m.a = 0; m.b = p2.z - p3.z; m.c = 1; m.d = -p3.z;
    } else if (p2.inf) {
        // (z - z1)/(z - z3)
        m.a = 1; m.b = -p1.z; m.c = 1; m.d = -p3.z;
    } else if (p3.inf) {
        // (z - z1)/(z2 - z1)
        m.a = 1; m.b = -p1.z; m.c = 0; m.d = p2.z - p1.z;
    } else {
        m.a = p2.z - p3.z;
        m.b = -p1.z * (p2.z - p3.z);
        m.c = p2.z - p1.z;
        m.d = -p3.z * (p2.z - p1.z);
    }
    m.validate();
    return m;
}

Cpx sample_interior(Domain d) {
    switch (d) {
        case Domain::HalfPlane: return {0.137, 1.2};
        case Domain::UnitDisk: return {0.1, 0.2};
        case Domain::Strip: return {0.3, 1.1};
        case Domain::Plane: return {0.4, 0.7};
    }
    return {0, 1};
}
} // namespace

double log_abs_plus(Cpx z) {
    double r = std::abs(z);
    return r > 1.0 ? std::log(r) : 0.0;
}

bool in_domain_closure(Domain d, Cpx z, double tol) {
    switch (d) {
        case Domain::HalfPlane: return z.imag() >= -tol;
        case Domain::UnitDisk: return std::abs(z) <= 1.0 + tol;
        case Domain::Strip: return z.imag() >= -tol && z.imag() <= kPi + tol;
        case Domain::Plane: return true;
    }
    return false;
}

Cpx MoebiusMap::apply(Cpx z) const {
    Cpx den = c * z + d;
    if (std::abs(den) < 1e-300) return {std::numeric_limits<double>::infinity(), 0};
    return (a * z + b) / den;
}

Cpx MoebiusMap::apply_inf() const {
    if (std::abs(c) < 1e-300) return {std::numeric_limits<double>::infinity(), 0};
    return a / c;
}

Cpx MoebiusMap::deriv(Cpx z) const {
    Cpx den = c * z + d;
    return (a * d - b * c) / (den * den);
}

MoebiusMap MoebiusMap::inverse() const { return MoebiusMap{d, -b, -c, a}; }

MoebiusMap MoebiusMap::compose(const MoebiusMap& inner) const {
    return MoebiusMap{a * inner.a + b * inner.c, a * inner.b + b * inner.d,
                      c * inner.a + d * inner.c, c * inner.b + d * inner.d};
}

void MoebiusMap::validate() const {
    if (det_abs() < 1e-12) throw std::invalid_argument("degenerate Moebius map");
}

MoebiusMap cayley_map() {
    // (i - z)/(i + z)
    return MoebiusMap{Cpx(-1, 0), Cpx(0, 1), Cpx(1, 0), Cpx(0, 1)};
}

MoebiusMap moebius_fit(Domain from, Domain to,
                       const std::vector<MoebiusConstraint>& cs) {
    int dof = 3;
    int used = 0;
    int n_interior = 0;
    for (const auto& c : cs) {
        bool bi = is_boundary_point(from, c.from) && is_boundary_point(to, c.to);
        bool ii = is_interior_point(from, c.from) && is_interior_point(to, c.to);
        if (bi)
            used += 1;
        else if (ii) {
            used += 2;
            ++n_interior;
        } else {
            throw std::invalid_argument(
                "moebius_fit: constraint must pair boundary with boundary or "
                "interior with interior");
        }
    }
    if (used != dof)
        throw std::invalid_argument(used < dof ? "moebius_fit: under-determined"
                                               : "moebius_fit: over-determined");

    MoebiusMap result;
    if (n_interior == 0) {
        // three boundary pairs: cross-ratio construction
        for (std::size_t i = 0; i < cs.size(); ++i)
            for (std::size_t j = i + 1; j < cs.size(); ++j) {
                auto close = [](const MPoint& p, const MPoint& q) {
                    if (p.inf || q.inf) return p.inf && q.inf;
                    return std::abs(p.z - q.z) < 1e-12;
                };
                if (close(cs[i].from, cs[j].from) || close(cs[i].to, cs[j].to))
                    throw std::invalid_argument("moebius_fit: coincident constraint points");
            }
        MoebiusMap m1 = to_zero_one_inf(cs[0].from, cs[1].from, cs[2].from);
        MoebiusMap m2 = to_zero_one_inf(cs[0].to, cs[1].to, cs[2].to);
        result = m2.inverse().compose(m1);
    } else {
        // one interior pair plus one boundary pair
        const MoebiusConstraint* ic = nullptr;
        const MoebiusConstraint* bc = nullptr;
        for (const auto& c : cs) {
            if (is_interior_point(from, c.from))
                ic = &c;
            else
                bc = &c;
        }
        if (!ic || !bc || ic->from.inf || ic->to.inf)
            throw std::invalid_argument("moebius_fit: unsupported constraint combination");
        // reduce source and target to H
        MoebiusMap srcH;  // from -> H
        if (from == Domain::UnitDisk) srcH = cayley_map().inverse();
        else if (from == Domain::HalfPlane) srcH = MoebiusMap{};
        else throw std::invalid_argument("moebius_fit: interior fit needs H or D");
        MoebiusMap tgtH;  // to -> H
        if (to == Domain::UnitDisk) tgtH = cayley_map().inverse();
        else if (to == Domain::HalfPlane) tgtH = MoebiusMap{};
        else throw std::invalid_argument("moebius_fit: interior fit needs H or D");

        Cpx p = srcH.apply(ic->from.z);      // interior of H
        Cpx q = tgtH.apply(ic->to.z);        // interior of H
        // A: H -> H, p -> i:  z -> (z - Re p)/Im p
        MoebiusMap A{Cpx(1, 0), Cpx(-p.real(), 0), Cpx(0, 0), Cpx(p.imag(), 0)};
        MoebiusMap B{Cpx(1, 0), Cpx(-q.real(), 0), Cpx(0, 0), Cpx(q.imag(), 0)};
        // boundary constraint, in the A/B frames
        Cpx xb = bc->from.inf ? A.apply_inf() : A.apply(srcH.apply(bc->from.z));
        Cpx yb = bc->to.inf ? B.apply_inf() : B.apply(tgtH.apply(bc->to.z));
        // rotation about i sending xb -> yb:  r(z) = (cos t. z - sin t)/(sin t. z + cos t)
        // acts on the boundary by x -> (x cos t - sin t)/(x sin t + cos t)
        // boundary action of a rotation about i: tan(s) -> tan(s - t)
        double ax = std::isinf(xb.real()) ? kPi / 2 : std::atan(xb.real());
        double ay = std::isinf(yb.real()) ? kPi / 2 : std::atan(yb.real());
        double t = ax - ay;
        MoebiusMap R{Cpx(std::cos(t), 0), Cpx(-std::sin(t), 0),
                     Cpx(std::sin(t), 0), Cpx(std::cos(t), 0)};
        // total: tgtH^{-1} o B^{-1} o R o A o srcH
        result = tgtH.inverse().compose(B.inverse()).compose(R).compose(A).compose(srcH);
    }
    result.validate();

    // constraints satisfied to 1e-10 and domain mapped onto target
    for (const auto& c : cs) {
        Cpx img = c.from.inf ? result.apply_inf() : result.apply(c.from.z);
        if (c.to.inf) {
            if (std::isfinite(img.real()) && std::abs(img) < 1e8)
                throw std::runtime_error("moebius_fit: constraint check failed (expected infinity)");
        } else if (!(std::abs(img - c.to.z) < 1e-10 ||
                     (std::abs(c.to.z) > 1e8 && std::abs(img) > 1e8))) {
            throw std::runtime_error("moebius_fit: constraint check failed");
        }
    }
    Cpx probe = result.apply(sample_interior(from));
    if (!is_interior_point(to, MPoint{probe, false}, 1e-12))
        throw std::runtime_error("moebius_fit: map does not send domain onto target");
    return result;
}

double dist_to_ray(Cpx z, const BranchCut& cut) {
    Cpx r = (z - cut.base) * std::conj(cut.direction);
    if (r.real() >= 0) return std::fabs(r.imag());
    return std::abs(r);
}

double branch_arg(Cpx z, const BranchCut& cut) {
    if (dist_to_ray(z, cut) < 1e-12)
        throw std::domain_error("branch_arg: point on the cut");
    double phi_opp = std::arg(-cut.direction);
    Cpx w = (z - cut.base) * std::exp(Cpx(0, -phi_opp));
    return phi_opp + std::arg(w);
}

namespace {
double green_H(Cpx z, Cpx w) {
    return -std::log(std::abs(z - w)) - std::log(std::abs(z - std::conj(w))) +
           2.0 * log_abs_plus(z) + 2.0 * log_abs_plus(w);
}
} // namespace

double green_function(Domain d, Cpx z, Cpx w) {
    if (std::abs(z - w) < 1e-14)
        throw std::domain_error("green_function: coincident points");
    if (!in_domain_closure(d, z) || !in_domain_closure(d, w))
        throw std::domain_error("green_function: point outside domain");
    switch (d) {
        case Domain::HalfPlane: return green_H(z, w);
        case Domain::Strip: return green_H(std::exp(z), std::exp(w));
        case Domain::Plane:
            return -std::log(std::abs(z - w)) + log_abs_plus(z) + log_abs_plus(w);
        case Domain::UnitDisk: {
            MoebiusMap inv = cayley_map().inverse();
            return green_H(inv.apply(z), inv.apply(w));
        }
    }
    throw std::logic_error("unreachable");
}

double green_function_inf(Domain d, Cpx z) {
    if (d != Domain::Plane)
        throw std::domain_error("green_function_inf: only the plane convention admits infinity");
    return log_abs_plus(z);
}

ConformalMap conformal_from_moebius(Domain from, Domain to, const MoebiusMap& m) {
    ConformalMap c;
    c.from = from;
    c.to = to;
    c.f = [m](Cpx z) { return m.apply(z); };
    MoebiusMap mi = m.inverse();
    c.f_inv = [mi](Cpx w) { return mi.apply(w); };
    c.df = [m](Cpx z) { return m.deriv(z); };
    return c;
}

ConformalMap conformal_identity(Domain d) {
    ConformalMap c;
    c.from = c.to = d;
    c.f = [](Cpx z) { return z; };
    c.f_inv = [](Cpx z) { return z; };
    c.df = [](Cpx) { return Cpx(1, 0); };
    return c;
}

ConformalMap conformal_exp_strip_to_H() {
    ConformalMap c;
    c.from = Domain::Strip;
    c.to = Domain::HalfPlane;
    c.f = [](Cpx z) { return std::exp(z); };
    c.f_inv = [](Cpx w) { return std::log(w); };
    c.df = [](Cpx z) { return std::exp(z); };
    return c;
}

ConformalMap conformal_scale(Domain d, Cpx s) {
    ConformalMap c;
    c.from = c.to = d;
    c.f = [s](Cpx z) { return s * z; };
    c.f_inv = [s](Cpx w) { return w / s; };
    c.df = [s](Cpx) { return s; };
    return c;
}

namespace {
FieldSample pushforward_impl(const FieldSample& field, const ConformalMap& map,
                             const GridSpec& target, bool lqg_rule, double coef,
                             const BranchCut& cut) {
    if (map.from != field.grid.domain)
        throw std::invalid_argument("pushforward: map domain does not match field");
    if (map.to != target.domain)
        throw std::invalid_argument("pushforward: map range does not match target grid");
    FieldSample out;
    out.grid = target;
    out.values.resize(static_cast<size_t>(target.size()));
    out.log_weight = field.log_weight;
    out.seed = field.seed;
    for (int j = 0; j < target.ny; ++j)
        for (int i = 0; i < target.nx; ++i) {
            Cpx w = chart_to_domain(target, target.node(i, j));
            Cpx z = map.f_inv(w);
            Cpx p = chart_from_domain(field.grid, z);
            // absorb chart roundtrip rounding at the bbox edge
            const Rect& bb = field.grid.bbox;
            double tol = 1e-6 * std::min(field.grid.hx(), field.grid.hy());
            double px = std::clamp(p.real(), bb.x0, bb.x1);
            double py = field.grid.periodic_y ? p.imag()
                                              : std::clamp(p.imag(), bb.y0, bb.y1);
            if (std::abs(Cpx(px, py) - p) > tol)
                throw std::out_of_range("pushforward: target grid exceeds map image");
            p = {px, py};
            double v = field.interp(p);
            Cpx dinv = map.dfinv(w);
            if (lqg_rule)
                v += coef * std::log(std::abs(dinv));
            else
                v += coef * branch_arg(dinv, cut);  // -chi arg folded into coef sign
            out.at(i, j) = v;
        }
    return out;
}
} // namespace

FieldSample lqg_pushforward(const FieldSample& field, const ConformalMap& map,
                            double gamma, const GridSpec& target_grid) {
    if (!(gamma > 0.0 && gamma < 2.0))
        throw std::invalid_argument("lqg_pushforward: gamma must lie in (0,2)");
    double Q = gamma / 2.0 + 2.0 / gamma;
    return pushforward_impl(field, map, target_grid, true, Q, BranchCut{});
}

FieldSample ig_pushforward(const FieldSample& field, const ConformalMap& map,
                           double chi, const GridSpec& target_grid,
                           const BranchCut& cut) {
    // h o f^{-1} - chi arg f'(f^{-1}) = h o f^{-1} + chi arg (f^{-1})'
    return pushforward_impl(field, map, target_grid, false, chi, cut);
}

FieldSample harmonic_extension(const FieldSample& boundary, const GridSpec& grid,
                               const std::vector<Side>& neumann_sides,
                               double tol, int max_sweeps) {
    grid.validate();
    bool neu[4] = {false, false, false, false};
    for (Side s : neumann_sides) neu[s] = true;
    if (neu[0] && neu[1] && neu[2] && neu[3])
        throw std::invalid_argument("harmonic_extension: all sides Neumann");

    const int nx = grid.nx, ny = grid.ny;
    FieldSample u = boundary;
    u.grid = grid;
    if (u.values.size() != static_cast<size_t>(grid.size()))
        throw std::invalid_argument("harmonic_extension: boundary data size mismatch");

    double hx2 = grid.hx() * grid.hx(), hy2 = grid.hy() * grid.hy();
    double cx = 1.0 / hx2, cy = 1.0 / hy2;
    double diag = 2.0 * (cx + cy);
    double rho = 1.0 - kPi * kPi / 2.0 * (1.0 / (nx * nx) + 1.0 / (ny * ny));
    double omega = 2.0 / (1.0 + std::sqrt(1.0 - rho * rho));

    auto val = [&](int i, int j) -> double {
        // mirror across Neumann sides
        if (i < 0) i = 1;
        if (i > nx - 1) i = nx - 2;
        if (j < 0) j = 1;
        if (j > ny - 1) j = ny - 2;
        return u.at(i, j);
    };
    auto relax_node = [&](int i, int j) {
        double nb = cx * (val(i - 1, j) + val(i + 1, j)) +
                    cy * (val(i, j - 1) + val(i, j + 1));
        double nv = nb / diag;
        u.at(i, j) += omega * (nv - u.at(i, j));
    };
    auto is_free_node = [&](int i, int j) {
        bool interior = i > 0 && i < nx - 1 && j > 0 && j < ny - 1;
        if (interior) return true;
        // boundary node: free only if every side through it is Neumann
        if (j == 0 && !neu[SideBottom]) return false;
        if (j == ny - 1 && !neu[SideTop]) return false;
        if (i == 0 && !neu[SideLeft]) return false;
        if (i == nx - 1 && !neu[SideRight]) return false;
        return true;
    };

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double max_change = 0;
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                if (!is_free_node(i, j)) continue;
                double before = u.at(i, j);
                relax_node(i, j);
                max_change = std::max(max_change, std::fabs(u.at(i, j) - before));
            }
        if (max_change < tol * 1e-2) {
            double res = laplacian_residual(u);
            if (res < tol) return u;
        }
    }
    if (laplacian_residual(u) < tol) return u;
    throw std::runtime_error("harmonic_extension: solver did not converge");
}

double laplacian_residual(const FieldSample& f) {
    const GridSpec& g = f.grid;
    double hx2 = g.hx() * g.hx(), hy2 = g.hy() * g.hy();
    double worst = 0;
    for (int j = 1; j < g.ny - 1; ++j)
        for (int i = 1; i < g.nx - 1; ++i) {
            double lap = (f.at(i - 1, j) - 2 * f.at(i, j) + f.at(i + 1, j)) / hx2 +
                         (f.at(i, j - 1) - 2 * f.at(i, j) + f.at(i, j + 1)) / hy2;
            worst = std::max(worst, std::fabs(lap));
        }
    return worst;
}

} // namespace lqg
