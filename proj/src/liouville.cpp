#include "lqg/liouville.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "lqg/gff.hpp"
#include "lqg/rng.hpp"

namespace lqg {

namespace {
constexpr double kPi = std::numbers::pi;

bool strip_end(const Insertion& ins, int sign) {
    return ins.at_infinity && ((sign > 0) == (ins.z.real() > 0));
}

// Green's function with |z - s| floored at rmin around the insertion
double green_floored(Domain d, Cpx z, Cpx s, double rmin) {
    double dist = std::abs(z - s);
    if (dist < rmin) {
        Cpx dir = dist > 1e-300 ? (z - s) / dist : Cpx(1, 0);
        z = s + rmin * dir;
        if (d == Domain::HalfPlane && z.imag() < 0) z = {z.real(), 0.0};
        if (d == Domain::Strip) {
            if (z.imag() < 0) z = {z.real(), 0.0};
            if (z.imag() > kPi) z = {z.real(), kPi};
        }
    }
    return green_function(d, z, s);
}
} // namespace

double delta_charge(double charge, double gamma) {
    double Q = gamma / 2 + 2 / gamma;
    return charge / 2 * (Q - charge / 2);
}

double LiouvilleSpec::theta() const {
    if (grid.domain == Domain::Plane) {
        double t = -2 * Q();
        for (const auto& ins : insertions) t += ins.charge;
        return t;
    }
    double t = -Q();
    for (const auto& ins : insertions)
        t += (ins.at_infinity || ins.boundary) ? ins.charge / 2 : ins.charge;
    return t;
}

void LiouvilleSpec::validate() const {
    if (!(gamma > 0 && gamma < 2))
        throw std::invalid_argument("liouville: gamma out of (0,2)");
    if (!(c_hi > c_lo)) throw std::invalid_argument("liouville: empty c window");
    Domain d = grid.domain;
    if (d == Domain::UnitDisk)
        throw std::invalid_argument("liouville: no disk-domain law defined");
    int n_inf = 0;
    for (const auto& ins : insertions) {
        if (ins.at_infinity) {
            ++n_inf;
            continue;
        }
        if (d == Domain::Plane) {
            if (ins.boundary)
                throw std::invalid_argument("liouville: plane law has bulk insertions only");
        } else if (ins.boundary) {
            bool on = (d == Domain::HalfPlane && std::fabs(ins.z.imag()) < 1e-12) ||
                      (d == Domain::Strip && (std::fabs(ins.z.imag()) < 1e-12 ||
                                              std::fabs(ins.z.imag() - kPi) < 1e-12));
            if (!on) throw std::invalid_argument("liouville: boundary insertion off the boundary");
        } else {
            if (d == Domain::HalfPlane && !(ins.z.imag() > 1e-12))
                throw std::invalid_argument("liouville: bulk insertion not interior");
            if (d == Domain::Strip &&
                !(ins.z.imag() > 1e-12 && ins.z.imag() < kPi - 1e-12))
                throw std::invalid_argument("liouville: bulk insertion not interior");
        }
    }
    if (d != Domain::Strip && n_inf > 1)
        throw std::invalid_argument("liouville: at most one insertion at infinity");
    for (std::size_t i = 0; i < insertions.size(); ++i)
        for (std::size_t j = i + 1; j < insertions.size(); ++j) {
            const auto &a = insertions[i], &b = insertions[j];
            if (a.at_infinity || b.at_infinity) {
                if (a.at_infinity && b.at_infinity &&
                    (d != Domain::Strip ||
                     (a.z.real() > 0) == (b.z.real() > 0)))
                    throw std::invalid_argument("liouville: coincident insertions at infinity");
                continue;
            }
            if (std::abs(a.z - b.z) < 1e-12)
                throw std::invalid_argument("liouville: coincident insertions");
        }
}

double log_insertion_constant(const LiouvilleSpec& spec) {
    spec.validate();
    const double gamma = spec.gamma, Q = spec.Q();
    const Domain d = spec.grid.domain;
    double logc = 0;

    if (d == Domain::HalfPlane) {
        double binf = 0;
        for (const auto& ins : spec.insertions)
            if (ins.at_infinity) binf = ins.charge;
        std::vector<const Insertion*> bulk, bdry;
        for (const auto& ins : spec.insertions) {
            if (ins.at_infinity) continue;
            (ins.boundary ? bdry : bulk).push_back(&ins);
        }
        for (auto* b : bulk)
            logc += -(b->charge * b->charge / 2) * std::log(2 * b->z.imag()) -
                    2 * b->charge * (Q - b->charge - binf / 2) * log_abs_plus(b->z);
        for (auto* s : bdry)
            logc += -s->charge * (Q - (s->charge + binf) / 2) * log_abs_plus(s->z);
        for (std::size_t i = 0; i < bulk.size(); ++i)
            for (std::size_t j = i + 1; j < bulk.size(); ++j)
                logc += bulk[i]->charge * bulk[j]->charge *
                        green_function(d, bulk[i]->z, bulk[j]->z);
        for (auto* b : bulk)
            for (auto* s : bdry)
                logc += b->charge * s->charge / 2 * green_function(d, b->z, s->z);
        for (std::size_t i = 0; i < bdry.size(); ++i)
            for (std::size_t j = i + 1; j < bdry.size(); ++j)
                logc += bdry[i]->charge * bdry[j]->charge / 4 *
                        green_function(d, bdry[i]->z, bdry[j]->z);
        return logc;
    }

    if (d == Domain::Plane) {
        double ainf = 0;
        std::vector<const Insertion*> bulk;
        for (const auto& ins : spec.insertions) {
            if (ins.at_infinity)
                ainf = ins.charge;
            else
                bulk.push_back(&ins);
        }
        for (auto* b : bulk)
            logc += -b->charge * (2 * Q - b->charge - ainf) * log_abs_plus(b->z);
        for (std::size_t i = 0; i < bulk.size(); ++i)
            for (std::size_t j = i + 1; j < bulk.size(); ++j)
                logc += bulk[i]->charge * bulk[j]->charge *
                        green_function(d, bulk[i]->z, bulk[j]->z);
        return logc;
    }

    // strip: (b+, +inf), (b-, -inf), optional one finite boundary insertion
    double bp = 0, bm = 0;
    const Insertion* fin = nullptr;
    for (const auto& ins : spec.insertions) {
        if (strip_end(ins, +1))
            bp = ins.charge;
        else if (strip_end(ins, -1))
            bm = ins.charge;
        else if (fin)
            throw std::invalid_argument("liouville: strip law holds one finite insertion");
        else
            fin = &ins;
    }
    if (fin) {
        double b3 = fin->charge, re = fin->z.real();
        logc += (-delta_charge(b3, gamma) + (bp + bm) * b3 / 4) * std::fabs(re) +
                (bp - bm) * b3 / 4 * re;
    }
    return logc;
}

double insertion_constant(const LiouvilleSpec& spec) {
    return std::exp(log_insertion_constant(spec));
}

double liouville_profile(const LiouvilleSpec& spec, Cpx p) {
    const Domain d = spec.grid.domain;
    const double Q = spec.Q();
    Cpx z = chart_to_domain(spec.grid, p);
    double rmin = 0.5 * std::min(spec.grid.hx(), spec.grid.hy()) *
                  std::exp(chart_log_deriv(spec.grid, p));
    double v = 0;

    if (d == Domain::HalfPlane) {
        double binf = 0;
        for (const auto& ins : spec.insertions)
            if (ins.at_infinity) binf = ins.charge;
        v += (binf - 2 * Q) * log_abs_plus(z);
        for (const auto& ins : spec.insertions) {
            if (ins.at_infinity) continue;
            double coef = ins.boundary ? ins.charge / 2 : ins.charge;
            v += coef * green_floored(d, z, ins.z, rmin);
        }
        return v;
    }
    if (d == Domain::Plane) {
        double ainf = 0;
        for (const auto& ins : spec.insertions)
            if (ins.at_infinity) ainf = ins.charge;
        v += (ainf - 2 * Q) * log_abs_plus(z);
        for (const auto& ins : spec.insertions) {
            if (ins.at_infinity) continue;
            v += ins.charge * green_floored(d, z, ins.z, rmin);
        }
        return v;
    }
    // strip
    double bp = 0, bm = 0;
    const Insertion* fin = nullptr;
    for (const auto& ins : spec.insertions) {
        if (strip_end(ins, +1)) bp = ins.charge;
        else if (strip_end(ins, -1)) bm = ins.charge;
        else fin = &ins;
    }
    double rmin_s = 0.5 * std::min(spec.grid.hx(), spec.grid.hy());
    v += (bp + bm - 2 * Q) / 2 * std::fabs(p.real()) +
         (bp - bm) / 2 * p.real();
    if (fin) v += fin->charge / 2 * green_floored(d, p, fin->z, rmin_s);
    return v;
}

FieldSample sample_liouville(const LiouvilleSpec& spec, std::uint64_t seed) {
    spec.validate();
    Normalization anchor = spec.grid.domain == Domain::Strip
                               ? Normalization::ZeroAvgVerticalLine0
                               : Normalization::ZeroAvgUnitSemicircle;
    FieldSample h = sample_free_gff(spec.grid, anchor, seed);
    Rng rng = make_stream(seed, "liouville", "cwindow");
    double c = rng.uniform(spec.c_lo, spec.c_hi);
    FieldSample phi = h;
    for (int j = 0; j < spec.grid.ny; ++j)
        for (int i = 0; i < spec.grid.nx; ++i)
            phi.at(i, j) += liouville_profile(spec, spec.grid.node(i, j)) + c;
    phi.norm = Normalization::None;
    phi.log_weight = log_insertion_constant(spec) + spec.theta() * c +
                     std::log(spec.c_hi - spec.c_lo);
    phi.seed = seed;
    return phi;
}

double covariance_factor(const ConformalMap& map,
                         const std::vector<Insertion>& insertions, double gamma) {
    double logf = 0;
    for (const auto& ins : insertions) {
        if (ins.at_infinity) continue;  // absorbed in the law's definition
        Cpx df = map.df(ins.z);
        double a = std::abs(df);
        if (!(a > 1e-300) || !std::isfinite(a))
            throw std::domain_error("covariance_factor: insertion at a pole of f'");
        Cpx img = map.f(ins.z);
        if (!std::isfinite(img.real()) || std::abs(img) > 1e12)
            throw std::domain_error("covariance_factor: insertion mapped to infinity");
        double delta = delta_charge(ins.charge, gamma);
        logf += (ins.boundary ? -delta : -2 * delta) * std::log(a);
    }
    return std::exp(logf);
}

namespace {
double bump(double x) {
    double t = x / 3.0;
    if (std::fabs(t) >= 1.0) return 0.0;
    double u = 1 - t * t;
    return u * u * u;
}

Insertion map_insertion(const Insertion& ins, const ConformalMap& map,
                        Domain target) {
    Insertion out = ins;
    if (ins.at_infinity) {
        // only the strip-to-H ends are supported: +inf -> infinity, -inf -> 0
        if (map.from == Domain::Strip && target == Domain::HalfPlane) {
            if (ins.z.real() > 0) {
                out.at_infinity = true;
                out.z = {1, 0};
            } else {
                out.at_infinity = false;
                out.z = {0, 0};
                out.boundary = true;
            }
            return out;
        }
        throw std::invalid_argument("map_insertion: unsupported infinity mapping");
    }
    out.z = map.f(ins.z);
    return out;
}
} // namespace

stats::Report check_conformal_covariance(const LiouvilleSpec& spec,
                                         const ConformalMap& map,
                                         const GridSpec& target_grid,
                                         double extra_log_factor, int n_samples,
                                         std::uint64_t seed) {
    LiouvilleSpec mapped = spec;
    mapped.grid = target_grid;
    mapped.insertions.clear();
    for (const auto& ins : spec.insertions)
        mapped.insertions.push_back(map_insertion(ins, map, target_grid.domain));

    double factor =
        covariance_factor(map, spec.insertions, spec.gamma) * std::exp(extra_log_factor);

    // bounded, c-localized probe functionals on the target grid
    Cpx ref{0.0, target_grid.bbox.y0 + 0.5 * (target_grid.bbox.y1 - target_grid.bbox.y0)};
    std::vector<Cpx> probes = {{-1.0, 1.2}, {0.7, 2.0}, {1.5, 1.0}, {-0.4, 1.6}};
    double eps = std::min(3.0 * std::max(target_grid.hx(), target_grid.hy()), 0.8);
    auto evaluate = [&](const FieldSample& f, std::vector<double>& out) {
        double a0 = circle_average(f, ref, eps);
        double b = bump(a0);
        out.push_back(b);
        for (Cpx p : probes) out.push_back(b * std::tanh(circle_average(f, p, eps) / 4));
    };

    std::size_t n_probe = probes.size() + 1;
    std::vector<std::vector<double>> fa(n_probe), fb(n_probe);
    for (int s = 0; s < n_samples; ++s) {
        FieldSample pa = sample_liouville(mapped, hash_name("cov-a") ^ (seed + s));
        std::vector<double> va;
        evaluate(pa, va);
        double wa = std::exp(pa.log_weight);
        for (std::size_t k = 0; k < n_probe; ++k) fa[k].push_back(wa * va[k]);

        FieldSample pb0 = sample_liouville(spec, hash_name("cov-b") ^ (seed + s));
        FieldSample pb = lqg_pushforward(pb0, map, spec.gamma, target_grid);
        std::vector<double> vb;
        evaluate(pb, vb);
        double wb = factor * std::exp(pb0.log_weight);
        for (std::size_t k = 0; k < n_probe; ++k) fb[k].push_back(wb * vb[k]);
    }

    stats::Report rep;
    rep.title = "conformal covariance";
    for (std::size_t k = 0; k < n_probe; ++k) {
        auto ma = stats::mean_se(fa[k]);
        auto mb = stats::mean_se(fb[k]);
        double se = std::hypot(ma.se, mb.se);
        rep.check_close("probe " + std::to_string(k), ma.mean - mb.mean, 0.0,
                        4 * se, n_samples);
    }
    return rep;
}

} // namespace lqg
