#include "lqg/sle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "lqg/rng.hpp"

namespace lqg {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double a) {
    while (a <= 0) a += kTwoPi;
    while (a > kTwoPi) a -= kTwoPi;
    return a;
}
} // namespace

std::string stop_tag(StopReason s) {
    switch (s) {
        case StopReason::Horizon: return "horizon";
        case StopReason::ContinuationThreshold: return "continuation_threshold";
        case StopReason::TargetDisconnected: return "target_disconnected";
        case StopReason::ForcePointCollision: return "force_point_collision";
    }
    return "?";
}

bool continuation_threshold(const std::vector<ForceState>& state) {
    double left = 0, right = 0;
    for (const auto& f : state) {
        if (!f.collided) continue;
        if (f.side < 0) left += f.rho;
        else right += f.rho;
    }
    return left <= -2.0 || right <= -2.0;
}

// ---------------------------------------------------------------------------
// chordal engine

DrivingRecord drive_chordal(const SleParams& params) {
    if (!(params.dt > 0)) throw std::invalid_argument("drive_chordal: dt must be positive");
    const double kap = params.kappa, dt = params.dt;
    const std::size_t nf = params.forces.size();

    double W = 0;
    std::vector<double> V(nf);
    std::vector<int> side(nf);
    for (std::size_t j = 0; j < nf; ++j) {
        const ForcePoint& f = params.forces[j];
        if (f.side != 0) {
            V[j] = 0.0;
            side[j] = f.side;
        } else {
            if (std::fabs(f.pos) < 1e-14)
                throw std::invalid_argument(
                    "drive_chordal: zero-position force point needs a side flag");
            V[j] = f.pos;
            side[j] = f.pos < 0 ? -1 : +1;
        }
    }

    DrivingRecord rec;
    rec.engine = Engine::Chordal;
    rec.params = params;
    rec.force_tracks.resize(nf);
    Rng rng = make_stream(params.seed, "sle", "chordal");

    double ctol = std::sqrt(kap * dt);
    auto collided_states = [&]() {
        std::vector<ForceState> st(nf);
        for (std::size_t j = 0; j < nf; ++j)
            st[j] = ForceState{params.forces[j].rho, side[j],
                               std::fabs(W - V[j]) < ctol};
        return st;
    };

    double bsum = 0;
    auto record = [&](double tcur) {
        rec.t.push_back(tcur);
        rec.w.push_back(W);
        rec.brown.push_back(bsum);
        for (std::size_t j = 0; j < nf; ++j) rec.force_tracks[j].push_back(V[j]);
    };
    record(0.0);
    if (continuation_threshold(collided_states())) {
        rec.stop = StopReason::ContinuationThreshold;
        return rec;
    }

    auto substep = [&](double h) {
        double drift = 0;
        double floor_gap = 0.05 * std::sqrt(kap * h);
        for (std::size_t j = 0; j < nf; ++j) {
            double gap = W - V[j];
            double ag = std::max(std::fabs(gap), floor_gap);
            drift += params.forces[j].rho / (gap >= 0 ? ag : -ag);
        }
        double db = params.noise_off ? 0.0 : std::sqrt(kap * h) * rng.gauss();
        bsum += db / std::sqrt(kap);
        double W_old = W;
        W = W + drift * h + db;
        double max_left = -1e300, min_right = 1e300;
        for (std::size_t j = 0; j < nf; ++j) {
            double g2 = (V[j] - W_old) * (V[j] - W_old) + 4 * h;
            V[j] = W_old + side[j] * std::sqrt(g2);
            if (side[j] < 0) max_left = std::max(max_left, V[j]);
            else min_right = std::min(min_right, V[j]);
        }
        if (W < max_left) W = 2 * max_left - W;  // reflected gap
        if (W > min_right) W = 2 * min_right - W;
        if (W < max_left) W = 0.5 * (max_left + min_right);  // squeezed
    };

    std::size_t nsteps = static_cast<std::size_t>(std::ceil(params.horizon / dt));
    for (std::size_t k = 1; k <= nsteps; ++k) {
        double tcur = std::min(params.horizon, k * dt);
        double remaining = tcur - rec.t.back();
        while (remaining > 1e-15) {
            double min_gap = 1e300;
            for (std::size_t j = 0; j < nf; ++j)
                min_gap = std::min(min_gap, std::fabs(W - V[j]));
            double h = remaining;
            while (h > dt / 1024.0 && min_gap < 10.0 * std::sqrt(kap * h)) h /= 2;
            substep(h);
            remaining -= h;
        }
        record(tcur);
        if (continuation_threshold(collided_states())) {
            rec.stop = StopReason::ContinuationThreshold;
            return rec;
        }
    }
    rec.stop = StopReason::Horizon;
    return rec;
}

// ---------------------------------------------------------------------------
// radial engine, angle coordinates: the driving is theta with U = e^{i theta};
// force points are tracked through their counterclockwise gaps phi in (0, 2pi)

namespace {
// exact constant-driving force flow: cos(phi/2) decays at rate 1/2
double radial_force_step(double phi, double h) {
    double c = std::cos(phi / 2) * std::exp(-h / 2);
    c = std::clamp(c, -1.0, 1.0);
    return 2.0 * std::acos(c);
}

double bounce_gap(double phi) {
    if (phi < 0) return -phi;
    if (phi > kTwoPi) return 2 * kTwoPi - phi;
    return phi;
}
} // namespace

DrivingRecord drive_radial(const SleParams& params) {
    if (!(params.dt > 0)) throw std::invalid_argument("drive_radial: dt must be positive");
    const double kap = params.kappa, dt = params.dt;
    const std::size_t nf = params.forces.size();

    double theta = params.seed_angle;
    std::vector<double> phi(nf), rho(nf);
    std::vector<int> side(nf);
    for (std::size_t j = 0; j < nf; ++j) {
        const ForcePoint& f = params.forces[j];
        rho[j] = f.rho;
        if (f.side != 0) {
            phi[j] = f.side > 0 ? 1e-12 : kTwoPi - 1e-12;
            side[j] = f.side;
        } else {
            phi[j] = wrap_angle(f.pos - params.seed_angle);
            side[j] = phi[j] <= kPi ? +1 : -1;
        }
    }
    double target_phi = params.track_target
                            ? wrap_angle(params.target_angle - params.seed_angle)
                            : 0;

    DrivingRecord rec;
    rec.engine = Engine::Radial;
    rec.params = params;
    rec.force_tracks.resize(nf);
    Rng rng = make_stream(params.seed, "sle", "radial");

    double ctol_angle = std::sqrt(kap * dt);
    auto collided_states = [&]() {
        std::vector<ForceState> s(nf);
        for (std::size_t j = 0; j < nf; ++j) {
            double gap = std::min(phi[j], kTwoPi - phi[j]);
            s[j] = ForceState{rho[j], side[j], gap < ctol_angle};
        }
        return s;
    };

    double bsum = 0;
    auto record = [&](double tcur) {
        rec.t.push_back(tcur);
        rec.w.push_back(theta);
        rec.brown.push_back(bsum);
        for (std::size_t j = 0; j < nf; ++j)
            rec.force_tracks[j].push_back(theta + phi[j]);
    };
    record(0.0);
    if (continuation_threshold(collided_states())) {
        rec.stop = StopReason::ContinuationThreshold;
        return rec;
    }

    auto substep = [&](double h) {
        double drift = kap * params.mu;
        double floor_gap = 0.05 * std::sqrt(kap * h);
        for (std::size_t j = 0; j < nf; ++j) {
            double ph = std::clamp(phi[j], floor_gap, kTwoPi - floor_gap);
            drift += -(rho[j] / 2) * (std::cos(ph / 2) / std::sin(ph / 2));
        }
        double db = params.noise_off ? 0.0 : std::sqrt(kap * h) * rng.gauss();
        bsum += db / std::sqrt(kap);
        double dtheta = drift * h + db;
        theta += dtheta;
        for (std::size_t j = 0; j < nf; ++j)
            phi[j] = radial_force_step(bounce_gap(phi[j] - dtheta), h);
        if (params.track_target)
            target_phi = radial_force_step(bounce_gap(target_phi - dtheta), h);
    };

    std::size_t nsteps = static_cast<std::size_t>(std::ceil(params.horizon / dt));
    for (std::size_t k = 1; k <= nsteps; ++k) {
        double tcur = std::min(params.horizon, k * dt);
        double remaining = tcur - rec.t.back();
        while (remaining > 1e-15) {
            double min_gap = kTwoPi;
            for (double ph : phi)
                min_gap = std::min(min_gap, std::min(ph, kTwoPi - ph));
            double h = remaining;
            while (h > dt / 1024.0 && min_gap < 10.0 * std::sqrt(kap * h)) h /= 2;
            substep(h);
            remaining -= h;
        }
        record(tcur);
        if (continuation_threshold(collided_states())) {
            rec.stop = StopReason::ContinuationThreshold;
            return rec;
        }
        if (params.track_target &&
            std::min(target_phi, kTwoPi - target_phi) < kTwoPi * 1e-6) {
            rec.stop = StopReason::TargetDisconnected;
            return rec;
        }
    }
    rec.stop = StopReason::Horizon;
    return rec;
}

DrivingRecord drive_whole_plane(double kappa, double mu, double rho,
                                double burn_in, double horizon, double dt,
                                std::uint64_t seed) {
    if (!(rho > -2)) throw std::invalid_argument("drive_whole_plane: rho must exceed -2");
    if (!(burn_in > 0))
        throw std::invalid_argument("drive_whole_plane: burn-in must be positive");

    DrivingRecord rec;
    rec.engine = Engine::WholePlane;
    rec.params.kappa = kappa;
    rec.params.mu = mu;
    rec.params.forces = {ForcePoint{rho, 0, 0}};
    rec.params.horizon = horizon;
    rec.params.dt = dt;
    rec.params.seed = seed;
    rec.force_tracks.resize(1);
    // crude mixing-time gauge for the (U, O) pair; warning, not abort
    if (burn_in < 5.0) rec.note = "warning: burn-in below five mixing times";

    Rng rng = make_stream(seed, "sle", "whole-plane");
    double theta = 0, phi = kPi;  // deterministic start at time -burn_in
    double bsum = 0;
    auto substep = [&](double h) {
        double floor_gap = 0.05 * std::sqrt(kappa * h);
        double ph = std::clamp(phi, floor_gap, kTwoPi - floor_gap);
        double drift = kappa * mu - (rho / 2) * (std::cos(ph / 2) / std::sin(ph / 2));
        double db = std::sqrt(kappa * h) * rng.gauss();
        bsum += db / std::sqrt(kappa);
        double dtheta = drift * h + db;
        theta += dtheta;
        phi = radial_force_step(bounce_gap(phi - dtheta), h);
    };
    auto advance = [&](double span) {
        double remaining = span;
        while (remaining > 1e-15) {
            double min_gap = std::min(phi, kTwoPi - phi);
            double h = std::min(remaining, dt);
            while (h > dt / 1024.0 && min_gap < 10.0 * std::sqrt(kappa * h)) h /= 2;
            substep(h);
            remaining -= h;
        }
    };

    advance(burn_in);
    bsum = 0;  // Brownian path reported from time 0
    double tcur = 0;
    auto record = [&]() {
        rec.t.push_back(tcur);
        rec.w.push_back(theta);
        rec.brown.push_back(bsum);
        rec.force_tracks[0].push_back(theta + phi);
    };
    record();
    std::size_t nsteps = static_cast<std::size_t>(std::ceil(horizon / dt));
    for (std::size_t k = 1; k <= nsteps; ++k) {
        double tnext = std::min(horizon, k * dt);
        advance(tnext - tcur);
        tcur = tnext;
        record();
    }
    rec.stop = StopReason::Horizon;
    return rec;
}

DrivingRecord drive_reverse_chordal(double kappa,
                                    const std::vector<ForcePoint>& forces,
                                    ReverseStop stop_rule, double horizon,
                                    double dt, std::uint64_t seed) {
    DrivingRecord rec;
    rec.engine = Engine::ReverseChordal;
    rec.params.kappa = kappa;
    rec.params.forces = forces;
    rec.params.horizon = horizon;
    rec.params.dt = dt;
    rec.params.seed = seed;
    const std::size_t nf = forces.size();
    rec.force_tracks.resize(nf);

    double W = 0;
    std::vector<double> V(nf);
    for (std::size_t j = 0; j < nf; ++j) V[j] = forces[j].pos;

    Rng rng = make_stream(seed, "sle", "reverse");
    double bsum = 0;
    bool collided = false;

    auto record = [&](double tcur) {
        rec.t.push_back(tcur);
        rec.w.push_back(W);
        rec.brown.push_back(bsum);
        for (std::size_t j = 0; j < nf; ++j) rec.force_tracks[j].push_back(V[j]);
    };
    record(0.0);

    std::size_t nsteps = static_cast<std::size_t>(std::ceil(horizon / dt));
    for (std::size_t k = 1; k <= nsteps; ++k) {
        double tcur = std::min(horizon, k * dt);
        double remaining = tcur - rec.t.back();
        while (remaining > 1e-15) {
            double min_gap2 = 1e300;
            for (std::size_t j = 0; j < nf; ++j)
                min_gap2 = std::min(min_gap2, (V[j] - W) * (V[j] - W));
            double h = remaining;
            while (h > dt / 1024.0 && min_gap2 < 40.0 * h) h /= 2;

            double drift = 0;
            double floor_gap = 0.05 * std::sqrt(std::max(kappa, 4.0) * h);
            for (std::size_t j = 0; j < nf; ++j) {
                double gap = W - V[j];
                double ag = std::max(std::fabs(gap), floor_gap);
                drift += forces[j].rho / (gap >= 0 ? ag : -ag);
            }
            double db = std::sqrt(kappa * h) * rng.gauss();
            bsum += db / std::sqrt(kappa);
            double W_old = W;
            W += drift * h + db;
            for (std::size_t j = 0; j < nf; ++j) {
                // the reverse flow pulls boundary points toward the driving
                double g2 = (V[j] - W_old) * (V[j] - W_old) - 4 * h;
                if (g2 <= 0) {
                    V[j] = W;
                    collided = true;
                } else {
                    V[j] = W_old + (V[j] > W_old ? 1 : -1) * std::sqrt(g2);
                    if ((V[j] > W) != (V[j] > W_old)) collided = true;
                }
            }
            remaining -= h;
            if (collided && stop_rule == ReverseStop::ForcePointCollision) break;
            collided = false;
        }
        record(tcur);
        if (collided && stop_rule == ReverseStop::ForcePointCollision) {
            rec.stop = StopReason::ForcePointCollision;
            return rec;
        }
    }
    rec.stop = StopReason::Horizon;
    return rec;
}

// ---------------------------------------------------------------------------
// elementary slit maps

TiltedSlit TiltedSlit::from_increment(double base, double dw, double dtime) {
    TiltedSlit s;
    s.base = base;
    if (dtime <= 0) {
        s.alpha = 0.5;
        s.p = s.q = 0;
        return s;
    }
    double r = dw / (2 * std::sqrt(dtime));
    double alpha = 0.5 * (1.0 - r / std::sqrt(r * r + 4.0));
    double len = 2 * std::sqrt(dtime * (r * r + 4.0));
    s.alpha = alpha;
    s.p = alpha * len;
    s.q = (1 - alpha) * len;
    return s;
}

Cpx TiltedSlit::tip() const {
    double len = p + q;
    if (len <= 0) return {base, 0};
    double mod = len * std::pow(1 - alpha, 1 - alpha) * std::pow(alpha, alpha);
    return base + mod * std::exp(Cpx(0, kPi * alpha));
}

Cpx TiltedSlit::forward(Cpx z) const {
    if (p + q <= 0) return z;
    Cpx zeta = z - base;
    Cpx e = std::exp((1 - alpha) * std::log(zeta + p) + alpha * std::log(zeta - q));
    return base + e;
}

Cpx TiltedSlit::inverse(Cpx w) const {
    if (p + q <= 0) return w;
    Cpx omega = w - base;
    double dtime = alpha * (1 - alpha) * (p + q) * (p + q) / 4.0;
    // seed from the matched-capacity vertical slit
    Cpx seed2 = omega * omega + 4.0 * dtime;
    Cpx zeta = std::sqrt(seed2);
    if ((omega.real() < 0) != (zeta.real() < 0)) zeta = -zeta;
    if (zeta.imag() < 0) zeta = std::conj(zeta);
    Cpx target = std::log(omega);
    for (int it = 0; it < 60; ++it) {
        Cpx f = (1 - alpha) * std::log(zeta + p) + alpha * std::log(zeta - q) - target;
        Cpx fp = (1 - alpha) / (zeta + p) + alpha / (zeta - q);
        Cpx step = f / fp;
        zeta -= step;
        if (zeta.imag() < 0) zeta = {zeta.real(), 1e-14};
        if (std::abs(step) < 1e-13 * (1.0 + std::abs(zeta))) break;
    }
    return base + zeta;
}

namespace {
inline Cpx radial_m(Cpx w) {
    Cpx d = 1.0 + w;
    return w / (d * d);
}

// roots of xi r^2 - (1 - 2 xi) r + xi = 0 multiply to one; return the root in
// the closed disk, breaking boundary ties by proximity to `near`
Cpx radial_root(Cpx xi, Cpx near) {
    if (std::abs(xi) < 1e-150) return xi;
    Cpx disc = std::sqrt(1.0 - 4.0 * xi);
    Cpx num = 1.0 - 2.0 * xi;
    Cpx big = (std::abs(num + disc) >= std::abs(num - disc)) ? (num + disc)
                                                             : (num - disc);
    Cpx rp = big / (2.0 * xi);
    Cpx rm = 1.0 / rp;
    double ap = std::abs(rp), am = std::abs(rm);
    if (ap <= 1.0 + 1e-9 && am <= 1.0 + 1e-9)
        return std::abs(rp - near) <= std::abs(rm - near) ? rp : rm;
    return am <= ap ? rm : rp;
}
} // namespace

Cpx RadialSlit::zip(Cpx z) const {
    Cpx rot = std::exp(Cpx(0, -psi));
    Cpx w = z * rot;
    Cpx xi = std::exp(dtime) * radial_m(w);
    return radial_root(xi, w) / rot;
}

Cpx RadialSlit::unzip(Cpx w) const {
    Cpx rot = std::exp(Cpx(0, -psi));
    Cpx wp = w * rot;
    Cpx xi = std::exp(-dtime) * radial_m(wp);
    return radial_root(xi, wp) / rot;
}

Cpx RadialSlit::tip() const {
    double xi0 = std::exp(-dtime) / 4.0;
    double disc = std::sqrt(std::max(0.0, 1.0 - 4.0 * xi0));
    double w = (1.0 - 2.0 * xi0 - disc) / (2.0 * xi0);
    return w * std::exp(Cpx(0, psi));
}

// ---------------------------------------------------------------------------
// tracing

CurveTrace trace(const DrivingRecord& rec, const TraceOptions& opt) {
    CurveTrace c;
    if (rec.engine == Engine::Chordal || rec.engine == Engine::ReverseChordal) {
        c.domain = Domain::HalfPlane;
        std::size_t n = rec.steps();
        if (n < 2) return c;
        // the reverse hull at the stop time equals the forward hull of the
        // time-reversed driving
        std::vector<double> w(rec.w), t(rec.t);
        if (rec.engine == Engine::ReverseChordal) {
            std::vector<double> wr(n), tr(n);
            double T = rec.t.back();
            for (std::size_t k = 0; k < n; ++k) {
                wr[k] = rec.w[n - 1 - k];
                tr[k] = T - rec.t[n - 1 - k];
            }
            w = wr;
            t = tr;
        }
        std::vector<TiltedSlit> slits(n - 1);
        for (std::size_t k = 1; k < n; ++k) {
            double dw = opt.vertical_slit ? 0.0 : w[k] - w[k - 1];
            slits[k - 1] = TiltedSlit::from_increment(w[k - 1], dw, t[k] - t[k - 1]);
        }
        c.points.push_back({w[0], 0.0});
        c.cap_times.push_back(t[0]);
        for (std::size_t k = 1; k < n; k += opt.stride) {
            Cpx tip = slits[k - 1].tip();
            for (std::size_t j = k - 1; j-- > 0;) tip = slits[j].forward(tip);
            if (tip.imag() < 0) tip = {tip.real(), 0.0};
            c.points.push_back(tip);
            c.cap_times.push_back(t[k]);
        }
        return c;
    }
    if (rec.engine == Engine::Radial) {
        c.domain = Domain::UnitDisk;
        std::size_t n = rec.steps();
        if (n < 2) return c;
        std::vector<RadialSlit> slits(n - 1);
        for (std::size_t k = 1; k < n; ++k)
            slits[k - 1] = RadialSlit{rec.w[k - 1], rec.t[k] - rec.t[k - 1]};
        c.points.push_back(std::exp(Cpx(0, rec.w[0])));
        c.cap_times.push_back(rec.t[0]);
        for (std::size_t k = 1; k < n; k += opt.stride) {
            Cpx tip = slits[k - 1].tip();
            for (std::size_t j = k - 1; j-- > 0;) tip = slits[j].unzip(tip);
            if (std::abs(tip) > 1.0) tip /= std::abs(tip);
            c.points.push_back(tip);
            c.cap_times.push_back(rec.t[k]);
        }
        return c;
    }
    throw std::invalid_argument("trace: whole-plane records are not traced directly");
}

// ---------------------------------------------------------------------------
// driving extraction

DrivingRecord extract_driving(const CurveTrace& curve, const ExtractOptions& opt) {
    DrivingRecord rec;
    if (curve.points.size() < 2)
        throw std::invalid_argument("extract_driving: need at least two points");
    int skipped = 0;

    if (curve.domain == Domain::HalfPlane) {
        rec.engine = Engine::Chordal;
        std::vector<Cpx> pts(curve.points.begin(), curve.points.end());
        std::vector<std::vector<Cpx>> tracked;
        tracked.resize(opt.tracked.size());
        std::vector<Cpx> tr(opt.tracked);
        double a = pts.front().real();
        double tcur = 0;
        rec.t.push_back(0);
        rec.w.push_back(a);
        for (std::size_t j = 0; j < tr.size(); ++j) tracked[j].push_back(tr[j]);
        for (std::size_t k = 1; k < pts.size(); ++k) {
            Cpx zeta = pts[k] - a;
            if (zeta.imag() <= std::max(opt.min_height, 1e-12)) {
                ++skipped;
                continue;
            }
            if (!opt.tilted) {
                double b = zeta.imag();
                double cpos = a + zeta.real();
                tcur += b * b / 4.0;
                auto unzip = [&](Cpx z) {
                    Cpx d = z - cpos;
                    Cpx s = std::sqrt(d * d + b * b);
                    if ((d.real() < 0) != (s.real() < 0)) s = -s;
                    if (s.imag() < 0) s = std::conj(s);
                    return cpos + s;
                };
                for (std::size_t j = k + 1; j < pts.size(); ++j) pts[j] = unzip(pts[j]);
                for (auto& z : tr) z = unzip(z);
                a = cpos;
            } else {
                double ang = std::arg(zeta);
                double alpha = std::clamp(ang / kPi, 1e-3, 1.0 - 1e-3);
                double len = std::abs(zeta) / (std::pow(1 - alpha, 1 - alpha) *
                                               std::pow(alpha, alpha));
                TiltedSlit s;
                s.base = a;
                s.alpha = alpha;
                s.p = alpha * len;
                s.q = (1 - alpha) * len;
                tcur += alpha * (1 - alpha) * len * len / 4.0;
                for (std::size_t j = k + 1; j < pts.size(); ++j)
                    pts[j] = s.inverse(pts[j]);
                for (auto& z : tr) z = s.inverse(z);
                a += (1 - 2 * alpha) * len;
            }
            rec.t.push_back(tcur);
            rec.w.push_back(a);
            for (std::size_t j = 0; j < tr.size(); ++j) tracked[j].push_back(tr[j]);
        }
        if (rec.t.size() < 2)
            throw std::invalid_argument("extract_driving: curve never leaves the boundary");
        if (skipped) rec.note = "skipped " + std::to_string(skipped) + " boundary points";
        for (auto& trk : tracked) {
            std::vector<double> vals(trk.size());
            for (std::size_t j = 0; j < trk.size(); ++j) vals[j] = trk[j].real();
            rec.force_tracks.push_back(std::move(vals));
        }
        return rec;
    }

    if (curve.domain == Domain::UnitDisk) {
        rec.engine = Engine::Radial;
        std::vector<Cpx> pts(curve.points.begin(), curve.points.end());
        std::vector<std::vector<double>> tracked(opt.tracked.size());
        std::vector<Cpx> tr(opt.tracked);
        double theta = std::arg(pts.front());
        double tcur = 0;
        rec.t.push_back(0);
        rec.w.push_back(theta);
        for (std::size_t j = 0; j < tr.size(); ++j)
            tracked[j].push_back(std::arg(tr[j]));
        for (std::size_t k = 1; k < pts.size(); ++k) {
            double r = std::abs(pts[k]);
            if (r >= 1.0 - 1e-12) {
                ++skipped;
                continue;
            }
            if (r < 1e-9)
                throw std::invalid_argument("extract_driving: curve reached the target");
            double psi = std::arg(pts[k]);
            double dtime = std::log((1 + r) * (1 + r) / (4 * r));
            RadialSlit s{psi, dtime};
            for (std::size_t j = k + 1; j < pts.size(); ++j) pts[j] = s.zip(pts[j]);
            for (auto& z : tr) {
                z = s.zip(z);
                if (std::abs(z) > 1.0) z /= std::abs(z);
            }
            tcur += dtime;
            double prev = rec.w.back();
            while (psi - prev > kPi) psi -= kTwoPi;
            while (psi - prev < -kPi) psi += kTwoPi;
            rec.t.push_back(tcur);
            rec.w.push_back(psi);
            for (std::size_t j = 0; j < tr.size(); ++j) {
                double ang = std::arg(tr[j]);
                double pang = tracked[j].back();
                while (ang - pang > kPi) ang -= kTwoPi;
                while (ang - pang < -kPi) ang += kTwoPi;
                tracked[j].push_back(ang);
            }
        }
        if (rec.t.size() < 2)
            throw std::invalid_argument("extract_driving: curve never leaves the boundary");
        if (skipped) rec.note = "skipped " + std::to_string(skipped) + " boundary points";
        rec.force_tracks = std::move(tracked);
        return rec;
    }
    throw std::invalid_argument("extract_driving: unsupported domain");
}

double radial_capacity_probe(const DrivingRecord& rec, double probe) {
    if (rec.engine != Engine::Radial)
        throw std::invalid_argument("radial_capacity_probe: radial record required");
    Cpx z = probe * std::exp(Cpx(0, rec.w[0] + kPi));
    for (std::size_t k = 1; k < rec.steps(); ++k) {
        RadialSlit s{rec.w[k - 1], rec.t[k] - rec.t[k - 1]};
        z = s.zip(z);
    }
    return std::log(std::abs(z) / probe);
}

double girsanov_weight(const DrivingRecord& rec, double mu) {
    double T = rec.t.back();
    double B = rec.brown.back();
    double kap = rec.params.kappa;
    return std::exp(mu * std::sqrt(kap) * B - mu * mu * kap * T / 2.0);
}

// ---------------------------------------------------------------------------
// files

namespace {
void write_doubles(std::ofstream& os, const std::vector<double>& v) {
    os.write(reinterpret_cast<const char*>(v.data()),
             static_cast<std::streamsize>(v.size() * sizeof(double)));
}
std::vector<double> read_doubles(std::ifstream& is, std::size_t n) {
    std::vector<double> v(n);
    is.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
    return v;
}
} // namespace

void write_driving(const std::string& path, const DrivingRecord& rec) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_driving: cannot open " + path);
    os << "lqg-driving 1\n";
    const char* eng = rec.engine == Engine::Chordal ? "chordal"
                      : rec.engine == Engine::Radial ? "radial"
                      : rec.engine == Engine::WholePlane ? "whole_plane"
                                                         : "reverse_chordal";
    os << "engine " << eng << "\n";
    os.precision(17);
    os << "kappa " << rec.params.kappa << "\nmu " << rec.params.mu << "\n";
    os << "dt " << rec.params.dt << "\nseed " << rec.params.seed << "\n";
    os << "stop " << stop_tag(rec.stop) << "\n";
    os << "forces " << rec.params.forces.size();
    for (const auto& f : rec.params.forces)
        os << " " << f.rho << " " << f.pos << " " << f.side;
    os << "\n";
    os << "rows " << rec.t.size() << "\n";
    os << "tracks " << rec.force_tracks.size() << "\n";
    os << "binary\n";
    write_doubles(os, rec.t);
    write_doubles(os, rec.w);
    write_doubles(os, rec.brown);
    for (const auto& tr : rec.force_tracks) write_doubles(os, tr);
}

DrivingRecord read_driving(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("read_driving: cannot open " + path);
    std::string line;
    std::getline(is, line);
    if (line.rfind("lqg-driving", 0) != 0)
        throw std::runtime_error("read_driving: bad magic");
    DrivingRecord rec;
    std::size_t rows = 0, tracks = 0;
    while (std::getline(is, line)) {
        if (line == "binary") break;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "engine") {
            std::string e;
            ls >> e;
            rec.engine = e == "chordal" ? Engine::Chordal
                         : e == "radial" ? Engine::Radial
                         : e == "whole_plane" ? Engine::WholePlane
                                              : Engine::ReverseChordal;
        } else if (key == "kappa") ls >> rec.params.kappa;
        else if (key == "mu") ls >> rec.params.mu;
        else if (key == "dt") ls >> rec.params.dt;
        else if (key == "seed") ls >> rec.params.seed;
        else if (key == "stop") {
            std::string s;
            ls >> s;
            rec.stop = s == "horizon" ? StopReason::Horizon
                       : s == "continuation_threshold"
                           ? StopReason::ContinuationThreshold
                       : s == "target_disconnected" ? StopReason::TargetDisconnected
                                                    : StopReason::ForcePointCollision;
        } else if (key == "forces") {
            std::size_t n;
            ls >> n;
            rec.params.forces.resize(n);
            for (auto& f : rec.params.forces) ls >> f.rho >> f.pos >> f.side;
        } else if (key == "rows") ls >> rows;
        else if (key == "tracks") ls >> tracks;
    }
    rec.t = read_doubles(is, rows);
    rec.w = read_doubles(is, rows);
    rec.brown = read_doubles(is, rows);
    rec.force_tracks.resize(tracks);
    for (auto& tr : rec.force_tracks) tr = read_doubles(is, rows);
    if (!is) throw std::runtime_error("read_driving: truncated payload");
    return rec;
}

void write_curve(const std::string& path, const CurveTrace& curve) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_curve: cannot open " + path);
    os << "lqg-curve 1\n";
    os << "domain " << domain_tag(curve.domain) << "\n";
    os << "rows " << curve.points.size() << "\n";
    os << "binary\n";
    std::vector<double> x(curve.points.size()), y(curve.points.size());
    for (std::size_t k = 0; k < curve.points.size(); ++k) {
        x[k] = curve.points[k].real();
        y[k] = curve.points[k].imag();
    }
    write_doubles(os, x);
    write_doubles(os, y);
    write_doubles(os, curve.cap_times);
}

CurveTrace read_curve(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("read_curve: cannot open " + path);
    std::string line;
    std::getline(is, line);
    if (line.rfind("lqg-curve", 0) != 0) throw std::runtime_error("read_curve: bad magic");
    CurveTrace c;
    std::size_t rows = 0;
    while (std::getline(is, line)) {
        if (line == "binary") break;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "domain") {
            std::string t;
            ls >> t;
            c.domain = domain_from_tag(t);
        } else if (key == "rows") ls >> rows;
    }
    auto x = read_doubles(is, rows);
    auto y = read_doubles(is, rows);
    c.cap_times = read_doubles(is, rows);
    c.points.resize(rows);
    for (std::size_t k = 0; k < rows; ++k) c.points[k] = {x[k], y[k]};
    if (!is) throw std::runtime_error("read_curve: truncated payload");
    return c;
}

} // namespace lqg
