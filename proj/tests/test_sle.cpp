#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <numbers>

#include "lqg/conformal.hpp"
#include "lqg/rng.hpp"
#include "lqg/sle.hpp"
#include "lqg/stats.hpp"

using namespace lqg;
constexpr double kPi = std::numbers::pi;

TEST_CASE("continuation threshold rule") {
    CHECK(!continuation_threshold({{-1.0, -1, true}}));
    CHECK(!continuation_threshold({{-1.0, 1, true}}));
    CHECK(continuation_threshold({{-1.5, -1, true}, {-1.0, -1, true}}));
    CHECK(!continuation_threshold({{-1.5, -1, true}, {2.0, -1, true}}));
    CHECK(!continuation_threshold({{-2.5, 1, false}}));
    CHECK(continuation_threshold({{-2.5, 1, true}}));
}

TEST_CASE("chordal: quadratic variation recovers kappa") {
    const int n = 800;
    const double T = 1.0;
    SleParams p;
    p.kappa = 2.0;
    p.dt = 1e-3;
    p.horizon = T;
    std::vector<double> qv(n);
    for (int k = 0; k < n; ++k) {
        p.seed = 100 + k;
        DrivingRecord r = drive_chordal(p);
        double s = 0;
        for (std::size_t j = 1; j < r.steps(); ++j)
            s += (r.w[j] - r.w[j - 1]) * (r.w[j] - r.w[j - 1]);
        qv[k] = s;
    }
    auto m = stats::mean_se(qv);
    CHECK(std::fabs(m.mean - p.kappa * T) < 4 * m.se);
    CHECK(std::fabs(m.mean / (p.kappa * T) - 1.0) < 0.05);
}

TEST_CASE("chordal: continuation threshold detection") {
    SleParams p;
    p.kappa = 2.0;
    p.dt = 1e-3;
    p.horizon = 10.0;

    // rho <= -2 seeded at 0^+ is over threshold immediately
    p.forces = {ForcePoint{-2.5, 0, +1}};
    p.seed = 3;
    DrivingRecord r0 = drive_chordal(p);
    CHECK(r0.stop == StopReason::ContinuationThreshold);
    CHECK(r0.t.back() == 0.0);

    // detached rho = -2.5: the gap is an absorbed Bessel, threshold in finite time
    int hit = 0;
    for (int k = 0; k < 60; ++k) {
        p.forces = {ForcePoint{-2.5, 0.5, 0}};
        p.seed = 400 + k;
        DrivingRecord r = drive_chordal(p);
        if (r.stop == StopReason::ContinuationThreshold) ++hit;
    }
    CHECK(hit == 60);

    // rho = -1 never triggers
    int miss = 0;
    for (int k = 0; k < 60; ++k) {
        p.forces = {ForcePoint{-1.0, 0.5, 0}};
        p.seed = 800 + k;
        DrivingRecord r = drive_chordal(p);
        if (r.stop == StopReason::ContinuationThreshold) ++miss;
    }
    CHECK(miss == 0);
}

TEST_CASE("chordal: zero-weight force point leaves the law unchanged") {
    SleParams p;
    p.kappa = 2.0;
    p.dt = 2e-3;
    p.horizon = 1.0;
    const int n = 1500;
    std::vector<double> plain(n), forced(n);
    for (int k = 0; k < n; ++k) {
        p.forces.clear();
        p.seed = 10000 + k;
        plain[k] = drive_chordal(p).w.back();
        p.forces = {ForcePoint{0.0, 0, +1}};
        p.seed = 90000 + k;
        forced[k] = drive_chordal(p).w.back();
    }
    CHECK(stats::ks_test(plain, forced) > 0.01);
}

TEST_CASE("radial: capacity normalization and noise-off flow") {
    SleParams p;
    p.kappa = 2.0;
    p.dt = 1e-3;
    p.horizon = 1.0;
    p.noise_off = true;
    p.seed = 5;
    DrivingRecord r = drive_radial(p);
    for (double w : r.w) CHECK(w == r.w[0]);     // U frozen in test mode
    CHECK(std::fabs(radial_capacity_probe(r) - r.t.back()) < 1e-5);

    p.noise_off = false;
    for (int k = 0; k < 5; ++k) {
        p.seed = 60 + k;
        DrivingRecord rr = drive_radial(p);
        CHECK(std::fabs(radial_capacity_probe(rr) - rr.t.back()) < 1e-3);
    }
}

TEST_CASE("radial: quadratic variation and Girsanov tilt") {
    SleParams p;
    p.kappa = 3.0;
    p.dt = 1e-3;
    p.horizon = 1.0;
    const int n = 800;
    std::vector<double> qv(n);
    for (int k = 0; k < n; ++k) {
        p.seed = 7000 + k;
        DrivingRecord r = drive_radial(p);
        double s = 0;
        for (std::size_t j = 1; j < r.steps(); ++j)
            s += (r.w[j] - r.w[j - 1]) * (r.w[j] - r.w[j - 1]);
        qv[k] = s;
    }
    auto m = stats::mean_se(qv);
    CHECK(std::fabs(m.mean / (p.kappa * p.horizon) - 1.0) < 0.05);

    // weighted mu = 0 estimator matches the direct mu = 0.3 run
    double mu = 0.3;
    const int ng = 4000;
    auto f1 = [](const DrivingRecord& r) { return std::cos(r.w.back() - r.w.front()); };
    auto f2 = [](const DrivingRecord& r) {
        return std::tanh(r.w[r.steps() / 2] - r.w.front());
    };
    auto f3 = [](const DrivingRecord& r) {
        double m0 = 0;
        for (double w : r.w) m0 = std::max(m0, std::fabs(w - r.w.front()));
        return m0 < 2.0 ? 1.0 : 0.0;
    };
    std::vector<double> a1, a2, a3, b1, b2, b3;
    SleParams q = p;
    q.kappa = 2.0;
    q.horizon = 0.5;
    for (int k = 0; k < ng; ++k) {
        q.mu = 0.0;
        q.seed = 40000 + k;
        DrivingRecord r0 = drive_radial(q);
        double w = girsanov_weight(r0, mu);
        a1.push_back(w * f1(r0));
        a2.push_back(w * f2(r0));
        a3.push_back(w * f3(r0));
        q.mu = mu;
        q.seed = 80000 + k;
        DrivingRecord r1 = drive_radial(q);
        b1.push_back(f1(r1));
        b2.push_back(f2(r1));
        b3.push_back(f3(r1));
    }
    auto ca = stats::mean_se(a1), cb = stats::mean_se(b1);
    CHECK(std::fabs(ca.mean - cb.mean) < 4 * std::hypot(ca.se, cb.se));
    ca = stats::mean_se(a2), cb = stats::mean_se(b2);
    CHECK(std::fabs(ca.mean - cb.mean) < 4 * std::hypot(ca.se, cb.se));
    ca = stats::mean_se(a3), cb = stats::mean_se(b3);
    CHECK(std::fabs(ca.mean - cb.mean) < 4 * std::hypot(ca.se, cb.se));
}

TEST_CASE("radial: Phi-hat equals Phi on the unit circle") {
    auto Phi = [](Cpx u, Cpx z) { return z * (u + z) / (u - z); };
    Rng rng = make_stream(9, "test", "phihat");
    for (int k = 0; k < 200; ++k) {
        Cpx u = std::exp(Cpx(0, rng.uniform(0, 2 * kPi)));
        Cpx z = 0.9 * std::exp(Cpx(0, rng.uniform(0, 2 * kPi))) * rng.uniform();
        Cpx phihat = (Phi(u, z) + Phi(1.0 / std::conj(u), z)) / 2.0;
        CHECK(std::abs(phihat - Phi(u, z)) < 1e-12);
    }
}

TEST_CASE("whole plane: stationarity and burn-in sufficiency") {
    const int n = 700;
    double H = 2.0;
    std::vector<double> at0(n), atmid(n), deep(n);
    std::vector<double> dv;
    for (int k = 0; k < n; ++k) {
        DrivingRecord r = drive_whole_plane(2.0, 0.0, 1.0, 6.0, H, 2e-3, 500 + k);
        auto gap = [&](std::size_t j) {
            double g = r.force_tracks[0][j] - r.w[j];
            while (g <= 0) g += 2 * kPi;
            while (g > 2 * kPi) g -= 2 * kPi;
            return g;
        };
        at0[k] = gap(0);
        atmid[k] = gap(r.steps() / 2);
        DrivingRecord r2 = drive_whole_plane(2.0, 0.0, 1.0, 12.0, H, 2e-3, 500 + k);
        double g2 = r2.force_tracks[0][0] - r2.w[0];
        while (g2 <= 0) g2 += 2 * kPi;
        while (g2 > 2 * kPi) g2 -= 2 * kPi;
        deep[k] = g2;
        if (k < 300)
            for (std::size_t j = 1; j < 40; ++j) dv.push_back(r.w[j] - r.w[j - 1]);
    }
    CHECK(stats::ks_test(at0, atmid) > 0.01);
    CHECK(stats::ks_test(at0, deep) > 0.01);

    // rho = 0, mu = 0 reduces to a Brownian angle
    std::vector<double> dvb;
    for (int k = 0; k < 300; ++k) {
        DrivingRecord r = drive_whole_plane(2.0, 0.0, 0.0, 3.0, 0.1, 2e-3, 90 + k);
        for (std::size_t j = 1; j < r.steps(); ++j) dvb.push_back(r.w[j] - r.w[j - 1]);
    }
    double var = stats::variance(dvb);
    double target = 2.0 * 2e-3;
    CHECK(std::fabs(var / target - 1.0) < 0.05);
}

TEST_CASE("reverse chordal: analytic flow, collision stop, time consistency") {
    // kappa = 0 freezes the driving; the exact per-step rule composes to
    // sqrt(z^2 - 4t)
    DrivingRecord r0 = drive_reverse_chordal(
        0.0, {ForcePoint{0.0, 3.0, 0}}, ReverseStop::Horizon, 1.0, 1e-3, 3);
    for (std::size_t j = 0; j < r0.steps(); ++j) {
        double expect = std::sqrt(9.0 - 4.0 * r0.t[j]);
        CHECK(r0.force_tracks[0][j] == doctest::Approx(expect).epsilon(1e-9));
    }

    // Prop 4.1 configuration: rSLE weights (rho~+2 near 0, rho~ at 1)
    double gb = 1.0;  // gamma * beta with beta = gamma = 1
    int collided = 0;
    for (int k = 0; k < 40; ++k) {
        DrivingRecord r = drive_reverse_chordal(
            1.0, {ForcePoint{gb + 2, 0.0, +1}, ForcePoint{gb, 1.0, 0}},
            ReverseStop::ForcePointCollision, 8.0, 1e-3, 700 + k);
        if (r.stop == StopReason::ForcePointCollision) ++collided;
    }
    CHECK(collided > 0);

    DrivingRecord a = drive_reverse_chordal(2.0, {ForcePoint{1.0, 1.0, 0}},
                                            ReverseStop::Horizon, 0.5, 1e-3, 44);
    DrivingRecord b = drive_reverse_chordal(2.0, {ForcePoint{1.0, 1.0, 0}},
                                            ReverseStop::Horizon, 1.0, 1e-3, 44);
    for (std::size_t j = 0; j < a.steps(); ++j) {
        CHECK(a.w[j] == b.w[j]);
        CHECK(a.force_tracks[0][j] == b.force_tracks[0][j]);
    }
}

TEST_CASE("trace: analytic vertical slit and radial seed") {
    SleParams p;
    p.kappa = 1.0;
    p.dt = 1e-3;
    p.horizon = 1.0;
    p.noise_off = true;
    p.seed = 1;
    DrivingRecord r = drive_chordal(p);
    CurveTrace c = trace(r);
    CHECK(std::abs(c.points.back() - Cpx(0, 2)) < 0.02);
    CHECK(c.cap_times.back() == doctest::Approx(1.0));

    DrivingRecord rr = drive_radial(p);
    CurveTrace cr = trace(rr);
    CHECK(std::abs(cr.points.front() - std::exp(Cpx(0, p.seed_angle))) < 1e-12);
    CHECK(std::abs(cr.points.front() - Cpx(0, -1)) < 1e-9);
    // the noise-off radial hull grows along the radius toward 0
    CHECK(std::abs(std::arg(cr.points.back()) - p.seed_angle) < 1e-6);
}

TEST_CASE("trace: small kappa curves are near-simple") {
    SleParams p;
    p.kappa = 0.1;
    p.dt = 1e-3;
    p.horizon = 0.5;
    int bad = 0;
    for (int k = 0; k < 50; ++k) {
        p.seed = 3000 + k;
        DrivingRecord r = drive_chordal(p);
        CurveTrace c = trace(r, TraceOptions{2, false});
        const auto& q = c.points;
        bool crossed = false;
        for (std::size_t i = 1; i + 2 < q.size() && !crossed; ++i)
            for (std::size_t j = i + 2; j + 1 < q.size(); ++j) {
                Cpx a = q[i], b = q[i + 1], cc = q[j], d = q[j + 1];
                auto orient = [](Cpx u, Cpx v, Cpx w) {
                    double o = (v.real() - u.real()) * (w.imag() - u.imag()) -
                               (v.imag() - u.imag()) * (w.real() - u.real());
                    return o > 0 ? 1 : (o < 0 ? -1 : 0);
                };
                if (orient(a, b, cc) != orient(a, b, d) &&
                    orient(cc, d, a) != orient(cc, d, b)) {
                    crossed = true;
                    break;
                }
            }
        if (crossed) ++bad;
    }
    CHECK(bad == 0);
}

TEST_CASE("extract: vertical slit, roundtrip, scaling") {
    // straight slit 0 -> 2i
    CurveTrace slit;
    slit.domain = Domain::HalfPlane;
    for (int k = 0; k <= 200; ++k) {
        double y = 2.0 * k / 200;
        slit.points.push_back({0, y});
        slit.cap_times.push_back(y * y / 4);
    }
    DrivingRecord er = extract_driving(slit);
    CHECK(er.t.back() == doctest::Approx(1.0).epsilon(1e-9));
    for (double w : er.w) CHECK(std::fabs(w) < 0.02);

    // roundtrip drive -> trace -> extract
    SleParams p;
    p.kappa = 2.0;
    p.dt = 2e-4;
    p.horizon = 0.5;
    double worst = 0;
    for (int k = 0; k < 6; ++k) {
        p.seed = 42000 + k;
        DrivingRecord r = drive_chordal(p);
        CurveTrace c = trace(r, TraceOptions{2, false});
        DrivingRecord e = extract_driving(c);
        // compare on the extracted knots against the original driving
        for (std::size_t j = 0; j < e.t.size(); ++j) {
            double t = std::min(e.t[j], r.t.back());
            std::size_t i =
                static_cast<std::size_t>(std::lround(t / p.dt));
            i = std::min(i, r.steps() - 1);
            worst = std::max(worst, std::fabs(e.w[j] - r.w[i]));
        }
    }
    CHECK(worst < 0.05);

    // scaling: curve scaled by rho gives driving rho W(t / rho^2)
    double rho = 2.0;
    p.seed = 77;
    DrivingRecord r = drive_chordal(p);
    CurveTrace c = trace(r, TraceOptions{2, false});
    CurveTrace cs = c;
    for (auto& z : cs.points) z *= rho;
    DrivingRecord e = extract_driving(c);
    DrivingRecord es = extract_driving(cs);
    REQUIRE(e.t.size() == es.t.size());
    double worst_s = 0;
    for (std::size_t j = 0; j < e.t.size(); ++j) {
        worst_s = std::max(worst_s, std::fabs(es.w[j] - rho * e.w[j]));
        CHECK(es.t[j] == doctest::Approx(rho * rho * e.t[j]).epsilon(1e-9));
    }
    CHECK(worst_s < 1e-9);
}

TEST_CASE("extract: radial roundtrip") {
    SleParams p;
    p.kappa = 2.0;
    p.dt = 5e-4;
    p.horizon = 1.0;
    double worst = 0;
    for (int k = 0; k < 5; ++k) {
        p.seed = 52000 + k;
        DrivingRecord r = drive_radial(p);
        CurveTrace c = trace(r, TraceOptions{2, false});
        DrivingRecord e = extract_driving(c);
        for (std::size_t j = 0; j < e.t.size(); ++j) {
            double t = std::min(e.t[j], r.t.back());
            std::size_t i = static_cast<std::size_t>(std::lround(t / p.dt));
            i = std::min(i, r.steps() - 1);
            worst = std::max(worst, std::fabs(e.w[j] - r.w[i]));
        }
    }
    CHECK(worst < 0.1);
}

TEST_CASE("determinism and driving file roundtrip") {
    SleParams p;
    p.kappa = 2.0;
    p.dt = 1e-3;
    p.horizon = 0.3;
    p.forces = {ForcePoint{1.0, 0.7, 0}};
    p.seed = 11;
    DrivingRecord a = drive_chordal(p);
    DrivingRecord b = drive_chordal(p);
    REQUIRE(a.steps() == b.steps());
    for (std::size_t j = 0; j < a.steps(); ++j) {
        CHECK(a.w[j] == b.w[j]);
        CHECK(a.force_tracks[0][j] == b.force_tracks[0][j]);
    }

    write_driving("test_drv.lqgd", a);
    DrivingRecord c = read_driving("test_drv.lqgd");
    CHECK(c.params.kappa == a.params.kappa);
    CHECK(c.stop == a.stop);
    for (std::size_t j = 0; j < a.steps(); ++j) CHECK(c.w[j] == a.w[j]);
    std::remove("test_drv.lqgd");

    CurveTrace tr = trace(a, TraceOptions{4, false});
    write_curve("test_crv.lqgc", tr);
    CurveTrace td = read_curve("test_crv.lqgc");
    for (std::size_t j = 0; j < tr.points.size(); ++j) {
        CHECK(td.points[j] == tr.points[j]);
        CHECK(td.cap_times[j] == tr.cap_times[j]);
    }
    std::remove("test_crv.lqgc");
}

TEST_CASE("SW05 smoke: radial with sum rho = kappa - 6 matches chordal increments") {
    double kappa = 2.0;
    const int npaths = 120;
    std::vector<double> rad_inc, cho_inc;
    for (int k = 0; k < npaths; ++k) {
        SleParams p;
        p.kappa = kappa;
        p.dt = 2e-3;
        p.horizon = 0.4;
        p.seed_angle = -kPi / 2;
        p.forces = {ForcePoint{kappa - 6, -kPi / 2 + kPi, 0}};  // antipodal target
        p.seed = 61000 + k;
        DrivingRecord r = drive_radial(p);
        if (r.steps() < 20) continue;
        CurveTrace c = trace(r, TraceOptions{1, false});
        // map D -> H sending (seed, target, 0) to (0, infinity, i)
        Cpx u0 = std::exp(Cpx(0, p.seed_angle));
        Cpx x1 = std::exp(Cpx(0, p.forces[0].pos));
        auto mh = moebius_fit(Domain::UnitDisk, Domain::HalfPlane,
                              {{MPoint{u0}, MPoint{{0, 0}}},
                               {MPoint{{0, 0}}, MPoint{{0, 1}}},
                               {MPoint{x1}, MPoint{{}, true}}});
        CurveTrace ch;
        ch.domain = Domain::HalfPlane;
        for (std::size_t j = 0; j < c.points.size(); ++j) {
            Cpx w = mh.apply(c.points[j]);
            if (std::abs(w) > 1e6) continue;
            if (w.imag() < 0) w = {w.real(), 0.0};
            ch.points.push_back(w);
            ch.cap_times.push_back(0);
        }
        DrivingRecord e = extract_driving(ch);
        for (std::size_t j = 1; j < e.t.size() && j < 60; ++j) {
            double dtau = e.t[j] - e.t[j - 1];
            if (dtau > 1e-12)
                rad_inc.push_back((e.w[j] - e.w[j - 1]) / std::sqrt(dtau));
        }

        SleParams q;
        q.kappa = kappa;
        q.dt = 2e-3;
        q.horizon = 0.4;
        q.seed = 71000 + k;
        DrivingRecord rq = drive_chordal(q);
        CurveTrace cq = trace(rq, TraceOptions{1, false});
        DrivingRecord eq = extract_driving(cq);
        for (std::size_t j = 1; j < eq.t.size() && j < 60; ++j) {
            double dtau = eq.t[j] - eq.t[j - 1];
            if (dtau > 1e-12)
                cho_inc.push_back((eq.w[j] - eq.w[j - 1]) / std::sqrt(dtau));
        }
    }
    REQUIRE(rad_inc.size() > 500);
    CHECK(stats::ks_test(rad_inc, cho_inc) > 0.01);
}
