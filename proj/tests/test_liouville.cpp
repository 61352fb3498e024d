#include <doctest.h>

#include <cmath>
#include <numbers>

#include "lqg/gff.hpp"
#include "lqg/liouville.hpp"
#include "lqg/qsurface.hpp"
#include "lqg/rng.hpp"
#include "lqg/stats.hpp"

using namespace lqg;
constexpr double kPi = std::numbers::pi;

namespace {
LiouvilleSpec base_spec(double gamma, double lo = -7, double hi = 7) {
    LiouvilleSpec s;
    s.grid = make_halfplane_grid(48, 32, 7.0);
    s.gamma = gamma;
    s.c_lo = lo;
    s.c_hi = hi;
    return s;
}
} // namespace

TEST_CASE("insertion constants match the printed products") {
    LiouvilleSpec s0 = base_spec(1.2);
    CHECK(insertion_constant(s0) == doctest::Approx(1.0));

    LiouvilleSpec s1 = base_spec(1.2);
    s1.insertions.push_back(Insertion{0.8, {0, 0}, true, false});
    CHECK(insertion_constant(s1) == doctest::Approx(1.0));  // |0|_+ = 1

    LiouvilleSpec s2 = base_spec(1.2);
    s2.insertions.push_back(Insertion{0.9, {0, 1}, false, false});
    CHECK(insertion_constant(s2) ==
          doctest::Approx(std::pow(2.0, -0.9 * 0.9 / 2)).epsilon(1e-12));

    // continuity in the insertion location
    LiouvilleSpec s3 = s2;
    s3.insertions[0].z = {0.001, 1.0};
    CHECK(std::fabs(log_insertion_constant(s3) - log_insertion_constant(s2)) < 1e-2);

    LiouvilleSpec s4 = base_spec(1.2);
    s4.insertions.push_back(Insertion{0.8, {0.5, 0}, true, false});
    s4.insertions.push_back(Insertion{0.7, {0.5, 0}, true, false});
    CHECK_THROWS(insertion_constant(s4));
}

TEST_CASE("conformal weight symmetry") {
    for (double gamma : {0.7, 1.0, 1.5}) {
        double Q = gamma / 2 + 2 / gamma;
        for (double a = -1.0; a < 3.0; a += 0.17)
            CHECK(std::fabs(delta_charge(a, gamma) - delta_charge(2 * Q - a, gamma)) <
                  1e-12);
    }
}

TEST_CASE("zero-insertion liouville field: profile and weight bookkeeping") {
    double gamma = 1.0;
    double Q = gamma / 2 + 2 / gamma;
    LiouvilleSpec s = base_spec(gamma, 0.0, 0.01);
    FieldSample phi = sample_liouville(s, 42);
    FieldSample h = sample_free_gff(s.grid, Normalization::ZeroAvgUnitSemicircle, 42);
    // phi = h - 2Q log|z|_+ + c
    double c = phi.at(3, 5) - h.at(3, 5) +
               2 * Q * std::max(0.0, s.grid.x(3));
    CHECK(c >= 0.0);
    CHECK(c <= 0.01);
    for (int j = 0; j < s.grid.ny; j += 7)
        for (int i = 0; i < s.grid.nx; i += 5) {
            double expect = h.at(i, j) - 2 * Q * std::max(0.0, s.grid.x(i)) + c;
            CHECK(phi.at(i, j) == doctest::Approx(expect).epsilon(1e-10));
        }
    CHECK(phi.log_weight ==
          doctest::Approx(-Q * c + std::log(0.01)).epsilon(1e-9));
}

TEST_CASE("constant shift scales quantum area by e^{gamma a}") {
    double gamma = 1.0;
    LiouvilleSpec s = base_spec(gamma);
    FieldSample phi = sample_liouville(s, 7);
    FieldSample rep = internal_representative(phi, gamma);
    FieldSample rep_shift = rep;
    double a = 0.37;
    for (double& v : rep_shift.values) v += a;
    Rect region{-1.0, 1.0, 0.5, 2.5};
    auto A = quantum_area(rep, region, {4, 2}, gamma);
    auto B = quantum_area(rep_shift, region, {4, 2}, gamma);
    CHECK(B.value / A.value == doctest::Approx(std::exp(gamma * a)).epsilon(1e-12));
}

TEST_CASE("window bookkeeping: split and shifted windows agree") {
    double gamma = 1.0;
    const int n = 3000;
    // bounded, c-localized functional
    auto F = [&](const FieldSample& f) {
        double a0 = circle_average(f, {0.0, kPi / 2}, 0.6);
        double t = a0 / 3.0;
        if (std::fabs(t) >= 1) return 0.0;
        double u = 1 - t * t;
        return u * u * u * std::tanh(circle_average(f, {1.0, 1.8}, 0.6));
    };
    auto estimate = [&](double lo, double hi, std::uint64_t seed) {
        LiouvilleSpec s = base_spec(gamma, lo, hi);
        s.insertions.push_back(Insertion{0.6, {0, 0}, true, false});
        std::vector<double> vals(n);
        for (int k = 0; k < n; ++k) {
            FieldSample phi = sample_liouville(s, seed + k);
            vals[k] = std::exp(phi.log_weight) * F(phi);
        }
        return stats::mean_se(vals);
    };
    auto whole = estimate(-7, 7, 100);
    auto lo_half = estimate(-7, 0, 20000);
    auto hi_half = estimate(0, 7, 40000);
    double sum = lo_half.mean + hi_half.mean;
    double se = std::sqrt(whole.se * whole.se + lo_half.se * lo_half.se +
                          hi_half.se * hi_half.se);
    CHECK(std::fabs(whole.mean - sum) < 4 * se);

    auto shifted = estimate(-9, 7, 60000);
    CHECK(std::fabs(whole.mean - shifted.mean) <
          4 * std::hypot(whole.se, shifted.se));
}

TEST_CASE("covariance factors") {
    double gamma = 1.3;
    auto idm = conformal_identity(Domain::HalfPlane);
    std::vector<Insertion> ins = {Insertion{0.8, {1, 0}, true, false}};
    CHECK(covariance_factor(idm, ins, gamma) == doctest::Approx(1.0));

    auto sc = conformal_scale(Domain::HalfPlane, {2, 0});
    CHECK(covariance_factor(sc, ins, gamma) ==
          doctest::Approx(std::pow(2.0, -delta_charge(0.8, gamma))).epsilon(1e-12));

    double Q = gamma / 2 + 2 / gamma;
    std::vector<Insertion> bulk = {Insertion{Q, {0, 1}, false, false}};
    CHECK(covariance_factor(sc, bulk, gamma) ==
          doctest::Approx(std::pow(2.0, -Q * Q / 2)).epsilon(1e-12));
}

TEST_CASE("conformal covariance: identity map is exact") {
    LiouvilleSpec s = base_spec(1.0);
    s.insertions.push_back(Insertion{0.7, {1, 0}, true, false});
    auto idm = conformal_identity(Domain::HalfPlane);
    auto rep = check_conformal_covariance(s, idm, s.grid, 0.0, 400, 5);
    CHECK(rep.all_pass());
}

TEST_CASE("conformal covariance: scaling map") {
    LiouvilleSpec s = base_spec(1.0);
    s.grid = make_halfplane_grid(48, 32, 8.0);
    s.insertions.push_back(Insertion{0.7, {1, 0}, true, false});
    auto sc = conformal_scale(Domain::HalfPlane, {2, 0});
    GridSpec tgt = make_halfplane_grid(48, 32, 6.0);
    auto rep = check_conformal_covariance(s, sc, tgt, 0.0, 2500, 11);
    CHECK(rep.all_pass());
}

TEST_CASE("conformal covariance: strip to half plane through exp") {
    LiouvilleSpec s;
    s.grid = make_strip_grid(48, 32, 7.0);
    s.gamma = 1.0;
    s.c_lo = -7;
    s.c_hi = 7;
    s.insertions.push_back(Insertion{0.8, {1, 0}, true, true});   // (b1, +inf)
    s.insertions.push_back(Insertion{0.6, {-1, 0}, true, true});  // (b2, -inf)
    s.insertions.push_back(Insertion{0.5, {0.4, 0}, true, false});
    auto ex = conformal_exp_strip_to_H();
    GridSpec tgt = make_halfplane_grid(48, 32, 6.0);
    auto rep = check_conformal_covariance(s, ex, tgt, 0.0, 2500, 13);
    CHECK(rep.all_pass());
}
