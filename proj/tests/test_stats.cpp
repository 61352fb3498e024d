#include <doctest.h>

#include <cmath>

#include "lqg/rng.hpp"
#include "lqg/stats.hpp"

using namespace lqg;

TEST_CASE("ks two-sample behaves") {
    Rng r = make_stream(5, "test", "ks");
    std::vector<double> a(3000), b(3000), c(3000);
    for (int i = 0; i < 3000; ++i) {
        a[i] = r.gauss();
        b[i] = r.gauss();
        c[i] = r.gauss() + 0.5;
    }
    CHECK(stats::ks_test(a, b) > 0.01);
    CHECK(stats::ks_test(a, c) < 1e-6);
}

TEST_CASE("weighted ks via resampling") {
    Rng r = make_stream(6, "test", "wks");
    // exponential tilt: N(0,1) weighted by e^{x} equals N(1,1)
    std::vector<double> a(8000), wa(8000), b(8000), wb(8000, 1.0);
    for (int i = 0; i < 8000; ++i) {
        a[i] = r.gauss();
        wa[i] = std::exp(a[i]);
        b[i] = r.gauss() + 1.0;
    }
    Rng rs = make_stream(6, "test", "wks-resample");
    CHECK(stats::weighted_ks_test(a, wa, b, wb, rs) > 0.01);
}

TEST_CASE("ols recovers a slope") {
    Rng r = make_stream(7, "test", "ols");
    std::vector<double> x(500), y(500);
    for (int i = 0; i < 500; ++i) {
        x[i] = i * 0.01;
        y[i] = 2.0 + 3.0 * x[i] + 0.01 * r.gauss();
    }
    auto f = stats::ols(x, y);
    CHECK(f.slope == doctest::Approx(3.0).epsilon(0.01));
    CHECK(f.intercept == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("spearman independence and dependence") {
    Rng r = make_stream(8, "test", "spearman");
    std::vector<double> x(2000), y(2000), z(2000);
    for (int i = 0; i < 2000; ++i) {
        x[i] = r.gauss();
        y[i] = r.gauss();
        z[i] = x[i] + 0.3 * r.gauss();
    }
    CHECK(stats::spearman(x, y).p > 0.01);
    CHECK(stats::spearman(x, z).p < 1e-6);
}

TEST_CASE("weighted mean matches plain mean for unit weights") {
    std::vector<double> f = {1, 2, 3, 4, 5};
    std::vector<double> w(5, 1.0);
    auto a = stats::mean_se(f);
    auto b = stats::weighted_mean_se(f, w);
    CHECK(a.mean == doctest::Approx(b.mean));
}
