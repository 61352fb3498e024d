#include <doctest.h>

#include <vector>

#include "lqg/rng.hpp"
#include "lqg/stats.hpp"

using namespace lqg;

TEST_CASE("streams are deterministic and independent of interleaving") {
    Rng a = make_stream(42, "test", "a");
    Rng b = make_stream(42, "test", "a");
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    Rng c = make_stream(42, "test", "c");
    Rng d = make_stream(42, "test", "d");
    CHECK(c.next_u64() != d.next_u64());

    // block index gives a distinct stream
    Rng e0 = make_stream(42, "test", "a", 0);
    Rng e1 = make_stream(42, "test", "a", 1);
    CHECK(e0.next_u64() != e1.next_u64());
}

TEST_CASE("gaussians have the right first moments") {
    Rng r = make_stream(7, "test", "gauss");
    const int n = 200000;
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = r.gauss();
    auto m = stats::mean_se(x);
    CHECK(std::fabs(m.mean) < 4 * m.se);
    CHECK(stats::variance(x) == doctest::Approx(1.0).epsilon(0.02));
    CHECK(std::fabs(stats::skewness(x)) < 4 * std::sqrt(6.0 / n));
    CHECK(std::fabs(stats::excess_kurtosis(x)) < 4 * std::sqrt(24.0 / n));
}

TEST_CASE("uniforms stay in the open interval") {
    Rng r = make_stream(9, "test", "uniform");
    for (int i = 0; i < 100000; ++i) {
        double u = r.uniform();
        CHECK(u > 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("poisson mean") {
    Rng r = make_stream(11, "test", "poisson");
    double s = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) s += static_cast<double>(r.poisson(3.5));
    CHECK(s / n == doctest::Approx(3.5).epsilon(0.03));
}
