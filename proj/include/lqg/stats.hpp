#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lqg/rng.hpp"

namespace lqg::stats {

struct MeanSE {
    double mean = 0, se = 0;
    std::size_t n = 0;
};

MeanSE mean_se(const std::vector<double>& x);

// weighted mean Sum(w f)/Sum(w) with linearized standard error
MeanSE weighted_mean_se(const std::vector<double>& f,
                        const std::vector<double>& w);

double variance(const std::vector<double>& x);
double skewness(const std::vector<double>& x);
double excess_kurtosis(const std::vector<double>& x);

// OLS slope through the origin and with intercept
double ols_slope_origin(const std::vector<double>& x, const std::vector<double>& y);
struct LinFit {
    double slope = 0, intercept = 0, slope_se = 0;
};
LinFit ols(const std::vector<double>& x, const std::vector<double>& y);

// two-sample Kolmogorov-Smirnov; p from the asymptotic Kolmogorov law
double ks_statistic(std::vector<double> a, std::vector<double> b);
double ks_pvalue(double d, std::size_t na, std::size_t nb);
double ks_test(const std::vector<double>& a, const std::vector<double>& b);

// weighted two-sample test: systematic resampling to equal weights, then KS
double weighted_ks_test(const std::vector<double>& a, const std::vector<double>& wa,
                        const std::vector<double>& b, const std::vector<double>& wb,
                        Rng& rng, std::size_t m = 0);

// Spearman rank correlation with normal-approximation z-score
struct RankCorr {
    double rho = 0, z = 0, p = 0;
};
RankCorr spearman(const std::vector<double>& x, const std::vector<double>& y);

std::vector<std::size_t> systematic_resample(const std::vector<double>& w,
                                             std::size_t m, Rng& rng);

// one line of a pass/fail report
struct Check {
    std::string name;
    double statistic = 0, target = 0, tolerance = 0;
    std::size_t n = 0;
    bool pass = false;
    std::string note;
};

struct Report {
    std::string title;
    std::vector<Check> checks;
    bool all_pass() const;
    void add(Check c) { checks.push_back(std::move(c)); }
    // |statistic - target| <= tolerance
    void check_close(const std::string& name, double stat, double target,
                     double tol, std::size_t n = 0, const std::string& note = "");
    void check_true(const std::string& name, bool ok, const std::string& note = "");
    std::string to_text() const;
};

} // namespace lqg::stats
