#include "lqg/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace lqg::stats {

MeanSE mean_se(const std::vector<double>& x) {
    MeanSE r;
    r.n = x.size();
    if (x.empty()) return r;
    double s = std::accumulate(x.begin(), x.end(), 0.0);
    r.mean = s / x.size();
    double v = 0;
    for (double xi : x) v += (xi - r.mean) * (xi - r.mean);
    if (x.size() > 1) v /= (x.size() - 1);
    r.se = std::sqrt(v / x.size());
    return r;
}

MeanSE weighted_mean_se(const std::vector<double>& f,
                        const std::vector<double>& w) {
    if (f.size() != w.size() || f.empty())
        throw std::invalid_argument("weighted_mean_se: size mismatch");
    MeanSE r;
    r.n = f.size();
    double sw = 0, swf = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        sw += w[i];
        swf += w[i] * f[i];
    }
    r.mean = swf / sw;
    double v = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        double d = w[i] * (f[i] - r.mean);
        v += d * d;
    }
    r.se = std::sqrt(v) / sw;
    return r;
}

double variance(const std::vector<double>& x) {
    MeanSE m = mean_se(x);
    return m.se * m.se * x.size();
}

double skewness(const std::vector<double>& x) {
    MeanSE m = mean_se(x);
    double s2 = 0, s3 = 0;
    for (double xi : x) {
        double d = xi - m.mean;
        s2 += d * d;
        s3 += d * d * d;
    }
    s2 /= x.size();
    s3 /= x.size();
    return s3 / std::pow(s2, 1.5);
}

double excess_kurtosis(const std::vector<double>& x) {
    MeanSE m = mean_se(x);
    double s2 = 0, s4 = 0;
    for (double xi : x) {
        double d = xi - m.mean;
        s2 += d * d;
        s4 += d * d * d * d;
    }
    s2 /= x.size();
    s4 /= x.size();
    return s4 / (s2 * s2) - 3.0;
}

double ols_slope_origin(const std::vector<double>& x, const std::vector<double>& y) {
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += x[i] * y[i];
        sxx += x[i] * x[i];
    }
    return sxy / sxx;
}

LinFit ols(const std::vector<double>& x, const std::vector<double>& y) {
    std::size_t n = x.size();
    double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    LinFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double rss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double e = y[i] - f.intercept - f.slope * x[i];
        rss += e * e;
    }
    if (n > 2) f.slope_se = std::sqrt(rss / (n - 2) / sxx);
    return f;
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        double fa = static_cast<double>(i) / a.size();
        double fb = static_cast<double>(j) / b.size();
        d = std::max(d, std::fabs(fa - fb));
    }
    return d;
}

double ks_pvalue(double d, std::size_t na, std::size_t nb) {
    double ne = static_cast<double>(na) * nb / (na + nb);
    double lam = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
    double sum = 0;
    for (int k = 1; k <= 100; ++k) {
        double t = 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lam * lam);
        sum += t;
        if (std::fabs(t) < 1e-12) break;
    }
    return std::clamp(sum, 0.0, 1.0);
}

double ks_test(const std::vector<double>& a, const std::vector<double>& b) {
    return ks_pvalue(ks_statistic(a, b), a.size(), b.size());
}

std::vector<std::size_t> systematic_resample(const std::vector<double>& w,
                                             std::size_t m, Rng& rng) {
    double total = std::accumulate(w.begin(), w.end(), 0.0);
    if (total <= 0) throw std::invalid_argument("resample: nonpositive total weight");
    std::vector<std::size_t> idx;
    idx.reserve(m);
    double step = total / m;
    double u = rng.uniform() * step;
    double cum = 0;
    std::size_t i = 0;
    for (std::size_t k = 0; k < m; ++k) {
        double target = u + k * step;
        while (cum + w[i] < target && i + 1 < w.size()) cum += w[i++];
        idx.push_back(i);
    }
    return idx;
}

double weighted_ks_test(const std::vector<double>& a, const std::vector<double>& wa,
                        const std::vector<double>& b, const std::vector<double>& wb,
                        Rng& rng, std::size_t m) {
    if (m == 0) m = std::min(a.size(), b.size());
    auto ia = systematic_resample(wa, m, rng);
    auto ib = systematic_resample(wb, m, rng);
    std::vector<double> ra(m), rb(m);
    for (std::size_t k = 0; k < m; ++k) {
        ra[k] = a[ia[k]];
        rb[k] = b[ib[k]];
    }
    // effective sizes shrink under weight dispersion
    auto n_eff = [](const std::vector<double>& w) {
        double s = 0, s2 = 0;
        for (double v : w) {
            s += v;
            s2 += v * v;
        }
        return s * s / s2;
    };
    double na = std::min<double>(n_eff(wa), m), nb = std::min<double>(n_eff(wb), m);
    double d = ks_statistic(ra, rb);
    return ks_pvalue(d, static_cast<std::size_t>(na), static_cast<std::size_t>(nb));
}

namespace {
std::vector<double> ranks(const std::vector<double>& x) {
    std::vector<std::size_t> ord(x.size());
    std::iota(ord.begin(), ord.end(), 0);
    std::sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> r(x.size());
    std::size_t i = 0;
    while (i < ord.size()) {
        std::size_t j = i;
        while (j + 1 < ord.size() && x[ord[j + 1]] == x[ord[i]]) ++j;
        double avg = 0.5 * (i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[ord[k]] = avg;
        i = j + 1;
    }
    return r;
}
} // namespace

RankCorr spearman(const std::vector<double>& x, const std::vector<double>& y) {
    auto rx = ranks(x), ry = ranks(y);
    double mx = (x.size() + 1) / 2.0;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - mx);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - mx) * (ry[i] - mx);
    }
    RankCorr r;
    r.rho = sxy / std::sqrt(sxx * syy);
    r.z = r.rho * std::sqrt(static_cast<double>(x.size()) - 1.0);
    r.p = std::erfc(std::fabs(r.z) / std::sqrt(2.0));
    return r;
}

bool Report::all_pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

void Report::check_close(const std::string& name, double stat, double target,
                         double tol, std::size_t n, const std::string& note) {
    Check c;
    c.name = name;
    c.statistic = stat;
    c.target = target;
    c.tolerance = tol;
    c.n = n;
    c.pass = std::isfinite(stat) && std::fabs(stat - target) <= tol;
    c.note = note;
    checks.push_back(std::move(c));
}

void Report::check_true(const std::string& name, bool ok, const std::string& note) {
    Check c;
    c.name = name;
    c.pass = ok;
    c.statistic = ok ? 1 : 0;
    c.target = 1;
    c.tolerance = 0;
    c.note = note;
    checks.push_back(std::move(c));
}

std::string Report::to_text() const {
    std::ostringstream os;
    os << "== " << title << " ==\n";
    for (const auto& c : checks) {
        os << (c.pass ? "PASS" : "FAIL") << "  " << c.name << "  stat=" << c.statistic
           << " target=" << c.target << " tol=" << c.tolerance;
        if (c.n) os << " n=" << c.n;
        if (!c.note.empty()) os << "  (" << c.note << ")";
        os << "\n";
    }
    return os.str();
}

} // namespace lqg::stats
