#include "lqg/gff.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "lqg/conformal.hpp"
#include "lqg/rng.hpp"

namespace lqg {

namespace {
constexpr double kPi = std::numbers::pi;

struct BasisKey {
    int n;
    int lo, hi;     // 0 Dirichlet, 1 Free, 2 periodic
    long hq;        // quantized spacing
    bool operator<(const BasisKey& o) const {
        return std::tie(n, lo, hi, hq) < std::tie(o.n, o.lo, o.hi, o.hq);
    }
};

struct Basis1d {
    Eigen::MatrixXd V;   // n x m, columns are unit eigenvectors (embedded)
    Eigen::VectorXd lam; // m eigenvalues of the 1/h^2-scaled graph Laplacian
};

// 1D finite-difference Laplacian eigenbasis for the requested end conditions.
Basis1d build_basis(int n, int lo, int hi, double h) {
    Basis1d b;
    if (lo == 2) {
        // periodic ring on n nodes
        Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i < n; ++i) {
            L(i, i) = 2.0;
            L(i, (i + 1) % n) = -1.0;
            L(i, (i + n - 1) % n) = -1.0;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L);
        b.V = es.eigenvectors();
        b.lam = es.eigenvalues() / (h * h);
        return b;
    }
    int i0 = (lo == 0) ? 1 : 0;
    int i1 = (hi == 0) ? n - 2 : n - 1;
    int m = i1 - i0 + 1;
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(m, m);
    for (int k = 0; k < m; ++k) {
        int i = i0 + k;
        double diag = 2.0;
        if (i == 0 || i == n - 1) diag = 1.0;  // free end of the chain
        L(k, k) = diag;
        if (k > 0) L(k, k - 1) = -1.0;
        if (k < m - 1) L(k, k + 1) = -1.0;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L);
    b.V = Eigen::MatrixXd::Zero(n, m);
    b.V.block(i0, 0, m, m) = es.eigenvectors();
    b.lam = es.eigenvalues() / (h * h);
    return b;
}

const Basis1d& cached_basis(int n, int lo, int hi, double h) {
    static std::map<BasisKey, Basis1d> cache;
    static std::mutex mtx;
    BasisKey key{n, lo, hi, std::lround(h * 1e12)};
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, build_basis(n, lo, hi, h)).first;
    return it->second;
}

int bc_code(Bc b) { return b == Bc::Dirichlet ? 0 : 1; }

FieldSample sample_separable(const GridSpec& g, std::uint64_t seed,
                             bool drop_zero_mode) {
    g.validate();
    const Basis1d& bx =
        cached_basis(g.nx, bc_code(g.bc[SideLeft]), bc_code(g.bc[SideRight]), g.hx());
    const Basis1d& by = g.periodic_y
                            ? cached_basis(g.ny, 2, 2, g.hy())
                            : cached_basis(g.ny, bc_code(g.bc[SideBottom]),
                                           bc_code(g.bc[SideTop]), g.hy());
    const long mx = bx.lam.size(), my = by.lam.size();
    Rng rng = make_stream(seed, "gff", "field");
    Eigen::MatrixXd coef(my, mx);
    double scale = std::sqrt(2.0 * kPi / (g.hx() * g.hy()));
    for (long ky = 0; ky < my; ++ky)
        for (long kx = 0; kx < mx; ++kx) {
            double lam = bx.lam(kx) + by.lam(ky);
            double xi = rng.gauss();
            if (lam < 1e-12) {
                coef(ky, kx) = 0.0;
                if (!drop_zero_mode)
                    throw std::logic_error("gff: singular stiffness without free sampling");
            } else {
                coef(ky, kx) = xi * scale / std::sqrt(lam);
            }
        }
    Eigen::MatrixXd vals = by.V * coef * bx.V.transpose();  // ny x nx
    FieldSample f;
    f.grid = g;
    f.seed = seed;
    f.values.resize(static_cast<size_t>(g.size()));
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) f.at(i, j) = vals(j, i);
    return f;
}
} // namespace

FieldSample sample_dirichlet_gff(const GridSpec& grid, std::uint64_t seed) {
    if (!grid.all_dirichlet())
        throw std::invalid_argument("sample_dirichlet_gff: all sides must be Dirichlet");
    return sample_separable(grid, seed, false);
}

FieldSample sample_free_gff(const GridSpec& grid, Normalization anchor,
                            std::uint64_t seed) {
    if (!grid.all_free())
        throw std::invalid_argument("sample_free_gff: all sides must be Free");
    bool plane = grid.domain == Domain::Plane;
    if (anchor == Normalization::ZeroAvgUnitSemicircle &&
        !(grid.domain == Domain::HalfPlane || grid.domain == Domain::UnitDisk || plane))
        throw std::invalid_argument("sample_free_gff: anchor/domain mismatch");
    if (anchor == Normalization::ZeroAvgVerticalLine0 && grid.domain != Domain::Strip)
        throw std::invalid_argument("sample_free_gff: anchor/domain mismatch");
    FieldSample f = sample_separable(grid, seed, true);
    if (anchor != Normalization::None) {
        double avg = column_average(f, 0.0);
        for (double& v : f.values) v -= avg;
        f.norm = anchor;
    }
    return f;
}

FieldSample sample_mixed_gff(const GridSpec& grid, std::uint64_t seed) {
    if (grid.all_free())
        throw std::invalid_argument(
            "sample_mixed_gff: all-Free configuration, use sample_free_gff");
    return sample_separable(grid, seed, false);
}

MarkovSplit markov_decompose(const FieldSample& field, const SubRegion& U) {
    const GridSpec& g = field.grid;
    if (U.i0 < 0 || U.j0 < 0 || U.i1 > g.nx - 1 || U.j1 > g.ny - 1 ||
        U.i1 - U.i0 < 2 || U.j1 - U.j0 < 2)
        throw std::invalid_argument("markov_decompose: unresolved subregion");

    // harmonic extension of the parent's values on the boundary of U
    GridSpec sub = g;
    sub.nx = U.i1 - U.i0 + 1;
    sub.ny = U.j1 - U.j0 + 1;
    sub.bbox = {g.x(U.i0), g.x(U.i1), g.y(U.j0), g.y(U.j1)};
    for (int s = 0; s < 4; ++s) sub.bc[s] = Bc::Dirichlet;
    sub.periodic_y = false;
    FieldSample bnd = make_constant_field(sub, 0.0);
    for (int j = 0; j < sub.ny; ++j)
        for (int i = 0; i < sub.nx; ++i)
            if (i == 0 || j == 0 || i == sub.nx - 1 || j == sub.ny - 1)
                bnd.at(i, j) = field.at(U.i0 + i, U.j0 + j);
    FieldSample ext = harmonic_extension(bnd, sub, {}, 1e-9);

    MarkovSplit out;
    out.h2 = field;
    out.h1 = make_constant_field(g, 0.0);
    for (int j = U.j0 + 1; j < U.j1; ++j)
        for (int i = U.i0 + 1; i < U.i1; ++i) {
            double h2 = ext.at(i - U.i0, j - U.j0);
            out.h2.at(i, j) = h2;
            out.h1.at(i, j) = field.at(i, j) - h2;
        }
    return out;
}

void radial_lateral_decompose(const FieldSample& field, FieldSample& h1,
                              FieldSample& h2) {
    const GridSpec& g = field.grid;
    h1 = make_constant_field(g, 0.0);
    h2 = make_constant_field(g, 0.0);
    for (int i = 0; i < g.nx; ++i) {
        double avg = 0;
        for (int j = 0; j < g.ny; ++j) avg += field.at(i, j);
        avg /= g.ny;
        for (int j = 0; j < g.ny; ++j) {
            h1.at(i, j) = avg;
            h2.at(i, j) = field.at(i, j) - avg;
        }
    }
    h1.log_weight = field.log_weight;
    h1.seed = field.seed;
}

double circle_average(const FieldSample& field, Cpx p, double eps,
                      int min_samples) {
    const GridSpec& g = field.grid;
    double half_cell = 0.5 * std::min(g.hx(), g.hy());
    double th0 = 0.0, th1 = 2.0 * kPi;
    bool arc = false;
    if (!g.periodic_y) {
        if (std::fabs(p.imag() - g.bbox.y0) < half_cell) {
            th0 = 0.0; th1 = kPi; arc = true;           // bottom: upper half circle
            p = {p.real(), g.bbox.y0};
        } else if (std::fabs(p.imag() - g.bbox.y1) < half_cell) {
            th0 = kPi; th1 = 2.0 * kPi; arc = true;     // top: lower half circle
            p = {p.real(), g.bbox.y1};
        }
    }
    int n = std::max(min_samples, static_cast<int>(std::ceil(
                                      (th1 - th0) * eps / half_cell)));
    double sum = 0;
    for (int k = 0; k < n; ++k) {
        double th = arc ? th0 + (th1 - th0) * (k + 0.5) / n
                        : th0 + (th1 - th0) * k / n;
        Cpx q = p + eps * Cpx(std::cos(th), std::sin(th));
        if (!field.inside(q))
            throw std::out_of_range("circle_average: circle leaves grid");
        sum += field.interp(q);
    }
    return sum / n;
}

} // namespace lqg
