#include "lqg/qsurface.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "lqg/gff.hpp"
#include "lqg/rng.hpp"

namespace lqg {

namespace {
constexpr double kPi = std::numbers::pi;
} // namespace

FieldSample internal_representative(const FieldSample& domain_values, double gamma) {
    double Q = gamma / 2 + 2 / gamma;
    FieldSample out = domain_values;
    const GridSpec& g = out.grid;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            out.at(i, j) += Q * chart_log_deriv(g, g.node(i, j));
    return out;
}

double clipped_circle_average(const FieldSample& field, Cpx p, double eps,
                              int min_samples) {
    const GridSpec& g = field.grid;
    int n = std::max(min_samples,
                     static_cast<int>(std::ceil(2 * kPi * eps / std::min(g.hx(), g.hy()))));
    double sum = 0;
    int kept = 0;
    for (int k = 0; k < n; ++k) {
        double th = 2 * kPi * (k + 0.5) / n;
        Cpx q = p + eps * Cpx(std::cos(th), std::sin(th));
        if (!field.inside(q)) continue;
        sum += field.interp(q);
        ++kept;
    }
    if (kept == 0)
        throw std::out_of_range("clipped_circle_average: circle fully outside grid");
    return sum / kept;
}

AreaEstimate quantum_area(const FieldSample& field, Rect region,
                          const std::vector<double>& eps_cells_schedule,
                          double gamma, double rel_tol) {
    const GridSpec& g = field.grid;
    if (eps_cells_schedule.empty())
        throw std::invalid_argument("quantum_area: empty schedule");
    for (std::size_t k = 1; k < eps_cells_schedule.size(); ++k)
        if (eps_cells_schedule[k] >= eps_cells_schedule[k - 1])
            throw std::invalid_argument("quantum_area: schedule must decrease");
    if (eps_cells_schedule.back() < 2.0 - 1e-12)
        throw std::invalid_argument("quantum_area: schedule too aggressive for grid");

    AreaEstimate est;
    double cell = std::max(g.hx(), g.hy());
    for (double ec : eps_cells_schedule) {
        double eps = ec * cell;
        double sum = 0;
        int i0 = std::max(0, static_cast<int>(std::floor((region.x0 - g.bbox.x0) / g.hx())));
        int i1 = std::min(g.nx - 1, static_cast<int>(std::ceil((region.x1 - g.bbox.x0) / g.hx())));
        int j0 = std::max(0, static_cast<int>(std::floor((region.y0 - g.bbox.y0) / g.hy())));
        int j1 = std::min(g.ny - 1, static_cast<int>(std::ceil((region.y1 - g.bbox.y0) / g.hy())));
        for (int j = j0; j < j1; ++j)
            for (int i = i0; i < i1; ++i) {
                Cpx mid(g.x(i) + g.hx() / 2, g.y(j) + g.hy() / 2);
                if (mid.real() < region.x0 || mid.real() > region.x1 ||
                    mid.imag() < region.y0 || mid.imag() > region.y1)
                    continue;
                double f = clipped_circle_average(field, mid, eps);
                sum += std::pow(eps, gamma * gamma / 2) * std::exp(gamma * f) *
                       g.hx() * g.hy();
            }
        est.at_eps.push_back(sum);
    }
    est.value = est.at_eps.back();
    est.stable = true;
    for (std::size_t k = 1; k < est.at_eps.size(); ++k) {
        double rel = std::fabs(est.at_eps[k] - est.at_eps[k - 1]) /
                     std::max(1e-300, std::fabs(est.at_eps[k]));
        if (rel > rel_tol) est.stable = false;
    }
    return est;
}

namespace {
double boundary_y(const GridSpec& g, Side side) {
    if (side == SideBottom) return g.bbox.y0;
    if (side == SideTop) return g.bbox.y1;
    throw std::invalid_argument("quantum_length: only horizontal boundaries carry length");
}
} // namespace

double quantum_length(const FieldSample& field, const BoundaryInterval& I,
                      double eps_cells, double gamma) {
    const GridSpec& g = field.grid;
    if (eps_cells < 2.0 - 1e-12)
        throw std::invalid_argument("quantum_length: eps below 2 grid cells");
    if (!(I.b > I.a)) throw std::invalid_argument("quantum_length: degenerate interval");
    double y = boundary_y(g, I.side);
    double eps = eps_cells * std::max(g.hx(), g.hy());
    // global midpoint lattice so that disjoint adjacent intervals add exactly
    int m0 = static_cast<int>(std::ceil((I.a - g.bbox.x0) / g.hx() - 0.5));
    double sum = 0;
    for (int m = std::max(0, m0);; ++m) {
        double x = g.bbox.x0 + (m + 0.5) * g.hx();
        if (x >= I.b || x > g.bbox.x1) break;
        if (x < I.a) continue;
        double f = clipped_circle_average(field, {x, y}, eps);
        sum += std::pow(eps, gamma * gamma / 4) * std::exp(gamma * f / 2) * g.hx();
    }
    return sum;
}

double LengthTable::position_at(double length) const {
    auto it = std::lower_bound(cum.begin(), cum.end(), length);
    if (it == cum.begin()) return pos.front();
    if (it == cum.end()) return pos.back();
    std::size_t k = static_cast<std::size_t>(it - cum.begin());
    double t = (length - cum[k - 1]) / std::max(1e-300, cum[k] - cum[k - 1]);
    return pos[k - 1] + t * (pos[k] - pos[k - 1]);
}

double LengthTable::length_at(double x) const {
    auto it = std::lower_bound(pos.begin(), pos.end(), x);
    if (it == pos.begin()) return cum.front();
    if (it == pos.end()) return cum.back();
    std::size_t k = static_cast<std::size_t>(it - pos.begin());
    double t = (x - pos[k - 1]) / std::max(1e-300, pos[k] - pos[k - 1]);
    return cum[k - 1] + t * (cum[k] - cum[k - 1]);
}

LengthTable cumulative_length_table(const FieldSample& field,
                                    const BoundaryInterval& I, double eps_cells,
                                    double gamma, int subdiv) {
    const GridSpec& g = field.grid;
    double y = boundary_y(g, I.side);
    double eps = eps_cells * std::max(g.hx(), g.hy());
    double dx = g.hx() / subdiv;
    int n = std::max(2, static_cast<int>(std::ceil((I.b - I.a) / dx)));
    dx = (I.b - I.a) / n;
    LengthTable t;
    t.pos.push_back(I.a);
    t.cum.push_back(0.0);
    double acc = 0;
    for (int m = 0; m < n; ++m) {
        double x = I.a + (m + 0.5) * dx;
        double f = clipped_circle_average(field, {x, y}, eps);
        acc += std::pow(eps, gamma * gamma / 4) * std::exp(gamma * f / 2) * dx;
        t.pos.push_back(I.a + (m + 1) * dx);
        t.cum.push_back(acc);
    }
    return t;
}

// ---------------------------------------------------------------------------

namespace {

// radial part of the thick disk: BM(var 2dt) with drift -(Q-beta), conditioned
// to stay negative; h-transform drift with a Bessel-3 norm step near zero
std::vector<double> conditioned_radial_path(double a, int nsteps, double dt,
                                            Rng& rng) {
    std::vector<double> x(nsteps + 1);
    x[0] = 0.0;
    double g1 = rng.gauss(), g2 = rng.gauss(), g3 = rng.gauss();
    double r = std::sqrt(2 * dt) * std::sqrt(g1 * g1 + g2 * g2 + g3 * g3);
    x[1] = -r;
    double guard = 4.0 * std::sqrt(2 * dt);
    for (int k = 1; k < nsteps; ++k) {
        double cur = x[k];
        if (-cur < guard) {
            double R = -cur;
            double ga = rng.gauss(), gb = rng.gauss(), gc = rng.gauss();
            double nr = std::hypot(R + a * dt + std::sqrt(2 * dt) * ga,
                                   std::hypot(std::sqrt(2 * dt) * gb,
                                              std::sqrt(2 * dt) * gc));
            x[k + 1] = -nr;
        } else {
            double eax = std::exp(a * cur);  // cur < 0 so this stays in (0,1)
            double drift = -a - 2 * a * eax / (1 - eax);
            double nxt = cur + drift * dt + std::sqrt(2 * dt) * rng.gauss();
            if (nxt >= 0) nxt = -1e-12;  // reflected; guard branch handles next step
            x[k + 1] = nxt;
        }
    }
    return x;
}

} // namespace

QuantumSurface sample_disk2_thick(const WeightParams& wp, const GridSpec& grid,
                                  std::uint64_t seed, const DiskOptions& opt) {
    if (wp.W < wp.gamma * wp.gamma / 2)
        throw std::invalid_argument("sample_disk2_thick: W below gamma^2/2, use the thin sampler");
    double a = wp.Q() - wp.beta();
    if (a < 1e-9)
        throw std::invalid_argument(
            "sample_disk2_thick: W = gamma^2/2 gives beta = Q; the drift vanishes and "
            "the conditioning degenerates");
    if (grid.domain != Domain::Strip)
        throw std::invalid_argument("sample_disk2_thick: strip grid required");

    // lateral part of the free strip GFF
    FieldSample h = sample_free_gff(grid, Normalization::ZeroAvgVerticalLine0, seed);
    FieldSample rad, lat;
    radial_lateral_decompose(h, rad, lat);

    // conditioned radial parts, one per direction from x = 0
    Rng rng = make_stream(seed, "qsurface", "disk-radial");
    int ic = static_cast<int>(std::lround((0.0 - grid.bbox.x0) / grid.hx()));
    ic = std::clamp(ic, 0, grid.nx - 1);
    auto right = conditioned_radial_path(a, grid.nx - 1 - ic, grid.hx(), rng);
    auto left = conditioned_radial_path(a, ic, grid.hx(), rng);

    double c = 0, logw = 0;
    if (!opt.force_c_zero) {
        Rng rc = make_stream(seed, "qsurface", "disk-c");
        c = opt.c_floor + rc.exponential(a);
        logw = std::log(wp.gamma / 2) - std::log(a) - a * opt.c_floor;
    }

    QuantumSurface s;
    s.kind = SurfaceKind::Disk2;
    s.gamma = wp.gamma;
    s.field = lat;
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) {
            double x = (i >= ic) ? right[i - ic] : left[ic - i];
            s.field.at(i, j) += x + c;
        }
    s.field.seed = seed;
    s.field.log_weight = logw;
    s.log_weight = logw;
    s.marks = {MarkPoint{{}, -1, true}, MarkPoint{{}, +1, true}};
    BoundaryInterval bottom{SideBottom, grid.bbox.x0, grid.bbox.x1};
    BoundaryInterval top{SideTop, grid.bbox.x0, grid.bbox.x1};
    s.arc_lengths["left"] = quantum_length(s.field, bottom, 2.0, wp.gamma);
    s.arc_lengths["right"] = quantum_length(s.field, top, 2.0, wp.gamma);
    return s;
}

GridSpec default_bead_grid(const WeightParams& bead, const ThinChainOptions& opt) {
    double a = bead.Q() - bead.beta();
    double T = std::clamp(10.0 + 24.0 / std::max(0.05, bead.gamma * a), 20.0, 90.0);
    int nx = opt.bead_nx > 0 ? opt.bead_nx
                             : std::clamp(static_cast<int>(8 * T), 160, 720);
    GridSpec g = make_strip_grid(nx, std::max(8, opt.bead_ny), T);
    return g;
}

const std::vector<std::pair<double, double>>& bead_length_library(
    const WeightParams& bead, const GridSpec& grid, int size, std::uint64_t seed) {
    struct Key {
        double W, gamma;
        int nx, ny;
        long T;
        bool operator<(const Key& o) const {
            return std::tie(W, gamma, nx, ny, T) < std::tie(o.W, o.gamma, o.nx, o.ny, o.T);
        }
    };
    static std::map<Key, std::vector<std::pair<double, double>>> cache;
    static std::mutex mtx;
    Key key{bead.W, bead.gamma, grid.nx, grid.ny, std::lround(grid.bbox.x1 * 1e6)};
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::vector<std::pair<double, double>> lib;
    lib.reserve(size);
    DiskOptions opt;
    opt.force_c_zero = true;
    for (int k = 0; k < size; ++k) {
        QuantumSurface b = sample_disk2_thick(bead, grid, seed + k, opt);
        lib.emplace_back(b.arc_lengths["left"], b.arc_lengths["right"]);
    }
    return cache.emplace(key, std::move(lib)).first->second;
}

QuantumSurface sample_thin_chain(const WeightParams& wp, ChainMode mode,
                                 double horizon, std::uint64_t seed,
                                 const ThinChainOptions& opt) {
    double g2 = wp.gamma * wp.gamma;
    if (!(wp.W > 0 && wp.W < g2 / 2))
        throw std::invalid_argument("sample_thin_chain: W out of (0, gamma^2/2)");
    if (!(horizon > 0)) throw std::invalid_argument("sample_thin_chain: nonpositive horizon");

    WeightParams bead{g2 - wp.W, wp.gamma};
    double ab = bead.Q() - bead.beta();
    double c_floor;
    if (opt.c_floor != 0) {
        c_floor = opt.c_floor;
    } else {
        c_floor = (wp.gamma / wp.W) * std::log(opt.length_bias_target);
        // cap the bead intensity at ~2e5 per unit label; the realized length
        // bias e^{(W/gamma) c_floor} is then larger than the target and the
        // caller can read it off from these options
        double cap = -std::log(2e5 * 2 * ab / wp.gamma) / ab;
        c_floor = std::max(c_floor, cap);
    }
    GridSpec bgrid = default_bead_grid(bead, opt);
    const auto& lib = bead_length_library(bead, bgrid, opt.library_size);

    QuantumSurface s;
    s.kind = SurfaceKind::ThinChain;
    s.gamma = wp.gamma;
    s.log_weight = 0;

    Rng rng = make_stream(seed, "qsurface", "chain");
    double T = horizon;
    if (mode == ChainMode::Disk) {
        T = rng.uniform(0, horizon);
        double f = 1.0 - 2.0 * wp.W / g2;
        s.log_weight += std::log(horizon) - 2.0 * std::log(f);
    }

    // Poisson point process on [0, T] x {bead measure above c_floor}
    double mass = (wp.gamma / 2) * std::exp(-ab * c_floor) / ab;
    std::uint64_t n = rng.poisson(T * mass);
    std::vector<double> labels(n);
    for (auto& u : labels) u = rng.uniform(0, T);
    std::sort(labels.begin(), labels.end());

    double total_l = 0, total_r = 0;
    s.beads.reserve(n);
    for (std::uint64_t k = 0; k < n; ++k) {
        Bead b;
        b.label = labels[k];
        b.c = c_floor + rng.exponential(ab);
        double scale = std::exp(wp.gamma * b.c / 2);
        if (b.c >= opt.render_floor) {
            DiskOptions dopt;
            dopt.force_c_zero = true;
            QuantumSurface shape = sample_disk2_thick(
                bead, bgrid, make_stream(seed, "qsurface", "bead-field", k).next_u64(),
                dopt);
            for (double& v : shape.field.values) v += b.c;
            b.field = shape.field;
            b.left_len = shape.arc_lengths["left"] * scale;
            b.right_len = shape.arc_lengths["right"] * scale;
        } else {
            const auto& pick = lib[rng.next_u64() % lib.size()];
            b.left_len = pick.first * scale;
            b.right_len = pick.second * scale;
        }
        total_l += b.left_len;
        total_r += b.right_len;
        s.beads.push_back(std::move(b));
    }
    s.arc_lengths["left"] = total_l;
    s.arc_lengths["right"] = total_r;
    s.marks = {MarkPoint{{}, -1, true}, MarkPoint{{}, +1, true}};
    return s;
}

// ---------------------------------------------------------------------------

namespace {

// cyclic boundary coordinate: s in [0,2), bottom = [0,1) left-to-right,
// top = [1,2) right-to-left; the chart ends sit at s = 0 (left) and 1 (right)
double mark_s(const GridSpec& g, const MarkPoint& m) {
    double span = g.bbox.x1 - g.bbox.x0;
    if (m.inf_end == -1) return 0.0;
    if (m.inf_end == +1) return 1.0;
    double y = m.p.imag();
    if (std::fabs(y - g.bbox.y0) < 1e-9)
        return (m.p.real() - g.bbox.x0) / span;
    return 1.0 + (g.bbox.x1 - m.p.real()) / span;
}

std::vector<BoundaryInterval> arc_between(const GridSpec& g, double s0, double s1) {
    // the arc from s0 to s1 walking forward cyclically
    std::vector<BoundaryInterval> out;
    double span = g.bbox.x1 - g.bbox.x0;
    double s = s0;
    double remain = s1 - s0;
    if (remain <= 0) remain += 2.0;
    while (remain > 1e-12) {
        double edge = (s < 1.0) ? 1.0 : 2.0;
        double seg = std::min(remain, edge - s);
        if (s < 1.0) {
            out.push_back({SideBottom, g.bbox.x0 + s * span,
                           g.bbox.x0 + (s + seg) * span});
        } else {
            out.push_back({SideTop, g.bbox.x1 - (s + seg - 1.0) * span,
                           g.bbox.x1 - (s - 1.0) * span});
        }
        s += seg;
        if (s >= 2.0) s -= 2.0;
        remain -= seg;
    }
    return out;
}

double arc_quantum_length(const FieldSample& rep, double gamma,
                          const std::vector<BoundaryInterval>& pieces) {
    double total = 0;
    for (const auto& I : pieces)
        if (I.b - I.a > 1e-12) total += quantum_length(rep, I, 2.0, gamma);
    return total;
}

Insertion vertex_insertion(const GridSpec& g, const MarkPoint& m, double charge) {
    Insertion ins;
    ins.charge = charge;
    ins.boundary = true;
    if (m.inf_end == +1) {
        ins.at_infinity = true;
        ins.z = {1, 0};
    } else if (m.inf_end == -1) {
        ins.at_infinity = false;
        ins.z = {0, 0};
    } else {
        ins.z = chart_to_domain(g, m.p);
    }
    return ins;
}

} // namespace

QuantumSurface sample_triangle_at(double W1, double W2, double W3, double gamma,
                                  const std::array<MarkPoint, 3>& vertices,
                                  const GridSpec& grid, std::uint64_t seed,
                                  const TriangleOptions& opt) {
    double g2 = gamma * gamma;
    double Ws[3] = {W1, W2, W3};
    double Q = gamma / 2 + 2 / gamma;
    LiouvilleSpec spec;
    spec.grid = grid;
    spec.gamma = gamma;
    spec.c_lo = opt.c_lo;
    spec.c_hi = opt.c_hi;
    double logw = 0;
    for (int i = 0; i < 3; ++i) {
        if (std::fabs(Ws[i] - g2 / 2) < 1e-12)
            throw std::invalid_argument("sample_triangle: W = gamma^2/2 is excluded");
        if (Ws[i] < g2 / 2)
            throw std::invalid_argument("sample_triangle_at: thick weights only");
        double beta = gamma + (2 - Ws[i]) / gamma;
        spec.insertions.push_back(vertex_insertion(grid, vertices[i], beta));
        logw -= std::log(Q - beta);
    }
    FieldSample phi = sample_liouville(spec, seed);

    QuantumSurface s;
    s.kind = SurfaceKind::Triangle;
    s.gamma = gamma;
    s.field = internal_representative(phi, gamma);
    s.field.log_weight = phi.log_weight + logw;
    s.log_weight = s.field.log_weight;
    s.marks = {vertices[0], vertices[1], vertices[2]};

    double sv[3] = {mark_s(grid, vertices[0]), mark_s(grid, vertices[1]),
                    mark_s(grid, vertices[2])};
    s.arc_lengths["arc12"] =
        arc_quantum_length(s.field, gamma, arc_between(grid, sv[0], sv[1]));
    s.arc_lengths["arc23"] =
        arc_quantum_length(s.field, gamma, arc_between(grid, sv[1], sv[2]));
    s.arc_lengths["arc31"] =
        arc_quantum_length(s.field, gamma, arc_between(grid, sv[2], sv[0]));
    return s;
}

QuantumSurface sample_triangle(double W1, double W2, double W3, double gamma,
                               const GridSpec& grid, std::uint64_t seed,
                               const TriangleOptions& opt) {
    double g2 = gamma * gamma;
    double Ws[3] = {W1, W2, W3};
    for (double w : Ws) {
        if (!(w > 0)) throw std::invalid_argument("sample_triangle: weights must be positive");
        if (std::fabs(w - g2 / 2) < 1e-12)
            throw std::invalid_argument("sample_triangle: W = gamma^2/2 is excluded");
    }
    double Wt[3];
    bool thin[3];
    for (int i = 0; i < 3; ++i) {
        thin[i] = Ws[i] < g2 / 2;
        Wt[i] = std::max(Ws[i], g2 - Ws[i]);
    }
    // vertices (infinity, 0, 1): v1 at the right chart end, v2 at the left,
    // v3 at the bottom point x = 0
    std::array<MarkPoint, 3> verts = {MarkPoint{{}, +1, true},
                                      MarkPoint{{}, -1, true},
                                      MarkPoint{{0.0, grid.bbox.y0}, 0, true}};
    QuantumSurface s = sample_triangle_at(Wt[0], Wt[1], Wt[2], gamma, verts, grid,
                                          seed, opt);

    // thin vertices get independent weight-W thin disks attached
    const char* arc_before[3] = {"arc31", "arc12", "arc23"};
    const char* arc_after[3] = {"arc12", "arc23", "arc31"};
    for (int i = 0; i < 3; ++i) {
        if (!thin[i]) continue;
        WeightParams wp{Ws[i], gamma};
        QuantumSurface chain =
            sample_thin_chain(wp, ChainMode::Disk, opt.chain_horizon,
                              make_stream(seed, "qsurface", "triangle-chain", i).next_u64(),
                              opt.chain);
        s.log_weight += std::log(1.0 - 2.0 * Ws[i] / g2) + chain.log_weight;
        s.arc_lengths[arc_before[i]] += chain.arc_lengths["left"];
        s.arc_lengths[arc_after[i]] += chain.arc_lengths["right"];
        s.arc_lengths["chain" + std::to_string(i + 1) + "_left"] =
            chain.arc_lengths["left"];
        s.arc_lengths["chain" + std::to_string(i + 1) + "_right"] =
            chain.arc_lengths["right"];
        for (auto& b : chain.beads) s.beads.push_back(std::move(b));
    }
    s.field.log_weight = s.log_weight;
    return s;
}

QuantumSurface sample_m11(double W, double Wp, double gamma, const GridSpec& grid,
                          std::uint64_t seed, double c_lo, double c_hi) {
    double g2 = gamma * gamma;
    if (!(W > 0)) throw std::invalid_argument("sample_m11: W must be positive");
    if (!(Wp > g2 / 2))
        throw std::invalid_argument("sample_m11: W' must exceed gamma^2/2");
    double Q = gamma / 2 + 2 / gamma;
    double alpha = Q - W / (2 * gamma);
    double beta = gamma + (2 - Wp) / gamma;

    LiouvilleSpec spec;
    spec.grid = grid;
    spec.gamma = gamma;
    spec.c_lo = c_lo;
    spec.c_hi = c_hi;
    spec.insertions.push_back(Insertion{alpha, {0, 1}, false, false});  // (alpha, i)
    spec.insertions.push_back(Insertion{beta, {0, 0}, true, false});    // (beta, 0)
    FieldSample phi = sample_liouville(spec, seed);

    QuantumSurface s;
    s.kind = SurfaceKind::M11;
    s.gamma = gamma;
    s.field = internal_representative(phi, gamma);
    s.field.log_weight = phi.log_weight - std::log(Q - beta);
    s.log_weight = s.field.log_weight;
    s.marks = {MarkPoint{chart_from_domain(grid, {0, 1}), 0, false},
               MarkPoint{{}, -1, true}};
    return s;
}

QuantumSurface add_marked_point(const QuantumSurface& disk, DiskSide side,
                                std::uint64_t seed) {
    QuantumSurface out = disk;
    Rng rng = make_stream(seed, "qsurface", "mark");
    if (disk.kind == SurfaceKind::Disk2) {
        const GridSpec& g = disk.field.grid;
        BoundaryInterval I{side == DiskSide::Left ? SideBottom : SideTop,
                           g.bbox.x0, g.bbox.x1};
        LengthTable t = cumulative_length_table(disk.field, I, 2.0, disk.gamma);
        double L = t.total();
        if (!(L > 0)) throw std::runtime_error("add_marked_point: zero-length side");
        double lp = rng.uniform() * L;
        double x = t.position_at(lp);
        double y = I.side == SideBottom ? g.bbox.y0 : g.bbox.y1;
        out.marks.push_back(MarkPoint{{x, y}, 0, true});
        out.log_weight += std::log(L);
        out.arc_lengths["mark_before"] = lp;
        out.arc_lengths["mark_after"] = L - lp;
        return out;
    }
    if (disk.kind == SurfaceKind::ThinChain) {
        double L = 0;
        for (const auto& b : disk.beads)
            L += side == DiskSide::Left ? b.left_len : b.right_len;
        if (!(L > 0)) throw std::runtime_error("add_marked_point: zero-length side");
        double u = rng.uniform() * L;
        double acc = 0;
        int pick = -1;
        for (std::size_t k = 0; k < disk.beads.size(); ++k) {
            double bl = side == DiskSide::Left ? disk.beads[k].left_len
                                               : disk.beads[k].right_len;
            if (u <= acc + bl) {
                pick = static_cast<int>(k);
                break;
            }
            acc += bl;
        }
        if (pick < 0) pick = static_cast<int>(disk.beads.size()) - 1;
        out.distinguished_bead = pick;
        out.log_weight += std::log(L);
        out.arc_lengths["mark_before"] = u;
        out.arc_lengths["mark_after"] = L - u;
        return out;
    }
    throw std::invalid_argument("add_marked_point: disk2 or thin_chain required");
}

ConditionedStream::ConditionedStream(
    std::function<QuantumSurface(std::uint64_t)> sampler,
    std::function<double(const QuantumSurface&)> arc, double target, double delta,
    std::uint64_t seed)
    : sampler_(std::move(sampler)), arc_(std::move(arc)), target_(target),
      delta_(delta), seed_(seed) {
    if (!(delta > 0)) throw std::invalid_argument("condition_length: delta must be positive");
}

double ConditionedStream::acceptance_rate() const {
    return proposals_ ? static_cast<double>(accepted_) / proposals_ : 0.0;
}

QuantumSurface ConditionedStream::next() {
    while (true) {
        QuantumSurface s = sampler_(seed_++);
        ++proposals_;
        if (std::fabs(arc_(s) - target_) < delta_) {
            ++accepted_;
            s.log_weight -= std::log(2 * delta_);
            return s;
        }
        if (proposals_ >= 100000 && accepted_ < proposals_ / 10000)
            throw std::runtime_error(
                "condition_length: acceptance rate below 1e-4 over 1e5 proposals");
    }
}

} // namespace lqg
