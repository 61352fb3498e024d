#include "lqg/grid.hpp"

#include <cmath>
#include <numbers>

namespace lqg {

namespace {
constexpr double kPi = std::numbers::pi;

// Cayley map f0 : H -> D with f0(i) = 0, f0(0) = 1 (and f0(-1) = -i).
Cpx cayley(Cpx z) { return (Cpx(0, 1) - z) / (Cpx(0, 1) + z); }
Cpx cayley_inv(Cpx w) { return Cpx(0, 1) * (1.0 - w) / (1.0 + w); }
// f0'(z) = -2i/(i+z)^2
Cpx cayley_deriv(Cpx z) {
    Cpx d = Cpx(0, 1) + z;
    return Cpx(0, -2) / (d * d);
}
} // namespace

std::string domain_tag(Domain d) {
    switch (d) {
        case Domain::HalfPlane: return "H";
        case Domain::UnitDisk: return "D";
        case Domain::Strip: return "S";
        case Domain::Plane: return "C";
    }
    return "?";
}

Domain domain_from_tag(const std::string& tag) {
    if (tag == "H") return Domain::HalfPlane;
    if (tag == "D") return Domain::UnitDisk;
    if (tag == "S") return Domain::Strip;
    if (tag == "C") return Domain::Plane;
    throw std::invalid_argument("unknown domain tag: " + tag);
}

bool GridSpec::all_dirichlet() const {
    for (int s = 0; s < 4; ++s)
        if (bc[s] != Bc::Dirichlet) return false;
    return true;
}

bool GridSpec::all_free() const {
    for (int s = 0; s < 4; ++s)
        if (bc[s] != Bc::Free) return false;
    return true;
}

void GridSpec::validate() const {
    if (nx < 8 || ny < 8) throw std::invalid_argument("grid too small (< 8 per side)");
    if (!(bbox.x1 > bbox.x0) || !(bbox.y1 > bbox.y0))
        throw std::invalid_argument("degenerate grid bbox");
}

GridSpec make_halfplane_grid(int nx, int ny, double T) {
    GridSpec g;
    g.domain = Domain::HalfPlane;
    g.nx = nx;
    g.ny = ny;
    g.bbox = {-T, T, 0.0, kPi};
    return g;
}

GridSpec make_disk_grid(int nx, int ny, double T) {
    GridSpec g = make_halfplane_grid(nx, ny, T);
    g.domain = Domain::UnitDisk;
    return g;
}

GridSpec make_strip_grid(int nx, int ny, double T) {
    GridSpec g;
    g.domain = Domain::Strip;
    g.nx = nx;
    g.ny = ny;
    g.bbox = {-T, T, 0.0, kPi};
    return g;
}

GridSpec make_plane_grid(int nx, int ny, double T) {
    GridSpec g;
    g.domain = Domain::Plane;
    g.nx = nx;
    g.ny = ny;
    g.bbox = {-T, T, 0.0, 2.0 * kPi};
    g.periodic_y = true;
    return g;
}

GridSpec make_rect_grid(int nx, int ny, Rect box, Bc bc) {
    GridSpec g;
    g.domain = Domain::Strip;  // identity chart
    g.nx = nx;
    g.ny = ny;
    g.bbox = box;
    for (int s = 0; s < 4; ++s) g.bc[s] = bc;
    return g;
}

Cpx chart_to_domain(const GridSpec& g, Cpx p) {
    switch (g.domain) {
        case Domain::Strip: return p;
        case Domain::HalfPlane: return std::exp(p);
        case Domain::Plane: return std::exp(p);
        case Domain::UnitDisk: return cayley(std::exp(p));
    }
    return p;
}

namespace {
// points of the closed half plane have log-angle in [0, pi]; arg returns -pi
// on the negative real axis, which is the Im = pi edge of the chart
Cpx wrap_halfplane_log(Cpx p) {
    if (p.imag() < 0 && std::fabs(p.imag() + kPi) < 1e-9)
        return {p.real(), kPi};
    return p;
}
} // namespace

Cpx chart_from_domain(const GridSpec& g, Cpx z) {
    switch (g.domain) {
        case Domain::Strip: return z;
        case Domain::HalfPlane: return wrap_halfplane_log(std::log(z));
        case Domain::Plane: {
            Cpx p = std::log(z);
            // wrap the angle into [y0, y1)
            double y = p.imag();
            double span = 2.0 * kPi;
            while (y < g.bbox.y0) y += span;
            while (y >= g.bbox.y0 + span) y -= span;
            return {p.real(), y};
        }
        case Domain::UnitDisk: return wrap_halfplane_log(std::log(cayley_inv(z)));
    }
    return z;
}

double chart_log_deriv(const GridSpec& g, Cpx p) {
    switch (g.domain) {
        case Domain::Strip: return 0.0;
        case Domain::HalfPlane:
        case Domain::Plane: return p.real();
        case Domain::UnitDisk: {
            Cpx ez = std::exp(p);
            return std::log(std::abs(cayley_deriv(ez) * ez));
        }
    }
    return 0.0;
}

double FieldSample::interp(Cpx p) const {
    const GridSpec& g = grid;
    double fx = (p.real() - g.bbox.x0) / g.hx();
    double fy = (p.imag() - g.bbox.y0) / g.hy();
    if (g.periodic_y) {
        double nyd = static_cast<double>(g.ny);
        fy = std::fmod(fy, nyd);
        if (fy < 0) fy += nyd;
    }
    int i = static_cast<int>(std::floor(fx));
    int j = static_cast<int>(std::floor(fy));
    double tx = fx - i, ty = fy - j;
    if (i < 0 || i > g.nx - 1 || (!g.periodic_y && (j < 0 || j > g.ny - 1)))
        throw std::out_of_range("interp: point outside grid");
    if (i == g.nx - 1) { i = g.nx - 2; tx = 1.0; }
    int j1;
    if (g.periodic_y) {
        j = j % g.ny;
        j1 = (j + 1) % g.ny;
    } else {
        if (j == g.ny - 1) { j = g.ny - 2; ty = 1.0; }
        j1 = j + 1;
    }
    double v00 = at(i, j), v10 = at(i + 1, j);
    double v01 = at(i, j1), v11 = at(i + 1, j1);
    return (1 - tx) * (1 - ty) * v00 + tx * (1 - ty) * v10 +
           (1 - tx) * ty * v01 + tx * ty * v11;
}

bool FieldSample::inside(Cpx p, double pad_cells) const {
    const GridSpec& g = grid;
    double px = pad_cells * g.hx(), py = pad_cells * g.hy();
    bool xok = p.real() >= g.bbox.x0 + px && p.real() <= g.bbox.x1 - px;
    bool yok = g.periodic_y ||
               (p.imag() >= g.bbox.y0 + py && p.imag() <= g.bbox.y1 - py);
    return xok && yok;
}

FieldSample make_constant_field(const GridSpec& g, double c) {
    FieldSample f;
    f.grid = g;
    f.values.assign(static_cast<size_t>(g.size()), c);
    return f;
}

double column_average(const FieldSample& f, double xline) {
    const GridSpec& g = f.grid;
    int i = static_cast<int>(std::lround((xline - g.bbox.x0) / g.hx()));
    if (i < 0) i = 0;
    if (i > g.nx - 1) i = g.nx - 1;
    double s = 0;
    for (int j = 0; j < g.ny; ++j) s += f.at(i, j);
    return s / g.ny;
}

} // namespace lqg
