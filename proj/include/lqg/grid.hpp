#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lqg {

using Cpx = std::complex<double>;

// Reference domains. Every grid is a rectangle in internal coordinates;
// H, D and C are reached through fixed conformal charts of that rectangle
// (log-strip for H and D, log-cylinder for C), the strip S is native.
enum class Domain { HalfPlane, UnitDisk, Strip, Plane };

std::string domain_tag(Domain d);
Domain domain_from_tag(const std::string& tag);

enum class Bc { Dirichlet, Free };

// Sides of the rectangle, in the order used by boundary flags.
enum Side { SideBottom = 0, SideTop = 1, SideLeft = 2, SideRight = 3 };

struct Rect {
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
};

struct GridSpec {
    Domain domain = Domain::Strip;
    int nx = 0, ny = 0;       // vertex counts, nodes at corners included
    Rect bbox;                // internal coordinates
    Bc bc[4] = {Bc::Free, Bc::Free, Bc::Free, Bc::Free};
    bool periodic_y = false;  // log-cylinder chart for the plane

    double hx() const { return (bbox.x1 - bbox.x0) / (nx - 1); }
    double hy() const {
        return periodic_y ? (bbox.y1 - bbox.y0) / ny
                          : (bbox.y1 - bbox.y0) / (ny - 1);
    }
    double x(int i) const { return bbox.x0 + i * hx(); }
    double y(int j) const { return bbox.y0 + j * hy(); }
    Cpx node(int i, int j) const { return {x(i), y(j)}; }
    int size() const { return nx * ny; }
    bool all_dirichlet() const;
    bool all_free() const;
    void validate() const;  // nx,ny >= 8, sane bbox
};

// Standard grid factories. T is the half-width of the log chart.
GridSpec make_halfplane_grid(int nx, int ny, double T = 8.0);
GridSpec make_disk_grid(int nx, int ny, double T = 8.0);
GridSpec make_strip_grid(int nx, int ny, double T = 8.0);
GridSpec make_plane_grid(int nx, int ny, double T = 8.0);
// plain rectangle (identity chart), Dirichlet by default
GridSpec make_rect_grid(int nx, int ny, Rect box, Bc bc = Bc::Dirichlet);

// Charts: internal rectangle point p <-> point of the reference domain.
Cpx chart_to_domain(const GridSpec& g, Cpx p);
Cpx chart_from_domain(const GridSpec& g, Cpx z);
// log |(d/dp) chart(p)|
double chart_log_deriv(const GridSpec& g, Cpx p);

enum class Normalization { None, ZeroAvgUnitSemicircle, ZeroAvgVerticalLine0 };

// Grid-discretized field. `values` holds the field at the internal nodes,
// row-major with index j*nx + i. The producer decides whether those are
// plain function values (GFF, Liouville snapshots in domain coordinates) or
// the internal-coordinate representative of a quantum surface; see
// qsurface::internal_representative.
struct FieldSample {
    GridSpec grid;
    std::vector<double> values;
    Normalization norm = Normalization::None;
    double log_weight = 0.0;
    std::uint64_t seed = 0;

    double& at(int i, int j) { return values[static_cast<size_t>(j) * grid.nx + i]; }
    double at(int i, int j) const { return values[static_cast<size_t>(j) * grid.nx + i]; }

    // bilinear interpolation at internal point p; throws if outside the bbox
    double interp(Cpx p) const;
    bool inside(Cpx p, double pad_cells = 0.0) const;
};

FieldSample make_constant_field(const GridSpec& g, double c);

// average of the values along the column nearest to x = xline
double column_average(const FieldSample& f, double xline = 0.0);

} // namespace lqg
