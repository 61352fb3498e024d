#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lqg/grid.hpp"
#include "lqg/liouville.hpp"

namespace lqg {

struct WeightParams {
    double W = 1.0;
    double gamma = 1.0;

    double Q() const { return gamma / 2 + 2 / gamma; }
    double beta() const { return gamma + (2 - W) / gamma; }
    double alpha() const { return Q() - W / (2 * gamma); }
    bool thick() const { return W >= gamma * gamma / 2; }
};

enum class SurfaceKind { Disk2, ThinChain, Triangle, M11, Wedge, Cone };

struct MarkPoint {
    Cpx p;              // internal coordinates when inf_end == 0
    int inf_end = 0;    // -1 / +1: left / right chart end
    bool boundary = true;
};

struct Bead {
    double label = 0;   // Poisson label u; strictly increasing along the chain
    double c = 0;       // radial constant of the bead
    double left_len = 0, right_len = 0;
    std::optional<FieldSample> field;  // rendered internal representative
};

struct BoundaryInterval {
    Side side = SideBottom;
    double a = 0, b = 0;  // internal x range, a < b
};

struct QuantumSurface {
    SurfaceKind kind = SurfaceKind::Disk2;
    double gamma = 1.0;
    FieldSample field;               // internal-coordinate representative
    std::vector<MarkPoint> marks;
    std::vector<Bead> beads;         // thin chains
    int distinguished_bead = -1;     // set by add_marked_point on chains
    std::map<std::string, double> arc_lengths;
    double log_weight = 0;
};

// Adds Q log|chart'| to a field of domain-coordinate values, producing the
// internal-coordinate representative used by the quantum measures.
FieldSample internal_representative(const FieldSample& domain_values, double gamma);

// average over the part of the circle inside the grid (the eps-regularization
// circles of the quantum measures)
double clipped_circle_average(const FieldSample& field, Cpx p, double eps,
                              int min_samples = 64);

struct AreaEstimate {
    double value = 0;
    std::vector<double> at_eps;  // one estimate per schedule entry
    bool stable = false;
};

// Riemann sum of eps^{gamma^2/2} e^{gamma phi_eps} over the region, reported
// at the smallest eps of the schedule (eps in grid cells, decreasing).
AreaEstimate quantum_area(const FieldSample& field, Rect region,
                          const std::vector<double>& eps_cells_schedule,
                          double gamma, double rel_tol = 0.1);

// eps^{gamma^2/4} e^{gamma phi_eps/2} along a boundary interval; quadrature
// at the global cell-midpoint lattice so disjoint unions add exactly.
double quantum_length(const FieldSample& field, const BoundaryInterval& I,
                      double eps_cells, double gamma);

// cumulative length table along an interval at sub-cell resolution
struct LengthTable {
    std::vector<double> pos;  // internal x
    std::vector<double> cum;  // cumulative quantum length, cum[0] = 0
    double total() const { return cum.back(); }
    double position_at(double length) const;  // inverse lookup
    double length_at(double x) const;
};
LengthTable cumulative_length_table(const FieldSample& field,
                                    const BoundaryInterval& I, double eps_cells,
                                    double gamma, int subdiv = 4);

// ---------------------------------------------------------------------------
// Samplers

// Two-pointed thick quantum disk on the strip: conditioned radial part,
// lateral GFF, exponential-tail radial constant above c_floor (the omitted
// c < c_floor carries infinite mass but vanishing size; the truncation is
// reported through the options).
struct DiskOptions {
    double c_floor = -8.0;
    bool force_c_zero = false;  // unit-constant shape draws for the library
};
QuantumSurface sample_disk2_thick(const WeightParams& wp, const GridSpec& grid,
                                  std::uint64_t seed,
                                  const DiskOptions& opt = {});

// cached (left, right) boundary-length pairs of c = 0 bead shapes
const std::vector<std::pair<double, double>>& bead_length_library(
    const WeightParams& bead, const GridSpec& grid, int size = 400,
    std::uint64_t seed = 20240501);

enum class ChainMode { Wedge, Disk };

struct ThinChainOptions {
    double c_floor = 0;        // 0 = auto from the target relative length bias
    double render_floor = 1e9; // beads with c above this carry fields
    double length_bias_target = 1e-3;
    int library_size = 400;
    int bead_nx = 0, bead_ny = 12;  // 0 = auto
};

QuantumSurface sample_thin_chain(const WeightParams& wp, ChainMode mode,
                                 double horizon, std::uint64_t seed,
                                 const ThinChainOptions& opt = {});

GridSpec default_bead_grid(const WeightParams& bead, const ThinChainOptions& opt);

struct TriangleOptions {
    double c_lo = -7, c_hi = 7;
    double chain_horizon = 2.0;
    ThinChainOptions chain;
};

// Quantum triangle with vertices (infinity, 0, 1) carrying (W1, W2, W3); in
// the thin regime the thick core gets weight-max(W,gamma^2-W) vertices and
// thin chains are attached at the thin ones.
QuantumSurface sample_triangle(double W1, double W2, double W3, double gamma,
                               const GridSpec& grid, std::uint64_t seed,
                               const TriangleOptions& opt = {});

// Variant with insertion points at (v1, v2, v3) boundary points of H given as
// MarkPoints (inf_end for the chart ends); thick weights only.
QuantumSurface sample_triangle_at(double W1, double W2, double W3, double gamma,
                                  const std::array<MarkPoint, 3>& vertices,
                                  const GridSpec& grid, std::uint64_t seed,
                                  const TriangleOptions& opt = {});

// One-bulk-one-boundary-point quantum disk (H, phi, i, 0)
QuantumSurface sample_m11(double W, double Wp, double gamma, const GridSpec& grid,
                          std::uint64_t seed, double c_lo = -7, double c_hi = 7);

enum class DiskSide { Left, Right };

// Length-weighted third marked point on the given side; on chains the
// containing bead becomes the distinguished three-pointed component.
QuantumSurface add_marked_point(const QuantumSurface& disk, DiskSide side,
                                std::uint64_t seed);

// Rejection-filtered stream keeping |arc(surface) - target| < delta, with
// log_weight -= log(2 delta) on accepted samples.
class ConditionedStream {
public:
    ConditionedStream(std::function<QuantumSurface(std::uint64_t)> sampler,
                      std::function<double(const QuantumSurface&)> arc,
                      double target, double delta, std::uint64_t seed);
    QuantumSurface next();
    long proposals() const { return proposals_; }
    long accepted() const { return accepted_; }
    double acceptance_rate() const;

private:
    std::function<QuantumSurface(std::uint64_t)> sampler_;
    std::function<double(const QuantumSurface&)> arc_;
    double target_, delta_;
    std::uint64_t seed_;
    long proposals_ = 0, accepted_ = 0;
};

} // namespace lqg
