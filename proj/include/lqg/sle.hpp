#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lqg/grid.hpp"

namespace lqg {

// Boundary force point. Chordal: pos is a point of R, with side = -1/+1
// marking the one-sided seeds 0^- / 0^+ (pos then ignored). Radial: pos is
// the angle on the unit circle; side marks (seed)^- / (seed)^+, i.e. the
// clockwise / counterclockwise neighbors of the seed angle.
struct ForcePoint {
    double rho = 0;
    double pos = 0;
    int side = 0;
};

enum class Engine { Chordal, Radial, WholePlane, ReverseChordal };
enum class StopReason { Horizon, ContinuationThreshold, TargetDisconnected,
                        ForcePointCollision };
std::string stop_tag(StopReason s);

struct SleParams {
    double kappa = 2.0;
    double mu = 0.0;               // radial / whole-plane drift parameter
    std::vector<ForcePoint> forces;
    double horizon = 1.0;          // capacity time
    double dt = 1e-3;
    std::uint64_t seed = 1;
    double seed_angle = -1.5707963267948966;  // radial start, the -i point
    bool noise_off = false;        // deterministic test mode
    bool track_target = false;     // radial: monitor target_angle swallowing
    double target_angle = 0;
};

struct DrivingRecord {
    Engine engine = Engine::Chordal;
    SleParams params;
    std::vector<double> t;                       // increasing, t[0] = 0
    std::vector<double> w;                       // value (chordal) or angle (radial)
    std::vector<std::vector<double>> force_tracks;
    std::vector<double> brown;                   // cumulative Brownian path
    StopReason stop = StopReason::Horizon;
    std::string note;                            // warnings and skip counts

    Cpx u(std::size_t k) const { return std::exp(Cpx(0, w[k])); }  // radial driving
    std::size_t steps() const { return t.size(); }
};

DrivingRecord drive_chordal(const SleParams& params);
DrivingRecord drive_radial(const SleParams& params);
DrivingRecord drive_whole_plane(double kappa, double mu, double rho,
                                double burn_in, double horizon, double dt,
                                std::uint64_t seed);

enum class ReverseStop { Horizon, ForcePointCollision };
DrivingRecord drive_reverse_chordal(double kappa,
                                    const std::vector<ForcePoint>& forces,
                                    ReverseStop stop_rule, double horizon,
                                    double dt, std::uint64_t seed);

// current force configuration; collided means the track sits at the driving
struct ForceState {
    double rho = 0;
    int side = 0;       // -1 left of the driving, +1 right
    bool collided = false;
};
// true iff a colliding side's cumulative weight is <= -2
bool continuation_threshold(const std::vector<ForceState>& state);

// ---------------------------------------------------------------------------
// Curve tracing and driving extraction

struct CurveTrace {
    Domain domain = Domain::HalfPlane;
    std::vector<Cpx> points;
    std::vector<double> cap_times;
};

struct TraceOptions {
    int stride = 1;          // emit a tip every `stride` driving steps
    bool vertical_slit = false;  // chordal fallback discretization
};

CurveTrace trace(const DrivingRecord& rec, const TraceOptions& opt = {});

struct ExtractOptions {
    bool tilted = false;    // chordal: tilted slits inverted by Newton
    double min_height = 0;  // skip polyline points this close to the boundary
    std::vector<Cpx> tracked;  // boundary points carried through the unzips
};

// Inverse operation: sequential conformal unzipping of a simple polyline
// from the boundary; returns piecewise-constant-in-capacity driving.
DrivingRecord extract_driving(const CurveTrace& curve,
                              const ExtractOptions& opt = {});

// log g_t'(0) recomputed from the composed radial flow on a probe point
double radial_capacity_probe(const DrivingRecord& rec, double probe = 1e-7);

// Girsanov reweighting factor exp(mu sqrt(kappa) B_T - mu^2 kappa T / 2)
double girsanov_weight(const DrivingRecord& rec, double mu);

// ---------------------------------------------------------------------------
// Elementary maps (exposed for the welding engine)

// chordal tilted slit: E(z) = (z + p)^{1-alpha} (z - q)^{alpha}
struct TiltedSlit {
    double alpha = 0.5, p = 0, q = 0, base = 0;  // base: absolute position
    static TiltedSlit from_increment(double base, double dw, double dtime);
    Cpx tip() const;
    Cpx forward(Cpx z) const;   // H -> H minus slit, hydrodynamic
    Cpx inverse(Cpx w) const;   // Newton solve
};

// radial constant-driving slit of capacity duration dtime grown from angle
// psi; closed form both ways
struct RadialSlit {
    double psi = 0, dtime = 0;
    Cpx zip(Cpx z) const;     // g-step: D minus slit -> D
    Cpx unzip(Cpx w) const;   // f-step: D -> D minus slit
    Cpx tip() const;          // tip of the slit (pre-step coordinates)
};

// ---------------------------------------------------------------------------
// Files: text header + binary float64 columns, bit-exact on re-read

void write_driving(const std::string& path, const DrivingRecord& rec);
DrivingRecord read_driving(const std::string& path);
void write_curve(const std::string& path, const CurveTrace& curve);
CurveTrace read_curve(const std::string& path);

} // namespace lqg
