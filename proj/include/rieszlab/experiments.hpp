#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rieszlab/glued.hpp"
#include "rieszlab/lp.hpp"
#include "rieszlab/spectral.hpp"

namespace rieszlab {

/// Scripted run with a per-grid-point record table and a verdict derived
/// only from the recorded data and the stated tolerances. Reruns with the
/// same config and seed reproduce the report byte for byte.
struct ExperimentReport {
    enum class Verdict { Pass, Fail, Inconclusive };

    std::string id;
    std::vector<std::pair<std::string, std::string>> params;
    std::vector<std::pair<std::string, double>> tolerances;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    Verdict verdict = Verdict::Inconclusive;
    std::vector<std::string> notes;

    void add_param(std::string key, std::string value);
    void add_param(std::string key, double value);
    std::string verdict_string() const;
    void write_csv(std::ostream& os) const;
};

// ------------------------------------------------------------- utilities

/// Seeded iid-normal field projected to mean zero and normalized in L^2.
ScalarField random_mean_zero_field(const ManifoldPtr& m, std::uint64_t seed,
                                   std::uint64_t counter = 0);

/// Raised-cosine bump over vertex positions [center - halfwidth,
/// center + halfwidth] on a cyclic index range.
Eigen::VectorXd cosine_bump(int size, int center, int halfwidth, bool periodic);

/// Separable field F(x, t) = base(x) * axis(t) on a cylinder.
Eigen::VectorXd tensor_values(const CylinderGraph& c, const Eigen::VectorXd& base_vals,
                              const Eigen::VectorXd& axis_vals);

/// Pieces (cycles crossed with a periodic axis) glued onto a torus-based
/// backbone cylinder at the default sites.
struct PilotGluedConfig {
    std::vector<int> base_n = {16, 16};
    double base_circumference = 6.283185307179586;
    int piece_axis_steps = 64;
    int backbone_n = 16;
    int backbone_axis_steps = 24;
    double spacing = 0.0; // <= 0: per-cylinder default, circumference / n
    int iso_offset = 2;
};
GluedManifold build_pilot_glued(const PilotGluedConfig& cfg);

// ------------------------------------------------------------ experiments

struct CylinderDominationOptions {
    int axis_steps = 24;
    double axis_spacing = 0.0; // <= 0: base circumference / base n
    int restarts = 24;
    int min_axis_steps = 8;    // below this the run is inconclusive
    double slack = 0.02;
};

/// Estimates the Riesz norm on the base and on its cylinder; the cylinder
/// estimate must reach the base one up to the slack.
ExperimentReport exp_cylinder_domination(const ManifoldPtr& base, double p, std::uint64_t seed,
                                    const CylinderDominationOptions& opt = {});

struct RescalingOptions {
    int axis_steps = 64;
    double axis_spacing = 0.4;
    std::vector<double> lambda_grid = {1.0, 0.5, 0.25, 0.125, 0.0625};
    double final_deviation_tol = 0.05;
    int rho_halfwidth = 6;
};

/// Norm of the axis-rescaled base-projected Riesz transform on f (x) rho
/// against the base Riesz norm, over a lambda grid descending to 0.
ExperimentReport exp_rescaling(const ManifoldPtr& base, const ScalarField& f,
                               const Eigen::VectorXd& rho, double p,
                               const RescalingOptions& opt = {});

struct LocalizationOptions {
    std::vector<int> s_grid = {0, 3, 6, 9, 12, 15, 18, 21, 24};
    double final_gap_tol = 0.03;
    int pairing_dictionary = 3;
    std::uint64_t seed = 0;
};

/// Pushes translated copies of F = (piece generator) H into the glued
/// manifold and compares Riesz-transform norms (and duality pairings
/// against a dictionary of compactly supported test fields) with the piece
/// values.
ExperimentReport exp_localization(const GluedManifold& g, int piece_index, const ScalarField& h,
                                  double p, const LocalizationOptions& opt = {});

struct HeatConvergenceOptions {
    std::vector<int> s_grid = {0, 3, 6, 9, 12, 15, 18, 21, 24};
    int probes = 3;
    int band_radius = 1;
    double final_tol = 1e-3;       // of ||F||_inf
    double numeric_floor = 1e-12;  // spectral roundoff allowance, of ||F||_inf
};

/// Checks the coupling inequality |A - B| <= 2 ||F||_inf P(T <= 2 sigma)
/// probe by probe, with Monte Carlo exit probabilities.
ExperimentReport exp_heat_convergence(const GluedManifold& g, int piece_index,
                                      const ScalarField& f, double sigma, int mc_samples,
                                      std::uint64_t seed, const HeatConvergenceOptions& opt = {});

struct SigmaBoundsOptions {
    double sigma_min = 1e-3;
    double sigma_max = 1e3;
    int grid_points = 50;
    double summability_tol = 0.01;
};

/// Verifies the two integrand bounds (Cauchy-Schwarz contraction, and the
/// e^{-1} bound on sigma * generator * semigroup) on a log grid, plus
/// truncation-insensitivity of the dominating envelope.
ExperimentReport exp_sigma_bounds(const CylinderGraph& c, const ScalarField& h,
                                  const ScalarField& g_field, const SigmaBoundsOptions& opt = {});

struct DichotomyOptions {
    double base_circumference = 6.283185307179586;
    int piece_axis_steps = 24;
    int backbone_n = 16;
    int backbone_axis_steps = 24;
    int restarts = 24;
    double slack = 0.02;
};

/// Builds cylinders over the bases, glues them onto a torus backbone, and
/// checks that the glued Riesz norm estimate dominates every piece estimate
/// up to the slack, transporting piece witnesses as ascent starts.
ExperimentReport exp_dichotomy(const std::vector<ManifoldPtr>& bases, double p,
                               std::uint64_t seed, const DichotomyOptions& opt = {});

} // namespace rieszlab
