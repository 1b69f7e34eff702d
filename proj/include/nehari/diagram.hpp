#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nehari/bifurcation.hpp"
#include "nehari/seeding.hpp"

namespace nehari {

struct MeshConfig {
    std::string type = "uniform";  // "uniform" | "refined"
    std::size_t n = 500;
    double coarse_dx = 1e-3;
    double fine_dx = 1e-4;
    std::optional<double> pad;     // default 10 fine_dx
};

struct SweepConfig {
    bool enabled = true;
    std::vector<double> lambda_grid{-50.0, -100.0, -200.0, -500.0, -1000.0, -2000.0, -3000.0};
    std::vector<std::string> masks;  // empty: all masks
    bool well_seeds = true;          // also seed bumps inside the wells when eps > 0
    std::vector<double> edge_offsets;  // extra seeds this many decay lengths from well edges
};

struct RunConfig {
    int kappa = 1;
    double h = 0.05;
    double eps = 0.0;
    std::optional<std::vector<double>> centers;
    bool allow_asymmetric = false;
    MeshConfig mesh;
    ContinuationConfig continuation;
    double start_offset = 0.1;        // main branch starts at lambda_1(N) - start_offset
    bool bifurcations = true;
    double bisection_tol = 1e-4;
    std::optional<double> switch_amplitude;
    int max_depth = 2;                // generations of switched branches
    bool switch_unclassified = false; // also switch at branch points that are not symmetry-breaking
    SweepConfig isola_sweep;
    double probe_lambda = -700.0;     // epsilon sweep report
    int profile_stride = 0;           // 0: profiles only at key points
};

enum class BranchRole { Main, Switched, Isola };
const char* to_string(BranchRole r) noexcept;

struct BranchRecord {
    std::string id;
    BranchRole role = BranchRole::Main;
    std::string parent;               // branch id for switched branches
    std::string seed;                 // mask or seed description for isolas
    Branch branch;
    std::vector<std::pair<std::size_t, double>> folds;
};

struct EventRecord {
    std::string branch_id;
    BifurcationEvent event;
};

struct DiagramBundle {
    RunConfig config;
    std::vector<BranchRecord> branches;
    std::vector<EventRecord> events;
    std::map<std::string, std::string> provenance;
    std::vector<std::string> failures;
};

Weight make_weight(const RunConfig& cfg);
Mesh make_mesh(const RunConfig& cfg, const Weight& w);

/// Main branch, bifurcation switching, isola sweep.
DiagramBundle run_diagram(const RunConfig& cfg);

/// Continue from `start` in both directions and join the halves into one
/// branch. A half is cut at its first point for which `joins` holds.
Branch continue_both_ways(const Discretization& d, const SolutionPoint& start, const ContinuationConfig& cfg,
                          const std::function<bool(const SolutionPoint&)>& joins = {});

/// Maximum residual norm over all stored points, recomputed on a fresh discretization.
double validate_bundle(const DiagramBundle& b);

struct SweepReportRow {
    double eps = 0.0;
    double probe_lambda = 0.0;
    int main_peaks = -1;    // peaks of the symmetric main-branch solution at the probe
    int isola_peaks = -1;   // peaks of the isola solution at the probe (-1: none)
    std::optional<double> lambda_t;  // largest fold lambda over isolas
    std::string note;
};

struct EpsilonSweep {
    std::vector<DiagramBundle> bundles;
    std::vector<SweepReportRow> report;
};

EpsilonSweep run_epsilon_sweep(const RunConfig& base, const std::vector<double>& eps_values);

struct HSweepRow {
    double h = 0.0;
    std::optional<double> lambda_b;  // first pitchfork on the main branch
    std::string note;
};

std::vector<HSweepRow> run_h_sweep(const RunConfig& base, const std::vector<double>& h_values);

/// Solutions at `lambda` on the given branch (interpolated and corrected).
std::vector<Profile> solutions_at(const Discretization& d, const Branch& b, double lambda,
                                  const NewtonOptions& opt = {});

/// Largest fold lambda over all isola branches, if any.
std::optional<double> isola_turning_point(const DiagramBundle& b);

/// Worker count from NEHARI_WORKERS (default: hardware concurrency, at least 1).
unsigned worker_count();

}  // namespace nehari
