#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "nehari/diagram.hpp"

namespace nehari {

/// Parses a run configuration. Missing keys take their defaults; unknown keys
/// and ill-typed values throw a Config error.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path);

/// Resolved configuration with every default materialized.
std::string config_json(const RunConfig& cfg, int indent = 2);

/// Config, provenance, failures, branch summaries (points without profiles) and events.
std::string bundle_json(const DiagramBundle& b, int indent = 2);

/// "branch_id,point_index,lambda,l2_norm,tag", one row per stored point.
std::string branches_csv(const DiagramBundle& b);

/// One {"lambda_b","kind","branch_index",...} object per line.
std::string events_jsonl(const DiagramBundle& b);

struct AxesConfig {
    std::optional<double> lambda_lo, lambda_hi;
    std::optional<double> norm_lo, norm_hi;
    int width = 800;
    int height = 600;
};

/// (lambda, l2 norm) plot of every branch. Deterministic for a fixed bundle.
std::string emit_svg(const DiagramBundle& b, const AxesConfig& axes = {});

/// File-name stem for a branch id ("main/b1+" -> "main.b1+").
std::string branch_file_stem(const std::string& id);

/// Writes bundle.json, branches.csv, events.jsonl, diagram.svg and
/// profiles/<branch>_<index>.txt under `dir`, creating it if needed.
void write_bundle(const DiagramBundle& b, const std::filesystem::path& dir, const AxesConfig& axes = {});

/// Text file of "x u" rows including both boundary zeros, %.17g.
std::string profile_text(const Mesh& m, const Profile& u, const std::string& header = {});

}  // namespace nehari
