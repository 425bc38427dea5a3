#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "pmrd/grid.hpp"
#include "pmrd/solver.hpp"

namespace pmrd {

/// One snapshot as stored on disk: header `t,x[,y],u[,v]`, one row per
/// interior node, 17-significant-digit decimals.
struct Snapshot {
  double t = 0.0;
  std::vector<double> u;
  std::vector<double> v;  // empty for scalar runs
};

void write_snapshot_csv(const std::string& path, const Grid& g, const Snapshot& snap);
Snapshot read_snapshot_csv(const std::string& path, const Grid& g);

/// 64-bit FNV-1a of a byte string / file contents.
std::uint64_t fnv1a(const std::string& bytes);
std::uint64_t hash_file(const std::string& path);  // throws if unreadable
std::string hash_hex(std::uint64_t h);

/// Persists a run directory:
///   config.json, steps.jsonl, snapshots/snap_NNNN.csv, snapshots/index.csv,
///   manifest.json (config hash + per-file hashes, written last).
void save_run(const std::string& dir, const nlohmann::json& config, const Trajectory& traj,
              const Grid& g);

/// Recomputes file hashes against manifest.json.
/// Returns the empty string when intact, else a description of the mismatch.
std::string verify_run(const std::string& dir);

/// Reloads trajectory data (snapshots + step records) from a run directory.
struct LoadedRun {
  nlohmann::json config;
  Trajectory traj;
  Grid grid;
};
LoadedRun load_run(const std::string& dir);

/// Combined hash over every file in the manifest (order-independent of
/// directory iteration; used for determinism checks).
std::string run_fingerprint(const std::string& dir);

}  // namespace pmrd
