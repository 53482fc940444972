#pragma once

#include <cstdint>
#include <vector>

#include "rwre/environment.hpp"

namespace rwre {

// Moves are stored compactly: 0 = step to the parent, j = step to child j.
struct Trajectory {
  std::int64_t horizon = 0;
  std::vector<std::uint8_t> moves;
  std::vector<std::int64_t> return_times;  // n >= 1 with X_n = root
  std::int64_t final_depth = 0;

  // X_0..X_T; intended for short horizons.
  std::vector<VertexPath> positions() const;
  std::vector<std::int64_t> depths() const;
};

struct WalkOptions {
  bool annealed = false;       // fresh environment per replica
  bool stop_at_return = false;
};

// Environment seed seen by a replica: the master seed (quenched) or a
// replica-specific seed (annealed).
std::uint64_t replica_environment_seed(const EnvironmentSpec& spec, std::uint64_t replica_seed, bool annealed);

Trajectory run_walk(const EnvironmentSpec& spec, std::uint64_t replica_seed, std::int64_t horizon,
                    const WalkOptions& opt = {});

struct ReplicaRecord {
  std::uint64_t replica = 0;
  bool returned = false;
  std::int64_t first_return = -1;
  std::int64_t final_depth = 0;
};

struct RecurrenceStats {
  std::size_t replicas = 0;
  std::int64_t horizon = 0;
  bool annealed = false;
  std::size_t returned_count = 0;
  double return_fraction = 0.0;
  double mean_return_time = 0.0;  // over returned replicas
  double depth_q10 = 0.0, depth_median = 0.0, depth_q90 = 0.0;
  double depth_slope = 0.0;       // least squares of mean depth against time
  std::vector<ReplicaRecord> records;
};

RecurrenceStats recurrence_experiment(const EnvironmentSpec& spec, std::size_t replicas, std::int64_t horizon,
                                      bool annealed = false, unsigned workers = 1);

// Truncated first-return statistics at several horizons, from one set of
// replicas run to the largest horizon (stopped at first return).
struct ReturnProfileRow {
  std::int64_t horizon;
  double return_fraction;
  double mean_return_time;
};
std::vector<ReturnProfileRow> return_profile(const EnvironmentSpec& spec, std::size_t replicas,
                                             const std::vector<std::int64_t>& horizons, bool annealed = false,
                                             unsigned workers = 1);

struct StationarityReport {
  int depth = 0;
  std::size_t interior_vertices = 0;
  std::size_t edges = 0;
  double max_abs_residual = 0.0;       // |sum_u pi[u] P(u,v) - pi[v]|
  double max_rel_residual = 0.0;       // same divided by pi[v]
  double max_balance_abs = 0.0;        // |pi[u] P(u,v) - pi[v] P(v,u)|
  double max_balance_rel = 0.0;
  double max_pi = 0.0;
};

// Invariant measure pi[v] = xi[v] / p_{v,0}, pi[root] = 1, on the full tree to
// `depth`; residuals over interior vertices and all edges.
StationarityReport stationarity_check(const EnvironmentSpec& spec, int depth);

struct CutsetEvidence {
  double w = 0.0;
  std::vector<int> depths;
  std::vector<double> level_sums;  // sum_{|v| = n} w^n xi[v]
  double minimum = 0.0;
};

CutsetEvidence cutset_evidence(const EnvironmentSpec& spec, double w, const std::vector<int>& depths);

}  // namespace rwre
