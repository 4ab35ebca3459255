#pragma once

// Batch pipeline behind the CLI subcommands: each stage takes a validated
// RunConfig and writes one CSV (RFC-4180, 17 significant digits, config-hash
// comment line).  The sweep dispatches points to a bounded worker pool, one
// solver session per worker, and writes rows in deterministic order.

#include <string>

#include "qkd/config.hpp"

namespace qkd {

// q per phase model (and the visibility they reproduce).
void run_characterise(const RunConfig& cfg, const std::string& out);

// Honest-channel statistics for every sweep distance, signal and intensity.
void run_simulate(const RunConfig& cfg, const std::string& out);

// Certified yield intervals for each retained source block at one distance.
void run_decoy(const RunConfig& cfg, double distance_km,
               const std::string& out, int jobs);

// Certified key-rate points for every configured q at one distance.
void run_keyrate(const RunConfig& cfg, double distance_km,
                 const std::string& out, int jobs);

// Full (q, distance) grid.
void run_sweep(const RunConfig& cfg, const std::string& out, int jobs);

// Shared with tests: compute the sweep grid without writing a file.
std::vector<KeyRatePoint> sweep_points(const RunConfig& cfg,
                                       const std::vector<double>& qs,
                                       const std::vector<double>& distances,
                                       int jobs);

}  // namespace qkd
