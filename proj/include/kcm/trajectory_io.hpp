#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "kcm/chain.hpp"
#include "kcm/folding.hpp"

namespace kcm {

enum class TrajectoryFormat { kCsv, kJsonLines };

/// Key/value header echoed into every trajectory file (config, seed, mode,
/// bounds, termination). Values are preformatted strings so writers stay
/// byte-deterministic.
using TrajectoryHeader = std::map<std::string, std::string>;

TrajectoryHeader make_trajectory_header(const SimulationConfig& config,
                                        const SimulationResult& result,
                                        const std::string& chain_name);

/// Writes records with 17 significant digits per number; the per-step wall
/// clock is intentionally not serialized so identical runs produce
/// byte-identical files.
void write_trajectory(const std::vector<TrajectoryRecord>& records,
                      const TrajectoryHeader& header,
                      const std::filesystem::path& path, TrajectoryFormat format);

struct TrajectoryFile {
  TrajectoryHeader header;
  std::vector<TrajectoryRecord> records;
};

TrajectoryFile read_trajectory_csv(const std::filesystem::path& path);

void write_xyz_snapshot(const ChainTopology& topology, const KinematicState& state,
                        const std::filesystem::path& path,
                        const std::string& comment = "");

}  // namespace kcm
