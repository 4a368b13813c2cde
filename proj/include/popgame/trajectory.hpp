#pragma once

#include <cstdint>
#include <vector>

namespace popgame {

enum class TrajectoryKind { turn_by_turn, replicator, co2 };

struct TrajectorySample {
    double t = 0.0;      // step index or model time
    double value = 0.0;  // adoption level, or concentration for co2 runs
};

// Ordered samples of one dynamic process. Times are strictly increasing;
// adoption-level kinds keep every value in [0,1]. seed is meaningful for
// stochastic runs only.
struct Trajectory {
    TrajectoryKind kind = TrajectoryKind::turn_by_turn;
    std::uint64_t seed = 0;
    std::vector<TrajectorySample> samples;
};

}  // namespace popgame
