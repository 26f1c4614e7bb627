#include "evpr/arena.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "evpr/errors.hpp"

namespace evpr {

void ArenaConfig::validate() const {
    if (width_m <= 0.0 || height_m <= 0.0) throw ConfigError("arena: dimensions must be positive");
    if (grid_cols < 1 || grid_rows < 1) throw ConfigError("arena: grid must be at least 1x1");
}

int label_cell(const Pose& pose, const ArenaConfig& arena) {
    if (pose.x_m < 0.0 || pose.x_m > arena.width_m || pose.y_m < 0.0 || pose.y_m > arena.height_m) {
        throw ConfigError("pose (" + std::to_string(pose.x_m) + "," + std::to_string(pose.y_m) +
                          ") outside arena " + std::to_string(arena.width_m) + "x" +
                          std::to_string(arena.height_m) + " m");
    }
    int col = std::min(static_cast<int>(std::floor(pose.x_m / arena.cell_width())), arena.grid_cols - 1);
    int row = std::min(static_cast<int>(std::floor(pose.y_m / arena.cell_height())), arena.grid_rows - 1);
    return row * arena.grid_cols + col;
}

}  // namespace evpr
