#pragma once

namespace evpr {

struct Pose {
    double x_m = 0.0;
    double y_m = 0.0;
    double yaw_rad = 0.0;
};

// Rectangular arena split into an even grid of labeled cells. Cell ids run
// row-major from the origin corner: cell = row*grid_cols + col.
struct ArenaConfig {
    double width_m = 6.0;
    double height_m = 4.0;
    int grid_cols = 4;
    int grid_rows = 4;

    int num_cells() const { return grid_cols * grid_rows; }
    double cell_width() const { return width_m / grid_cols; }
    double cell_height() const { return height_m / grid_rows; }

    void validate() const;
};

// Half-open cells; the top/right arena edge folds into the last row/col.
// Throws for poses outside the arena.
int label_cell(const Pose& pose, const ArenaConfig& arena);

}  // namespace evpr
