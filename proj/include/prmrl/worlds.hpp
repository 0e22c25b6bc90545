#pragma once

#include <string>

#include "prmrl/gridmap.hpp"

/// Synthetic occupancy grids used by tests, benchmarks and the CLI's
/// `make-map` command. None of them are real building maps.
namespace prmrl::worlds {

/// Obstacle-free rectangle.
OccupancyGrid empty(double width_m, double height_m, double resolution = 0.1);

/// Rectangle with a solid wall (no gap) across x = width/2.
OccupancyGrid split(double width_m, double height_m, double resolution = 0.1);

/// Straight corridor of the given free width, walled on both long sides.
OccupancyGrid corridor(double length_m, double width_m, double resolution = 0.1);

/// 14 m x 17 m office-like floor: outer walls, rooms off a corridor,
/// doorways, a few desks and pillars. Stand-in for a small training map.
OccupancyGrid office(double resolution = 0.1);

/// Builds a named world: "empty", "split", "corridor", "office".
OccupancyGrid by_name(const std::string& name, double resolution = 0.1);

}  // namespace prmrl::worlds
