#include "prmrl/worlds.hpp"

#include <cmath>

#include "prmrl/errors.hpp"

namespace prmrl::worlds {

namespace {

int cells(double meters, double res) { return static_cast<int>(std::lround(meters / res)); }

void wall(OccupancyGrid& g, double x0, double y0, double x1, double y1) {
  g.fill_box({x0, y0}, {x1, y1}, Cell::Occupied);
}

void border(OccupancyGrid& g, double t) {
  const double w = g.width_m(), h = g.height_m();
  wall(g, 0, 0, w, t);
  wall(g, 0, h - t, w, h);
  wall(g, 0, 0, t, h);
  wall(g, w - t, 0, w, h);
}

}  // namespace

OccupancyGrid empty(double width_m, double height_m, double resolution) {
  return OccupancyGrid(cells(width_m, resolution), cells(height_m, resolution), resolution, Point2::Zero());
}

OccupancyGrid split(double width_m, double height_m, double resolution) {
  OccupancyGrid g = empty(width_m, height_m, resolution);
  wall(g, width_m / 2 - 0.15, 0, width_m / 2 + 0.15, height_m);
  return g;
}

OccupancyGrid corridor(double length_m, double width_m, double resolution) {
  const double t = 0.2;
  OccupancyGrid g = empty(length_m, width_m + 2 * t, resolution);
  wall(g, 0, 0, length_m, t);
  wall(g, 0, width_m + t, length_m, width_m + 2 * t);
  return g;
}

OccupancyGrid office(double resolution) {
  OccupancyGrid g = empty(14.0, 17.0, resolution);
  const double t = 0.2;
  border(g, t);
  // Corridor running north-south at x in [6, 8.2]; rooms on both sides.
  wall(g, 5.8, 0, 6.0, 3.0);
  wall(g, 5.8, 4.2, 6.0, 9.5);
  wall(g, 5.8, 10.7, 6.0, 17.0);
  wall(g, 8.2, 0, 8.4, 5.5);
  wall(g, 8.2, 6.7, 8.4, 13.0);
  wall(g, 8.2, 14.2, 8.4, 17.0);
  // Room dividers on the west side with a doorway into each room.
  wall(g, 0, 7.0, 3.0, 7.2);
  wall(g, 4.2, 7.0, 6.0, 7.2);
  wall(g, 0, 12.5, 2.0, 12.7);
  wall(g, 3.2, 12.5, 6.0, 12.7);
  // East side: one large room and a small one.
  wall(g, 8.4, 9.0, 11.0, 9.2);
  wall(g, 12.2, 9.0, 14.0, 9.2);
  // Furniture and pillars.
  wall(g, 1.5, 2.0, 3.5, 3.0);
  wall(g, 10.0, 2.5, 10.6, 3.1);
  wall(g, 11.5, 5.5, 12.8, 6.5);
  wall(g, 2.0, 9.0, 3.0, 10.5);
  wall(g, 10.5, 12.0, 12.0, 14.0);
  wall(g, 7.0, 8.0, 7.2, 8.2);
  return g;
}

OccupancyGrid by_name(const std::string& name, double resolution) {
  if (name == "empty") return empty(20.0, 20.0, resolution);
  if (name == "split") return split(10.0, 10.0, resolution);
  if (name == "corridor") return corridor(20.0, 3.0, resolution);
  if (name == "office") return office(resolution);
  throw PreconditionError("unknown world '" + name + "' (expected empty, split, corridor, office)");
}

}  // namespace prmrl::worlds
