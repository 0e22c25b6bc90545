#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "prmrl/geometry.hpp"
#include "prmrl/rng.hpp"

namespace prmrl {

enum class Cell : std::uint8_t { Free = 0, Occupied = 1, Unknown = 2 };

/// Integer cell index. col grows with +x, row grows with +y.
struct CellIndex {
  int col = 0;
  int row = 0;
  friend bool operator==(const CellIndex&, const CellIndex&) = default;
};

/// Rasterized workspace. Cell (0, 0) has its lower-left corner at `origin`.
/// Unknown cells count as blocked for every query.
class OccupancyGrid {
 public:
  using CellArray = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  OccupancyGrid() = default;
  OccupancyGrid(int width, int height, double resolution, Point2 origin, Cell fill = Cell::Free);

  /// Builds a grid from text rows listed top (max y) to bottom:
  /// '#' occupied, '?' unknown, anything else free.
  static OccupancyGrid from_rows(const std::vector<std::string>& rows, double resolution,
                                 Point2 origin = Point2::Zero());

  int width() const { return static_cast<int>(cells_.cols()); }
  int height() const { return static_cast<int>(cells_.rows()); }
  double resolution() const { return resolution_; }
  const Point2& origin() const { return origin_; }
  double width_m() const { return width() * resolution_; }
  double height_m() const { return height() * resolution_; }

  bool contains(const CellIndex& c) const {
    return c.col >= 0 && c.row >= 0 && c.col < width() && c.row < height();
  }
  bool contains(const Point2& p) const;

  Cell at(const CellIndex& c) const { return static_cast<Cell>(cells_(c.row, c.col)); }
  void set(const CellIndex& c, Cell v) { cells_(c.row, c.col) = static_cast<std::uint8_t>(v); }
  bool blocked(const CellIndex& c) const { return at(c) != Cell::Free; }

  /// Containing cell for points on the map rectangle (upper edges clamp in).
  std::optional<CellIndex> world_to_cell(const Point2& p) const;
  Point2 cell_center(const CellIndex& c) const;

  /// Marks every cell whose center lies inside the axis-aligned box.
  void fill_box(const Point2& lo, const Point2& hi, Cell v = Cell::Occupied);

  std::size_t count(Cell v) const;
  const CellArray& cells() const { return cells_; }

  friend bool operator==(const OccupancyGrid& a, const OccupancyGrid& b) {
    return a.resolution_ == b.resolution_ && a.origin_ == b.origin_ &&
           a.cells_.rows() == b.cells_.rows() && a.cells_.cols() == b.cells_.cols() &&
           (a.cells_ == b.cells_).all();
  }

 private:
  double resolution_ = 1.0;
  Point2 origin_ = Point2::Zero();
  CellArray cells_;
};

/// Thresholds and placement read from a map metadata file.
struct MapMetadata {
  double resolution = 0.05;
  Point2 origin = Point2::Zero();
  int occupied_threshold = 50;  // pixel <= this -> occupied
  int free_threshold = 200;     // pixel >= this -> free
};

/// Reads a binary PGM (P5, maxval 255) plus `key: value` metadata.
OccupancyGrid load_map(const std::filesystem::path& image_path, const std::filesystem::path& meta_path);
OccupancyGrid grid_from_pixels(const Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>& image,
                               const MapMetadata& meta);
MapMetadata parse_map_metadata(const std::string& text);

/// Writes the grid as P5 (free 254, occupied 0, unknown 205) plus metadata.
void save_map(const OccupancyGrid& grid, const std::filesystem::path& image_path,
              const std::filesystem::path& meta_path);

/// Distance in meters from each cell center to the nearest blocked cell
/// center (exact Euclidean transform). Infinity when nothing is blocked.
Eigen::ArrayXXd clearance_field(const OccupancyGrid& grid);

/// Obstacles dilated by a radius so a disc robot reduces to a point.
/// A cell is free iff no blocked base cell center lies within the radius of
/// its own center. Also carries the clearance field used for the dilation.
class InflatedGrid {
 public:
  InflatedGrid(std::shared_ptr<const OccupancyGrid> base, double radius_m);

  const OccupancyGrid& base() const { return *base_; }
  std::shared_ptr<const OccupancyGrid> base_ptr() const { return base_; }
  double radius() const { return radius_; }

  bool free(const CellIndex& c) const { return base_->contains(c) && mask_(c.row, c.col); }
  std::size_t free_cell_count() const { return free_cells_; }
  double free_area() const;

  /// Distance to the nearest blocked cell center, looked up at the containing cell.
  double clearance(const Point2& p) const;
  double clearance(const CellIndex& c) const { return clearance_(c.row, c.col); }
  const Eigen::ArrayXXd& clearance_field() const { return clearance_; }

 private:
  std::shared_ptr<const OccupancyGrid> base_;
  double radius_;
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> mask_;
  Eigen::ArrayXXd clearance_;
  std::size_t free_cells_ = 0;
};

InflatedGrid inflate(const OccupancyGrid& grid, double radius_m);

/// Collision predicate: false off-map, else the inflated mask.
bool is_free(const InflatedGrid& inflated, const Point2& p);

/// Distance along a ray to the first blocked cell boundary (or the map edge),
/// clamped to max_range. Zero when the origin cell is blocked.
double raycast(const OccupancyGrid& grid, const Point2& origin, double angle, double max_range);

/// Same result as raycast(), skipping free space using a clearance field.
double raycast(const InflatedGrid& inflated, const Point2& origin, double angle, double max_range);

/// Plain cell-by-cell traversal (reference for the accelerated path).
double raycast_dda(const OccupancyGrid& grid, const Point2& origin, double angle, double max_range,
                   double start_t = 0.0);

struct LidarConfig {
  double fov = 220.0 * std::numbers::pi / 180.0;
  int n_rays = 64;
  double max_range = 5.0;
};

/// Ray i is cast at heading + fov * (i / (n_rays - 1) - 1/2).
Eigen::VectorXd lidar_scan(const OccupancyGrid& grid, const Pose2& pose, const LidarConfig& cfg = {});
Eigen::VectorXd lidar_scan(const InflatedGrid& inflated, const Pose2& pose, const LidarConfig& cfg = {});
double lidar_ray_angle(const LidarConfig& cfg, int i);

struct GridPath {
  double length_m = 0.0;
  std::vector<CellIndex> cells;
};

/// 8-connected A* over free cells (no corner cutting past blocked cells).
std::optional<GridPath> grid_astar(const InflatedGrid& inflated, const Point2& start, const Point2& goal);
std::optional<double> shortest_feasible_path(const InflatedGrid& inflated, const Point2& start, const Point2& goal);

inline constexpr int kDefaultMaxRejections = 10'000;

/// Uniform point over the free area via rejection sampling on the map rectangle.
Point2 sample_free(const InflatedGrid& inflated, Rng& rng, int max_rejections = kDefaultMaxRejections);

}  // namespace prmrl
