#include "prmrl/gridmap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <tuple>

#include "prmrl/errors.hpp"

namespace prmrl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Felzenszwalb-Huttenlocher lower envelope of parabolas. "Far" cells carry a
// large finite sentinel so the intersection arithmetic stays finite.
constexpr double kFar = 1e20;

void squared_distance_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
                         std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  const auto meet = [&](int q, int p) {
    return ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * q - 2.0 * p);
  };
  for (int q = 1; q < n; ++q) {
    double s = meet(q, v[k]);
    while (s <= z[k]) {
      --k;
      s = meet(q, v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace

OccupancyGrid::OccupancyGrid(int width, int height, double resolution, Point2 origin, Cell fill)
    : resolution_(resolution), origin_(std::move(origin)) {
  if (!(resolution > 0.0)) throw MapError("resolution must be positive");
  if (width <= 0 || height <= 0) throw MapError("grid dimensions must be positive");
  cells_.setConstant(height, width, static_cast<std::uint8_t>(fill));
}

OccupancyGrid OccupancyGrid::from_rows(const std::vector<std::string>& rows, double resolution, Point2 origin) {
  if (rows.empty() || rows.front().empty()) throw MapError("empty grid text");
  const int h = static_cast<int>(rows.size());
  const int w = static_cast<int>(rows.front().size());
  OccupancyGrid g(w, h, resolution, origin);
  for (int i = 0; i < h; ++i) {
    if (static_cast<int>(rows[i].size()) != w) throw MapError("ragged grid text");
    const int row = h - 1 - i;
    for (int col = 0; col < w; ++col) {
      const char ch = rows[i][col];
      g.set({col, row}, ch == '#' ? Cell::Occupied : ch == '?' ? Cell::Unknown : Cell::Free);
    }
  }
  return g;
}

bool OccupancyGrid::contains(const Point2& p) const {
  const Point2 q = p - origin_;
  return q.x() >= 0.0 && q.y() >= 0.0 && q.x() <= width_m() && q.y() <= height_m();
}

std::optional<CellIndex> OccupancyGrid::world_to_cell(const Point2& p) const {
  if (!p.allFinite() || !contains(p)) return std::nullopt;
  const Point2 q = (p - origin_) / resolution_;
  const int col = std::min(static_cast<int>(std::floor(q.x())), width() - 1);
  const int row = std::min(static_cast<int>(std::floor(q.y())), height() - 1);
  return CellIndex{col, row};
}

Point2 OccupancyGrid::cell_center(const CellIndex& c) const {
  return origin_ + resolution_ * Point2(c.col + 0.5, c.row + 0.5);
}

void OccupancyGrid::fill_box(const Point2& lo, const Point2& hi, Cell v) {
  for (int row = 0; row < height(); ++row)
    for (int col = 0; col < width(); ++col) {
      const Point2 c = cell_center({col, row});
      if (c.x() >= lo.x() && c.x() <= hi.x() && c.y() >= lo.y() && c.y() <= hi.y()) set({col, row}, v);
    }
}

std::size_t OccupancyGrid::count(Cell v) const {
  return static_cast<std::size_t>((cells_ == static_cast<std::uint8_t>(v)).count());
}

Eigen::ArrayXXd clearance_field(const OccupancyGrid& grid) {
  const int w = grid.width(), h = grid.height();
  Eigen::ArrayXXd sq(h, w);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) sq(r, c) = grid.blocked({c, r}) ? 0.0 : kFar;

  const int n = std::max(w, h);
  std::vector<double> f, d;
  std::vector<int> v(n + 1);
  std::vector<double> z(n + 2);
  // columns then rows
  for (int c = 0; c < w; ++c) {
    f.assign(h, 0.0);
    d.assign(h, 0.0);
    for (int r = 0; r < h; ++r) f[r] = sq(r, c);
    squared_distance_1d(f, d, v, z);
    for (int r = 0; r < h; ++r) sq(r, c) = d[r];
  }
  for (int r = 0; r < h; ++r) {
    f.assign(w, 0.0);
    d.assign(w, 0.0);
    for (int c = 0; c < w; ++c) f[c] = sq(r, c);
    squared_distance_1d(f, d, v, z);
    for (int c = 0; c < w; ++c) sq(r, c) = d[c];
  }
  return (sq >= 0.5 * kFar).select(kInf, sq.sqrt() * grid.resolution());
}

InflatedGrid::InflatedGrid(std::shared_ptr<const OccupancyGrid> base, double radius_m)
    : base_(std::move(base)), radius_(radius_m) {
  if (!(radius_m >= 0.0)) throw PreconditionError("inflation radius must be >= 0");
  clearance_ = prmrl::clearance_field(*base_);
  // Compare in squared cell units so exact lattice distances are not lost to rounding.
  const double res = base_->resolution();
  const double r_cells = radius_m / res;
  const double limit = r_cells * r_cells + 1e-9;
  mask_.resize(base_->height(), base_->width());
  for (int r = 0; r < base_->height(); ++r)
    for (int c = 0; c < base_->width(); ++c) {
      const double dc = clearance_(r, c) / res;
      const bool ok = !base_->blocked({c, r}) && dc * dc > limit;
      mask_(r, c) = ok;
      free_cells_ += ok ? 1 : 0;
    }
}

double InflatedGrid::free_area() const {
  const double res = base_->resolution();
  return static_cast<double>(free_cells_) * res * res;
}

double InflatedGrid::clearance(const Point2& p) const {
  const auto c = base_->world_to_cell(p);
  return c ? clearance_(c->row, c->col) : 0.0;
}

InflatedGrid inflate(const OccupancyGrid& grid, double radius_m) {
  return InflatedGrid(std::make_shared<const OccupancyGrid>(grid), radius_m);
}

bool is_free(const InflatedGrid& inflated, const Point2& p) {
  const auto c = inflated.base().world_to_cell(p);
  return c && inflated.free(*c);
}

namespace {

struct Traversal {
  const OccupancyGrid* grid;
  Point2 origin;
  double dx, dy;
  int col = 0, row = 0;

  // Crossing distances are recomputed from the cell index, so a traversal
  // restarted mid-ray lands on the same values as an uninterrupted one.
  double next_x() const {
    if (dx == 0.0) return kInf;
    const double bx = grid->origin().x() + (col + (dx > 0.0 ? 1 : 0)) * grid->resolution();
    return (bx - origin.x()) / dx;
  }
  double next_y() const {
    if (dy == 0.0) return kInf;
    const double by = grid->origin().y() + (row + (dy > 0.0 ? 1 : 0)) * grid->resolution();
    return (by - origin.y()) / dy;
  }
  bool place(double t) {
    const Point2 p = origin + t * Point2(dx, dy);
    const Point2 q = (p - grid->origin()) / grid->resolution();
    col = static_cast<int>(std::floor(q.x()));
    row = static_cast<int>(std::floor(q.y()));
    return grid->contains(CellIndex{col, row});
  }
  // Advances into the next cell; returns the crossing distance.
  double advance() {
    const double tx = next_x(), ty = next_y();
    if (tx < ty) {
      col += dx > 0.0 ? 1 : -1;
      return tx;
    }
    row += dy > 0.0 ? 1 : -1;
    return ty;
  }
};

double trace(const OccupancyGrid& grid, const Eigen::ArrayXXd* clearance, const Point2& origin, double angle,
             double max_range, double start_t) {
  if (!(max_range > 0.0)) throw PreconditionError("raycast max_range must be positive");
  const auto oc = grid.world_to_cell(origin);
  if (!oc || grid.blocked(*oc)) return 0.0;
  Traversal tr{&grid, origin, std::cos(angle), std::sin(angle)};
  tr.col = oc->col;
  tr.row = oc->row;
  if (start_t > 0.0) {
    if (start_t >= max_range) return max_range;
    if (!tr.place(start_t)) {
      tr.col = oc->col;
      tr.row = oc->row;
    }
  }
  const double res = grid.resolution();
  const double slack = res * std::sqrt(2.0);
  double t = start_t;
  for (;;) {
    if (clearance) {
      const double safe = (*clearance)(tr.row, tr.col) - slack;
      if (safe > 2.0 * res && t + safe < max_range) {
        Traversal probe = tr;
        if (probe.place(t + safe)) {
          tr = probe;
          t += safe;
          continue;
        }
      }
    }
    const double crossing = tr.advance();
    if (crossing >= max_range) return max_range;
    t = std::max(t, crossing);
    if (!grid.contains(CellIndex{tr.col, tr.row}) || grid.blocked({tr.col, tr.row})) return crossing;
  }
}

}  // namespace

double raycast_dda(const OccupancyGrid& grid, const Point2& origin, double angle, double max_range, double start_t) {
  return trace(grid, nullptr, origin, angle, max_range, start_t);
}

double raycast(const OccupancyGrid& grid, const Point2& origin, double angle, double max_range) {
  return trace(grid, nullptr, origin, angle, max_range, 0.0);
}

double raycast(const InflatedGrid& inflated, const Point2& origin, double angle, double max_range) {
  return trace(inflated.base(), &inflated.clearance_field(), origin, angle, max_range, 0.0);
}

double lidar_ray_angle(const LidarConfig& cfg, int i) {
  return cfg.fov * (static_cast<double>(i) / (cfg.n_rays - 1) - 0.5);
}

namespace {
template <typename Caster>
Eigen::VectorXd scan_with(const Pose2& pose, const LidarConfig& cfg, Caster&& cast) {
  if (cfg.n_rays < 2) throw PreconditionError("lidar needs at least two rays");
  Eigen::VectorXd out(cfg.n_rays);
  for (int i = 0; i < cfg.n_rays; ++i) out(i) = cast(pose.heading + lidar_ray_angle(cfg, i));
  return out;
}
}  // namespace

Eigen::VectorXd lidar_scan(const OccupancyGrid& grid, const Pose2& pose, const LidarConfig& cfg) {
  return scan_with(pose, cfg, [&](double a) { return raycast(grid, pose.position, a, cfg.max_range); });
}

Eigen::VectorXd lidar_scan(const InflatedGrid& inflated, const Pose2& pose, const LidarConfig& cfg) {
  return scan_with(pose, cfg, [&](double a) { return raycast(inflated, pose.position, a, cfg.max_range); });
}

std::optional<GridPath> grid_astar(const InflatedGrid& inflated, const Point2& start, const Point2& goal) {
  const OccupancyGrid& g = inflated.base();
  const auto s = g.world_to_cell(start);
  const auto e = g.world_to_cell(goal);
  if (!s || !e || !inflated.free(*s) || !inflated.free(*e)) return std::nullopt;
  if (*s == *e) return GridPath{0.0, {*s}};

  const int w = g.width(), h = g.height();
  const auto id = [w](int col, int row) { return static_cast<std::size_t>(row) * w + col; };
  std::vector<double> cost(static_cast<std::size_t>(w) * h, kInf);
  std::vector<std::int64_t> parent(cost.size(), -1);
  std::vector<bool> closed(cost.size(), false);

  using Entry = std::tuple<double, int, int>;  // f, row, col: ties go to smaller (row, col)
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  const auto heuristic = [&](int col, int row) { return std::hypot(col - e->col, row - e->row); };
  cost[id(s->col, s->row)] = 0.0;
  open.emplace(heuristic(s->col, s->row), s->row, s->col);

  static constexpr int kMoves[8][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
  while (!open.empty()) {
    const auto [f, row, col] = open.top();
    open.pop();
    const std::size_t cur = id(col, row);
    if (closed[cur]) continue;
    closed[cur] = true;
    if (col == e->col && row == e->row) break;
    for (const auto& m : kMoves) {
      const int nc = col + m[0], nr = row + m[1];
      if (!inflated.free({nc, nr})) continue;
      const bool diagonal = m[0] != 0 && m[1] != 0;
      if (diagonal && (!inflated.free({col + m[0], row}) || !inflated.free({col, row + m[1]}))) continue;
      const std::size_t nid = id(nc, nr);
      const double c = cost[cur] + (diagonal ? std::numbers::sqrt2 : 1.0);
      if (c < cost[nid]) {
        cost[nid] = c;
        parent[nid] = static_cast<std::int64_t>(cur);
        open.emplace(c + heuristic(nc, nr), nr, nc);
      }
    }
  }
  const std::size_t goal_id = id(e->col, e->row);
  if (cost[goal_id] == kInf) return std::nullopt;
  GridPath path;
  path.length_m = cost[goal_id] * g.resolution();
  for (std::int64_t at = static_cast<std::int64_t>(goal_id); at >= 0; at = parent[at])
    path.cells.push_back({static_cast<int>(at % w), static_cast<int>(at / w)});
  std::reverse(path.cells.begin(), path.cells.end());
  return path;
}

std::optional<double> shortest_feasible_path(const InflatedGrid& inflated, const Point2& start, const Point2& goal) {
  auto p = grid_astar(inflated, start, goal);
  if (!p) return std::nullopt;
  return p->length_m;
}

Point2 sample_free(const InflatedGrid& inflated, Rng& rng, int max_rejections) {
  const OccupancyGrid& g = inflated.base();
  std::uniform_real_distribution<double> ux(g.origin().x(), g.origin().x() + g.width_m());
  std::uniform_real_distribution<double> uy(g.origin().y(), g.origin().y() + g.height_m());
  for (int attempt = 0; attempt <= max_rejections; ++attempt) {
    const double x = ux(rng);
    const double y = uy(rng);
    const Point2 p(x, y);
    if (is_free(inflated, p)) return p;
  }
  throw SamplingExhausted("no free sample after " + std::to_string(max_rejections) + " rejections");
}

}  // namespace prmrl
