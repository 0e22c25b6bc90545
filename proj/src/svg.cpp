#include <cstdio>
#include <sstream>

#include "prmrl/navigation.hpp"

namespace prmrl {

namespace {
std::string f(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}
}  // namespace

std::string render_svg(const OccupancyGrid& grid, const Roadmap* roadmap, const std::vector<Point2>& waypoints,
                       const std::vector<TrajectorySample>& trajectory) {
  const double w = grid.width_m(), h = grid.height_m();
  const Point2 o = grid.origin();
  // SVG y grows downward; world y grows upward.
  const auto X = [&](double x) { return f(x - o.x()); };
  const auto Y = [&](double y) { return f(h - (y - o.y())); };
  const double res = grid.resolution();

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << f(w) << ' ' << f(h) << "\" width=\""
    << f(w * 40.0) << "\" height=\"" << f(h * 40.0) << "\">\n";
  s << "<rect x=\"0\" y=\"0\" width=\"" << f(w) << "\" height=\"" << f(h) << "\" fill=\"white\"/>\n";
  s << "<g id=\"map\" fill=\"#444\" stroke=\"none\">\n";
  for (int row = 0; row < grid.height(); ++row) {
    int col = 0;
    while (col < grid.width()) {
      if (!grid.blocked({col, row})) {
        ++col;
        continue;
      }
      const int begin = col;
      while (col < grid.width() && grid.blocked({col, row})) ++col;
      s << "<rect x=\"" << f(begin * res) << "\" y=\"" << f(h - (row + 1) * res) << "\" width=\""
        << f((col - begin) * res) << "\" height=\"" << f(res) << "\"/>\n";
    }
  }
  s << "</g>\n";
  if (roadmap) {
    s << "<g id=\"roadmap\" stroke=\"#9ec5ff\" stroke-width=\"0.03\">\n";
    for (const auto& e : roadmap->edges) {
      const Point2& a = roadmap->nodes[e.from];
      const Point2& b = roadmap->nodes[e.to];
      s << "<line x1=\"" << X(a.x()) << "\" y1=\"" << Y(a.y()) << "\" x2=\"" << X(b.x()) << "\" y2=\"" << Y(b.y())
        << "\"/>\n";
    }
    s << "</g>\n";
  }
  if (waypoints.size() >= 2) {
    s << "<g id=\"waypoints\" stroke=\"blue\" stroke-width=\"0.06\" fill=\"blue\">\n";
    for (std::size_t i = 0; i + 1 < waypoints.size(); ++i)
      s << "<line x1=\"" << X(waypoints[i].x()) << "\" y1=\"" << Y(waypoints[i].y()) << "\" x2=\""
        << X(waypoints[i + 1].x()) << "\" y2=\"" << Y(waypoints[i + 1].y()) << "\"/>\n";
    for (const auto& p : waypoints)
      s << "<circle cx=\"" << X(p.x()) << "\" cy=\"" << Y(p.y()) << "\" r=\"0.1\"/>\n";
    s << "</g>\n";
  }
  s << "<polyline id=\"trajectory\" fill=\"none\" stroke=\"black\" stroke-width=\"0.05\" points=\"";
  for (std::size_t i = 0; i < trajectory.size(); ++i)
    s << (i ? " " : "") << X(trajectory[i].pose.x()) << ',' << Y(trajectory[i].pose.y());
  s << "\"/>\n</svg>\n";
  return s.str();
}

}  // namespace prmrl
