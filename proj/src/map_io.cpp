#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "prmrl/errors.hpp"
#include "prmrl/gridmap.hpp"

namespace prmrl {

namespace {

using PixelArray = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Next whitespace-delimited header token, skipping '#' comments.
std::string pgm_token(std::istream& in) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {}
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  return tok;
}

PixelArray read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MapError("cannot open map image: " + path.string());
  if (pgm_token(in) != "P5") throw MapError("not a binary PGM (P5): " + path.string());
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(pgm_token(in));
    h = std::stoi(pgm_token(in));
    maxval = std::stoi(pgm_token(in));
  } catch (const std::exception&) {
    throw MapError("corrupt PGM header: " + path.string());
  }
  if (w <= 0 || h <= 0) throw MapError("PGM has non-positive dimensions: " + path.string());
  if (maxval != 255) throw MapError("PGM must be 8-bit (maxval 255): " + path.string());
  PixelArray img(h, w);
  in.read(reinterpret_cast<char*>(img.data()), static_cast<std::streamsize>(w) * h);
  if (in.gcount() != static_cast<std::streamsize>(w) * h)
    throw MapError("PGM pixel data truncated (dimension mismatch): " + path.string());
  return img;
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw MapError("metadata key '" + key + "' is not a number: " + v);
  }
}

}  // namespace

MapMetadata parse_map_metadata(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto sep = line.find_first_of(":=");
    if (sep == std::string::npos) throw MapError("metadata line without ':' or '=': " + line);
    kv[trim(line.substr(0, sep))] = trim(line.substr(sep + 1));
  }
  MapMetadata meta;
  if (!kv.contains("resolution")) throw MapError("metadata lacks 'resolution'");
  meta.resolution = parse_double("resolution", kv["resolution"]);
  if (!(meta.resolution > 0.0)) throw MapError("metadata resolution must be positive");
  if (kv.contains("origin_x")) meta.origin.x() = parse_double("origin_x", kv["origin_x"]);
  if (kv.contains("origin_y")) meta.origin.y() = parse_double("origin_y", kv["origin_y"]);
  if (kv.contains("occupied_threshold"))
    meta.occupied_threshold = static_cast<int>(parse_double("occupied_threshold", kv["occupied_threshold"]));
  if (kv.contains("free_threshold"))
    meta.free_threshold = static_cast<int>(parse_double("free_threshold", kv["free_threshold"]));
  if (meta.occupied_threshold < 0 || meta.free_threshold > 255 || meta.occupied_threshold >= meta.free_threshold)
    throw MapError("metadata thresholds must satisfy 0 <= occupied < free <= 255");
  return meta;
}

OccupancyGrid grid_from_pixels(const PixelArray& image, const MapMetadata& meta) {
  const int h = static_cast<int>(image.rows()), w = static_cast<int>(image.cols());
  OccupancyGrid g(w, h, meta.resolution, meta.origin);
  for (int i = 0; i < h; ++i)
    for (int col = 0; col < w; ++col) {
      const int px = image(i, col);
      const Cell c = px <= meta.occupied_threshold ? Cell::Occupied
                     : px >= meta.free_threshold   ? Cell::Free
                                                   : Cell::Unknown;
      g.set({col, h - 1 - i}, c);
    }
  return g;
}

OccupancyGrid load_map(const std::filesystem::path& image_path, const std::filesystem::path& meta_path) {
  std::ifstream meta_in(meta_path);
  if (!meta_in) throw MapError("cannot open map metadata: " + meta_path.string());
  std::stringstream ss;
  ss << meta_in.rdbuf();
  const std::string text = ss.str();
  const MapMetadata meta = parse_map_metadata(text);
  const PixelArray img = read_pgm(image_path);

  // Optional explicit dimensions must agree with the image.
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto sep = line.find_first_of(":=");
    if (sep == std::string::npos) continue;
    const std::string key = trim(line.substr(0, sep));
    if (key != "width" && key != "height") continue;
    const int expect = static_cast<int>(parse_double(key, trim(line.substr(sep + 1))));
    const int actual = key == "width" ? static_cast<int>(img.cols()) : static_cast<int>(img.rows());
    if (expect != actual)
      throw MapError("metadata " + key + " " + std::to_string(expect) + " does not match image " +
                     std::to_string(actual));
  }
  return grid_from_pixels(img, meta);
}

void save_map(const OccupancyGrid& grid, const std::filesystem::path& image_path,
              const std::filesystem::path& meta_path) {
  std::ofstream img(image_path, std::ios::binary);
  if (!img) throw MapError("cannot write map image: " + image_path.string());
  img << "P5\n" << grid.width() << ' ' << grid.height() << "\n255\n";
  for (int row = grid.height() - 1; row >= 0; --row)
    for (int col = 0; col < grid.width(); ++col) {
      const Cell c = grid.at({col, row});
      const char px = static_cast<char>(c == Cell::Free ? 254 : c == Cell::Occupied ? 0 : 128);
      img.put(px);
    }
  std::ofstream meta(meta_path);
  if (!meta) throw MapError("cannot write map metadata: " + meta_path.string());
  meta.precision(17);
  meta << "resolution: " << grid.resolution() << "\n"
       << "origin_x: " << grid.origin().x() << "\n"
       << "origin_y: " << grid.origin().y() << "\n"
       << "occupied_threshold: 50\nfree_threshold: 200\n"
       << "width: " << grid.width() << "\nheight: " << grid.height() << "\n";
}

}  // namespace prmrl
