#include <zlib.h>

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "prmrl/errors.hpp"
#include "prmrl/roadmap.hpp"

namespace prmrl {

namespace {

constexpr char kMagic[8] = {'P', 'R', 'M', 'R', 'L', 'R', 'M', '\0'};

// Little-endian writer independent of host byte order.
class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out_ += s;
  }
  void raw(const char* p, std::size_t n) { out_.append(p, n); }
  std::string& bytes() { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  Reader(const std::string& s, std::size_t begin, std::size_t end) : s_(s), pos_(begin), end_(end) {}
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(s_[pos_++]);
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(u8()) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string v = s_.substr(pos_, n);
    pos_ += n;
    return v;
  }
  bool done() const { return pos_ == end_; }

 private:
  void need(std::size_t n) const {
    if (end_ - pos_ < n) throw FormatError("roadmap payload ends unexpectedly");
  }
  const std::string& s_;
  std::size_t pos_, end_;
};

std::uint32_t crc_of(const std::string& s, std::size_t n) {
  return static_cast<std::uint32_t>(
      crc32(crc32(0L, Z_NULL, 0), reinterpret_cast<const Bytef*>(s.data()), static_cast<uInt>(n)));
}

}  // namespace

std::string serialize_roadmap(const Roadmap& rm) {
  Writer w;
  w.raw(kMagic, sizeof kMagic);
  w.u32(kRoadmapFormatVersion);
  const RoadmapMetadata& m = rm.meta;
  w.str(m.map_id);
  w.str(m.policy);
  w.f64(m.density);
  w.f64(m.connection_distance);
  w.f64(m.success_threshold);
  w.u32(m.attempts);
  w.f64(m.goal_radius);
  w.u32(m.max_steps);
  w.u8(m.validate_reverse);
  w.u8(m.early_termination);
  w.u64(m.master_seed);
  w.u64(m.sampled_nodes);
  w.u64(m.candidate_edges);
  w.u64(m.rollouts);
  w.u64(m.collision_checks);
  w.u64(rm.nodes.size());
  for (const auto& p : rm.nodes) {
    w.f64(p.x());
    w.f64(p.y());
  }
  w.u64(rm.edges.size());
  for (const auto& e : rm.edges) {
    w.u32(e.from);
    w.u32(e.to);
    w.f64(e.success_rate);
    w.f64(e.mean_length);
    w.u32(e.attempts);
  }
  w.u32(crc_of(w.bytes(), w.bytes().size()));
  return std::move(w.bytes());
}

Roadmap deserialize_roadmap(const std::string& bytes) {
  constexpr std::size_t header = sizeof kMagic + 4;
  if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
    throw FormatError("not a roadmap file (bad magic)");
  if (bytes.size() < header + 4) throw ChecksumError("roadmap file truncated");
  const std::uint32_t version = Reader(bytes, sizeof kMagic, header).u32();
  if (version != kRoadmapFormatVersion)
    throw VersionError("unsupported roadmap format version " + std::to_string(version) + " (reader supports " +
                       std::to_string(kRoadmapFormatVersion) + ")");
  const std::size_t body_end = bytes.size() - 4;
  if (Reader(bytes, body_end, bytes.size()).u32() != crc_of(bytes, body_end))
    throw ChecksumError("roadmap checksum mismatch (file truncated or corrupted)");

  Reader r(bytes, header, body_end);
  Roadmap rm;
  RoadmapMetadata& m = rm.meta;
  m.map_id = r.str();
  m.policy = r.str();
  m.density = r.f64();
  m.connection_distance = r.f64();
  m.success_threshold = r.f64();
  m.attempts = r.u32();
  m.goal_radius = r.f64();
  m.max_steps = r.u32();
  m.validate_reverse = r.u8() != 0;
  m.early_termination = r.u8() != 0;
  m.master_seed = r.u64();
  m.sampled_nodes = r.u64();
  m.candidate_edges = r.u64();
  m.rollouts = r.u64();
  m.collision_checks = r.u64();
  const std::uint64_t n = r.u64();
  for (std::uint64_t i = 0; i < n; ++i) {
    const double x = r.f64();
    rm.nodes.emplace_back(x, r.f64());
  }
  const std::uint64_t ne = r.u64();
  for (std::uint64_t i = 0; i < ne; ++i) {
    RoadmapEdge e;
    e.from = r.u32();
    e.to = r.u32();
    e.success_rate = r.f64();
    e.mean_length = r.f64();
    e.attempts = r.u32();
    if (e.from >= n || e.to >= n) throw FormatError("roadmap edge references a missing node");
    rm.edges.push_back(e);
  }
  if (!r.done()) throw FormatError("trailing bytes in roadmap payload");
  return rm;
}

void save_roadmap(const Roadmap& roadmap, const std::filesystem::path& path) {
  const std::string bytes = serialize_roadmap(roadmap);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Roadmap load_roadmap(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open roadmap file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_roadmap(ss.str());
}

namespace {
std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace

void export_roadmap_text(const Roadmap& rm, std::ostream& out) {
  const RoadmapMetadata& m = rm.meta;
  out << "# prmrl roadmap text v" << kRoadmapFormatVersion << '\n';
  out << "meta map_id " << m.map_id << '\n';
  out << "meta policy " << m.policy << '\n';
  out << "meta density " << g17(m.density) << '\n';
  out << "meta connection_distance " << g17(m.connection_distance) << '\n';
  out << "meta success_threshold " << g17(m.success_threshold) << '\n';
  out << "meta attempts " << m.attempts << '\n';
  out << "meta goal_radius " << g17(m.goal_radius) << '\n';
  out << "meta max_steps " << m.max_steps << '\n';
  out << "meta validate_reverse " << int(m.validate_reverse) << '\n';
  out << "meta early_termination " << int(m.early_termination) << '\n';
  out << "meta master_seed " << m.master_seed << '\n';
  out << "meta sampled_nodes " << m.sampled_nodes << '\n';
  out << "meta candidate_edges " << m.candidate_edges << '\n';
  out << "meta rollouts " << m.rollouts << '\n';
  out << "meta collision_checks " << m.collision_checks << '\n';
  for (std::size_t i = 0; i < rm.nodes.size(); ++i)
    out << "node " << i << ' ' << g17(rm.nodes[i].x()) << ' ' << g17(rm.nodes[i].y()) << '\n';
  for (const auto& e : rm.edges)
    out << "edge " << e.from << ' ' << e.to << ' ' << g17(e.success_rate) << ' ' << g17(e.mean_length) << ' '
        << e.attempts << '\n';
}

Roadmap import_roadmap_text(std::istream& in) {
  Roadmap rm;
  RoadmapMetadata& m = rm.meta;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    const auto fail = [&] { return FormatError("roadmap text line " + std::to_string(lineno) + ": " + line); };
    if (kind == "meta") {
      std::string key, value;
      ls >> key;
      std::getline(ls >> std::ws, value);
      if (key == "map_id") m.map_id = value;
      else if (key == "policy") m.policy = value;
      else if (key == "density") m.density = std::stod(value);
      else if (key == "connection_distance") m.connection_distance = std::stod(value);
      else if (key == "success_threshold") m.success_threshold = std::stod(value);
      else if (key == "attempts") m.attempts = static_cast<std::uint32_t>(std::stoul(value));
      else if (key == "goal_radius") m.goal_radius = std::stod(value);
      else if (key == "max_steps") m.max_steps = static_cast<std::uint32_t>(std::stoul(value));
      else if (key == "validate_reverse") m.validate_reverse = value == "1";
      else if (key == "early_termination") m.early_termination = value == "1";
      else if (key == "master_seed") m.master_seed = std::stoull(value);
      else if (key == "sampled_nodes") m.sampled_nodes = std::stoull(value);
      else if (key == "candidate_edges") m.candidate_edges = std::stoull(value);
      else if (key == "rollouts") m.rollouts = std::stoull(value);
      else if (key == "collision_checks") m.collision_checks = std::stoull(value);
      else throw fail();
    } else if (kind == "node") {
      std::size_t id;
      double x, y;
      if (!(ls >> id >> x >> y) || id != rm.nodes.size()) throw fail();
      rm.nodes.emplace_back(x, y);
    } else if (kind == "edge") {
      RoadmapEdge e;
      if (!(ls >> e.from >> e.to >> e.success_rate >> e.mean_length >> e.attempts)) throw fail();
      rm.edges.push_back(e);
    } else {
      throw fail();
    }
  }
  for (const auto& e : rm.edges)
    if (e.from >= rm.nodes.size() || e.to >= rm.nodes.size()) throw FormatError("edge references a missing node");
  return rm;
}

}  // namespace prmrl
