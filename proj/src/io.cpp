#include "scif/io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "scif/error.hpp"

namespace scif::io {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::kParse, path + ": " + what);
}

// Object reader that remembers which keys were consumed so that misspelled
// fields are reported instead of silently ignored.
class Fields {
 public:
  Fields(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  const std::string& path() const { return path_; }
  std::string sub(const std::string& key) const { return path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key); }

  const Json& get(const std::string& key) {
    if (!j_.contains(key)) fail(sub(key), "missing required field");
    used_.insert(key);
    return j_.at(key);
  }
  const Json* find(const std::string& key) {
    if (!j_.contains(key)) return nullptr;
    used_.insert(key);
    return &j_.at(key);
  }

  double num(const std::string& key) { return as_number(get(key), sub(key)); }
  double num(const std::string& key, double fallback) {
    const Json* v = find(key);
    return v ? as_number(*v, sub(key)) : fallback;
  }
  std::int64_t integer(const std::string& key) { return as_integer(get(key), sub(key)); }
  std::int64_t integer(const std::string& key, std::int64_t fallback) {
    const Json* v = find(key);
    return v ? as_integer(*v, sub(key)) : fallback;
  }
  std::string str(const std::string& key, const std::string& fallback) {
    const Json* v = find(key);
    if (v == nullptr) return fallback;
    if (!v->is_string()) fail(sub(key), "expected a string");
    return v->get<std::string>();
  }
  const Json& array(const std::string& key) {
    const Json& v = get(key);
    if (!v.is_array()) fail(sub(key), "expected an array");
    return v;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (used_.count(it.key()) == 0) fail(sub(it.key()), "unknown field");
    }
  }

  static double as_number(const Json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(path, "expected a finite number");
    return d;
  }
  static std::int64_t as_integer(const Json& v, const std::string& path) {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    return v.get<std::int64_t>();
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> used_;
};

std::string index_path(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

Pose2 parse_pose(const Json& j, const std::string& path) {
  Fields f(j, path);
  const Pose2 p(f.num("x"), f.num("y"), f.num("theta", 0.0));
  f.finish();
  return p;
}

template <int N>
Eigen::Matrix<double, N, 1> parse_vector(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != static_cast<std::size_t>(N)) {
    fail(path, "expected an array of " + std::to_string(N) + " numbers");
  }
  Eigen::Matrix<double, N, 1> v;
  for (int i = 0; i < N; ++i) v(i) = Fields::as_number(j[i], index_path(path, i));
  return v;
}

void require(bool ok, const std::string& path, const std::string& what) {
  if (!ok) fail(path, what);
}

void require_probability(double p, const std::string& path) {
  require(p >= 0.0 && p <= 1.0, path, "must lie in [0, 1]");
}

sim::SensorModel parse_sensor(const Json& j, const std::string& path) {
  sim::SensorModel m;
  Fields f(j, path);
  if (const Json* e = f.find("extrinsics")) m.extrinsics = parse_pose(*e, f.sub("extrinsics"));
  m.fov_half_angle = f.num("fov_half_angle", m.fov_half_angle);
  m.max_range = f.num("max_range", m.max_range);
  m.min_range = f.num("min_range", m.min_range);
  m.min_view_angle = f.num("min_view_angle", m.min_view_angle);
  m.noise.base_sigma_xy = f.num("base_sigma_xy", m.noise.base_sigma_xy);
  m.noise.base_sigma_theta = f.num("base_sigma_theta", m.noise.base_sigma_theta);
  m.noise.growth_distance = f.num("growth_distance", m.noise.growth_distance);
  m.noise.growth_angle = f.num("growth_angle", m.noise.growth_angle);
  m.ar1_rho = f.num("ar1_rho", m.ar1_rho);
  m.partial_base = f.num("partial_base", m.partial_base);
  m.partial_per_meter = f.num("partial_per_meter", m.partial_per_meter);
  m.partial_per_radian = f.num("partial_per_radian", m.partial_per_radian);
  m.outlier_rate = f.num("outlier_rate", m.outlier_rate);
  m.outlier_magnitude = f.num("outlier_magnitude", m.outlier_magnitude);
  m.outlier_angle = f.num("outlier_angle", m.outlier_angle);
  m.frame_period = static_cast<int>(f.integer("frame_period", m.frame_period));
  f.finish();

  require(m.fov_half_angle > 0.0, f.sub("fov_half_angle"), "must be positive");
  require(m.max_range > m.min_range && m.min_range >= 0.0, f.sub("max_range"),
          "must exceed min_range >= 0");
  require(m.min_view_angle > 0.0, f.sub("min_view_angle"), "must be positive");
  require(m.noise.base_sigma_xy >= 0.0, f.sub("base_sigma_xy"), "must be non-negative");
  require(m.noise.base_sigma_theta >= 0.0, f.sub("base_sigma_theta"), "must be non-negative");
  require(m.noise.growth_distance >= 0.0, f.sub("growth_distance"), "must be non-negative");
  require(m.noise.growth_angle >= 0.0, f.sub("growth_angle"), "must be non-negative");
  require(m.ar1_rho >= 0.0 && m.ar1_rho < 1.0, f.sub("ar1_rho"), "must lie in [0, 1)");
  require_probability(m.partial_base, f.sub("partial_base"));
  require_probability(m.outlier_rate, f.sub("outlier_rate"));
  require(m.outlier_magnitude >= 0.0, f.sub("outlier_magnitude"), "must be non-negative");
  require(m.frame_period >= 1, f.sub("frame_period"), "must be >= 1");
  return m;
}

sim::ScenarioEvent parse_event(const Json& j, const std::string& path) {
  Fields f(j, path);
  if (!f.has("type")) fail(f.sub("type"), "missing required field");
  const std::string type = f.str("type", "");
  if (type == "kidnap") {
    sim::KidnapEvent e;
    e.epoch = f.integer("epoch");
    e.offset = parse_pose(f.get("offset"), f.sub("offset"));
    f.finish();
    return e;
  }
  if (type == "delay") {
    sim::DelayWindow e;
    e.start = f.integer("start");
    e.end = f.integer("end");
    e.delay = f.integer("epochs");
    f.finish();
    require(e.delay >= 0, f.sub("epochs"), "must be non-negative");
    require(e.end >= e.start, f.sub("end"), "must not precede start");
    return e;
  }
  if (type == "outlier_burst") {
    sim::OutlierBurst e;
    e.start = f.integer("start");
    e.end = f.integer("end");
    e.rate = f.num("rate");
    f.finish();
    require_probability(e.rate, f.sub("rate"));
    return e;
  }
  fail(f.sub("type"), "expected one of kidnap, delay, outlier_burst");
}

void parse_localizer(const Json& j, const std::string& path, LocalizerConfig& c) {
  Fields f(j, path);
  if (const Json* s = f.find("screening")) {
    Fields g(*s, f.sub("screening"));
    c.screening.soft_threshold = g.num("soft_threshold", c.screening.soft_threshold);
    c.screening.hard_threshold = g.num("hard_threshold", c.screening.hard_threshold);
    c.screening.angle_weight = g.num("angle_weight", c.screening.angle_weight);
    g.finish();
    require(c.screening.soft_threshold > 0.0 &&
                c.screening.soft_threshold < c.screening.hard_threshold,
            g.path(), "need 0 < soft_threshold < hard_threshold");
  }
  if (const Json* a = f.find("adaptive")) {
    Fields g(*a, f.sub("adaptive"));
    c.adaptive.angle_weight = g.num("angle_weight", c.adaptive.angle_weight);
    c.adaptive.dependent_fraction = g.num("dependent_fraction", c.adaptive.dependent_fraction);
    c.adaptive.r_min = g.num("r_min", c.adaptive.r_min);
    g.finish();
    require_probability(c.adaptive.dependent_fraction, g.sub("dependent_fraction"));
  }
  if (const Json* i = f.find("init")) {
    Fields g(*i, f.sub("init"));
    if (const Json* p0 = g.find("p0_diag")) {
      c.init.p0 = parse_vector<3>(*p0, g.sub("p0_diag")).asDiagonal();
    }
    c.init.kidnap_discard_limit =
        static_cast<int>(g.integer("kidnap_discard_limit", c.init.kidnap_discard_limit));
    g.finish();
    require(c.init.kidnap_discard_limit >= 1, g.sub("kidnap_discard_limit"), "must be >= 1");
  }
  if (const Json* p = f.find("process")) {
    Fields g(*p, f.sub("process"));
    if (const Json* q = g.find("q_diag")) c.process.q = parse_vector<2>(*q, g.sub("q_diag")).asDiagonal();
    if (const Json* pp = g.find("p_pre_ind_diag")) {
      c.process.p_pre_ind = parse_vector<3>(*pp, g.sub("p_pre_ind_diag")).asDiagonal();
    }
    g.finish();
  }
  c.range_sigma = f.num("range_sigma", c.range_sigma);
  c.dependent_share = f.num("dependent_share", c.dependent_share);
  c.range_d_min = f.num("range_d_min", c.range_d_min);
  const std::int64_t cap =
      f.integer("history_capacity", static_cast<std::int64_t>(c.history_capacity));
  f.finish();
  require(c.range_sigma > 0.0, f.sub("range_sigma"), "must be positive");
  require_probability(c.dependent_share, f.sub("dependent_share"));
  require(cap >= 1, f.sub("history_capacity"), "must be >= 1");
  c.history_capacity = static_cast<std::size_t>(cap);
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

Json parse_json(std::string_view text, const std::string& source_name) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    // The reported byte is one past the offending character.
    const auto [line, col] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
    std::string what = e.what();
    if (const auto pos = what.find("syntax error"); pos != std::string::npos) {
      what = what.substr(pos);
    }
    throw Error(ErrorCode::kParse, source_name + ":" + std::to_string(line) + ":" +
                                       std::to_string(col) + ": " + what);
  }
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

Json load_json(const std::filesystem::path& path) {
  return parse_json(read_text(path), path.string());
}

void apply_override(Json& root, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw Error(ErrorCode::kParse, "override '" + std::string(assignment) +
                                       "': expected key.path=value");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string value(assignment.substr(eq + 1));

  Json parsed = Json::parse(value, nullptr, false);
  if (parsed.is_discarded()) parsed = value;

  Json* node = &root;
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
    if (part.empty()) {
      throw Error(ErrorCode::kParse, "override '" + key + "': empty path component");
    }
    if (!node->is_object()) {
      throw Error(ErrorCode::kParse, "override '" + key + "': '" + part +
                                         "' is inside a non-object value");
    }
    if (dot == std::string::npos) {
      (*node)[part] = std::move(parsed);
      return;
    }
    if (!node->contains(part)) (*node)[part] = Json::object();
    node = &(*node)[part];
    start = dot + 1;
  }
}

sim::Scenario parse_scenario(const Json& j) {
  sim::Scenario s;
  Fields f(j, "scenario");
  s.name = f.str("name", s.name);
  const std::int64_t seed = f.integer("seed", static_cast<std::int64_t>(s.seed));
  require(seed >= 0, f.sub("seed"), "must be non-negative");
  s.seed = static_cast<std::uint64_t>(seed);
  s.dt = f.num("dt", s.dt);
  require(s.dt > 0.0, f.sub("dt"), "must be positive");
  if (const Json* d = f.find("duration_epochs")) {
    s.duration_epochs = Fields::as_integer(*d, f.sub("duration_epochs"));
    require(*s.duration_epochs >= 1, f.sub("duration_epochs"), "must be >= 1");
  }

  const Json& wps = f.array("waypoints");
  for (std::size_t i = 0; i < wps.size(); ++i) {
    s.waypoints.push_back(parse_pose(wps[i], index_path(f.sub("waypoints"), i)));
  }
  require(s.waypoints.size() >= 2, f.sub("waypoints"), "need at least two waypoints");

  if (const Json* m = f.find("motion")) {
    Fields g(*m, f.sub("motion"));
    s.motion.speed = g.num("speed", s.motion.speed);
    s.motion.turn_rate = g.num("turn_rate", s.motion.turn_rate);
    s.motion.turn_speed = g.num("turn_speed", s.motion.turn_speed);
    g.finish();
    require(s.motion.speed > 0.0, g.sub("speed"), "must be positive");
    require(s.motion.turn_rate > 0.0, g.sub("turn_rate"), "must be positive");
    require(s.motion.turn_speed >= 0.0, g.sub("turn_speed"), "must be non-negative");
  }

  const Json& tags = f.array("tags");
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const std::string p = index_path(f.sub("tags"), i);
    Fields g(tags[i], p);
    const auto id = static_cast<int>(g.integer("id"));
    const Pose2 pose(g.num("x"), g.num("y"), g.num("theta"));
    g.finish();
    if (!s.tag_layout.entries.emplace(id, pose).second) fail(p + ".id", "duplicate tag id");
  }

  if (const Json* sensor = f.find("sensor")) s.sensor = parse_sensor(*sensor, f.sub("sensor"));

  if (const Json* o = f.find("odometry_noise")) {
    Fields g(*o, f.sub("odometry_noise"));
    const double sd = g.num("sigma_d");
    const double st = g.num("sigma_theta");
    g.finish();
    require(sd >= 0.0 && st >= 0.0, g.path(), "sigmas must be non-negative");
    s.odometry_q = Eigen::Vector2d(sd * sd, st * st).asDiagonal();
  }

  if (const Json* m = f.find("mapping")) {
    Fields g(*m, f.sub("mapping"));
    s.mapping.sigma_xy = g.num("sigma_xy", s.mapping.sigma_xy);
    s.mapping.sigma_theta = g.num("sigma_theta", s.mapping.sigma_theta);
    s.mapping.frame_stride = static_cast<int>(g.integer("frame_stride", s.mapping.frame_stride));
    g.finish();
    require(s.mapping.sigma_xy >= 0.0 && s.mapping.sigma_theta >= 0.0, g.path(),
            "sigmas must be non-negative");
    require(s.mapping.frame_stride >= 1, g.path(), "frame_stride must be >= 1");
  }

  if (const Json* ev = f.find("events")) {
    if (!ev->is_array()) fail(f.sub("events"), "expected an array");
    for (std::size_t i = 0; i < ev->size(); ++i) {
      s.events.push_back(parse_event((*ev)[i], index_path(f.sub("events"), i)));
    }
  }

  s.localizer = sim::default_localizer_config(s);
  if (const Json* l = f.find("localizer")) parse_localizer(*l, f.sub("localizer"), s.localizer);
  f.finish();
  return s;
}

sim::Scenario load_scenario(const std::filesystem::path& path,
                            const std::vector<std::string>& overrides) {
  Json j = load_json(path);
  for (const std::string& o : overrides) apply_override(j, o);
  return parse_scenario(j);
}

TagMap parse_tag_map(const Json& j) {
  TagMap map;
  Fields f(j, "tag_map");
  if (const Json* src = f.find("source")) {
    Fields g(*src, f.sub("source"));
    map.source.session_id = g.str("session_id", "");
    map.source.iterations = static_cast<int>(g.integer("iterations", 0));
    if (const Json* c = g.find("converged")) {
      if (!c->is_boolean()) fail(g.sub("converged"), "expected a boolean");
      map.source.converged = c->get<bool>();
    }
    map.source.final_cost = g.num("final_cost", 0.0);
    map.source.rms_residual = g.num("rms_residual", 0.0);
    map.source.observation_count = g.integer("observation_count", 0);
    g.finish();
  }
  const Json& tags = f.array("tags");
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const std::string p = index_path(f.sub("tags"), i);
    Fields g(tags[i], p);
    const auto id = static_cast<int>(g.integer("id"));
    const Pose2 pose(g.num("x"), g.num("y"), g.num("theta"));
    g.finish();
    if (!map.entries.emplace(id, pose).second) fail(p + ".id", "duplicate tag id");
  }
  f.finish();
  return map;
}

Json tag_map_to_json(const TagMap& map) {
  Json tags = Json::array();
  for (const auto& [id, p] : map.entries) {
    tags.push_back(Json{{"id", id}, {"x", p.x()}, {"y", p.y()}, {"theta", p.theta()}});
  }
  const MapSource& s = map.source;
  return Json{{"source",
               {{"session_id", s.session_id},
                {"iterations", s.iterations},
                {"converged", s.converged},
                {"final_cost", s.final_cost},
                {"rms_residual", s.rms_residual},
                {"observation_count", s.observation_count}}},
              {"tags", tags}};
}

MappingSession parse_session(const Json& j) {
  MappingSession s;
  Fields f(j, "session");
  s.session_id = f.str("session_id", "");
  const Json& anchors = f.array("anchors");
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    const std::string p = index_path(f.sub("anchors"), i);
    Fields g(anchors[i], p);
    const std::int64_t epoch = g.integer("epoch");
    const Pose2 pose(g.num("x"), g.num("y"), g.num("theta"));
    g.finish();
    if (!s.robot_poses.emplace(epoch, pose).second) fail(p + ".epoch", "duplicate anchor epoch");
  }
  const Json& obs = f.array("observations");
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const std::string p = index_path(f.sub("observations"), i);
    Fields g(obs[i], p);
    TagObservation o;
    o.epoch = g.integer("epoch");
    o.tag_id = static_cast<int>(g.integer("tag_id"));
    o.relative_pose = Pose2(g.num("x"), g.num("y"), g.num("theta"));
    if (const Json* info = g.find("info")) {
      const auto v = parse_vector<9>(*info, g.sub("info"));
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) o.info(r, c) = v(3 * r + c);
      }
    }
    g.finish();
    s.observations.push_back(o);
  }
  if (const Json* e = f.find("expected_tags")) {
    if (!e->is_array()) fail(f.sub("expected_tags"), "expected an array");
    for (std::size_t i = 0; i < e->size(); ++i) {
      s.expected_tags.push_back(
          static_cast<int>(Fields::as_integer((*e)[i], index_path(f.sub("expected_tags"), i))));
    }
  }
  f.finish();
  return s;
}

Json session_to_json(const MappingSession& session) {
  Json anchors = Json::array();
  for (const auto& [epoch, p] : session.robot_poses) {
    anchors.push_back(Json{{"epoch", epoch}, {"x", p.x()}, {"y", p.y()}, {"theta", p.theta()}});
  }
  Json obs = Json::array();
  for (const TagObservation& o : session.observations) {
    Json info = Json::array();
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) info.push_back(o.info(r, c));
    }
    obs.push_back(Json{{"epoch", o.epoch},
                       {"tag_id", o.tag_id},
                       {"x", o.relative_pose.x()},
                       {"y", o.relative_pose.y()},
                       {"theta", o.relative_pose.theta()},
                       {"info", info}});
  }
  return Json{{"session_id", session.session_id},
              {"anchors", anchors},
              {"observations", obs},
              {"expected_tags", session.expected_tags}};
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

struct CsvRow {
  std::size_t line = 0;
  std::vector<std::string_view> cells;
};

std::vector<CsvRow> split_csv(std::string_view text, const std::string& source,
                              std::string_view expected_header) {
  std::vector<CsvRow> rows;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool header_seen = false;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != expected_header) {
        throw Error(ErrorCode::kParse, source + ":" + std::to_string(line_no) +
                                           ": expected header '" + std::string(expected_header) +
                                           "'");
      }
      header_seen = true;
      continue;
    }
    CsvRow row;
    row.line = line_no;
    std::size_t c = 0;
    for (;;) {
      const auto comma = line.find(',', c);
      row.cells.push_back(line.substr(c, comma == std::string_view::npos ? comma : comma - c));
      if (comma == std::string_view::npos) break;
      c = comma + 1;
    }
    rows.push_back(std::move(row));
  }
  if (!header_seen) {
    throw Error(ErrorCode::kParse, source + ": missing header '" + std::string(expected_header) + "'");
  }
  return rows;
}

std::string where(const std::string& source, const CsvRow& row, std::size_t col) {
  return source + ":" + std::to_string(row.line) + ": column " + std::to_string(col + 1);
}

void expect_columns(const std::string& source, const CsvRow& row, std::size_t n) {
  if (row.cells.size() != n) {
    throw Error(ErrorCode::kParse, source + ":" + std::to_string(row.line) + ": expected " +
                                       std::to_string(n) + " columns, got " +
                                       std::to_string(row.cells.size()));
  }
}

double cell_double(const std::string& source, const CsvRow& row, std::size_t col) {
  const std::string s(row.cells[col]);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v)) {
    throw Error(ErrorCode::kParse, where(source, row, col) + ": expected a number");
  }
  return v;
}

std::int64_t cell_int(const std::string& source, const CsvRow& row, std::size_t col) {
  const std::string s(row.cells[col]);
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) {
    throw Error(ErrorCode::kParse, where(source, row, col) + ": expected an integer");
  }
  return v;
}

void expect_epoch(const std::string& source, const CsvRow& row, std::int64_t got,
                  std::int64_t want) {
  if (got != want) {
    throw Error(ErrorCode::kNonContiguousEpoch, source + ":" + std::to_string(row.line) +
                                                    ": expected epoch " + std::to_string(want) +
                                                    ", got " + std::to_string(got));
  }
}

constexpr std::string_view kTruthHeader = "epoch,x_m,y_m,theta_rad";
constexpr std::string_view kOdometryHeader = "epoch,delta_d_m,delta_theta_rad,beta_rad,dt_s";
constexpr std::string_view kMeasurementHeader =
    "emission_epoch,delivery_epoch,tag_id,kind,x_m,y_m,theta_rad,range_m,view_distance_m,"
    "view_angle_rad,outlier";
constexpr std::string_view kTrajectoryHeader = "epoch,x_m,y_m,theta_rad,err_m,reliable";

}  // namespace

std::string truth_csv(const std::vector<Pose2>& poses) {
  std::string out(kTruthHeader);
  out += '\n';
  for (std::size_t k = 0; k < poses.size(); ++k) {
    out += std::to_string(k) + ',' + format_double(poses[k].x()) + ',' +
           format_double(poses[k].y()) + ',' + format_double(poses[k].theta()) + '\n';
  }
  return out;
}

std::string odometry_csv(const std::vector<Control>& odometry) {
  std::string out(kOdometryHeader);
  out += '\n';
  for (std::size_t k = 0; k < odometry.size(); ++k) {
    const Control& u = odometry[k];
    out += std::to_string(k + 1) + ',' + format_double(u.delta_d) + ',' +
           format_double(u.delta_theta) + ',' + format_double(u.beta) + ',' +
           format_double(u.dt) + '\n';
  }
  return out;
}

std::string measurements_csv(const std::vector<sim::EmittedMeasurement>& measurements) {
  std::string out(kMeasurementHeader);
  out += '\n';
  for (const sim::EmittedMeasurement& em : measurements) {
    const TagMeasurement& m = em.meas;
    out += std::to_string(m.stamp) + ',' + std::to_string(em.delivery) + ',' +
           std::to_string(m.tag_id) + ',';
    if (const auto* c = std::get_if<CompleteDetection>(&m.payload)) {
      out += "complete," + format_double(c->pose_in_camera.x()) + ',' +
             format_double(c->pose_in_camera.y()) + ',' +
             format_double(c->pose_in_camera.theta()) + ",,";
    } else {
      out += "distance,,,," + format_double(std::get<DistanceOnlyDetection>(m.payload).range) +
             ',';
    }
    out += format_double(m.view_distance) + ',' + format_double(m.view_angle) + ',' +
           (em.outlier ? "1" : "0") + '\n';
  }
  return out;
}

std::vector<Pose2> parse_truth_csv(std::string_view text, const std::string& source) {
  std::vector<Pose2> poses;
  for (const CsvRow& row : split_csv(text, source, kTruthHeader)) {
    expect_columns(source, row, 4);
    expect_epoch(source, row, cell_int(source, row, 0), static_cast<std::int64_t>(poses.size()));
    poses.emplace_back(cell_double(source, row, 1), cell_double(source, row, 2),
                       cell_double(source, row, 3));
  }
  return poses;
}

std::vector<Control> parse_odometry_csv(std::string_view text, const std::string& source) {
  std::vector<Control> out;
  for (const CsvRow& row : split_csv(text, source, kOdometryHeader)) {
    expect_columns(source, row, 5);
    expect_epoch(source, row, cell_int(source, row, 0), static_cast<std::int64_t>(out.size()) + 1);
    Control u;
    u.delta_d = cell_double(source, row, 1);
    u.delta_theta = cell_double(source, row, 2);
    u.beta = cell_double(source, row, 3);
    u.dt = cell_double(source, row, 4);
    try {
      validate(u);
    } catch (const Error& e) {
      throw Error(ErrorCode::kParse, source + ":" + std::to_string(row.line) + ": " + e.what());
    }
    out.push_back(u);
  }
  return out;
}

std::vector<sim::EmittedMeasurement> parse_measurements_csv(std::string_view text,
                                                            const std::string& source) {
  std::vector<sim::EmittedMeasurement> out;
  for (const CsvRow& row : split_csv(text, source, kMeasurementHeader)) {
    expect_columns(source, row, 11);
    sim::EmittedMeasurement em;
    em.meas.stamp = cell_int(source, row, 0);
    em.delivery = cell_int(source, row, 1);
    em.meas.tag_id = static_cast<int>(cell_int(source, row, 2));
    const std::string_view kind = row.cells[3];
    if (kind == "complete") {
      em.meas.payload = CompleteDetection{Pose2(cell_double(source, row, 4),
                                                cell_double(source, row, 5),
                                                cell_double(source, row, 6))};
    } else if (kind == "distance") {
      em.meas.payload = DistanceOnlyDetection{cell_double(source, row, 7)};
    } else {
      throw Error(ErrorCode::kParse,
                  where(source, row, 3) + ": expected 'complete' or 'distance'");
    }
    em.meas.view_distance = cell_double(source, row, 8);
    em.meas.view_angle = cell_double(source, row, 9);
    em.outlier = cell_int(source, row, 10) != 0;
    if (em.delivery < em.meas.stamp) {
      throw Error(ErrorCode::kParse, where(source, row, 1) + ": delivery precedes emission");
    }
    if (!out.empty() && em.delivery < out.back().delivery) {
      throw Error(ErrorCode::kParse, where(source, row, 1) + ": rows not sorted by delivery");
    }
    try {
      validate(em.meas);
    } catch (const Error& e) {
      throw Error(ErrorCode::kParse, source + ":" + std::to_string(row.line) + ": " + e.what());
    }
    out.push_back(em);
  }
  return out;
}

void write_stream(const std::filesystem::path& dir, const sim::Stream& stream) {
  write_text(dir / "truth.csv", truth_csv(stream.truth.poses));
  write_text(dir / "odometry.csv", odometry_csv(stream.odometry));
  write_text(dir / "measurements.csv", measurements_csv(stream.measurements));
}

sim::Stream read_stream(const std::filesystem::path& dir) {
  sim::Stream s;
  const auto truth_path = dir / "truth.csv";
  const auto odo_path = dir / "odometry.csv";
  const auto meas_path = dir / "measurements.csv";
  s.truth.poses = parse_truth_csv(read_text(truth_path), truth_path.string());
  s.odometry = parse_odometry_csv(read_text(odo_path), odo_path.string());
  s.measurements = parse_measurements_csv(read_text(meas_path), meas_path.string());
  if (s.truth.poses.empty()) throw Error(ErrorCode::kEmptyInput, truth_path.string() + ": no epochs");
  if (s.odometry.size() + 1 != s.truth.poses.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "streams disagree: " + std::to_string(s.truth.poses.size()) +
                    " truth epochs vs " + std::to_string(s.odometry.size()) + " odometry rows");
  }
  // Exact controls are not stored; truth poses carry the ground truth.
  return s;
}

std::string trajectory_csv(const std::vector<EpochEstimate>& track, const ErrorSeries& errors) {
  std::string out(kTrajectoryHeader);
  out += '\n';
  for (std::size_t k = 0; k < track.size(); ++k) {
    const EpochEstimate& e = track[k];
    out += std::to_string(e.epoch) + ',';
    if (e.state) {
      out += format_double(e.state->mean.x()) + ',' + format_double(e.state->mean.y()) + ',' +
             format_double(e.state->mean.theta()) + ',';
    } else {
      out += ",,,";
    }
    if (k < errors.size() && errors[k]) out += format_double(*errors[k]);
    out += ',';
    out += e.state ? (e.reliable ? "1" : "0") : "";
    out += '\n';
  }
  return out;
}

}  // namespace scif::io
