#include "kramers/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "kramers/errors.hpp"

namespace kramers {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ConfigError("field '" + field + "': " + what);
}

// reads the keys of one object and rejects whatever was not asked for
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  const json& at(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  std::string field(const std::string& key) const { return join(path_, key); }

  double number(const std::string& key, double fallback, double lo, double hi,
                bool open_lo = false) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number()) fail(field(key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x) || x < lo || x > hi || (open_lo && x == lo)) {
      std::ostringstream os;
      os << "value " << x << " outside " << (open_lo ? "(" : "[") << lo << ", " << hi << "]";
      fail(field(key), os.str());
    }
    return x;
  }

  std::int64_t integer(const std::string& key, std::int64_t fallback, std::int64_t lo,
                       std::int64_t hi) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) fail(field(key), "expected an integer");
    const auto x = v.get<std::int64_t>();
    if (x < lo || x > hi)
      fail(field(key), "value " + std::to_string(x) + " outside [" + std::to_string(lo) + ", " +
                           std::to_string(hi) + "]");
    return x;
  }

  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_string()) fail(field(key), "expected a string");
    return v.get<std::string>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_boolean()) fail(field(key), "expected true or false");
    return v.get<bool>();
  }

  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_array()) fail(field(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) fail(field(key) + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) fail(field(it.key()), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
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

json parse_document(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // byte is one past the offending character
    const auto [line, col] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    std::string msg = e.what();
    const auto pos = msg.find("parse error");
    if (pos != std::string::npos) msg = msg.substr(pos);
    throw ConfigError("line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
                      msg);
  }
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override '" + assignment + "' is not of the form key=value");
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
    if (key.empty()) throw ConfigError("override '" + assignment + "' has an empty path segment");
    if (!node->is_object()) fail(path.substr(0, start ? start - 1 : 0), "is not an object");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

RunConfig from_document(const json& doc) {
  RunConfig c;
  ObjectReader root(doc, "");

  if (!root.has("potential")) fail("potential", "missing");
  {
    ObjectReader r(root.at("potential"), "potential");
    c.potential.family = r.string("family", c.potential.family);
    try {
      potential_family_from_string(c.potential.family);
    } catch (const Error& e) {
      fail(r.field("family"), e.what());
    }
    c.potential.dimension = static_cast<int>(r.integer("dimension", 1, 1, kMaxPolynomialDimension));
    c.potential.parameters = r.numbers("parameters", {});
    c.potential.offset = r.number("offset", 0.0, -1e6, 1e6);
    r.finish();
  }
  if (root.has("landscape")) {
    ObjectReader r(root.at("landscape"), "landscape");
    c.landscape.search_half_width = r.number("search_half_width", 2.5, 0.0, 1e3, true);
    c.landscape.grid_density = static_cast<int>(r.integer("grid_density", 40, 3, 400));
    r.finish();
  }
  c.gamma = root.number("gamma", 1.0, 0.0, 1e3, true);
  const bool has_eps = root.has("epsilon"), has_grid = root.has("epsilon_grid");
  if (has_eps && has_grid) fail("epsilon_grid", "give either epsilon or epsilon_grid, not both");
  if (has_eps) c.epsilons = {root.number("epsilon", 0.15, 0.0, 1.0, true)};
  if (has_grid) {
    c.epsilons = root.numbers("epsilon_grid", {});
    if (c.epsilons.empty()) fail("epsilon_grid", "must not be empty");
    for (std::size_t i = 0; i < c.epsilons.size(); ++i)
      if (!(c.epsilons[i] > 0.0 && c.epsilons[i] < 1.0))
        fail("epsilon_grid[" + std::to_string(i) + "]", "must lie in (0, 1)");
  }
  if (c.epsilons.size() == 1 && !(c.epsilons[0] < 1.0)) fail("epsilon", "must lie in (0, 1)");
  if (root.has("balls")) {
    ObjectReader r(root.at("balls"), "balls");
    if (r.has("target_radius")) {
      const json& v = r.at("target_radius");
      if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "epsilon") c.balls.rule = BallsBlock::Rule::epsilon;
        else if (s == "default") c.balls.rule = BallsBlock::Rule::desk_default;
        else fail(r.field("target_radius"), "expected a number, \"epsilon\" or \"default\"");
      } else {
        c.balls.rule = BallsBlock::Rule::fixed;
        c.balls.radius = r.number("target_radius", 0.2, 0.0, 1e3, true);
      }
    }
    r.finish();
  }
  if (root.has("integrator")) {
    ObjectReader r(root.at("integrator"), "integrator");
    const auto scheme = r.string("scheme", to_string(c.integrator.scheme));
    try {
      c.integrator.scheme = scheme_from_string(scheme);
    } catch (const Error& e) {
      fail(r.field("scheme"), e.what());
    }
    c.integrator.dt = r.number("dt", 1e-3, 0.0, 1.0, true);
    c.integrator.max_time_factor = r.number("max_time_factor", 50.0, 1.0, 1e6);
    c.integrator.auto_dt = r.boolean("auto_dt", false);
    r.finish();
  }
  if (root.has("ensemble")) {
    ObjectReader r(root.at("ensemble"), "ensemble");
    c.ensemble.n_traj = r.integer("n_traj", c.ensemble.n_traj, 1, std::int64_t{1} << 40);
    c.ensemble.base_seed =
        static_cast<std::uint64_t>(r.integer("base_seed", 20240601, 0, INT64_MAX));
    r.finish();
  }
  if (root.has("quadrature")) {
    ObjectReader r(root.at("quadrature"), "quadrature");
    c.quadrature.points = static_cast<int>(r.integer("points", 64, 2, 1024));
    c.quadrature.rel_tol = r.number("rel_tol", 1e-11, 1e-15, 1e-2);
    c.quadrature.K = r.number("K", 4.0, 0.0, 100.0, true);
    r.finish();
  }
  if (root.has("verify")) {
    ObjectReader r(root.at("verify"), "verify");
    c.verify.monte_carlo = r.boolean("monte_carlo", false);
    c.verify.samples = static_cast<int>(r.integer("samples", 10000, 10, 10000000));
    r.finish();
  }
  c.output = root.string("output", c.output);
  root.finish();

  try {
    build_model(c.potential);
  } catch (const InputError& e) {
    fail("potential", e.what());
  }
  return c;
}

json to_document(const RunConfig& c) {
  json j;
  j["potential"] = {{"family", c.potential.family},
                    {"dimension", c.potential.dimension},
                    {"parameters", c.potential.parameters},
                    {"offset", c.potential.offset}};
  j["landscape"] = {{"search_half_width", c.landscape.search_half_width},
                    {"grid_density", c.landscape.grid_density}};
  j["gamma"] = c.gamma;
  j["epsilon_grid"] = c.epsilons;
  switch (c.balls.rule) {
    case BallsBlock::Rule::fixed: j["balls"]["target_radius"] = c.balls.radius; break;
    case BallsBlock::Rule::epsilon: j["balls"]["target_radius"] = "epsilon"; break;
    case BallsBlock::Rule::desk_default: j["balls"]["target_radius"] = "default"; break;
  }
  j["integrator"] = {{"scheme", to_string(c.integrator.scheme)},
                     {"dt", c.integrator.dt},
                     {"max_time_factor", c.integrator.max_time_factor},
                     {"auto_dt", c.integrator.auto_dt}};
  j["ensemble"] = {{"n_traj", c.ensemble.n_traj}, {"base_seed", c.ensemble.base_seed}};
  j["quadrature"] = {{"points", c.quadrature.points},
                     {"rel_tol", c.quadrature.rel_tol},
                     {"K", c.quadrature.K}};
  j["verify"] = {{"monte_carlo", c.verify.monte_carlo}, {"samples", c.verify.samples}};
  j["output"] = c.output;
  return j;
}

}  // namespace

QuadratureOptions RunConfig::quadrature_options() const {
  QuadratureOptions q;
  q.points = quadrature.points;
  q.rel_tol = quadrature.rel_tol;
  return q;
}

double RunConfig::target_radius(double epsilon) const {
  switch (balls.rule) {
    case BallsBlock::Rule::fixed: return balls.radius;
    case BallsBlock::Rule::epsilon: return epsilon;
    case BallsBlock::Rule::desk_default: break;
  }
  return std::max(epsilon, 0.2);
}

RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides) {
  json doc = parse_document(text);
  if (!doc.is_object()) throw ConfigError("line 1, column 1: top level must be a JSON object");
  for (const auto& o : overrides) apply_override(doc, o);
  return from_document(doc);
}

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides);
}

std::string canonical_json(const RunConfig& cfg) { return to_document(cfg).dump(); }

std::string config_hash(const RunConfig& cfg) {
  // where results land does not change what is computed
  auto doc = to_document(cfg);
  doc.erase("output");
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : doc.dump()) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

PotentialModel build_model(const PotentialBlock& b) {
  PotentialModel m = PotentialModel::quartic_double_well();
  switch (potential_family_from_string(b.family)) {
    case PotentialFamily::quartic_double_well_1d:
      if (b.dimension != 1) throw InputError("quartic-double-well-1d needs dimension 1");
      if (!b.parameters.empty()) throw InputError("quartic-double-well-1d takes no parameters");
      break;
    case PotentialFamily::separable_double_well_nd:
      if (static_cast<int>(b.parameters.size()) != b.dimension - 1)
        throw InputError("separable-double-well-nd needs dimension - 1 stiffness parameters");
      m = PotentialModel::separable_double_well(b.parameters);
      break;
    case PotentialFamily::polynomial_custom:
      m = PotentialModel::polynomial(b.dimension, b.parameters);
      break;
  }
  return b.offset != 0.0 ? m.with_offset(b.offset) : m;
}

}  // namespace kramers
