#include "avsfe/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace avsfe {

namespace {

std::string strip(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// A value token: quoted string, boolean, or number.
nlohmann::json parse_scalar(const std::string& tok, int lineno) {
  if (tok.size() >= 2 && tok.front() == '"' && tok.back() == '"')
    return tok.substr(1, tok.size() - 2);
  if (tok == "true") return true;
  if (tok == "false") return false;
  try {
    size_t used = 0;
    if (tok.find_first_of(".eE") == std::string::npos) {
      const long long v = std::stoll(tok, &used);
      if (used == tok.size()) return v;
    }
    const double d = std::stod(tok, &used);
    if (used == tok.size()) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError("config line " + std::to_string(lineno) + ": cannot parse value '" + tok + "'");
}

std::string drop_comment(const std::string& line) {
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

} // namespace

nlohmann::json toml_subset_to_json(const std::string& text) {
  nlohmann::json root = nlohmann::json::object();
  nlohmann::json* current = &root;

  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = strip(drop_comment(raw));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) + ": unterminated table header");
      const std::string name = strip(line.substr(1, line.size() - 2));
      if (name.empty())
        throw ConfigError("config line " + std::to_string(lineno) + ": empty table name");
      current = &root[name];
      if (current->is_null()) *current = nlohmann::json::object();
      continue;
    }

    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = strip(line.substr(0, eq));
    const std::string val = strip(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    if (val.empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": empty value for '" + key + "'");

    if (val.front() == '[') {
      if (val.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) + ": unterminated array");
      nlohmann::json arr = nlohmann::json::array();
      std::string body = val.substr(1, val.size() - 2);
      std::istringstream items(body);
      std::string item;
      while (std::getline(items, item, ',')) {
        item = strip(item);
        if (!item.empty()) arr.push_back(parse_scalar(item, lineno));
      }
      (*current)[key] = arr;
    } else {
      (*current)[key] = parse_scalar(val, lineno);
    }
  }
  return root;
}

namespace {

template <typename T>
void take(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) {
    try {
      out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(std::string("config field '") + key + "' has the wrong type");
    }
  }
}

} // namespace

RunConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config root must be a table");
  RunConfig c;

  if (j.contains("problem")) {
    const nlohmann::json& p = j.at("problem");
    if (p.is_string()) {
      c.problem = p.get<std::string>();
    } else if (p.is_object()) {
      take(p, "name", c.problem);
      take(p, "epsilon", c.epsilon);
      take(p, "steepness", c.steepness);
    } else {
      throw ConfigError("config field 'problem' must be a name or a table");
    }
  }

  take(j, "mode", c.mode);
  take(j, "nx", c.nx);
  take(j, "nt", c.nt);
  take(j, "levels", c.levels);
  take(j, "p_u", c.p_u);
  take(j, "p_q", c.p_q);
  take(j, "dp", c.dp);
  take(j, "theta", c.theta);
  take(j, "adapt_steps", c.adapt_steps);
  take(j, "estimate_tol", c.estimate_tol);
  take(j, "rho_inf", c.rho_inf);
  take(j, "tau", c.tau);
  take(j, "t_final", c.t_final);
  take(j, "slice_boundaries", c.slice_boundaries);
  take(j, "strategy", c.strategy);
  take(j, "strong_dirichlet", c.strong_dirichlet);
  take(j, "quad_order", c.quad_order);
  take(j, "out_dir", c.out_dir);
  take(j, "seed", c.seed);
  return c;
}

void validate(const RunConfig& c) {
  std::vector<std::string> problems;
  auto need = [&problems](bool ok, const std::string& msg) {
    if (!ok) problems.push_back(msg);
  };

  need(!c.mode.empty(), "missing field 'mode'");
  const bool known = c.mode == "spacetime" || c.mode == "converge" || c.mode == "adapt" ||
                     c.mode == "genalpha" || c.mode == "slices";
  if (!c.mode.empty()) need(known, "field 'mode' must be one of spacetime|converge|adapt|genalpha|slices");
  need(!c.problem.empty(), "missing field 'problem'");
  need(c.nx >= 1, "field 'nx' must be >= 1");
  need(c.nt >= 1, "field 'nt' must be >= 1");
  need(c.p_u == 1 || c.p_u == 2, "field 'p_u' must be 1 or 2");
  need(c.dp == 0 || c.dp == 1, "field 'dp' must be 0 or 1");
  need(c.quad_order >= 0, "field 'quad_order' must be >= 0");

  if (known) {
    if (c.mode == "converge") need(c.levels >= 2, "converge mode: field 'levels' must be >= 2");
    if (c.mode == "adapt") {
      need(c.adapt_steps >= 1, "adapt mode: field 'adapt_steps' must be >= 1");
      need(c.theta > 0.0 && c.theta <= 1.0, "adapt mode: field 'theta' must lie in (0,1]");
    }
    if (c.mode == "genalpha") {
      need(c.tau > 0.0, "genalpha mode: field 'tau' must be > 0");
      need(c.t_final > 0.0, "genalpha mode: field 't_final' must be > 0");
      need(c.rho_inf >= 0.0 && c.rho_inf <= 1.0, "genalpha mode: field 'rho_inf' must lie in [0,1]");
    }
    if (c.mode == "slices") {
      need(c.slice_boundaries.size() >= 2, "slices mode: field 'slice_boundaries' needs >= 2 entries");
      need(c.strategy == "between" || c.strategy == "after",
           "slices mode: field 'strategy' must be 'between' or 'after'");
      need(c.adapt_steps >= 0, "slices mode: field 'adapt_steps' must be >= 0");
      need(c.theta > 0.0 && c.theta <= 1.0, "slices mode: field 'theta' must lie in (0,1]");
    }
  }

  if (!problems.empty()) {
    std::string msg = "invalid config:";
    for (const std::string& p : problems) msg += "\n  - " + p;
    throw ConfigError(msg);
  }
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  std::stringstream buf;
  buf << in.rdbuf();

  nlohmann::json j;
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
    j = nlohmann::json::parse(buf.str(), nullptr, false);
    if (j.is_discarded()) throw ConfigError("config is not valid JSON: " + path);
  } else {
    j = toml_subset_to_json(buf.str());
  }
  RunConfig c = config_from_json(j);
  validate(c);
  return c;
}

} // namespace avsfe
