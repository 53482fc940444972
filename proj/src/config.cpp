#include "rwre/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "rwre/errors.hpp"

namespace rwre {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(where, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      fail(where, "unknown key \"" + key + "\"");
    }
  }
}

const json& require(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(where, std::string("missing key \"") + key + "\"");
  return *it;
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  return v.get<double>();
}

std::int64_t integer(const json& v, const std::string& where) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double x = v.get<double>();
    if (x == static_cast<double>(static_cast<std::int64_t>(x))) return static_cast<std::int64_t>(x);
  }
  fail(where, "expected an integer");
}

std::vector<double> numbers(const json& v, const std::string& where) {
  if (!v.is_array()) fail(where, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], where + "/" + std::to_string(i)));
  return out;
}

DiscreteLaw law_from_json(const json& v, const std::string& where) {
  if (v.is_number()) return DiscreteLaw::dirac(v.get<double>());
  check_keys(v, where, {"values", "probs"});
  DiscreteLaw law;
  law.values = numbers(require(v, "values", where), where + "/values");
  if (v.contains("probs")) {
    law.probs = numbers(v["probs"], where + "/probs");
  } else {
    law.probs.assign(law.values.size(), law.values.empty() ? 0.0 : 1.0 / static_cast<double>(law.values.size()));
  }
  return law;
}

json law_to_json(const DiscreteLaw& law) {
  if (law.is_constant()) return law.values[0];
  return json{{"values", law.values}, {"probs", law.probs}};
}

Family family_from_json(const json& f, int d) {
  const std::string where = "/family";
  if (!f.is_object()) fail(where, "expected an object");
  const json& type = require(f, "type", where);
  if (!type.is_string()) fail(where + "/type", "expected a string");
  const std::string t = type.get<std::string>();
  if (t == "dirac_p") {
    check_keys(f, where, {"type", "p"});
    return DiracP{numbers(require(f, "p", where), where + "/p")};
  }
  if (t == "dirac") {
    check_keys(f, where, {"type", "eta"});
    return DiracEta{numbers(require(f, "eta", where), where + "/eta")};
  }
  if (t == "finite_discrete") {
    check_keys(f, where, {"type", "values", "probs"});
    json law = json::object();
    law["values"] = require(f, "values", where);
    if (f.contains("probs")) law["probs"] = f["probs"];
    return IidDiscrete{law_from_json(law, where)};
  }
  if (t == "joint_discrete") {
    check_keys(f, where, {"type", "vectors", "probs"});
    const json& vs = require(f, "vectors", where);
    if (!vs.is_array()) fail(where + "/vectors", "expected an array of vectors");
    JointDiscrete j;
    for (std::size_t i = 0; i < vs.size(); ++i) j.vectors.push_back(numbers(vs[i], where + "/vectors/" + std::to_string(i)));
    j.probs = numbers(require(f, "probs", where), where + "/probs");
    return j;
  }
  if (t == "dirichlet") {
    check_keys(f, where, {"type", "alpha"});
    return Dirichlet{numbers(require(f, "alpha", where), where + "/alpha")};
  }
  if (t == "bicolour") {
    check_keys(f, where, {"type", "entries"});
    const json& rows = require(f, "entries", where);
    if (!rows.is_array() || static_cast<int>(rows.size()) != d) fail(where + "/entries", "expected d rows");
    Bicolour b;
    for (int i = 0; i < d; ++i) {
      const std::string rw = where + "/entries/" + std::to_string(i);
      if (!rows[i].is_array() || static_cast<int>(rows[i].size()) != d) fail(rw, "expected d entries");
      for (int j = 0; j < d; ++j) b.entries.push_back(law_from_json(rows[i][j], rw + "/" + std::to_string(j)));
    }
    return b;
  }
  fail(where + "/type", "unknown family \"" + t + "\"");
}

json family_to_json(const EnvironmentSpec& spec) {
  json f;
  f["type"] = spec.family_name();
  std::visit(
      [&](const auto& fam) {
        using T = std::decay_t<decltype(fam)>;
        if constexpr (std::is_same_v<T, DiracP>) {
          f["p"] = fam.p;
        } else if constexpr (std::is_same_v<T, DiracEta>) {
          f["eta"] = fam.eta;
        } else if constexpr (std::is_same_v<T, IidDiscrete>) {
          f["values"] = fam.component.values;
          f["probs"] = fam.component.probs;
        } else if constexpr (std::is_same_v<T, JointDiscrete>) {
          f["vectors"] = fam.vectors;
          f["probs"] = fam.probs;
        } else if constexpr (std::is_same_v<T, Dirichlet>) {
          f["alpha"] = fam.alpha;
        } else {
          json rows = json::array();
          for (int i = 0; i < spec.d; ++i) {
            json row = json::array();
            for (int j = 0; j < spec.d; ++j) row.push_back(law_to_json(fam.entries[static_cast<std::size_t>(i * spec.d + j)]));
            rows.push_back(row);
          }
          f["entries"] = rows;
        }
      },
      spec.family);
  return f;
}

const json* find_key(const json& ex, const char* key) {
  auto it = ex.find(key);
  return it == ex.end() || it->is_null() ? nullptr : &*it;
}

}  // namespace

const std::vector<std::string>& experiment_keys() {
  static const std::vector<std::string> keys{
      "grid",       "replicas",     "horizon",   "annealed",   "profile_horizons", "depth",   "mode",
      "pool_size",  "iterations",   "beta",      "betas",      "renormalize",      "k",       "y",
      "block_scale", "generations", "runs",      "counts",     "max_denominator",  "k_min",   "k_max",
      "samples",    "window",       "z",         "starts",     "stationarity_depth", "cutset_w", "cutset_depths"};
  return keys;
}

EnvironmentSpec spec_from_json(const json& doc) {
  check_keys(doc, "/", {"version", "d", "root_colour", "kind", "seed", "family", "transform", "experiment"});
  EnvironmentSpec s;
  if (doc.contains("d")) s.d = static_cast<int>(integer(doc["d"], "/d"));
  if (doc.contains("root_colour")) s.root_colour = static_cast<int>(integer(doc["root_colour"], "/root_colour"));
  if (doc.contains("seed")) {
    const json& seed = doc["seed"];
    if (!seed.is_number_integer() || (seed.is_number_integer() && !seed.is_number_unsigned() && seed.get<std::int64_t>() < 0)) {
      fail("/seed", "expected a non-negative integer");
    }
    s.master_seed = seed.get<std::uint64_t>();
  }
  if (s.d < 1 || s.d > 64) fail("/d", "expected 1 <= d <= 64");
  s.family = family_from_json(require(doc, "family", "/"), s.d);
  if (doc.contains("transform")) {
    const json& t = doc["transform"];
    check_keys(t, "/transform", {"power", "scale"});
    if (t.contains("power")) s.transform.power = number(t["power"], "/transform/power");
    if (t.contains("scale")) s.transform.scale = number(t["scale"], "/transform/scale");
  }
  if (doc.contains("kind")) {
    const json& k = doc["kind"];
    if (!k.is_string()) fail("/kind", "expected \"vector\" or \"matrix\"");
    const std::string kind = k.get<std::string>();
    if (kind != "vector" && kind != "matrix") fail("/kind", "expected \"vector\" or \"matrix\"");
    if (kind != to_string(s.kind())) fail("/kind", "\"" + kind + "\" does not match family \"" + s.family_name() + "\"");
  }
  try {
    s.validate();
  } catch (const ConfigError& e) {
    fail("/family", e.what());
  }
  return s;
}

json spec_to_json(const EnvironmentSpec& spec) {
  json doc;
  doc["version"] = kConfigVersion;
  doc["d"] = spec.d;
  doc["root_colour"] = spec.root_colour;
  doc["kind"] = to_string(spec.kind());
  doc["seed"] = spec.master_seed;
  doc["family"] = family_to_json(spec);
  if (!spec.transform.identity()) doc["transform"] = {{"power", spec.transform.power}, {"scale", spec.transform.scale}};
  return doc;
}

ExperimentConfig parse_config(std::string_view text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string what = e.what();
    if (auto p = what.find("syntax error"); p != std::string::npos) what = what.substr(p);
    throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + what);
  }
  ExperimentConfig cfg;
  try {
    if (!doc.is_object()) fail("/", "expected an object");
    cfg.version = static_cast<int>(integer(require(doc, "version", "/"), "/version"));
    if (cfg.version != kConfigVersion) fail("/version", "unsupported version " + std::to_string(cfg.version));
    cfg.spec = spec_from_json(doc);
    if (doc.contains("experiment")) {
      cfg.experiment = doc["experiment"];
      if (!cfg.experiment.is_object()) fail("/experiment", "expected an object");
      const auto& keys = experiment_keys();
      for (const auto& [key, value] : cfg.experiment.items()) {
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) fail("/experiment", "unknown key \"" + key + "\"");
      }
    }
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

double experiment_number(const json& ex, const char* key, double fallback) {
  const json* v = find_key(ex, key);
  return v ? number(*v, std::string("/experiment/") + key) : fallback;
}

std::int64_t experiment_integer(const json& ex, const char* key, std::int64_t fallback) {
  const json* v = find_key(ex, key);
  return v ? integer(*v, std::string("/experiment/") + key) : fallback;
}

bool experiment_bool(const json& ex, const char* key, bool fallback) {
  const json* v = find_key(ex, key);
  if (!v) return fallback;
  if (!v->is_boolean()) fail(std::string("/experiment/") + key, "expected a boolean");
  return v->get<bool>();
}

std::string experiment_string(const json& ex, const char* key, const std::string& fallback) {
  const json* v = find_key(ex, key);
  if (!v) return fallback;
  if (!v->is_string()) fail(std::string("/experiment/") + key, "expected a string");
  return v->get<std::string>();
}

std::vector<double> experiment_numbers(const json& ex, const char* key, std::vector<double> fallback) {
  const json* v = find_key(ex, key);
  return v ? numbers(*v, std::string("/experiment/") + key) : fallback;
}

std::optional<std::vector<std::vector<int>>> experiment_int_matrix(const json& ex, const char* key) {
  const json* v = find_key(ex, key);
  if (!v) return std::nullopt;
  const std::string where = std::string("/experiment/") + key;
  if (!v->is_array()) fail(where, "expected an array of rows");
  std::vector<std::vector<int>> rows;
  for (std::size_t i = 0; i < v->size(); ++i) {
    const json& r = (*v)[i];
    if (!r.is_array()) fail(where + "/" + std::to_string(i), "expected an array of integers");
    std::vector<int> row;
    for (std::size_t j = 0; j < r.size(); ++j) {
      row.push_back(static_cast<int>(integer(r[j], where + "/" + std::to_string(i) + "/" + std::to_string(j))));
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace rwre
