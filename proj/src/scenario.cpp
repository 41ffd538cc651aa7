#include "scenario.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

namespace crack {

using nlohmann::json;

double distance(const Vec3& a, const Vec3& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

std::string_view to_string(PhaseRule rule) {
  return rule == PhaseRule::kPiOffset ? "pi-offset" : "independent";
}

PhaseRule parse_phase_rule(std::string_view text) {
  if (text == "pi-offset") return PhaseRule::kPiOffset;
  if (text == "independent") return PhaseRule::kIndependent;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown phase rule '" + std::string(text) +
                  "' (expected pi-offset or independent)");
}

namespace {

[[noreturn]] void bad_field(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::kParse, path + ": " + what);
}

double as_double(const json& v, const std::string& path) {
  if (!v.is_number()) bad_field(path, "expected a number");
  return v.get<double>();
}

int as_positive_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) bad_field(path, "expected an integer");
  const auto x = v.get<std::int64_t>();
  if (x < 1 || x > 1'000'000'000) bad_field(path, "expected a positive integer");
  return static_cast<int>(x);
}

std::uint64_t as_u64(const json& v, const std::string& path) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  bad_field(path, "expected a non-negative integer");
}

Vec3 as_vec3(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 3) bad_field(path, "expected [x, y, z]");
  Vec3 out{};
  for (std::size_t i = 0; i < 3; ++i) out[i] = as_double(v[i], path);
  return out;
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) bad_field(path, "expected a string");
  return v.get<std::string>();
}

bool as_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) bad_field(path, "expected true or false");
  return v.get<bool>();
}

struct Field {
  std::string path;
  std::function<void(ScenarioConfig&, const json&, const std::string&)> set;
  std::function<json(const ScenarioConfig&)> get;  // null for write-only aliases
};

#define CRACK_DOUBLE(PATH, MEMBER)                                              \
  Field {                                                                      \
    PATH,                                                                      \
        [](ScenarioConfig& c, const json& v, const std::string& p) {           \
          c.MEMBER = as_double(v, p);                                          \
        },                                                                     \
        [](const ScenarioConfig& c) { return json(c.MEMBER); }                 \
  }
#define CRACK_INT(PATH, MEMBER)                                                 \
  Field {                                                                      \
    PATH,                                                                      \
        [](ScenarioConfig& c, const json& v, const std::string& p) {           \
          c.MEMBER = as_positive_int(v, p);                                    \
        },                                                                     \
        [](const ScenarioConfig& c) { return json(c.MEMBER); }                 \
  }
#define CRACK_VEC3(PATH, MEMBER)                                                \
  Field {                                                                      \
    PATH,                                                                      \
        [](ScenarioConfig& c, const json& v, const std::string& p) {           \
          c.MEMBER = as_vec3(v, p);                                            \
        },                                                                     \
        [](const ScenarioConfig& c) { return json(c.MEMBER); }                 \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      CRACK_INT("array.m", m),
      CRACK_INT("array.k", k),
      CRACK_INT("array.n", n),
      CRACK_INT("array.l", l),
      CRACK_VEC3("geometry.bs", bs_pos),
      CRACK_VEC3("geometry.ris", ris_pos),
      CRACK_VEC3("geometry.eve", eve_pos),
      CRACK_VEC3("geometry.jammer", jammer_pos),
      CRACK_VEC3("geometry.user_center", user_center),
      CRACK_DOUBLE("geometry.user_radius", user_radius),
      CRACK_DOUBLE("pathloss.rho", rho),
      Field{"pathloss.rho_db",
            [](ScenarioConfig& c, const json& v, const std::string& p) {
              c.rho = db_to_linear(as_double(v, p));
            },
            nullptr},
      CRACK_DOUBLE("pathloss.iota.kb", iota.kb),
      CRACK_DOUBLE("pathloss.iota.kr", iota.kr),
      CRACK_DOUBLE("pathloss.iota.eb", iota.eb),
      CRACK_DOUBLE("pathloss.iota.er", iota.er),
      CRACK_DOUBLE("pathloss.iota.rb", iota.rb),
      CRACK_DOUBLE("pathloss.iota.jam", jam_iota),
      CRACK_DOUBLE("rician.kb", kappa.kb),
      CRACK_DOUBLE("rician.kr", kappa.kr),
      CRACK_DOUBLE("rician.eb", kappa.eb),
      CRACK_DOUBLE("rician.er", kappa.er),
      CRACK_DOUBLE("rician.rb", kappa.rb),
      CRACK_DOUBLE("rician.jam", jam_kappa),
      CRACK_DOUBLE("power.p_total", p_total),
      CRACK_DOUBLE("power.p_jam", p_jam),
      CRACK_DOUBLE("power.sigma2", sigma2),
      CRACK_DOUBLE("power.bandwidth", bandwidth),
      Field{"attack.phase_rule",
            [](ScenarioConfig& c, const json& v, const std::string& p) {
              c.phase_rule = parse_phase_rule(as_string(v, p));
            },
            [](const ScenarioConfig& c) {
              return json(std::string(to_string(c.phase_rule)));
            }},
      Field{"attack.ha_phase_rule",
            [](ScenarioConfig& c, const json& v, const std::string& p) {
              c.ha_phase_rule = parse_phase_rule(as_string(v, p));
            },
            [](const ScenarioConfig& c) {
              return json(std::string(to_string(c.ha_phase_rule)));
            }},
      CRACK_INT("attack.ha_candidates", ha_candidates),
      CRACK_INT("attack.ha_hold_blocks", ha_hold_blocks),
      CRACK_INT("attack.dris3_subslots", dris3_subslots),
      Field{"estimation.noisy",
            [](ScenarioConfig& c, const json& v, const std::string& p) {
              c.noisy_estimation = as_bool(v, p);
            },
            [](const ScenarioConfig& c) { return json(c.noisy_estimation); }},
      CRACK_DOUBLE("estimation.pilot_power", pilot_power),
      CRACK_INT("estimation.pilot_length", pilot_length),
      CRACK_DOUBLE("precoding.zf_cond_cap", zf_cond_cap),
      Field{"env.strategy",
            [](ScenarioConfig& c, const json& v, const std::string& p) {
              c.env_strategy = as_string(v, p);
            },
            [](const ScenarioConfig& c) { return json(c.env_strategy); }},
      CRACK_INT("env.episode_length", episode_length),
      CRACK_DOUBLE("env.amp_scale", amp_scale),
      Field{"run.seed",
            [](ScenarioConfig& c, const json& v, const std::string& p) {
              c.seed = as_u64(v, p);
            },
            [](const ScenarioConfig& c) { return json(c.seed); }},
      Field{"run.trials",
            [](ScenarioConfig& c, const json& v, const std::string& p) {
              c.trials = as_u64(v, p);
              if (c.trials == 0) bad_field(p, "expected a positive integer");
            },
            [](const ScenarioConfig& c) { return json(c.trials); }},
      Field{"run.workers",
            [](ScenarioConfig& c, const json& v, const std::string& p) {
              c.workers = static_cast<int>(as_u64(v, p));
            },
            [](const ScenarioConfig& c) { return json(c.workers); }},
  };
  return table;
}

#undef CRACK_DOUBLE
#undef CRACK_INT
#undef CRACK_VEC3

const Field* find_field(std::string_view key) {
  for (const auto& f : fields())
    if (f.path == key) return &f;
  // Leaf alias: accepted only if exactly one path ends in ".key".
  const Field* match = nullptr;
  const std::string suffix = "." + std::string(key);
  for (const auto& f : fields()) {
    if (f.path.size() > suffix.size() &&
        f.path.compare(f.path.size() - suffix.size(), suffix.size(), suffix) == 0) {
      if (match != nullptr)
        throw Error(ErrorCode::kParse, "ambiguous key '" + std::string(key) +
                                           "'; use the full dotted path");
      match = &f;
    }
  }
  return match;
}

void flatten(const json& node, const std::string& prefix,
             std::vector<std::pair<std::string, const json*>>& out) {
  for (auto it = node.begin(); it != node.end(); ++it) {
    const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it->is_object())
      flatten(*it, path, out);
    else
      out.emplace_back(path, &*it);
  }
}

}  // namespace

void validate(const ScenarioConfig& c) {
  auto fail = [](const std::string& msg) {
    throw Error(ErrorCode::kInvalidArgument, msg);
  };
  if (c.k >= c.m) fail("k must be smaller than m");
  if (c.l % 2 != 0) fail("l must be even");
  if (c.l < 2 || c.l > c.n) fail("l must lie in [2, n]");
  if (c.n % c.l != 0) fail("l must divide n");

  const std::pair<const char*, double> positives[] = {
      {"p_total", c.p_total},     {"p_jam", c.p_jam},
      {"sigma2", c.sigma2},       {"iota.kb", c.iota.kb},
      {"iota.kr", c.iota.kr},     {"iota.eb", c.iota.eb},
      {"iota.er", c.iota.er},     {"iota.rb", c.iota.rb},
      {"iota.jam", c.jam_iota},   {"kappa.kb", c.kappa.kb},
      {"kappa.kr", c.kappa.kr},   {"kappa.eb", c.kappa.eb},
      {"kappa.er", c.kappa.er},   {"kappa.rb", c.kappa.rb},
      {"kappa.jam", c.jam_kappa},
  };
  for (const auto& [name, value] : positives)
    if (!(value > 0.0)) fail(std::string(name) + " must be strictly positive");
  if (!(c.rho > 0.0 && c.rho <= 1.0)) fail("rho must lie in (0, 1]");
}

ScenarioConfig config_from_json(const json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::kParse, "config root must be an object");
  std::vector<std::pair<std::string, const json*>> leaves;
  flatten(doc, "", leaves);
  ScenarioConfig config;
  for (const auto& [path, value] : leaves) {
    const Field* f = find_field(path);
    if (f == nullptr || (f->path != path && path.find('.') != std::string::npos))
      throw Error(ErrorCode::kParse, "unknown config key '" + path + "'");
    f->set(config, *value, f->path);
  }
  validate(config);
  return config;
}

ScenarioConfig config_from_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, std::string("config parse error: ") + e.what());
  }
  return config_from_json(doc);
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return config_from_text(buf.str());
}

json config_to_json(const ScenarioConfig& config) {
  json doc = json::object();
  for (const auto& f : fields()) {
    if (!f.get) continue;
    doc[json::json_pointer("/" + [&] {
          std::string p = f.path;
          for (auto& ch : p)
            if (ch == '.') ch = '/';
          return p;
        }())] = f.get(config);
  }
  return doc;
}

void apply_override(ScenarioConfig& config, std::string_view key,
                    std::string_view value) {
  const Field* f = find_field(key);
  if (f == nullptr)
    throw Error(ErrorCode::kParse, "unknown config key '" + std::string(key) + "'");
  json v;
  try {
    v = json::parse(value);
  } catch (const json::parse_error&) {
    v = std::string(value);  // bare words such as nr-blind
  }
  f->set(config, v, f->path);
}

double amplitude_scale(const ScenarioConfig& config) {
  if (config.amp_scale > 0.0) return config.amp_scale;
  const double d = distance(config.user_center, config.bs_pos);
  return std::sqrt(config.rho * std::pow(d, -config.iota.kb));
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

Rng derive_rng(std::uint64_t seed, std::string_view label, std::uint64_t index) {
  std::uint64_t key = splitmix64(seed);
  key = splitmix64(key ^ fnv1a(label));
  key = splitmix64(key ^ index);
  // Expand the key into a full seed sequence so nearby keys do not give
  // correlated Mersenne Twister states.
  std::array<std::uint32_t, 8> words{};
  std::uint64_t s = key;
  for (std::size_t i = 0; i < words.size(); i += 2) {
    s = splitmix64(s);
    words[i] = static_cast<std::uint32_t>(s);
    words[i + 1] = static_cast<std::uint32_t>(s >> 32);
  }
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

}  // namespace crack
