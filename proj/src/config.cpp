#include "spdeftle/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace spdeftle {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& allowed_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"campaign", {"regime", "model", "samples", "seed", "output_path"}},
      {"parameters",
       {"nu", "sigma", "epsilon", "epsilon_grid", "slow_horizon", "variant", "cubic_coeff", "omega0_horizon",
        "omega0_events", "omega0_scan_limit"}},
      {"numerics", {"n_modes", "dt", "threads"}},
  };
  return keys;
}

std::string trim(std::string s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

bool to_double(const std::string& s, double& out) {
  auto t = trim(s);
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  return ec == std::errc() && p == t.data() + t.size() && !t.empty();
}

bool to_u64(const std::string& s, std::uint64_t& out) {
  auto t = trim(s);
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  return ec == std::errc() && p == t.data() + t.size() && !t.empty();
}

}  // namespace

ConfigResult parse_config(std::string_view text) {
  ConfigResult res;
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    res.errors.push_back("syntax error at line " + std::to_string(e.line()) + ": " + e.message());
    return res;
  }

  Campaign c;
  bool have_regime = false, regime_seen = false;
  auto& errs = res.errors;
  const auto& allowed = allowed_keys();

  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      errs.push_back("key '" + section + "' must be inside a [campaign], [parameters] or [numerics] section");
      continue;
    }
    auto sec = allowed.find(section);
    if (sec == allowed.end()) {
      errs.push_back("unknown section [" + section + "]");
      continue;
    }
    for (const auto& [key, node] : body) {
      const std::string val = trim(node.data());
      const std::string where = "[" + section + "] " + key;
      if (!sec->second.count(key)) {
        errs.push_back("unknown key '" + key + "' in [" + section + "]");
        continue;
      }
      auto real = [&](double& dst) {
        if (!to_double(val, dst)) errs.push_back(where + ": expected a number, got '" + val + "'");
      };
      auto count = [&](auto& dst) {
        std::uint64_t v = 0;
        if (!to_u64(val, v))
          errs.push_back(where + ": expected a non-negative integer, got '" + val + "'");
        else
          dst = static_cast<std::remove_reference_t<decltype(dst)>>(v);
      };
      if (key == "regime") {
        regime_seen = true;
        auto r = parse_regime(val);
        if (!r)
          errs.push_back(where + ": unknown regime '" + val +
                         "' (I, II, III, IV-critical, IV-small-nu, approx-order, linearization, density, birkhoff)");
        else {
          c.regime = *r;
          have_regime = true;
        }
      } else if (key == "model") {
        c.model = val;
      } else if (key == "samples") {
        count(c.samples);
      } else if (key == "seed") {
        count(c.seed);
      } else if (key == "output_path") {
        c.output_path = val;
      } else if (key == "nu") {
        real(c.nu);
      } else if (key == "sigma") {
        real(c.sigma);
      } else if (key == "epsilon") {
        real(c.epsilon);
      } else if (key == "slow_horizon") {
        real(c.slow_horizon);
      } else if (key == "cubic_coeff") {
        real(c.cubic);
      } else if (key == "omega0_horizon") {
        real(c.omega0_horizon);
      } else if (key == "omega0_events") {
        count(c.omega0_events);
      } else if (key == "omega0_scan_limit") {
        count(c.omega0_scan_limit);
      } else if (key == "n_modes") {
        count(c.n_modes);
      } else if (key == "dt") {
        real(c.dt);
      } else if (key == "threads") {
        count(c.threads);
      } else if (key == "variant") {
        if (val == "a1")
          c.variant = AmplitudeVariant::A1;
        else if (val == "a2")
          c.variant = AmplitudeVariant::A2;
        else
          errs.push_back(where + ": variant must be a1 or a2");
      } else if (key == "epsilon_grid") {
        std::stringstream ss(val);
        std::string item;
        c.epsilon_grid.clear();
        while (std::getline(ss, item, ',')) {
          double e = 0.0;
          if (!to_double(item, e))
            errs.push_back(where + ": bad list entry '" + trim(item) + "'");
          else
            c.epsilon_grid.push_back(e);
        }
      }
    }
  }
  if (!regime_seen) errs.push_back("missing required key 'regime' in [campaign]");
  if (have_regime) {
    try {
      model_by_name(c.model);
    } catch (const std::exception& e) {
      errs.push_back(std::string("[campaign] model: ") + e.what());
    }
  }
  if (have_regime && errs.empty()) {
    for (auto& v : resolve_campaign(c)) errs.push_back(std::move(v));
  } else if (have_regime) {
    // still report gate problems alongside syntax problems
    Campaign probe = c;
    for (auto& v : resolve_campaign(probe)) errs.push_back(std::move(v));
  }
  if (errs.empty()) res.campaign = c;
  return res;
}

ConfigResult load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    ConfigResult r;
    r.errors.push_back("cannot open config file '" + path + "'");
    return r;
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace spdeftle
