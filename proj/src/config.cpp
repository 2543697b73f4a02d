#include "uniqlab/config.hpp"
#include "uniqlab/errors.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace uniqlab {

namespace {

std::vector<double> parse_numbers(const std::string& v, int line) {
  std::istringstream is(v);
  std::vector<double> out;
  double d;
  while (is >> d) out.push_back(d);
  if (out.empty() || !is.eof())
    fail(ErrorCode::config_parse, "line " + std::to_string(line) + ": expected numbers, got \"" + v + "\"");
  return out;
}

int face_index(const std::string& tag, int line) {
  static const char* names[6] = {"x1lo", "x1hi", "x2lo", "x2hi", "x3lo", "x3hi"};
  for (int i = 0; i < 6; ++i)
    if (tag == names[i]) return i;
  fail(ErrorCode::config_parse,
       "line " + std::to_string(line) + ": unknown face \"" + tag + "\" (use x1lo..x3hi)");
}

} // namespace

ProblemConfig parse_config(const std::string& text) {
  ProblemConfig cfg;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  bool box_seen = false, origin_seen = false;
  std::string mask_expr_text;
  std::vector<std::pair<std::string, std::string>> coeff_raw;

  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    if (auto hash = s.find('#'); hash != std::string::npos) s.erase(hash);
    auto notspace = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), notspace));
    s.erase(std::find_if(s.rbegin(), s.rend(), notspace).base(), s.end());
    if (s.empty()) continue;

    if (s.front() == '[') {
      if (s.back() != ']')
        fail(ErrorCode::config_parse, "line " + std::to_string(line) + ": unterminated section");
      section = s.substr(1, s.size() - 2);
      if (section != "domain" && section != "coefficients" && section != "grid")
        fail(ErrorCode::unknown_key,
             "line " + std::to_string(line) + ": unknown section [" + section + "]");
      continue;
    }

    auto eq = s.find('=');
    if (eq == std::string::npos)
      fail(ErrorCode::config_parse, "line " + std::to_string(line) + ": expected key = value");
    std::string key = s.substr(0, eq), val = s.substr(eq + 1);
    key.erase(std::find_if(key.rbegin(), key.rend(), notspace).base(), key.end());
    val.erase(val.begin(), std::find_if(val.begin(), val.end(), notspace));
    if (key.empty() || val.empty())
      fail(ErrorCode::config_parse, "line " + std::to_string(line) + ": empty key or value");

    if (section == "domain") {
      auto& d = cfg.domain;
      if (key == "dim") {
        d.dim = static_cast<int>(parse_numbers(val, line)[0]);
        if (d.dim < 1 || d.dim > 3)
          fail(ErrorCode::bad_parameter, "line " + std::to_string(line) + ": dim must be 1..3");
      } else if (key == "box") {
        auto v = parse_numbers(val, line);
        if (v.size() != 2 * static_cast<size_t>(d.dim))
          fail(ErrorCode::config_parse,
               "line " + std::to_string(line) + ": box needs 2*dim numbers (set dim first)");
        for (int a = 0; a < d.dim; ++a) {
          d.lo[static_cast<size_t>(a)] = v[static_cast<size_t>(2 * a)];
          d.hi[static_cast<size_t>(a)] = v[static_cast<size_t>(2 * a + 1)];
        }
        box_seen = true;
      } else if (key == "shape") {
        if (val == "box") d.shape = Shape::box;
        else if (val == "ball") d.shape = Shape::ball;
        else if (val == "mask-expr") d.shape = Shape::mask_expr;
        else if (val == "mask-file") d.shape = Shape::mask_file;
        else fail(ErrorCode::config_parse, "line " + std::to_string(line) + ": unknown shape " + val);
      } else if (key == "truncate") {
        std::istringstream fs(val);
        std::string tag;
        while (fs >> tag) d.truncation[static_cast<size_t>(face_index(tag, line))] = true;
      } else if (key == "center") {
        auto v = parse_numbers(val, line);
        for (size_t a = 0; a < v.size() && a < 3; ++a) d.center[a] = v[a];
      } else if (key == "radius") {
        d.radius = parse_numbers(val, line)[0];
      } else if (key == "puncture") {
        d.puncture_radius = parse_numbers(val, line)[0];
      } else if (key == "mask") {
        mask_expr_text = val;  // parsed after dim is final
      } else if (key == "mask_file") {
        d.mask_path = val;
      } else if (key == "origin") {
        auto v = parse_numbers(val, line);
        for (size_t a = 0; a < v.size() && a < 3; ++a) d.origin[a] = v[a];
        origin_seen = true;
      } else {
        fail(ErrorCode::unknown_key, "line " + std::to_string(line) + ": unknown [domain] key " + key);
      }
    } else if (section == "coefficients") {
      // packed position of cRC depends on the final dim, so stash by name
      static const char* known[] = {"c11", "c12", "c13", "c22", "c23", "c33",
                                    "drift1", "drift2", "drift3", "c0"};
      bool ok = false;
      for (const char* k : known)
        if (key == k) { ok = true; break; }
      if (!ok)
        fail(ErrorCode::unknown_key,
             "line " + std::to_string(line) + ": unknown [coefficients] key " + key);
      coeff_raw.emplace_back(key, val);
    } else if (section == "grid") {
      if (key == "resolution") {
        auto v = parse_numbers(val, line);
        cfg.grid.resolutions.clear();
        for (double r : v) cfg.grid.resolutions.push_back(static_cast<int>(r));
      } else if (key == "stencil") {
        cfg.grid.stencil_order = static_cast<int>(parse_numbers(val, line)[0]);
        if (cfg.grid.stencil_order < 1 || cfg.grid.stencil_order > 4)
          fail(ErrorCode::bad_parameter, "line " + std::to_string(line) + ": stencil must be 1..4");
      } else {
        fail(ErrorCode::unknown_key, "line " + std::to_string(line) + ": unknown [grid] key " + key);
      }
    } else {
      fail(ErrorCode::config_parse,
           "line " + std::to_string(line) + ": key outside any section");
    }
  }

  if (!box_seen)
    fail(ErrorCode::config_parse, "[domain] box is required");

  int dim = cfg.domain.dim;
  auto pk = [dim](int r, int c) {  // packed upper index, same layout as the sampler
    if (dim == 1) return 0;
    if (dim == 2) return r == 0 ? c : 2;
    static const int idx3[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
    return idx3[r][c];
  };
  for (auto& [key, val] : coeff_raw) {
    auto& c = cfg.coefficients;
    if (key == "c0") { c.zero_order = val; continue; }
    if (key.rfind("drift", 0) == 0) {
      int a = key[5] - '1';
      if (a >= dim)
        fail(ErrorCode::dimension_mismatch, key + " not available in dimension " + std::to_string(dim));
      c.drift[static_cast<size_t>(a)] = val;
      continue;
    }
    int r = key[1] - '1', cc = key[2] - '1';
    if (r >= dim || cc >= dim)
      fail(ErrorCode::dimension_mismatch, key + " not available in dimension " + std::to_string(dim));
    c.principal[static_cast<size_t>(pk(r, cc))] = val;
  }

  if (!mask_expr_text.empty()) cfg.domain.mask = Expr::parse(mask_expr_text, cfg.domain.dim);
  if (cfg.domain.shape == Shape::mask_expr && cfg.domain.mask.empty())
    fail(ErrorCode::config_parse, "shape = mask-expr requires a mask expression");
  if (cfg.domain.shape == Shape::mask_file && cfg.domain.mask_path.empty())
    fail(ErrorCode::config_parse, "shape = mask-file requires mask_file = path");
  if (cfg.domain.shape == Shape::ball && !(cfg.domain.radius > 0))
    fail(ErrorCode::bad_parameter, "shape = ball requires radius > 0");
  if (!origin_seen)
    for (int a = 0; a < cfg.domain.dim; ++a) cfg.domain.origin[static_cast<size_t>(a)] = 0;
  return cfg;
}

ProblemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io_failure, "cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

} // namespace uniqlab
