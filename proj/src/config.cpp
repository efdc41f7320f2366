#include "neutral/config.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

namespace neutral {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::map<std::string, std::string> parse_pairs(std::string_view text) {
  std::map<std::string, std::string> kv;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw Error("line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    if (key.empty()) throw Error("line " + std::to_string(lineno) + ": empty key");
    if (kv.count(key)) throw Error("duplicate key '" + key + "'");
    kv[key] = trim(std::string_view(body).substr(eq + 1));
  }
  return kv;
}

double to_double(std::string_view text, const std::string& what) {
  const std::string s = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw Error("invalid number for " + what + ": '" + s + "'");
  }
  return v;
}

int to_int(std::string_view text, const std::string& what) {
  const std::string s = trim(text);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error("invalid integer for " + what + ": '" + s + "'");
  }
  return v;
}

std::vector<double> to_list(std::string_view text, const std::string& what) {
  std::vector<double> out;
  std::string item;
  std::istringstream in{std::string(text)};
  while (std::getline(in, item, ',')) out.push_back(to_double(item, what));
  return out;
}

std::vector<Complex> to_pairs(const std::string& text) {
  static const std::regex pair(R"(\(\s*([^,()]+?)\s*,\s*([^,()]+?)\s*\))");
  std::vector<Complex> out;
  for (std::sregex_iterator it(text.begin(), text.end(), pair), end; it != end; ++it) {
    out.emplace_back(to_double((*it)[1].str(), "tail"), to_double((*it)[2].str(), "tail"));
  }
  // Everything outside the matched pairs must be separators.
  const std::string leftover = std::regex_replace(text, pair, "");
  if (leftover.find_first_not_of(" ,\t") != std::string::npos) {
    throw Error("tail must be a list of (re, im) pairs");
  }
  return out;
}

ShapeKind parse_kind(const std::string& s) {
  if (s == "ellipse") return ShapeKind::ellipse;
  if (s == "droplet") return ShapeKind::droplet;
  if (s == "laurent") return ShapeKind::laurent;
  throw Error("unknown shape kind '" + s + "' (expected ellipse, droplet or laurent)");
}

// Consumes the shape keys from kv.
ShapeSpec shape_from(std::map<std::string, std::string>& kv) {
  ShapeSpec s;
  if (auto it = kv.find("kind"); it != kv.end()) {
    s.kind = parse_kind(it->second);
    kv.erase(it);
  }
  if (auto it = kv.find("a"); it != kv.end()) {
    s.a = to_double(it->second, "a");
    kv.erase(it);
  }
  if (auto it = kv.find("b"); it != kv.end()) {
    s.b = to_double(it->second, "b");
    kv.erase(it);
  }
  if (auto it = kv.find("tail"); it != kv.end()) {
    s.tail = to_pairs(it->second);
    kv.erase(it);
  }
  if (s.kind == ShapeKind::laurent && s.tail.empty()) throw Error("laurent shape needs a tail");
  return s;
}

void reject_unknown(const std::map<std::string, std::string>& kv) {
  if (!kv.empty()) throw Error("unknown key '" + kv.begin()->first + "'");
}

}  // namespace

ConformalMap ShapeSpec::build() const {
  switch (kind) {
    case ShapeKind::ellipse:
      return ConformalMap::ellipse(a, b);
    case ShapeKind::droplet:
      return ConformalMap::droplet();
    case ShapeKind::laurent:
      return ConformalMap::laurent(tail);
  }
  throw Error("unknown shape kind");
}

std::string ShapeSpec::describe() const {
  std::ostringstream out;
  out.precision(17);
  switch (kind) {
    case ShapeKind::ellipse:
      out << "ellipse:" << a << "," << b;
      break;
    case ShapeKind::droplet:
      out << "droplet";
      break;
    case ShapeKind::laurent:
      out << "laurent:";
      for (std::size_t k = 0; k < tail.size(); ++k) {
        out << (k ? "," : "") << "(" << tail[k].real() << "," << tail[k].imag() << ")";
      }
      break;
  }
  return out.str();
}

std::string to_string(InterfaceMode m) {
  switch (m) {
    case InterfaceMode::closed_form:
      return "closed_form";
    case InterfaceMode::calibrated:
      return "calibrated";
    case InterfaceMode::perfect:
      return "perfect";
    case InterfaceMode::constant:
      return "constant";
  }
  return "unknown";
}

InterfaceMode parse_mode(std::string_view text) {
  const std::string s = trim(text);
  if (s == "closed_form") return InterfaceMode::closed_form;
  if (s == "calibrated") return InterfaceMode::calibrated;
  if (s == "perfect") return InterfaceMode::perfect;
  if (s == "constant") return InterfaceMode::constant;
  throw Error("unknown mode '" + s + "' (expected closed_form, calibrated, perfect or constant)");
}

GridSpec parse_grid(std::string_view text) {
  const std::vector<double> v = to_list(text, "grid");
  if (v.size() != 5) throw Error("grid needs xmin,xmax,ymin,ymax,res");
  GridSpec g{v[0], v[1], v[2], v[3], static_cast<int>(v[4])};
  if (static_cast<double>(g.resolution) != v[4]) throw Error("grid resolution must be an integer");
  return g;
}

ShapeSpec parse_shape(std::string_view text) {
  auto kv = parse_pairs(text);
  ShapeSpec s = shape_from(kv);
  reject_unknown(kv);
  return s;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

ShapeSpec load_shape(const std::filesystem::path& path) { return parse_shape(read_text(path)); }

ShapeSpec parse_shape_arg(std::string_view arg) {
  const std::string s = trim(arg);
  if (s == "droplet") return ShapeSpec{ShapeKind::droplet, 0.0, 0.0, {}};
  if (s.rfind("ellipse:", 0) == 0) {
    const std::vector<double> v = to_list(std::string_view(s).substr(8), "ellipse");
    if (v.size() != 2) throw Error("ellipse shape needs ellipse:A,B");
    return ShapeSpec{ShapeKind::ellipse, v[0], v[1], {}};
  }
  if (s.rfind("laurent:", 0) == 0) {
    ShapeSpec spec = load_shape(s.substr(8));
    if (spec.kind != ShapeKind::laurent) throw Error("laurent shape file must have kind = laurent");
    return spec;
  }
  throw Error("unknown shape '" + s + "' (expected ellipse:A,B, droplet or laurent:FILE)");
}

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  auto kv = parse_pairs(text);
  RunConfig c;
  if (auto it = kv.find("shape_file"); it != kv.end()) {
    if (kv.count("kind") || kv.count("tail")) throw Error("give either shape_file or inline shape keys");
    std::filesystem::path p = it->second;
    if (p.is_relative()) p = base_dir / p;
    c.shape = load_shape(p);
    kv.erase(it);
  } else {
    c.shape = shape_from(kv);
  }
  if (auto it = kv.find("mode"); it != kv.end()) {
    c.mode = parse_mode(it->second);
    kv.erase(it);
  }
  if (auto it = kv.find("beta0"); it != kv.end()) {
    c.beta0 = to_double(it->second, "beta0");
    kv.erase(it);
  }
  if (auto it = kv.find("direction"); it != kv.end()) {
    const std::vector<double> v = to_list(it->second, "direction");
    if (v.size() != 2) throw Error("direction needs two components");
    c.direction = {v[0], v[1]};
    kv.erase(it);
  }
  if (auto it = kv.find("N"); it != kv.end()) {
    c.N = to_int(it->second, "N");
    kv.erase(it);
  }
  if (auto it = kv.find("n"); it != kv.end()) {
    c.n = to_int(it->second, "n");
    kv.erase(it);
  }
  if (auto it = kv.find("grid"); it != kv.end()) {
    c.grid = parse_grid(it->second);
    kv.erase(it);
  }
  if (auto it = kv.find("out"); it != kv.end()) {
    c.out = it->second;
    kv.erase(it);
  }
  reject_unknown(kv);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_text(path), path.parent_path());
}

void validate(const RunConfig& c) {
  if (c.N < kMinSpectralN) throw Error("N must be at least " + std::to_string(kMinSpectralN));
  if (c.n < kMinMeshN || c.n % 2 != 0) {
    throw Error("n must be even and at least " + std::to_string(kMinMeshN));
  }
  const GridSpec& g = c.grid;
  if (!(g.xmax > g.xmin) || !(g.ymax > g.ymin) || g.resolution < 2) {
    throw Error("grid window must be non-empty with at least 2 points per axis");
  }
  if (c.mode == InterfaceMode::constant && !(c.beta0 >= 0.0)) throw Error("beta0 must be non-negative");
}

InterfaceParameter design_parameter(const RunConfig& config, const ConformalMap& map) {
  switch (config.mode) {
    case InterfaceMode::closed_form:
      return InterfaceParameter::closed_form(map);
    case InterfaceMode::calibrated:
      return InterfaceParameter::calibrated(map, config.N);
    case InterfaceMode::constant:
      return InterfaceParameter::constant(map, config.beta0);
    case InterfaceMode::perfect:
      break;
  }
  throw Error("perfect bonding has no interface parameter");
}

std::vector<BoundarySample> load_surface(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  std::vector<std::array<double, 3>> verts, vnorms;
  std::vector<std::array<int, 3>> faces;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v" || tag == "vn") {
      std::array<double, 3> p{};
      std::string tok;
      for (double& c : p) {
        if (!(ls >> tok)) throw Error("surface: " + tag + " needs three coordinates");
        c = to_double(tok, tag);
      }
      (tag == "v" ? verts : vnorms).push_back(p);
    } else if (tag == "f") {
      std::array<int, 3> f{};
      std::string tok;
      for (int& idx : f) {
        if (!(ls >> tok)) throw Error("surface: faces must be triangles");
        idx = to_int(tok.substr(0, tok.find('/')), "face index") - 1;
      }
      if (ls >> tok) throw Error("surface: faces must be triangles");
      faces.push_back(f);
    }
  }
  if (verts.empty()) throw Error("surface file has no vertices");
  if (!vnorms.empty() && vnorms.size() != verts.size()) {
    throw Error("surface: vn lines must match v lines one to one");
  }

  if (vnorms.empty()) {
    vnorms.assign(verts.size(), {0.0, 0.0, 0.0});
    for (const auto& f : faces) {
      for (int idx : f) {
        if (idx < 0 || idx >= static_cast<int>(verts.size())) throw Error("surface: face index out of range");
      }
      const auto& p = verts[f[0]];
      const auto& q = verts[f[1]];
      const auto& r = verts[f[2]];
      const double u[3] = {q[0] - p[0], q[1] - p[1], q[2] - p[2]};
      const double w[3] = {r[0] - p[0], r[1] - p[1], r[2] - p[2]};
      // Cross product length is twice the area, so summing it area-weights the normal.
      const double n[3] = {u[1] * w[2] - u[2] * w[1], u[2] * w[0] - u[0] * w[2], u[0] * w[1] - u[1] * w[0]};
      for (int idx : f)
        for (int j = 0; j < 3; ++j) vnorms[idx][j] += n[j];
    }
  }

  std::vector<BoundarySample> out;
  out.reserve(verts.size());
  for (std::size_t i = 0; i < verts.size(); ++i) {
    const auto& n = vnorms[i];
    const double len = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
    if (!(len > 0.0)) continue;  // isolated vertex
    out.push_back({verts[i], {n[0] / len, n[1] / len, n[2] / len}});
  }
  if (out.empty()) throw Error("surface file has no vertex with a normal");
  return out;
}

}  // namespace neutral
