#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "neutral/conformal.hpp"
#include "neutral/interface.hpp"
#include "neutral/verify.hpp"

namespace neutral {

enum class ShapeKind { ellipse, droplet, laurent };

/// Shape as written in a config or shape file.
struct ShapeSpec {
  ShapeKind kind = ShapeKind::ellipse;
  double a = 1.25;  // ellipse semi-axes
  double b = 0.75;
  std::vector<Complex> tail;  // laurent b_1..b_K

  ConformalMap build() const;
  std::string describe() const;
};

enum class InterfaceMode { closed_form, calibrated, perfect, constant };

std::string to_string(InterfaceMode m);
InterfaceMode parse_mode(std::string_view text);

struct GridSpec {
  double xmin = -4.0, xmax = 4.0, ymin = -3.0, ymax = 3.0;
  int resolution = 81;  // points per axis
};

struct RunConfig {
  ShapeSpec shape;
  InterfaceMode mode = InterfaceMode::calibrated;
  double beta0 = 1.0;  // constant mode only
  Complex direction{1.0, 0.0};
  int N = 128;  // spectral truncation
  int n = 512;  // mesh nodes
  GridSpec grid;
  std::string out = "out";
};

inline constexpr int kMinSpectralN = 64;
inline constexpr int kMinMeshN = 128;

/// Flat `key = value` text; `#` starts a comment. Keys: kind, a, b, tail,
/// shape_file, mode, beta0, direction, N, n, grid, out. Relative shape_file
/// paths resolve against `base_dir`.
RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

/// Shape file: keys kind, a, b, tail (e.g. `tail = (0.1, 0), (0, 0.02)`).
ShapeSpec parse_shape(std::string_view text);
ShapeSpec load_shape(const std::filesystem::path& path);

/// Command-line form: `ellipse:A,B`, `droplet`, or `laurent:FILE`.
ShapeSpec parse_shape_arg(std::string_view arg);

/// `xmin,xmax,ymin,ymax,res`.
GridSpec parse_grid(std::string_view text);

/// Throws unless N >= 64 and n >= 128 (n even) and the grid is non-degenerate.
void validate(const RunConfig& config);

/// Interface parameter for the configured mode; perfect bonding has none.
InterfaceParameter design_parameter(const RunConfig& config, const ConformalMap& map);

/// Triangulated surface in a small OBJ subset: `v x y z`, optional `vn nx ny nz`
/// (one per vertex), and `f i j k` (1-based, `i/t/n` forms accepted). Without
/// vn lines the vertex normals are area-weighted face normals.
std::vector<BoundarySample> load_surface(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);

}  // namespace neutral
