#include <algorithm>
#include <cmath>
#include <map>

#include "spadecb/csv.hpp"
#include "spadecb/errors.hpp"
#include "spadecb/source.hpp"

namespace spadecb {

SourceConfig parse_source_config(const std::string& text) {
  SourceConfig cfg;
  const auto all = csv::lines(text);
  for (std::size_t n = 0; n < all.size(); ++n) {
    const int row = static_cast<int>(n) + 1;
    std::string line = all[n];
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = csv::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", row);
    const std::string key = csv::trim(line.substr(0, eq));
    const std::string value = csv::trim(line.substr(eq + 1));
    auto num = [&] { return csv::parse_double(value, row, 0); };
    auto integer = [&] { return static_cast<int>(csv::parse_int(value, row, 0)); };
    if (key == "kind") cfg.source.kind = source_kind_from_string(value);
    else if (key == "length") cfg.source.length = num();
    else if (key == "angle") cfg.source.angle = num();
    else if (key == "sx") cfg.source.sx = num();
    else if (key == "sy") cfg.source.sy = num();
    else if (key == "arm_length") cfg.source.arm_length = num();
    else if (key == "arm_width") cfg.source.arm_width = num();
    else if (key == "nx") cfg.grid.nx = integer();
    else if (key == "ny") cfg.grid.ny = integer();
    else if (key == "extent") cfg.grid.half_extent_x = cfg.grid.half_extent_y = num();
    else if (key == "extent_x") cfg.grid.half_extent_x = num();
    else if (key == "extent_y") cfg.grid.half_extent_y = num();
    else if (key == "intensity") cfg.grid.total_intensity = num();
    else throw ParseError("unknown key '" + key + "'", row);
  }
  return cfg;
}

SourceConfig load_source_config(const std::string& path) {
  return parse_source_config(csv::read_file(path));
}

namespace {

// Sorted distinct values, merging those closer than tol.
std::vector<double> distinct(std::vector<double> v, double tol) {
  std::sort(v.begin(), v.end());
  std::vector<double> out;
  for (double x : v) {
    if (out.empty() || x - out.back() > tol) out.push_back(x);
  }
  return out;
}

double lattice_pitch(const std::vector<double>& u) {
  if (u.size() < 2) return 1.0;
  double pitch = u[1] - u[0];
  for (std::size_t k = 2; k < u.size(); ++k) pitch = std::min(pitch, u[k] - u[k - 1]);
  return pitch;
}

}  // namespace

IntensityGrid parse_pixel_csv(const std::string& text) {
  const auto all = csv::lines(text);
  struct Pixel {
    double x, y, v;
  };
  std::vector<Pixel> pixels;
  bool header_seen = false;
  for (std::size_t n = 0; n < all.size(); ++n) {
    const int row = static_cast<int>(n) + 1;
    const std::string line = csv::trim(all[n]);
    if (line.empty() || line[0] == '#') continue;
    const auto fields = csv::split(line);
    if (!header_seen) {
      if (fields.size() != 3 || fields[0] != "x" || fields[1] != "y" || fields[2] != "intensity") {
        throw ParseError("expected header 'x,y,intensity'", row, 1);
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 3) {
      throw ParseError("expected 3 columns, found " + std::to_string(fields.size()), row,
                       static_cast<int>(std::min<std::size_t>(fields.size(), 3)) + 1);
    }
    Pixel p{csv::parse_double(fields[0], row, 1), csv::parse_double(fields[1], row, 2),
            csv::parse_double(fields[2], row, 3)};
    if (p.v < 0.0 || !std::isfinite(p.v)) throw ParseError("negative intensity", row, 3);
    pixels.push_back(p);
  }
  if (!header_seen) throw ParseError("missing header 'x,y,intensity'", 1, 1);
  if (pixels.empty()) throw ParseError("pixel dump contains no pixels", 0);

  std::vector<double> xs, ys;
  for (const auto& p : pixels) {
    xs.push_back(p.x);
    ys.push_back(p.y);
  }
  double span = 0.0;
  for (const auto& p : pixels) span = std::max({span, std::abs(p.x), std::abs(p.y)});
  const double tol = 1e-9 * std::max(1.0, span);
  const auto ux = distinct(xs, tol);
  const auto uy = distinct(ys, tol);
  const double dx = lattice_pitch(ux);
  const double dy = lattice_pitch(uy);
  // Complete lattice between the extreme coordinates.
  auto lattice = [](const std::vector<double>& u, double pitch) {
    const long n = std::lround((u.back() - u.front()) / pitch) + 1;
    std::vector<double> out(static_cast<std::size_t>(n));
    for (long k = 0; k < n; ++k) out[k] = u.front() + k * pitch;
    return out;
  };
  IntensityGrid g;
  g.pixel_dx = dx;
  g.pixel_dy = dy;
  g.x_coords = lattice(ux, dx);
  g.y_coords = lattice(uy, dy);
  g.values.assign(g.nx() * g.ny(), 0.0);
  for (std::size_t k = 0; k < pixels.size(); ++k) {
    const auto& p = pixels[k];
    const double fi = (p.x - g.x_coords.front()) / dx;
    const double fj = (p.y - g.y_coords.front()) / dy;
    const long i = std::lround(fi);
    const long j = std::lround(fj);
    if (std::abs(fi - i) > 1e-6 || std::abs(fj - j) > 1e-6) {
      throw ParseError("pixel is off the rectilinear lattice", 0);
    }
    g.values[static_cast<std::size_t>(j) * g.nx() + i] += p.v;
  }
  g.validate();
  return g;
}

IntensityGrid load_pixel_csv(const std::string& path) {
  return parse_pixel_csv(csv::read_file(path));
}

}  // namespace spadecb
