#include "spadecb/source.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "spadecb/errors.hpp"

namespace spadecb {

namespace {

// Neumaier-compensated sum; pixel counts reach 1e5 and the density must sum
// to one within 1e-12.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

constexpr double kCenteredTol = 1e-9;

}  // namespace

double IntensityGrid::total_intensity() const {
  CompensatedSum s;
  for (double v : values) s.add(v);
  return s.value();
}

void IntensityGrid::validate() const {
  if (x_coords.empty() || y_coords.empty()) {
    throw DomainError("intensity grid has no pixels");
  }
  if (values.size() != x_coords.size() * y_coords.size()) {
    throw DomainError("intensity grid: value count does not match coordinates");
  }
  if (!(pixel_dx > 0.0) || !(pixel_dy > 0.0) || !std::isfinite(pixel_dx) ||
      !std::isfinite(pixel_dy)) {
    throw DomainError("intensity grid: pixel pitch must be positive");
  }
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0) {
      throw DomainError("intensity grid: pixel values must be finite and nonnegative");
    }
  }
}

NormalizedImage normalize(const IntensityGrid& grid, double scale_theta) {
  if (!(scale_theta > 0.0) || !std::isfinite(scale_theta)) {
    throw DomainError("normalize: scale must be positive");
  }
  grid.validate();
  const double total = grid.total_intensity();
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw InvalidSourceError("normalize: source has zero total intensity");
  }
  NormalizedImage img;
  img.scale_theta = scale_theta;
  img.total_intensity = total;
  for (std::size_t j = 0; j < grid.ny(); ++j) {
    for (std::size_t i = 0; i < grid.nx(); ++i) {
      const double v = grid.at(i, j);
      if (v == 0.0) continue;
      img.x.push_back(grid.x_coords[i] / scale_theta);
      img.y.push_back(grid.y_coords[j] / scale_theta);
      img.density.push_back(v / total);
    }
  }
  return img;
}

SecondMoments moments(const NormalizedImage& img) {
  CompensatedSum m10, m01, m20, m02, m11;
  for (std::size_t k = 0; k < img.size(); ++k) {
    const double w = img.density[k];
    const double x = img.x[k];
    const double y = img.y[k];
    m10.add(w * x);
    m01.add(w * y);
    m20.add(w * x * x);
    m02.add(w * y * y);
    m11.add(w * x * y);
  }
  return {m10.value(), m01.value(), m20.value(), m02.value(), m11.value()};
}

NormalizedImage center(const NormalizedImage& img) {
  const SecondMoments m = moments(img);
  NormalizedImage out = img;
  for (std::size_t k = 0; k < out.size(); ++k) {
    out.x[k] -= m.m10;
    out.y[k] -= m.m01;
  }
  return out;
}

std::array<double, 4> moment_matrix(const SecondMoments& mom) {
  return {mom.m20, mom.m11, mom.m11, mom.m02};
}

PrincipalFrame principal_frame(const SecondMoments& mom) {
  if (std::abs(mom.m10) >= kCenteredTol || std::abs(mom.m01) >= kCenteredTol) {
    throw PreconditionError("principal_frame: moments are not centred (m10 = " +
                            std::to_string(mom.m10) + ", m01 = " +
                            std::to_string(mom.m01) + ")");
  }
  const double a = mom.m20;
  const double d = mom.m02;
  const double b = mom.m11;
  const double mean = 0.5 * (a + d);
  const double r = std::hypot(0.5 * (a - d), b);
  const double vmax = mean + r;
  const double vmin = std::max(0.0, mean - r);

  if (r <= 1e-14 * std::abs(mean) || r == 0.0) {
    return {mean, mean, 0.0};
  }
  constexpr double half_pi = std::numbers::pi / 2.0;
  // Direction of the eigenvector of the larger eigenvalue, in (-pi/2, pi/2].
  const double phi = 0.5 * std::atan2(2.0 * b, a - d);
  if (phi >= 0.0 && phi < half_pi) return {vmax, vmin, phi};
  if (phi < 0.0) return {vmin, vmax, phi + half_pi};
  return {vmin, vmax, phi - half_pi};
}

SecondMoments moments_from_frame(const PrincipalFrame& f) {
  const double c = std::cos(f.theta);
  const double s = std::sin(f.theta);
  SecondMoments m;
  m.m20 = c * c * f.Vx + s * s * f.Vy;
  m.m02 = s * s * f.Vx + c * c * f.Vy;
  m.m11 = c * s * (f.Vx - f.Vy);
  return m;
}

SecondMoments rotate_moments(const SecondMoments& mom, double phi) {
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  SecondMoments r;
  r.m10 = c * mom.m10 - s * mom.m01;
  r.m01 = s * mom.m10 + c * mom.m01;
  r.m20 = c * c * mom.m20 - 2.0 * c * s * mom.m11 + s * s * mom.m02;
  r.m02 = s * s * mom.m20 + 2.0 * c * s * mom.m11 + c * c * mom.m02;
  r.m11 = c * s * (mom.m20 - mom.m02) + (c * c - s * s) * mom.m11;
  return r;
}

IntensityGrid rotate_grid(const IntensityGrid& grid, double phi) {
  grid.validate();
  IntensityGrid out = grid;
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  const double x0 = grid.x_coords.front();
  const double y0 = grid.y_coords.front();
  const auto nx = static_cast<long>(grid.nx());
  const auto ny = static_cast<long>(grid.ny());
  auto sample = [&](long i, long j) -> double {
    if (i < 0 || j < 0 || i >= nx || j >= ny) return 0.0;
    return grid.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  };
  for (long j = 0; j < ny; ++j) {
    for (long i = 0; i < nx; ++i) {
      const double px = grid.x_coords[i];
      const double py = grid.y_coords[j];
      // Pre-image of the output pixel under the rotation.
      const double qx = c * px + s * py;
      const double qy = -s * px + c * py;
      const double fx = (qx - x0) / grid.pixel_dx;
      const double fy = (qy - y0) / grid.pixel_dy;
      const long ix = static_cast<long>(std::floor(fx));
      const long iy = static_cast<long>(std::floor(fy));
      const double tx = fx - ix;
      const double ty = fy - iy;
      out.values[j * nx + i] = (1 - tx) * (1 - ty) * sample(ix, iy) +
                               tx * (1 - ty) * sample(ix + 1, iy) +
                               (1 - tx) * ty * sample(ix, iy + 1) +
                               tx * ty * sample(ix + 1, iy + 1);
    }
  }
  const double before = grid.total_intensity();
  const double after = out.total_intensity();
  if (after > 0.0) {
    for (double& v : out.values) v *= before / after;
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string to_string(SourceKind kind) {
  switch (kind) {
    case SourceKind::point: return "point";
    case SourceKind::line: return "line";
    case SourceKind::gaussian_blob: return "gaussian_blob";
    case SourceKind::cross: return "cross";
  }
  return "unknown";
}

SourceKind source_kind_from_string(const std::string& name) {
  if (name == "point") return SourceKind::point;
  if (name == "line") return SourceKind::line;
  if (name == "gaussian_blob" || name == "gaussian") return SourceKind::gaussian_blob;
  if (name == "cross") return SourceKind::cross;
  throw DomainError("unknown source kind '" + name + "'");
}

IntensityGrid empty_grid(const GridSpec& spec) {
  if (spec.nx < 8 || spec.ny < 8) {
    throw DomainError("grid resolution must be at least 8x8");
  }
  if (!(spec.half_extent_x > 0.0) || !(spec.half_extent_y > 0.0)) {
    throw DomainError("grid extent must be positive");
  }
  IntensityGrid g;
  g.pixel_dx = spec.dx();
  g.pixel_dy = spec.dy();
  g.x_coords.resize(spec.nx);
  g.y_coords.resize(spec.ny);
  for (int i = 0; i < spec.nx; ++i) g.x_coords[i] = (i - 0.5 * (spec.nx - 1)) * g.pixel_dx;
  for (int j = 0; j < spec.ny; ++j) g.y_coords[j] = (j - 0.5 * (spec.ny - 1)) * g.pixel_dy;
  g.values.assign(static_cast<std::size_t>(spec.nx) * spec.ny, 0.0);
  return g;
}

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw DomainError(std::string("source parameter '") + what + "' must be positive");
  }
}

// Nearest pixel centre, or -1 when the point is off the lattice.
long nearest_index(const std::vector<double>& coords, double pitch, double v) {
  const double f = (v - coords.front()) / pitch;
  const long k = std::lround(f);
  if (k < 0 || k >= static_cast<long>(coords.size())) return -1;
  return k;
}

// Axis-aligned up to rounding of the angle: returns 0 (along x), 1 (along y)
// or -1 (oblique).
int axis_of(double angle) {
  const double half_pi = std::numbers::pi / 2.0;
  const double k = std::round(angle / half_pi);
  if (std::abs(angle - k * half_pi) > 1e-12) return -1;
  return (static_cast<long long>(k) % 2 == 0) ? 0 : 1;
}

double overlap(double a0, double a1, double b0, double b1) {
  return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

void fill_line(IntensityGrid& g, const GridSpec& spec, double length, double angle) {
  const double half = 0.5 * length;
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  if (std::abs(c) * half > spec.half_extent_x + 1e-12 ||
      std::abs(s) * half > spec.half_extent_y + 1e-12) {
    throw DomainError("line source exceeds the grid extent");
  }
  const std::size_t nx = g.nx();
  const int axis = axis_of(angle);
  if (axis == 0) {
    const long j = nearest_index(g.y_coords, g.pixel_dy, 0.0);
    for (std::size_t i = 0; i < nx; ++i) {
      const double x = g.x_coords[i];
      g.values[j * nx + i] = overlap(x - 0.5 * g.pixel_dx, x + 0.5 * g.pixel_dx, -half, half);
    }
    return;
  }
  if (axis == 1) {
    const long i = nearest_index(g.x_coords, g.pixel_dx, 0.0);
    for (std::size_t j = 0; j < g.ny(); ++j) {
      const double y = g.y_coords[j];
      g.values[j * nx + i] = overlap(y - 0.5 * g.pixel_dy, y + 0.5 * g.pixel_dy, -half, half);
    }
    return;
  }
  const double pitch = std::min(g.pixel_dx, g.pixel_dy);
  const long samples = std::max<long>(64, static_cast<long>(std::ceil(16.0 * length / pitch)));
  for (long k = 0; k < samples; ++k) {
    const double t = -half + (k + 0.5) * length / samples;
    const long i = nearest_index(g.x_coords, g.pixel_dx, t * c);
    const long j = nearest_index(g.y_coords, g.pixel_dy, t * s);
    if (i < 0 || j < 0) continue;
    g.values[j * nx + i] += length / samples;
  }
}

void fill_blob(IntensityGrid& g, const GridSpec& spec, double sx, double sy, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const double ext_x = 3.0 * std::hypot(sx * c, sy * s);
  const double ext_y = 3.0 * std::hypot(sx * s, sy * c);
  if (ext_x > spec.half_extent_x + 1e-12 || ext_y > spec.half_extent_y + 1e-12) {
    throw DomainError("gaussian blob does not fit in the grid to 3 standard deviations");
  }
  const std::size_t nx = g.nx();
  for (std::size_t j = 0; j < g.ny(); ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      const double x = g.x_coords[i];
      const double y = g.y_coords[j];
      const double u = c * x + s * y;
      const double v = -s * x + c * y;
      g.values[j * nx + i] = std::exp(-0.5 * (u * u / (sx * sx) + v * v / (sy * sy)));
    }
  }
}

void fill_cross(IntensityGrid& g, const GridSpec& spec, double arm, double width, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  // Bounding box from the four outer corners of each arm.
  double ext_x = 0.0;
  double ext_y = 0.0;
  for (int arm_dir = 0; arm_dir < 2; ++arm_dir) {
    const double hu = arm_dir == 0 ? 0.5 * arm : 0.5 * width;
    const double hv = arm_dir == 0 ? 0.5 * width : 0.5 * arm;
    for (int su : {-1, 1}) {
      for (int sv : {-1, 1}) {
        const double u = su * hu;
        const double v = sv * hv;
        ext_x = std::max(ext_x, std::abs(c * u - s * v));
        ext_y = std::max(ext_y, std::abs(s * u + c * v));
      }
    }
  }
  if (ext_x > spec.half_extent_x + 1e-12 || ext_y > spec.half_extent_y + 1e-12) {
    throw DomainError("cross source exceeds the grid extent");
  }
  constexpr int kSuper = 4;
  const std::size_t nx = g.nx();
  for (std::size_t j = 0; j < g.ny(); ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      int inside = 0;
      for (int a = 0; a < kSuper; ++a) {
        for (int b = 0; b < kSuper; ++b) {
          const double x = g.x_coords[i] + ((a + 0.5) / kSuper - 0.5) * g.pixel_dx;
          const double y = g.y_coords[j] + ((b + 0.5) / kSuper - 0.5) * g.pixel_dy;
          const double u = c * x + s * y;
          const double v = -s * x + c * y;
          const bool horizontal = std::abs(u) <= 0.5 * arm && std::abs(v) <= 0.5 * width;
          const bool vertical = std::abs(v) <= 0.5 * arm && std::abs(u) <= 0.5 * width;
          if (horizontal || vertical) ++inside;
        }
      }
      g.values[j * nx + i] = static_cast<double>(inside);
    }
  }
}

}  // namespace

IntensityGrid make_source(const SourceSpec& source, const GridSpec& spec) {
  IntensityGrid g = empty_grid(spec);
  require_positive(spec.total_intensity, "intensity");
  switch (source.kind) {
    case SourceKind::point: {
      const long i = (spec.nx - 1) / 2;
      const long j = (spec.ny - 1) / 2;
      g.values[j * g.nx() + i] = 1.0;
      break;
    }
    case SourceKind::line:
      require_positive(source.length, "length");
      fill_line(g, spec, source.length, source.angle);
      break;
    case SourceKind::gaussian_blob:
      require_positive(source.sx, "sx");
      require_positive(source.sy, "sy");
      fill_blob(g, spec, source.sx, source.sy, source.angle);
      break;
    case SourceKind::cross:
      require_positive(source.arm_length, "arm_length");
      require_positive(source.arm_width, "arm_width");
      fill_cross(g, spec, source.arm_length, source.arm_width, source.angle);
      break;
  }
  const double total = g.total_intensity();
  if (!(total > 0.0)) {
    throw DomainError("source is below the pixel resolution of the grid");
  }
  for (double& v : g.values) v *= spec.total_intensity / total;
  return g;
}

}  // namespace spadecb
