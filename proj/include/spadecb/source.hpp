#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace spadecb {

/// Pixelated intensity distribution on a rectilinear grid.
///
/// `values[j * nx + i]` is the mean photon number per frame emitted by the
/// pixel centred at (x_coords[i], y_coords[j]), i.e. intensity times pixel
/// area. Optical transmission is assumed to be folded into the values.
struct IntensityGrid {
  std::vector<double> x_coords;
  std::vector<double> y_coords;
  std::vector<double> values;
  double pixel_dx = 1.0;
  double pixel_dy = 1.0;

  std::size_t nx() const { return x_coords.size(); }
  std::size_t ny() const { return y_coords.size(); }
  double at(std::size_t i, std::size_t j) const { return values[j * nx() + i]; }
  double total_intensity() const;

  // Throws DomainError on inconsistent sizes, negative or non-finite values,
  // or nonpositive pixel pitch. Zero total intensity is allowed here.
  void validate() const;
};

/// Source rescaled to unit total weight and dimensionless coordinates
/// (positions divided by the scale length). Pixels carrying no light are
/// dropped.
struct NormalizedImage {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> density;
  double scale_theta = 1.0;
  double total_intensity = 0.0;

  std::size_t size() const { return density.size(); }
};

struct SecondMoments {
  double m10 = 0.0;
  double m01 = 0.0;
  double m20 = 0.0;
  double m02 = 0.0;
  double m11 = 0.0;
};

/// Principal variances and orientation of a centred second-moment matrix:
/// [[m20, m11], [m11, m02]] = U(theta) diag(Vx, Vy) U(theta)^T with
/// U(theta) = [[cos, -sin], [sin, cos]] and theta in [0, pi/2).
struct PrincipalFrame {
  double Vx = 0.0;
  double Vy = 0.0;
  double theta = 0.0;
};

NormalizedImage normalize(const IntensityGrid& grid, double scale_theta);

SecondMoments moments(const NormalizedImage& img);

/// Shifts coordinates so the density-weighted centroid sits at the origin.
NormalizedImage center(const NormalizedImage& img);

/// Requires |m10|, |m01| < 1e-9. A degenerate (isotropic) frame reports theta = 0.
PrincipalFrame principal_frame(const SecondMoments& mom);

/// Inverse of principal_frame: centred moments with the given frame.
SecondMoments moments_from_frame(const PrincipalFrame& frame);

/// Exact moment-level rotation by phi (counter-clockwise): M -> R M R^T for the
/// second moments, R (m10, m01) for the first.
SecondMoments rotate_moments(const SecondMoments& mom, double phi);

std::array<double, 4> moment_matrix(const SecondMoments& mom);

/// Resamples a grid rotated by phi about the origin onto the same pixel lattice
/// (bilinear interpolation), then rescales to preserve total intensity. Used by
/// source builders and tests; the theory pipeline rotates moments instead.
IntensityGrid rotate_grid(const IntensityGrid& grid, double phi);

// ---------------------------------------------------------------------------
// Synthetic sources

enum class SourceKind { point, line, gaussian_blob, cross };

struct SourceSpec {
  SourceKind kind = SourceKind::point;
  double length = 0.0;      // line
  double sx = 0.0;          // gaussian_blob
  double sy = 0.0;
  double arm_length = 0.0;  // cross
  double arm_width = 0.0;
  double angle = 0.0;       // line, gaussian_blob, cross
};

/// Pixel lattice for synthetic sources. Pixel centres sit at
/// (i - (n - 1) / 2) * pitch, so odd resolutions place a pixel on the origin.
struct GridSpec {
  int nx = 65;
  int ny = 65;
  double half_extent_x = 1.0;
  double half_extent_y = 1.0;
  double total_intensity = 1.0;

  double dx() const { return 2.0 * half_extent_x / nx; }
  double dy() const { return 2.0 * half_extent_y / ny; }
};

IntensityGrid empty_grid(const GridSpec& spec);

/// Discretises a synthetic source. Axis-aligned lines occupy one pixel row or
/// column. Throws DomainError if the shape does not fit in the grid (Gaussian
/// blobs must fit to 3 standard deviations) or resolution is below 8x8.
IntensityGrid make_source(const SourceSpec& source, const GridSpec& grid);

std::string to_string(SourceKind kind);
SourceKind source_kind_from_string(const std::string& name);

// ---------------------------------------------------------------------------
// Loading

struct SourceConfig {
  SourceSpec source;
  GridSpec grid;
};

/// Key-value text ("key = value", '#' comments). Recognised keys: kind, length,
/// angle, sx, sy, arm_length, arm_width, nx, ny, extent (sets both half
/// extents), extent_x, extent_y, intensity.
SourceConfig parse_source_config(const std::string& text);
SourceConfig load_source_config(const std::string& path);

/// CSV pixel dump with header "x,y,intensity". Pixel centres must lie on a
/// rectilinear lattice; missing lattice points are zero.
IntensityGrid parse_pixel_csv(const std::string& text);
IntensityGrid load_pixel_csv(const std::string& path);

}  // namespace spadecb
