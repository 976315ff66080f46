#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "divopt/rng.hpp"

namespace divopt {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

// Row-major W x H grid of 8-bit RGB pixels.
class RasterImage {
 public:
  RasterImage() = default;
  RasterImage(std::size_t width, std::size_t height, Rgb fill = {});

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t pixel_count() const { return pixels_.size(); }

  Rgb& at(std::size_t x, std::size_t y) { return pixels_[y * width_ + x]; }
  const Rgb& at(std::size_t x, std::size_t y) const { return pixels_[y * width_ + x]; }
  const std::vector<Rgb>& pixels() const { return pixels_; }

  friend bool operator==(const RasterImage&, const RasterImage&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<Rgb> pixels_;
};

inline constexpr double kDefaultMseThreshold = 500.0;

// Mean squared difference over all W*H*3 channel values.
double mse(const RasterImage& image, const RasterImage& reference);
inline bool passes_mse_gate(double error, double threshold = kDefaultMseThreshold) {
  return error < threshold;
}

struct Hsv {
  double h;  // [0,1)
  double s;
  double v;
};

Hsv rgb_to_hsv(Rgb pixel);
Rgb hsv_to_rgb(Hsv hsv);

// Luminance (0.299R + 0.587G + 0.114B) / 255.
double luminance(Rgb pixel);

double feature_mean_hue(const RasterImage& image, bool circular = false);
double feature_sd_hue(const RasterImage& image);
double feature_mean_saturation(const RasterImage& image);
double feature_symmetry(const RasterImage& image);
double feature_smoothness(const RasterImage& image);
double feature_gcf(const RasterImage& image);

// Names accepted by image_feature(): mean_hue, sd_hue, mean_saturation,
// symmetry, smoothness, gcf.
const std::vector<std::string>& image_feature_names();
double image_feature(std::string_view name, const RasterImage& image, bool circular_hue = false);

// Self-adaptive walk length and the offset radius of the random-walk mutation.
struct WalkParams {
  double t_max = 1000.0;
  double t_lb = 1000.0;
  double t_ub = 20000.0;
  double factor = 2.0;  // F > 1
  int k = 8;
  int radius = 30;  // offset range [-r, r] per channel
};

// Success multiplies t_max by F (capped at t_ub); failure multiplies by
// F^(-1/k) (floored at t_lb).
WalkParams adapt_walk_length(WalkParams params, bool success);

enum class WalkDirection { up, down, left, right };

struct PixelPos {
  std::size_t x;
  std::size_t y;

  friend bool operator==(const PixelPos&, const PixelPos&) = default;
};

// One toroidal 4-neighbour move. "up" decreases the row index.
PixelPos wrap_step(PixelPos pos, WalkDirection dir, std::size_t width, std::size_t height);

struct Offset {
  int r = 0;
  int g = 0;
  int b = 0;
};

// Adds the offset to a pixel, saturating each channel to [0,255].
Rgb apply_offset(Rgb pixel, Offset offset);

// Walk of floor(t_max) steps from start; every visit adds the offset.
// Returns the mutated copy.
RasterImage offset_walk(const RasterImage& image, PixelPos start, Offset offset,
                        std::size_t steps, Rng& rng);

// Random start pixel and offset, then offset_walk with the current t_max.
RasterImage offset_random_walk_mutation(const RasterImage& image, const WalkParams& params,
                                        Rng& rng);

// Binary PPM (P6, maxval 255).
RasterImage read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const RasterImage& image);

// Deterministic 64x64 colour gradient used as the bundled reference image.
RasterImage make_gradient_reference(std::size_t width = 64, std::size_t height = 64);

}  // namespace divopt
