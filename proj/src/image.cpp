#include "divopt/image.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>

#include "divopt/errors.hpp"

namespace divopt {

RasterImage::RasterImage(std::size_t width, std::size_t height, Rgb fill)
    : width_(width), height_(height), pixels_(width * height, fill) {
  if (width == 0 || height == 0) throw contract_error("RasterImage: dimensions must be positive");
}

double mse(const RasterImage& image, const RasterImage& reference) {
  if (image.width() != reference.width() || image.height() != reference.height())
    throw contract_error("mse: image dimensions differ from the reference");
  double total = 0.0;
  const auto& a = image.pixels();
  const auto& b = reference.pixels();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double dr = double(a[i].r) - b[i].r;
    const double dg = double(a[i].g) - b[i].g;
    const double db = double(a[i].b) - b[i].b;
    total += dr * dr + dg * dg + db * db;
  }
  return total / (3.0 * static_cast<double>(a.size()));
}

Hsv rgb_to_hsv(Rgb pixel) {
  const int r = pixel.r, g = pixel.g, b = pixel.b;
  const int hi = std::max({r, g, b});
  const int lo = std::min({r, g, b});
  const double delta = hi - lo;
  Hsv out{0.0, hi == 0 ? 0.0 : delta / hi, hi / 255.0};
  if (delta == 0) return out;
  double h;
  if (hi == r) {
    h = (g - b) / delta;
  } else if (hi == g) {
    h = (b - r) / delta + 2.0;
  } else {
    h = (r - g) / delta + 4.0;
  }
  h /= 6.0;
  if (h < 0.0) h += 1.0;
  if (h >= 1.0) h -= 1.0;
  out.h = h;
  return out;
}

Rgb hsv_to_rgb(Hsv hsv) {
  const double v = hsv.v * 255.0;
  const double c = v * hsv.s;
  const double hp = hsv.h * 6.0;
  const double x = c * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(hp) % 6) {
    case 0: r = c, g = x; break;
    case 1: r = x, g = c; break;
    case 2: g = c, b = x; break;
    case 3: g = x, b = c; break;
    case 4: r = x, b = c; break;
    default: r = c, b = x; break;
  }
  const double m = v - c;
  auto channel = [](double value) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(value), 0L, 255L));
  };
  return {channel(r + m), channel(g + m), channel(b + m)};
}

double luminance(Rgb pixel) {
  return (0.299 * pixel.r + 0.587 * pixel.g + 0.114 * pixel.b) / 255.0;
}

double feature_mean_hue(const RasterImage& image, bool circular) {
  const double n = static_cast<double>(image.pixel_count());
  if (!circular) {
    double total = 0.0;
    for (const Rgb& p : image.pixels()) total += rgb_to_hsv(p).h;
    return total / n;
  }
  double sx = 0.0, sy = 0.0;
  for (const Rgb& p : image.pixels()) {
    const double angle = 2.0 * std::numbers::pi * rgb_to_hsv(p).h;
    sx += std::cos(angle);
    sy += std::sin(angle);
  }
  if (std::hypot(sx, sy) < 1e-12 * n) return 0.0;
  double h = std::atan2(sy, sx) / (2.0 * std::numbers::pi);
  if (h < 0.0) h += 1.0;
  return h >= 1.0 ? 0.0 : h;
}

double feature_sd_hue(const RasterImage& image) {
  const double n = static_cast<double>(image.pixel_count());
  double sum = 0.0, sum_sq = 0.0;
  for (const Rgb& p : image.pixels()) {
    const double h = rgb_to_hsv(p).h;
    sum += h;
    sum_sq += h * h;
  }
  const double mean = sum / n;
  return std::sqrt(std::max(0.0, sum_sq / n - mean * mean));
}

double feature_mean_saturation(const RasterImage& image) {
  double total = 0.0;
  for (const Rgb& p : image.pixels()) total += rgb_to_hsv(p).s;
  return total / static_cast<double>(image.pixel_count());
}

double feature_symmetry(const RasterImage& image) {
  const std::size_t w = image.width(), h = image.height();
  double total = 0.0;
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      total += std::fabs(luminance(image.at(x, y)) - luminance(image.at(w - 1 - x, y)));
    }
  }
  return 1.0 - total / static_cast<double>(image.pixel_count());
}

double feature_smoothness(const RasterImage& image) {
  const double n = static_cast<double>(image.pixel_count());
  double sum = 0.0;
  for (const Rgb& p : image.pixels()) sum += luminance(p);
  const double mean = sum / n;
  double var = 0.0;
  for (const Rgb& p : image.pixels()) {
    const double dl = luminance(p) - mean;
    var += dl * dl;
  }
  return 1.0 / (1.0 + var / n);
}

namespace {

constexpr std::array<std::size_t, 9> kGcfSizes{1, 2, 4, 8, 16, 25, 50, 100, 200};

double gcf_weight(std::size_t i) {
  const double t = static_cast<double>(i) / 9.0;
  return (-0.406385 * t + 0.334573) * t + 0.0877526;
}

// Mean 4-neighbour contrast of perceptual luminance on s x s superpixels
// averaged in linear luminance. Remainder rows and columns are dropped.
double local_contrast(const std::vector<double>& linear, std::size_t w, std::size_t h,
                      std::size_t s) {
  const std::size_t cols = w / s, rows = h / s;
  std::vector<double> perceptual(cols * rows);
  for (std::size_t by = 0; by < rows; ++by) {
    for (std::size_t bx = 0; bx < cols; ++bx) {
      double sum = 0.0;
      for (std::size_t y = by * s; y < (by + 1) * s; ++y)
        for (std::size_t x = bx * s; x < (bx + 1) * s; ++x) sum += linear[y * w + x];
      perceptual[by * cols + bx] = 100.0 * std::sqrt(sum / static_cast<double>(s * s));
    }
  }
  double total = 0.0;
  for (std::size_t y = 0; y < rows; ++y) {
    for (std::size_t x = 0; x < cols; ++x) {
      const double centre = perceptual[y * cols + x];
      double diff = 0.0;
      int neighbours = 0;
      auto visit = [&](std::size_t nx, std::size_t ny) {
        diff += std::fabs(centre - perceptual[ny * cols + nx]);
        ++neighbours;
      };
      if (x > 0) visit(x - 1, y);
      if (x + 1 < cols) visit(x + 1, y);
      if (y > 0) visit(x, y - 1);
      if (y + 1 < rows) visit(x, y + 1);
      total += diff / neighbours;
    }
  }
  return total / static_cast<double>(cols * rows);
}

}  // namespace

double feature_gcf(const RasterImage& image) {
  const std::size_t w = image.width(), h = image.height();
  std::vector<double> linear(image.pixel_count());
  for (std::size_t i = 0; i < linear.size(); ++i)
    linear[i] = std::pow(luminance(image.pixels()[i]), 2.2);

  double all_weights = 0.0, used_weights = 0.0, weighted = 0.0;
  for (std::size_t i = 1; i <= kGcfSizes.size(); ++i) {
    const std::size_t s = kGcfSizes[i - 1];
    all_weights += gcf_weight(i);
    // A resolution needs at least two superpixels to define any contrast.
    if (s > std::min(w, h) || (w / s) * (h / s) < 2) continue;
    used_weights += gcf_weight(i);
    weighted += gcf_weight(i) * local_contrast(linear, w, h, s);
  }
  if (used_weights == 0.0) return 0.0;
  return weighted * all_weights / used_weights;
}

const std::vector<std::string>& image_feature_names() {
  static const std::vector<std::string> names{"mean_hue",  "sd_hue",     "mean_saturation",
                                              "symmetry",  "smoothness", "gcf"};
  return names;
}

double image_feature(std::string_view name, const RasterImage& image, bool circular_hue) {
  if (name == "mean_hue") return feature_mean_hue(image, circular_hue);
  if (name == "sd_hue") return feature_sd_hue(image);
  if (name == "mean_saturation") return feature_mean_saturation(image);
  if (name == "symmetry") return feature_symmetry(image);
  if (name == "smoothness") return feature_smoothness(image);
  if (name == "gcf") return feature_gcf(image);
  throw config_error("unknown image feature '" + std::string(name) + "'");
}

WalkParams adapt_walk_length(WalkParams params, bool success) {
  if (success) {
    params.t_max = std::min(params.factor * params.t_max, params.t_ub);
  } else {
    params.t_max = std::max(std::pow(params.factor, -1.0 / params.k) * params.t_max, params.t_lb);
  }
  return params;
}

PixelPos wrap_step(PixelPos pos, WalkDirection dir, std::size_t width, std::size_t height) {
  switch (dir) {
    case WalkDirection::up: pos.y = (pos.y + height - 1) % height; break;
    case WalkDirection::down: pos.y = (pos.y + 1) % height; break;
    case WalkDirection::left: pos.x = (pos.x + width - 1) % width; break;
    case WalkDirection::right: pos.x = (pos.x + 1) % width; break;
  }
  return pos;
}

Rgb apply_offset(Rgb pixel, Offset offset) {
  auto add = [](std::uint8_t c, int o) {
    return static_cast<std::uint8_t>(std::clamp(int(c) + o, 0, 255));
  };
  return {add(pixel.r, offset.r), add(pixel.g, offset.g), add(pixel.b, offset.b)};
}

RasterImage offset_walk(const RasterImage& image, PixelPos start, Offset offset,
                        std::size_t steps, Rng& rng) {
  RasterImage out = image;
  std::uniform_int_distribution<int> direction(0, 3);
  PixelPos pos = start;
  for (std::size_t t = 0; t < steps; ++t) {
    Rgb& px = out.at(pos.x, pos.y);
    px = apply_offset(px, offset);
    pos = wrap_step(pos, static_cast<WalkDirection>(direction(rng)), out.width(), out.height());
  }
  return out;
}

RasterImage offset_random_walk_mutation(const RasterImage& image, const WalkParams& params,
                                        Rng& rng) {
  if (params.t_max < 1.0) throw contract_error("offset_random_walk_mutation: t_max must be >= 1");
  std::uniform_int_distribution<std::size_t> col(0, image.width() - 1);
  std::uniform_int_distribution<std::size_t> row(0, image.height() - 1);
  std::uniform_int_distribution<int> shift(-params.radius, params.radius);
  const PixelPos start{col(rng), row(rng)};
  const Offset offset{shift(rng), shift(rng), shift(rng)};
  return offset_walk(image, start, offset, static_cast<std::size_t>(std::floor(params.t_max)), rng);
}

namespace {

// Next header token of a PPM, skipping whitespace and '#' comments.
std::string ppm_token(std::istream& in) {
  std::string token;
  for (;;) {
    const int c = in.get();
    if (c == EOF) break;
    if (c == '#') {
      std::string ignored;
      std::getline(in, ignored);
      if (!token.empty()) break;
      continue;
    }
    if (std::isspace(c)) {
      if (!token.empty()) break;
      continue;
    }
    token.push_back(static_cast<char>(c));
  }
  return token;
}

}  // namespace

RasterImage read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path.string());
  if (ppm_token(in) != "P6") throw io_error(path.string() + ": not a binary PPM (P6)");
  std::size_t w = 0, h = 0, maxval = 0;
  try {
    w = std::stoul(ppm_token(in));
    h = std::stoul(ppm_token(in));
    maxval = std::stoul(ppm_token(in));
  } catch (const std::exception&) {
    throw io_error(path.string() + ": malformed PPM header");
  }
  if (maxval != 255) throw io_error(path.string() + ": only maxval 255 is supported");
  if (w == 0 || h == 0) throw io_error(path.string() + ": empty image");
  RasterImage image(w, h);
  std::vector<unsigned char> raw(w * h * 3);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size()))
    throw io_error(path.string() + ": truncated pixel data");
  for (std::size_t i = 0; i < w * h; ++i)
    image.at(i % w, i / w) = {raw[3 * i], raw[3 * i + 1], raw[3 * i + 2]};
  return image;
}

void write_ppm(const std::filesystem::path& path, const RasterImage& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open " + path.string() + " for writing");
  out << "P6\n" << image.width() << ' ' << image.height() << "\n255\n";
  for (const Rgb& p : image.pixels()) {
    const char bytes[3] = {static_cast<char>(p.r), static_cast<char>(p.g), static_cast<char>(p.b)};
    out.write(bytes, 3);
  }
  if (!out) throw io_error("write failed: " + path.string());
}

RasterImage make_gradient_reference(std::size_t width, std::size_t height) {
  RasterImage image(width, height);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      const double fx = width > 1 ? double(x) / double(width - 1) : 0.0;
      const double fy = height > 1 ? double(y) / double(height - 1) : 0.0;
      image.at(x, y) = {static_cast<std::uint8_t>(std::lround(40 + 200 * fx)),
                        static_cast<std::uint8_t>(std::lround(40 + 180 * fy)),
                        static_cast<std::uint8_t>(std::lround(200 - 120 * fx))};
    }
  }
  return image;
}

}  // namespace divopt
