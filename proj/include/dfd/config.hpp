#ifndef DFD_CONFIG_HPP
#define DFD_CONFIG_HPP

// Run configuration: key=value text files, per-key overrides, and the resolved
// copy written next to every run's outputs.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dfd/blur_math.hpp"
#include "dfd/edges.hpp"
#include "dfd/errors.hpp"
#include "dfd/experiment.hpp"
#include "dfd/pipeline.hpp"

namespace dfd::config {

inline constexpr std::string_view kOutDirEnv = "DFD_OUT_DIR";

/// "make3d" (fixed Make3D grid) or "cells:WxH" (whole cells centred in the image).
struct GridChoice {
  bool make3d = false;
  int cell_width = experiment::kMake3dCellWidth;
  int cell_height = experiment::kMake3dCellHeight;

  [[nodiscard]] experiment::GridSpec spec() const {
    if (make3d) return experiment::GridSpec::make3d();
    return {std::nullopt, cell_width, cell_height};
  }
  [[nodiscard]] pipeline::SuperpixelGrid resolve(int width, int height) const {
    return spec().resolve(width, height);
  }
  [[nodiscard]] std::string text() const {
    if (make3d) return "make3d";
    return "cells:" + std::to_string(cell_width) + "x" + std::to_string(cell_height);
  }
};

struct RunConfig {
  double sigma1 = blur::kDefaultReblur;
  double sigma_min = pipeline::kDefaultSigmaMin;
  double sigma_max = pipeline::kDefaultSigmaMax;
  double curve_start = 0.05;
  double curve_stop = 10.0;
  double curve_step = 0.05;
  edges::CannyParams canny;
  double angle_tol_deg = 15.0;
  int radius = 3;
  double min_contrast = 0.02;
  double centering_tol = 0.05;
  edges::SamplingMode sampling = edges::SamplingMode::nearest_axis;
  GridChoice grid;
  std::optional<double> d_min;  // unset: taken from ground truth or plane depths
  std::optional<double> d_max;
  std::uint64_t seed = 1;
  int texture_size = 512;
  int texture_block = 48;
  int sample_bits = 16;
  double subjective_blur = 0.8;
  std::filesystem::path out_dir = "run";

  [[nodiscard]] edges::EdgeConfig edge_config() const {
    edges::EdgeConfig e;
    e.canny = canny;
    e.radius = radius;
    e.angle_tol = angle_tol_deg * std::numbers::pi / 180.0;
    e.min_contrast = min_contrast;
    e.centering_tol = centering_tol;
    e.sampling = sampling;
    return e;
  }

  [[nodiscard]] pipeline::PipelineConfig pipeline_config() const {
    pipeline::PipelineConfig p;
    p.edges = edge_config();
    return p;
  }

  [[nodiscard]] experiment::EvalConfig eval_config() const {
    experiment::EvalConfig e;
    e.pipeline = pipeline_config();
    e.grid = grid.spec();
    e.sigma_min = sigma_min;
    e.sigma_max = sigma_max;
    e.d_min = d_min;
    e.d_max = d_max;
    return e;
  }

  /// Calibration from explicit bounds, falling back to `fallback_min/max`.
  [[nodiscard]] pipeline::Calibration calibration(std::optional<double> fallback_min = {},
                                                  std::optional<double> fallback_max = {}) const {
    const auto lo = d_min ? d_min : fallback_min;
    const auto hi = d_max ? d_max : fallback_max;
    if (!lo || !hi) throw ValidationError("d_min and d_max must be set for this command");
    return pipeline::fit_calibration(*lo, *hi, sigma_min, sigma_max);
  }

  void validate() const {
    if (!(sigma1 > 0.0) || !std::isfinite(sigma1)) throw ValidationError("sigma1 must be > 0");
    if (!(sigma_min >= 0.0) || !(sigma_min < sigma_max) || !std::isfinite(sigma_max)) {
      throw ValidationError("need 0 <= sigma_min < sigma_max");
    }
    if (!(curve_start > 0.0) || !(curve_step > 0.0) || !(curve_stop >= curve_start)) {
      throw ValidationError("curve grid needs 0 < start <= stop and step > 0");
    }
    edge_config().validate();
    if (d_min && !(*d_min > 0.0)) throw ValidationError("d_min must be > 0");
    if (d_min && d_max && !(*d_min < *d_max)) throw ValidationError("need d_min < d_max");
    if (texture_size < 8) throw ValidationError("texture_size must be >= 8");
    if (texture_block < 4) throw ValidationError("texture_block must be >= 4");
    if (sample_bits != 8 && sample_bits != 16) throw ValidationError("sample_bits must be 8 or 16");
    if (!(subjective_blur >= 0.0)) throw ValidationError("subjective_blur must be >= 0");
    if (out_dir.empty()) throw ValidationError("out_dir must not be empty");
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw ValidationError(key + ": '" + v + "' is not a finite number");
  }
  return out;
}

template <class Int>
Int to_int(const std::string& key, const std::string& v) {
  Int out{};
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ValidationError(key + ": '" + v + "' is not an integer");
  }
  return out;
}

inline std::optional<double> to_bound(const std::string& key, const std::string& v) {
  if (v == "auto") return std::nullopt;
  return to_double(key, v);
}

inline std::string bound_text(const std::optional<double>& v) {
  return v ? experiment::format_sig(*v) : "auto";
}

inline GridChoice to_grid(const std::string& key, const std::string& v) {
  GridChoice g;
  if (v == "make3d") {
    g.make3d = true;
    return g;
  }
  const std::string_view prefix = "cells:";
  const auto x = v.find('x', prefix.size());
  if (v.rfind(prefix, 0) != 0 || x == std::string::npos) {
    throw ValidationError(key + ": '" + v + "' must be make3d or cells:WxH");
  }
  g.cell_width = to_int<int>(key, v.substr(prefix.size(), x - prefix.size()));
  g.cell_height = to_int<int>(key, v.substr(x + 1));
  if (g.cell_width < 1 || g.cell_height < 1) throw ValidationError(key + ": cells must be >= 1");
  return g;
}

inline edges::SamplingMode to_sampling(const std::string& key, const std::string& v) {
  if (v == "nearest_axis") return edges::SamplingMode::nearest_axis;
  if (v == "true_normal") return edges::SamplingMode::true_normal;
  throw ValidationError(key + ": '" + v + "' must be nearest_axis or true_normal");
}

inline std::string sampling_text(edges::SamplingMode m) {
  return m == edges::SamplingMode::nearest_axis ? "nearest_axis" : "true_normal";
}

}  // namespace detail

/// One configurable key: its help text, how to set it and how to print it.
struct KeyInfo {
  std::string name;
  std::string help;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

inline const std::vector<KeyInfo>& keys() {
  using detail::to_double;
  using experiment::format_sig;
  static const std::vector<KeyInfo> table = {
      {"sigma1", "re-blur sigma for the R_G / R_Gd curves",
       [](RunConfig& c, const std::string& v) { c.sigma1 = to_double("sigma1", v); },
       [](const RunConfig& c) { return format_sig(c.sigma1); }},
      {"sigma_min", "blur at d_min",
       [](RunConfig& c, const std::string& v) { c.sigma_min = to_double("sigma_min", v); },
       [](const RunConfig& c) { return format_sig(c.sigma_min); }},
      {"sigma_max", "blur at d_max",
       [](RunConfig& c, const std::string& v) { c.sigma_max = to_double("sigma_max", v); },
       [](const RunConfig& c) { return format_sig(c.sigma_max); }},
      {"curve_start", "first sigma of the curve table",
       [](RunConfig& c, const std::string& v) { c.curve_start = to_double("curve_start", v); },
       [](const RunConfig& c) { return format_sig(c.curve_start); }},
      {"curve_stop", "last sigma of the curve table",
       [](RunConfig& c, const std::string& v) { c.curve_stop = to_double("curve_stop", v); },
       [](const RunConfig& c) { return format_sig(c.curve_stop); }},
      {"curve_step", "sigma step of the curve table",
       [](RunConfig& c, const std::string& v) { c.curve_step = to_double("curve_step", v); },
       [](const RunConfig& c) { return format_sig(c.curve_step); }},
      {"canny_sigma", "Gaussian smoothing before Canny",
       [](RunConfig& c, const std::string& v) {
         c.canny.smoothing_sigma = to_double("canny_sigma", v);
       },
       [](const RunConfig& c) { return format_sig(c.canny.smoothing_sigma); }},
      {"canny_low", "Canny low threshold, fraction of the peak gradient",
       [](RunConfig& c, const std::string& v) { c.canny.low_ratio = to_double("canny_low", v); },
       [](const RunConfig& c) { return format_sig(c.canny.low_ratio); }},
      {"canny_high", "Canny high threshold, fraction of the peak gradient",
       [](RunConfig& c, const std::string& v) { c.canny.high_ratio = to_double("canny_high", v); },
       [](const RunConfig& c) { return format_sig(c.canny.high_ratio); }},
      {"angle_tol", "max circular std (degrees) of edge orientations in the measurement circle",
       [](RunConfig& c, const std::string& v) { c.angle_tol_deg = to_double("angle_tol", v); },
       [](const RunConfig& c) { return format_sig(c.angle_tol_deg); }},
      {"radius", "measurement circle radius in pixels",
       [](RunConfig& c, const std::string& v) { c.radius = detail::to_int<int>("radius", v); },
       [](const RunConfig& c) { return std::to_string(c.radius); }},
      {"min_contrast", "minimum step height across the measurement circle",
       [](RunConfig& c, const std::string& v) { c.min_contrast = to_double("min_contrast", v); },
       [](const RunConfig& c) { return format_sig(c.min_contrast); }},
      {"centering_tol", "max first-difference asymmetry at an edge point",
       [](RunConfig& c, const std::string& v) { c.centering_tol = to_double("centering_tol", v); },
       [](const RunConfig& c) { return format_sig(c.centering_tol); }},
      {"sampling", "profile sampling: nearest_axis or true_normal",
       [](RunConfig& c, const std::string& v) { c.sampling = detail::to_sampling("sampling", v); },
       [](const RunConfig& c) { return detail::sampling_text(c.sampling); }},
      {"grid", "superpixels: make3d (fixed 55x305 grid of 41x5 cells) or cells:WxH (centred)",
       [](RunConfig& c, const std::string& v) { c.grid = detail::to_grid("grid", v); },
       [](const RunConfig& c) { return c.grid.text(); }},
      {"d_min", "nearest depth, or auto (ground-truth / plane minimum)",
       [](RunConfig& c, const std::string& v) { c.d_min = detail::to_bound("d_min", v); },
       [](const RunConfig& c) { return detail::bound_text(c.d_min); }},
      {"d_max", "farthest depth, or auto (ground-truth / plane maximum)",
       [](RunConfig& c, const std::string& v) { c.d_max = detail::to_bound("d_max", v); },
       [](const RunConfig& c) { return detail::bound_text(c.d_max); }},
      {"seed", "seed of the synthetic texture",
       [](RunConfig& c, const std::string& v) { c.seed = detail::to_int<std::uint64_t>("seed", v); },
       [](const RunConfig& c) { return std::to_string(c.seed); }},
      {"texture_size", "side of the generated texture in pixels",
       [](RunConfig& c, const std::string& v) {
         c.texture_size = detail::to_int<int>("texture_size", v);
       },
       [](const RunConfig& c) { return std::to_string(c.texture_size); }},
      {"texture_block", "block side of the generated texture in pixels",
       [](RunConfig& c, const std::string& v) {
         c.texture_block = detail::to_int<int>("texture_block", v);
       },
       [](const RunConfig& c) { return std::to_string(c.texture_block); }},
      {"sample_bits", "bits per sample of written images (8 or 16)",
       [](RunConfig& c, const std::string& v) {
         c.sample_bits = detail::to_int<int>("sample_bits", v);
       },
       [](const RunConfig& c) { return std::to_string(c.sample_bits); }},
      {"subjective_blur", "edge blur already present in the generated texture",
       [](RunConfig& c, const std::string& v) {
         c.subjective_blur = to_double("subjective_blur", v);
       },
       [](const RunConfig& c) { return format_sig(c.subjective_blur); }},
      {"out_dir", "run directory (env DFD_OUT_DIR overrides the config file, flags override both)",
       [](RunConfig& c, const std::string& v) { c.out_dir = v; },
       [](const RunConfig& c) { return c.out_dir.string(); }},
  };
  return table;
}

inline const KeyInfo* find_key(std::string_view name) {
  for (const auto& k : keys())
    if (k.name == name) return &k;
  return nullptr;
}

inline void set_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  const KeyInfo* k = find_key(key);
  if (!k) throw ValidationError("unknown config key '" + key + "'");
  k->set(cfg, value);
}

/// Applies `key = value` lines; '#' starts a comment line.
inline void apply_text(RunConfig& cfg, std::string_view text, const std::string& origin) {
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ValidationError(origin + ":" + std::to_string(lineno) + ": expected key=value");
    }
    try {
      set_value(cfg, detail::trim(t.substr(0, eq)), detail::trim(t.substr(eq + 1)));
    } catch (const ValidationError& e) {
      throw ValidationError(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

inline void apply_file(RunConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  apply_text(cfg, ss.str(), path.string());
}

/// Every key with its effective value, one `key=value` per line.
inline std::string resolved_text(const RunConfig& cfg) {
  std::string out;
  for (const auto& k : keys()) out += k.name + "=" + k.get(cfg) + "\n";
  return out;
}

inline std::string default_text(std::string_view key) {
  const KeyInfo* k = find_key(key);
  return k ? k->get(RunConfig{}) : std::string{};
}

}  // namespace dfd::config

#endif  // DFD_CONFIG_HPP
