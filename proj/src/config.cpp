#include "turnscan/config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "turnscan/error.hpp"
#include "turnscan/shapes.hpp"

namespace turnscan {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || end != t.data() + t.size())
    throw ConfigError(key, "expected a number, got '" + text + "'");
  return v;
}

long to_integer(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  long v = 0;
  const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || end != t.data() + t.size())
    throw ConfigError(key, "expected an integer, got '" + text + "'");
  return v;
}

bool to_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "on" || t == "true" || t == "1" || t == "yes") return true;
  if (t == "off" || t == "false" || t == "0" || t == "no") return false;
  throw ConfigError(key, "expected on/off, got '" + text + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& text, std::size_t count) {
  std::vector<double> values;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) values.push_back(to_double(key, item));
  if (values.size() != count)
    throw ConfigError(key, "expected " + std::to_string(count) + " comma-separated numbers");
  return values;
}

std::string number(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError(key, what);
}

struct Entry {
  std::string key;
  std::function<void(PipelineConfig&, const std::string&)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

template <typename Ref>
Entry positive(std::string key, Ref ref) {
  return {key,
          [key, ref](PipelineConfig& c, const std::string& v) {
            const double x = to_double(key, v);
            require(std::isfinite(x) && x > 0.0, key, "must be > 0");
            ref(c) = x;
          },
          [ref](const PipelineConfig& c) { return number(ref(c)); }};
}

template <typename Ref>
Entry bounded(std::string key, Ref ref, double lo, double hi, bool open_lo = false) {
  return {key,
          [key, ref, lo, hi, open_lo](PipelineConfig& c, const std::string& v) {
            const double x = to_double(key, v);
            const bool ok = std::isfinite(x) && (open_lo ? x > lo : x >= lo) && x <= hi;
            require(ok, key, "must be in " + std::string(open_lo ? "(" : "[") + number(lo) + ", " + number(hi) + "]");
            ref(c) = x;
          },
          [ref](const PipelineConfig& c) { return number(ref(c)); }};
}

template <typename Int, typename Ref>
Entry integer(std::string key, Ref ref, long lo, long hi) {
  return {key,
          [key, ref, lo, hi](PipelineConfig& c, const std::string& v) {
            const long x = to_integer(key, v);
            require(x >= lo && x <= hi, key, "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
            ref(c) = static_cast<Int>(x);
          },
          [ref](const PipelineConfig& c) { return std::to_string(ref(c)); }};
}

template <typename Ref>
Entry flag(std::string key, Ref ref) {
  return {key, [key, ref](PipelineConfig& c, const std::string& v) { ref(c) = to_bool(key, v); },
          [ref](const PipelineConfig& c) { return std::string(ref(c) ? "on" : "off"); }};
}

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = [] {
    constexpr long kMaxInt = 1L << 30;
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<Entry> t;
    t.push_back({"crop",
                 [](PipelineConfig& c, const std::string& v) {
                   const auto x = to_list("crop", v, 6);
                   AxisRange r;
                   for (int k = 0; k < 3; ++k) {
                     r.min[k] = x[2 * k];
                     r.max[k] = x[2 * k + 1];
                     require(!std::isnan(r.min[k]) && !std::isnan(r.max[k]) && r.min[k] <= r.max[k], "crop",
                             "each range must satisfy min <= max");
                   }
                   c.crop = r;
                 },
                 [](const PipelineConfig& c) {
                   std::string s;
                   for (int k = 0; k < 3; ++k)
                     s += (k ? "," : "") + number(c.crop.min[k]) + "," + number(c.crop.max[k]);
                   return s;
                 }});
    t.push_back(positive("leaf_size", [](auto& c) -> auto& { return c.leaf_size; }));
    t.push_back(integer<std::size_t>("sor_k", [](auto& c) -> auto& { return c.sor_k; }, 1, kMaxInt));
    t.push_back(bounded("sor_stddev", [](auto& c) -> auto& { return c.sor_stddev; }, 0.0, inf));
    t.push_back(integer<std::size_t>("normal_k", [](auto& c) -> auto& { return c.normal_k; }, 3, kMaxInt));
    t.push_back(integer<int>("icp_max_iterations", [](auto& c) -> auto& { return c.icp.max_iterations; }, 1, kMaxInt));
    t.push_back(positive("icp_max_distance",
                         [](auto& c) -> auto& { return c.icp.max_correspondence_distance; }));
    t.push_back(bounded("icp_refine_distance",
                        [](auto& c) -> auto& { return c.icp.refine_correspondence_distance; }, 0.0, inf));
    t.push_back(bounded("icp_transform_epsilon", [](auto& c) -> auto& { return c.icp.transform_epsilon; },
                        0.0, inf));
    t.push_back(bounded("icp_fitness_epsilon", [](auto& c) -> auto& { return c.icp.fitness_epsilon; },
                        0.0, inf));
    t.push_back({"align_strategy",
                 [](PipelineConfig& c, const std::string& v) {
                   const std::string s = trim(v);
                   if (s == "incremental") c.align_strategy = AlignStrategy::incremental_model;
                   else if (s == "pairwise") c.align_strategy = AlignStrategy::pairwise_chain;
                   else throw ConfigError("align_strategy", "expected incremental or pairwise, got '" + v + "'");
                 },
                 [](const PipelineConfig& c) {
                   return std::string(c.align_strategy == AlignStrategy::incremental_model ? "incremental" : "pairwise");
                 }});
    t.push_back(flag("mls", [](auto& c) -> auto& { return c.mls; }));
    t.push_back(flag("mls_pre_align", [](auto& c) -> auto& { return c.mls_pre_align; }));
    t.push_back(positive("mls_radius", [](auto& c) -> auto& { return c.mls_params.search_radius; }));
    t.push_back(integer<int>("mls_order", [](auto& c) -> auto& { return c.mls_params.polynomial_order; }, 1, 3));
    t.push_back(flag("mls_upsample", [](auto& c) -> auto& { return c.mls_params.upsample; }));
    t.push_back({"mesher",
                 [](PipelineConfig& c, const std::string& v) {
                   const std::string s = trim(v);
                   if (s == "gp") c.mesher = Mesher::gp;
                   else if (s == "gt") c.mesher = Mesher::gt;
                   else throw ConfigError("mesher", "expected gp or gt, got '" + v + "'");
                 },
                 [](const PipelineConfig& c) { return std::string(c.mesher == Mesher::gp ? "gp" : "gt"); }});
    t.push_back(positive("gt_mu", [](auto& c) -> auto& { return c.greedy.mu; }));
    t.push_back(integer<std::size_t>("gt_max_neighbors",
                                     [](auto& c) -> auto& { return c.greedy.max_nearest_neighbors; }, 2,
                                     kMaxInt));
    t.push_back(positive("gt_radius", [](auto& c) -> auto& { return c.greedy.search_radius; }));
    t.push_back(bounded("gt_min_angle", [](auto& c) -> auto& { return c.greedy.min_angle; }, 0.0, 60.0));
    t.push_back(bounded("gt_max_angle", [](auto& c) -> auto& { return c.greedy.max_angle; }, 60.0, 180.0));
    t.push_back(bounded("gt_max_surface_angle", [](auto& c) -> auto& { return c.greedy.max_surface_angle; },
                        0.0, 180.0, true));
    t.push_back(positive("gp_resolution", [](auto& c) -> auto& { return c.grid.resolution; }));
    t.push_back(integer<int>("gp_padding", [](auto& c) -> auto& { return c.grid.padding; }, 1, 64));
    t.push_back(integer<int>("laplacian_iterations", [](auto& c) -> auto& { return c.laplacian.iterations; }, 0,
                             kMaxInt));
    t.push_back(bounded("laplacian_relaxation", [](auto& c) -> auto& { return c.laplacian.relaxation; }, 0.0,
                        1.0, true));
    t.push_back(bounded("laplacian_feature_angle", [](auto& c) -> auto& { return c.laplacian.feature_angle; },
                        0.0, 180.0));
    t.push_back(flag("laplacian_boundary_smoothing",
                     [](auto& c) -> auto& { return c.laplacian.boundary_smoothing; }));
    t.push_back(integer<std::size_t>("hole_max_boundary", [](auto& c) -> auto& { return c.hole_max_boundary; },
                                     0, kMaxInt));
    t.push_back({"shape",
                 [](PipelineConfig& c, const std::string& v) {
                   const std::string s = trim(v);
                   bool known = false;
                   for (const auto& n : named_shapes()) known = known || n == s;
                   if (!known) throw ConfigError("shape", "unknown shape '" + v + "'");
                   c.shape = s;
                 },
                 [](const PipelineConfig& c) { return c.shape; }});
    t.push_back(integer<int>("views", [](auto& c) -> auto& { return c.scan.views; }, 2, 100000));
    t.push_back(positive("degrees_per_view", [](auto& c) -> auto& { return c.scan.degrees_per_view; }));
    t.push_back(positive("interval", [](auto& c) -> auto& { return c.scan.interval_seconds; }));
    t.push_back(bounded("angle_jitter", [](auto& c) -> auto& { return c.scan.angle_jitter; }, 0.0, inf));
    t.push_back(bounded("noise_sigma", [](auto& c) -> auto& { return c.scan.noise.gaussian_sigma; }, 0.0, inf));
    t.push_back(bounded("edge_dropout_angle",
                        [](auto& c) -> auto& { return c.scan.noise.edge_dropout_angle; }, 0.0, 90.0));
    t.push_back(bounded("specular_hole_rate",
                        [](auto& c) -> auto& { return c.scan.noise.specular_hole_rate; }, 0.0, 1.0));
    t.push_back(flag("bilateral", [](auto& c) -> auto& { return c.scan.bilateral; }));
    t.push_back(positive("bilateral_sigma_space",
                         [](auto& c) -> auto& { return c.scan.bilateral_sigma_space; }));
    t.push_back(positive("bilateral_sigma_depth",
                         [](auto& c) -> auto& { return c.scan.bilateral_sigma_depth; }));
    t.push_back(integer<int>("camera_width", [](auto& c) -> auto& { return c.scan.camera.width; }, 1, 100000));
    t.push_back(integer<int>("camera_height", [](auto& c) -> auto& { return c.scan.camera.height; }, 1, 100000));
    t.push_back(positive("camera_fx", [](auto& c) -> auto& { return c.scan.camera.fx; }));
    t.push_back(positive("camera_fy", [](auto& c) -> auto& { return c.scan.camera.fy; }));
    t.push_back(bounded("camera_cx", [](auto& c) -> auto& { return c.scan.camera.cx; }, -inf, inf));
    t.push_back(bounded("camera_cy", [](auto& c) -> auto& { return c.scan.camera.cy; }, -inf, inf));
    t.push_back(positive("depth_min", [](auto& c) -> auto& { return c.scan.camera.depth_min; }));
    t.push_back(positive("depth_max", [](auto& c) -> auto& { return c.scan.camera.depth_max; }));
    t.push_back({"camera_eye",
                 [](PipelineConfig& c, const std::string& v) {
                   const auto x = to_list("camera_eye", v, 3);
                   const Vec3 eye(x[0], x[1], x[2]);
                   require(eye.allFinite(), "camera_eye", "must be finite");
                   require((eye - c.scan.geometry.pivot).cross(c.scan.geometry.axis).norm() > 1e-9, "camera_eye",
                           "must not lie on the turntable axis");
                   c.camera_eye = eye;
                   c.scan.camera_pose = look_at(eye, c.scan.geometry.pivot);
                 },
                 [](const PipelineConfig& c) {
                   return number(c.camera_eye.x()) + "," + number(c.camera_eye.y()) + "," + number(c.camera_eye.z());
                 }});
    return t;
  }();
  return table;
}

}  // namespace

void set_config_value(PipelineConfig& config, const std::string& key, const std::string& value) {
  for (const Entry& e : entries()) {
    if (e.key == key) {
      e.set(config, value);
      return;
    }
  }
  throw ConfigError(key, "unknown key");
}

PipelineConfig parse_config(const std::string& text) { return parse_config(text, PipelineConfig{}); }

PipelineConfig parse_config(const std::string& text, PipelineConfig base) {
  std::stringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(line, "line " + std::to_string(number) + ": expected 'key = value'");
    set_config_value(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  if (base.scan.camera.depth_min >= base.scan.camera.depth_max)
    throw ConfigError("depth_min", "must be below depth_max");
  return base;
}

std::string format_config(const PipelineConfig& config) {
  std::string out;
  for (const Entry& e : entries()) out += e.key + " = " + e.get(config) + "\n";
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const Entry& e : entries()) keys.push_back(e.key);
  return keys;
}

}  // namespace turnscan
