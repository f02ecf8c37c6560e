#include "pocodom/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <vector>

#include "pocodom/dataset_io.hpp"
#include "pocodom/error.hpp"

namespace pocodom {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw Error(ErrorCode::MalformedConfig, "invalid value '" + value + "' for " + key);
}

double to_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double out = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0') bad_value(key, v);
  return out;
}

long long to_integer(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const long long out = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || *end != '\0') bad_value(key, v);
  return out;
}

std::string show(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct Field {
  std::string section;
  std::string key;
  std::function<void(PipelineConfig&, const std::string&)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

template <class Access>
Field real(std::string section, std::string key, Access access) {
  const std::string name = section + "." + key;
  return {section, key, [=](PipelineConfig& c, const std::string& v) { access(c) = to_double(name, v); },
          [=](const PipelineConfig& c) { return show(access(const_cast<PipelineConfig&>(c))); }};
}

template <class Access>
Field integer(std::string section, std::string key, Access access) {
  const std::string name = section + "." + key;
  return {section, key,
          [=](PipelineConfig& c, const std::string& v) {
            using T = std::remove_reference_t<decltype(access(c))>;
            const long long x = to_integer(name, v);
            if (x < 0 && std::is_unsigned_v<T>) bad_value(name, v);
            access(c) = static_cast<T>(x);
          },
          [=](const PipelineConfig& c) { return std::to_string(access(const_cast<PipelineConfig&>(c))); }};
}

template <class Access>
Field boolean(std::string section, std::string key, Access access) {
  const std::string name = section + "." + key;
  return {section, key,
          [=](PipelineConfig& c, const std::string& v) {
            if (v == "true" || v == "1") {
              access(c) = true;
            } else if (v == "false" || v == "0") {
              access(c) = false;
            } else {
              bad_value(name, v);
            }
          },
          [=](const PipelineConfig& c) {
            return std::string(access(const_cast<PipelineConfig&>(c)) ? "true" : "false");
          }};
}

template <class Access>
Field axis(std::string section, std::string key, Access access) {
  const std::string name = section + "." + key;
  return {section, key,
          [=](PipelineConfig& c, const std::string& v) {
            try {
              access(c) = parse_signed_axis(v);
            } catch (const Error&) {
              bad_value(name, v);
            }
          },
          [=](const PipelineConfig& c) { return format_signed_axis(access(const_cast<PipelineConfig&>(c))); }};
}

const std::vector<Field>& fields() {
  using C = PipelineConfig;
  static const std::vector<Field> table = {
      integer("pipeline", "frame_skip", [](C& c) -> auto& { return c.frame_skip; }),
      real("pipeline", "map_voxel", [](C& c) -> auto& { return c.map_voxel; }),
      real("pipeline", "target_voxel", [](C& c) -> auto& { return c.target_voxel; }),
      real("pipeline", "refine_distance", [](C& c) -> auto& { return c.refine_distance; }),
      boolean("pipeline", "enable_object_removal", [](C& c) -> auto& { return c.enable_object_removal; }),
      real("pipeline", "prior_translation_gate", [](C& c) -> auto& { return c.prior_translation_gate; }),
      real("pipeline", "prior_rotation_gate", [](C& c) -> auto& { return c.prior_rotation_gate; }),
      integer("pipeline", "rng_seed", [](C& c) -> auto& { return c.rng_seed; }),
      real("pipeline", "ground_threshold", [](C& c) -> auto& { return c.ground_threshold; }),
      axis("frame", "up", [](C& c) -> auto& { return c.frame_convention.up; }),
      axis("frame", "forward", [](C& c) -> auto& { return c.frame_convention.forward; }),
      axis("frame", "left", [](C& c) -> auto& { return c.frame_convention.left; }),
      integer("ransac", "iterations", [](C& c) -> auto& { return c.ransac.iterations; }),
      integer("ransac", "sample_size", [](C& c) -> auto& { return c.ransac.sample_size; }),
      real("ransac", "distance_threshold", [](C& c) -> auto& { return c.ransac.distance_threshold; }),
      real("ransac", "sensor_height", [](C& c) -> auto& { return c.ransac.sensor_height; }),
      real("ransac", "candidate_height_band", [](C& c) -> auto& { return c.ransac.candidate_height_band; }),
      real("cluster", "eps", [](C& c) -> auto& { return c.cluster.eps; }),
      integer("cluster", "min_pts", [](C& c) -> auto& { return c.cluster.min_pts; }),
      real("cluster", "max_extent_forward", [](C& c) -> auto& { return c.cluster.max_extent.forward; }),
      real("cluster", "max_extent_left", [](C& c) -> auto& { return c.cluster.max_extent.left; }),
      real("cluster", "max_extent_up", [](C& c) -> auto& { return c.cluster.max_extent.up; }),
      integer("grid", "n", [](C& c) -> auto& { return c.grid.n; }),
      real("grid", "resolution", [](C& c) -> auto& { return c.grid.resolution; }),
      real("grid", "l_occupied", [](C& c) -> auto& { return c.grid.l_occupied; }),
      real("grid", "prior_probability", [](C& c) -> auto& { return c.grid.prior_probability; }),
      real("grid", "l_past", [](C& c) -> auto& { return c.grid.l_past; }),
      {"grid", "model",
       [](C& c, const std::string& v) {
         if (v == "one-minus-exp") {
           c.grid.model = ProbabilityModel::OneMinusExp;
         } else if (v == "logistic") {
           c.grid.model = ProbabilityModel::Logistic;
         } else {
           bad_value("grid.model", v);
         }
       },
       [](const C& c) {
         return std::string(c.grid.model == ProbabilityModel::Logistic ? "logistic" : "one-minus-exp");
       }},
      boolean("grid", "include_ground", [](C& c) -> auto& { return c.grid.include_ground; }),
      real("poc", "r_min", [](C& c) -> auto& { return c.poc.r_min; }),
      integer("poc", "cog_radius", [](C& c) -> auto& { return c.poc.cog_radius; }),
      real("poc", "magnitude_floor", [](C& c) -> auto& { return c.poc.magnitude_floor; }),
      real("poc", "low_confidence_threshold", [](C& c) -> auto& { return c.poc.low_confidence_threshold; }),
      real("poc", "max_abs_rotation", [](C& c) -> auto& { return c.poc.max_abs_rotation; }),
      boolean("poc", "log_magnitude", [](C& c) -> auto& { return c.poc.log_magnitude; }),
      integer("icp", "max_iterations", [](C& c) -> auto& { return c.icp.max_iterations; }),
      real("icp", "max_correspondence_distance", [](C& c) -> auto& { return c.icp.max_correspondence_distance; }),
      real("icp", "convergence_translation_eps", [](C& c) -> auto& { return c.icp.convergence_translation_eps; }),
      real("icp", "convergence_rotation_eps", [](C& c) -> auto& { return c.icp.convergence_rotation_eps; }),
      integer("icp", "normal_neighbors", [](C& c) -> auto& { return c.icp.normal_neighbors; }),
      real("icp", "downsample_voxel", [](C& c) -> auto& { return c.icp.downsample_voxel; }),
      integer("icp", "min_correspondences", [](C& c) -> auto& { return c.icp.min_correspondences; }),
      real("icp", "max_condition", [](C& c) -> auto& { return c.icp.max_condition; }),
      integer("icp", "max_step_halvings", [](C& c) -> auto& { return c.icp.max_step_halvings; }),
  };
  return table;
}

}  // namespace

SignedAxis parse_signed_axis(const std::string& text) {
  const std::string t = trim(text);
  if (t.size() != 2 || (t[0] != '+' && t[0] != '-') || t[1] < 'x' || t[1] > 'z') {
    throw Error(ErrorCode::InvalidArgument, "axis must look like +x or -z, got '" + text + "'");
  }
  return {t[1] - 'x', t[0] == '+' ? 1 : -1};
}

std::string format_signed_axis(SignedAxis axis) {
  return std::string(1, axis.sign > 0 ? '+' : '-') + static_cast<char>('x' + axis.index);
}

PipelineConfig parse_config(const std::string& text) {
  PipelineConfig config;
  std::istringstream lines(text);
  std::string section;
  std::size_t line_no = 0;
  for (std::string raw; std::getline(lines, raw);) {
    ++line_no;
    std::string line = raw;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line.erase(comment);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(ErrorCode::MalformedConfig, where + "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      bool known = false;
      for (const Field& f : fields()) known = known || f.section == section;
      if (!known) throw Error(ErrorCode::MalformedConfig, where + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::MalformedConfig, where + "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) throw Error(ErrorCode::MalformedConfig, where + "key outside any section");
    const Field* match = nullptr;
    for (const Field& f : fields()) {
      if (f.section == section && f.key == key) match = &f;
    }
    if (!match) throw Error(ErrorCode::MalformedConfig, where + "unknown key " + section + "." + key);
    match->set(config, value);
  }
  try {
    config.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::MalformedConfig, e.what());
  }
  return config;
}

PipelineConfig load_config(const std::filesystem::path& path) { return parse_config(read_text_file(path)); }

std::string format_config(const PipelineConfig& config) {
  std::string out;
  std::string section;
  for (const Field& f : fields()) {
    if (f.section != section) {
      if (!section.empty()) out += '\n';
      section = f.section;
      out += "[" + section + "]\n";
    }
    out += f.key + " = " + f.get(config) + "\n";
  }
  return out;
}

}  // namespace pocodom
