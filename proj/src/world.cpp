// Copyright 2026 The craneppo Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "craneppo/world.hpp"

#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace craneppo {

Aabb::Aabb(const Vec3& lo, const Vec3& hi) : min_corner(lo), max_corner(hi) {
  for (int i = 0; i < 3; ++i) {
    if (!(min_corner[i] <= max_corner[i])) {
      throw std::invalid_argument("Aabb: min_corner must be <= max_corner");
    }
  }
}

Vec3 Aabb::closest_point(const Vec3& p) const {
  Vec3 q;
  for (int i = 0; i < 3; ++i) q[i] = std::clamp(p[i], min_corner[i], max_corner[i]);
  return q;
}

double Aabb::distance(const Vec3& p) const {
  return (p - closest_point(p)).norm();
}

bool Aabb::intersects(const Aabb& other) const {
  for (int i = 0; i < 3; ++i) {
    if (min_corner[i] > other.max_corner[i] || other.min_corner[i] > max_corner[i]) {
      return false;
    }
  }
  return true;
}

Aabb Aabb::inflated(const Vec3& half_extents) const {
  return Aabb(min_corner - half_extents, max_corner + half_extents);
}

Aabb Aabb::from_segment(const Vec3& a, const Vec3& b) {
  return Aabb(a.cwiseMin(b), a.cwiseMax(b));
}

void World::validate() const {
  for (const Aabb& box : obstacles) {
    for (int i = 0; i < 3; ++i) {
      if (!(box.min_corner[i] <= box.max_corner[i])) {
        throw std::invalid_argument("World: obstacle with inverted corners");
      }
    }
    if (box.min_corner.z() < ground_height) {
      throw std::invalid_argument("World: obstacle extends below ground");
    }
  }
}

double min_distance(const World& world, const Vec3& p) {
  double best = std::numeric_limits<double>::infinity();
  for (const Aabb& box : world.obstacles) best = std::min(best, box.distance(p));
  return best;
}

int lidar_flag(const World& world, const Vec3& hook_pos, double range) {
  if (!(range > 0.0)) throw std::invalid_argument("lidar_flag: range must be > 0");
  return min_distance(world, hook_pos) <= range ? 1 : 0;
}

bool collides(const World& world, const Vec3& segment_a, const Vec3& segment_b,
              const Vec3& payload_half_extents) {
  for (int i = 0; i < 3; ++i) {
    if (payload_half_extents[i] < 0.0) {
      throw std::invalid_argument("collides: half extents must be >= 0");
    }
  }
  if (segment_a.z() < world.ground_height || segment_b.z() < world.ground_height) {
    return true;
  }
  const Aabb swept = Aabb::from_segment(segment_a, segment_b).inflated(payload_half_extents);
  for (const Aabb& box : world.obstacles) {
    if (swept.intersects(box)) return true;
  }
  return false;
}

bool segment_intersects(const Aabb& box, const Vec3& a, const Vec3& b) {
  const Vec3 d = b - a;
  double t_min = 0.0;
  double t_max = 1.0;
  for (int i = 0; i < 3; ++i) {
    if (d[i] == 0.0) {
      if (a[i] < box.min_corner[i] || a[i] > box.max_corner[i]) return false;
      continue;
    }
    double t0 = (box.min_corner[i] - a[i]) / d[i];
    double t1 = (box.max_corner[i] - a[i]) / d[i];
    if (t0 > t1) std::swap(t0, t1);
    t_min = std::max(t_min, t0);
    t_max = std::min(t_max, t1);
    if (t_min > t_max) return false;
  }
  return true;
}

namespace {

Vec3 vec3_from_json(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) {
    throw std::invalid_argument(std::string(what) + ": expected an array of 3 numbers");
  }
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

}  // namespace

World world_from_json_text(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (!j.contains("version")) throw std::invalid_argument("world file: missing version field");
  if (j.at("version").get<int>() != 1) {
    throw std::invalid_argument("world file: unsupported version");
  }
  World world;
  world.ground_height = j.value("ground_height", 0.0);
  if (j.contains("obstacles")) {
    for (const auto& jb : j.at("obstacles")) {
      world.obstacles.emplace_back(vec3_from_json(jb.at("min"), "obstacle min"),
                                   vec3_from_json(jb.at("max"), "obstacle max"));
    }
  }
  world.validate();
  return world;
}

World load_world(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open world file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return world_from_json_text(buf.str());
}

std::string world_to_json_text(const World& world) {
  nlohmann::json j;
  j["version"] = 1;
  j["ground_height"] = world.ground_height;
  j["obstacles"] = nlohmann::json::array();
  for (const Aabb& box : world.obstacles) {
    j["obstacles"].push_back(
        {{"min", {box.min_corner.x(), box.min_corner.y(), box.min_corner.z()}},
         {"max", {box.max_corner.x(), box.max_corner.y(), box.max_corner.z()}}});
  }
  return j.dump(2) + "\n";
}

void save_world(const World& world, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write world file: " + path);
  out << world_to_json_text(world);
}

}  // namespace craneppo
