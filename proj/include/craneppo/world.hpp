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

#pragma once

#include <string>
#include <vector>

#include "craneppo/types.hpp"

namespace craneppo {

// Axis-aligned box in world coordinates, meters.
struct Aabb {
  Vec3 min_corner;
  Vec3 max_corner;

  Aabb() : min_corner(Vec3::Zero()), max_corner(Vec3::Zero()) {}
  Aabb(const Vec3& lo, const Vec3& hi);

  // Closest point of the solid box to p (p itself when inside).
  Vec3 closest_point(const Vec3& p) const;

  // Euclidean distance from p to the solid box; 0 inside.
  double distance(const Vec3& p) const;

  // Closed-set overlap test: touching faces count as intersecting.
  bool intersects(const Aabb& other) const;

  // Box grown by half extents on every side.
  Aabb inflated(const Vec3& half_extents) const;

  // Smallest box containing both endpoints.
  static Aabb from_segment(const Vec3& a, const Vec3& b);
};

// Static scene: obstacle boxes above a flat ground plane. Immutable after
// construction, safe to share across rollout workers.
struct World {
  std::vector<Aabb> obstacles;
  double ground_height = 0.0;

  void validate() const;
};

// Minimum distance from p to any obstacle's solid region; ground excluded.
// Empty obstacle list yields +infinity.
double min_distance(const World& world, const Vec3& p);

// Binary proximity sensor: 1 iff an obstacle lies within `range` meters.
int lidar_flag(const World& world, const Vec3& hook_pos, double range = 5.0);

// Conservative swept-box collision test for a payload moving from segment_a
// to segment_b. The payload sweep is approximated by the Aabb over both
// endpoints inflated by the payload half extents; a closed-set overlap with
// any obstacle, or either endpoint dipping below ground, is a collision.
bool collides(const World& world, const Vec3& segment_a, const Vec3& segment_b,
              const Vec3& payload_half_extents);

// Slab test: does the segment a-b meet the (closed) box?
bool segment_intersects(const Aabb& box, const Vec3& a, const Vec3& b);

// World description document (JSON, versioned).
World load_world(const std::string& path);
World world_from_json_text(const std::string& text);
std::string world_to_json_text(const World& world);
void save_world(const World& world, const std::string& path);

}  // namespace craneppo
