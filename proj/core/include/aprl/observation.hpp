#pragma once

#include <array>
#include <cstdint>
#include <deque>

#include "aprl/geom.hpp"
#include "aprl/sim.hpp"
#include "aprl/task.hpp"

namespace aprl {

inline constexpr std::uint16_t kObsLayoutVersion = 1;
inline constexpr int kObsFrameSize = 24;
inline constexpr int kObsStackSize = 3;
inline constexpr int kObsVectorSize = kObsFrameSize * kObsStackSize;

// One 24-value ego-centric frame. Fixed slot order (see README table):
//   [0..2]   current waypoint relative position, per-axis / bounds extent
//   [3..5]   next waypoint relative position, per-axis / bounds extent
//   [6]      distance to current waypoint / bounds diagonal
//   [7]      distance to the segment line / bounds diagonal
//   [8]      height above ground / bounds diagonal (constant 0 in zero-g)
//   [9..11]  velocity, per-axis / bounds extent, clamped to [-1, 1]
//   [12..14] acceleration, per-axis / bounds extent, clamped to [-1, 1]
//   [15..18] orientation quaternion (w, x, y, z)
//   [19..22] quaternion difference q_t - q_{t-1}, clamped to [-1, 1]
//   [23]     XY-plane alignment with the current waypoint, in [-1, 1]
using ObsFrame = std::array<float, kObsFrameSize>;

// Stack of the 3 most recent frames, oldest first.
using ObsVector = std::array<float, kObsVectorSize>;

// Closest distance from p to the infinite line through (w_prev, w_cur);
// falls back to the point distance |p - w_cur| when the segment is
// degenerate (|w_cur - w_prev| < 1e-9).
double point_line_distance(const Vec3& p, const Vec3& w_prev, const Vec3& w_cur);

// Dot product of the agent's forward direction and the direction to the
// waypoint, both projected onto the XY-plane and normalized. Returns 0 when
// either projection is shorter than 1e-9.
double alignment(const AgentState& state, const Vec3& w_cur);

// Encodes one frame. prev_orientation is the orientation sampled at the
// previous frame (equal to the current one on the first frame of an episode).
// Throws ValidationError on non-finite inputs.
ObsFrame encode_observation(const AgentState& state, const WaypointPath& path,
                            const PathProgress& progress, const World& world,
                            const Quat& prev_orientation);

// Sliding window of the most recent kObsStackSize frames; the first frame of
// an episode is replicated to fill the stack.
class FrameStack {
 public:
  void reset(const ObsFrame& first) {
    frames_.assign(kObsStackSize, first);
  }

  void push(const ObsFrame& frame) {
    frames_.pop_front();
    frames_.push_back(frame);
  }

  bool empty() const { return frames_.empty(); }

  ObsVector stacked() const {
    ObsVector out{};
    int offset = 0;
    for (const ObsFrame& f : frames_) {
      for (int i = 0; i < kObsFrameSize; ++i) out[offset + i] = f[i];
      offset += kObsFrameSize;
    }
    return out;
  }

 private:
  std::deque<ObsFrame> frames_;
};

}  // namespace aprl
