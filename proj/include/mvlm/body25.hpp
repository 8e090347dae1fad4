#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "mvlm/types.hpp"

namespace mvlm::body25 {

inline constexpr std::array<std::string_view, kNumJoints> kJointNames = {
    "Nose",      "Neck",      "RShoulder", "RElbow",   "RWrist",
    "LShoulder", "LElbow",    "LWrist",    "MidHip",   "RHip",
    "RKnee",     "RAnkle",    "LHip",      "LKnee",    "LAnkle",
    "REye",      "LEye",      "REar",      "LEar",     "LBigToe",
    "LSmallToe", "LHeel",     "RBigToe",   "RSmallToe", "RHeel"};

struct Limb {
  int parent;
  int child;
};

/// Detector's published BODY-25 render connectivity.
inline constexpr std::array<Limb, 24> kLimbs = {{
    {1, 8},  {1, 2},   {1, 5},   {2, 3},   {3, 4},   {5, 6},
    {6, 7},  {8, 9},   {9, 10},  {10, 11}, {8, 12},  {12, 13},
    {13, 14}, {1, 0},  {0, 15},  {15, 17}, {0, 16},  {16, 18},
    {14, 19}, {19, 20}, {14, 21}, {11, 22}, {22, 23}, {11, 24},
}};

struct Rgb {
  std::uint8_t r, g, b;
};

/// Detector's published per-keypoint render colors; a limb is drawn in the
/// color of its child joint.
inline constexpr std::array<Rgb, kNumJoints> kJointColors = {{
    {255, 0, 85},   {255, 0, 0},    {255, 85, 0},   {255, 170, 0},  {255, 255, 0},
    {170, 255, 0},  {85, 255, 0},   {0, 255, 0},    {255, 0, 0},    {0, 255, 85},
    {0, 255, 170},  {0, 255, 255},  {0, 170, 255},  {0, 85, 255},   {0, 0, 255},
    {255, 0, 170},  {170, 0, 255},  {255, 0, 255},  {85, 0, 255},   {0, 0, 255},
    {0, 0, 255},    {0, 0, 255},    {0, 255, 255},  {0, 255, 255},  {0, 255, 255},
}};

inline constexpr Rgb limb_color(const Limb& limb) { return kJointColors[static_cast<std::size_t>(limb.child)]; }

}  // namespace mvlm::body25
