#pragma once

#include <cstddef>
#include <stdexcept>

namespace noisylab {

/// Binary labels. Vectors over classes always put -1 first: index 0 is
/// Negative, index 1 is Positive.
enum class Label : int { Negative = -1, Positive = 1 };

inline constexpr std::size_t kNegativeIndex = 0;
inline constexpr std::size_t kPositiveIndex = 1;

constexpr std::size_t class_index(Label y) noexcept {
  return y == Label::Positive ? kPositiveIndex : kNegativeIndex;
}

constexpr Label label_at(std::size_t index) noexcept {
  return index == kPositiveIndex ? Label::Positive : Label::Negative;
}

constexpr Label opposite(Label y) noexcept {
  return y == Label::Positive ? Label::Negative : Label::Positive;
}

constexpr int to_int(Label y) noexcept { return static_cast<int>(y); }

inline Label label_from_int(int v) {
  if (v == 1) return Label::Positive;
  if (v == -1) return Label::Negative;
  throw std::invalid_argument("binary label must be -1 or +1");
}

}  // namespace noisylab
