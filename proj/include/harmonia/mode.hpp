/// @file
/// @brief The eight supported modes, their scales, and diatonic triad math.

#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "harmonia/types.hpp"

namespace harmonia {

enum class Mode {
  Major = 0,
  Dorian,
  Phrygian,
  Lydian,
  Mixolydian,
  Minor,
  Locrian,
  JazzMinor,
};

inline constexpr int kNumModes = 8;

/// Chord quality flags, in conditioning-channel order.
namespace quality {
inline constexpr std::uint8_t kPwr = 1 << 0;  // perfect fifth present
inline constexpr std::uint8_t kMaj = 1 << 1;  // major third
inline constexpr std::uint8_t kMin = 1 << 2;  // minor third
inline constexpr std::uint8_t kDim = 1 << 3;  // diminished fifth
inline constexpr std::uint8_t kAug = 1 << 4;  // augmented fifth
}  // namespace quality

/// Seven scale offsets in semitones from the tonic.
const std::array<int, 7>& modeScale(Mode mode);

const char* modeName(Mode mode);
Mode modeFromName(const std::string& name);  // throws ValidationError
Mode modeFromIndex(int index);               // throws ValidationError

/// Degree (1-7) of a pitch-class offset from the tonic, or 0 if non-diatonic.
int degreeOfOffset(Mode mode, int semitone_offset);

inline bool isDiatonicOffset(Mode mode, int semitone_offset) {
  return degreeOfOffset(mode, semitone_offset) != 0;
}

/// Quality flags of the triad built on the given degree (1-7) of a mode.
std::uint8_t diatonicTriadQualities(Mode mode, int degree);

/// Quality flags derived from a chord's interval set (offsets mod 12).
std::uint8_t qualitiesFromIntervals(const std::array<bool, 12>& interval_set);

const char* pitchClassName(int pc);
std::string qualityNames(std::uint8_t qualities);

}  // namespace harmonia
