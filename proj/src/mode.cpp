/// @file
/// @brief Mode tables and triad-quality derivation.

#include "harmonia/mode.hpp"

#include <algorithm>

namespace harmonia {

namespace {

constexpr std::array<std::array<int, 7>, kNumModes> kScales = {{
    {0, 2, 4, 5, 7, 9, 11},   // Major
    {0, 2, 3, 5, 7, 9, 10},   // Dorian
    {0, 1, 3, 5, 7, 8, 10},   // Phrygian
    {0, 2, 4, 6, 7, 9, 11},   // Lydian
    {0, 2, 4, 5, 7, 9, 10},   // Mixolydian
    {0, 2, 3, 5, 7, 8, 10},   // Minor
    {0, 1, 3, 5, 6, 8, 10},   // Locrian
    {0, 2, 3, 5, 7, 9, 11},   // Jazz Minor (ascending melodic minor)
}};

constexpr const char* kModeNames[kNumModes] = {
    "Major", "Dorian", "Phrygian", "Lydian",
    "Mixolydian", "Minor", "Locrian", "JazzMinor",
};

constexpr const char* kPitchClassNames[12] = {
    "C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B",
};

}  // namespace

const std::array<int, 7>& modeScale(Mode mode) {
  return kScales[static_cast<int>(mode)];
}

const char* modeName(Mode mode) { return kModeNames[static_cast<int>(mode)]; }

Mode modeFromName(const std::string& name) {
  std::string lowered(name);
  std::transform(lowered.begin(), lowered.end(), lowered.begin(), ::tolower);
  lowered.erase(std::remove_if(lowered.begin(), lowered.end(),
                               [](char c) { return c == ' ' || c == '_' || c == '-'; }),
                lowered.end());
  for (int i = 0; i < kNumModes; ++i) {
    std::string candidate(kModeNames[i]);
    std::transform(candidate.begin(), candidate.end(), candidate.begin(), ::tolower);
    if (candidate == lowered) return static_cast<Mode>(i);
  }
  throw ValidationError("unknown mode name: " + name);
}

Mode modeFromIndex(int index) {
  if (index < 0 || index >= kNumModes)
    throw ValidationError("mode index out of range: " + std::to_string(index));
  return static_cast<Mode>(index);
}

int degreeOfOffset(Mode mode, int semitone_offset) {
  int pc = ((semitone_offset % 12) + 12) % 12;
  const auto& scale = modeScale(mode);
  for (int d = 0; d < 7; ++d)
    if (scale[d] == pc) return d + 1;
  return 0;
}

std::uint8_t qualitiesFromIntervals(const std::array<bool, 12>& interval_set) {
  std::uint8_t q = 0;
  if (interval_set[7]) q |= quality::kPwr;
  if (interval_set[4]) q |= quality::kMaj;
  if (interval_set[3]) q |= quality::kMin;
  if (interval_set[6]) q |= quality::kDim;
  if (interval_set[8]) q |= quality::kAug;
  return q;
}

std::uint8_t diatonicTriadQualities(Mode mode, int degree) {
  if (degree < 1 || degree > 7)
    throw ValidationError("degree out of range 1-7: " + std::to_string(degree));
  const auto& scale = modeScale(mode);
  int root = scale[degree - 1];
  std::array<bool, 12> intervals{};
  intervals[0] = true;
  intervals[(scale[(degree + 1) % 7] - root + 12) % 12] = true;  // third
  intervals[(scale[(degree + 3) % 7] - root + 12) % 12] = true;  // fifth
  return qualitiesFromIntervals(intervals);
}

const char* pitchClassName(int pc) { return kPitchClassNames[((pc % 12) + 12) % 12]; }

std::string qualityNames(std::uint8_t qualities) {
  static constexpr const char* kNames[5] = {"Pwr", "Maj", "Min", "Dim", "Aug"};
  std::string out;
  for (int i = 0; i < 5; ++i) {
    if (qualities & (1 << i)) {
      if (!out.empty()) out += "+";
      out += kNames[i];
    }
  }
  return out;
}

}  // namespace harmonia
