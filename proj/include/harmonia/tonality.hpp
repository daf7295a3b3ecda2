/// @file
/// @brief Key estimation and tonic-relative pitch normalization.

#pragma once

#include <span>
#include <vector>

#include "harmonia/mode.hpp"
#include "harmonia/types.hpp"

namespace harmonia {

struct KeyEstimate {
  int tonic = 0;  // pitch class 0-11
  Mode mode = Mode::Major;
  double confidence = 0.0;  // normalized margin between best and runner-up
};

/// Correlates the duration-weighted pitch-class histogram with binary
/// scale-membership profiles over all 12x8 (tonic, mode) candidates.
/// Ties prefer earlier modes, then lower tonics, which keeps the estimate
/// transposition-equivariant. Throws KeyEstimateError on empty input.
KeyEstimate estimateKey(std::span<const NoteEvent> notes);

struct MelodyOffsets {
  std::vector<int> offsets;  // signed semitones from the tonic reference
  int tonic_reference = 60;  // MIDI pitch the offsets are measured from
  int clamp_count = 0;       // notes octave-shifted into [-16, 16]
};

/// Offsets of each note from a per-segment tonic reference octave, chosen so
/// the median offset lies within [-8, 8]; out-of-range notes octave-shift
/// into [-16, 16].
MelodyOffsets melodyOffsets(std::span<const NoteEvent> notes, int tonic_pc);

/// Octave-shifts one offset into [-16, 16].
int clampOffsetIntoRange(int offset, bool* clamped = nullptr);

}  // namespace harmonia
