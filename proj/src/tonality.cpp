/// @file
/// @brief Histogram-profile key estimation.

#include "harmonia/tonality.hpp"

#include <algorithm>
#include <cmath>

namespace harmonia {

KeyEstimate estimateKey(std::span<const NoteEvent> notes) {
  if (notes.empty()) throw KeyEstimateError("cannot estimate a key from no notes");

  std::array<double, 12> histogram{};
  for (const auto& n : notes) histogram[n.pitch % 12] += toDouble(n.duration);

  int distinct = 0;
  int last_pc = 0;
  for (int pc = 0; pc < 12; ++pc) {
    if (histogram[pc] > 0.0) {
      ++distinct;
      last_pc = pc;
    }
  }
  if (distinct == 0) throw KeyEstimateError("notes have no positive duration");
  if (distinct == 1) return {last_pc, Mode::Major, 0.0};  // degenerate input

  double histogram_norm = 0.0;
  for (double h : histogram) histogram_norm += h * h;
  histogram_norm = std::sqrt(histogram_norm);

  double best = -1.0;
  double second = -1.0;
  KeyEstimate estimate;
  // Mode-major iteration order makes ties prefer earlier modes, then lower
  // tonics; preferring tonic first would break transposition equivariance
  // for scale-symmetric inputs.
  for (int m = 0; m < kNumModes; ++m) {
    const auto& scale = modeScale(static_cast<Mode>(m));
    for (int tonic = 0; tonic < 12; ++tonic) {
      double dot = 0.0;
      for (int s : scale) dot += histogram[(tonic + s) % 12];
      double score = dot / (histogram_norm * std::sqrt(7.0));
      if (score > best) {
        second = best;
        best = score;
        estimate.tonic = tonic;
        estimate.mode = static_cast<Mode>(m);
      } else if (score > second) {
        second = score;
      }
    }
  }
  estimate.confidence = best > 0.0 ? std::clamp((best - second) / best, 0.0, 1.0) : 0.0;
  return estimate;
}

int clampOffsetIntoRange(int offset, bool* clamped) {
  bool moved = false;
  while (offset > 16) {
    offset -= 12;
    moved = true;
  }
  while (offset < -16) {
    offset += 12;
    moved = true;
  }
  if (clamped) *clamped = moved;
  return offset;
}

MelodyOffsets melodyOffsets(std::span<const NoteEvent> notes, int tonic_pc) {
  MelodyOffsets result;
  if (notes.empty()) {
    result.tonic_reference = 60 + tonic_pc;
    return result;
  }

  std::vector<int> pitches;
  pitches.reserve(notes.size());
  for (const auto& n : notes) pitches.push_back(n.pitch);
  std::sort(pitches.begin(), pitches.end());
  int median = pitches[(pitches.size() - 1) / 2];

  // Tonic reference octave nearest the median; |median - ref| <= 6 keeps the
  // median offset inside [-8, 8]. Equidistant candidates take the lower one.
  int base = ((tonic_pc - median) % 12 + 12) % 12;  // reference = median + base - 12k
  int ref_up = median + base;
  int ref_down = ref_up - 12;
  result.tonic_reference = (ref_up - median < median - ref_down) ? ref_up : ref_down;

  result.offsets.reserve(notes.size());
  for (const auto& n : notes) {
    bool clamped = false;
    result.offsets.push_back(
        clampOffsetIntoRange(n.pitch - result.tonic_reference, &clamped));
    if (clamped) ++result.clamp_count;
  }
  return result;
}

}  // namespace harmonia
