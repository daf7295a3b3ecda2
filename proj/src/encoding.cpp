/// @file
/// @brief Melody grid and condition-vector transforms, segment extraction.

#include "harmonia/encoding.hpp"

#include <algorithm>
#include <cmath>

#include "harmonia/melody.hpp"

namespace harmonia {

// ---------------------------------------------------------------------------
// MelodyGrid
// ---------------------------------------------------------------------------

MelodyGrid::MelodyGrid() {
  slots_.fill(kSilentSlot);
  attacks_.fill(0);
}

int MelodyGrid::slotForOffset(int offset) {
  if (offset < -16 || offset > 16)
    throw ValidationError("pitch offset out of range -16..16: " + std::to_string(offset));
  return offset + 16;
}

int MelodyGrid::offsetForSlot(int slot) {
  if (slot < 0 || slot >= kPitchSlots)
    throw ValidationError("not a pitch slot: " + std::to_string(slot));
  return slot - 16;
}

void MelodyGrid::setSilent(int step) {
  slots_[step] = kSilentSlot;
  attacks_[step] = 0;
}

void MelodyGrid::setNote(int step, int offset, bool attack) {
  slots_[step] = static_cast<std::uint8_t>(slotForOffset(offset));
  attacks_[step] = attack ? 1 : 0;
}

std::vector<double> MelodyGrid::toDense() const {
  std::vector<double> dense(kDenseSize, 0.0);
  for (int step = 0; step < kSteps; ++step) {
    dense[step * kChannels + slots_[step]] = 1.0;
    dense[step * kChannels + kOneHotSlots] = attacks_[step] ? 1.0 : 0.0;
  }
  return dense;
}

MelodyGrid MelodyGrid::fromDense(std::span<const double> dense) {
  if (dense.size() != kDenseSize)
    throw ShapeError("dense grid must have 4480 values");
  MelodyGrid grid;
  for (int step = 0; step < kSteps; ++step) {
    int slot = -1;
    for (int c = 0; c < kOneHotSlots; ++c) {
      if (dense[step * kChannels + c] != 0.0) {
        if (slot >= 0) throw ValidationError("grid step is not one-hot");
        slot = c;
      }
    }
    if (slot < 0) throw ValidationError("grid step has no active slot");
    bool attack = dense[step * kChannels + kOneHotSlots] != 0.0;
    if (slot == kSilentSlot) {
      if (attack) throw ValidationError("silent step cannot attack");
      grid.setSilent(step);
    } else {
      grid.setNote(step, offsetForSlot(slot), attack);
    }
  }
  return grid;
}

// ---------------------------------------------------------------------------
// ConditionVector
// ---------------------------------------------------------------------------

std::vector<double> ConditionVector::toDense() const {
  std::vector<double> dense(kDenseSize, 0.0);
  for (int s = 0; s < kSlots; ++s)
    dense[s * kDegreeChannels + slots[s].degree] = 1.0;
  int quality_base = kSlots * kDegreeChannels;
  for (int s = 0; s < kSlots; ++s)
    for (int q = 0; q < kQualityChannels; ++q)
      if (slots[s].qualities & (1 << q))
        dense[quality_base + s * kQualityChannels + q] = 1.0;
  dense[quality_base + kSlots * kQualityChannels + static_cast<int>(mode)] = 1.0;
  return dense;
}

ConditionVector ConditionVector::fromDense(std::span<const double> dense) {
  if (dense.size() != kDenseSize)
    throw ShapeError("dense condition must have 216 values");
  ConditionVector cond;
  for (int s = 0; s < kSlots; ++s) {
    int degree = -1;
    for (int d = 0; d < kDegreeChannels; ++d) {
      if (dense[s * kDegreeChannels + d] != 0.0) {
        if (degree >= 0) throw ValidationError("condition slot is not one-hot");
        degree = d;
      }
    }
    if (degree < 0) throw ValidationError("condition slot has no degree");
    cond.slots[s].degree = degree;
  }
  int quality_base = kSlots * kDegreeChannels;
  for (int s = 0; s < kSlots; ++s) {
    std::uint8_t q = 0;
    for (int c = 0; c < kQualityChannels; ++c)
      if (dense[quality_base + s * kQualityChannels + c] != 0.0) q |= (1 << c);
    cond.slots[s].qualities = q;
  }
  int mode_base = quality_base + kSlots * kQualityChannels;
  int mode = -1;
  for (int m = 0; m < kNumModes; ++m) {
    if (dense[mode_base + m] != 0.0) {
      if (mode >= 0) throw ValidationError("mode is not one-hot");
      mode = m;
    }
  }
  if (mode < 0) throw ValidationError("condition has no mode");
  cond.mode = static_cast<Mode>(mode);
  return cond;
}

// ---------------------------------------------------------------------------
// Melody encode / decode
// ---------------------------------------------------------------------------

namespace {

// Sixteenth step index of a beat position relative to the window, rounded to
// the nearest step; exact for already-quantized input.
int stepOf(const Beats& t, const Beats& window_start) {
  Beats scaled = (t - window_start) * Beats(4);
  // round(n/d) with positive d
  auto n = scaled.numerator();
  auto d = scaled.denominator();
  std::int64_t q = n >= 0 ? (2 * n + d) / (2 * d) : -((-2 * n + d) / (2 * d));
  return static_cast<int>(q);
}

}  // namespace

EncodeResult encodeMelody(std::span<const NoteEvent> notes, Beats window_start,
                          int tonic_reference) {
  EncodeResult result;
  std::array<int, MelodyGrid::kSteps> owner_pitch;
  owner_pitch.fill(-1);

  std::vector<NoteEvent> sorted(notes.begin(), notes.end());
  // Paint lower pitches first so a higher simultaneous pitch overwrites.
  std::stable_sort(sorted.begin(), sorted.end(), [](const NoteEvent& a, const NoteEvent& b) {
    if (a.onset != b.onset) return a.onset < b.onset;
    return a.pitch < b.pitch;
  });

  for (const auto& note : sorted) {
    int on = stepOf(note.onset, window_start);
    int off = stepOf(note.end(), window_start);
    if (off <= on) off = on + 1;
    if (off <= 0 || on >= MelodyGrid::kSteps) continue;
    on = std::max(on, 0);
    off = std::min(off, MelodyGrid::kSteps);

    bool clamped = false;
    int offset = clampOffsetIntoRange(note.pitch - tonic_reference, &clamped);
    if (clamped) ++result.clamp_count;

    for (int step = on; step < off; ++step) {
      if (owner_pitch[step] >= 0) {
        result.polyphony = true;
        if (note.pitch < owner_pitch[step]) continue;  // keep the higher pitch
      }
      owner_pitch[step] = note.pitch;
      result.grid.setNote(step, offset, step == on);
    }
  }
  return result;
}

ConditionVector encodeCondition(std::span<const ChordLabel> half_measure_bins,
                                int tonic_pc, Mode mode,
                                const ChordTemplateSet& templates) {
  if (half_measure_bins.size() != ConditionVector::kSlots)
    throw ShapeError("expected 16 half-measure chord bins, got " +
                     std::to_string(half_measure_bins.size()));
  ConditionVector cond;
  cond.mode = mode;
  for (int s = 0; s < ConditionVector::kSlots; ++s) {
    const ChordLabel& label = half_measure_bins[s];
    if (label.silent) {
      cond.slots[s] = {ConditionVector::kSilentDegree, 0};
      continue;
    }
    ScaleDegree degree = toScaleDegree(label, tonic_pc, mode, templates);
    cond.slots[s] = {degree.degree - 1, degree.qualities};
  }
  return cond;
}

std::vector<NoteEvent> decodeMelody(const MelodyGrid& grid, int tonic_reference,
                                    Beats window_start, int velocity) {
  std::vector<NoteEvent> notes;
  const Beats step_len(1, 4);
  int run_slot = -1;
  int run_start = 0;

  auto closeRun = [&](int end_step) {
    if (run_slot < 0 || run_slot == MelodyGrid::kSilentSlot) return;
    NoteEvent note;
    note.pitch = tonic_reference + MelodyGrid::offsetForSlot(run_slot);
    note.onset = window_start + step_len * run_start;
    note.duration = step_len * (end_step - run_start);
    note.velocity = velocity;
    notes.push_back(note);
  };

  for (int step = 0; step < MelodyGrid::kSteps; ++step) {
    int slot = grid.slot(step);
    bool starts_new = slot != run_slot || grid.attack(step);
    if (starts_new) {
      closeRun(step);
      run_slot = slot;
      run_start = step;
    }
  }
  closeRun(MelodyGrid::kSteps);
  return notes;
}

MelodyGrid ProbGrid::harden() const {
  if (static_cast<int>(slot_probs.size()) != steps ||
      static_cast<int>(attack_probs.size()) != steps)
    throw ShapeError("probabilistic grid rows do not match step count");
  MelodyGrid grid;
  for (int step = 0; step < steps && step < MelodyGrid::kSteps; ++step) {
    int best = 0;
    for (int c = 1; c < MelodyGrid::kOneHotSlots; ++c)
      if (slot_probs[step][c] > slot_probs[step][best]) best = c;
    if (best == MelodyGrid::kSilentSlot) {
      grid.setSilent(step);
    } else {
      grid.setNote(step, MelodyGrid::offsetForSlot(best), attack_probs[step] >= 0.5);
    }
  }
  return grid;
}

// ---------------------------------------------------------------------------
// Segment extraction
// ---------------------------------------------------------------------------

namespace {

bool isDupleOrQuadruple(const TimeSignatureSpan& ts) {
  return ts.numerator == 2 || ts.numerator == 4;
}

std::vector<NoteEvent> notesInWindow(std::span<const NoteEvent> notes, Beats start,
                                     Beats end) {
  std::vector<NoteEvent> out;
  for (const auto& n : notes)
    if (n.onset < end && n.end() > start) out.push_back(n);
  return out;
}

}  // namespace

std::vector<TrainingSegment> extractSegments(const Song& song, int melody_track,
                                             std::span<const ChordLabel> half_measure_bins,
                                             const std::string& source_path,
                                             DropStats* stats) {
  if (melody_track < 0 || melody_track >= static_cast<int>(song.tracks.size()))
    throw ValidationError("melody track index out of range");

  const Beats window_len(32);  // 8 encoded measures
  const Beats hop(16);
  DropStats local;
  DropStats& ds = stats ? *stats : local;

  std::vector<NoteEvent> all_notes = song.allNotes(false);
  const auto& melody_notes = song.tracks[melody_track].notes;

  std::vector<TrainingSegment> segments;
  Beats song_end = song.duration();

  for (std::size_t si = 0; si < song.time_signatures.size(); ++si) {
    const auto& ts = song.time_signatures[si];
    Beats seg_start = ts.start;
    Beats seg_end = (si + 1 < song.time_signatures.size())
                        ? song.time_signatures[si + 1].start
                        : song_end;
    if (seg_end - seg_start < window_len) continue;

    for (Beats start = seg_start; start + window_len <= seg_end; start += hop) {
      ++ds.windows_total;
      if (!isDupleOrQuadruple(ts)) {
        ++ds.drop_reasons["meter"];
        continue;
      }

      auto window_melody = notesInWindow(melody_notes, start, start + window_len);
      std::vector<NoteEvent> shifted;  // window-relative copies for the density check
      for (auto n : window_melody) {
        Beats clipped_start = std::max(n.onset, start);
        n.duration = std::min(n.end(), start + window_len) - clipped_start;
        n.onset = clipped_start - start;
        shifted.push_back(n);
      }
      if (noteDensity(shifted, window_len) < 0.1) {
        ++ds.drop_reasons["low_density"];
        continue;
      }

      auto window_all = notesInWindow(all_notes, start, start + window_len);
      KeyEstimate key;
      try {
        key = estimateKey(window_all);
      } catch (const KeyEstimateError&) {
        ++ds.drop_reasons["low_density"];
        continue;
      }

      MelodyOffsets offsets = melodyOffsets(window_melody, key.tonic);
      EncodeResult encoded = encodeMelody(window_melody, start, offsets.tonic_reference);
      if (encoded.polyphony) {
        ++ds.drop_reasons["polyphony"];
        continue;
      }

      // The window's 16 half-measure chord bins.
      std::vector<ChordLabel> bins;
      for (const auto& label : half_measure_bins) {
        if (label.bin_start >= start && label.bin_start < start + window_len)
          bins.push_back(label);
      }
      if (bins.size() != ConditionVector::kSlots) {
        ++ds.drop_reasons["out_of_mode"];
        continue;
      }
      ConditionVector cond;
      try {
        cond = encodeCondition(bins, key.tonic, key.mode);
      } catch (const OutOfModeError&) {
        ++ds.drop_reasons["out_of_mode"];
        continue;
      }

      TrainingSegment segment;
      segment.start = start;
      segment.start_measure = static_cast<int>(toDouble(start / Beats(4)));
      segment.id = source_path + ":" + std::to_string(segment.start_measure);
      segment.grid = encoded.grid;
      segment.condition = cond;
      segment.source_path = source_path;
      segment.tonic = key.tonic;
      segment.mode = key.mode;
      segment.key_confidence = key.confidence;
      segment.tonic_reference = offsets.tonic_reference;
      segments.push_back(std::move(segment));
      ++ds.windows_kept;
    }
  }
  return segments;
}

}  // namespace harmonia
