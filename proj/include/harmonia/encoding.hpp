/// @file
/// @brief Tensor encoding of melody segments and their chord conditioning.

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "harmonia/harmony.hpp"
#include "harmonia/mode.hpp"
#include "harmonia/tonality.hpp"
#include "harmonia/types.hpp"

namespace harmonia {

/// One-hot melody grid: 128 sixteenth steps, each with 33 pitch-offset slots
/// (-16..16 semitones from the tonic reference), one Silent slot, and an
/// attack channel marking rearticulations. Dense size 35*8*16 = 4480.
class MelodyGrid {
 public:
  static constexpr int kSteps = 128;
  static constexpr int kPitchSlots = 33;
  static constexpr int kSilentSlot = 33;     // index among the 34 one-hot slots
  static constexpr int kOneHotSlots = 34;
  static constexpr int kChannels = 35;       // 34 one-hot + attack
  static constexpr int kStepsPerMeasure = 16;
  static constexpr int kDenseSize = kSteps * kChannels;

  MelodyGrid();

  int slot(int step) const { return slots_[step]; }
  bool attack(int step) const { return attacks_[step]; }
  bool isSilent(int step) const { return slots_[step] == kSilentSlot; }

  /// Slot for a pitch offset in [-16, 16].
  static int slotForOffset(int offset);
  /// Offset for a pitch slot (not the Silent slot).
  static int offsetForSlot(int slot);

  void setSilent(int step);
  void setNote(int step, int offset, bool attack);

  /// Row-major [step][channel] flattening, 4480 doubles.
  std::vector<double> toDense() const;
  static MelodyGrid fromDense(std::span<const double> dense);

  bool operator==(const MelodyGrid& o) const {
    return slots_ == o.slots_ && attacks_ == o.attacks_;
  }

 private:
  std::array<std::uint8_t, kSteps> slots_;
  std::array<std::uint8_t, kSteps> attacks_;
};

/// Conditioning for one 8-measure segment: 16 half-measure chord slots
/// (degree one-hot over I..VII + Silent, five quality booleans) plus the
/// mode one-hot. Dense size 8*16 + 5*16 + 8 = 216.
struct ConditionVector {
  static constexpr int kSlots = 16;
  static constexpr int kDegreeChannels = 8;  // I..VII + Silent
  static constexpr int kSilentDegree = 7;
  static constexpr int kQualityChannels = 5;
  static constexpr int kDenseSize =
      kSlots * kDegreeChannels + kSlots * kQualityChannels + kNumModes;

  struct Slot {
    int degree = kSilentDegree;  // 0..6 for I..VII, 7 = silent
    std::uint8_t qualities = 0;

    bool operator==(const Slot& o) const {
      return degree == o.degree && qualities == o.qualities;
    }
  };

  std::array<Slot, kSlots> slots{};
  Mode mode = Mode::Major;

  /// Layout: degree one-hots slot-major, then quality booleans slot-major,
  /// then the mode one-hot.
  std::vector<double> toDense() const;
  static ConditionVector fromDense(std::span<const double> dense);

  bool operator==(const ConditionVector& o) const {
    return slots == o.slots && mode == o.mode;
  }
};

struct TrainingSegment {
  std::string id;
  MelodyGrid grid;
  ConditionVector condition;
  std::string source_path;
  Beats start;            // window start in the source song
  int start_measure = 0;  // 4-beat encoded measures from the song start
  int tonic = 0;
  Mode mode = Mode::Major;
  double key_confidence = 0.0;
  int tonic_reference = 60;
};

struct EncodeResult {
  MelodyGrid grid;
  bool polyphony = false;  // two pitches claimed the same step
  int clamp_count = 0;     // offsets octave-shifted into [-16, 16]
};

/// Quantizes a 32-beat melody window to the sixteenth grid. On polyphonic
/// steps the higher pitch wins and the result is flagged.
EncodeResult encodeMelody(std::span<const NoteEvent> notes, Beats window_start,
                          int tonic_reference);

/// Builds conditioning from 16 half-measure chord slots. Chords spanning a
/// full measure repeat across both slots; silent bins map to the Silent
/// degree. Throws OutOfModeError for non-diatonic roots.
ConditionVector encodeCondition(std::span<const ChordLabel> half_measure_bins,
                                int tonic_pc, Mode mode,
                                const ChordTemplateSet& templates = ChordTemplateSet::builtin());

/// Inverse of encodeMelody: merges sustained steps into notes; an attack
/// splits repeated pitches. Onsets start at window_start.
std::vector<NoteEvent> decodeMelody(const MelodyGrid& grid, int tonic_reference,
                                    Beats window_start = Beats(0), int velocity = 96);

/// Decoder output before hardening: per-step categorical over the 34 one-hot
/// slots plus an independent attack probability.
struct ProbGrid {
  int steps = MelodyGrid::kSteps;
  std::vector<std::array<double, MelodyGrid::kOneHotSlots>> slot_probs;
  std::vector<double> attack_probs;

  /// Per-step argmax with attack threshold 0.5; silent steps drop the attack.
  MelodyGrid harden() const;
};

struct DropStats {
  int windows_total = 0;
  int windows_kept = 0;
  std::map<std::string, int> drop_reasons;  // meter, low_density, polyphony, out_of_mode

  int dropped() const { return windows_total - windows_kept; }
};

/// Slides a 32-beat window (8 encoded measures) with a 16-beat hop over every
/// duple/quadruple constant-meter span, keeping windows that pass the
/// density, monophony, and in-mode filters. Chord labels must be the song's
/// half-measure (2-beat) bins.
std::vector<TrainingSegment> extractSegments(const Song& song, int melody_track,
                                             std::span<const ChordLabel> half_measure_bins,
                                             const std::string& source_path,
                                             DropStats* stats = nullptr);

// JSON Lines dataset persistence; the record schema is in docs/dataset.md.
void writeDataset(std::span<const TrainingSegment> segments, const std::string& path);
std::vector<TrainingSegment> readDataset(const std::string& path);
std::string segmentToJson(const TrainingSegment& segment);
TrainingSegment segmentFromJson(const std::string& line);

}  // namespace harmonia
