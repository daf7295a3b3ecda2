/// @file
/// @brief Chord detection by bidirectional interval-compatibility cost.

#pragma once

#include <array>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "harmonia/mode.hpp"
#include "harmonia/types.hpp"

namespace harmonia {

/// Compatibility distance for a semitone interval class. Intervals are
/// reduced mod 12; classes 8-11 fold onto their inversions (d(i) = d(12-i)).
int compatibilityDistance(int semitones);

struct ChordTemplate {
  std::string name;
  std::vector<int> intervals;       // as authored; 0 always present
  std::array<bool, 12> interval_set{};  // mod-12 reduction for matching
  std::uint8_t qualities = 0;

  static ChordTemplate make(std::string name, std::vector<int> intervals);
};

/// The fixed chord collection matched against every bin. Ships as a data
/// file (data/chord_templates.txt); builtin() mirrors it.
struct ChordTemplateSet {
  std::vector<ChordTemplate> templates;

  static const ChordTemplateSet& builtin();
  static ChordTemplateSet fromFile(const std::string& path);
};

/// Lowest note starting in the first half beat of the bin; falls back to the
/// lowest pitch sounding at bin start, then the lowest pitch in the bin.
/// Throws NoRootError for an empty bin.
int findRoot(std::span<const NoteEvent> bin_notes, Beats bin_start);

/// Bidirectional template-matching cost: every input pitch charged against
/// its nearest chord voice, every chord voice against its nearest input.
int chordCost(const std::set<int>& pitch_classes, const ChordTemplate& chord,
              int root_pc);

struct ChordLabel {
  bool silent = false;
  int root_pc = 0;
  int template_index = -1;
  int cost = 0;
  Beats bin_start{0};
  Beats bin_length{1};

  std::string name(const ChordTemplateSet& templates) const;
};

/// Minimum-cost label for one bin; ties prefer templates with fewer
/// intervals, then the earlier entry in the collection.
ChordLabel bestChordInBin(std::span<const NoteEvent> bin_notes, Beats bin_start,
                          Beats bin_length,
                          const ChordTemplateSet& templates = ChordTemplateSet::builtin());

enum class BinPolicy { Half, One, Two, Auto };

BinPolicy binPolicyFromName(const std::string& name);

/// Labels every bin of the song. Each constant-time-signature segment is
/// divided evenly; under Auto the bin length (half/one/two measures) with the
/// lowest per-measure total cost wins, ties toward longer bins.
std::vector<ChordLabel> detectChords(
    const Song& song, const std::vector<int>& track_indices, BinPolicy policy,
    const ChordTemplateSet& templates = ChordTemplateSet::builtin());

struct ScaleDegree {
  int degree = 1;  // 1..7
  std::uint8_t qualities = 0;
};

/// Maps a chord label to a scale degree of (tonic, mode).
/// Throws OutOfModeError when the root is not diatonic.
ScaleDegree toScaleDegree(const ChordLabel& label, int tonic_pc, Mode mode,
                          const ChordTemplateSet& templates = ChordTemplateSet::builtin());

}  // namespace harmonia
