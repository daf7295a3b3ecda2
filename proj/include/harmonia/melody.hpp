/// @file
/// @brief Melody-track identification: rubric plus pitch-class entropy scoring.

#pragma once

#include <array>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "harmonia/types.hpp"

namespace harmonia {

enum class InstrumentCategory { MelodyLikely, AccompanimentLikely, Percussion };

const char* instrumentCategoryName(InstrumentCategory c);

/// Keyword/program lookup used to categorize instruments. Ships as a data
/// file (data/instrument_keywords.txt) so the lists are editable without a
/// rebuild; builtin() mirrors that file.
struct InstrumentTable {
  std::vector<std::string> melody_keywords;
  std::vector<std::string> accompaniment_keywords;
  std::set<int> melody_programs;
  std::set<int> accompaniment_programs;

  static const InstrumentTable& builtin();
  static InstrumentTable fromFile(const std::string& path);
};

/// Rubric bonuses; the magnitudes keep the rubric comparable to the entropy
/// term, whose maximum is ln 12.
struct RubricWeights {
  double melody_bonus = 2.0;
  double accompaniment_bonus = 0.0;
  double percussion_penalty = -100.0;
  double density_bonus = 1.0;
  double density_low = 0.4;
  double density_high = 0.8;
  double range_bonus = 1.0;
  int range_low = 48;   // C3
  int range_high = 84;  // C6
  double central_fraction = 0.9;

  static RubricWeights fromFile(const std::string& path);
};

InstrumentCategory instrumentCategory(const std::string& name, int program,
                                      bool is_channel_10,
                                      const InstrumentTable& table = InstrumentTable::builtin());

/// Fraction of the song duration covered by at least one sounding note,
/// overlaps merged. Empty tracks score 0.
double noteDensity(std::span<const NoteEvent> notes, Beats song_duration);

struct PitchClassDistribution {
  std::array<double, 12> p{};  // index i = semitones above C
};

PitchClassDistribution pitchClassDistribution(std::span<const NoteEvent> notes);

/// Shannon entropy (nats) of the onset-count pitch-class distribution.
/// Empty tracks return 0.
double pitchEntropy(std::span<const NoteEvent> notes);

struct TrackScore {
  int track_index = 0;
  InstrumentCategory category = InstrumentCategory::AccompanimentLikely;
  double density = 0.0;
  double rubric = 0.0;
  double entropy = 0.0;
  double total = 0.0;
  bool eligible = false;  // has notes and is not percussion
};

double rubricScore(const Track& track, const Song& song,
                   const RubricWeights& weights = RubricWeights{},
                   const InstrumentTable& table = InstrumentTable::builtin());

std::vector<TrackScore> scoreTracks(const Song& song,
                                    const RubricWeights& weights = RubricWeights{},
                                    const InstrumentTable& table = InstrumentTable::builtin());

/// Index of the highest-scoring track; ties break toward the lowest index.
/// Throws NoMelodyError when no eligible track exists.
int identifyMelody(const Song& song,
                   const RubricWeights& weights = RubricWeights{},
                   const InstrumentTable& table = InstrumentTable::builtin());

}  // namespace harmonia
