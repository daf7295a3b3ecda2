/// @file
/// @brief Template-matching chord detector.

#include "harmonia/harmony.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>

namespace harmonia {

namespace {

// Table for interval classes 0-7; 8-11 fold by inversion.
constexpr int kCompatibility[8] = {0, 6, 2, 2, 2, 1, 4, 1};

std::vector<NoteEvent> notesInBin(std::span<const NoteEvent> notes, Beats start,
                                  Beats end) {
  std::vector<NoteEvent> out;
  for (const auto& n : notes)
    if (n.onset < end && n.end() > start) out.push_back(n);
  return out;
}

}  // namespace

int compatibilityDistance(int semitones) {
  int ic = ((semitones % 12) + 12) % 12;
  if (ic > 7) ic = 12 - ic;
  return kCompatibility[ic];
}

ChordTemplate ChordTemplate::make(std::string name, std::vector<int> intervals) {
  ChordTemplate t;
  t.name = std::move(name);
  t.intervals = std::move(intervals);
  if (std::find(t.intervals.begin(), t.intervals.end(), 0) == t.intervals.end())
    throw ValidationError("chord template must contain the root (0): " + t.name);
  for (int i : t.intervals) {
    if (i < 0 || i > 23)
      throw ValidationError("template interval out of range 0-23: " + t.name);
    t.interval_set[i % 12] = true;
  }
  t.qualities = qualitiesFromIntervals(t.interval_set);
  return t;
}

const ChordTemplateSet& ChordTemplateSet::builtin() {
  static const ChordTemplateSet set = [] {
    ChordTemplateSet s;
    s.templates.push_back(ChordTemplate::make("pwr", {0, 7}));
    s.templates.push_back(ChordTemplate::make("maj", {0, 4, 7}));
    s.templates.push_back(ChordTemplate::make("min", {0, 3, 7}));
    s.templates.push_back(ChordTemplate::make("dim", {0, 3, 6}));
    s.templates.push_back(ChordTemplate::make("aug", {0, 4, 8}));
    s.templates.push_back(ChordTemplate::make("7", {0, 4, 7, 10}));
    s.templates.push_back(ChordTemplate::make("maj7", {0, 4, 7, 11}));
    s.templates.push_back(ChordTemplate::make("min7", {0, 3, 7, 10}));
    s.templates.push_back(ChordTemplate::make("sus4", {0, 5, 7}));
    s.templates.push_back(ChordTemplate::make("7augb9", {0, 4, 8, 10, 13}));
    return s;
  }();
  return set;
}

ChordTemplateSet ChordTemplateSet::fromFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open template file: " + path, 0);
  ChordTemplateSet set;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string name;
    if (!(ls >> name)) continue;
    std::vector<int> intervals;
    int v;
    while (ls >> v) intervals.push_back(v);
    set.templates.push_back(ChordTemplate::make(name, std::move(intervals)));
  }
  if (set.templates.empty())
    throw ParseError("template file defines no chords: " + path, 0);
  return set;
}

int findRoot(std::span<const NoteEvent> bin_notes, Beats bin_start) {
  if (bin_notes.empty()) throw NoRootError("empty bin has no root");

  // Notes attacking before the first upbeat (first half beat of the bin).
  Beats upbeat = bin_start + Beats(1, 2);
  int lowest = std::numeric_limits<int>::max();
  for (const auto& n : bin_notes)
    if (n.onset >= bin_start && n.onset < upbeat) lowest = std::min(lowest, n.pitch);
  if (lowest != std::numeric_limits<int>::max()) return lowest % 12;

  // Fallback: lowest pitch sounding at bin start.
  for (const auto& n : bin_notes)
    if (n.onset <= bin_start && n.end() > bin_start) lowest = std::min(lowest, n.pitch);
  if (lowest != std::numeric_limits<int>::max()) return lowest % 12;

  // Final fallback: lowest pitch anywhere in the bin.
  for (const auto& n : bin_notes) lowest = std::min(lowest, n.pitch);
  return lowest % 12;
}

int chordCost(const std::set<int>& pitch_classes, const ChordTemplate& chord,
              int root_pc) {
  std::vector<int> voices;
  for (int i = 0; i < 12; ++i)
    if (chord.interval_set[i]) voices.push_back(i);

  int pitch_cost = 0;
  for (int pc : pitch_classes) {
    int interval = ((pc - root_pc) % 12 + 12) % 12;
    int best = std::numeric_limits<int>::max();
    for (int v : voices) best = std::min(best, compatibilityDistance(interval - v));
    pitch_cost += best;
  }

  int chord_voice_cost = 0;
  for (int v : voices) {
    int best = std::numeric_limits<int>::max();
    for (int pc : pitch_classes) {
      int interval = ((pc - root_pc) % 12 + 12) % 12;
      best = std::min(best, compatibilityDistance(interval - v));
    }
    chord_voice_cost += best;
  }
  return pitch_cost + chord_voice_cost;
}

ChordLabel bestChordInBin(std::span<const NoteEvent> bin_notes, Beats bin_start,
                          Beats bin_length, const ChordTemplateSet& templates) {
  ChordLabel label;
  label.bin_start = bin_start;
  label.bin_length = bin_length;
  if (bin_notes.empty()) {
    label.silent = true;
    return label;
  }

  label.root_pc = findRoot(bin_notes, bin_start);
  std::set<int> pitch_classes;
  for (const auto& n : bin_notes) pitch_classes.insert(n.pitch % 12);

  int best_cost = std::numeric_limits<int>::max();
  std::size_t best_size = 0;
  for (std::size_t i = 0; i < templates.templates.size(); ++i) {
    const auto& tmpl = templates.templates[i];
    int cost = chordCost(pitch_classes, tmpl, label.root_pc);
    bool better = cost < best_cost ||
                  (cost == best_cost && tmpl.intervals.size() < best_size);
    if (better) {
      best_cost = cost;
      best_size = tmpl.intervals.size();
      label.template_index = static_cast<int>(i);
      label.cost = cost;
    }
  }
  return label;
}

std::string ChordLabel::name(const ChordTemplateSet& templates) const {
  if (silent) return "-";
  return std::string(pitchClassName(root_pc)) + ":" +
         templates.templates[template_index].name;
}

BinPolicy binPolicyFromName(const std::string& name) {
  if (name == "half") return BinPolicy::Half;
  if (name == "one") return BinPolicy::One;
  if (name == "two") return BinPolicy::Two;
  if (name == "auto") return BinPolicy::Auto;
  throw ValidationError("unknown bin policy: " + name);
}

namespace {

std::vector<ChordLabel> labelSegment(std::span<const NoteEvent> notes,
                                     Beats seg_start, Beats seg_end,
                                     Beats bin_length,
                                     const ChordTemplateSet& templates) {
  std::vector<ChordLabel> labels;
  if (seg_end - seg_start <= bin_length) {
    auto bin = notesInBin(notes, seg_start, seg_end);
    labels.push_back(bestChordInBin(bin, seg_start, seg_end - seg_start, templates));
    return labels;
  }
  for (Beats start = seg_start; start < seg_end; start += bin_length) {
    Beats end = std::min(seg_end, start + bin_length);
    auto bin = notesInBin(notes, start, end);
    labels.push_back(bestChordInBin(bin, start, end - start, templates));
  }
  return labels;
}

long totalCost(const std::vector<ChordLabel>& labels) {
  long total = 0;
  for (const auto& l : labels)
    if (!l.silent) total += l.cost;
  return total;
}

}  // namespace

std::vector<ChordLabel> detectChords(const Song& song,
                                     const std::vector<int>& track_indices,
                                     BinPolicy policy,
                                     const ChordTemplateSet& templates) {
  if (song.time_signatures.empty())
    throw ValidationError("song has no time signature spans");

  std::vector<NoteEvent> notes;
  for (int ti : track_indices) {
    if (ti < 0 || ti >= static_cast<int>(song.tracks.size()))
      throw ValidationError("track index out of range: " + std::to_string(ti));
    for (const auto& n : song.tracks[ti].notes)
      if (!n.isPercussion()) notes.push_back(n);
  }
  std::sort(notes.begin(), notes.end(),
            [](const NoteEvent& a, const NoteEvent& b) { return a.onset < b.onset; });

  Beats song_end = song.duration();
  std::vector<ChordLabel> all;
  for (std::size_t si = 0; si < song.time_signatures.size(); ++si) {
    const auto& ts = song.time_signatures[si];
    Beats seg_start = ts.start;
    Beats seg_end = (si + 1 < song.time_signatures.size())
                        ? song.time_signatures[si + 1].start
                        : std::max(song_end, seg_start);
    if (seg_end <= seg_start) continue;
    Beats measure = ts.measureLength();

    std::vector<ChordLabel> chosen;
    if (policy == BinPolicy::Auto) {
      double measures_in_segment = toDouble((seg_end - seg_start) / measure);
      double best_norm = 0.0;
      bool have = false;
      // Longest first, so ties keep the longer bin.
      for (Beats len : {measure * 2, measure, measure / 2}) {
        auto labels = labelSegment(notes, seg_start, seg_end, len, templates);
        double norm = static_cast<double>(totalCost(labels)) /
                      std::max(measures_in_segment, 1e-9);
        if (!have || norm < best_norm) {
          have = true;
          best_norm = norm;
          chosen = std::move(labels);
        }
      }
    } else {
      Beats len = measure;
      if (policy == BinPolicy::Half) len = measure / 2;
      if (policy == BinPolicy::Two) len = measure * 2;
      chosen = labelSegment(notes, seg_start, seg_end, len, templates);
    }
    all.insert(all.end(), chosen.begin(), chosen.end());
  }
  return all;
}

ScaleDegree toScaleDegree(const ChordLabel& label, int tonic_pc, Mode mode,
                          const ChordTemplateSet& templates) {
  if (label.silent) throw ValidationError("silent bin has no scale degree");
  int offset = ((label.root_pc - tonic_pc) % 12 + 12) % 12;
  int degree = degreeOfOffset(mode, offset);
  if (degree == 0)
    throw OutOfModeError(std::string("chord root ") + pitchClassName(label.root_pc) +
                         " is not diatonic to " + pitchClassName(tonic_pc) + " " +
                         modeName(mode));
  return {degree, templates.templates[label.template_index].qualities};
}

}  // namespace harmonia
