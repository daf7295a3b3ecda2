/// @file
/// @brief Track scoring for melody identification.

#include "harmonia/melody.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace harmonia {

namespace {

std::string toLower(const std::string& s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), ::tolower);
  return out;
}

bool matchesKeyword(const std::string& lowered_name,
                    const std::vector<std::string>& keywords) {
  for (const auto& kw : keywords)
    if (lowered_name.find(kw) != std::string::npos) return true;
  return false;
}

// Key-value parser shared by the table and weight files: `key = v1 v2 ...`.
std::vector<std::pair<std::string, std::vector<std::string>>> readKeyValues(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path, 0);
  std::vector<std::pair<std::string, std::vector<std::string>>> entries;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key, eq;
    if (!(ls >> key)) continue;
    if (!(ls >> eq) || eq != "=")
      throw ParseError("expected `key = values` in " + path, 0);
    std::vector<std::string> values;
    std::string v;
    while (ls >> v) values.push_back(v);
    entries.emplace_back(key, values);
  }
  return entries;
}

std::set<int> parsePrograms(const std::vector<std::string>& tokens) {
  std::set<int> out;
  for (const auto& t : tokens) {
    auto dash = t.find('-');
    if (dash == std::string::npos) {
      out.insert(std::stoi(t));
    } else {
      int lo = std::stoi(t.substr(0, dash));
      int hi = std::stoi(t.substr(dash + 1));
      for (int p = lo; p <= hi; ++p) out.insert(p);
    }
  }
  return out;
}

}  // namespace

const char* instrumentCategoryName(InstrumentCategory c) {
  switch (c) {
    case InstrumentCategory::MelodyLikely: return "melody";
    case InstrumentCategory::AccompanimentLikely: return "accompaniment";
    case InstrumentCategory::Percussion: return "percussion";
  }
  return "unknown";
}

const InstrumentTable& InstrumentTable::builtin() {
  static const InstrumentTable table = [] {
    InstrumentTable t;
    t.melody_keywords = {"melody", "lead",  "vocal",   "voice",   "violin",
                         "flute",  "sax",   "trumpet", "oboe",    "clarinet",
                         "piccolo", "whistle", "recorder", "solo"};
    t.accompaniment_keywords = {"bass",   "pad",    "tuba",  "trombone", "accomp",
                                "rhythm", "chord",  "organ", "strings",  "harp",
                                "backing"};
    // General MIDI: violin, trumpet, reeds, pipes, synth leads.
    t.melody_programs = parsePrograms({"40", "56", "64-79", "80-87"});
    // Guitars, basses, cello/contrabass, trombone/tuba, synth pads.
    t.accompaniment_programs = parsePrograms({"24-39", "42-43", "57-58", "88-95"});
    return t;
  }();
  return table;
}

InstrumentTable InstrumentTable::fromFile(const std::string& path) {
  InstrumentTable t;
  for (const auto& [key, values] : readKeyValues(path)) {
    if (key == "melody_keywords") {
      for (const auto& v : values) t.melody_keywords.push_back(toLower(v));
    } else if (key == "accompaniment_keywords") {
      for (const auto& v : values) t.accompaniment_keywords.push_back(toLower(v));
    } else if (key == "melody_programs") {
      t.melody_programs = parsePrograms(values);
    } else if (key == "accompaniment_programs") {
      t.accompaniment_programs = parsePrograms(values);
    } else {
      throw ParseError("unknown key `" + key + "` in " + path, 0);
    }
  }
  return t;
}

RubricWeights RubricWeights::fromFile(const std::string& path) {
  RubricWeights w;
  for (const auto& [key, values] : readKeyValues(path)) {
    if (values.size() != 1) throw ParseError("expected one value for " + key, 0);
    double v = std::stod(values[0]);
    if (key == "melody_bonus") w.melody_bonus = v;
    else if (key == "accompaniment_bonus") w.accompaniment_bonus = v;
    else if (key == "percussion_penalty") w.percussion_penalty = v;
    else if (key == "density_bonus") w.density_bonus = v;
    else if (key == "density_low") w.density_low = v;
    else if (key == "density_high") w.density_high = v;
    else if (key == "range_bonus") w.range_bonus = v;
    else if (key == "range_low") w.range_low = static_cast<int>(v);
    else if (key == "range_high") w.range_high = static_cast<int>(v);
    else if (key == "central_fraction") w.central_fraction = v;
    else throw ParseError("unknown key `" + key + "` in " + path, 0);
  }
  return w;
}

InstrumentCategory instrumentCategory(const std::string& name, int program,
                                      bool is_channel_10,
                                      const InstrumentTable& table) {
  if (is_channel_10) return InstrumentCategory::Percussion;
  std::string lowered = toLower(name);
  if (!lowered.empty()) {
    if (matchesKeyword(lowered, table.melody_keywords))
      return InstrumentCategory::MelodyLikely;
    if (matchesKeyword(lowered, table.accompaniment_keywords))
      return InstrumentCategory::AccompanimentLikely;
  }
  if (table.melody_programs.count(program)) return InstrumentCategory::MelodyLikely;
  if (table.accompaniment_programs.count(program))
    return InstrumentCategory::AccompanimentLikely;
  return InstrumentCategory::AccompanimentLikely;
}

double noteDensity(std::span<const NoteEvent> notes, Beats song_duration) {
  if (notes.empty() || song_duration <= Beats(0)) return 0.0;
  std::vector<std::pair<Beats, Beats>> intervals;
  intervals.reserve(notes.size());
  for (const auto& n : notes) {
    Beats lo = std::max(Beats(0), n.onset);
    Beats hi = std::min(song_duration, n.end());
    if (hi > lo) intervals.emplace_back(lo, hi);
  }
  if (intervals.empty()) return 0.0;
  std::sort(intervals.begin(), intervals.end());
  Beats covered{0};
  Beats cur_lo = intervals.front().first;
  Beats cur_hi = intervals.front().second;
  for (std::size_t i = 1; i < intervals.size(); ++i) {
    if (intervals[i].first <= cur_hi) {
      cur_hi = std::max(cur_hi, intervals[i].second);
    } else {
      covered += cur_hi - cur_lo;
      cur_lo = intervals[i].first;
      cur_hi = intervals[i].second;
    }
  }
  covered += cur_hi - cur_lo;
  return toDouble(covered / song_duration);
}

PitchClassDistribution pitchClassDistribution(std::span<const NoteEvent> notes) {
  PitchClassDistribution dist;
  if (notes.empty()) return dist;
  for (const auto& n : notes) dist.p[n.pitch % 12] += 1.0;
  for (auto& p : dist.p) p /= static_cast<double>(notes.size());
  return dist;
}

double pitchEntropy(std::span<const NoteEvent> notes) {
  if (notes.empty()) return 0.0;
  PitchClassDistribution dist = pitchClassDistribution(notes);
  double h = 0.0;
  for (double p : dist.p)
    if (p > 0.0) h -= p * std::log(p);
  return h < 0.0 ? 0.0 : h;
}

double rubricScore(const Track& track, const Song& song,
                   const RubricWeights& weights, const InstrumentTable& table) {
  const std::string& name = track.instrument.empty() ? track.name : track.instrument;
  InstrumentCategory category =
      instrumentCategory(name, track.program, track.isPercussion(), table);

  double score = 0.0;
  switch (category) {
    case InstrumentCategory::MelodyLikely: score += weights.melody_bonus; break;
    case InstrumentCategory::AccompanimentLikely: score += weights.accompaniment_bonus; break;
    case InstrumentCategory::Percussion: score += weights.percussion_penalty; break;
  }

  double density = noteDensity(track.notes, song.duration());
  if (density >= weights.density_low && density <= weights.density_high)
    score += weights.density_bonus;

  if (!track.notes.empty()) {
    // Central 90% of notes by pitch must sit inside the melody range.
    std::vector<int> pitches;
    pitches.reserve(track.notes.size());
    for (const auto& n : track.notes) pitches.push_back(n.pitch);
    std::sort(pitches.begin(), pitches.end());
    std::size_t n = pitches.size();
    std::size_t trim = static_cast<std::size_t>(
        std::floor(n * (1.0 - weights.central_fraction) / 2.0));
    int low = pitches[trim];
    int high = pitches[n - 1 - trim];
    if (low >= weights.range_low && high <= weights.range_high)
      score += weights.range_bonus;
  }
  return score;
}

std::vector<TrackScore> scoreTracks(const Song& song, const RubricWeights& weights,
                                    const InstrumentTable& table) {
  std::vector<TrackScore> scores;
  scores.reserve(song.tracks.size());
  for (std::size_t i = 0; i < song.tracks.size(); ++i) {
    const Track& track = song.tracks[i];
    TrackScore s;
    s.track_index = static_cast<int>(i);
    const std::string& name = track.instrument.empty() ? track.name : track.instrument;
    s.category = instrumentCategory(name, track.program, track.isPercussion(), table);
    s.density = noteDensity(track.notes, song.duration());
    s.rubric = rubricScore(track, song, weights, table);
    s.entropy = pitchEntropy(track.notes);
    s.total = s.rubric + s.entropy;
    s.eligible = !track.notes.empty() && s.category != InstrumentCategory::Percussion;
    scores.push_back(s);
  }
  return scores;
}

int identifyMelody(const Song& song, const RubricWeights& weights,
                   const InstrumentTable& table) {
  auto scores = scoreTracks(song, weights, table);
  int best = -1;
  for (const auto& s : scores) {
    if (!s.eligible) continue;
    if (best < 0 || s.total > scores[best].total) best = s.track_index;
  }
  if (best < 0) throw NoMelodyError("no eligible melody track");
  return best;
}

}  // namespace harmonia
