/// @file
/// @brief Core song model: beat-time note events, tracks, meter and tempo maps.

#pragma once

#include <boost/rational.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace harmonia {

/// Musical time in quarter-note beats, kept exact as a rational so that
/// binning and sixteenth-note quantization never drift.
using Beats = boost::rational<std::int64_t>;

inline double toDouble(const Beats& b) {
  return static_cast<double>(b.numerator()) / static_cast<double>(b.denominator());
}

struct NoteEvent {
  int pitch = 60;       // MIDI note number 0-127
  Beats onset{0};       // quarter note = 1
  Beats duration{1};    // strictly positive
  int velocity = 96;    // 1-127
  int track_index = 0;
  int channel = 0;      // 0-15; channel 9 carries percussion

  bool isPercussion() const { return channel == 9; }
  Beats end() const { return onset + duration; }

  bool operator==(const NoteEvent& o) const {
    return pitch == o.pitch && onset == o.onset && duration == o.duration &&
           velocity == o.velocity && channel == o.channel;
  }
};

struct TimeSignatureSpan {
  Beats start{0};
  int numerator = 4;
  int denominator = 4;  // power of two

  /// Length of one measure in quarter-note beats.
  Beats measureLength() const { return Beats(4 * numerator, denominator); }

  bool operator==(const TimeSignatureSpan& o) const {
    return start == o.start && numerator == o.numerator && denominator == o.denominator;
  }
};

struct TempoSpan {
  Beats start{0};
  std::int64_t microseconds_per_quarter = 500000;

  bool operator==(const TempoSpan& o) const {
    return start == o.start && microseconds_per_quarter == o.microseconds_per_quarter;
  }
};

struct Track {
  std::string name;        // meta FF 03
  std::string instrument;  // meta FF 04
  int program = -1;        // first program change, -1 if none
  std::vector<NoteEvent> notes;

  /// A track counts as percussion when most of its notes sit on channel 10.
  bool isPercussion() const;
};

struct Song {
  std::vector<Track> tracks;
  std::vector<TimeSignatureSpan> time_signatures;
  std::vector<TempoSpan> tempos;
  int ticks_per_quarter = 480;
  int warnings = 0;  // unmatched note-ons, merged duplicates, zero-length clamps

  Beats duration() const;
  std::vector<NoteEvent> allNotes(bool include_percussion = false) const;
};

// ---------------------------------------------------------------------------
// Error taxonomy
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t byte_offset)
      : Error(msg + " (at byte " + std::to_string(byte_offset) + ")"),
        offset(byte_offset) {}
  std::size_t offset;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class NoMelodyError : public Error {
 public:
  using Error::Error;
};

class NoRootError : public Error {
 public:
  using Error::Error;
};

class OutOfModeError : public Error {
 public:
  using Error::Error;
};

class KeyEstimateError : public Error {
 public:
  using Error::Error;
};

class GrammarError : public Error {
 public:
  using Error::Error;
};

class ScopeError : public GrammarError {
 public:
  using GrammarError::GrammarError;
};

class RecursionError : public GrammarError {
 public:
  using GrammarError::GrammarError;
};

class ExpansionError : public GrammarError {
 public:
  using GrammarError::GrammarError;
};

class EmptyGrammarError : public GrammarError {
 public:
  using GrammarError::GrammarError;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace harmonia
