/// @file
/// @brief Standard MIDI File (format 0/1) parsing and serialization.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "harmonia/types.hpp"

namespace harmonia {

using Bytes = std::vector<std::uint8_t>;

/// Parses a format-0 or format-1 SMF into beat time.
///
/// Note on/off pairs are matched per (channel, pitch); overlapping duplicates
/// merge into one note. Unmatched note-ons close at end of track and bump
/// Song::warnings instead of failing. Track name (FF 03), instrument name
/// (FF 04), time signatures (FF 58) and tempi (FF 51) are captured.
/// Throws ParseError on malformed chunks or format-2 input.
Song parseSmf(const Bytes& bytes);

/// Serializes a Song as a format-1 SMF. Global tempo and time-signature
/// events are written into the first track. parseSmf(writeSmf(s)) preserves
/// note events, time signatures, tempi, and track names exactly.
/// Throws ValidationError for out-of-range pitch/velocity or an empty song.
Bytes writeSmf(const Song& song);

Song readSmfFile(const std::string& path);
void writeSmfFile(const Song& song, const std::string& path);

}  // namespace harmonia
