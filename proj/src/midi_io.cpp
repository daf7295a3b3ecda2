/// @file
/// @brief SMF reader/writer over exact rational beat time.

#include "harmonia/midi_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>

namespace harmonia {

namespace {

// ---------------------------------------------------------------------------
// Song helpers
// ---------------------------------------------------------------------------

std::int64_t lcm64(std::int64_t a, std::int64_t b) {
  return a / std::gcd(a, b) * b;
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

class ByteReader {
 public:
  ByteReader(const Bytes& data) : data_(data) {}

  std::size_t pos() const { return pos_; }
  bool atEnd() const { return pos_ >= data_.size(); }
  std::size_t remaining() const { return data_.size() - pos_; }

  std::uint8_t u8() {
    require(1);
    return data_[pos_++];
  }

  std::uint8_t peek() const {
    if (pos_ >= data_.size()) throw ParseError("unexpected end of data", pos_);
    return data_[pos_];
  }

  std::uint16_t u16() {
    require(2);
    std::uint16_t v = (std::uint16_t(data_[pos_]) << 8) | data_[pos_ + 1];
    pos_ += 2;
    return v;
  }

  std::uint32_t u32() {
    require(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | data_[pos_ + i];
    pos_ += 4;
    return v;
  }

  std::uint32_t vlq() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      std::uint8_t b = u8();
      v = (v << 7) | (b & 0x7F);
      if (!(b & 0x80)) return v;
    }
    throw ParseError("variable-length quantity longer than 4 bytes", pos_);
  }

  std::string str(std::size_t n) {
    require(n);
    std::string s(reinterpret_cast<const char*>(data_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  void skip(std::size_t n) {
    require(n);
    pos_ += n;
  }

 private:
  void require(std::size_t n) const {
    if (pos_ + n > data_.size()) throw ParseError("unexpected end of data", pos_);
  }

  const Bytes& data_;
  std::size_t pos_ = 0;
};

struct OpenNote {
  std::int64_t start_tick = 0;
  int velocity = 0;
  int depth = 0;  // overlapping duplicates merge instead of nesting
};

struct RawMeta {
  std::int64_t tick;
  TimeSignatureSpan ts;
  TempoSpan tempo;
  bool is_ts;
};

void parseTrack(ByteReader& r, std::uint32_t length, int track_index, int tpq,
                Song& song) {
  Track track;
  std::size_t track_end = r.pos() + length;
  std::int64_t tick = 0;
  std::uint8_t running_status = 0;
  std::map<std::pair<int, int>, OpenNote> open;  // (channel, pitch) -> note

  auto closeNote = [&](int channel, int pitch, std::int64_t off_tick) {
    auto it = open.find({channel, pitch});
    if (it == open.end()) return;  // stray note-off, ignore
    if (--it->second.depth > 0) return;
    std::int64_t len = off_tick - it->second.start_tick;
    if (len <= 0) {
      len = 1;  // zero-length notes get one tick
      ++song.warnings;
    }
    NoteEvent note;
    note.pitch = pitch;
    note.onset = Beats(it->second.start_tick, tpq);
    note.duration = Beats(len, tpq);
    note.velocity = it->second.velocity;
    note.track_index = track_index;
    note.channel = channel;
    track.notes.push_back(note);
    open.erase(it);
  };

  while (r.pos() < track_end) {
    tick += r.vlq();
    std::uint8_t status = r.peek();
    if (status & 0x80) {
      r.u8();
      if (status < 0xF0) running_status = status;
    } else {
      if (!(running_status & 0x80))
        throw ParseError("data byte without running status", r.pos());
      status = running_status;
    }

    if (status == 0xFF) {  // meta event
      std::uint8_t type = r.u8();
      std::uint32_t len = r.vlq();
      switch (type) {
        case 0x03:
          if (track.name.empty()) track.name = r.str(len);
          else r.skip(len);
          break;
        case 0x04:
          if (track.instrument.empty()) track.instrument = r.str(len);
          else r.skip(len);
          break;
        case 0x51: {
          if (len < 3) throw ParseError("short tempo event", r.pos());
          std::int64_t usec = (std::int64_t(r.u8()) << 16);
          usec |= (std::int64_t(r.u8()) << 8);
          usec |= r.u8();
          r.skip(len - 3);
          song.tempos.push_back({Beats(tick, tpq), usec});
          break;
        }
        case 0x58: {
          if (len < 2) throw ParseError("short time-signature event", r.pos());
          int num = r.u8();
          int den_pow = r.u8();
          r.skip(len - 2);
          if (num < 1) num = 4;
          song.time_signatures.push_back({Beats(tick, tpq), num, 1 << den_pow});
          break;
        }
        case 0x2F:
          r.skip(len);
          r.skip(track_end - r.pos());  // end of track
          break;
        default:
          r.skip(len);
      }
      continue;
    }
    if (status == 0xF0 || status == 0xF7) {  // sysex: skip payload
      std::uint32_t len = r.vlq();
      r.skip(len);
      continue;
    }

    int kind = status >> 4;
    int channel = status & 0x0F;
    switch (kind) {
      case 0x9: {  // note on (velocity 0 means off)
        int pitch = r.u8() & 0x7F;
        int velocity = r.u8() & 0x7F;
        if (velocity == 0) {
          closeNote(channel, pitch, tick);
        } else {
          auto& slot = open[{channel, pitch}];
          if (slot.depth == 0) {
            slot.start_tick = tick;
            slot.velocity = velocity;
          } else {
            ++song.warnings;  // overlapping duplicate, merged
          }
          ++slot.depth;
        }
        break;
      }
      case 0x8: {  // note off
        int pitch = r.u8() & 0x7F;
        r.u8();  // release velocity
        closeNote(channel, pitch, tick);
        break;
      }
      case 0xC: {  // program change
        int program = r.u8() & 0x7F;
        if (track.program < 0) track.program = program;
        break;
      }
      case 0xD:  // channel pressure
        r.u8();
        break;
      case 0xA:  // poly pressure
      case 0xB:  // controller
      case 0xE:  // pitch bend
        r.u8();
        r.u8();
        break;
      default:
        throw ParseError("unknown status byte", r.pos());
    }
  }

  // Unmatched note-ons close at end of track.
  for (auto& [key, note] : open) {
    ++song.warnings;
    std::int64_t len = tick - note.start_tick;
    if (len <= 0) len = 1;
    NoteEvent event;
    event.pitch = key.second;
    event.onset = Beats(note.start_tick, tpq);
    event.duration = Beats(len, tpq);
    event.velocity = note.velocity;
    event.track_index = track_index;
    event.channel = key.first;
    track.notes.push_back(event);
  }

  std::stable_sort(track.notes.begin(), track.notes.end(),
                   [](const NoteEvent& a, const NoteEvent& b) {
                     if (a.onset != b.onset) return a.onset < b.onset;
                     if (a.channel != b.channel) return a.channel < b.channel;
                     return a.pitch < b.pitch;
                   });
  song.tracks.push_back(std::move(track));
}

template <typename Span>
void normalizeSpans(std::vector<Span>& spans, const Span& fallback) {
  std::stable_sort(spans.begin(), spans.end(),
                   [](const Span& a, const Span& b) { return a.start < b.start; });
  // Same-start duplicates: last one wins.
  std::vector<Span> out;
  for (const auto& s : spans) {
    if (!out.empty() && out.back().start == s.start) out.back() = s;
    else out.push_back(s);
  }
  if (out.empty() || out.front().start != Beats(0)) {
    Span first = fallback;
    first.start = Beats(0);
    out.insert(out.begin(), first);
  }
  spans = std::move(out);
}

// ---------------------------------------------------------------------------
// Writing
// ---------------------------------------------------------------------------

class ByteWriter {
 public:
  void u8(std::uint8_t v) { data_.push_back(v); }

  void u16(std::uint16_t v) {
    u8(v >> 8);
    u8(v & 0xFF);
  }

  void u32(std::uint32_t v) {
    u8(v >> 24);
    u8((v >> 16) & 0xFF);
    u8((v >> 8) & 0xFF);
    u8(v & 0xFF);
  }

  void vlq(std::int64_t v) {
    std::uint8_t buf[5];
    int n = 0;
    do {
      buf[n++] = v & 0x7F;
      v >>= 7;
    } while (v > 0);
    for (int i = n - 1; i > 0; --i) u8(buf[i] | 0x80);
    u8(buf[0]);
  }

  void str(const std::string& s) {
    for (char c : s) u8(static_cast<std::uint8_t>(c));
  }

  void append(const ByteWriter& other) {
    data_.insert(data_.end(), other.data_.begin(), other.data_.end());
  }

  std::size_t size() const { return data_.size(); }
  Bytes take() { return std::move(data_); }

 private:
  Bytes data_;
};

struct WireEvent {
  std::int64_t tick;
  int order;  // stable kind priority at equal ticks
  Bytes payload;
};

void pushMeta(std::vector<WireEvent>& events, std::int64_t tick, int order,
              std::uint8_t type, const std::string& text) {
  ByteWriter w;
  w.u8(0xFF);
  w.u8(type);
  w.vlq(static_cast<std::int64_t>(text.size()));
  w.str(text);
  events.push_back({tick, order, w.take()});
}

std::int64_t toTick(const Beats& beats, std::int64_t tpq) {
  Beats t = beats * Beats(tpq);
  return t.numerator() / t.denominator();
}

}  // namespace

// ---------------------------------------------------------------------------
// Song
// ---------------------------------------------------------------------------

bool Track::isPercussion() const {
  if (notes.empty()) return false;
  std::size_t percussive = 0;
  for (const auto& n : notes)
    if (n.isPercussion()) ++percussive;
  return percussive * 2 > notes.size();
}

Beats Song::duration() const {
  Beats end{0};
  for (const auto& track : tracks)
    for (const auto& note : track.notes)
      if (note.end() > end) end = note.end();
  return end;
}

std::vector<NoteEvent> Song::allNotes(bool include_percussion) const {
  std::vector<NoteEvent> notes;
  for (const auto& track : tracks)
    for (const auto& note : track.notes)
      if (include_percussion || !note.isPercussion()) notes.push_back(note);
  std::stable_sort(notes.begin(), notes.end(),
                   [](const NoteEvent& a, const NoteEvent& b) { return a.onset < b.onset; });
  return notes;
}

// ---------------------------------------------------------------------------
// parseSmf / writeSmf
// ---------------------------------------------------------------------------

Song parseSmf(const Bytes& bytes) {
  ByteReader r(bytes);
  if (r.remaining() < 14) throw ParseError("file too small for an SMF header", 0);
  if (r.str(4) != "MThd") throw ParseError("missing MThd header", 0);
  std::uint32_t header_len = r.u32();
  if (header_len < 6) throw ParseError("header chunk too short", r.pos());
  int format = r.u16();
  int n_tracks = r.u16();
  int division = r.u16();
  r.skip(header_len - 6);

  if (format != 0 && format != 1)
    throw ParseError("unsupported SMF format " + std::to_string(format), 8);
  if (division & 0x8000)
    throw ParseError("SMPTE time division is not supported", 12);
  if (division == 0) throw ParseError("zero ticks per quarter", 12);

  Song song;
  song.ticks_per_quarter = division;
  for (int i = 0; i < n_tracks; ++i) {
    if (r.atEnd()) throw ParseError("missing track chunk", r.pos());
    std::string magic = r.str(4);
    std::uint32_t length = r.u32();
    if (magic != "MTrk") {  // unknown chunk types are skipped per the standard
      r.skip(length);
      --i;
      continue;
    }
    if (length > r.remaining()) throw ParseError("track chunk overruns file", r.pos());
    parseTrack(r, length, static_cast<int>(song.tracks.size()), division, song);
  }

  normalizeSpans(song.time_signatures, TimeSignatureSpan{});
  normalizeSpans(song.tempos, TempoSpan{});
  return song;
}

Bytes writeSmf(const Song& song) {
  if (song.tracks.empty()) throw ValidationError("song has no tracks");

  // Pick a resolution that makes every beat value an exact tick count.
  std::int64_t tpq = std::max(1, song.ticks_per_quarter);
  auto fold = [&tpq](const Beats& b) { tpq = lcm64(tpq, b.denominator()); };
  for (const auto& track : song.tracks) {
    for (const auto& note : track.notes) {
      if (note.pitch < 0 || note.pitch > 127)
        throw ValidationError("note pitch out of range 0-127");
      if (note.velocity < 1 || note.velocity > 127)
        throw ValidationError("note velocity out of range 1-127");
      if (note.duration <= Beats(0)) throw ValidationError("non-positive note duration");
      if (note.onset < Beats(0)) throw ValidationError("negative note onset");
      fold(note.onset);
      fold(note.duration);
    }
  }
  for (const auto& ts : song.time_signatures) fold(ts.start);
  for (const auto& t : song.tempos) fold(t.start);
  if (tpq > 0x7FFF) throw ValidationError("required tick resolution exceeds SMF limits");

  ByteWriter out;
  out.str("MThd");
  out.u32(6);
  out.u16(1);  // format 1
  out.u16(static_cast<std::uint16_t>(song.tracks.size()));
  out.u16(static_cast<std::uint16_t>(tpq));

  for (std::size_t ti = 0; ti < song.tracks.size(); ++ti) {
    const Track& track = song.tracks[ti];
    std::vector<WireEvent> events;

    if (!track.name.empty()) pushMeta(events, 0, 0, 0x03, track.name);
    if (!track.instrument.empty()) pushMeta(events, 0, 1, 0x04, track.instrument);
    if (track.program >= 0) {
      int channel = track.notes.empty() ? 0 : track.notes.front().channel;
      events.push_back({0, 2, {std::uint8_t(0xC0 | channel),
                               std::uint8_t(track.program & 0x7F)}});
    }
    if (ti == 0) {  // global meter and tempo live in the first track
      for (const auto& ts : song.time_signatures) {
        int den_pow = 0;
        while ((1 << den_pow) < ts.denominator) ++den_pow;
        events.push_back({toTick(ts.start, tpq), 3,
                          {0xFF, 0x58, 0x04, std::uint8_t(ts.numerator),
                           std::uint8_t(den_pow), 24, 8}});
      }
      for (const auto& tempo : song.tempos) {
        auto usec = tempo.microseconds_per_quarter;
        events.push_back({toTick(tempo.start, tpq), 4,
                          {0xFF, 0x51, 0x03, std::uint8_t((usec >> 16) & 0xFF),
                           std::uint8_t((usec >> 8) & 0xFF), std::uint8_t(usec & 0xFF)}});
      }
    }
    for (const auto& note : track.notes) {
      std::uint8_t on = std::uint8_t(0x90 | (note.channel & 0x0F));
      std::uint8_t off = std::uint8_t(0x80 | (note.channel & 0x0F));
      events.push_back({toTick(note.onset, tpq), 6,
                        {on, std::uint8_t(note.pitch), std::uint8_t(note.velocity)}});
      events.push_back({toTick(note.end(), tpq), 5,
                        {off, std::uint8_t(note.pitch), 0}});
    }

    std::stable_sort(events.begin(), events.end(),
                     [](const WireEvent& a, const WireEvent& b) {
                       if (a.tick != b.tick) return a.tick < b.tick;
                       if (a.order != b.order) return a.order < b.order;
                       return a.payload < b.payload;
                     });

    ByteWriter body;
    std::int64_t cursor = 0;
    for (const auto& event : events) {
      body.vlq(event.tick - cursor);
      cursor = event.tick;
      for (auto b : event.payload) body.u8(b);
    }
    body.vlq(0);
    body.u8(0xFF);
    body.u8(0x2F);
    body.u8(0x00);

    out.str("MTrk");
    out.u32(static_cast<std::uint32_t>(body.size()));
    out.append(body);
  }
  return out.take();
}

Song readSmfFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path, 0);
  Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parseSmf(bytes);
}

void writeSmfFile(const Song& song, const std::string& path) {
  Bytes bytes = writeSmf(song);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open file for writing: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

}  // namespace harmonia
