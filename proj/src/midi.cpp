#include "musan/midi.h"

#include <algorithm>
#include <map>

#include "musan/error.h"

namespace musan::midi {

namespace {

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  bool done() const { return pos_ >= bytes_.size(); }
  std::size_t pos() const { return pos_; }

  std::uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }
  std::uint32_t u16() {
    need(2);
    std::uint32_t v = (bytes_[pos_] << 8) | bytes_[pos_ + 1];
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = (std::uint32_t{bytes_[pos_]} << 24) | (bytes_[pos_ + 1] << 16) | (bytes_[pos_ + 2] << 8) |
                      bytes_[pos_ + 3];
    pos_ += 4;
    return v;
  }
  std::uint32_t varLen() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      const std::uint8_t b = u8();
      v = (v << 7) | (b & 0x7F);
      if (!(b & 0x80)) return v;
    }
    throw LoadError("MIDI: variable-length quantity too long");
  }
  std::span<const std::uint8_t> take(std::size_t n) {
    need(n);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  void skip(std::size_t n) { take(n); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw LoadError("MIDI: unexpected end of data");
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

Track readTrack(std::span<const std::uint8_t> data, File& file) {
  Reader r(data);
  Track track;
  std::int64_t tick = 0;
  std::uint8_t running = 0;
  // (channel, pitch) -> stack of pending note-on ticks
  std::map<std::pair<int, int>, std::vector<std::int64_t>> pending;

  auto noteOff = [&](int channel, int pitch) {
    auto it = pending.find({channel, pitch});
    if (it == pending.end() || it->second.empty()) return;
    const std::int64_t on = it->second.front();
    it->second.erase(it->second.begin());
    track.notes.push_back({on, tick, pitch, channel});
  };

  auto channelMessage = [&](std::uint8_t status, std::uint8_t d1) {
    const int type = status & 0xF0;
    const int channel = status & 0x0F;
    if (type == 0xC0 || type == 0xD0) return;
    const std::uint8_t d2 = r.u8();
    if (type == 0x90 && d2 > 0) {
      pending[{channel, d1}].push_back(tick);
    } else if (type == 0x80 || type == 0x90) {
      noteOff(channel, d1);
    }
  };

  while (!r.done()) {
    tick += r.varLen();
    const std::uint8_t status = r.u8();
    if (status < 0x80) {
      // running status: `status` is really the first data byte
      if (running == 0) throw LoadError("MIDI: data byte without running status");
      channelMessage(running, status);
      continue;
    }
    if (status == 0xFF) {
      const std::uint8_t meta = r.u8();
      const auto len = r.varLen();
      const auto payload = r.take(len);
      if (meta == 0x03) {
        track.name.assign(payload.begin(), payload.end());
      } else if (meta == 0x51 && len == 3) {
        file.tempos.push_back({tick, (payload[0] << 16) | (payload[1] << 8) | payload[2]});
      } else if (meta == 0x58 && len >= 2) {
        file.time_signatures.push_back({tick, payload[0], 1 << payload[1]});
      } else if (meta == 0x2F) {
        break;
      }
      continue;
    }
    if (status == 0xF0 || status == 0xF7) {
      r.skip(r.varLen());
      continue;
    }
    running = status;
    channelMessage(status, r.u8());
  }
  // Notes never released end at the last event.
  for (auto& [key, ons] : pending) {
    for (auto on : ons) track.notes.push_back({on, std::max(tick, on + 1), key.second, key.first});
  }
  std::sort(track.notes.begin(), track.notes.end(), [](const Note& a, const Note& b) {
    return a.on_tick != b.on_tick ? a.on_tick < b.on_tick : a.pitch < b.pitch;
  });
  return track;
}

}  // namespace

File parse(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  if (bytes.size() < 14) throw LoadError("MIDI: file too short");
  const auto magic = r.take(4);
  if (!std::equal(magic.begin(), magic.end(), "MThd")) throw LoadError("MIDI: missing MThd header");
  const auto header_len = r.u32();
  if (header_len < 6) throw LoadError("MIDI: bad header length");
  File file;
  file.format = static_cast<int>(r.u16());
  const auto ntracks = r.u16();
  const auto division = r.u16();
  r.skip(header_len - 6);
  if (file.format > 1) throw LoadError("MIDI: format 2 files are not supported");
  if (division & 0x8000) throw LoadError("MIDI: SMPTE time division cannot be aligned to beats");
  if (division == 0) throw LoadError("MIDI: zero time division");
  file.division = static_cast<int>(division);

  for (std::uint32_t t = 0; t < ntracks && !r.done(); ++t) {
    const auto id = r.take(4);
    const auto len = r.u32();
    const auto chunk = r.take(len);
    if (!std::equal(id.begin(), id.end(), "MTrk")) continue;
    file.tracks.push_back(readTrack(chunk, file));
  }
  std::stable_sort(file.tempos.begin(), file.tempos.end(),
                   [](const TempoChange& a, const TempoChange& b) { return a.tick < b.tick; });
  std::stable_sort(file.time_signatures.begin(), file.time_signatures.end(),
                   [](const TimeSignatureChange& a, const TimeSignatureChange& b) { return a.tick < b.tick; });
  return file;
}

double secondsToTicks(const File& file, double seconds) {
  double elapsed = 0.0;
  std::int64_t tick = 0;
  int tempo = 500000;
  for (const auto& change : file.tempos) {
    const double span = static_cast<double>(change.tick - tick) * tempo / 1e6 / file.division;
    if (elapsed + span >= seconds) break;
    elapsed += span;
    tick = change.tick;
    tempo = change.us_per_quarter;
  }
  return static_cast<double>(tick) + (seconds - elapsed) * 1e6 / tempo * file.division;
}

}  // namespace musan::midi
