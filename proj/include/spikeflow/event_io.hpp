#pragma once

// Event files: CSV text ("t_us,x,y,p", p in {0,1}) and the SPKEVT01 binary
// container. Readers pick the format from the leading magic bytes.
//
//   "SPKEVT01" | u32 width | u32 height | u64 duration_us | u64 count
//   | count x (u64 t_us, u16 x, u16 y, i8 p), little-endian

#include <array>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "spikeflow/events.hpp"
#include "spikeflow/fileutil.hpp"

namespace spikeflow {

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

inline constexpr std::array<char, 8> kEventMagic = {'S', 'P', 'K', 'E', 'V', 'T', '0', '1'};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

template <typename T>
bool parse_int(std::string_view s, T& out) {
    s = trim(s);
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

// "# width=W height=H duration_us=D" metadata comment written by write_events_csv.
inline void parse_metadata(std::string_view line, EventStream& s) {
    std::istringstream in{std::string(line.substr(1))};
    std::string tok;
    while (in >> tok) {
        auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        std::string key = tok.substr(0, eq);
        std::int64_t value = 0;
        if (!parse_int(std::string_view(tok).substr(eq + 1), value)) continue;
        if (key == "width") s.width = static_cast<int>(value);
        else if (key == "height") s.height = static_cast<int>(value);
        else if (key == "duration_us") s.duration = value;
    }
}

}  // namespace detail

/// Parses one CSV record. Polarity 0 maps to -1 and 1 to +1.
inline Event parse_event_line(std::string_view line, std::size_t lineno) {
    std::array<std::int64_t, 4> f{};
    std::size_t field = 0;
    while (true) {
        auto comma = line.find(',');
        std::string_view tok = line.substr(0, comma);
        if (field >= 4 || !detail::parse_int(tok, f[field]))
            throw ParseError("expected four comma-separated integers", lineno);
        ++field;
        if (comma == std::string_view::npos) break;
        line.remove_prefix(comma + 1);
    }
    if (field != 4) throw ParseError("expected four comma-separated integers", lineno);
    if (f[3] != 0 && f[3] != 1)
        throw EventError("line " + std::to_string(lineno) + ": polarity must be 0 or 1");
    if (f[0] < 0 || f[1] < 0 || f[2] < 0) throw ParseError("negative field", lineno);
    return Event{f[0], static_cast<std::int32_t>(f[1]), static_cast<std::int32_t>(f[2]),
                 static_cast<std::int8_t>(f[3] == 1 ? 1 : -1)};
}

/// Reads CSV. Width/height/duration come from the metadata comment when present,
/// otherwise they are inferred from the data.
inline EventStream read_events_csv(std::istream& in) {
    EventStream s;
    std::string raw;
    std::size_t lineno = 0;
    bool meta_dims = false;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string_view line = detail::trim(raw);
        if (line.empty()) continue;
        if (line.front() == '#') {
            detail::parse_metadata(line, s);
            meta_dims = s.width > 0 && s.height > 0;
            continue;
        }
        if (line.rfind("t_us", 0) == 0) continue;
        Event e = parse_event_line(line, lineno);
        if (!s.events.empty() && e.t < s.events.back().t)
            throw EventError("line " + std::to_string(lineno) + ": timestamps not monotone");
        s.events.push_back(e);
    }
    if (!meta_dims) {
        int w = 0, h = 0;
        for (const Event& e : s.events) {
            w = std::max(w, e.x + 1);
            h = std::max(h, e.y + 1);
        }
        s.width = std::max(s.width, w);
        s.height = std::max(s.height, h);
    }
    if (s.duration == 0 && !s.events.empty()) s.duration = s.events.back().t + 1;
    validate(s);
    return s;
}

inline void write_events_csv(const EventStream& s, std::ostream& out) {
    out << "# width=" << s.width << " height=" << s.height << " duration_us=" << s.duration << '\n';
    out << "t_us,x,y,p\n";
    for (const Event& e : s.events) out << e.t << ',' << e.x << ',' << e.y << ',' << (e.p > 0 ? 1 : 0) << '\n';
}

inline EventStream read_events_binary(std::istream& in) {
    std::array<char, 8> magic{};
    if (!in.read(magic.data(), 8) || magic != kEventMagic) throw FormatError("bad event file magic");
    std::uint32_t w = read_le<std::uint32_t>(in);
    std::uint32_t h = read_le<std::uint32_t>(in);
    std::uint64_t duration = read_le<std::uint64_t>(in);
    std::uint64_t n = read_le<std::uint64_t>(in);
    EventStream s;
    s.width = static_cast<int>(w);
    s.height = static_cast<int>(h);
    s.events.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(n, 1u << 24)));
    for (std::uint64_t i = 0; i < n; ++i) {
        Event e;
        e.t = static_cast<std::int64_t>(read_le<std::uint64_t>(in));
        e.x = read_le<std::uint16_t>(in);
        e.y = read_le<std::uint16_t>(in);
        e.p = read_le<std::int8_t>(in);
        s.events.push_back(e);
    }
    s.duration = static_cast<std::int64_t>(duration);
    if (!s.events.empty() && s.events.back().t >= s.duration) throw FormatError("event beyond stream duration");
    try {
        validate(s);
    } catch (const EventError& e) {
        throw FormatError(e.what());
    }
    return s;
}

inline void write_events_binary(const EventStream& s, std::ostream& out) {
    out.write(kEventMagic.data(), 8);
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.width));
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.height));
    write_le<std::uint64_t>(out, static_cast<std::uint64_t>(s.duration));
    write_le<std::uint64_t>(out, s.events.size());
    for (const Event& e : s.events) {
        write_le<std::uint64_t>(out, static_cast<std::uint64_t>(e.t));
        write_le<std::uint16_t>(out, static_cast<std::uint16_t>(e.x));
        write_le<std::uint16_t>(out, static_cast<std::uint16_t>(e.y));
        write_le<std::int8_t>(out, e.p);
    }
}

inline EventStream read_events(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::array<char, 8> head{};
    in.read(head.data(), 8);
    bool binary = in.gcount() == 8 && head == kEventMagic;
    in.clear();
    in.seekg(0);
    return binary ? read_events_binary(in) : read_events_csv(in);
}

enum class EventFormat { Csv, Binary };

inline EventFormat format_for(const std::filesystem::path& path) {
    return path.extension() == ".csv" || path.extension() == ".txt" ? EventFormat::Csv : EventFormat::Binary;
}

inline void write_events(const EventStream& s, const std::filesystem::path& path) {
    validate(s);
    atomic_write(path, [&](std::ostream& out) {
        if (format_for(path) == EventFormat::Csv) write_events_csv(s, out);
        else write_events_binary(s, out);
    });
}

}  // namespace spikeflow
