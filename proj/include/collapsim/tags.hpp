#pragma once

#include <cstdint>
#include <string>
#include <vector>

// Time-tag event streams: (channel, picosecond timestamp) records as produced
// by a time-to-digital converter, plus the two on-disk formats.
//
// Binary format "ETT1": 4 magic bytes "ETT1", a u32 little-endian length, that
// many bytes of UTF-8 JSON run metadata, then packed little-endian records of
// { u8 channel, u64 t_ps }.
//
// CSV format: optional "# meta <json>" comment line, a "channel,t_ps" header,
// one record per row. Both formats carry identical information, so conversion
// round-trips byte-exactly.

namespace collapsim::tags {

struct TimeTag {
    std::int64_t t_ps = 0;  ///< picoseconds since run start, >= 0
    std::uint8_t channel = 0;

    friend bool operator<(const TimeTag& a, const TimeTag& b) {
        return a.t_ps != b.t_ps ? a.t_ps < b.t_ps : a.channel < b.channel;
    }
    friend bool operator==(const TimeTag& a, const TimeTag& b) {
        return a.t_ps == b.t_ps && a.channel == b.channel;
    }
};

/// Run metadata stored with every stream. Deliberately contains nothing
/// wall-clock dependent: identical runs must serialize byte-identically.
struct StreamHeader {
    std::uint64_t seed = 0;
    double duration_s = 0.0;
    std::string config_hash;  ///< FNV-1a hex of the canonical run config
    std::string phase;        ///< "baseline", "grating", or free-form

    std::string to_json() const;
    static StreamHeader from_json(const std::string& text);
};

struct TagStream {
    StreamHeader header;
    std::vector<TimeTag> tags;  ///< sorted by (t_ps, channel)

    bool is_sorted() const;

    /// Timestamps of one channel, in order.
    std::vector<std::int64_t> channel_times(std::uint8_t channel) const;

    /// Distinct channels present, ascending.
    std::vector<std::uint8_t> channels() const;

    std::size_t count(std::uint8_t channel) const;
};

enum class TagFormat { Binary, Csv };

TagFormat parse_tag_format(const std::string& name);

void write_tags(const std::string& path, const TagStream& stream, TagFormat format);

/// Reads either format (detected from content). Throws IoError on bad magic,
/// malformed rows, or truncated records.
TagStream read_tags(const std::string& path);

}  // namespace collapsim::tags
