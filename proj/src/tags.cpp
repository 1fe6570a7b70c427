#include "collapsim/tags.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>

#include <json.hpp>

#include "collapsim/errors.hpp"

namespace collapsim::tags {

using nlohmann::json;

std::string StreamHeader::to_json() const {
    json j;
    j["seed"] = seed;
    j["duration_s"] = duration_s;
    j["config_hash"] = config_hash;
    j["phase"] = phase;
    return j.dump();
}

StreamHeader StreamHeader::from_json(const std::string& text) {
    StreamHeader h;
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw IoError("malformed stream metadata JSON");
    h.seed = j.value("seed", 0ull);
    h.duration_s = j.value("duration_s", 0.0);
    h.config_hash = j.value("config_hash", std::string{});
    h.phase = j.value("phase", std::string{});
    return h;
}

bool TagStream::is_sorted() const {
    return std::is_sorted(tags.begin(), tags.end());
}

std::vector<std::int64_t> TagStream::channel_times(std::uint8_t channel) const {
    std::vector<std::int64_t> out;
    for (const auto& t : tags)
        if (t.channel == channel) out.push_back(t.t_ps);
    return out;
}

std::vector<std::uint8_t> TagStream::channels() const {
    std::set<std::uint8_t> seen;
    for (const auto& t : tags) seen.insert(t.channel);
    return {seen.begin(), seen.end()};
}

std::size_t TagStream::count(std::uint8_t channel) const {
    std::size_t n = 0;
    for (const auto& t : tags) n += t.channel == channel;
    return n;
}

TagFormat parse_tag_format(const std::string& name) {
    if (name == "bin" || name == "binary") return TagFormat::Binary;
    if (name == "csv") return TagFormat::Csv;
    throw ConfigError("unknown tag format: " + name + " (expected csv or bin)");
}

namespace {

constexpr char kMagic[4] = {'E', 'T', 'T', '1'};

void put_u32le(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64le(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32le(const unsigned char* p) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

std::uint64_t get_u64le(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

void write_binary(std::ofstream& os, const TagStream& stream) {
    std::string buf;
    const std::string meta = stream.header.to_json();
    buf.reserve(8 + meta.size() + stream.tags.size() * 9);
    buf.append(kMagic, 4);
    put_u32le(buf, static_cast<std::uint32_t>(meta.size()));
    buf += meta;
    for (const auto& t : stream.tags) {
        buf.push_back(static_cast<char>(t.channel));
        put_u64le(buf, static_cast<std::uint64_t>(t.t_ps));
    }
    os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

void write_csv(std::ofstream& os, const TagStream& stream) {
    os << "# meta " << stream.header.to_json() << "\n";
    os << "channel,t_ps\n";
    char line[48];
    for (const auto& t : stream.tags) {
        std::snprintf(line, sizeof line, "%u,%lld\n", static_cast<unsigned>(t.channel),
                      static_cast<long long>(t.t_ps));
        os << line;
    }
}

TagStream read_binary(const std::string& bytes, const std::string& path) {
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    if (bytes.size() < 8) throw IoError("truncated tag file: " + path);
    const std::uint32_t meta_len = get_u32le(p + 4);
    if (bytes.size() < 8 + static_cast<std::size_t>(meta_len))
        throw IoError("truncated metadata block: " + path);
    TagStream s;
    s.header = StreamHeader::from_json(bytes.substr(8, meta_len));
    std::size_t off = 8 + meta_len;
    if ((bytes.size() - off) % 9 != 0)
        throw IoError("truncated tag records: " + path);
    s.tags.reserve((bytes.size() - off) / 9);
    while (off < bytes.size()) {
        TimeTag t;
        t.channel = p[off];
        t.t_ps = static_cast<std::int64_t>(get_u64le(p + off + 1));
        s.tags.push_back(t);
        off += 9;
    }
    return s;
}

TagStream read_csv(const std::string& bytes, const std::string& path) {
    TagStream s;
    std::size_t pos = 0;
    bool header_seen = false;
    while (pos < bytes.size()) {
        std::size_t end = bytes.find('\n', pos);
        if (end == std::string::npos) end = bytes.size();
        std::string line = bytes.substr(pos, end - pos);
        pos = end + 1;
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto m = line.find("meta ");
            if (m != std::string::npos) s.header = StreamHeader::from_json(line.substr(m + 5));
            continue;
        }
        if (!header_seen) {
            if (line.rfind("channel,t_ps", 0) != 0)
                throw IoError("tag CSV missing channel,t_ps header: " + path);
            header_seen = true;
            continue;
        }
        unsigned ch;
        long long t;
        if (std::sscanf(line.c_str(), "%u,%lld", &ch, &t) != 2 || ch > 255)
            throw IoError("malformed tag CSV row: " + line);
        s.tags.push_back({static_cast<std::int64_t>(t), static_cast<std::uint8_t>(ch)});
    }
    if (!header_seen) throw IoError("tag CSV missing channel,t_ps header: " + path);
    return s;
}

}  // namespace

void write_tags(const std::string& path, const TagStream& stream, TagFormat format) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    if (format == TagFormat::Binary)
        write_binary(os, stream);
    else
        write_csv(os, stream);
    if (!os) throw IoError("write failed: " + path);
}

TagStream read_tags(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open tag file: " + path);
    std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    if (bytes.size() >= 4 && std::memcmp(bytes.data(), kMagic, 4) == 0)
        return read_binary(bytes, path);
    if (bytes.rfind("# meta", 0) == 0 || bytes.rfind("channel,t_ps", 0) == 0)
        return read_csv(bytes, path);
    throw IoError("unrecognized tag file format (bad magic): " + path);
}

}  // namespace collapsim::tags
