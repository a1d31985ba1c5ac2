// In-memory model of the victim machine: files, registry, process table, clock
// and an append-only event log. Field names follow the Sysmon vocabulary the
// detection rules match on; nothing here touches the real OS.
//
// Event ids: 1 process create and 7 image loaded follow Sysmon; ids from 100 up
// are lab-defined. The full field vocabulary is documented in docs/formats.md.

#pragma once

#include <cctype>
#include <cstdio>
#include <map>
#include <set>

#include "bqlab/base64.hpp"
#include "bqlab/bytes.hpp"
#include "bqlab/packet.hpp"

#include <json.hpp>

namespace bqlab::host {

namespace events {
inline constexpr int kProcessCreate = 1;
inline constexpr int kImageLoaded = 7;
inline constexpr int kRegistrySet = 100;
inline constexpr int kRegistryDelete = 101;
inline constexpr int kFileWrite = 102;
inline constexpr int kFileDelete = 103;
inline constexpr int kProcessKill = 104;
inline constexpr int kMessageBox = 105;
inline constexpr int kNetworkConnect = 106;
inline constexpr int kFormShown = 107;
inline constexpr int kNotification = 108;
inline constexpr int kShutdown = 109;
inline constexpr int kReboot = 110;
inline constexpr int kInputAction = 111;
} // namespace events

struct HostEvent {
    std::uint64_t timestampMs = 0;
    int eventId = 0;
    std::map<std::string, std::string> fields;

    bool operator==(const HostEvent&) const = default;
};

using wire::ProcessEntry;

namespace detail {

inline std::string normalizePath(std::string_view path) {
    std::string out;
    out.reserve(path.size());
    for (char c : path) {
        if (c == '/') c = '\\';
        out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

// civil-date arithmetic so the virtual clock can cross midnight
inline std::int64_t daysFromCivil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline void civilFromDays(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yy + (m <= 2));
}

} // namespace detail

class VirtualHost {
public:
    struct FileEntry {
        std::string displayPath;
        Bytes contents;
        bool hidden = false;
    };

    struct RegValue {
        std::string displayPath; // hive\keyPath\valueName as given
        std::string data;
    };

    // machine identity defaults follow the recovered config.xml fixture
    std::string machineName = "DESKTOP-FBCFLB8";
    std::string userName = "kikoooioiooioi";
    std::string osVersion = "Windows 10 Pro 22H2";
    bool x64 = true;
    std::string baseDateTime = "2024-08-19 10:00:00";

    std::set<std::string> installedSoftware;
    std::set<std::string> mutexes;
    std::map<std::string, std::string> shellOutputs; // command line -> canned output
    std::vector<wire::DriveEntry> drives;
    std::vector<wire::CredentialEntry> credentialFixtures;
    std::vector<std::string> contactFixtures;
    std::vector<std::string> inputLog;

    // ---- clock ----

    std::uint64_t clockMs() const { return clockMs_; }

    void clockAdvance(std::uint64_t ms) { clockMs_ += ms; }

    /// "YYYY-MM-DD HH:MM:SS" at the current virtual clock.
    std::string currentDateTime() const {
        int y, mo, d, h, mi, s;
        if (std::sscanf(baseDateTime.c_str(), "%d-%d-%d %d:%d:%d", &y, &mo, &d, &h, &mi, &s) != 6)
            throw LabError("baseDateTime must be YYYY-MM-DD HH:MM:SS");
        std::int64_t secs = detail::daysFromCivil(y, mo, d) * 86400 + h * 3600 + mi * 60 + s +
                            static_cast<std::int64_t>(clockMs_ / 1000);
        std::int64_t days = secs / 86400;
        std::int64_t rem = secs % 86400;
        detail::civilFromDays(days, y, mo, d);
        char buf[32];
        std::snprintf(buf, sizeof buf, "%04d-%02d-%02d %02lld:%02lld:%02lld", y, mo, d,
                      static_cast<long long>(rem / 3600), static_cast<long long>(rem % 3600 / 60),
                      static_cast<long long>(rem % 60));
        return buf;
    }

    std::string currentDate() const { return currentDateTime().substr(0, 10); }

    // ---- well-known per-user directories ----

    std::string documentsDir() const { return R"(C:\Users\)" + userName + R"(\Documents)"; }
    std::string videosDir() const { return R"(C:\Users\)" + userName + R"(\Videos)"; }
    std::string tempDir() const { return R"(C:\Users\)" + userName + R"(\AppData\Local\Temp)"; }
    std::string roamingDir() const { return R"(C:\Users\)" + userName + R"(\AppData\Roaming)"; }

    // ---- filesystem ----

    void fsWrite(const std::string& path, Bytes contents, bool hidden = false) {
        auto& entry = files_[detail::normalizePath(path)];
        entry = FileEntry{path, std::move(contents), hidden};
        pushEvent(events::kFileWrite,
                  {{"TargetObject", path},
                   {"Contents", base64::encode(entry.contents)},
                   {"Hidden", hidden ? "true" : "false"},
                   {"User", userName}});
    }

    /// Seeds a file without an event; for pre-infection host fixtures.
    void fsPreload(const std::string& path, Bytes contents, bool hidden = false) {
        files_[detail::normalizePath(path)] = FileEntry{path, std::move(contents), hidden};
    }

    const Bytes& fsRead(const std::string& path) const {
        auto it = files_.find(detail::normalizePath(path));
        if (it == files_.end()) throw NotFound("no such file: " + path);
        return it->second.contents;
    }

    bool fsExists(const std::string& path) const {
        return files_.count(detail::normalizePath(path)) != 0;
    }

    bool fsHidden(const std::string& path) const {
        auto it = files_.find(detail::normalizePath(path));
        if (it == files_.end()) throw NotFound("no such file: " + path);
        return it->second.hidden;
    }

    void fsDelete(const std::string& path) {
        auto it = files_.find(detail::normalizePath(path));
        if (it == files_.end()) throw NotFound("no such file: " + path);
        const std::string display = it->second.displayPath;
        files_.erase(it);
        pushEvent(events::kFileDelete, {{"TargetObject", display}, {"User", userName}});
    }

    /// Display paths of files whose normalized path starts with the directory.
    std::vector<std::string> filesUnder(const std::string& dir) const {
        std::string prefix = detail::normalizePath(dir);
        if (!prefix.empty() && prefix.back() != '\\') prefix += '\\';
        std::vector<std::string> out;
        for (const auto& [key, entry] : files_)
            if (key.rfind(prefix, 0) == 0) out.push_back(entry.displayPath);
        return out;
    }

    const std::map<std::string, FileEntry>& files() const { return files_; }

    // ---- registry ----

    static std::string regPath(const std::string& hive, const std::string& keyPath,
                               const std::string& valueName) {
        return hive + "\\" + keyPath + "\\" + valueName;
    }

    void regSet(const std::string& hive, const std::string& keyPath,
                const std::string& valueName, const std::string& data) {
        const std::string display = regPath(hive, keyPath, valueName);
        registry_[detail::normalizePath(display)] = RegValue{display, data};
        pushEvent(events::kRegistrySet,
                  {{"TargetObject", display}, {"Details", data}, {"User", userName}});
    }

    /// Seeds a registry value without an event; for pre-infection host fixtures.
    void regPreload(const std::string& hive, const std::string& keyPath,
                    const std::string& valueName, const std::string& data) {
        const std::string display = regPath(hive, keyPath, valueName);
        registry_[detail::normalizePath(display)] = RegValue{display, data};
    }

    std::string regGet(const std::string& hive, const std::string& keyPath,
                       const std::string& valueName) const {
        auto it = registry_.find(detail::normalizePath(regPath(hive, keyPath, valueName)));
        if (it == registry_.end())
            throw NotFound("no such registry value: " + regPath(hive, keyPath, valueName));
        return it->second.data;
    }

    bool regExists(const std::string& hive, const std::string& keyPath,
                   const std::string& valueName) const {
        return registry_.count(detail::normalizePath(regPath(hive, keyPath, valueName))) != 0;
    }

    void regDelete(const std::string& hive, const std::string& keyPath,
                   const std::string& valueName) {
        auto it = registry_.find(detail::normalizePath(regPath(hive, keyPath, valueName)));
        if (it == registry_.end())
            throw NotFound("no such registry value: " + regPath(hive, keyPath, valueName));
        const std::string display = it->second.displayPath;
        registry_.erase(it);
        pushEvent(events::kRegistryDelete, {{"TargetObject", display}, {"User", userName}});
    }

    /// (valueName, data) pairs under hive\keyPath.
    std::vector<std::pair<std::string, std::string>> regValuesUnder(
        const std::string& hive, const std::string& keyPath) const {
        const std::string prefix = detail::normalizePath(hive + "\\" + keyPath + "\\");
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& [key, value] : registry_) {
            if (key.rfind(prefix, 0) != 0) continue;
            const std::string rest = key.substr(prefix.size());
            if (rest.find('\\') != std::string::npos) continue; // deeper subkey
            out.emplace_back(value.displayPath.substr(value.displayPath.size() - rest.size()),
                             value.data);
        }
        return out;
    }

    const std::map<std::string, RegValue>& registry() const { return registry_; }

    // ---- processes ----

    std::uint32_t procSpawn(const std::string& image, const std::string& commandLine,
                            const std::string& parentImage) {
        const std::uint32_t pid = nextPid_;
        nextPid_ += 4;
        processes_[pid] = ProcessEntry{pid, image, commandLine, parentImage};
        pushEvent(events::kProcessCreate,
                  {{"Image", image},
                   {"CommandLine", commandLine},
                   {"ParentImage", parentImage},
                   {"ProcessId", std::to_string(pid)},
                   {"User", userName}});
        return pid;
    }

    /// Registers a process without an event; for pre-infection host fixtures.
    void procPreload(const ProcessEntry& entry) {
        processes_[entry.pid] = entry;
        nextPid_ = std::max(nextPid_, entry.pid + 4);
    }

    void procKill(std::uint32_t pid) {
        auto it = processes_.find(pid);
        if (it == processes_.end()) throw NoSuchPid("no process with pid " + std::to_string(pid));
        const std::string image = it->second.image;
        processes_.erase(it);
        pushEvent(events::kProcessKill,
                  {{"Image", image}, {"ProcessId", std::to_string(pid)}, {"User", userName}});
    }

    /// Kills every process whose image basename equals imageName; returns the count.
    std::size_t procKillByName(const std::string& imageName) {
        const std::string wanted = detail::normalizePath(imageName);
        std::vector<std::uint32_t> doomed;
        for (const auto& [pid, entry] : processes_) {
            std::string base = detail::normalizePath(entry.image);
            if (auto slash = base.find_last_of('\\'); slash != std::string::npos)
                base = base.substr(slash + 1);
            if (base == wanted) doomed.push_back(pid);
        }
        for (auto pid : doomed) procKill(pid);
        return doomed.size();
    }

    std::vector<ProcessEntry> procList() const {
        std::vector<ProcessEntry> out;
        out.reserve(processes_.size());
        for (const auto& [pid, entry] : processes_) out.push_back(entry);
        return out;
    }

    const std::map<std::uint32_t, ProcessEntry>& processes() const { return processes_; }

    // ---- events ----

    void pushEvent(int eventId, std::map<std::string, std::string> fields) {
        events_.push_back(HostEvent{clockMs_, eventId, std::move(fields)});
    }

    const std::vector<HostEvent>& events() const { return events_; }

    /// One JSON object per line: {"ts":..., "eventId":..., "fields":{...}}.
    std::string exportEvents() const { return exportEvents(events_); }

    static std::string exportEvents(const std::vector<HostEvent>& events) {
        std::string out;
        for (const auto& ev : events) {
            nlohmann::json line;
            line["ts"] = ev.timestampMs;
            line["eventId"] = ev.eventId;
            line["fields"] = ev.fields;
            out += line.dump();
            out += '\n';
        }
        return out;
    }

    static std::vector<HostEvent> parseEvents(std::string_view text) {
        std::vector<HostEvent> out;
        std::size_t start = 0;
        while (start < text.size()) {
            std::size_t end = text.find('\n', start);
            if (end == std::string_view::npos) end = text.size();
            std::string_view line = text.substr(start, end - start);
            start = end + 1;
            if (line.empty()) continue;
            nlohmann::json j = nlohmann::json::parse(line);
            HostEvent ev;
            ev.timestampMs = j.at("ts").get<std::uint64_t>();
            ev.eventId = j.at("eventId").get<int>();
            for (const auto& [k, v] : j.at("fields").items())
                ev.fields[k] = v.get<std::string>();
            out.push_back(std::move(ev));
        }
        return out;
    }

private:
    std::map<std::string, FileEntry> files_;
    std::map<std::string, RegValue> registry_;
    std::map<std::uint32_t, ProcessEntry> processes_;
    std::vector<HostEvent> events_;
    std::uint64_t clockMs_ = 0;
    std::uint32_t nextPid_ = 1000;
};

} // namespace bqlab::host
