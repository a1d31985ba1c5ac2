// Scenario files describe a complete lab run as data: the host fixture, implant
// parameter overrides, scripted geo-provider behavior, and the controller
// command script. Running one produces the event log, the packet transcript and
// the raw frame capture, all deterministic functions of (scenario, seed).

#pragma once

#include "bqlab/c2.hpp"
#include "bqlab/ioc.hpp"

#include <json.hpp>

namespace bqlab::scenario {

struct GeoBehavior {
    bool fail = true;
    std::string document;
};

struct Scenario {
    std::string name = "unnamed";
    std::uint64_t seed = 1;
    codec::CompressionLevel level = codec::CompressionLevel::L1;
    bool userClicksLure = true;
    bool includeInfectionChain = true;

    // host fixture
    host::VirtualHost hostFixture;

    implant::ImplantConfig implantConfig;
    std::map<std::string, GeoBehavior> geoBehavior; // keyed by provider name
    std::vector<c2::ScriptStep> script;
};

struct ScenarioResult {
    std::vector<host::HostEvent> events;
    std::string eventsJsonl;
    std::string transcriptJsonl;
    Bytes capture;
};

namespace detail {

using nlohmann::json;

inline wire::Packet buildCommand(const json& j) {
    const std::string name = j.at("command").get<std::string>();
    auto text = [&](const char* key) { return j.value(key, std::string{}); };

    if (name == "Reconnect") return wire::Reconnect{};
    if (name == "Disconnect") return wire::Disconnect{};
    if (name == "UninstallPersistence") return wire::UninstallPersistence{};
    if (name == "GetStartupItems") return wire::GetStartupItems{};
    if (name == "AddStartupItem") return wire::AddStartupItem{text("path"), text("keyName")};
    if (name == "RemoveStartupItem") return wire::RemoveStartupItem{text("keyName")};
    if (name == "ExfilMonitorSettings") return wire::ExfilMonitorSettings{};
    if (name == "ExfilProcesses") return wire::ExfilProcesses{};
    if (name == "ExfilDrives") return wire::ExfilDrives{};
    if (name == "KillProcess") return wire::KillProcess{j.at("pid").get<std::uint32_t>()};
    if (name == "StartProcess") return wire::StartProcess{text("path"), text("args")};
    if (name == "ExfilAssetInfo") return wire::ExfilAssetInfo{};
    if (name == "InputDeviceAction")
        return wire::InputDeviceAction{text("kind"), toBytes(text("payload"))};
    if (name == "ShowMessageBox") return wire::ShowMessageBox{text("text")};
    if (name == "ShowMfaForm") return wire::ShowMfaForm{text("bankCode")};
    if (name == "ShowQrForm") return wire::ShowQrForm{text("bankCode")};
    if (name == "RfidCommand")
        return wire::RfidCommand{j.at("code").get<std::int32_t>(), text("argument")};
    if (name == "ShellCommand") return wire::ShellCommand{text("commandLine")};
    if (name == "RenamePath") return wire::RenamePath{text("from"), text("to")};
    if (name == "Shutdown") return wire::Shutdown{};
    if (name == "Reboot") return wire::Reboot{};
    if (name == "CancelDownloads") return wire::CancelDownloads{};
    if (name == "ConnectReverseProxy")
        return wire::ConnectReverseProxy{text("host"), j.value("port", std::uint16_t{443})};
    if (name == "RequestLogs") return wire::RequestLogs{};
    if (name == "RequestCredentials") return wire::RequestCredentials{};
    throw LabError("scenario script names unknown command: " + name);
}

inline void loadHostFixture(host::VirtualHost& h, const json& j) {
    h.machineName = j.value("machineName", h.machineName);
    h.userName = j.value("userName", h.userName);
    h.osVersion = j.value("osVersion", h.osVersion);
    h.x64 = j.value("x64", h.x64);
    h.baseDateTime = j.value("baseDateTime", h.baseDateTime);

    for (const auto& s : j.value("software", json::array()))
        h.installedSoftware.insert(s.get<std::string>());
    for (const auto& m : j.value("heldMutexes", json::array()))
        h.mutexes.insert(m.get<std::string>());
    for (const auto& f : j.value("files", json::array())) {
        Bytes contents = f.contains("base64")
                             ? base64::decode(f.at("base64").get<std::string>())
                             : toBytes(f.value("text", std::string{}));
        h.fsPreload(f.at("path").get<std::string>(), std::move(contents),
                    f.value("hidden", false));
    }
    for (const auto& p : j.value("processes", json::array()))
        h.procPreload({p.at("pid").get<std::uint32_t>(), p.at("image").get<std::string>(),
                       p.value("commandLine", std::string{}),
                       p.value("parentImage", std::string{})});
    for (const auto& d : j.value("drives", json::array()))
        h.drives.push_back({d.value("letter", "C:"), d.value("label", ""),
                            d.value("capacityBytes", std::uint64_t{0})});
    for (const auto& c : j.value("credentials", json::array()))
        h.credentialFixtures.push_back({c.value("source", ""), c.value("username", ""),
                                        c.value("secret", "")});
    for (const auto& c : j.value("contacts", json::array()))
        h.contactFixtures.push_back(c.get<std::string>());
    const json shellOutputs = j.value("shellOutputs", json::object());
    for (const auto& [cmd, outp] : shellOutputs.items())
        h.shellOutputs[cmd] = outp.get<std::string>();
    const json cursorValues = j.value("cursorValues", json::object());
    for (const auto& [name, file] : cursorValues.items())
        h.regPreload("HKEY_CURRENT_USER", implant::kCursorKeyPath, name,
                     file.get<std::string>());
}

inline void loadImplantConfig(implant::ImplantConfig& cfg, const json& j) {
    cfg.version = j.value("version", cfg.version);
    if (j.contains("password")) cfg.password.text = j.at("password").get<std::string>();
    if (j.contains("encryptionKey"))
        cfg.encryptionKey.text = j.at("encryptionKey").get<std::string>();
    cfg.installName = j.value("installName", cfg.installName);
    cfg.mutexName = j.value("mutexName", cfg.mutexName);
    cfg.startupKey = j.value("startupKey", cfg.startupKey);
    cfg.hideFile = j.value("hideFile", cfg.hideFile);
    cfg.enableLogger = j.value("enableLogger", cfg.enableLogger);
    cfg.reconnectDelayMs = j.value("reconnectDelayMs", cfg.reconnectDelayMs);
    if (cfg.reconnectDelayMs == 0) throw LabError("reconnectDelayMs must be positive");
    cfg.maxBlock = j.value("maxBlock", cfg.maxBlock);
    if (cfg.maxBlock == 0) throw LabError("maxBlock must be positive");
    cfg.installPath = j.value("installPath", cfg.installPath);
    if (j.contains("hosts")) {
        cfg.hosts.clear();
        for (const auto& hj : j.at("hosts"))
            cfg.hosts.emplace_back(hj.at("host").get<std::string>(),
                                   hj.value("port", std::uint16_t{443}));
        if (cfg.hosts.empty()) throw LabError("implant host list must not be empty");
    }
}

} // namespace detail

/// Parses the scenario document; throws on structural errors.
inline Scenario parseScenario(std::string_view text) {
    using nlohmann::json;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw LabError(std::string("scenario is not valid JSON: ") + e.what());
    }
    try {
        Scenario sc;
        sc.name = j.value("name", sc.name);
        if (!j.contains("seed")) throw LabError("scenario must pin a seed");
        sc.seed = j.at("seed").get<std::uint64_t>();
        const int level = j.value("compressionLevel", 1);
        if (level != 1 && level != 3)
            throw LabError("compressionLevel must be 1 or 3");
        sc.level = level == 1 ? codec::CompressionLevel::L1 : codec::CompressionLevel::L3;
        sc.userClicksLure = j.value("userClicksLure", true);
        sc.includeInfectionChain = j.value("includeInfectionChain", true);

        if (j.contains("host")) detail::loadHostFixture(sc.hostFixture, j.at("host"));
        if (j.contains("implant")) detail::loadImplantConfig(sc.implantConfig, j.at("implant"));

        const nlohmann::json geoJson = j.value("geo", nlohmann::json::object());
        for (const auto& [provider, behavior] : geoJson.items()) {
            GeoBehavior gb;
            if (behavior.is_object() && behavior.contains("document")) {
                gb.fail = false;
                gb.document = behavior.at("document").dump();
                if (behavior.at("document").is_string())
                    gb.document = behavior.at("document").get<std::string>();
            }
            sc.geoBehavior[provider] = gb;
        }

        for (const auto& stepJson : j.value("script", nlohmann::json::array())) {
            c2::ScriptStep step;
            step.clockStepMs = stepJson.value("clockStepMs", std::uint64_t{0});
            if (stepJson.contains("keystrokes"))
                step.keystrokes = stepJson.at("keystrokes").get<std::string>();
            if (stepJson.contains("command")) step.command = detail::buildCommand(stepJson);
            sc.script.push_back(std::move(step));
        }
        return sc;
    } catch (const nlohmann::json::exception& e) {
        throw LabError(std::string("scenario field error: ") + e.what());
    }
}

/// Default geo behavior when a scenario says nothing: Telize answers with the
/// campaign's primary target country.
inline std::map<std::string, GeoBehavior> defaultGeoBehavior() {
    return {{"telize",
             {false, R"({"ip":"191.17.74.12","country":"Brazil","country_code":"BR"})"}}};
}

inline geoip::Transport makeTransport(std::map<std::string, GeoBehavior> behavior) {
    return [behavior = std::move(behavior)](
               const geoip::Provider& provider) -> std::optional<std::string> {
        auto it = behavior.find(provider.name);
        if (it == behavior.end() || it->second.fail) return std::nullopt;
        return it->second.document;
    };
}

/// The delivery chain the campaign used, replayed as host events: msiexec runs
/// the downloaded installer, the loader and archive come from the drop server,
/// and the side-loaded library ends up in the host process.
inline void emitInfectionChain(host::VirtualHost& h, const implant::ImplantSim& sim) {
    const std::string downloads = R"(C:\Users\)" + h.userName + R"(\Downloads)";
    h.procSpawn(R"(C:\Windows\System32\msiexec.exe)",
                "msiexec /i \"" + downloads + R"(\67dee1.msi")",
                R"(C:\Program Files\Microsoft Office\root\Office16\OUTLOOK.EXE)");
    for (const char* artifact : {"Rar.exe", "xxwewe33.rar"}) {
        h.pushEvent(host::events::kNetworkConnect,
                    {{"DestinationHostname", "15.228.186.93"}, {"Details", "80"}});
        h.fsWrite(downloads + "\\" + artifact, toBytes(artifact));
    }
    h.fsWrite(sim.hostProcessImage(), toBytes("loader-image"));
    h.fsWrite(sim.modulePath(), toBytes("module-image"));
    const std::uint32_t pid =
        h.procSpawn(sim.hostProcessImage(), sim.hostProcessImage(),
                    R"(C:\Windows\System32\msiexec.exe)");
    h.pushEvent(host::events::kImageLoaded,
                {{"Image", sim.hostProcessImage()},
                 {"ImageLoaded", sim.modulePath()},
                 {"ParentImage", sim.hostProcessImage()},
                 {"ProcessId", std::to_string(pid)}});
}

inline nlohmann::json packetSummary(const wire::Packet& p) {
    using nlohmann::json;
    json s = json::object();
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, wire::AddStartupItem>) {
                s["path"] = v.path;
                s["keyName"] = v.keyName;
            } else if constexpr (std::is_same_v<T, wire::RemoveStartupItem>) {
                s["keyName"] = v.keyName;
            } else if constexpr (std::is_same_v<T, wire::KillProcess>) {
                s["pid"] = v.pid;
            } else if constexpr (std::is_same_v<T, wire::StartProcess>) {
                s["path"] = v.path;
            } else if constexpr (std::is_same_v<T, wire::ShowMessageBox>) {
                s["text"] = v.text;
            } else if constexpr (std::is_same_v<T, wire::ShowMfaForm> ||
                                 std::is_same_v<T, wire::ShowQrForm>) {
                s["bankCode"] = v.bankCode;
            } else if constexpr (std::is_same_v<T, wire::RfidCommand>) {
                s["code"] = v.code;
            } else if constexpr (std::is_same_v<T, wire::ShellCommand>) {
                s["commandLine"] = v.commandLine;
            } else if constexpr (std::is_same_v<T, wire::RenamePath>) {
                s["from"] = v.from;
                s["to"] = v.to;
            } else if constexpr (std::is_same_v<T, wire::ConnectReverseProxy>) {
                s["host"] = v.host;
                s["port"] = v.port;
            } else if constexpr (std::is_same_v<T, wire::BasicAssetInfo>) {
                s["machineName"] = v.machineName;
                s["pluginCodes"] = v.pluginCodes;
            } else if constexpr (std::is_same_v<T, wire::ProcessList>) {
                s["count"] = v.entries.size();
            } else if constexpr (std::is_same_v<T, wire::DriveList>) {
                s["count"] = v.entries.size();
            } else if constexpr (std::is_same_v<T, wire::StartupItems>) {
                s["count"] = v.entries.size();
            } else if constexpr (std::is_same_v<T, wire::KeylogData>) {
                s["chars"] = v.text.size();
            } else if constexpr (std::is_same_v<T, wire::CredentialDump>) {
                s["count"] = v.entries.size();
            } else if constexpr (std::is_same_v<T, wire::FileBlockMsg>) {
                s["filename"] = v.block.filename;
                s["index"] = v.block.index;
                s["payloadBytes"] = v.block.payload.size();
                s["totalLength"] = v.block.totalLength;
            } else if constexpr (std::is_same_v<T, wire::Ack>) {
                s["refTag"] = v.refTag;
            } else if constexpr (std::is_same_v<T, wire::ErrorReport>) {
                s["text"] = v.text;
            } else if constexpr (std::is_same_v<T, wire::GeoReport>) {
                s["country"] = v.geo.country;
            }
        },
        p);
    return s;
}

inline std::string transcriptJsonl(const std::vector<c2::TranscriptEntry>& transcript) {
    std::string out;
    for (const auto& entry : transcript) {
        nlohmann::json line;
        line["dir"] =
            entry.direction == c2::Direction::ToImplant ? "c2->implant" : "implant->c2";
        line["tag"] = wire::tagOf(entry.packet);
        line["name"] = wire::nameOf(entry.packet);
        line["summary"] = packetSummary(entry.packet);
        out += line.dump();
        out += '\n';
    }
    return out;
}

/// Runs the scenario end to end and returns the three artifacts.
inline ScenarioResult run(const Scenario& sc) {
    host::VirtualHost h = sc.hostFixture;
    Rng rng(sc.seed);

    auto geo = sc.geoBehavior.empty() ? defaultGeoBehavior() : sc.geoBehavior;
    implant::ImplantSim sim(h, sc.implantConfig, makeTransport(std::move(geo)));

    if (sc.includeInfectionChain) emitInfectionChain(h, sim);

    c2::C2Session session("session-" + sc.name, codec::deriveKey(sc.implantConfig.encryptionKey),
                          sc.level);
    auto artifacts = c2::runSession(session, sim, h, sc.script, rng, sc.userClicksLure);

    ScenarioResult result;
    result.events = h.events();
    result.eventsJsonl = h.exportEvents();
    result.transcriptJsonl = transcriptJsonl(session.transcript());
    result.capture = std::move(artifacts.capture);
    return result;
}

} // namespace bqlab::scenario
