// bqlab: operator entry point. Derives session keys from passphrases, decodes
// recorded frame captures back into packets and exfiltrated files, runs
// scenarios against the virtual host, and evaluates detection rules over the
// resulting event logs.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "bqlab/scenario.hpp"
#include "bqlab/sigma.hpp"

#include <CLI11.hpp>

namespace fs = std::filesystem;
using namespace bqlab;

namespace {

// exit codes shared with the test harness
constexpr int kExitBadKey = 2;
constexpr int kExitMalformedStream = 3;
constexpr int kExitUnknownTag = 4;
constexpr int kExitScenarioParse = 5;
constexpr int kExitRuleParse = 6;

std::string readFile(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LabError("cannot open " + path.string());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void writeFile(const fs::path& path, ByteView data) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw LabError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
}

void writeFile(const fs::path& path, const std::string& text) {
    writeFile(path, ByteView{reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

codec::SessionKey keyFromArg(const std::string& arg) {
    if (arg.size() == 64 && arg.find_first_not_of("0123456789abcdefABCDEF") == std::string::npos) {
        codec::SessionKey key;
        const Bytes raw = fromHex(arg);
        std::copy(raw.begin(), raw.end(), key.bytes.begin());
        return key;
    }
    return codec::deriveKey({arg});
}

std::string sanitizeFilename(const std::string& name) {
    std::string out;
    for (char c : name) out += (c == '\\' || c == '/' || c == ':') ? '_' : c;
    return out.empty() ? "unnamed" : out;
}

int cmdDecode(const std::string& captureFile, const std::string& keyArg,
              const std::string& outDir) {
    const std::string raw = readFile(captureFile);
    const ByteView capture{reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size()};
    const codec::SessionKey key = keyFromArg(keyArg);

    int exitCode = 0;
    auto noteError = [&](int code) {
        if (exitCode == 0) exitCode = code;
    };

    std::map<std::string, wire::BlockTransfer> transfers;
    std::size_t offset = 0;
    std::size_t index = 0;
    while (offset < capture.size()) {
        wire::Frame frame;
        try {
            frame = wire::readFrame(capture, offset);
        } catch (const FrameLengthMismatch& e) {
            std::cout << "frame " << index << ": " << e.what() << "\n";
            noteError(kExitMalformedStream);
            break; // cannot resynchronize after a bad length prefix
        }
        try {
            const wire::Packet packet = wire::decodeMessage(frame, key);
            nlohmann::json line;
            line["frame"] = index;
            line["tag"] = wire::tagOf(packet);
            line["name"] = wire::nameOf(packet);
            line["summary"] = scenario::packetSummary(packet);
            std::cout << line.dump() << "\n";
            if (const auto* blockMsg = std::get_if<wire::FileBlockMsg>(&packet))
                transfers[blockMsg->block.filename].ingest(blockMsg->block);
        } catch (const BadPadding& e) {
            std::cout << "frame " << index << ": " << e.what() << "\n";
            noteError(kExitBadKey);
        } catch (const BadLength& e) {
            std::cout << "frame " << index << ": " << e.what() << "\n";
            noteError(kExitBadKey);
        } catch (const UnknownTag& e) {
            std::cout << "frame " << index << ": " << e.what() << "\n";
            noteError(kExitUnknownTag);
        } catch (const LabError& e) { // MalformedStream, UnsupportedLevel, truncation
            std::cout << "frame " << index << ": " << e.what() << "\n";
            noteError(kExitMalformedStream);
        }
        ++index;
    }

    for (const auto& [name, transfer] : transfers) {
        if (!transfer.complete()) {
            std::cout << "transfer " << name << ": incomplete\n";
            continue;
        }
        auto [filename, contents] = wire::reassemble(transfer);
        const fs::path target = fs::path(outDir) / sanitizeFilename(filename);
        writeFile(target, ByteView{contents.data(), contents.size()});
        std::cout << "wrote " << target.string() << " (" << contents.size() << " bytes)\n";
    }
    return exitCode;
}

int cmdSimulate(const std::string& scenarioFile, const std::string& outDir) {
    scenario::Scenario sc;
    try {
        sc = scenario::parseScenario(readFile(scenarioFile));
    } catch (const LabError& e) {
        std::cerr << "scenario error: " << e.what() << "\n";
        return kExitScenarioParse;
    }
    if (const char* seedOverride = std::getenv("LAB_SEED"))
        sc.seed = std::strtoull(seedOverride, nullptr, 10);

    const auto result = scenario::run(sc);
    writeFile(fs::path(outDir) / "events.jsonl", result.eventsJsonl);
    writeFile(fs::path(outDir) / "transcript.jsonl", result.transcriptJsonl);
    writeFile(fs::path(outDir) / "capture.bin",
              ByteView{result.capture.data(), result.capture.size()});
    std::cout << "scenario " << sc.name << ": " << result.events.size() << " events, "
              << result.capture.size() << " capture bytes -> " << outDir << "\n";
    return 0;
}

int cmdDetect(const std::string& logFile, const std::string& rulesDir,
              const std::string& iocsFile, const std::string& outFile) {
    std::vector<sigma::SigmaRule> rules;
    if (rulesDir.empty()) {
        rules = sigma::builtinRules();
    } else {
        std::vector<fs::path> paths;
        for (const auto& entry : fs::directory_iterator(rulesDir))
            if (entry.is_regular_file() && entry.path().extension() == ".yml")
                paths.push_back(entry.path());
        std::sort(paths.begin(), paths.end());
        for (const auto& path : paths) {
            try {
                rules.push_back(sigma::parseRule(readFile(path)));
            } catch (const LabError& e) {
                std::cerr << "rule " << path.string() << ": " << e.what() << "\n";
                return kExitRuleParse;
            }
        }
    }

    const auto events = host::VirtualHost::parseEvents(readFile(logFile));
    std::string report;

    for (const auto& hit : sigma::scan(rules, events)) {
        nlohmann::json line;
        line["kind"] = "sigma";
        line["ruleId"] = hit.ruleId;
        line["ruleTitle"] = hit.ruleTitle;
        line["level"] = hit.level;
        line["eventIndexes"] = hit.eventIndexes;
        report += line.dump();
        report += '\n';
    }

    ioc::IocSet iocs;
    if (!iocsFile.empty()) iocs.addDocument(readFile(iocsFile));
    if (!iocs.empty()) {
        for (const auto& hit : ioc::matchIocs(iocs, events)) {
            nlohmann::json line;
            line["kind"] = "ioc";
            line["category"] = hit.category;
            line["indicator"] = hit.indicator;
            line["eventIndex"] = hit.artifactIndex;
            line["field"] = hit.field;
            report += line.dump();
            report += '\n';
        }
    }

    std::cout << report;
    if (!outFile.empty()) writeFile(fs::path(outFile), report);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"BlotchyQuasar protocol laboratory"};
    app.require_subcommand(1);

    std::string passphrase;
    auto* deriveCmd = app.add_subcommand("derive-key", "print the 32-byte session key for a passphrase");
    deriveCmd->add_option("passphrase", passphrase, "passphrase to hash")->required();

    std::string captureFile, keyArg, decodeOut;
    auto* decodeCmd = app.add_subcommand("decode", "decode a recorded frame capture");
    decodeCmd->add_option("--capture", captureFile, "capture file (frame sequence)")->required();
    decodeCmd->add_option("--key", keyArg, "64-digit hex key or passphrase")->required();
    decodeCmd->add_option("--out", decodeOut, "directory for reassembled files")->required();

    std::string scenarioFile, simOut;
    auto* simulateCmd = app.add_subcommand("simulate", "run a scenario against the virtual host");
    simulateCmd->add_option("--scenario", scenarioFile, "scenario document")->required();
    simulateCmd->add_option("--out", simOut, "output directory")->required();

    std::string logFile, rulesDir, iocsFile, detectOut;
    auto* detectCmd = app.add_subcommand("detect", "evaluate detection rules over an event log");
    detectCmd->add_option("--log", logFile, "event log (one JSON object per line)")->required();
    detectCmd->add_option("--rules", rulesDir, "rule directory (defaults to built-ins)");
    detectCmd->add_option("--iocs", iocsFile, "indicator list to match");
    detectCmd->add_option("--out", detectOut, "report file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (deriveCmd->parsed()) {
            std::cout << codec::deriveKey({passphrase}).hex() << "\n";
            return 0;
        }
        if (decodeCmd->parsed()) return cmdDecode(captureFile, keyArg, decodeOut);
        if (simulateCmd->parsed()) return cmdSimulate(scenarioFile, simOut);
        if (detectCmd->parsed()) return cmdDetect(logFile, rulesDir, iocsFile, detectOut);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
