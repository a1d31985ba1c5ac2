// Rule parsing, evaluation semantics (including the log-scoped condition of the
// network-chain rule), built-in/shipped-file identity, and IoC matching.

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "bqlab/ioc.hpp"
#include "bqlab/sigma.hpp"

using namespace bqlab;
using sigma::SigmaRule;
namespace ev = host::events;

namespace {

host::HostEvent event(int id, std::map<std::string, std::string> fields) {
    return {0, id, std::move(fields)};
}

// repo root for the shipped rule files: env override first, then upward probing
std::filesystem::path repoRoot() {
    if (const char* env = std::getenv("BQLAB_SOURCE_DIR")) return env;
    auto dir = std::filesystem::current_path();
    for (int i = 0; i < 5; ++i) {
        if (std::filesystem::exists(dir / "rules")) return dir;
        dir = dir.parent_path();
    }
    return std::filesystem::current_path();
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

} // namespace

TEST_CASE("all four built-in rules parse") {
    const auto rules = sigma::builtinRules();
    REQUIRE(rules.size() == 4);

    std::set<std::string> ids;
    for (const auto& r : rules) {
        ids.insert(r.id);
        CHECK_FALSE(r.title.empty());
        CHECK_FALSE(r.selections.empty());
    }
    CHECK(ids.size() == 4);

    // the network rule models four selections joined by and
    const auto& network = rules[3];
    CHECK(network.selections.size() == 4);
    CHECK(network.conditionText ==
          "selection_drop and selection_geoip_telize and selection_geoip_freegeoip and "
          "selection_geoip_ipify");
}

TEST_CASE("shipped rule files are byte-identical to the built-ins") {
    const auto root = repoRoot();
    for (const auto& [filename, text] : sigma::builtinRuleTexts()) {
        const auto path = root / "rules" / filename;
        CAPTURE(path.string());
        CHECK(slurp(path) == text);
        CHECK(sigma::parseRule(slurp(path)) == sigma::parseRule(text));
    }
}

TEST_CASE("msi rule fires on the documented event") {
    const auto rules = sigma::builtinRules();
    const auto& msi = rules[1];

    const auto hit = event(1, {{"Image", "C:\\Windows\\System32\\msiexec.exe"},
                               {"CommandLine", "msiexec /i C:\\Users\\v\\Downloads\\67dee1.msi"}});
    CHECK(sigma::evalRule(msi, hit));

    // wrong binary, wrong argument, wrong event id
    CHECK_FALSE(sigma::evalRule(
        msi, event(1, {{"Image", "C:\\setup.exe"}, {"CommandLine", "67dee1.msi"}})));
    CHECK_FALSE(sigma::evalRule(
        msi, event(1, {{"Image", "C:\\Windows\\System32\\msiexec.exe"},
                       {"CommandLine", "msiexec /i other.msi"}})));
    CHECK_FALSE(sigma::evalRule(
        msi, event(7, {{"Image", "C:\\Windows\\System32\\msiexec.exe"},
                       {"CommandLine", "67dee1.msi"}})));
}

TEST_CASE("side-load rule fires on the documented image-load pair") {
    const auto rules = sigma::builtinRules();
    const auto& sideload = rules[2];

    CHECK(sigma::evalRule(
        sideload, event(7, {{"ImageLoaded", "C:\\Users\\v\\Downloads\\xxwewe33\\vstdlib_s64.dll"},
                            {"ParentImage", "C:\\Users\\v\\Downloads\\xxwewe33\\EIUWI383IE.exe"}})));
    // matching is case-insensitive
    CHECK(sigma::evalRule(
        sideload, event(7, {{"ImageLoaded", "c:\\x\\VSTDLIB_S64.DLL"},
                            {"ParentImage", "c:\\x\\eiuwi383ie.exe"}})));
    CHECK_FALSE(sigma::evalRule(
        sideload, event(7, {{"ImageLoaded", "c:\\x\\vstdlib_s64.dll"},
                            {"ParentImage", "c:\\x\\legit.exe"}})));
}

TEST_CASE("anydesk rule needs every command fragment") {
    const auto rules = sigma::builtinRules();
    const auto& anydesk = rules[0];
    const std::string full =
        "powershell -c set ad.anynet.pwd_hash=AA ad.anynet.pwd_salt=BB "
        "ad.anynet.token_salt=CC; taskkill /IM anydesk.exe /F";
    CHECK(sigma::evalRule(anydesk, event(1, {{"Image", "C:\\W\\powershell.exe"},
                                             {"CommandLine", full}})));
    CHECK_FALSE(sigma::evalRule(
        anydesk, event(1, {{"Image", "C:\\W\\powershell.exe"},
                           {"CommandLine", "set ad.anynet.pwd_hash=AA"}})));
    CHECK_FALSE(sigma::evalRule(anydesk, event(1, {{"Image", "C:\\W\\cmd.exe"},
                                                   {"CommandLine", full}})));
}

TEST_CASE("network rule condition over a log: truth-table oracle") {
    const auto rules = sigma::builtinRules();
    const std::vector<SigmaRule> networkOnly = {rules[3]};

    const host::HostEvent drop =
        event(ev::kNetworkConnect, {{"DestinationHostname", "notificacao.noticiasnovidads.xyz"}});
    const host::HostEvent telize =
        event(ev::kNetworkConnect, {{"DestinationHostname", "www.telize.com"}});
    const host::HostEvent freegeoip =
        event(ev::kNetworkConnect, {{"DestinationHostname", "freegeoip.net"}});
    const host::HostEvent ipify =
        event(ev::kNetworkConnect, {{"DestinationHostname", "api.ipify.org"}});
    const std::array<host::HostEvent, 4> pool = {drop, telize, freegeoip, ipify};

    // enumerate all 16 presence subsets; the rule may fire only for the full one
    for (unsigned mask = 0; mask < 16; ++mask) {
        std::vector<host::HostEvent> log = {
            event(ev::kNetworkConnect, {{"DestinationHostname", "example.com"}})};
        for (unsigned bit = 0; bit < 4; ++bit)
            if (mask & (1u << bit)) log.push_back(pool[bit]);

        const bool expected = mask == 15; // oracle: and-chain needs all four groups
        const auto hits = sigma::scan(networkOnly, log);
        CAPTURE(mask);
        CHECK(hits.size() == (expected ? 1u : 0u));
        if (expected) {
            REQUIRE(hits.size() == 1);
            CHECK(hits[0].eventIndexes == std::vector<std::size_t>{1, 2, 3, 4});
        }
    }

    SUBCASE("hits are invariant under event permutation") {
        std::vector<host::HostEvent> log = {ipify, drop, freegeoip, telize};
        CHECK(sigma::scan(networkOnly, log).size() == 1);
    }
}

TEST_CASE("parser rejections") {
    CHECK_THROWS_AS(sigma::parseRule(""), MalformedDocument);
    CHECK_THROWS_AS(sigma::parseRule("title: no detection here\n"), MalformedDocument);

    const char* unknownModifier =
        "title: x\n"
        "id: y\n"
        "detection:\n"
        "  selection:\n"
        "    Image|re: '.*'\n"
        "  condition: selection\n";
    CHECK_THROWS_AS(sigma::parseRule(unknownModifier), UnsupportedConstruct);

    const char* unknownName =
        "title: x\n"
        "id: y\n"
        "detection:\n"
        "  selection:\n"
        "    Image: 'a'\n"
        "  condition: selection and ghost\n";
    CHECK_THROWS_AS(sigma::parseRule(unknownName), MalformedDocument);

    const char* notConstruct =
        "title: x\n"
        "id: y\n"
        "detection:\n"
        "  selection:\n"
        "    Image: 'a'\n"
        "  condition: not selection\n";
    CHECK_THROWS_AS(sigma::parseRule(notConstruct), UnsupportedConstruct);

    const char* innerWildcard =
        "title: x\n"
        "id: y\n"
        "detection:\n"
        "  selection:\n"
        "    Image: 'a*b'\n"
        "  condition: selection\n";
    CHECK_THROWS_AS(sigma::parseRule(innerWildcard), UnsupportedConstruct);
}

TEST_CASE("parse/print round-trip over the supported subset") {
    for (const auto& rule : sigma::builtinRules()) {
        const std::string printed = sigma::printRule(rule);
        CHECK(sigma::parseRule(printed) == rule);
    }
}

TEST_CASE("condition grammar handles parentheses and precedence") {
    const char* doc =
        "title: grouping\n"
        "id: g1\n"
        "detection:\n"
        "  a:\n"
        "    F: 'x'\n"
        "  b:\n"
        "    F: 'y'\n"
        "  c:\n"
        "    F: 'z'\n"
        "  condition: a and (b or c)\n";
    const auto rule = sigma::parseRule(doc);

    CHECK(sigma::evalRule(rule, event(1, {{"F", "x"}})) == false);
    // log-scoped: one event gives a, another gives c
    const std::vector<host::HostEvent> log = {event(1, {{"F", "x"}}), event(1, {{"F", "z"}})};
    CHECK(sigma::scan({rule}, log).size() == 1);
    const std::vector<host::HostEvent> onlyBC = {event(1, {{"F", "y"}}), event(1, {{"F", "z"}})};
    CHECK(sigma::scan({rule}, onlyBC).empty());
}

TEST_CASE("ioc normalization and matching") {
    ioc::IocSet iocs = ioc::defaultIocs();

    SUBCASE("normalization strips defanging brackets and case") {
        CHECK(ioc::normalizeIndicator("15.228.186[.]93") == "15.228.186.93");
        CHECK(ioc::normalizeIndicator("  MERCANTOKIKO[.]XYZ ") == "mercantokiko.xyz");
    }

    SUBCASE("event fields match ips, domains and filenames") {
        std::vector<host::HostEvent> log = {
            event(ev::kNetworkConnect, {{"DestinationHostname", "15.228.186.93"}}),
            event(ev::kNetworkConnect, {{"DestinationHostname", "example.com"}}),
            event(ev::kFileWrite, {{"TargetObject", "C:\\Users\\v\\Downloads\\Rar.exe"}}),
        };
        const auto hits = ioc::matchIocs(iocs, log);
        REQUIRE(hits.size() == 2);
        CHECK(hits[0].category == "ip");
        CHECK(hits[0].artifactIndex == 0);
        CHECK(hits[1].category == "filename");
        CHECK(hits[1].indicator == "rar.exe");
    }

    SUBCASE("defanged ioc file entries still match") {
        ioc::IocSet fromFile;
        fromFile.addDocument("ip:15.228.186[.]93\n# comment\ndomain:telize[.]com\n");
        std::vector<host::HostEvent> log = {
            event(ev::kNetworkConnect, {{"DestinationHostname", "15.228.186.93"}}),
            event(ev::kNetworkConnect, {{"DestinationHostname", "telize.com"}}),
        };
        CHECK(ioc::matchIocs(fromFile, log).size() == 2);
    }

    SUBCASE("untyped lines classify by shape") {
        ioc::IocSet set;
        set.addDocument("15.228.186.93\nnoticiasnovidads.xyz\nfile:67dee1.msi\n");
        CHECK(set.ips.count("15.228.186.93") == 1);
        CHECK(set.domains.count("noticiasnovidads.xyz") == 1);
        CHECK(set.filenames.count("67dee1.msi") == 1);
    }

    SUBCASE("packet-route matching") {
        std::vector<wire::Packet> packets = {
            wire::Packet{wire::ConnectReverseProxy{"varjolatijolos[.]space", 443}},
            wire::Packet{wire::FileBlockMsg{{"xxwewe33.rar", {}, 0, std::nullopt, 0}}},
            wire::Packet{wire::StartProcess{"C:\\clean\\tool.exe", ""}},
        };
        const auto hits = ioc::matchIocs(iocs, packets);
        REQUIRE(hits.size() == 2);
        CHECK(hits[0].category == "domain");
        CHECK(hits[1].category == "filename");
    }
}
