// Controller-side gate and reassembly, the scripted session loop, and the
// geolocation fallback chain.

#include <doctest.h>

#include "bqlab/c2.hpp"
#include "bqlab/scenario.hpp"

using namespace bqlab;
namespace ev = host::events;

namespace {

codec::SessionKey testKey() { return codec::deriveKey({"session key"}); }

geoip::Transport scripted(std::map<std::string, std::optional<std::string>> byProvider) {
    return [byProvider = std::move(byProvider)](
               const geoip::Provider& p) -> std::optional<std::string> {
        auto it = byProvider.find(p.name);
        return it == byProvider.end() ? std::nullopt : it->second;
    };
}

} // namespace

TEST_CASE("ingest enforces the authentication gate") {
    c2::C2Session session("s1", testKey());

    SUBCASE("non-asset-info first packet is a protocol violation") {
        CHECK_THROWS_AS(session.ingest(wire::Packet{wire::KeylogData{"x"}}), ProtocolViolation);
    }

    SUBCASE("asset info first, duplicates overwrite idempotently") {
        session.ingest(wire::Packet{wire::BasicAssetInfo{"HOST-A", "t0", {}}});
        REQUIRE(session.assetInfo().has_value());
        CHECK(session.assetInfo()->machineName == "HOST-A");
        session.ingest(wire::Packet{wire::BasicAssetInfo{"HOST-A", "t1", {"TR"}}});
        CHECK(session.assetInfo()->dateTime == "t1");
        CHECK(session.transcript().size() == 2);
    }
}

TEST_CASE("ingest routes blocks and keylog data") {
    c2::C2Session session("s2", testKey());
    session.ingest(wire::Packet{wire::BasicAssetInfo{"H", "t", {}}});

    Bytes file(100000);
    for (std::size_t i = 0; i < file.size(); ++i) file[i] = static_cast<std::uint8_t>(i);
    const auto blocks = wire::chunkFile("dump.bin", file, 65535);
    for (auto it = blocks.rbegin(); it != blocks.rend(); ++it)
        session.ingest(wire::Packet{wire::FileBlockMsg{*it}});

    const auto files = session.completedFiles();
    REQUIRE(files.size() == 1);
    CHECK(files[0].first == "dump.bin");
    CHECK(files[0].second == file);

    session.ingest(wire::Packet{wire::KeylogData{"abc"}});
    session.ingest(wire::Packet{wire::KeylogData{"def"}});
    CHECK(session.keylogStore() == "abcdef");
}

TEST_CASE("scripted session closes the loop for every controller variant") {
    // one fresh session per variant; first implant response must be the asset info
    const std::vector<wire::Packet> commands = {
        wire::Packet{wire::Reconnect{}},
        wire::Packet{wire::GetStartupItems{}},
        wire::Packet{wire::ExfilProcesses{}},
        wire::Packet{wire::KillProcess{12345}},
        wire::Packet{wire::ShowMfaForm{"BB8"}},
        wire::Packet{wire::RfidCommand{3, ""}},
        wire::Packet{wire::RequestCredentials{}},
        wire::Packet{wire::Disconnect{}},
    };
    for (const auto& cmd : commands) {
        host::VirtualHost h;
        implant::ImplantSim sim(h, implant::ImplantConfig{}, scripted({}));
        const auto key = codec::deriveKey(sim.config().encryptionKey);
        c2::C2Session session("loop", key);
        Rng rng(1);

        // boot emits the first BasicAssetInfo; the gate covers handler-only runs
        std::vector<c2::ScriptStep> script{{0, cmd, std::nullopt}};
        c2::runSession(session, sim, h, script, rng);

        bool sawInbound = false;
        for (const auto& entry : session.transcript()) {
            if (entry.direction == c2::Direction::ToController) {
                if (!sawInbound)
                    CHECK(std::holds_alternative<wire::BasicAssetInfo>(entry.packet));
                sawInbound = true;
            }
        }
        CHECK(sawInbound);
    }
}

TEST_CASE("kill round trip acknowledges through the full wire") {
    host::VirtualHost h;
    h.procPreload({3104, "C:\\Windows\\System32\\notepad.exe", "notepad", ""});
    implant::ImplantSim sim(h, implant::ImplantConfig{}, scripted({}));
    const auto key = codec::deriveKey(sim.config().encryptionKey);
    c2::C2Session session("kill", key);
    Rng rng(5);

    std::vector<c2::ScriptStep> script{{0, wire::Packet{wire::KillProcess{3104}}, std::nullopt}};
    c2::runSession(session, sim, h, script, rng);

    bool acked = false;
    for (const auto& entry : session.transcript())
        if (entry.direction == c2::Direction::ToController)
            if (const auto* ack = std::get_if<wire::Ack>(&entry.packet))
                acked = ack->refTag == wire::PacketTraits<wire::KillProcess>::kTag;
    CHECK(acked);
    CHECK(h.processes().count(3104) == 0);
}

TEST_CASE("transcripts replay identically under one seed") {
    auto runOnce = [] {
        host::VirtualHost h;
        h.fsPreload(h.documentsDir() + "\\x.bin", Bytes(100, 1));
        implant::ImplantSim sim(h, implant::ImplantConfig{}, scripted({}));
        c2::C2Session session("det", codec::deriveKey(sim.config().encryptionKey));
        Rng rng(31337);
        std::vector<c2::ScriptStep> script;
        for (int i = 0; i < 30; ++i)
            script.push_back({static_cast<std::uint64_t>(i % 3) * 100,
                              wire::Packet{wire::ExfilProcesses{}}, std::nullopt});
        return c2::runSession(session, sim, h, script, rng).capture;
    };
    CHECK(runOnce() == runOnce());
}

TEST_CASE("geo fallback chain order and short-circuit") {
    const std::string telizeDoc = R"({"ip":"1.2.3.4","country":"Brazil","country_code":"BR"})";
    const std::string freegeoDoc =
        R"({"ip":"1.2.3.4","country_name":"Argentina","country_code":"AR"})";
    const std::string ipifyDoc = R"({"ip":"5.6.7.8"})";

    SUBCASE("first provider success stops the chain") {
        host::VirtualHost h;
        const auto geo = geoip::locate(h, scripted({{"telize", telizeDoc}}));
        CHECK(geo.country == "Brazil");
        CHECK(geo.flagName == "flag_brazil.png");
        REQUIRE(h.events().size() == 1);
        CHECK(h.events()[0].fields.at("DestinationHostname") == "telize.com");
    }

    SUBCASE("first fails, second succeeds: two events, result from the second") {
        host::VirtualHost h;
        const auto geo = geoip::locate(
            h, scripted({{"telize", std::nullopt}, {"freegeoip", freegeoDoc}}));
        CHECK(geo.country == "Argentina");
        CHECK(geo.flagName == "flag_argentina.png");
        REQUIRE(h.events().size() == 2);
        CHECK(h.events()[0].fields.at("DestinationHostname") == "telize.com");
        CHECK(h.events()[1].fields.at("DestinationHostname") == "freegeoip.net");
    }

    SUBCASE("ipify success yields only an address") {
        host::VirtualHost h;
        const auto geo = geoip::locate(h, scripted({{"ipify", ipifyDoc}}));
        CHECK(geo.ip == "5.6.7.8");
        CHECK(geo.country == geoip::kUnknownCountry);
        CHECK(geo.flagName == geoip::kPlaceholderFlag);
        CHECK(h.events().size() == 3);
    }

    SUBCASE("all providers fail: three events then the documented error") {
        host::VirtualHost h;
        CHECK_THROWS_AS(geoip::locate(h, scripted({})), AllProvidersFailed);
        REQUIRE(h.events().size() == 3);
        CHECK(h.events()[0].fields.at("DestinationHostname") == "telize.com");
        CHECK(h.events()[1].fields.at("DestinationHostname") == "freegeoip.net");
        CHECK(h.events()[2].fields.at("DestinationHostname") == "api.ipify.org");
    }

    SUBCASE("malformed provider document counts as a failure") {
        host::VirtualHost h;
        const auto geo =
            geoip::locate(h, scripted({{"telize", "{not json"}, {"freegeoip", freegeoDoc}}));
        CHECK(geo.country == "Argentina");
        CHECK(h.events().size() == 2);
    }
}

TEST_CASE("flag table lookup") {
    CHECK(geoip::flagFor("Brazil") == "flag_brazil.png");
    CHECK(geoip::flagFor("BRAZIL") == "flag_brazil.png");
    CHECK(geoip::flagFor("Atlantis") == geoip::kPlaceholderFlag);
    CHECK(geoip::flagFor(geoip::flagFor("Atlantis")) == geoip::kPlaceholderFlag);
    CHECK(geoip::flagFor("Chile", {{"chile", "c.png"}}) == "c.png");
}
