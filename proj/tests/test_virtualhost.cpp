// Virtual host semantics: map behavior, event emission, the event-sourcing
// replay property, clock arithmetic and the log line format.

#include <doctest.h>

#include "bqlab/virtualhost.hpp"
#include "oracles.hpp"

using namespace bqlab;
using host::VirtualHost;
namespace ev = host::events;

TEST_CASE("filesystem semantics") {
    VirtualHost h;

    h.fsWrite("C:\\Users\\kikoooioiooioi\\Data.log", toBytes("2024-08-19"));
    CHECK(h.fsExists("c:/users/KIKOOOIOIOOIOI/data.LOG")); // case and slash insensitive
    CHECK(toString(h.fsRead("C:\\Users\\kikoooioiooioi\\Data.log")) == "2024-08-19");

    SUBCASE("hidden flag persists") {
        h.fsWrite("C:\\hidden.bin", Bytes{1}, true);
        CHECK(h.fsHidden("C:\\hidden.bin"));
        CHECK_FALSE(h.fsHidden("C:\\Users\\kikoooioiooioi\\Data.log"));
    }

    SUBCASE("delete of absent path") {
        CHECK_THROWS_AS(h.fsDelete("C:\\nope.txt"), NotFound);
        CHECK_THROWS_AS(h.fsRead("C:\\nope.txt"), NotFound);
    }

    SUBCASE("filesUnder sees only the directory subtree") {
        h.fsWrite("C:\\Users\\kikoooioiooioi\\Videos\\a.mp4", Bytes{1});
        h.fsWrite("C:\\Users\\kikoooioiooioi\\VideosOld\\b.mp4", Bytes{1});
        auto under = h.filesUnder("C:\\Users\\kikoooioiooioi\\Videos");
        REQUIRE(under.size() == 1);
        CHECK(under[0] == "C:\\Users\\kikoooioiooioi\\Videos\\a.mp4");
    }
}

TEST_CASE("registry semantics") {
    VirtualHost h;
    const std::string run = R"(Software\Microsoft\Windows\CurrentVersion\Run)";

    h.regSet("HKEY_CURRENT_USER", run, "STARTUP", "C:\\mod.dll");
    CHECK(h.regGet("HKEY_CURRENT_USER", run, "STARTUP") == "C:\\mod.dll");

    // the emitted event carries the full verbatim path
    REQUIRE_FALSE(h.events().empty());
    CHECK(h.events().back().eventId == ev::kRegistrySet);
    CHECK(h.events().back().fields.at("TargetObject") ==
          R"(HKEY_CURRENT_USER\Software\Microsoft\Windows\CurrentVersion\Run\STARTUP)");

    SUBCASE("delete clears") {
        h.regDelete("HKEY_CURRENT_USER", run, "STARTUP");
        CHECK_FALSE(h.regExists("HKEY_CURRENT_USER", run, "STARTUP"));
        CHECK_THROWS_AS(h.regDelete("HKEY_CURRENT_USER", run, "STARTUP"), NotFound);
        CHECK_THROWS_AS(h.regGet("HKEY_CURRENT_USER", run, "STARTUP"), NotFound);
    }

    SUBCASE("values under a key exclude deeper subkeys") {
        h.regSet("HKEY_CURRENT_USER", run, "Other", "x");
        h.regSet("HKEY_CURRENT_USER", run + "\\Sub", "Deeper", "y");
        auto values = h.regValuesUnder("HKEY_CURRENT_USER", run);
        REQUIRE(values.size() == 2);
        CHECK(values[0].first == "Other");
        CHECK(values[1].first == "STARTUP");
    }
}

TEST_CASE("process semantics") {
    VirtualHost h;
    h.procPreload({2000, "C:\\apps\\chrome.exe", "chrome.exe", "explorer.exe"});
    h.procPreload({2004, "C:\\apps\\CHROME.EXE", "chrome.exe --renderer", "chrome.exe"});
    h.procPreload({2100, "C:\\other\\notepad.exe", "notepad.exe", "explorer.exe"});

    SUBCASE("spawn then list contains the entry") {
        const auto pid = h.procSpawn("C:\\run\\tool.exe", "tool.exe -v", "parent.exe");
        bool found = false;
        for (const auto& entry : h.procList()) found |= entry.pid == pid;
        CHECK(found);
        CHECK(h.events().back().eventId == ev::kProcessCreate);
        CHECK(h.events().back().fields.at("CommandLine") == "tool.exe -v");
    }

    SUBCASE("kill by name counts every instance, case-insensitively") {
        CHECK(h.procKillByName("chrome.exe") == 2);
        CHECK(h.procKillByName("chrome.exe") == 0);
        CHECK(h.procList().size() == 1);
    }

    SUBCASE("kill of absent pid") {
        CHECK_THROWS_AS(h.procKill(999), NoSuchPid);
    }
}

TEST_CASE("clock and virtual dates") {
    VirtualHost h;
    h.baseDateTime = "2024-08-19 10:00:00";
    CHECK(h.currentDateTime() == "2024-08-19 10:00:00");
    CHECK(h.currentDate() == "2024-08-19");

    h.clockAdvance(5000);
    CHECK(h.clockMs() == 5000);
    CHECK(h.currentDateTime() == "2024-08-19 10:00:05");

    h.fsWrite("C:\\t.txt", Bytes{1});
    CHECK(h.events().back().timestampMs == 5000);

    SUBCASE("clock crosses midnight") {
        h.clockAdvance(14ull * 3600 * 1000);
        CHECK(h.currentDate() == "2024-08-20");
        CHECK(h.currentDateTime() == "2024-08-20 00:00:05");
    }
}

TEST_CASE("event log export and parse round-trip") {
    VirtualHost h;
    CHECK(h.exportEvents().empty());

    h.fsWrite("C:\\a.bin", Bytes{0, 1, 2});
    h.clockAdvance(1234);
    h.pushEvent(ev::kNetworkConnect, {{"DestinationHostname", "telize.com"}, {"Details", "443"}});
    h.procSpawn("C:\\x.exe", "x.exe", "explorer.exe");

    const std::string text = h.exportEvents();
    const auto parsed = VirtualHost::parseEvents(text);
    CHECK(parsed == h.events());
    CHECK(VirtualHost::exportEvents(parsed) == text);
}

TEST_CASE("event sourcing: replaying the log rebuilds the mutated state") {
    VirtualHost h;
    const auto before = oracles::captureState(h);

    h.fsWrite("C:\\m\\mod.dll", toBytes("module"), true);
    h.fsWrite("C:\\m\\data.log", toBytes("2024-08-19"));
    h.regSet("HKEY_CURRENT_USER", "Software\\K", "V", "1");
    h.regSet("HKEY_CURRENT_USER", "Software\\K", "W", "2");
    h.regDelete("HKEY_CURRENT_USER", "Software\\K", "V");
    const auto pid = h.procSpawn("C:\\m\\mod.dll", "mod", "explorer.exe");
    h.procSpawn("C:\\other.exe", "other", "explorer.exe");
    h.procKill(pid);
    h.fsDelete("C:\\m\\data.log");
    h.fsWrite("C:\\m\\data.log", toBytes("rewritten"));

    CHECK(oracles::replayEvents(h.events(), before) == oracles::captureState(h));
}

TEST_CASE("preloads seed fixtures without events") {
    VirtualHost h;
    h.fsPreload("C:\\fixture.bin", Bytes{9});
    h.regPreload("HKEY_CURRENT_USER", "Control Panel\\Cursors", "Arrow", "aero.cur");
    h.procPreload({500, "C:\\svc.exe", "svc", ""});
    CHECK(h.events().empty());
    CHECK(h.fsExists("C:\\fixture.bin"));
    CHECK(h.regExists("HKEY_CURRENT_USER", "Control Panel\\Cursors", "Arrow"));
}
