// Indicator-of-compromise sets and matching over event logs and decoded packets.
// Entries normalize to lowercase with defanging brackets removed, so
// 15.228.186[.]93 and 15.228.186.93 are the same indicator.

#pragma once

#include <set>

#include "bqlab/virtualhost.hpp"
#include "bqlab/wire.hpp"

namespace bqlab::ioc {

inline std::string normalizeIndicator(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    for (char c : raw) {
        if (c == '[' || c == ']') continue;
        out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    // trim surrounding whitespace
    std::size_t b = out.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    std::size_t e = out.find_last_not_of(" \t");
    return out.substr(b, e - b + 1);
}

inline bool looksLikeIpv4(const std::string& s) {
    int dots = 0, digits = 0;
    for (char c : s) {
        if (c == '.') {
            ++dots;
            digits = 0;
        } else if (c >= '0' && c <= '9') {
            if (++digits > 3) return false;
        } else {
            return false;
        }
    }
    return dots == 3 && digits > 0;
}

struct IocSet {
    std::set<std::string> ips;
    std::set<std::string> domains;
    std::set<std::string> filenames;
    std::set<std::string> hashes;

    void addIp(std::string_view v) { ips.insert(normalizeIndicator(v)); }
    void addDomain(std::string_view v) { domains.insert(normalizeIndicator(v)); }
    void addFilename(std::string_view v) { filenames.insert(normalizeIndicator(v)); }
    void addHash(std::string_view v) { hashes.insert(normalizeIndicator(v)); }

    /// "ip:x", "domain:x", "file:x", "hash:x", or a bare indicator (IPv4 goes to
    /// ips, anything else to domains). Comment lines start with '#'.
    void addLine(std::string_view line) {
        std::string t = normalizeIndicator(line);
        if (t.empty() || t.front() == '#') return;
        if (t.rfind("ip:", 0) == 0) {
            addIp(t.substr(3));
        } else if (t.rfind("domain:", 0) == 0) {
            addDomain(t.substr(7));
        } else if (t.rfind("file:", 0) == 0) {
            addFilename(t.substr(5));
        } else if (t.rfind("hash:", 0) == 0) {
            addHash(t.substr(5));
        } else if (looksLikeIpv4(t)) {
            addIp(t);
        } else {
            addDomain(t);
        }
    }

    void addDocument(std::string_view text) {
        std::size_t start = 0;
        while (start <= text.size()) {
            std::size_t end = text.find('\n', start);
            if (end == std::string_view::npos) end = text.size();
            addLine(text.substr(start, end - start));
            if (end == text.size()) break;
            start = end + 1;
        }
    }

    bool empty() const {
        return ips.empty() && domains.empty() && filenames.empty() && hashes.empty();
    }
};

/// The campaign's network infrastructure and dropped filenames.
inline IocSet defaultIocs() {
    IocSet set;
    set.addIp("15.228.186.93");
    for (const char* domain :
         {"agicltursement.ink", "cfestlolequiep.store", "gastronomleo.lat", "mercantokiko.xyz",
          "noticiasnovidads.xyz", "notificacao.noticiasnovidads.xyz", "varjolatijolos.space",
          "coletasegura.ddns.net"})
        set.addDomain(domain);
    for (const char* file :
         {"67dee1.msi", "Rar.exe", "xxwewe33.rar", "eiuwi383ie.exe", "vstdlib_s64.dll"})
        set.addFilename(file);
    return set;
}

struct IocHit {
    std::string category;  // ip | domain | filename | hash
    std::string indicator; // normalized entry that matched
    std::size_t artifactIndex = 0;
    std::string field;

    bool operator==(const IocHit&) const = default;
};

namespace detail {

inline std::string basenameOf(const std::string& path) {
    auto slash = path.find_last_of("\\/");
    return slash == std::string::npos ? path : path.substr(slash + 1);
}

inline void matchHostname(const IocSet& iocs, const std::string& value, std::size_t index,
                          const std::string& field, std::vector<IocHit>& hits) {
    const std::string norm = normalizeIndicator(value);
    if (iocs.ips.count(norm)) hits.push_back({"ip", norm, index, field});
    if (iocs.domains.count(norm)) hits.push_back({"domain", norm, index, field});
}

inline void matchFilename(const IocSet& iocs, const std::string& value, std::size_t index,
                          const std::string& field, std::vector<IocHit>& hits) {
    const std::string norm = normalizeIndicator(basenameOf(value));
    if (iocs.filenames.count(norm)) hits.push_back({"filename", norm, index, field});
}

} // namespace detail

inline std::vector<IocHit> matchIocs(const IocSet& iocs,
                                     const std::vector<host::HostEvent>& events) {
    std::vector<IocHit> hits;
    for (std::size_t i = 0; i < events.size(); ++i) {
        for (const auto& [field, value] : events[i].fields) {
            if (field == "DestinationHostname") {
                detail::matchHostname(iocs, value, i, field, hits);
            } else if (field == "TargetObject" || field == "Image" || field == "ImageLoaded" ||
                       field == "ParentImage" || field == "CommandLine") {
                detail::matchFilename(iocs, value, i, field, hits);
            }
        }
    }
    return hits;
}

inline std::vector<IocHit> matchIocs(const IocSet& iocs,
                                     const std::vector<wire::Packet>& packets) {
    std::vector<IocHit> hits;
    for (std::size_t i = 0; i < packets.size(); ++i) {
        const auto& p = packets[i];
        if (const auto* blockMsg = std::get_if<wire::FileBlockMsg>(&p)) {
            detail::matchFilename(iocs, blockMsg->block.filename, i, "filename", hits);
        } else if (const auto* proxy = std::get_if<wire::ConnectReverseProxy>(&p)) {
            detail::matchHostname(iocs, proxy->host, i, "host", hits);
        } else if (const auto* start = std::get_if<wire::StartProcess>(&p)) {
            detail::matchFilename(iocs, start->path, i, "path", hits);
        } else if (const auto* item = std::get_if<wire::AddStartupItem>(&p)) {
            detail::matchFilename(iocs, item->path, i, "path", hits);
        }
    }
    return hits;
}

} // namespace bqlab::ioc
