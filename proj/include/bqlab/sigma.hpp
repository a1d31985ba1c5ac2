// Sigma-subset rule engine. Parses the structured rule documents this project
// ships (plain scalars, nested maps, lists, field modifiers, boolean and/or
// conditions), evaluates them over host event logs, and exposes the four
// built-in rules.
//
// Scoping note: selections are satisfied per event; the condition is evaluated
// log-scoped, i.e. a selection name is true when at least one event satisfies
// it. For single-selection rules this matches the per-event reading; it also
// lets the network-chain rule, whose condition spans events, fire. Deliberate
// superset, documented in docs/formats.md.

#pragma once

#include <memory>

#include "bqlab/virtualhost.hpp"

namespace bqlab::sigma {

enum class MatchMode { Equals, EndsWith, Contains, ContainsAll, MatchesAny };

struct FieldMatcher {
    std::string field;
    MatchMode mode = MatchMode::Equals;
    std::vector<std::string> values;

    bool operator==(const FieldMatcher&) const = default;
};

struct CondExpr {
    enum class Kind { Name, And, Or } kind = Kind::Name;
    std::string name;
    std::shared_ptr<CondExpr> lhs, rhs;
};

struct SigmaRule {
    std::string title;
    std::string id;
    std::string level;
    std::map<std::string, std::string> logsource;
    std::map<std::string, std::vector<FieldMatcher>> selections;
    std::string conditionText;
    std::shared_ptr<CondExpr> condition;

    bool operator==(const SigmaRule& other) const {
        return title == other.title && id == other.id && level == other.level &&
               logsource == other.logsource && selections == other.selections &&
               conditionText == other.conditionText;
    }
};

struct DetectionHit {
    std::string ruleId;
    std::string ruleTitle;
    std::string level;
    std::vector<std::size_t> eventIndexes;

    bool operator==(const DetectionHit&) const = default;
};

namespace detail {

inline std::string toLower(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

// ---- document reader: the indentation-based subset the rules use ----

struct Node {
    enum class Kind { Scalar, Map, List } kind = Kind::Scalar;
    std::string scalar;
    std::vector<std::pair<std::string, Node>> entries; // Map, in document order
    std::vector<std::string> items;                    // List of scalars
};

struct Line {
    int indent = 0;
    std::string text; // without indentation
};

inline std::vector<Line> splitLines(std::string_view doc) {
    std::vector<Line> lines;
    std::size_t start = 0;
    while (start <= doc.size()) {
        std::size_t end = doc.find('\n', start);
        if (end == std::string_view::npos) end = doc.size();
        std::string_view raw = doc.substr(start, end - start);
        start = end + 1;
        if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
        std::size_t indent = 0;
        while (indent < raw.size() && raw[indent] == ' ') ++indent;
        std::string_view body = raw.substr(indent);
        if (body.empty() || body.front() == '#') continue; // blank or comment
        if (body.find('\t') != std::string_view::npos)
            throw MalformedDocument("tabs are not valid indentation");
        lines.push_back({static_cast<int>(indent), std::string(body)});
        if (end == doc.size()) break;
    }
    return lines;
}

inline std::string stripQuotes(std::string value) {
    if (value.size() >= 2 &&
        ((value.front() == '\'' && value.back() == '\'') ||
         (value.front() == '"' && value.back() == '"')))
        return value.substr(1, value.size() - 2);
    return value;
}

inline std::string trim(std::string_view s) {
    std::size_t b = s.find_first_not_of(' ');
    if (b == std::string_view::npos) return "";
    std::size_t e = s.find_last_not_of(' ');
    return std::string(s.substr(b, e - b + 1));
}

inline Node parseBlock(const std::vector<Line>& lines, std::size_t& pos, int indent) {
    Node node;
    if (pos >= lines.size()) throw MalformedDocument("unexpected end of document");

    if (lines[pos].text.rfind("- ", 0) == 0) {
        node.kind = Node::Kind::List;
        while (pos < lines.size() && lines[pos].indent == indent &&
               lines[pos].text.rfind("- ", 0) == 0) {
            node.items.push_back(stripQuotes(trim(lines[pos].text.substr(2))));
            ++pos;
        }
        return node;
    }

    node.kind = Node::Kind::Map;
    while (pos < lines.size() && lines[pos].indent == indent) {
        const std::string& text = lines[pos].text;
        if (text.rfind("- ", 0) == 0) break;
        std::size_t colon = text.find(':');
        if (colon == std::string::npos || colon == 0)
            throw MalformedDocument("expected 'key: value' but found: " + text);
        std::string key = trim(text.substr(0, colon));
        std::string rest = trim(text.substr(colon + 1));
        ++pos;
        if (!rest.empty()) {
            Node scalar;
            scalar.kind = Node::Kind::Scalar;
            scalar.scalar = stripQuotes(rest);
            node.entries.emplace_back(std::move(key), std::move(scalar));
        } else {
            if (pos >= lines.size() || lines[pos].indent <= indent)
                throw MalformedDocument("key '" + key + "' has no value");
            const int childIndent = lines[pos].indent;
            node.entries.emplace_back(key, parseBlock(lines, pos, childIndent));
        }
    }
    if (node.entries.empty()) throw MalformedDocument("empty mapping block");
    return node;
}

inline const Node* find(const Node& map, std::string_view key) {
    for (const auto& [k, v] : map.entries)
        if (k == key) return &v;
    return nullptr;
}

// ---- condition expression ----

inline std::vector<std::string> tokenizeCondition(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : text) {
        if (c == ' ') {
            if (!current.empty()) tokens.push_back(std::exchange(current, {}));
        } else if (c == '(' || c == ')') {
            if (!current.empty()) tokens.push_back(std::exchange(current, {}));
            tokens.push_back(std::string(1, c));
        } else {
            current += c;
        }
    }
    if (!current.empty()) tokens.push_back(current);
    return tokens;
}

struct CondParser {
    const std::vector<std::string>& tokens;
    std::size_t pos = 0;

    bool peek(std::string_view t) const { return pos < tokens.size() && tokens[pos] == t; }

    std::shared_ptr<CondExpr> parseOr() {
        auto lhs = parseAnd();
        while (peek("or")) {
            ++pos;
            auto node = std::make_shared<CondExpr>();
            node->kind = CondExpr::Kind::Or;
            node->lhs = lhs;
            node->rhs = parseAnd();
            lhs = node;
        }
        return lhs;
    }

    std::shared_ptr<CondExpr> parseAnd() {
        auto lhs = parsePrimary();
        while (peek("and")) {
            ++pos;
            auto node = std::make_shared<CondExpr>();
            node->kind = CondExpr::Kind::And;
            node->lhs = lhs;
            node->rhs = parsePrimary();
            lhs = node;
        }
        return lhs;
    }

    std::shared_ptr<CondExpr> parsePrimary() {
        if (pos >= tokens.size()) throw MalformedDocument("condition ends unexpectedly");
        if (peek("(")) {
            ++pos;
            auto inner = parseOr();
            if (!peek(")")) throw MalformedDocument("unbalanced parenthesis in condition");
            ++pos;
            return inner;
        }
        const std::string& token = tokens[pos];
        if (token == "not" || token == "1" || token == "all" || token == "of" || token == "|")
            throw UnsupportedConstruct("condition construct not in the supported subset: " +
                                       token);
        if (token == "and" || token == "or" || token == ")")
            throw MalformedDocument("misplaced token in condition: " + token);
        auto node = std::make_shared<CondExpr>();
        node->kind = CondExpr::Kind::Name;
        node->name = token;
        ++pos;
        return node;
    }
};

inline std::shared_ptr<CondExpr> parseCondition(const std::string& text) {
    auto tokens = tokenizeCondition(text);
    if (tokens.empty()) throw MalformedDocument("empty condition");
    CondParser parser{tokens};
    auto expr = parser.parseOr();
    if (parser.pos != tokens.size())
        throw MalformedDocument("trailing tokens in condition: " + text);
    return expr;
}

inline void collectNames(const CondExpr& expr, std::vector<std::string>& names) {
    if (expr.kind == CondExpr::Kind::Name) {
        names.push_back(expr.name);
        return;
    }
    collectNames(*expr.lhs, names);
    collectNames(*expr.rhs, names);
}

// ---- matcher construction ----

inline FieldMatcher buildMatcher(const std::string& key, std::vector<std::string> values) {
    FieldMatcher m;
    std::size_t pipe = key.find('|');
    m.field = key.substr(0, pipe);
    std::string modifier = pipe == std::string::npos ? "" : key.substr(pipe);

    if (modifier.empty()) {
        // plain match; a leading wildcard means suffix semantics
        bool anyStar = false;
        for (const auto& v : values) anyStar |= v.find('*') != std::string::npos;
        if (!anyStar) {
            m.mode = MatchMode::Equals;
        } else {
            for (auto& v : values) {
                if (v.size() < 2 || v.front() != '*' ||
                    v.find('*', 1) != std::string::npos)
                    throw UnsupportedConstruct(
                        "only leading-wildcard plain matches are supported: " + v);
                v = v.substr(1);
            }
            m.mode = MatchMode::EndsWith;
        }
    } else if (modifier == "|endswith") {
        m.mode = MatchMode::EndsWith;
    } else if (modifier == "|contains") {
        m.mode = MatchMode::Contains;
    } else if (modifier == "|contains|all" || modifier == "|all") {
        m.mode = MatchMode::ContainsAll;
    } else if (modifier == "|matches") {
        m.mode = MatchMode::MatchesAny;
    } else {
        throw UnsupportedConstruct("unsupported field modifier: " + key);
    }

    if (values.empty()) throw MalformedDocument("matcher without values: " + key);
    m.values = std::move(values);
    return m;
}

} // namespace detail

inline SigmaRule parseRule(std::string_view document) {
    using namespace detail;

    auto lines = splitLines(document);
    if (lines.empty()) throw MalformedDocument("empty rule document");
    std::size_t pos = 0;
    Node root = parseBlock(lines, pos, lines.front().indent);
    if (pos != lines.size()) throw MalformedDocument("inconsistent top-level indentation");
    if (root.kind != Node::Kind::Map) throw MalformedDocument("rule must be a mapping");

    SigmaRule rule;
    if (const Node* n = find(root, "title"); n && n->kind == Node::Kind::Scalar)
        rule.title = n->scalar;
    if (const Node* n = find(root, "id"); n && n->kind == Node::Kind::Scalar) rule.id = n->scalar;
    if (const Node* n = find(root, "level"); n && n->kind == Node::Kind::Scalar)
        rule.level = n->scalar;
    if (const Node* n = find(root, "logsource")) {
        if (n->kind != Node::Kind::Map) throw MalformedDocument("logsource must be a mapping");
        for (const auto& [k, v] : n->entries) {
            if (v.kind != Node::Kind::Scalar)
                throw MalformedDocument("logsource values must be scalars");
            rule.logsource[k] = v.scalar;
        }
    }

    const Node* detection = find(root, "detection");
    if (!detection || detection->kind != Node::Kind::Map)
        throw MalformedDocument("rule has no detection block");

    for (const auto& [name, body] : detection->entries) {
        if (name == "condition") {
            if (body.kind != Node::Kind::Scalar)
                throw MalformedDocument("condition must be a scalar expression");
            rule.conditionText = body.scalar;
            continue;
        }
        if (body.kind != Node::Kind::Map)
            throw MalformedDocument("selection '" + name + "' must map fields to values");
        std::vector<FieldMatcher> matchers;
        for (const auto& [key, value] : body.entries) {
            std::vector<std::string> values;
            if (value.kind == Node::Kind::Scalar)
                values.push_back(value.scalar);
            else if (value.kind == Node::Kind::List)
                values = value.items;
            else
                throw MalformedDocument("matcher '" + key + "' must be a scalar or list");
            matchers.push_back(buildMatcher(key, std::move(values)));
        }
        if (matchers.empty())
            throw MalformedDocument("selection '" + name + "' has no matchers");
        rule.selections[name] = std::move(matchers);
    }

    if (rule.selections.empty()) throw MalformedDocument("detection has no selections");
    if (rule.conditionText.empty()) throw MalformedDocument("detection has no condition");
    rule.condition = parseCondition(rule.conditionText);

    std::vector<std::string> names;
    collectNames(*rule.condition, names);
    for (const auto& name : names)
        if (!rule.selections.count(name))
            throw MalformedDocument("condition references unknown selection: " + name);
    return rule;
}

/// Canonical re-emission of the modeled subset; parse(print(rule)) == rule.
inline std::string printRule(const SigmaRule& rule) {
    std::string out;
    auto scalar = [](const std::string& v) { return "'" + v + "'"; };
    out += "title: " + rule.title + "\n";
    out += "id: " + rule.id + "\n";
    out += "level: " + rule.level + "\n";
    if (!rule.logsource.empty()) {
        out += "logsource:\n";
        for (const auto& [k, v] : rule.logsource) out += "  " + k + ": " + v + "\n";
    }
    out += "detection:\n";
    for (const auto& [name, matchers] : rule.selections) {
        out += "  " + name + ":\n";
        for (const auto& m : matchers) {
            std::string key = m.field;
            switch (m.mode) {
                case MatchMode::Equals: break;
                case MatchMode::EndsWith: key += "|endswith"; break;
                case MatchMode::Contains: key += "|contains"; break;
                case MatchMode::ContainsAll: key += "|contains|all"; break;
                case MatchMode::MatchesAny: key += "|matches"; break;
            }
            if (m.values.size() == 1) {
                out += "    " + key + ": " + scalar(m.values.front()) + "\n";
            } else {
                out += "    " + key + ":\n";
                for (const auto& v : m.values) out += "      - " + scalar(v) + "\n";
            }
        }
    }
    out += "  condition: " + rule.conditionText + "\n";
    return out;
}

// ---- evaluation ----

namespace detail {

inline std::optional<std::string> eventField(const host::HostEvent& ev, const std::string& name) {
    if (name == "EventID") return std::to_string(ev.eventId);
    auto it = ev.fields.find(name);
    if (it == ev.fields.end()) return std::nullopt;
    return it->second;
}

inline bool matcherMatches(const FieldMatcher& m, const host::HostEvent& ev) {
    auto raw = eventField(ev, m.field);
    if (!raw) return false;
    const std::string value = toLower(*raw);

    switch (m.mode) {
        case MatchMode::Equals:
        case MatchMode::MatchesAny:
            for (const auto& v : m.values)
                if (value == toLower(v)) return true;
            return false;
        case MatchMode::EndsWith:
            for (const auto& v : m.values) {
                const std::string want = toLower(v);
                if (value.size() >= want.size() &&
                    value.compare(value.size() - want.size(), want.size(), want) == 0)
                    return true;
            }
            return false;
        case MatchMode::Contains:
            for (const auto& v : m.values)
                if (value.find(toLower(v)) != std::string::npos) return true;
            return false;
        case MatchMode::ContainsAll:
            for (const auto& v : m.values)
                if (value.find(toLower(v)) == std::string::npos) return false;
            return true;
    }
    return false;
}

inline bool evalCondition(const CondExpr& expr,
                          const std::map<std::string, bool>& truth) {
    switch (expr.kind) {
        case CondExpr::Kind::Name: return truth.at(expr.name);
        case CondExpr::Kind::And: return evalCondition(*expr.lhs, truth) &&
                                          evalCondition(*expr.rhs, truth);
        case CondExpr::Kind::Or: return evalCondition(*expr.lhs, truth) ||
                                         evalCondition(*expr.rhs, truth);
    }
    return false;
}

} // namespace detail

/// One event satisfies a selection when every matcher in it matches.
inline bool selectionMatches(const std::vector<FieldMatcher>& selection,
                             const host::HostEvent& ev) {
    for (const auto& m : selection)
        if (!detail::matcherMatches(m, ev)) return false;
    return true;
}

/// Per-event evaluation: the condition with each selection tested against this
/// single event.
inline bool evalRule(const SigmaRule& rule, const host::HostEvent& ev) {
    std::map<std::string, bool> truth;
    for (const auto& [name, matchers] : rule.selections)
        truth[name] = selectionMatches(matchers, ev);
    return detail::evalCondition(*rule.condition, truth);
}

/// Log-scoped evaluation: a selection is true when some event satisfies it.
/// Hits report the indexes of the witnessing events.
inline std::vector<DetectionHit> scan(const std::vector<SigmaRule>& rules,
                                      const std::vector<host::HostEvent>& events) {
    std::vector<DetectionHit> hits;
    for (const auto& rule : rules) {
        std::map<std::string, std::vector<std::size_t>> witnesses;
        for (const auto& [name, matchers] : rule.selections) {
            auto& list = witnesses[name];
            for (std::size_t i = 0; i < events.size(); ++i)
                if (selectionMatches(matchers, events[i])) list.push_back(i);
        }
        std::map<std::string, bool> truth;
        for (const auto& [name, list] : witnesses) truth[name] = !list.empty();
        if (!detail::evalCondition(*rule.condition, truth)) continue;

        DetectionHit hit{rule.id, rule.title, rule.level, {}};
        std::set<std::size_t> indexes;
        for (const auto& [name, list] : witnesses)
            if (!list.empty()) indexes.insert(list.begin(), list.end());
        hit.eventIndexes.assign(indexes.begin(), indexes.end());
        hits.push_back(std::move(hit));
    }
    return hits;
}

// ---- built-in rules (byte-identical to the files under rules/) ----

namespace builtin {

inline constexpr const char* kAnyDeskRule =
    R"(title: Detection of Suspicious AnyDesk File Modification and Termination via PowerShell
id: 1234abcd-5678-efgh-ijkl-9012mnopqrst
description: Detects suspicious PowerShell activity involving AnyDesk file modification and process termination when specific command patterns are observed.
status: experimental
author: Alessio Di Santo
date: 2024-11-26
logsource:
  category: process_creation
  product: windows
detection:
  selection:
    Image: '*\powershell.exe'
    CommandLine|all:
      - 'ad.anynet.pwd_hash='
      - 'ad.anynet.pwd_salt='
      - 'ad.anynet.token_salt='
      - 'taskkill /IM anydesk.exe /F'
  condition: selection
fields:
  - CommandLine
  - ParentCommandLine
  - ParentImage
  - Image
  - User
level: high
tags:
  - attack.persistence
  - attack.t1562.001
  - attack.t1098
falsepositives:
  - Legitimate administrative maintenance involving AnyDesk
mitre:
  - T1562.001
  - T1098
)";

inline constexpr const char* kMsiRule =
    R"(title: Suspicious MSI Installer Downloaded via Malspam
id: 9fc2e660-1b1d-4b4a-8aaf-6a2b3c71d2f9
description: Detect execution of the malicious MSI installer (67dee1.msi) used in the LATAM BlotchyQuasar campaign.
author: Alessio Di Santo
date: 2025/06/27
tags:
  - attack.initial_access
  - attack.t1566.001
  - malware
logsource:
  product: windows
  service: sysmon
  definition: 'Sysmon Event ID 1: Process Create'
detection:
  selection:
    EventID: 1
    Image|endswith: '\msiexec.exe'
    CommandLine|contains:
      - '67dee1.msi'
  condition: selection
level: high
)";

inline constexpr const char* kSideLoadRule =
    R"(title: DLL Side-Loading of vstdlib_s64.dll by SteamErrorReporter.exe
id: 5a7b4282-34f2-4d6b-8c3e-0d6af8f5c6fa
description: Detect when steamerrorreporter.exe loads vstdlib_s64.dll (quasar RAT) via DLL side-loading.
author: Alessio Di Santo
date: 2025/06/27
tags:
  - attack.t1574.002
  - attack.execution
  - malware
logsource:
  product: windows
  service: sysmon
  definition: 'Sysmon Event ID 7: Image loaded'
detection:
  selection:
    EventID: 7
    ImageLoaded|endswith: '\vstdlib_s64.dll'
    ParentImage|endswith: '\EIUWI383IE.exe'
  condition: selection
level: critical
)";

inline constexpr const char* kNetworkChainRule =
    R"(title: BlotchyQuasar Network Chain: Drop + GeoIP Services
id: 2c8fa042-a80f-4c9a-aba4-3f5d2e08e5d2-mod
description: Detect a connection to at least one drop server domain plus all three GeoIP services used by BlotchyQuasar.
author: Alessio Di Santo
date: 2025/06/27
tags:
  - attack.t1105
  - attack.t1071.001
  - attack.t1573.002
logsource:
  product: firewall
  service: any
detection:
  # At least one drop or staging domain
  selection_drop:
    DestinationHostname|matches:
      - 'notificacao.noticiasnovidads.xyz'
      - 'liga-730ce-default-rtdb.europe-west1.firebasedatabase.app'

  # All three GeoIP lookup services
  selection_geoip_telize:
    DestinationHostname|contains: 'telize.com'
  selection_geoip_freegeoip:
    DestinationHostname|contains: 'freegeoip.net'
  selection_geoip_ipify:
    DestinationHostname|contains: 'api.ipify.org'

  condition: selection_drop and selection_geoip_telize and selection_geoip_freegeoip and selection_geoip_ipify
level: high
)";

} // namespace builtin

inline const std::vector<std::pair<std::string, std::string>>& builtinRuleTexts() {
    static const std::vector<std::pair<std::string, std::string>> texts = {
        {"anydesk_powershell_tampering.yml", builtin::kAnyDeskRule},
        {"malspam_msi_installer.yml", builtin::kMsiRule},
        {"vstdlib_sideload.yml", builtin::kSideLoadRule},
        {"network_chain_geoip.yml", builtin::kNetworkChainRule},
    };
    return texts;
}

inline std::vector<SigmaRule> builtinRules() {
    std::vector<SigmaRule> rules;
    for (const auto& [name, text] : builtinRuleTexts()) rules.push_back(parseRule(text));
    return rules;
}

} // namespace bqlab::sigma
