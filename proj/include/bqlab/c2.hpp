// Controller state machine: command encoding, the authentication gate on inbound
// traffic, block-transfer reassembly and the in-memory session harness that
// drives a scripted exchange end to end.

#pragma once

#include "bqlab/implant.hpp"
#include "bqlab/wire.hpp"

namespace bqlab::c2 {

enum class Direction { ToImplant, ToController };

struct TranscriptEntry {
    Direction direction = Direction::ToImplant;
    wire::Packet packet;

    bool operator==(const TranscriptEntry&) const = default;
};

class C2Session {
public:
    C2Session(std::string sessionId, codec::SessionKey key,
              codec::CompressionLevel level = codec::CompressionLevel::L1)
        : sessionId_(std::move(sessionId)), key_(key), level_(level) {}

    const std::string& sessionId() const { return sessionId_; }
    const codec::SessionKey& key() const { return key_; }
    codec::CompressionLevel level() const { return level_; }

    const std::optional<wire::BasicAssetInfo>& assetInfo() const { return assetInfo_; }
    const std::map<std::string, wire::BlockTransfer>& transfers() const { return transfers_; }
    const std::string& keylogStore() const { return keylogStore_; }
    const std::vector<TranscriptEntry>& transcript() const { return transcript_; }

    /// Accepts one implant packet. The very first inbound packet of a session
    /// must be the basic asset info; anything else is a protocol violation.
    void ingest(const wire::Packet& packet) {
        if (!assetInfo_ && !std::holds_alternative<wire::BasicAssetInfo>(packet))
            throw ProtocolViolation(std::string("expected BasicAssetInfo first, got ") +
                                    wire::nameOf(packet));
        if (const auto* info = std::get_if<wire::BasicAssetInfo>(&packet)) {
            assetInfo_ = *info; // duplicates overwrite idempotently
        } else if (const auto* blockMsg = std::get_if<wire::FileBlockMsg>(&packet)) {
            transfers_[blockMsg->block.filename].ingest(blockMsg->block);
        } else if (const auto* keylog = std::get_if<wire::KeylogData>(&packet)) {
            keylogStore_ += keylog->text;
        }
        transcript_.push_back({Direction::ToController, packet});
    }

    /// Encodes a command frame and records it in the transcript.
    wire::Frame command(const wire::Packet& packet, ByteView iv) {
        transcript_.push_back({Direction::ToImplant, packet});
        return wire::encodeMessage(packet, key_, level_, iv);
    }

    /// Filename and contents of every completed inbound transfer.
    std::vector<std::pair<std::string, Bytes>> completedFiles() const {
        std::vector<std::pair<std::string, Bytes>> out;
        for (const auto& [name, transfer] : transfers_)
            if (transfer.complete()) out.push_back(wire::reassemble(transfer));
        return out;
    }

private:
    std::string sessionId_;
    codec::SessionKey key_;
    codec::CompressionLevel level_;
    std::optional<wire::BasicAssetInfo> assetInfo_;
    std::map<std::string, wire::BlockTransfer> transfers_;
    std::string keylogStore_;
    std::vector<TranscriptEntry> transcript_;
};

/// One scripted step: an optional clock advance, then an optional command.
struct ScriptStep {
    std::uint64_t clockStepMs = 0;
    std::optional<wire::Packet> command;
    std::optional<std::string> keystrokes; // fed to the keylogger before the command
};

struct SessionArtifacts {
    Bytes capture; // every frame in both directions, in send order
};

/// Drives boot plus the scripted command list through the full wire pipeline:
/// controller frame -> implant decode -> dispatch -> response frames ->
/// controller ingest. Reconnect delays show up on the virtual clock.
inline SessionArtifacts runSession(C2Session& session, implant::ImplantSim& implantSim,
                                   host::VirtualHost& host, const std::vector<ScriptStep>& script,
                                   Rng& rng, bool userClicksLure = true) {
    SessionArtifacts artifacts;

    auto sendToController = [&](const wire::Packet& response) {
        const auto iv = rng.iv();
        wire::Frame frame = wire::encodeMessage(response, session.key(), session.level(),
                                                ByteView{iv.data(), iv.size()});
        const Bytes raw = frame.serialize();
        artifacts.capture.insert(artifacts.capture.end(), raw.begin(), raw.end());
        session.ingest(wire::decodeMessage(frame, session.key()));
    };

    for (const auto& response : implantSim.boot(userClicksLure)) sendToController(response);

    for (const auto& step : script) {
        if (step.clockStepMs > 0) host.clockAdvance(step.clockStepMs);
        if (step.keystrokes) implantSim.keylogCapture(*step.keystrokes);
        if (!step.command) continue;

        // the implant drops the link after installing itself; it comes back
        // after the configured delay
        if (!implantSim.state().connected) {
            host.clockAdvance(implantSim.config().reconnectDelayMs);
            implantSim.reconnectNow();
        }

        const auto iv = rng.iv();
        wire::Frame frame = session.command(*step.command, ByteView{iv.data(), iv.size()});
        const Bytes raw = frame.serialize();
        artifacts.capture.insert(artifacts.capture.end(), raw.begin(), raw.end());

        const wire::Packet delivered = wire::decodeMessage(frame, session.key());
        for (const auto& response : implantSim.handlePacket(delivered))
            sendToController(response);

        if (std::holds_alternative<wire::Disconnect>(*step.command)) break;
    }
    return artifacts;
}

} // namespace bqlab::c2
