#include "dht/mls.hpp"

#include <algorithm>

namespace dht {

void MlsStack::validate() const {
    upper.validate();
    if (slot_ticks < 1) throw Error(ErrorCode::InvalidArgument, "slot_ticks must be >= 1");
    for (const auto& e : upper.entries) {
        if (e.method != CarrierMethodId::EthPadding && e.method != CarrierMethodId::RetransPayload) {
            throw Error(ErrorCode::InvalidArgument,
                        std::string(to_string(e.method)) + " cannot tell carriers from cover in an MLS stack");
        }
    }
}

std::optional<std::size_t> MlsStack::slot_of(Tick t) const noexcept {
    if (t < epoch || slot_ticks < 1) return std::nullopt;
    const auto slot = static_cast<std::size_t>((t - epoch) / slot_ticks);
    if (slot >= lower_bits) return std::nullopt;
    return slot;
}

MlsSendResult mls_encode(const BitString& upper_bits, const BitString& lower_bits, const MlsStack& stack,
                         const CarrierConfig& cfg, FlowId flow, Network& net, const OvertPacket& stego_template,
                         const std::optional<OvertPacket>& cover_template, std::size_t cover_per_slot) {
    stack.validate();
    if (lower_bits.size() != stack.lower_bits) {
        throw Error(ErrorCode::InvalidArgument, "lower bit count differs from the stack");
    }
    if (cover_per_slot > 0) {
        if (!cover_template) throw Error(ErrorCode::InvalidArgument, "cover_per_slot needs a cover template");
        for (const auto& e : stack.upper.entries) {
            if (is_carrier(e.method, cfg, *cover_template)) {
                throw Error(ErrorCode::InvalidArgument, "cover frame reads as an upper carrier");
            }
        }
    }

    MlsSendResult result;
    BitString rest = upper_bits;
    const Tick guard = stack.slot_ticks / 4;
    for (std::size_t i = 0; i < lower_bits.size(); ++i) {
        const Tick slot_start = stack.epoch + static_cast<Tick>(i) * stack.slot_ticks;
        std::vector<std::pair<Tick, OvertPacket>> slot_packets;
        for (std::size_t c = 0; c < cover_per_slot; ++c) {
            OvertPacket p = *cover_template;
            p.send_time = slot_start + static_cast<Tick>(c) * stack.slot_ticks / static_cast<Tick>(cover_per_slot);
            slot_packets.emplace_back(p.send_time, std::move(p));
        }
        if (lower_bits[i]) {
            if (rest.empty()) {
                throw Error(ErrorCode::UpperBitsExhausted, "no upper bits left for slot " + std::to_string(i));
            }
            const CarrierMethodId method = method_at(stack.upper, result.stego_packets);
            Embedded e = embed(method, cfg, rest, stego_template);
            result.upper_consumed += e.consumed;
            rest = std::move(e.remaining);
            e.packet.send_time = slot_start + guard;
            slot_packets.emplace_back(e.packet.send_time, std::move(e.packet));
            ++result.stego_packets;
        }
        std::stable_sort(slot_packets.begin(), slot_packets.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        for (auto& [t, p] : slot_packets) {
            p.flow = flow;
            result.records.push_back(net.send(flow, std::move(p)));
        }
    }
    return result;
}

MlsDecoded mls_decode(const std::vector<Delivery>& deliveries, const MlsStack& stack, const CarrierConfig& cfg) {
    stack.validate();
    MlsDecoded out;
    std::vector<std::uint8_t> lower(stack.lower_bits, 0);
    const std::size_t budget = stack.upper.total_budget();
    for (const auto& d : deliveries) {
        const auto slot = stack.slot_of(d.delivered_at - stack.path_delay);
        if (!slot) continue;
        if (!stack.upper.cyclic && out.upper_packets >= budget) break;
        const CarrierMethodId method = method_at(stack.upper, out.upper_packets);
        if (!is_carrier(method, cfg, d.packet)) continue;
        out.upper.append(extract(method, cfg, d.packet));
        ++out.upper_packets;
        lower[*slot] = 1;
    }
    for (auto b : lower) out.lower.push_back(b);
    return out;
}

MlsBandwidths mls_bandwidths(const std::vector<Delivery>& deliveries, const MlsStack& stack,
                             const MlsDecoded& decoded) {
    MlsBandwidths bw;
    const Tick horizon = stack.horizon();
    if (horizon <= 0) return bw;
    std::size_t wire = 0;
    for (const auto& d : deliveries) {
        if (stack.slot_of(d.delivered_at - stack.path_delay)) wire += d.packet.wire_bits();
    }
    const auto h = static_cast<double>(horizon);
    bw.overt = static_cast<double>(wire) / h;
    bw.upper = static_cast<double>(decoded.upper.size()) / h;
    bw.lower = static_cast<double>(decoded.lower.popcount()) / h;
    return bw;
}

} // namespace dht
