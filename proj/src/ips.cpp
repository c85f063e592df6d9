#include "dht/ips.hpp"

#include <sodium.h>

#include <mutex>

namespace dht {

namespace {

void ensure_sodium() {
    static std::once_flag once;
    std::call_once(once, [] {
        if (sodium_init() < 0) throw Error(ErrorCode::InvalidArgument, "libsodium failed to initialise");
    });
}

} // namespace

HopKey::HopKey(std::vector<std::uint8_t> secret) : secret_(std::move(secret)) {
    if (secret_.empty()) throw Error(ErrorCode::InvalidArgument, "hop key must not be empty");
    ensure_sodium();
    static_assert(crypto_shorthash_KEYBYTES == 16);
    crypto_generichash(prf_key_.data(), prf_key_.size(), secret_.data(), secret_.size(), nullptr, 0);
}

HopKey HopKey::from_hex(std::string_view hex) { return HopKey(bytes_from_hex(hex)); }

CarrierProtocolTag carrier_protocol_at(const HopKey& key, std::uint64_t ordinal) {
    std::array<std::uint8_t, 8> msg{};
    for (std::size_t i = 0; i < 8; ++i) msg[i] = static_cast<std::uint8_t>(ordinal >> (8 * i));
    std::array<std::uint8_t, crypto_shorthash_BYTES> out{};
    crypto_shorthash(out.data(), msg.data(), msg.size(), key.prf_key().data());
    return static_cast<CarrierProtocolTag>(out[0] & 0x3);
}

Embedded ips_embed(const BitString& bits, const HopKey& key, std::uint64_t ordinal,
                   const OvertPacket& frame_template, const CarrierConfig& cfg) {
    Embedded e = embed(CarrierMethodId::EthPadding, cfg, bits, frame_template);
    e.packet.protocol = carrier_protocol_at(key, ordinal);
    return e;
}

CarrierProtocolTag decoy_protocol(const HopKey& key, std::uint64_t ordinal, CarrierProtocolTag preferred) {
    const auto expected = carrier_protocol_at(key, ordinal);
    if (preferred != expected) return preferred;
    return static_cast<CarrierProtocolTag>((static_cast<unsigned>(expected) + 1) % kCarrierProtocolCount);
}

IpsExtractor::IpsExtractor(HopKey key, CarrierConfig cfg) : key_(std::move(key)), cfg_(cfg) {}

std::optional<BitString> IpsExtractor::offer(const OvertPacket& frame) {
    if (frame.protocol != carrier_protocol_at(key_, counter_)) return std::nullopt;
    if (!is_carrier(CarrierMethodId::EthPadding, cfg_, frame)) return std::nullopt;
    ++counter_;
    return extract(CarrierMethodId::EthPadding, cfg_, frame);
}

} // namespace dht
