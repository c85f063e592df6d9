#include "dht/carriers.hpp"

#include <bit>
#include <string>

namespace dht {

namespace {

std::size_t log2_exact(std::uint32_t v) { return static_cast<std::size_t>(std::countr_zero(v)); }

/// Right zero-fill to `width` bits.
BitString symbol(const BitString& bits, std::size_t take, std::size_t width) {
    BitString s = bits.slice(0, take);
    while (s.size() < width) s.push_back(false);
    return s;
}

[[noreturn]] void not_a_carrier(CarrierMethodId m, const std::string& why) {
    throw Error(ErrorCode::NotACarrier, std::string(to_string(m)) + ": " + why);
}

} // namespace

std::string_view to_string(CarrierMethodId method) {
    switch (method) {
    case CarrierMethodId::MultiHoming: return "MultiHoming";
    case CarrierMethodId::MultiStreaming: return "MultiStreaming";
    case CarrierMethodId::ChunkCount: return "ChunkCount";
    case CarrierMethodId::EthPadding: return "EthPadding";
    case CarrierMethodId::RetransPayload: return "RetransPayload";
    }
    return "?";
}

CarrierMethodId parse_method(std::string_view name) {
    for (auto m : kAllCarrierMethods) {
        if (to_string(m) == name) return m;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown carrier method '" + std::string(name) + "'");
}

void CarrierConfig::validate() const {
    if (!std::has_single_bit(stream_count) || !std::has_single_bit(address_count) ||
        !std::has_single_bit(max_chunk_count)) {
        throw Error(ErrorCode::InvalidArgument, "stream, address and chunk counts must be powers of two");
    }
    if (retrans_payload_bits < 1 || min_payload_bytes < 1) {
        throw Error(ErrorCode::InvalidArgument, "R and P_min must be at least 1");
    }
}

std::size_t capacity(CarrierMethodId method, const CarrierConfig& cfg, const OvertPacket& t) {
    switch (method) {
    case CarrierMethodId::MultiStreaming: return log2_exact(cfg.stream_count);
    case CarrierMethodId::MultiHoming: return log2_exact(cfg.address_count);
    case CarrierMethodId::ChunkCount: return log2_exact(cfg.max_chunk_count);
    case CarrierMethodId::EthPadding:
        if (t.payload_len >= cfg.min_payload_bytes) {
            throw Error(ErrorCode::NoCapacity, "frame payload needs no padding");
        }
        return 8 * (cfg.min_payload_bytes - t.payload_len);
    case CarrierMethodId::RetransPayload:
        if (8 * t.payload_len < cfg.retrans_payload_bits) {
            throw Error(ErrorCode::NoCapacity, "segment payload shorter than R bits");
        }
        return cfg.retrans_payload_bits;
    }
    return 0;
}

std::size_t usable_capacity(CarrierMethodId method, const CarrierConfig& cfg,
                            const OvertPacket& t) noexcept {
    try {
        return capacity(method, cfg, t);
    } catch (const Error&) {
        return 0;
    }
}

bool template_independent(CarrierMethodId method) noexcept {
    return method == CarrierMethodId::MultiStreaming || method == CarrierMethodId::MultiHoming ||
           method == CarrierMethodId::ChunkCount;
}

Embedded embed(CarrierMethodId method, const CarrierConfig& cfg, const BitString& bits,
               const OvertPacket& t) {
    const std::size_t cap = capacity(method, cfg, t);
    if (cap == 0) throw Error(ErrorCode::NoCapacity, std::string(to_string(method)) + " carries 0 bits");

    const std::size_t take = std::min(cap, bits.size());
    const BitString sym = symbol(bits, take, cap);

    Embedded out{t, bits.slice(take, bits.size() - take), take};
    OvertPacket& p = out.packet;
    switch (method) {
    case CarrierMethodId::MultiStreaming:
        p.stream.value = static_cast<std::uint32_t>(sym.to_uint());
        break;
    case CarrierMethodId::MultiHoming:
        p.dest_address.value = static_cast<std::uint32_t>(sym.to_uint());
        break;
    case CarrierMethodId::ChunkCount:
        p.chunk_count = static_cast<std::uint32_t>(sym.to_uint()) + 1;
        break;
    case CarrierMethodId::EthPadding:
        p.padding = bytes_from_bits(sym);
        break;
    case CarrierMethodId::RetransPayload:
        p.retransmitted = true;
        p.payload_bits = sym;
        break;
    }
    return out;
}

BitString extract(CarrierMethodId method, const CarrierConfig& cfg, const OvertPacket& p) {
    switch (method) {
    case CarrierMethodId::MultiStreaming:
        if (p.stream.value >= cfg.stream_count) not_a_carrier(method, "stream index out of range");
        return BitString::from_uint(p.stream.value, log2_exact(cfg.stream_count));
    case CarrierMethodId::MultiHoming:
        if (p.dest_address.value >= cfg.address_count) not_a_carrier(method, "address index out of range");
        return BitString::from_uint(p.dest_address.value, log2_exact(cfg.address_count));
    case CarrierMethodId::ChunkCount:
        if (p.chunk_count < 1 || p.chunk_count > cfg.max_chunk_count) {
            not_a_carrier(method, "chunk count out of range");
        }
        return BitString::from_uint(p.chunk_count - 1, log2_exact(cfg.max_chunk_count));
    case CarrierMethodId::EthPadding:
        if (p.padding.empty() || p.payload_len >= cfg.min_payload_bytes ||
            p.padding.size() != cfg.min_payload_bytes - p.payload_len) {
            not_a_carrier(method, "frame is not padded");
        }
        return bits_from_bytes(p.padding);
    case CarrierMethodId::RetransPayload:
        if (!p.retransmitted || p.payload_bits.size() != cfg.retrans_payload_bits) {
            not_a_carrier(method, "no steganographic retransmission");
        }
        return p.payload_bits;
    }
    return {};
}

bool is_carrier(CarrierMethodId method, const CarrierConfig& cfg, const OvertPacket& packet) noexcept {
    try {
        extract(method, cfg, packet);
        return true;
    } catch (const Error&) {
        return false;
    }
}

} // namespace dht
