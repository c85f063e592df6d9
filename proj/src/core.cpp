#include "dht/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace dht {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonOctetLength: return "NonOctetLength";
    case ErrorCode::Underflow: return "Underflow";
    case ErrorCode::UnknownFlow: return "UnknownFlow";
    case ErrorCode::ClockRegression: return "ClockRegression";
    case ErrorCode::NoCapacity: return "NoCapacity";
    case ErrorCode::NotACarrier: return "NotACarrier";
    case ErrorCode::PlanMismatch: return "PlanMismatch";
    case ErrorCode::MissingFragment: return "MissingFragment";
    case ErrorCode::OrderAmbiguity: return "OrderAmbiguity";
    case ErrorCode::ScheduleExhausted: return "ScheduleExhausted";
    case ErrorCode::DegenerateHistogram: return "DegenerateHistogram";
    case ErrorCode::UpperBitsExhausted: return "UpperBitsExhausted";
    case ErrorCode::DegenerateExpected: return "DegenerateExpected";
    case ErrorCode::ScenarioMismatch: return "ScenarioMismatch";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

std::string_view to_string(CarrierProtocolTag tag) {
    switch (tag) {
    case CarrierProtocolTag::ARP: return "ARP";
    case CarrierProtocolTag::TCP: return "TCP";
    case CarrierProtocolTag::UDP: return "UDP";
    case CarrierProtocolTag::ICMP: return "ICMP";
    }
    return "?";
}

CarrierProtocolTag parse_protocol(std::string_view name) {
    for (auto tag : {CarrierProtocolTag::ARP, CarrierProtocolTag::TCP, CarrierProtocolTag::UDP,
                     CarrierProtocolTag::ICMP}) {
        if (to_string(tag) == name) return tag;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown carrier protocol '" + std::string(name) + "'");
}

std::string_view to_string(AnomalyKind kind) {
    return kind == AnomalyKind::Retransmission ? "Retransmission" : "Padding";
}

AnomalyKind parse_anomaly_kind(std::string_view name) {
    if (name == "Retransmission") return AnomalyKind::Retransmission;
    if (name == "Padding") return AnomalyKind::Padding;
    throw Error(ErrorCode::InvalidArgument, "unknown anomaly kind '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// BitString

BitString::BitString(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
    for (auto b : bits_) {
        if (b > 1) throw Error(ErrorCode::InvalidArgument, "bit value out of range");
    }
}

BitString BitString::from_string(std::string_view text) {
    BitString out;
    out.bits_.reserve(text.size());
    for (char c : text) {
        if (c != '0' && c != '1') {
            throw Error(ErrorCode::InvalidArgument, "bit string may contain only '0' and '1'");
        }
        out.bits_.push_back(c == '1' ? 1 : 0);
    }
    return out;
}

BitString BitString::from_uint(std::uint64_t value, std::size_t width) {
    if (width > 64) throw Error(ErrorCode::InvalidArgument, "width exceeds 64 bits");
    BitString out;
    out.bits_.resize(width);
    for (std::size_t i = 0; i < width; ++i) {
        out.bits_[width - 1 - i] = static_cast<std::uint8_t>((value >> i) & 1U);
    }
    return out;
}

void BitString::append(const BitString& other) {
    bits_.insert(bits_.end(), other.bits_.begin(), other.bits_.end());
}

BitString BitString::slice(std::size_t pos, std::size_t len) const {
    if (pos > bits_.size() || len > bits_.size() - pos) {
        throw Error(ErrorCode::Underflow, "slice beyond end of bit string");
    }
    BitString out;
    out.bits_.assign(bits_.begin() + static_cast<std::ptrdiff_t>(pos),
                     bits_.begin() + static_cast<std::ptrdiff_t>(pos + len));
    return out;
}

std::uint64_t BitString::to_uint() const {
    if (bits_.size() > 64) throw Error(ErrorCode::InvalidArgument, "more than 64 bits");
    std::uint64_t v = 0;
    for (auto b : bits_) v = (v << 1) | b;
    return v;
}

std::size_t BitString::popcount() const noexcept {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::string BitString::to_string() const {
    std::string s;
    s.reserve(bits_.size());
    for (auto b : bits_) s.push_back(b ? '1' : '0');
    return s;
}

BitString operator+(BitString lhs, const BitString& rhs) {
    lhs.append(rhs);
    return lhs;
}

BitString bits_from_bytes(std::span<const std::uint8_t> bytes) {
    BitString out;
    for (auto byte : bytes) out.append(BitString::from_uint(byte, 8));
    return out;
}

std::vector<std::uint8_t> bytes_from_bits(const BitString& bits) {
    if (bits.size() % 8 != 0) {
        throw Error(ErrorCode::NonOctetLength,
                    "bit length " + std::to_string(bits.size()) + " is not a multiple of 8");
    }
    std::vector<std::uint8_t> out(bits.size() / 8);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = static_cast<std::uint8_t>(bits.slice(i * 8, 8).to_uint());
    }
    return out;
}

std::pair<BitString, BitString> take_bits(const BitString& bits, std::size_t n) {
    if (n > bits.size()) {
        throw Error(ErrorCode::Underflow, "cannot take " + std::to_string(n) + " of " +
                                              std::to_string(bits.size()) + " bits");
    }
    return {bits.slice(0, n), bits.slice(n, bits.size() - n)};
}

std::vector<std::uint8_t> bytes_from_hex(std::string_view hex) {
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    if (hex.size() % 2 != 0) throw Error(ErrorCode::InvalidArgument, "odd-length hex string");
    std::vector<std::uint8_t> out;
    out.reserve(hex.size() / 2);
    for (std::size_t i = 0; i < hex.size(); i += 2) {
        int hi = nibble(hex[i]);
        int lo = nibble(hex[i + 1]);
        if (hi < 0 || lo < 0) throw Error(ErrorCode::InvalidArgument, "invalid hex digit");
        out.push_back(static_cast<std::uint8_t>(hi * 16 + lo));
    }
    return out;
}

std::string hex_from_bytes(std::span<const std::uint8_t> bytes) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s;
    for (auto b : bytes) {
        s.push_back(digits[b >> 4]);
        s.push_back(digits[b & 0xF]);
    }
    return s;
}

// ---------------------------------------------------------------------------
// Randomness

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

double unit_interval(std::uint64_t word) noexcept {
    return static_cast<double>(word >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "below(0)");
    // Rejection keeps the draw unbiased for any n.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % n;
}

std::size_t Rng::weighted(std::span<const double> weights) {
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (weights.empty() || !(total > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "weights must have positive mass");
    }
    const double u = uniform() * total;
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] > 0.0) last_positive = i;
        acc += weights[i];
        if (u < acc && weights[i] > 0.0) return i;
    }
    return last_positive;
}

BitString Rng::bits(std::size_t n) {
    std::vector<std::uint8_t> out(n);
    for (auto& b : out) b = static_cast<std::uint8_t>(engine_() >> 63);
    return BitString(std::move(out));
}

double empirical_quantile(std::vector<double> samples, double q) {
    if (samples.empty()) throw Error(ErrorCode::InvalidArgument, "quantile of empty sample");
    if (!(q > 0.0 && q <= 1.0)) throw Error(ErrorCode::InvalidArgument, "quantile must be in (0,1]");
    std::sort(samples.begin(), samples.end());
    auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(samples.size())));
    if (rank == 0) rank = 1;
    return samples[rank - 1];
}

} // namespace dht
