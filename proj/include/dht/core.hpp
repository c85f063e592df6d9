#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dht {

enum class ErrorCode {
    InvalidArgument,
    NonOctetLength,
    Underflow,
    UnknownFlow,
    ClockRegression,
    NoCapacity,
    NotACarrier,
    PlanMismatch,
    MissingFragment,
    OrderAmbiguity,
    ScheduleExhausted,
    DegenerateHistogram,
    UpperBitsExhausted,
    DegenerateExpected,
    ScenarioMismatch,
    ConfigError,
    IoError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (and tests) can branch on the kind without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what);
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Opaque non-negative identifier. The tag keeps hosts, flows and field
/// indices from being mixed up at compile time.
template <typename Tag>
struct Id {
    std::uint32_t value = 0;
    friend constexpr auto operator<=>(const Id&, const Id&) = default;
};

using HostId = Id<struct HostTag>;
using FlowId = Id<struct FlowTag>;
using StreamIndex = Id<struct StreamTag>;
using AddressIndex = Id<struct AddressTag>;

/// Simulation time. One tick is a millisecond by convention in the shipped
/// scenarios, but nothing in the library depends on that.
using Tick = std::int64_t;

enum class CarrierProtocolTag : std::uint8_t { ARP, TCP, UDP, ICMP };
inline constexpr std::size_t kCarrierProtocolCount = 4;

std::string_view to_string(CarrierProtocolTag tag);
CarrierProtocolTag parse_protocol(std::string_view name);

/// Traffic anomalies that occur naturally and can mask a covert channel.
enum class AnomalyKind { Retransmission, Padding };

std::string_view to_string(AnomalyKind kind);
AnomalyKind parse_anomaly_kind(std::string_view name);

/// Ordered sequence of binary symbols. Stored one symbol per byte; the
/// payloads handled here are small and readability of the codecs matters
/// more than density.
class BitString {
public:
    BitString() = default;
    explicit BitString(std::vector<std::uint8_t> bits);

    /// Parses a string of '0'/'1' characters.
    static BitString from_string(std::string_view text);
    /// `width` bits of `value`, most significant first.
    static BitString from_uint(std::uint64_t value, std::size_t width);

    std::size_t size() const noexcept { return bits_.size(); }
    bool empty() const noexcept { return bits_.empty(); }
    bool operator[](std::size_t i) const { return bits_[i] != 0; }

    void push_back(bool bit) { bits_.push_back(bit ? 1 : 0); }
    void append(const BitString& other);

    BitString slice(std::size_t pos, std::size_t len) const;
    /// Value of the bits read MSB-first. Requires size() <= 64.
    std::uint64_t to_uint() const;
    std::size_t popcount() const noexcept;
    std::string to_string() const;

    friend bool operator==(const BitString&, const BitString&) = default;

private:
    std::vector<std::uint8_t> bits_;
};

BitString operator+(BitString lhs, const BitString& rhs);

BitString bits_from_bytes(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> bytes_from_bits(const BitString& bits);
std::pair<BitString, BitString> take_bits(const BitString& bits, std::size_t n);

std::vector<std::uint8_t> bytes_from_hex(std::string_view hex);
std::string hex_from_bytes(std::span<const std::uint8_t> bytes);

struct Steganogram {
    std::uint32_t id = 0;
    BitString payload;

    friend bool operator==(const Steganogram&, const Steganogram&) = default;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;
/// Independent seed for sub-stream `stream` of a run seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;
/// Uniform double in [0, 1) from the top 53 bits of a 64-bit word.
double unit_interval(std::uint64_t word) noexcept;

/// Seeded generator with platform-independent derived draws (the standard
/// distributions are implementation-defined, the engine is not).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    double uniform() { return unit_interval(engine_()); }
    /// Uniform integer in [0, n). Requires n > 0.
    std::uint64_t below(std::uint64_t n);
    bool bernoulli(double p) { return uniform() < p; }
    /// Index drawn with probability proportional to weights[i].
    std::size_t weighted(std::span<const double> weights);
    BitString bits(std::size_t n);

private:
    std::mt19937_64 engine_;
};

/// Empirical quantile: the smallest sample with at least q of the mass at or
/// below it.
double empirical_quantile(std::vector<double> samples, double q);

} // namespace dht
