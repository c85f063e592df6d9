#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "dht/carriers.hpp"

namespace dht {

// Carrier modification camouflage: policies that decide whether and when a
// carrier opportunity is used, never what is written into it.

struct RateReduction {
    double p = 1.0;
};

struct ParameterStep {
    std::size_t at = 0;  // first carrier ordinal the override applies to
    std::optional<std::uint32_t> stream_count;
    std::optional<std::uint32_t> address_count;
    std::optional<std::uint32_t> max_chunk_count;
    std::optional<std::size_t> min_payload_bytes;
    std::optional<std::size_t> retrans_payload_bits;
};

struct ParameterWalk {
    CarrierConfig base;
    std::vector<ParameterStep> steps;  // strictly increasing `at`
};

struct PatternFit {
    std::array<double, 24> histogram{};  // hour-of-day weights, sum 1
};

struct AnomalyRide {
    AnomalyKind kind = AnomalyKind::Retransmission;
};

using CamouflagePolicy = std::variant<RateReduction, ParameterWalk, PatternFit, AnomalyRide>;

/// Independent Bernoulli(p) acceptance per embedding opportunity.
///
/// Counter-based: the draw for opportunity i is a hash of (seed, i), so both
/// ends can evaluate any opportunity in any order, and for a fixed seed the
/// accepted set shrinks monotonically as p decreases.
class RateGate {
public:
    RateGate(RateReduction policy, std::uint64_t seed);
    bool operator()(std::size_t opportunity) const noexcept;
    double p() const noexcept { return p_; }

private:
    double p_;
    std::uint64_t seed_;
};

std::vector<bool> gate(const RateReduction& policy, std::size_t opportunities, std::uint64_t seed);

CarrierConfig walk(const ParameterWalk& policy, std::size_t packet_ordinal);

/// Hour of day (0..23) for each of `session_count` sessions.
std::vector<int> fit_sessions(const PatternFit& policy, std::size_t session_count, std::uint64_t seed);

/// Intentional anomaly rate that stays within what the network already shows.
double ride(const AnomalyRide& policy, double requested_rate, double observed_natural_rate);

/// Deterministic pacer for anomaly riding: after n opportunities exactly
/// floor(rate * n) have been accepted, so the intentional anomaly count never
/// exceeds rate * n at any packet.
class AnomalyPacer {
public:
    explicit AnomalyPacer(double rate);
    bool operator()(std::size_t opportunity) const noexcept;
    std::size_t accepted_through(std::size_t opportunities) const noexcept;
    double rate() const noexcept { return rate_; }

private:
    double rate_;
};

} // namespace dht
