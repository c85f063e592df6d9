#include "dht/cmc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dht {

namespace {

void check_rate(double r, const char* what) {
    if (!(r >= 0.0 && r <= 1.0)) throw Error(ErrorCode::InvalidArgument, std::string(what) + " must be in [0,1]");
}

} // namespace

RateGate::RateGate(RateReduction policy, std::uint64_t seed) : p_(policy.p), seed_(seed) {
    check_rate(p_, "rate reduction p");
}

bool RateGate::operator()(std::size_t opportunity) const noexcept {
    return unit_interval(derive_seed(seed_, opportunity)) < p_;
}

std::vector<bool> gate(const RateReduction& policy, std::size_t opportunities, std::uint64_t seed) {
    RateGate g(policy, seed);
    std::vector<bool> out(opportunities);
    for (std::size_t i = 0; i < opportunities; ++i) out[i] = g(i);
    return out;
}

CarrierConfig walk(const ParameterWalk& policy, std::size_t packet_ordinal) {
    for (std::size_t i = 1; i < policy.steps.size(); ++i) {
        if (policy.steps[i].at <= policy.steps[i - 1].at) {
            throw Error(ErrorCode::InvalidArgument, "parameter walk switch ordinals must increase");
        }
    }
    CarrierConfig cfg = policy.base;
    for (const auto& step : policy.steps) {
        if (step.at > packet_ordinal) break;
        if (step.stream_count) cfg.stream_count = *step.stream_count;
        if (step.address_count) cfg.address_count = *step.address_count;
        if (step.max_chunk_count) cfg.max_chunk_count = *step.max_chunk_count;
        if (step.min_payload_bytes) cfg.min_payload_bytes = *step.min_payload_bytes;
        if (step.retrans_payload_bits) cfg.retrans_payload_bits = *step.retrans_payload_bits;
    }
    return cfg;
}

std::vector<int> fit_sessions(const PatternFit& policy, std::size_t session_count, std::uint64_t seed) {
    const auto& h = policy.histogram;
    if (std::any_of(h.begin(), h.end(), [](double w) { return !(w >= 0.0); })) {
        throw Error(ErrorCode::InvalidArgument, "histogram weights must be non-negative");
    }
    const double total = std::accumulate(h.begin(), h.end(), 0.0);
    if (total == 0.0) throw Error(ErrorCode::DegenerateHistogram, "all hour weights are zero");
    if (std::abs(total - 1.0) > 1e-9) {
        throw Error(ErrorCode::InvalidArgument, "histogram must sum to 1");
    }
    Rng rng(seed);
    std::vector<int> hours(session_count);
    for (auto& hour : hours) hour = static_cast<int>(rng.weighted(h));
    return hours;
}

double ride(const AnomalyRide& /*policy*/, double requested_rate, double observed_natural_rate) {
    check_rate(requested_rate, "requested rate");
    check_rate(observed_natural_rate, "natural rate");
    return std::min(requested_rate, observed_natural_rate);
}

AnomalyPacer::AnomalyPacer(double rate) : rate_(rate) { check_rate(rate, "pacer rate"); }

std::size_t AnomalyPacer::accepted_through(std::size_t opportunities) const noexcept {
    return static_cast<std::size_t>(std::floor(rate_ * static_cast<double>(opportunities)));
}

bool AnomalyPacer::operator()(std::size_t opportunity) const noexcept {
    return accepted_through(opportunity + 1) > accepted_through(opportunity);
}

} // namespace dht
