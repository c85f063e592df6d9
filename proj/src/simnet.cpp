#include "dht/simnet.hpp"

#include <algorithm>
#include <string>

namespace dht {

namespace {

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

} // namespace

void NetworkConfig::validate() const {
    if (!is_probability(loss_probability)) {
        throw Error(ErrorCode::InvalidArgument, "loss_probability must be in [0,1]");
    }
    if (!is_probability(natural_retransmission_rate) || !is_probability(natural_padding_rate)) {
        throw Error(ErrorCode::InvalidArgument, "natural anomaly rates must be in [0,1]");
    }
    if (reorder_window < 0 || base_delay < 0) {
        throw Error(ErrorCode::InvalidArgument, "delays must be non-negative");
    }
}

Network::Network(NetworkConfig config) : config_(config) { config_.validate(); }

FlowId Network::open_flow(HostId src, HostId dst, CarrierProtocolTag protocol,
                          std::uint32_t stream_count, std::uint32_t address_count) {
    if (stream_count < 1 || address_count < 1) {
        throw Error(ErrorCode::InvalidArgument, "stream and address counts must be >= 1");
    }
    FlowId id{static_cast<std::uint32_t>(flows_.size())};
    flows_.push_back(Flow{id, src, dst, protocol, stream_count, address_count});
    flow_rngs_.emplace_back(derive_seed(config_.seed, id.value));
    severed_.push_back(false);
    return id;
}

const Flow& Network::flow(FlowId id) const {
    if (id.value >= flows_.size()) {
        throw Error(ErrorCode::UnknownFlow, "flow " + std::to_string(id.value));
    }
    return flows_[id.value];
}

SendRecord Network::send(FlowId id, OvertPacket packet) {
    flow(id);
    if (packet.flow != id) {
        throw Error(ErrorCode::InvalidArgument, "packet tagged for a different flow");
    }
    Rng& rng = flow_rngs_[id.value];
    // Both draws happen for every packet so the stream position depends only
    // on how many packets the flow has sent.
    const bool lost = rng.uniform() < config_.loss_probability;
    const Tick jitter = static_cast<Tick>(rng.below(static_cast<std::uint64_t>(config_.reorder_window) + 1));

    SendRecord rec;
    rec.sequence = sent_++;
    rec.flow = id;
    rec.send_time = packet.send_time;
    rec.delivery_time = packet.send_time + config_.base_delay + jitter;
    rec.dropped = lost || severed_[id.value];
    if (rec.dropped) {
        ++dropped_;
    } else {
        latest_ = std::max(latest_, rec.delivery_time);
        queue_.push(Pending{rec.delivery_time, id, rec.sequence, std::move(packet)});
    }
    return rec;
}

void Network::sever(FlowId id) {
    flow(id);
    severed_[id.value] = true;
}

std::vector<Delivery> Network::advance(Tick until) {
    if (until < clock_) {
        throw Error(ErrorCode::ClockRegression, "advance(" + std::to_string(until) +
                                                    ") before clock " + std::to_string(clock_));
    }
    clock_ = until;
    std::vector<Delivery> out;
    while (!queue_.empty() && queue_.top().delivery_time <= until) {
        // priority_queue::top is const; the element is popped right after.
        auto& top = const_cast<Pending&>(queue_.top());
        out.push_back(Delivery{std::move(top.packet), top.delivery_time, top.sequence});
        queue_.pop();
    }
    delivered_ += out.size();
    return out;
}

std::vector<Delivery> Network::drain() {
    if (queue_.empty()) return {};
    return advance(std::max(clock_, latest_));
}

// ---------------------------------------------------------------------------

void TrafficProfile::validate() const {
    if (payload_min > payload_max) {
        throw Error(ErrorCode::InvalidArgument, "payload_min exceeds payload_max");
    }
    if (!is_probability(retransmission_rate) || !is_probability(padding_anomaly_rate)) {
        throw Error(ErrorCode::InvalidArgument, "traffic anomaly rates must be in [0,1]");
    }
}

OvertSource::OvertSource(const Flow& flow, TrafficProfile profile, std::uint64_t seed)
    : flow_(flow), profile_(std::move(profile)), rng_(seed) {
    profile_.validate();
    if (profile_.stream_weights.size() > flow_.stream_count ||
        profile_.address_weights.size() > flow_.address_count) {
        throw Error(ErrorCode::InvalidArgument, "traffic weights exceed the flow's stream/address count");
    }
}

OvertPacket OvertSource::next(Tick send_time) {
    OvertPacket p;
    p.flow = flow_.id;
    p.send_time = send_time;
    p.protocol = flow_.protocol;
    p.payload_len = profile_.payload_min +
                    rng_.below(profile_.payload_max - profile_.payload_min + 1);
    if (!profile_.stream_weights.empty()) {
        p.stream.value = static_cast<std::uint32_t>(rng_.weighted(profile_.stream_weights));
    }
    if (!profile_.address_weights.empty()) {
        p.dest_address.value = static_cast<std::uint32_t>(rng_.weighted(profile_.address_weights));
    }
    if (!profile_.chunk_weights.empty()) {
        p.chunk_count = static_cast<std::uint32_t>(rng_.weighted(profile_.chunk_weights)) + 1;
    }
    p.retransmitted = rng_.bernoulli(profile_.retransmission_rate);
    const bool anomalous_padding = rng_.bernoulli(profile_.padding_anomaly_rate);
    if (p.payload_len < profile_.min_payload_bytes) {
        p.padding.assign(profile_.min_payload_bytes - p.payload_len, 0);
        if (anomalous_padding) {
            for (auto& b : p.padding) b = static_cast<std::uint8_t>(rng_.below(256));
            p.padding.front() = static_cast<std::uint8_t>(1 + rng_.below(255));
        }
    }
    return p;
}

TrafficProfile with_natural_rates(TrafficProfile profile, const NetworkConfig& config) {
    profile.retransmission_rate = config.natural_retransmission_rate;
    profile.padding_anomaly_rate = config.natural_padding_rate;
    return profile;
}

} // namespace dht
