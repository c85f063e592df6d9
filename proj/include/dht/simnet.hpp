#pragma once

#include <cstdint>
#include <queue>
#include <vector>

#include "dht/core.hpp"

namespace dht {

struct NetworkConfig {
    std::uint64_t seed = 0;
    double loss_probability = 0.0;
    Tick reorder_window = 0;  // jitter is drawn uniformly from [0, reorder_window]
    Tick base_delay = 0;
    double natural_retransmission_rate = 0.0;
    double natural_padding_rate = 0.0;

    void validate() const;
};

struct Flow {
    FlowId id;
    HostId src;
    HostId dst;
    CarrierProtocolTag protocol = CarrierProtocolTag::TCP;
    std::uint32_t stream_count = 1;
    std::uint32_t address_count = 1;

    bool loopback() const noexcept { return src == dst; }
};

/// One simulated PDU. Overt fields plus every field a carrier codec may use.
struct OvertPacket {
    FlowId flow;
    Tick send_time = 0;
    std::size_t payload_len = 0;
    StreamIndex stream;
    AddressIndex dest_address;
    std::uint32_t chunk_count = 1;
    std::vector<std::uint8_t> padding;
    bool retransmitted = false;
    CarrierProtocolTag protocol = CarrierProtocolTag::TCP;
    BitString payload_bits;  // retransmission carrier only; empty for user-data retransmissions

    /// Bits the frame occupies on the wire, payload plus padding.
    std::size_t wire_bits() const noexcept { return 8 * (payload_len + padding.size()); }

    friend bool operator==(const OvertPacket&, const OvertPacket&) = default;
};

struct SendRecord {
    std::uint64_t sequence = 0;
    FlowId flow;
    Tick send_time = 0;
    Tick delivery_time = 0;
    bool dropped = false;
};

struct Delivery {
    OvertPacket packet;
    Tick delivered_at = 0;
    std::uint64_t sequence = 0;
};

/// Deterministic discrete-event packet network.
///
/// Each flow owns its own generator seeded from (config seed, flow id), so
/// opening another flow never perturbs the loss and jitter pattern of the
/// existing ones. Deliveries with equal times are ordered by flow id and
/// then by global send order.
class Network {
public:
    explicit Network(NetworkConfig config);

    const NetworkConfig& config() const noexcept { return config_; }

    FlowId open_flow(HostId src, HostId dst, CarrierProtocolTag protocol,
                     std::uint32_t stream_count = 1, std::uint32_t address_count = 1);
    const Flow& flow(FlowId id) const;
    const std::vector<Flow>& flows() const noexcept { return flows_; }

    SendRecord send(FlowId flow, OvertPacket packet);
    /// All later packets on the flow are dropped, as if the path went down.
    void sever(FlowId flow);

    std::vector<Delivery> advance(Tick until);
    /// Advances to the last pending delivery time.
    std::vector<Delivery> drain();

    Tick now() const noexcept { return clock_; }
    std::size_t pending() const noexcept { return queue_.size(); }
    std::uint64_t sent_count() const noexcept { return sent_; }
    std::uint64_t dropped_count() const noexcept { return dropped_; }
    std::uint64_t delivered_count() const noexcept { return delivered_; }

private:
    struct Pending {
        Tick delivery_time;
        FlowId flow;
        std::uint64_t sequence;
        OvertPacket packet;
    };
    struct Later {
        bool operator()(const Pending& a, const Pending& b) const noexcept {
            if (a.delivery_time != b.delivery_time) return a.delivery_time > b.delivery_time;
            if (a.flow != b.flow) return a.flow > b.flow;
            return a.sequence > b.sequence;
        }
    };

    NetworkConfig config_;
    std::vector<Flow> flows_;
    std::vector<Rng> flow_rngs_;
    std::vector<bool> severed_;
    std::priority_queue<Pending, std::vector<Pending>, Later> queue_;
    Tick clock_ = 0;
    Tick latest_ = 0;
    std::uint64_t sent_ = 0;
    std::uint64_t dropped_ = 0;
    std::uint64_t delivered_ = 0;
};

/// Distribution of clean overt traffic on a flow.
struct TrafficProfile {
    std::size_t payload_min = 20;
    std::size_t payload_max = 20;
    std::vector<double> stream_weights;   // empty: stream 0 always
    std::vector<double> address_weights;  // empty: address 0 always
    std::vector<double> chunk_weights;    // index v gives chunk_count v + 1; empty: 1 chunk
    double retransmission_rate = 0.0;
    double padding_anomaly_rate = 0.0;    // short frames whose padding is non-zero
    std::size_t min_payload_bytes = 46;   // frames shorter than this are padded

    void validate() const;
};

/// Seeded generator of clean packets for one flow.
class OvertSource {
public:
    OvertSource(const Flow& flow, TrafficProfile profile, std::uint64_t seed);

    OvertPacket next(Tick send_time);

private:
    Flow flow_;
    TrafficProfile profile_;
    Rng rng_;
};

/// Convenience: profile that matches the network's natural anomaly rates.
TrafficProfile with_natural_rates(TrafficProfile profile, const NetworkConfig& config);

} // namespace dht
