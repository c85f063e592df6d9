#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "dht/carriers.hpp"
#include "dht/ips.hpp"
#include "dht/simnet.hpp"

namespace dht {

struct HopEntry {
    CarrierMethodId method;
    std::size_t packet_budget = 1;
};

/// Pre-shared rotation of carrier methods within one flow. Budgets count
/// steganogram-carrying packets, not ticks.
struct HoppingSchedule {
    std::vector<HopEntry> entries;
    bool cyclic = false;

    /// A schedule that always answers `method`; equivalent to plain embedding.
    static HoppingSchedule fixed(CarrierMethodId method);

    void validate() const;
    std::size_t total_budget() const noexcept;
};

CarrierMethodId method_at(const HoppingSchedule& schedule, std::size_t packet_ordinal);

/// Everything both ends of one carrier flow agree on in advance.
///
/// `accept` gates embedding opportunities (rate reduction, anomaly pacing);
/// `config_at` varies the carrier parameters by carrier ordinal (parameter
/// walk); `hop_key` switches on carrier-protocol hopping, in which case the
/// receiver recognises carriers by their protocol tag instead of the gate.
struct CarrierAgreement {
    HoppingSchedule schedule;
    CarrierConfig cfg;
    std::function<bool(std::size_t opportunity)> accept;
    std::function<CarrierConfig(std::size_t carrier_ordinal)> config_at;
    std::optional<HopKey> hop_key;

    CarrierConfig config_for(std::size_t carrier_ordinal) const;
    bool accepts(std::size_t opportunity) const;
};

/// Clean packet for the given opportunity on a flow.
using CoverSource = std::function<OvertPacket(std::size_t opportunity)>;

/// Cover that repeats one template.
CoverSource constant_cover(OvertPacket frame);

/// Sender side of a carrier flow. Opportunity i is sent at start + i*interval.
/// Every write() is one transmission and starts on a fresh carrier packet.
class CarrierWriter {
public:
    CarrierWriter(Network& net, FlowId flow, CarrierAgreement agreement, CoverSource cover,
                  Tick start, Tick interval);

    std::vector<SendRecord> write(const BitString& bits);
    /// Sends clean packets until `opportunities` opportunities have been used.
    std::vector<SendRecord> pad_to(std::size_t opportunities);

    std::size_t opportunities() const noexcept { return opportunity_; }
    std::size_t carriers() const noexcept { return carrier_; }
    Tick next_time() const noexcept;

    /// Consecutive opportunities without capacity after which write() gives up.
    static constexpr std::size_t kIdleLimit = 1u << 16;

private:
    SendRecord send_cover(OvertPacket packet);

    Network* net_;
    FlowId flow_;
    CarrierAgreement agreement_;
    CoverSource cover_;
    Tick start_;
    Tick interval_;
    std::size_t opportunity_ = 0;
    std::size_t carrier_ = 0;
};

/// Receiver side of a carrier flow. Packets are sorted by send time, which
/// stands in for the transport sequence number. Packets that do not read as
/// the scheduled method are skipped without advancing the carrier ordinal.
class CarrierReader {
public:
    CarrierReader(std::vector<OvertPacket> packets, CarrierAgreement agreement, Tick start, Tick interval);

    /// Next n bits, continuing inside the current packet. nullopt if the
    /// packets run out first.
    std::optional<BitString> read(std::size_t n);
    /// Discards what is left of the current carrier packet.
    void align();
    BitString read_all();
    bool exhausted();
    std::size_t carriers_read() const noexcept { return carrier_; }

private:
    bool fill();

    std::vector<OvertPacket> packets_;
    CarrierAgreement agreement_;
    Tick start_;
    Tick interval_;
    std::size_t next_packet_ = 0;
    std::size_t carrier_ = 0;
    BitString buffer_;
};

std::vector<SendRecord> hop_encode(const BitString& bits, const HoppingSchedule& schedule, FlowId flow,
                                   const CarrierConfig& cfg, Network& net, CoverSource cover,
                                   Tick start = 0, Tick interval = 1);

/// Concatenated extraction from `packets` in the given order. With
/// `bit_count`, reading stops there and the zero-fill of the last symbol is
/// dropped.
BitString hop_decode(const std::vector<OvertPacket>& packets, const HoppingSchedule& schedule,
                     const CarrierConfig& cfg, std::optional<std::size_t> bit_count = std::nullopt);

struct CarrierSlot {
    std::size_t carrier_ordinal = 0;
    CarrierMethodId method;
    std::size_t first_bit = 0;
    std::size_t bit_count = 0;
};

/// Which steganogram bits each carrier packet holds, given the per-carrier
/// capacities implied by the schedule and the carrier templates.
std::vector<CarrierSlot> bit_layout(const HoppingSchedule& schedule, const CarrierConfig& cfg,
                                    const std::vector<OvertPacket>& carrier_packets, std::size_t total_bits);

/// Bit positions carried by packets scheduled with `method`.
std::vector<std::size_t> positions_for_method(const std::vector<CarrierSlot>& layout, CarrierMethodId method);

/// What an extractor that only knows one method reads from each packet;
/// nullopt where the packet is not readable as that method.
std::vector<std::optional<BitString>> single_method_reads(const std::vector<OvertPacket>& packets,
                                                          CarrierMethodId method, const CarrierConfig& cfg);

} // namespace dht
