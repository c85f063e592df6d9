#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "dht/sgh.hpp"

namespace dht {

enum class OrderingStrategy { PositionalHeader, TimeOrdered, PreAssigned };

std::string_view to_string(OrderingStrategy strategy);
OrderingStrategy parse_strategy(std::string_view name);

struct Fragment {
    std::uint32_t steg_id = 0;
    std::size_t index = 0;  // position in the steganogram; never sent under TimeOrdered
    std::size_t bit_len = 0;
    BitString body;

    friend bool operator==(const Fragment&, const Fragment&) = default;
};

struct Channel {
    FlowId flow;
    CarrierMethodId method;
};

struct ScatterPlan {
    OrderingStrategy strategy = OrderingStrategy::PositionalHeader;
    std::size_t k = 1;
    std::vector<Channel> channels;
    std::map<std::size_t, std::size_t> redundancy;  // fragment index -> replicas; absent means 1
    Tick stagger = 0;  // TimeOrdered only

    std::size_t replicas(std::size_t fragment) const;
    void validate() const;
};

/// One (fragment, replica) transmission and the channel it is sent on.
struct Transmission {
    std::size_t fragment = 0;
    std::size_t replica = 0;
    std::size_t channel = 0;
};

/// Replicas of consecutive fragments go round-robin over the channel list,
/// so the replicas of one fragment always land on distinct channels.
std::vector<Transmission> placement(const ScatterPlan& plan);

/// Sender and receiver shared parameters beyond the plan.
struct ScatterContext {
    CarrierConfig cfg;
    OvertPacket frame;      // cover template for every channel
    Tick epoch = 0;
    Tick interval = 1;      // ticks between opportunities on a channel
    Tick path_delay = 0;    // nominal one-way delay, used to place arrivals in time slots
    /// Optional per-channel agreement (hopping, camouflage, protocol hopping).
    /// Without it a channel uses its own method with `cfg`.
    std::function<CarrierAgreement(std::size_t channel)> agreement;
    /// Optional per-channel cover; defaults to `frame`.
    std::function<CoverSource(std::size_t channel)> cover;

    CarrierAgreement agreement_for(const ScatterPlan& plan, std::size_t channel) const;
    CoverSource cover_for(std::size_t channel) const;
};

/// Fields of the positional header, MSB first.
inline constexpr std::size_t kHeaderIdBits = 16;
inline constexpr std::size_t kHeaderIndexBits = 8;
inline constexpr std::size_t kHeaderCountBits = 8;
inline constexpr std::size_t kHeaderLengthBits = 16;
inline constexpr std::size_t kHeaderBits = kHeaderIdBits + kHeaderIndexBits + kHeaderCountBits + kHeaderLengthBits;

BitString encode_header(const Fragment& fragment, std::size_t k);

struct FragmentHeader {
    std::uint32_t steg_id = 0;
    std::size_t index = 0;
    std::size_t k = 0;
    std::size_t bit_len = 0;
};
FragmentHeader decode_header(const BitString& bits);

/// Front-loaded ceiling split: the first (len mod k) fragments get one extra bit.
std::vector<Fragment> split(const Steganogram& steganogram, std::size_t k);
std::vector<std::size_t> fragment_sizes(std::size_t total_bits, std::size_t k);

/// Number of distinct host-based overt channels between n senders and m receivers.
std::size_t max_channels(std::size_t n, std::size_t m);

struct ChannelSendRecord {
    std::size_t channel = 0;
    std::size_t fragment = 0;
    std::size_t replica = 0;
    Tick first_send = 0;
    std::vector<SendRecord> packets;
};

/// Sends every replica on its channel. Under TimeOrdered the fragment at
/// steganogram position p starts at epoch + p*stagger, so a fragment that
/// starts earlier sits earlier in the steganogram.
std::vector<ChannelSendRecord> scatter_send(const std::vector<Fragment>& fragments, const ScatterPlan& plan,
                                            const ScatterContext& ctx, Network& net,
                                            std::size_t pad_to_opportunities = 0);

struct ReceivedFragment {
    std::size_t channel = 0;
    Tick first_arrival = 0;
    std::optional<std::size_t> index;  // known from header or plan; empty under TimeOrdered
    std::optional<std::uint32_t> steg_id;
    BitString body;  // exact under PositionalHeader/PreAssigned, untrimmed under TimeOrdered
};

/// What the receiver knows beyond the plan.
struct ReceiverKnowledge {
    std::uint32_t steg_id = 0;
    std::size_t total_bits = 0;  // needed by the header-free strategies
};

/// Time slot of an arrival under TimeOrdered (position before dedup).
std::optional<std::size_t> time_slot(Tick first_arrival, const ScatterPlan& plan, const ScatterContext& ctx);

/// Pulls every transmission the plan expects out of the delivered packets.
std::vector<ReceivedFragment> collect_fragments(const std::vector<Delivery>& deliveries, const ScatterPlan& plan,
                                                const ScatterContext& ctx, const ReceiverKnowledge& knowledge);

class MissingFragmentError : public Error {
public:
    explicit MissingFragmentError(std::vector<std::size_t> missing);
    const std::vector<std::size_t>& missing() const noexcept { return missing_; }

private:
    std::vector<std::size_t> missing_;
};

Steganogram reassemble(const std::vector<ReceivedFragment>& received, const ScatterPlan& plan,
                       const ScatterContext& ctx, const ReceiverKnowledge& knowledge);

} // namespace dht
