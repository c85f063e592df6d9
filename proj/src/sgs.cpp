#include "dht/sgs.hpp"

#include <algorithm>
#include <set>
#include <string>

namespace dht {

namespace {

[[noreturn]] void mismatch(const std::string& why) { throw Error(ErrorCode::PlanMismatch, why); }

std::string join(const std::vector<std::size_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(v[i]);
    }
    return s;
}

} // namespace

std::string_view to_string(OrderingStrategy strategy) {
    switch (strategy) {
    case OrderingStrategy::PositionalHeader: return "PositionalHeader";
    case OrderingStrategy::TimeOrdered: return "TimeOrdered";
    case OrderingStrategy::PreAssigned: return "PreAssigned";
    }
    return "?";
}

OrderingStrategy parse_strategy(std::string_view name) {
    for (auto s : {OrderingStrategy::PositionalHeader, OrderingStrategy::TimeOrdered, OrderingStrategy::PreAssigned}) {
        if (to_string(s) == name) return s;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown ordering strategy '" + std::string(name) + "'");
}

std::size_t ScatterPlan::replicas(std::size_t fragment) const {
    auto it = redundancy.find(fragment);
    return it == redundancy.end() ? 1 : it->second;
}

void ScatterPlan::validate() const {
    if (k < 1) mismatch("k must be >= 1");
    if (k > 255) mismatch("k must fit the 8-bit header field");
    if (channels.empty()) mismatch("plan has no channels");
    std::set<FlowId> flows;
    for (const auto& c : channels) {
        if (!flows.insert(c.flow).second) mismatch("two channels share flow " + std::to_string(c.flow.value));
    }
    std::size_t transmissions = 0;
    for (std::size_t i = 0; i < k; ++i) transmissions += replicas(i);
    for (const auto& [index, count] : redundancy) {
        if (index >= k) mismatch("redundancy for fragment " + std::to_string(index) + " beyond k");
        if (count < 1) mismatch("replica count must be >= 1");
        if (count > channels.size()) mismatch("more replicas than channels");
    }
    switch (strategy) {
    case OrderingStrategy::PreAssigned:
        if (channels.size() != k) mismatch("PreAssigned needs exactly k channels");
        if (transmissions != k) mismatch("PreAssigned does not replicate fragments");
        break;
    case OrderingStrategy::TimeOrdered:
        if (stagger < 1) mismatch("TimeOrdered needs a positive stagger");
        if (transmissions > channels.size()) mismatch("TimeOrdered sends at most one transmission per channel");
        break;
    case OrderingStrategy::PositionalHeader:
        break;
    }
}

std::vector<Transmission> placement(const ScatterPlan& plan) {
    plan.validate();
    std::vector<Transmission> out;
    std::size_t cursor = 0;
    for (std::size_t i = 0; i < plan.k; ++i) {
        for (std::size_t r = 0; r < plan.replicas(i); ++r) {
            out.push_back(Transmission{i, r, cursor % plan.channels.size()});
            ++cursor;
        }
    }
    return out;
}

CarrierAgreement ScatterContext::agreement_for(const ScatterPlan& plan, std::size_t channel) const {
    if (agreement) return agreement(channel);
    return CarrierAgreement{HoppingSchedule::fixed(plan.channels.at(channel).method), cfg, {}, {}, {}};
}

CoverSource ScatterContext::cover_for(std::size_t channel) const {
    if (cover) return cover(channel);
    return constant_cover(frame);
}

// ---------------------------------------------------------------------------
// Header, split

BitString encode_header(const Fragment& f, std::size_t k) {
    if (f.steg_id > 0xFFFF) throw Error(ErrorCode::InvalidArgument, "steganogram id exceeds 16 bits");
    if (f.index > 0xFF || k > 0xFF) throw Error(ErrorCode::InvalidArgument, "index/k exceed 8 bits");
    if (f.bit_len > 0xFFFF) throw Error(ErrorCode::InvalidArgument, "fragment longer than 65535 bits");
    return BitString::from_uint(f.steg_id, kHeaderIdBits) + BitString::from_uint(f.index, kHeaderIndexBits) +
           BitString::from_uint(k, kHeaderCountBits) + BitString::from_uint(f.bit_len, kHeaderLengthBits);
}

FragmentHeader decode_header(const BitString& bits) {
    if (bits.size() != kHeaderBits) throw Error(ErrorCode::InvalidArgument, "header must be 48 bits");
    FragmentHeader h;
    std::size_t pos = 0;
    auto field = [&](std::size_t width) {
        auto v = bits.slice(pos, width).to_uint();
        pos += width;
        return v;
    };
    h.steg_id = static_cast<std::uint32_t>(field(kHeaderIdBits));
    h.index = field(kHeaderIndexBits);
    h.k = field(kHeaderCountBits);
    h.bit_len = field(kHeaderLengthBits);
    return h;
}

std::vector<std::size_t> fragment_sizes(std::size_t total_bits, std::size_t k) {
    if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
    std::vector<std::size_t> sizes(k, total_bits / k);
    for (std::size_t i = 0; i < total_bits % k; ++i) ++sizes[i];
    return sizes;
}

std::vector<Fragment> split(const Steganogram& s, std::size_t k) {
    const auto sizes = fragment_sizes(s.payload.size(), k);
    std::vector<Fragment> out;
    out.reserve(k);
    std::size_t pos = 0;
    for (std::size_t i = 0; i < k; ++i) {
        out.push_back(Fragment{s.id, i, sizes[i], s.payload.slice(pos, sizes[i])});
        pos += sizes[i];
    }
    return out;
}

std::size_t max_channels(std::size_t n, std::size_t m) {
    if (n < 1 || m < 1) throw Error(ErrorCode::InvalidArgument, "need at least one sender and one receiver host");
    return n * m;
}

// ---------------------------------------------------------------------------
// Sending

std::vector<ChannelSendRecord> scatter_send(const std::vector<Fragment>& fragments, const ScatterPlan& plan,
                                            const ScatterContext& ctx, Network& net,
                                            std::size_t pad_to_opportunities) {
    const auto transmissions = placement(plan);
    if (fragments.size() != plan.k) mismatch("plan expects " + std::to_string(plan.k) + " fragments");
    for (std::size_t i = 0; i < fragments.size(); ++i) {
        if (fragments[i].index != i || fragments[i].body.size() != fragments[i].bit_len) {
            mismatch("fragment " + std::to_string(i) + " is out of place or inconsistent");
        }
    }
    if (plan.strategy == OrderingStrategy::TimeOrdered && plan.stagger <= net.config().reorder_window) {
        mismatch("stagger must exceed the network's reorder window");
    }

    std::vector<ChannelSendRecord> records;
    for (std::size_t ch = 0; ch < plan.channels.size(); ++ch) {
        std::vector<Transmission> mine;
        for (const auto& t : transmissions) {
            if (t.channel == ch) mine.push_back(t);
        }
        if (mine.empty() && plan.strategy == OrderingStrategy::TimeOrdered) continue;  // silent channel

        Tick start = ctx.epoch;
        if (plan.strategy == OrderingStrategy::TimeOrdered) {
            start = ctx.epoch + static_cast<Tick>(mine.front().fragment) * plan.stagger;
        }
        CarrierWriter writer(net, plan.channels[ch].flow, ctx.agreement_for(plan, ch), ctx.cover_for(ch), start,
                             ctx.interval);
        for (const auto& t : mine) {
            const Fragment& f = fragments[t.fragment];
            ChannelSendRecord rec{ch, t.fragment, t.replica, writer.next_time(), {}};
            const BitString bits =
                plan.strategy == OrderingStrategy::PositionalHeader ? encode_header(f, plan.k) + f.body : f.body;
            rec.packets = writer.write(bits);
            records.push_back(std::move(rec));
        }
        writer.pad_to(pad_to_opportunities);
    }
    return records;
}

// ---------------------------------------------------------------------------
// Receiving

std::optional<std::size_t> time_slot(Tick first_arrival, const ScatterPlan& plan, const ScatterContext& ctx) {
    if (plan.stagger < 1) return std::nullopt;
    const Tick offset = first_arrival - ctx.path_delay - ctx.epoch;
    if (offset < 0) return std::nullopt;
    const auto slot = static_cast<std::size_t>(offset / plan.stagger);
    if (slot >= plan.k) return std::nullopt;
    return slot;
}

std::vector<ReceivedFragment> collect_fragments(const std::vector<Delivery>& deliveries, const ScatterPlan& plan,
                                                const ScatterContext& ctx, const ReceiverKnowledge& knowledge) {
    const auto transmissions = placement(plan);
    const auto sizes = fragment_sizes(knowledge.total_bits, plan.k);

    std::map<FlowId, std::vector<OvertPacket>> by_flow;
    std::map<FlowId, Tick> first_arrival;
    for (const auto& d : deliveries) {
        by_flow[d.packet.flow].push_back(d.packet);
        auto [it, fresh] = first_arrival.emplace(d.packet.flow, d.delivered_at);
        if (!fresh) it->second = std::min(it->second, d.delivered_at);
    }

    std::vector<ReceivedFragment> out;
    for (std::size_t ch = 0; ch < plan.channels.size(); ++ch) {
        const FlowId flow = plan.channels[ch].flow;
        const auto packets_it = by_flow.find(flow);
        const bool heard = packets_it != by_flow.end();
        std::vector<OvertPacket> packets = heard ? packets_it->second : std::vector<OvertPacket>{};
        const Tick arrival = heard ? first_arrival[flow] : 0;

        switch (plan.strategy) {
        case OrderingStrategy::PositionalHeader: {
            const auto expected = static_cast<std::size_t>(std::count_if(
                transmissions.begin(), transmissions.end(), [&](const Transmission& t) { return t.channel == ch; }));
            CarrierReader reader(std::move(packets), ctx.agreement_for(plan, ch), ctx.epoch, ctx.interval);
            for (std::size_t t = 0; t < expected; ++t) {
                auto header_bits = reader.read(kHeaderBits);
                if (!header_bits) break;
                const FragmentHeader h = decode_header(*header_bits);
                if (h.k != plan.k || h.index >= plan.k || h.steg_id != (knowledge.steg_id & 0xFFFF)) break;
                auto body = reader.read(h.bit_len);
                if (!body) break;
                reader.align();
                out.push_back(ReceivedFragment{ch, arrival, h.index, h.steg_id, std::move(*body)});
            }
            break;
        }
        case OrderingStrategy::PreAssigned: {
            CarrierReader reader(std::move(packets), ctx.agreement_for(plan, ch), ctx.epoch, ctx.interval);
            if (auto body = reader.read(sizes[ch])) {
                out.push_back(ReceivedFragment{ch, arrival, ch, std::nullopt, std::move(*body)});
            }
            break;
        }
        case OrderingStrategy::TimeOrdered: {
            if (!heard) break;
            const auto slot = time_slot(arrival, plan, ctx);
            if (!slot) break;
            const Tick start = ctx.epoch + static_cast<Tick>(*slot) * plan.stagger;
            CarrierReader reader(std::move(packets), ctx.agreement_for(plan, ch), start, ctx.interval);
            out.push_back(ReceivedFragment{ch, arrival, std::nullopt, std::nullopt, reader.read_all()});
            break;
        }
        }
    }
    return out;
}

MissingFragmentError::MissingFragmentError(std::vector<std::size_t> missing)
    : Error(ErrorCode::MissingFragment, "no replica received for fragment(s) " + join(missing)),
      missing_(std::move(missing)) {}

Steganogram reassemble(const std::vector<ReceivedFragment>& received, const ScatterPlan& plan,
                       const ScatterContext& ctx, const ReceiverKnowledge& knowledge) {
    plan.validate();
    std::vector<std::optional<BitString>> bodies(plan.k);

    if (plan.strategy == OrderingStrategy::TimeOrdered) {
        const auto sizes = fragment_sizes(knowledge.total_bits, plan.k);
        for (const auto& r : received) {
            const auto slot = time_slot(r.first_arrival, plan, ctx);
            if (!slot || r.body.size() < sizes[*slot]) continue;
            BitString body = r.body.slice(0, sizes[*slot]);
            auto& existing = bodies[*slot];
            if (existing && *existing != body) {
                throw Error(ErrorCode::OrderAmbiguity,
                            "two different fragments started in time slot " + std::to_string(*slot));
            }
            existing = std::move(body);
        }
        for (std::size_t i = 0; i < plan.k; ++i) {
            if (!bodies[i] && sizes[i] == 0) bodies[i] = BitString{};
        }
    } else {
        for (const auto& r : received) {
            if (!r.index || *r.index >= plan.k) continue;
            if (r.steg_id && *r.steg_id != (knowledge.steg_id & 0xFFFF)) continue;
            if (!bodies[*r.index]) bodies[*r.index] = r.body;
        }
    }

    std::vector<std::size_t> missing;
    Steganogram out{knowledge.steg_id, {}};
    for (std::size_t i = 0; i < plan.k; ++i) {
        if (!bodies[i]) {
            missing.push_back(i);
            continue;
        }
        out.payload.append(*bodies[i]);
    }
    if (!missing.empty()) throw MissingFragmentError(std::move(missing));
    return out;
}

} // namespace dht
