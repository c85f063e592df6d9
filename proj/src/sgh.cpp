#include "dht/sgh.hpp"

#include <algorithm>
#include <numeric>

namespace dht {

HoppingSchedule HoppingSchedule::fixed(CarrierMethodId method) {
    return HoppingSchedule{{HopEntry{method, 1}}, true};
}

void HoppingSchedule::validate() const {
    if (entries.empty()) throw Error(ErrorCode::InvalidArgument, "hopping schedule is empty");
    for (const auto& e : entries) {
        if (e.packet_budget < 1) throw Error(ErrorCode::InvalidArgument, "hop budgets must be >= 1");
    }
}

std::size_t HoppingSchedule::total_budget() const noexcept {
    return std::accumulate(entries.begin(), entries.end(), std::size_t{0},
                           [](std::size_t acc, const HopEntry& e) { return acc + e.packet_budget; });
}

CarrierMethodId method_at(const HoppingSchedule& schedule, std::size_t packet_ordinal) {
    schedule.validate();
    const std::size_t total = schedule.total_budget();
    if (!schedule.cyclic && packet_ordinal >= total) {
        throw Error(ErrorCode::ScheduleExhausted,
                    "ordinal " + std::to_string(packet_ordinal) + " beyond budget " + std::to_string(total));
    }
    std::size_t rest = packet_ordinal % total;
    for (const auto& e : schedule.entries) {
        if (rest < e.packet_budget) return e.method;
        rest -= e.packet_budget;
    }
    return schedule.entries.back().method;  // unreachable
}

CarrierConfig CarrierAgreement::config_for(std::size_t carrier_ordinal) const {
    return config_at ? config_at(carrier_ordinal) : cfg;
}

bool CarrierAgreement::accepts(std::size_t opportunity) const {
    return !accept || accept(opportunity);
}

CoverSource constant_cover(OvertPacket frame) {
    return [frame = std::move(frame)](std::size_t) { return frame; };
}

// ---------------------------------------------------------------------------
// Writer

CarrierWriter::CarrierWriter(Network& net, FlowId flow, CarrierAgreement agreement, CoverSource cover,
                             Tick start, Tick interval)
    : net_(&net), flow_(flow), agreement_(std::move(agreement)), cover_(std::move(cover)),
      start_(start), interval_(interval) {
    net.flow(flow);
    agreement_.schedule.validate();
    if (interval_ < 1) throw Error(ErrorCode::InvalidArgument, "packet interval must be >= 1 tick");
    if (!cover_) throw Error(ErrorCode::InvalidArgument, "carrier writer needs a cover source");
}

Tick CarrierWriter::next_time() const noexcept {
    return start_ + static_cast<Tick>(opportunity_) * interval_;
}

SendRecord CarrierWriter::send_cover(OvertPacket packet) {
    if (agreement_.hop_key) {
        packet.protocol = decoy_protocol(*agreement_.hop_key, carrier_, packet.protocol);
    }
    return net_->send(flow_, std::move(packet));
}

std::vector<SendRecord> CarrierWriter::write(const BitString& bits) {
    std::vector<SendRecord> records;
    BitString rest = bits;
    std::size_t idle = 0;
    while (!rest.empty()) {
        const std::size_t i = opportunity_;
        OvertPacket packet = cover_(i);
        packet.flow = flow_;
        packet.send_time = next_time();
        ++opportunity_;

        if (agreement_.accepts(i)) {
            const CarrierMethodId method = method_at(agreement_.schedule, carrier_);
            const CarrierConfig cfg = agreement_.config_for(carrier_);
            const std::size_t cap = usable_capacity(method, cfg, packet);
            if (cap == 0 && template_independent(method)) {
                throw Error(ErrorCode::NoCapacity, std::string(to_string(method)) + " carries 0 bits");
            }
            if (cap > 0) {
                Embedded e = embed(method, cfg, rest, packet);
                if (agreement_.hop_key) e.packet.protocol = carrier_protocol_at(*agreement_.hop_key, carrier_);
                rest = std::move(e.remaining);
                ++carrier_;
                idle = 0;
                records.push_back(net_->send(flow_, std::move(e.packet)));
                continue;
            }
        }
        if (++idle > kIdleLimit) {
            throw Error(ErrorCode::NoCapacity, "no usable carrier opportunity in " +
                                                   std::to_string(kIdleLimit) + " packets");
        }
        records.push_back(send_cover(std::move(packet)));
    }
    return records;
}

std::vector<SendRecord> CarrierWriter::pad_to(std::size_t opportunities) {
    std::vector<SendRecord> records;
    while (opportunity_ < opportunities) {
        OvertPacket packet = cover_(opportunity_);
        packet.flow = flow_;
        packet.send_time = next_time();
        ++opportunity_;
        records.push_back(send_cover(std::move(packet)));
    }
    return records;
}

// ---------------------------------------------------------------------------
// Reader

CarrierReader::CarrierReader(std::vector<OvertPacket> packets, CarrierAgreement agreement, Tick start,
                             Tick interval)
    : packets_(std::move(packets)), agreement_(std::move(agreement)), start_(start), interval_(interval) {
    agreement_.schedule.validate();
    if (interval_ < 1) throw Error(ErrorCode::InvalidArgument, "packet interval must be >= 1 tick");
    std::stable_sort(packets_.begin(), packets_.end(),
                     [](const OvertPacket& a, const OvertPacket& b) { return a.send_time < b.send_time; });
}

bool CarrierReader::fill() {
    const auto& schedule = agreement_.schedule;
    while (next_packet_ < packets_.size()) {
        if (!schedule.cyclic && carrier_ >= schedule.total_budget()) return false;
        const OvertPacket& p = packets_[next_packet_++];

        if (agreement_.hop_key) {
            if (p.protocol != carrier_protocol_at(*agreement_.hop_key, carrier_)) continue;
        } else {
            if (p.send_time < start_) continue;
            const auto opportunity = static_cast<std::size_t>((p.send_time - start_) / interval_);
            if (!agreement_.accepts(opportunity)) continue;
        }
        const CarrierMethodId method = method_at(schedule, carrier_);
        const CarrierConfig cfg = agreement_.config_for(carrier_);
        if (usable_capacity(method, cfg, p) == 0 || !is_carrier(method, cfg, p)) continue;

        buffer_.append(extract(method, cfg, p));
        ++carrier_;
        return true;
    }
    return false;
}

std::optional<BitString> CarrierReader::read(std::size_t n) {
    while (buffer_.size() < n) {
        if (!fill()) return std::nullopt;
    }
    auto [head, tail] = take_bits(buffer_, n);
    buffer_ = std::move(tail);
    return head;
}

void CarrierReader::align() { buffer_ = BitString{}; }

BitString CarrierReader::read_all() {
    while (fill()) {
    }
    BitString out = std::move(buffer_);
    buffer_ = BitString{};
    return out;
}

bool CarrierReader::exhausted() { return buffer_.empty() && !fill(); }

// ---------------------------------------------------------------------------

std::vector<SendRecord> hop_encode(const BitString& bits, const HoppingSchedule& schedule, FlowId flow,
                                   const CarrierConfig& cfg, Network& net, CoverSource cover, Tick start,
                                   Tick interval) {
    CarrierWriter writer(net, flow, CarrierAgreement{schedule, cfg, {}, {}, {}}, std::move(cover), start,
                         interval);
    return writer.write(bits);
}

BitString hop_decode(const std::vector<OvertPacket>& packets, const HoppingSchedule& schedule,
                     const CarrierConfig& cfg, std::optional<std::size_t> bit_count) {
    schedule.validate();
    BitString out;
    std::size_t ordinal = 0;
    for (const auto& p : packets) {
        if (bit_count && out.size() >= *bit_count) break;
        if (!schedule.cyclic && ordinal >= schedule.total_budget()) break;
        const CarrierMethodId method = method_at(schedule, ordinal);
        if (usable_capacity(method, cfg, p) == 0) continue;
        out.append(extract(method, cfg, p));
        ++ordinal;
    }
    if (bit_count && out.size() > *bit_count) out = out.slice(0, *bit_count);
    return out;
}

std::vector<CarrierSlot> bit_layout(const HoppingSchedule& schedule, const CarrierConfig& cfg,
                                    const std::vector<OvertPacket>& carrier_packets, std::size_t total_bits) {
    std::vector<CarrierSlot> layout;
    std::size_t next_bit = 0;
    std::size_t ordinal = 0;
    for (const auto& p : carrier_packets) {
        if (next_bit >= total_bits) break;
        const CarrierMethodId method = method_at(schedule, ordinal);
        const std::size_t cap = usable_capacity(method, cfg, p);
        if (cap == 0) continue;
        const std::size_t n = std::min(cap, total_bits - next_bit);
        layout.push_back(CarrierSlot{ordinal, method, next_bit, n});
        next_bit += n;
        ++ordinal;
    }
    return layout;
}

std::vector<std::size_t> positions_for_method(const std::vector<CarrierSlot>& layout, CarrierMethodId method) {
    std::vector<std::size_t> positions;
    for (const auto& slot : layout) {
        if (slot.method != method) continue;
        for (std::size_t b = 0; b < slot.bit_count; ++b) positions.push_back(slot.first_bit + b);
    }
    return positions;
}

std::vector<std::optional<BitString>> single_method_reads(const std::vector<OvertPacket>& packets,
                                                          CarrierMethodId method, const CarrierConfig& cfg) {
    std::vector<std::optional<BitString>> reads;
    reads.reserve(packets.size());
    for (const auto& p : packets) {
        if (is_carrier(method, cfg, p)) {
            reads.emplace_back(extract(method, cfg, p));
        } else {
            reads.emplace_back(std::nullopt);
        }
    }
    return reads;
}

} // namespace dht
