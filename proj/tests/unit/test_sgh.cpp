#include "doctest.h"

#include "dht/sgh.hpp"
#include "support.hpp"

using namespace dht;
using testing_support::error_code;
using testing_support::packets_of;
using testing_support::short_frame;

namespace {

CarrierConfig sctp() {
    CarrierConfig c;
    c.stream_count = 8;
    c.address_count = 4;
    c.max_chunk_count = 16;
    return c;
}

HoppingSchedule three(std::size_t budget, bool cyclic) {
    return HoppingSchedule{{{CarrierMethodId::MultiHoming, budget},
                            {CarrierMethodId::MultiStreaming, budget},
                            {CarrierMethodId::ChunkCount, budget}},
                           cyclic};
}

std::vector<OvertPacket> transmit(const BitString& bits, const HoppingSchedule& s, const CarrierConfig& cfg) {
    Network net(testing_support::lossless());
    const FlowId f = net.open_flow(HostId{0}, HostId{1}, CarrierProtocolTag::TCP, 8, 4);
    hop_encode(bits, s, f, cfg, net, constant_cover(short_frame(f)));
    return packets_of(net.drain());
}

} // namespace

TEST_CASE("method_at by cumulative budget") {
    const auto s = three(5, false);
    CHECK(method_at(s, 0) == CarrierMethodId::MultiHoming);
    CHECK(method_at(s, 7) == CarrierMethodId::MultiStreaming);
    CHECK(method_at(s, 14) == CarrierMethodId::ChunkCount);
    CHECK(error_code([&] { method_at(s, 15); }) == ErrorCode::ScheduleExhausted);
    CHECK(method_at(three(5, true), 15) == CarrierMethodId::MultiHoming);
    const auto one = HoppingSchedule::fixed(CarrierMethodId::EthPadding);
    for (std::size_t i = 0; i < 50; ++i) CHECK(method_at(one, i) == CarrierMethodId::EthPadding);
    CHECK(error_code([] { HoppingSchedule{}.validate(); }).has_value());
}

TEST_CASE("single-entry schedule equals plain embedding") {
    const CarrierConfig cfg = sctp();
    Rng rng(1);
    const BitString bits = testing_support::random_bits(rng, 61);
    const auto hopped = transmit(bits, HoppingSchedule::fixed(CarrierMethodId::MultiStreaming), cfg);
    std::vector<OvertPacket> plain;
    BitString rest = bits;
    Tick t = 0;
    while (!rest.empty()) {
        OvertPacket tmpl = short_frame();
        tmpl.send_time = t++;
        auto e = embed(CarrierMethodId::MultiStreaming, cfg, rest, tmpl);
        rest = e.remaining;
        plain.push_back(e.packet);
    }
    CHECK(hopped == plain);
}

TEST_CASE("three-method schedule round trip") {
    const CarrierConfig cfg = sctp();
    Rng rng(30);
    for (int trial = 0; trial < 100; ++trial) {
        const BitString bits = testing_support::random_bits(rng, 30 + rng.below(200));
        const auto s = three(1 + rng.below(6), true);
        const auto packets = transmit(bits, s, cfg);
        CHECK(hop_decode(packets, s, cfg, bits.size()) == bits);
    }
    CHECK(transmit(BitString{}, three(2, true), cfg).empty());
    CHECK(hop_decode({}, three(2, true), cfg).empty());
}

TEST_CASE("finite schedule runs out") {
    const CarrierConfig cfg = sctp();
    Network net(testing_support::lossless());
    const FlowId f = net.open_flow(HostId{0}, HostId{1}, CarrierProtocolTag::TCP);
    const auto s = three(1, false);  // 2 + 3 + 4 = 9 bits
    CHECK(error_code([&] {
              hop_encode(BitString::from_string("1111111111"), s, f, cfg, net, constant_cover(short_frame(f)));
          }) == ErrorCode::ScheduleExhausted);
}

TEST_CASE("zero-capacity method in the schedule is an error") {
    CarrierConfig cfg = sctp();
    cfg.stream_count = 1;
    Network net(testing_support::lossless());
    const FlowId f = net.open_flow(HostId{0}, HostId{1}, CarrierProtocolTag::TCP);
    CHECK(error_code([&] {
              hop_encode(BitString::from_string("1"), HoppingSchedule::fixed(CarrierMethodId::MultiStreaming), f, cfg,
                         net, constant_cover(short_frame(f)));
          }) == ErrorCode::NoCapacity);
}

TEST_CASE("bit layout follows per-carrier capacities") {
    const CarrierConfig cfg = sctp();
    std::vector<OvertPacket> carriers(5, short_frame());
    const auto layout = bit_layout(three(1, true), cfg, carriers, 12);
    // MultiHoming 2, MultiStreaming 3, ChunkCount 4, MultiHoming 2, MultiStreaming 1 of 3
    REQUIRE(layout.size() == 5);
    CHECK(layout[2].first_bit == 5);
    CHECK(layout[2].bit_count == 4);
    CHECK(layout[4].bit_count == 1);
    const auto ms = positions_for_method(layout, CarrierMethodId::MultiStreaming);
    CHECK(ms == std::vector<std::size_t>{2, 3, 4, 11});
}

TEST_CASE("reader gates by opportunity and skips cover") {
    const CarrierConfig cfg = sctp();
    Network net(testing_support::lossless());
    const FlowId f = net.open_flow(HostId{0}, HostId{1}, CarrierProtocolTag::TCP);
    CarrierAgreement a{HoppingSchedule::fixed(CarrierMethodId::MultiStreaming), cfg,
                       [](std::size_t i) { return i % 3 == 2; }, {}, {}};
    CarrierWriter w(net, f, a, constant_cover(short_frame(f)), 100, 10);
    const BitString msg = BitString::from_string("101100111000");
    w.write(msg);
    CHECK(w.carriers() == 4);
    CarrierReader r(packets_of(net.drain()), a, 100, 10);
    CHECK(r.read(5)->to_string() == "10110");
    CHECK(r.read(7)->to_string() == "0111000");
    CHECK_FALSE(r.read(1).has_value());
}
