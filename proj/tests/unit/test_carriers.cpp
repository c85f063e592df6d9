#include "doctest.h"

#include "dht/carriers.hpp"
#include "support.hpp"

using namespace dht;
using testing_support::error_code;
using testing_support::short_frame;

namespace {

CarrierConfig wide() {
    CarrierConfig c;
    c.stream_count = 8;
    c.address_count = 4;
    c.max_chunk_count = 8;
    c.min_payload_bytes = 46;
    c.retrans_payload_bits = 16;
    return c;
}

} // namespace

TEST_CASE("capacity per method") {
    CarrierConfig c = wide();
    c.stream_count = 4;
    OvertPacket p = short_frame();
    CHECK(capacity(CarrierMethodId::MultiStreaming, c, p) == 2);
    CHECK(capacity(CarrierMethodId::MultiHoming, c, p) == 2);
    CHECK(capacity(CarrierMethodId::ChunkCount, c, p) == 3);
    CHECK(capacity(CarrierMethodId::RetransPayload, c, p) == 16);
    p.payload_len = 40;
    CHECK(capacity(CarrierMethodId::EthPadding, c, p) == 8 * (46 - 40));
    c.stream_count = 1;
    CHECK(capacity(CarrierMethodId::MultiStreaming, c, p) == 0);
    p.payload_len = 46;
    CHECK(error_code([&] { capacity(CarrierMethodId::EthPadding, c, p); }) == ErrorCode::NoCapacity);
    CHECK(usable_capacity(CarrierMethodId::EthPadding, c, p) == 0);
    p.payload_len = 1;
    CHECK(error_code([&] { capacity(CarrierMethodId::RetransPayload, c, p); }) == ErrorCode::NoCapacity);
}

TEST_CASE("config rejects counts that are not powers of two") {
    CarrierConfig c = wide();
    c.stream_count = 3;
    CHECK(error_code([&] { c.validate(); }).has_value());
    c = wide();
    c.retrans_payload_bits = 0;
    CHECK(error_code([&] { c.validate(); }).has_value());
}

TEST_CASE("embed examples") {
    CarrierConfig c = wide();
    c.stream_count = 4;
    c.max_chunk_count = 4;
    const auto ms = embed(CarrierMethodId::MultiStreaming, c, BitString::from_string("10111"), short_frame());
    CHECK(ms.packet.stream.value == 2);
    CHECK(ms.remaining.to_string() == "111");
    CHECK(ms.consumed == 2);

    const auto cc = embed(CarrierMethodId::ChunkCount, c, BitString::from_string("01"), short_frame());
    CHECK(cc.packet.chunk_count == 2);
    CHECK(cc.remaining.empty());

    const auto bits = BitString::from_string("1100101011110000");
    const auto rp = embed(CarrierMethodId::RetransPayload, c, bits, short_frame());
    CHECK(rp.packet.retransmitted);
    CHECK(rp.packet.payload_bits == bits);

    CHECK(extract(CarrierMethodId::MultiStreaming, c, ms.packet).to_string() == "10");
    CHECK(error_code([&] { embed(CarrierMethodId::MultiStreaming, CarrierConfig{}, bits, short_frame()); }) ==
          ErrorCode::NoCapacity);
}

TEST_CASE("partial final symbol is zero-filled on the right") {
    const CarrierConfig c = wide();
    const auto e = embed(CarrierMethodId::ChunkCount, c, BitString::from_string("1"), short_frame());
    CHECK(e.consumed == 1);
    CHECK(extract(CarrierMethodId::ChunkCount, c, e.packet).to_string() == "100");

    OvertPacket f = short_frame();
    f.payload_len = 45;
    const auto pad = embed(CarrierMethodId::EthPadding, c, BitString::from_string("101"), f);
    REQUIRE(pad.packet.padding.size() == 1);
    CHECK(pad.packet.padding[0] == 0xA0);
}

TEST_CASE("non-carriers are rejected") {
    const CarrierConfig c = wide();
    OvertPacket p = short_frame();
    CHECK(error_code([&] { extract(CarrierMethodId::EthPadding, c, p); }) == ErrorCode::NotACarrier);
    CHECK(error_code([&] { extract(CarrierMethodId::RetransPayload, c, p); }) == ErrorCode::NotACarrier);
    p.retransmitted = true;  // a user-data retransmission
    CHECK_FALSE(is_carrier(CarrierMethodId::RetransPayload, c, p));
    p.stream.value = 8;
    CHECK(error_code([&] { extract(CarrierMethodId::MultiStreaming, c, p); }) == ErrorCode::NotACarrier);
    p.chunk_count = 0;
    CHECK_FALSE(is_carrier(CarrierMethodId::ChunkCount, c, p));
    p.padding.assign(3, 0);
    CHECK_FALSE(is_carrier(CarrierMethodId::EthPadding, c, p));
}

TEST_CASE("round trip and untouched fields for every method") {
    const CarrierConfig c = wide();
    Rng rng(2024);
    for (CarrierMethodId m : kAllCarrierMethods) {
        CAPTURE(to_string(m));
        for (int trial = 0; trial < 1000; ++trial) {
            OvertPacket tmpl = short_frame();
            tmpl.payload_len = 2 + rng.below(44);
            tmpl.stream.value = static_cast<std::uint32_t>(rng.below(8));
            tmpl.send_time = static_cast<Tick>(rng.below(1000));
            const BitString bits = testing_support::random_bits(rng, 1 + rng.below(400));
            const std::size_t cap = capacity(m, c, tmpl);
            const Embedded e = embed(m, c, bits, tmpl);
            const std::size_t take = std::min(cap, bits.size());
            REQUIRE(e.consumed == take);
            CHECK(e.remaining == bits.slice(take, bits.size() - take));
            const BitString got = extract(m, c, e.packet);
            REQUIRE(got.size() == cap);
            CHECK(got.slice(0, take) == bits.slice(0, take));

            OvertPacket expect = tmpl;
            switch (m) {
            case CarrierMethodId::MultiStreaming: expect.stream = e.packet.stream; break;
            case CarrierMethodId::MultiHoming: expect.dest_address = e.packet.dest_address; break;
            case CarrierMethodId::ChunkCount: expect.chunk_count = e.packet.chunk_count; break;
            case CarrierMethodId::EthPadding: expect.padding = e.packet.padding; break;
            case CarrierMethodId::RetransPayload:
                expect.retransmitted = true;
                expect.payload_bits = e.packet.payload_bits;
                break;
            }
            CHECK(e.packet == expect);
        }
    }
}

TEST_CASE("method names round trip") {
    for (CarrierMethodId m : kAllCarrierMethods) CHECK(parse_method(to_string(m)) == m);
    CHECK(error_code([] { parse_method("Nope"); }).has_value());
}
