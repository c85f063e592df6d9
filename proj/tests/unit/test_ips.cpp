#include "doctest.h"

#include <array>

#include "dht/ips.hpp"
#include "support.hpp"

using namespace dht;
using testing_support::error_code;
using testing_support::short_frame;

TEST_CASE("hop sequence is deterministic and key dependent") {
    const HopKey a = HopKey::from_hex("00112233445566778899aabbccddeeff");
    const HopKey a2 = HopKey::from_hex("00112233445566778899aabbccddeeff");
    const HopKey b = HopKey::from_hex("00112233445566778899aabbccddeefe");
    bool differs = false;
    for (std::uint64_t i = 0; i < 64; ++i) {
        CHECK(carrier_protocol_at(a, i) == carrier_protocol_at(a2, i));
        differs = differs || carrier_protocol_at(a, i) != carrier_protocol_at(b, i);
    }
    CHECK(differs);
}

TEST_CASE("hop sequence is close to uniform") {
    const HopKey key = HopKey::from_hex("c0ffee");
    std::array<int, kCarrierProtocolCount> counts{};
    for (std::uint64_t i = 0; i < 10000; ++i) ++counts[static_cast<std::size_t>(carrier_protocol_at(key, i))];
    for (int c : counts) {
        CHECK(c >= 2300);
        CHECK(c <= 2700);
    }
}

TEST_CASE("ips_embed tags the frame and fills its padding") {
    const HopKey key = HopKey::from_hex("01");
    CarrierConfig cfg;
    const auto e = ips_embed(BitString::from_string("1011"), key, 3, short_frame(), cfg);
    CHECK(e.packet.protocol == carrier_protocol_at(key, 3));
    CHECK(e.packet.padding.size() == 26);
    CHECK(e.packet.padding[0] == 0xB0);
    OvertPacket full = short_frame();
    full.payload_len = 46;
    CHECK(error_code([&] { ips_embed(BitString::from_string("1"), key, 0, full, cfg); }) == ErrorCode::NoCapacity);
}

TEST_CASE("extractor skips frames under the wrong tag without advancing") {
    const HopKey key = HopKey::from_hex("beef");
    CarrierConfig cfg;
    IpsExtractor ex(key, cfg);
    OvertPacket decoy = short_frame();
    decoy.padding.assign(26, 0xFF);
    decoy.protocol = decoy_protocol(key, 0, CarrierProtocolTag::TCP);
    CHECK(decoy.protocol != carrier_protocol_at(key, 0));
    CHECK_FALSE(ex.offer(decoy).has_value());
    CHECK(ex.counter() == 0);
}

TEST_CASE("decoys interleaved with carriers leave the bits intact") {
    const HopKey key = HopKey::from_hex("5eed5eed");
    CarrierConfig cfg;
    Rng rng(8);
    const BitString message = testing_support::random_bits(rng, 26 * 8 * 12);
    std::vector<OvertPacket> stream;
    BitString rest = message;
    std::uint64_t ordinal = 0;
    while (!rest.empty()) {
        for (int d = 0, n = static_cast<int>(rng.below(3)); d < n; ++d) {
            OvertPacket decoy = short_frame();
            decoy.padding.assign(26, static_cast<std::uint8_t>(rng.below(256)));
            decoy.protocol = decoy_protocol(key, ordinal, static_cast<CarrierProtocolTag>(rng.below(4)));
            stream.push_back(decoy);
        }
        auto e = ips_embed(rest, key, ordinal++, short_frame(), cfg);
        rest = e.remaining;
        stream.push_back(e.packet);
    }
    IpsExtractor ex(key, cfg);
    BitString got;
    for (const auto& f : stream) {
        if (auto bits = ex.offer(f)) got.append(*bits);
    }
    CHECK(got == message);
    CHECK(ex.counter() == ordinal);

    IpsExtractor empty(key, cfg);
    CHECK(empty.counter() == 0);
}

TEST_CASE("key derivation is stable") {
    const HopKey k = HopKey::from_hex("00");
    CHECK(k.secret() == std::vector<std::uint8_t>{0});
    CHECK(k.prf_key() == HopKey::from_hex("00").prf_key());
    CHECK(k.prf_key() != HopKey::from_hex("01").prf_key());
    CHECK(error_code([] { HopKey(std::vector<std::uint8_t>{}); }).has_value());
}
