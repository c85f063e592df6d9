#include "doctest.h"

#include "dht/core.hpp"
#include "support.hpp"

using namespace dht;
using testing_support::error_code;

TEST_CASE("bits_from_bytes expands MSB first") {
    CHECK(bits_from_bytes(std::vector<std::uint8_t>{}).empty());
    CHECK(bits_from_bytes(std::vector<std::uint8_t>{0x00}).to_string() == "00000000");
    // 165 = 128 + 32 + 4 + 1
    CHECK(bits_from_bytes(std::vector<std::uint8_t>{0xA5}).to_string() == "10100101");
}

TEST_CASE("bytes_from_bits inverts the expansion") {
    CHECK(bytes_from_bits(BitString::from_string("00000000")) == std::vector<std::uint8_t>{0x00});
    CHECK(bytes_from_bits(BitString::from_string("10100101")) == std::vector<std::uint8_t>{0xA5});
    CHECK(error_code([] { bytes_from_bits(BitString::from_string("1010010")); }) == ErrorCode::NonOctetLength);
}

TEST_CASE("byte round trip over random inputs") {
    Rng rng(11);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<std::uint8_t> bytes(rng.below(40));
        for (auto& b : bytes) b = static_cast<std::uint8_t>(rng.below(256));
        const BitString bits = bits_from_bytes(bytes);
        REQUIRE(bits.size() == 8 * bytes.size());
        for (std::size_t i = 0; i < bytes.size(); ++i) {
            for (int j = 0; j < 8; ++j) CHECK(bits[8 * i + j] == (((bytes[i] >> (7 - j)) & 1) != 0));
        }
        CHECK(bytes_from_bits(bits) == bytes);
    }
}

TEST_CASE("take_bits") {
    const auto b = BitString::from_string("1011");
    auto [head, tail] = take_bits(b, 2);
    CHECK(head.to_string() == "10");
    CHECK(tail.to_string() == "11");
    auto [none, all] = take_bits(b, 0);
    CHECK(none.empty());
    CHECK(all == b);
    CHECK(error_code([&] { take_bits(b, 5); }) == ErrorCode::Underflow);
}

TEST_CASE("take_bits conserves length and content") {
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const BitString b = testing_support::random_bits(rng, rng.below(100));
        const std::size_t n = rng.below(b.size() + 1);
        auto [head, tail] = take_bits(b, n);
        CHECK(head.size() + tail.size() == b.size());
        CHECK(head + tail == b);
    }
}

TEST_CASE("from_uint and to_uint") {
    CHECK(BitString::from_uint(5, 4).to_string() == "0101");
    CHECK(BitString::from_uint(0, 0).empty());
    CHECK(BitString::from_string("110").to_uint() == 6);
    CHECK(BitString::from_string("10111").popcount() == 4);
    CHECK(error_code([] { BitString::from_string("10a"); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("hex helpers") {
    CHECK(bytes_from_hex("00ff10") == std::vector<std::uint8_t>{0x00, 0xFF, 0x10});
    CHECK(hex_from_bytes(std::vector<std::uint8_t>{0xDE, 0xAD}) == "dead");
    CHECK(error_code([] { bytes_from_hex("abc"); }).has_value());
    CHECK(error_code([] { bytes_from_hex("zz"); }).has_value());
}

TEST_CASE("derived seeds are distinct and stable") {
    CHECK(derive_seed(1, 0) == derive_seed(1, 0));
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 0) != derive_seed(2, 0));
    const double u = unit_interval(~std::uint64_t{0});
    CHECK(u < 1.0);
    CHECK(unit_interval(0) == 0.0);
}

TEST_CASE("Rng draws stay in range and weighted follows weights") {
    Rng rng(5);
    for (int i = 0; i < 1000; ++i) CHECK(rng.below(7) < 7);
    CHECK(error_code([&] { rng.below(0); }).has_value());

    const std::vector<double> w{0.0, 0.25, 0.75};
    std::array<int, 3> counts{};
    for (int i = 0; i < 20000; ++i) ++counts[rng.weighted(w)];
    CHECK(counts[0] == 0);
    CHECK(counts[1] == doctest::Approx(5000).epsilon(0.05));
    CHECK(counts[2] == doctest::Approx(15000).epsilon(0.05));
}

TEST_CASE("empirical_quantile picks the ceil(q n)-th order statistic") {
    std::vector<double> s{5, 1, 4, 2, 3};
    CHECK(empirical_quantile(s, 0.95) == 5);
    CHECK(empirical_quantile(s, 0.6) == 3);
    CHECK(empirical_quantile(s, 0.2) == 1);
    CHECK(error_code([] { empirical_quantile({}, 0.5); }).has_value());
}

TEST_CASE("error text names the code") {
    const Error e(ErrorCode::Underflow, "short");
    CHECK(std::string(e.what()).find("Underflow") != std::string::npos);
    CHECK(parse_protocol("UDP") == CarrierProtocolTag::UDP);
    CHECK(parse_anomaly_kind("Padding") == AnomalyKind::Padding);
}
