#include "doctest.h"

#include <set>

#include "dht/simnet.hpp"
#include "support.hpp"

using namespace dht;
using testing_support::error_code;

namespace {

OvertPacket at(FlowId flow, Tick t) {
    OvertPacket p;
    p.flow = flow;
    p.send_time = t;
    p.payload_len = 50;
    return p;
}

} // namespace

TEST_CASE("open_flow allocates fresh ids and stores fields") {
    Network net(NetworkConfig{});
    const FlowId a = net.open_flow(HostId{0}, HostId{1}, CarrierProtocolTag::TCP);
    const FlowId b = net.open_flow(HostId{0}, HostId{1}, CarrierProtocolTag::TCP);
    const FlowId c = net.open_flow(HostId{0}, HostId{1}, CarrierProtocolTag::UDP, 4, 2);
    CHECK(a.value == 0);
    CHECK(b.value == 1);
    CHECK(net.flow(c).stream_count == 4);
    CHECK(net.flow(c).address_count == 2);
    CHECK(net.flow(c).protocol == CarrierProtocolTag::UDP);
    CHECK(net.open_flow(HostId{3}, HostId{3}, CarrierProtocolTag::ICMP) == FlowId{3});
    CHECK(net.flow(FlowId{3}).loopback());
    CHECK(error_code([&] { net.flow(FlowId{9}); }) == ErrorCode::UnknownFlow);
}

TEST_CASE("send rejects unknown flows and mislabelled packets") {
    Network net(NetworkConfig{});
    const FlowId f = net.open_flow(HostId{0}, HostId{1}, CarrierProtocolTag::TCP);
    CHECK(error_code([&] { net.send(FlowId{5}, at(FlowId{5}, 0)); }) == ErrorCode::UnknownFlow);
    CHECK(error_code([&] { net.send(f, at(FlowId{7}, 0)); }).has_value());
}

TEST_CASE("identity channel with no loss and no reordering") {
    Network net(testing_support::lossless());
    const FlowId f = net.open_flow(HostId{0}, HostId{1}, CarrierProtocolTag::TCP);
    for (Tick t = 0; t < 50; ++t) net.send(f, at(f, t));
    const auto out = net.drain();
    REQUIRE(out.size() == 50);
    for (std::size_t i = 0; i < out.size(); ++i) {
        CHECK(out[i].packet.send_time == static_cast<Tick>(i));
        CHECK(out[i].delivered_at == static_cast<Tick>(i) + 5);
    }
}

TEST_CASE("total loss delivers nothing") {
    NetworkConfig c;
    c.loss_probability = 1.0;
    Network net(c);
    const FlowId f = net.open_flow(HostId{0}, HostId{1}, CarrierProtocolTag::TCP);
    for (Tick t = 0; t < 20; ++t) net.send(f, at(f, t));
    CHECK(net.drain().empty());
    CHECK(net.dropped_count() == 20);
}

TEST_CASE("same seed gives the same survivors") {
    auto survivors = [] {
        NetworkConfig c;
        c.seed = 42;
        c.loss_probability = 0.5;
        c.reorder_window = 3;
        Network net(c);
        const FlowId f = net.open_flow(HostId{0}, HostId{1}, CarrierProtocolTag::TCP);
        for (Tick t = 0; t < 1000; ++t) net.send(f, at(f, t));
        std::vector<std::pair<Tick, Tick>> out;
        for (const auto& d : net.drain()) out.emplace_back(d.packet.send_time, d.delivered_at);
        return out;
    };
    const auto a = survivors();
    CHECK(a == survivors());
    CHECK(a.size() > 400);
    CHECK(a.size() < 600);
}

TEST_CASE("advance orders by delivery time and emits once") {
    NetworkConfig c;
    Network net(c);
    CHECK(net.advance(0).empty());
    const FlowId f = net.open_flow(HostId{0}, HostId{1}, CarrierProtocolTag::TCP);
    net.send(f, at(f, 3));  // arrives at 3
    net.send(f, at(f, 1));  // arrives at 1
    const auto out = net.advance(5);
    REQUIRE(out.size() == 2);
    CHECK(out[0].delivered_at == 1);
    CHECK(out[1].delivered_at == 3);
    CHECK(net.advance(5).empty());
    CHECK(error_code([&] { net.advance(4); }) == ErrorCode::ClockRegression);
}

TEST_CASE("ties break by flow id then send order") {
    Network net(NetworkConfig{});
    const FlowId a = net.open_flow(HostId{0}, HostId{1}, CarrierProtocolTag::TCP);
    const FlowId b = net.open_flow(HostId{0}, HostId{1}, CarrierProtocolTag::TCP);
    net.send(b, at(b, 2));
    net.send(a, at(a, 2));
    auto second = at(a, 2);
    second.payload_len = 51;
    net.send(a, second);
    const auto out = net.drain();
    REQUIRE(out.size() == 3);
    CHECK(out[0].packet.flow == a);
    CHECK(out[0].packet.payload_len == 50);
    CHECK(out[1].packet.payload_len == 51);
    CHECK(out[2].packet.flow == b);
}

TEST_CASE("conservation and jitter bounds") {
    NetworkConfig c;
    c.seed = 9;
    c.loss_probability = 0.2;
    c.reorder_window = 4;
    c.base_delay = 10;
    Network net(c);
    const FlowId f = net.open_flow(HostId{0}, HostId{1}, CarrierProtocolTag::TCP);
    for (Tick t = 0; t < 500; ++t) net.send(f, at(f, t));
    const auto out = net.drain();
    CHECK(net.delivered_count() + net.dropped_count() == net.sent_count());
    for (const auto& d : out) {
        const Tick delay = d.delivered_at - d.packet.send_time;
        CHECK(delay >= 10);
        CHECK(delay <= 14);
    }
}

TEST_CASE("opening a flow does not perturb another flow") {
    auto trace = [](bool extra) {
        NetworkConfig c;
        c.seed = 4;
        c.loss_probability = 0.3;
        c.reorder_window = 2;
        Network net(c);
        const FlowId f = net.open_flow(HostId{0}, HostId{1}, CarrierProtocolTag::TCP);
        std::optional<FlowId> g;
        if (extra) g = net.open_flow(HostId{0}, HostId{2}, CarrierProtocolTag::UDP);
        std::vector<std::pair<Tick, Tick>> out;
        for (Tick t = 0; t < 200; ++t) {
            net.send(f, at(f, t));
            if (g) net.send(*g, at(*g, t));
        }
        for (const auto& d : net.drain()) {
            if (d.packet.flow == f) out.emplace_back(d.packet.send_time, d.delivered_at);
        }
        return out;
    };
    CHECK(trace(false) == trace(true));
}

TEST_CASE("severed flows drop everything afterwards") {
    Network net(NetworkConfig{});
    const FlowId f = net.open_flow(HostId{0}, HostId{1}, CarrierProtocolTag::TCP);
    net.send(f, at(f, 0));
    net.sever(f);
    net.send(f, at(f, 1));
    CHECK(net.drain().size() == 1);
}

TEST_CASE("overt source follows its profile") {
    Flow flow{FlowId{0}, HostId{0}, HostId{1}, CarrierProtocolTag::TCP, 4, 1};
    TrafficProfile p;
    p.payload_min = 10;
    p.payload_max = 60;
    p.stream_weights = {0.7, 0.1, 0.1, 0.1};
    p.retransmission_rate = 0.1;
    p.padding_anomaly_rate = 0.2;
    OvertSource src(flow, p, 77);
    std::size_t streams0 = 0, retrans = 0, padded = 0, odd = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const OvertPacket pk = src.next(i);
        CHECK(pk.payload_len >= 10);
        CHECK(pk.payload_len <= 60);
        CHECK(pk.stream.value < 4);
        CHECK(pk.payload_bits.empty());
        if (pk.payload_len >= 46) CHECK(pk.padding.empty());
        if (pk.payload_len < 46) {
            CHECK(pk.padding.size() == 46 - pk.payload_len);
            ++padded;
            if (std::any_of(pk.padding.begin(), pk.padding.end(), [](auto b) { return b != 0; })) ++odd;
        }
        streams0 += pk.stream.value == 0;
        retrans += pk.retransmitted;
    }
    CHECK(static_cast<double>(streams0) / n == doctest::Approx(0.7).epsilon(0.03));
    CHECK(static_cast<double>(retrans) / n == doctest::Approx(0.1).epsilon(0.1));
    CHECK(static_cast<double>(odd) / static_cast<double>(padded) == doctest::Approx(0.2).epsilon(0.1));
}
