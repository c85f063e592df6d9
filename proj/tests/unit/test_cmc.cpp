#include "doctest.h"

#include <numeric>

#include "dht/cmc.hpp"
#include "support.hpp"

using namespace dht;
using testing_support::error_code;

namespace {

std::size_t accepted(const std::vector<bool>& g) { return static_cast<std::size_t>(std::count(g.begin(), g.end(), true)); }

} // namespace

TEST_CASE("gate extremes") {
    CHECK(accepted(gate(RateReduction{1.0}, 500, 3)) == 500);
    CHECK(accepted(gate(RateReduction{0.0}, 500, 3)) == 0);
    CHECK(error_code([] { gate(RateReduction{1.5}, 1, 0); }).has_value());
}

TEST_CASE("gate acceptance fraction concentrates around p") {
    const auto g = gate(RateReduction{0.25}, 10000, 7);
    const double frac = static_cast<double>(accepted(g)) / 10000.0;
    CHECK(frac >= 0.23);
    CHECK(frac <= 0.27);
    CHECK(g == gate(RateReduction{0.25}, 10000, 7));
}

TEST_CASE("accepted sets are nested as p shrinks") {
    const auto hi = gate(RateReduction{0.5}, 5000, 21);
    const auto lo = gate(RateReduction{0.1}, 5000, 21);
    for (std::size_t i = 0; i < hi.size(); ++i) {
        if (lo[i]) CHECK(hi[i]);
    }
}

TEST_CASE("walk is inclusive at the switch") {
    ParameterWalk w;
    w.base.stream_count = 4;
    CHECK(walk(w, 1000) == w.base);
    ParameterStep s;
    s.at = 100;
    s.stream_count = 2;
    w.steps.push_back(s);
    CHECK(walk(w, 99).stream_count == 4);
    CHECK(walk(w, 100).stream_count == 2);
}

TEST_CASE("walk matches a linear scan over random step lists") {
    Rng rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        ParameterWalk w;
        w.base.stream_count = 8;
        w.base.address_count = 2;
        std::size_t at = 0;
        for (int i = 0, n = static_cast<int>(rng.below(5)); i < n; ++i) {
            ParameterStep s;
            at += 1 + rng.below(20);
            s.at = at;
            if (rng.below(2)) s.stream_count = 1U << rng.below(4);
            if (rng.below(2)) s.address_count = 1U << rng.below(4);
            w.steps.push_back(s);
        }
        for (std::size_t o = 0; o < at + 5; ++o) {
            std::uint32_t S = 8, A = 2;
            for (const auto& s : w.steps) {
                if (s.at <= o) {
                    if (s.stream_count) S = *s.stream_count;
                    if (s.address_count) A = *s.address_count;
                }
            }
            const CarrierConfig got = walk(w, o);
            CHECK(got.stream_count == S);
            CHECK(got.address_count == A);
        }
    }
}

TEST_CASE("walk rejects unordered switches") {
    ParameterWalk w;
    w.steps.resize(2);
    w.steps[0].at = 5;
    w.steps[1].at = 5;
    CHECK(error_code([&] { walk(w, 0); }).has_value());
}

TEST_CASE("fit_sessions") {
    PatternFit point;
    point.histogram[9] = 1.0;
    for (int h : fit_sessions(point, 200, 1)) CHECK(h == 9);

    PatternFit uniform;
    uniform.histogram.fill(1.0 / 24.0);
    std::array<int, 24> counts{};
    for (int h : fit_sessions(uniform, 24000, 5)) ++counts[static_cast<std::size_t>(h)];
    for (int c : counts) {
        CHECK(c >= 880);
        CHECK(c <= 1120);
    }

    CHECK(error_code([] { fit_sessions(PatternFit{}, 1, 0); }) == ErrorCode::DegenerateHistogram);
    PatternFit loose;
    loose.histogram[0] = 0.5;
    CHECK(error_code([&] { fit_sessions(loose, 1, 0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("ride takes the smaller rate") {
    const AnomalyRide r{AnomalyKind::Retransmission};
    CHECK(ride(r, 0.05, 0.02) == 0.02);
    CHECK(ride(r, 0.01, 0.02) == 0.01);
    CHECK(ride(r, 0.3, 0.0) == 0.0);
    CHECK(error_code([&] { ride(r, -0.1, 0.0); }).has_value());
}

TEST_CASE("pacer keeps every prefix within the rate") {
    for (double rate : {0.0, 0.013, 0.02, 0.25, 1.0 / 3.0, 1.0}) {
        AnomalyPacer pacer(rate);
        std::size_t count = 0;
        for (std::size_t i = 0; i < 5000; ++i) {
            count += pacer(i) ? 1 : 0;
            CHECK(static_cast<double>(count) <= rate * static_cast<double>(i + 1) + 1e-9);
            CHECK(count == pacer.accepted_through(i + 1));
        }
    }
}
