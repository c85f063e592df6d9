#include <algorithm>
#include <memory>

#include "dht/experiment.hpp"

namespace dht {

namespace {

// Stream labels for derive_seed, so every random input of a run has its own
// generator and adding one never shifts another.
constexpr std::uint64_t kStegStream = 0x5745'0001;
constexpr std::uint64_t kLowerStream = 0x5745'0002;
constexpr std::uint64_t kPatternStream = 0x5745'0003;
constexpr std::uint64_t kGateStream = 0x5745'1000;
constexpr std::uint64_t kCoverStream = 0x5745'2000;
constexpr std::uint64_t kCalibrationStream = 0x5745'3000;

TrafficProfile cover_profile(const Scenario& s) {
    TrafficProfile p = with_natural_rates(s.traffic.profile, s.network);
    p.min_payload_bytes = s.carrier.min_payload_bytes;
    return p;
}

CoverSource flow_cover(const Scenario& s, const Flow& flow, std::uint64_t seed) {
    auto source = std::make_shared<OvertSource>(flow, cover_profile(s), derive_seed(seed, kCoverStream + flow.id.value));
    return [source](std::size_t) { return source->next(0); };
}

std::vector<FlowId> open_flows(const Scenario& s, Network& net) {
    std::vector<FlowId> ids;
    for (const auto& f : s.flows) {
        ids.push_back(net.open_flow(HostId{f.src}, HostId{s.senders + f.dst}, f.protocol, f.streams, f.addresses));
    }
    return ids;
}

ScatterPlan dht_plan(const Scenario& s) {
    ScatterPlan plan;
    if (!s.techniques.sgs || s.techniques.mls) {
        plan.strategy = OrderingStrategy::PreAssigned;
        plan.channels = {Channel{FlowId{0}, s.method}};
        return plan;
    }
    const SgsSpec& g = *s.techniques.sgs;
    plan.strategy = g.strategy;
    plan.k = g.k;
    plan.stagger = g.stagger;
    if (g.channels.empty()) {
        for (std::uint32_t f = 0; f < s.flows.size(); ++f) plan.channels.push_back(Channel{FlowId{f}, s.method});
    } else {
        plan.channels = g.channels;
    }
    for (std::size_t i = 0; i < plan.k; ++i) {
        auto it = g.redundancy.find(i);
        const std::size_t r = it == g.redundancy.end() ? g.replicas : it->second;
        if (r != 1) plan.redundancy[i] = r;
    }
    return plan;
}

struct Trace {
    bool recovered = false;
    double overt = 0.0;
    double upper = 0.0;
    double lower = 0.0;
    std::vector<Delivery> deliveries;
};

/// First `count` delivered packets of a flow, in send order.
std::vector<OvertPacket> observed(const std::vector<Delivery>& deliveries, FlowId flow, std::size_t count) {
    std::vector<const Delivery*> mine;
    for (const auto& d : deliveries) {
        if (d.packet.flow == flow) mine.push_back(&d);
    }
    std::sort(mine.begin(), mine.end(), [](const Delivery* a, const Delivery* b) { return a->sequence < b->sequence; });
    std::vector<OvertPacket> out;
    for (std::size_t i = 0; i < mine.size() && i < count; ++i) out.push_back(mine[i]->packet);
    return out;
}

CarrierAgreement channel_agreement(const Scenario& s, const ScatterPlan& plan, std::size_t ch, std::uint64_t seed,
                                   bool naive) {
    const auto& t = s.techniques;
    CarrierAgreement a{HoppingSchedule::fixed(plan.channels.at(ch).method), s.carrier, {}, {}, {}};
    if (naive) return a;
    if (t.sgh) a.schedule = *t.sgh;
    if (t.cmc) {
        std::optional<RateGate> gate;
        std::optional<AnomalyPacer> pacer;
        if (t.cmc->rate_reduction) gate.emplace(RateReduction{*t.cmc->rate_reduction}, derive_seed(seed, kGateStream + ch));
        if (t.cmc->anomaly_ride) {
            const auto& r = *t.cmc->anomaly_ride;
            const double natural = r.kind == AnomalyKind::Retransmission ? s.network.natural_retransmission_rate
                                                                         : s.network.natural_padding_rate;
            pacer.emplace(ride(AnomalyRide{r.kind}, r.requested_rate, natural));
        }
        if (gate || pacer) {
            a.accept = [gate, pacer](std::size_t i) { return (!gate || (*gate)(i)) && (!pacer || (*pacer)(i)); };
        }
        if (!t.cmc->parameter_walk.empty()) {
            a.config_at = [w = ParameterWalk{s.carrier, t.cmc->parameter_walk}](std::size_t o) { return walk(w, o); };
        }
    }
    if (t.ips_key) a.hop_key = HopKey(*t.ips_key);
    return a;
}

Tick run_epoch(const Scenario& s, std::uint64_t seed, bool naive) {
    const auto& cmc = s.techniques.cmc;
    if (naive || !cmc || !cmc->pattern_fit) return 0;
    const int hour = fit_sessions(*cmc->pattern_fit, 1, derive_seed(seed, kPatternStream)).front();
    return static_cast<Tick>(hour) * cmc->ticks_per_hour;
}

void pad_idle_flows(const Scenario& s, Network& net, const std::vector<FlowId>& flows,
                    const std::vector<FlowId>& busy, Tick epoch, std::uint64_t seed) {
    for (FlowId f : flows) {
        if (std::find(busy.begin(), busy.end(), f) != busy.end()) continue;
        CarrierWriter idle(net, f, CarrierAgreement{HoppingSchedule::fixed(s.method), s.carrier, {}, {}, {}},
                           flow_cover(s, net.flow(f), seed), epoch, s.traffic.interval);
        idle.pad_to(s.traffic.packets_per_flow);
    }
}

Trace simulate_mls(const Scenario& s, std::uint64_t seed, const BitString& steg) {
    const MlsSpec& m = *s.techniques.mls;
    NetworkConfig nc = s.network;
    nc.seed = seed;
    Network net(nc);
    const auto flows = open_flows(s, net);
    const Tick epoch = run_epoch(s, seed, false);
    const BitString lower = m.lower.make(derive_seed(seed, kLowerStream));
    const MlsStack stack{s.techniques.sgh ? *s.techniques.sgh : HoppingSchedule::fixed(s.method), m.slot_ticks,
                         epoch, nc.base_delay, lower.size()};

    const Flow& flow = net.flow(flows.front());
    OvertPacket stego;
    stego.flow = flow.id;
    stego.protocol = flow.protocol;
    stego.payload_len = s.traffic.profile.payload_min;
    OvertPacket cover = stego;
    cover.payload_len = std::max(s.carrier.min_payload_bytes, s.traffic.profile.payload_max);

    const MlsSendResult sent = mls_encode(steg, lower, stack, s.carrier, flow.id, net, stego, cover, m.cover_per_slot);
    pad_idle_flows(s, net, flows, {flow.id}, epoch, seed);

    Trace t;
    t.deliveries = net.drain();
    std::vector<Delivery> mine;
    for (const auto& d : t.deliveries) {
        if (d.packet.flow == flow.id) mine.push_back(d);
    }
    const MlsDecoded decoded = mls_decode(mine, stack, s.carrier);
    t.recovered = decoded.lower == lower && sent.upper_consumed == steg.size() &&
                  decoded.upper.size() >= steg.size() && decoded.upper.slice(0, steg.size()) == steg;
    const MlsBandwidths bw = mls_bandwidths(mine, stack, decoded);
    t.overt = bw.overt;
    t.upper = bw.upper;
    t.lower = bw.lower;
    return t;
}

Trace simulate(const Scenario& s, std::uint64_t seed, bool naive) {
    const BitString steg = s.steganogram.make(derive_seed(seed, kStegStream));
    if (!naive && s.techniques.mls) return simulate_mls(s, seed, steg);

    NetworkConfig nc = s.network;
    nc.seed = seed;
    Network net(nc);
    const auto flows = open_flows(s, net);

    ScatterPlan plan;
    if (naive) {
        plan.strategy = OrderingStrategy::PreAssigned;
        plan.channels = {Channel{FlowId{0}, s.method}};
    } else {
        plan = dht_plan(s);
    }
    ScatterContext ctx;
    ctx.cfg = s.carrier;
    ctx.epoch = run_epoch(s, seed, naive);
    ctx.interval = s.traffic.interval;
    ctx.path_delay = nc.base_delay;
    ctx.agreement = [&](std::size_t ch) { return channel_agreement(s, plan, ch, seed, naive); };
    ctx.cover = [&](std::size_t ch) { return flow_cover(s, net.flow(plan.channels.at(ch).flow), seed); };

    const Steganogram message{1, steg};
    scatter_send(split(message, plan.k), plan, ctx, net, s.traffic.packets_per_flow);
    std::vector<FlowId> busy;
    for (const auto& c : plan.channels) busy.push_back(c.flow);
    pad_idle_flows(s, net, flows, busy, ctx.epoch, seed);

    Trace t;
    t.deliveries = net.drain();
    const ReceiverKnowledge knowledge{message.id, steg.size()};
    try {
        const Steganogram got = reassemble(collect_fragments(t.deliveries, plan, ctx, knowledge), plan, ctx, knowledge);
        t.recovered = got.payload == steg;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::MissingFragment && e.code() != ErrorCode::OrderAmbiguity) throw;
        t.recovered = false;
    }

    Tick last = ctx.epoch;
    std::size_t wire = 0;
    for (const auto& d : t.deliveries) {
        last = std::max(last, d.delivered_at);
        wire += d.packet.wire_bits();
    }
    const double horizon = static_cast<double>(last - ctx.epoch + 1);
    t.overt = static_cast<double>(wire) / horizon;
    t.upper = t.recovered ? static_cast<double>(steg.size()) / horizon : 0.0;
    return t;
}

std::vector<DetectorReport> inspect(const Scenario& s, const std::vector<DetectorSpec>& specs, const Trace& t) {
    std::vector<DetectorReport> out;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const FlowId flow{static_cast<std::uint32_t>(s.detectors[i].flow)};
        out.push_back(evaluate(specs[i], observed(t.deliveries, flow, s.traffic.packets_per_flow)));
    }
    return out;
}

} // namespace

BitString BitSource::make(std::uint64_t seed) const {
    if (bytes) return bits_from_bytes(*bytes);
    Rng rng(seed);
    return rng.bits(random_bits);
}

std::vector<DetectorSpec> calibrate(const Scenario& s) {
    std::vector<DetectorSpec> out;
    for (std::size_t i = 0; i < s.detectors.size(); ++i) {
        const DetectorConfig& d = s.detectors[i];
        if (d.fixed_threshold) {
            out.push_back(d.spec);
            continue;
        }
        const FlowSpec& fs = s.flows.at(d.flow);
        auto clean = [&](std::size_t trial) {
            NetworkConfig nc = s.network;
            nc.seed = derive_seed(derive_seed(s.seed, kCalibrationStream + i), trial);
            Network net(nc);
            const FlowId id = net.open_flow(HostId{fs.src}, HostId{s.senders + fs.dst}, fs.protocol, fs.streams,
                                            fs.addresses);
            CarrierWriter w(net, id, CarrierAgreement{HoppingSchedule::fixed(s.method), s.carrier, {}, {}, {}},
                            flow_cover(s, net.flow(id), nc.seed), 0, s.traffic.interval);
            w.pad_to(s.traffic.packets_per_flow);
            return observed(net.drain(), id, s.traffic.packets_per_flow);
        };
        DetectorSpec spec = d.spec;
        spec.threshold = calibrate_threshold(d.spec, clean, s.calibration_trials, s.calibration_quantile);
        out.push_back(spec);
    }
    return out;
}

SeedResult run_seed(const Scenario& s, std::uint64_t seed, const std::vector<DetectorSpec>& calibrated) {
    if (calibrated.size() != s.detectors.size()) {
        throw Error(ErrorCode::ScenarioMismatch, "calibrated detectors do not match the scenario");
    }
    const Trace dht = simulate(s, seed, false);
    const Trace naive = simulate(s, seed, true);
    SeedResult r;
    r.seed = seed;
    r.recovered = dht.recovered;
    r.overt_bps = dht.overt;
    r.upper_bps = dht.upper;
    r.lower_bps = dht.lower;
    r.paired = detectability_score(inspect(s, calibrated, naive), inspect(s, calibrated, dht));
    return r;
}

ExperimentReport run(const Scenario& s, std::size_t seed_count) {
    validate(s);
    const std::size_t n = seed_count == 0 ? s.repetitions : seed_count;
    const auto detectors = calibrate(s);
    ExperimentReport report;
    for (std::size_t i = 0; i < n; ++i) report.seeds.push_back(run_seed(s, s.seed + i, detectors));
    return report;
}

} // namespace dht
