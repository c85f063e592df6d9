#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "dht/experiment.hpp"

namespace dht {

using nlohmann::json;

ConfigError::ConfigError(std::string path, const std::string& message)
    : Error(ErrorCode::ConfigError, path + ": " + message), path_(std::move(path)) {}

namespace {

std::string child(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string item(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

void expect_object(const json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path.empty() ? "$" : path, "expected an object");
}

void reject_unknown(const json& j, const std::string& path, std::initializer_list<const char*> known) {
    std::set<std::string> ok(known.begin(), known.end());
    for (const auto& [key, value] : j.items()) {
        if (!ok.count(key)) throw ConfigError(child(path, key), "unknown field");
    }
}

template <class T>
T as(const json& j, const std::string& path) {
    try {
        if constexpr (std::is_same_v<T, bool>) {
            if (!j.is_boolean()) throw ConfigError(path, "expected a boolean");
        } else if constexpr (std::is_integral_v<T>) {
            if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
            if (std::is_unsigned_v<T> && j.get<std::int64_t>() < 0 && !j.is_number_unsigned()) {
                throw ConfigError(path, "must be non-negative");
            }
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!j.is_number()) throw ConfigError(path, "expected a number");
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!j.is_string()) throw ConfigError(path, "expected a string");
        }
        return j.get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(path, e.what());
    }
}

template <class T>
T field(const json& obj, const std::string& path, const char* key, T fallback) {
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    return as<T>(*it, child(path, key));
}

const json& required(const json& obj, const std::string& path, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError(child(path, key), "missing");
    return *it;
}

template <class Parse>
auto parse_enum(const json& j, const std::string& path, Parse parse) {
    const auto text = as<std::string>(j, path);
    try {
        return parse(text);
    } catch (const Error& e) {
        throw ConfigError(path, e.what());
    }
}

std::vector<double> weights(const json& obj, const std::string& path, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) return {};
    const std::string p = child(path, key);
    if (!it->is_array()) throw ConfigError(p, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < it->size(); ++i) out.push_back(as<double>((*it)[i], item(p, i)));
    return out;
}

std::vector<std::uint8_t> hex_field(const json& j, const std::string& path) {
    try {
        return bytes_from_hex(as<std::string>(j, path));
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(path, e.what());
    }
}

BitSource parse_bits(const json& j, const std::string& path) {
    expect_object(j, path);
    reject_unknown(j, path, {"hex", "random_bits"});
    BitSource s;
    const bool has_hex = j.contains("hex");
    const bool has_random = j.contains("random_bits");
    if (has_hex == has_random) throw ConfigError(path, "give exactly one of hex, random_bits");
    if (has_hex) s.bytes = hex_field(j["hex"], child(path, "hex"));
    if (has_random) s.random_bits = as<std::size_t>(j["random_bits"], child(path, "random_bits"));
    return s;
}

NetworkConfig parse_network(const json& j, const std::string& path) {
    expect_object(j, path);
    reject_unknown(j, path,
                   {"loss", "reorder_window", "base_delay", "natural_retransmission_rate", "natural_padding_rate"});
    NetworkConfig n;
    n.loss_probability = field<double>(j, path, "loss", 0.0);
    n.reorder_window = field<Tick>(j, path, "reorder_window", 0);
    n.base_delay = field<Tick>(j, path, "base_delay", 0);
    n.natural_retransmission_rate = field<double>(j, path, "natural_retransmission_rate", 0.0);
    n.natural_padding_rate = field<double>(j, path, "natural_padding_rate", 0.0);
    try {
        n.validate();
    } catch (const Error& e) {
        throw ConfigError(path, e.what());
    }
    return n;
}

CarrierConfig parse_carrier(const json& j, const std::string& path) {
    expect_object(j, path);
    reject_unknown(j, path, {"streams", "addresses", "max_chunks", "min_payload_bytes", "retrans_payload_bits"});
    CarrierConfig c;
    c.stream_count = field<std::uint32_t>(j, path, "streams", 1);
    c.address_count = field<std::uint32_t>(j, path, "addresses", 1);
    c.max_chunk_count = field<std::uint32_t>(j, path, "max_chunks", 1);
    c.min_payload_bytes = field<std::size_t>(j, path, "min_payload_bytes", 46);
    c.retrans_payload_bits = field<std::size_t>(j, path, "retrans_payload_bits", 16);
    try {
        c.validate();
    } catch (const Error& e) {
        throw ConfigError(path, e.what());
    }
    return c;
}

TrafficSpec parse_traffic(const json& j, const std::string& path) {
    expect_object(j, path);
    reject_unknown(j, path, {"packets_per_flow", "interval", "payload_min", "payload_max", "stream_weights",
                             "address_weights", "chunk_weights"});
    TrafficSpec t;
    t.packets_per_flow = field<std::size_t>(j, path, "packets_per_flow", 100);
    t.interval = field<Tick>(j, path, "interval", 10);
    if (t.interval < 1) throw ConfigError(child(path, "interval"), "must be >= 1");
    t.profile.payload_min = field<std::size_t>(j, path, "payload_min", 20);
    t.profile.payload_max = field<std::size_t>(j, path, "payload_max", t.profile.payload_min);
    t.profile.stream_weights = weights(j, path, "stream_weights");
    t.profile.address_weights = weights(j, path, "address_weights");
    t.profile.chunk_weights = weights(j, path, "chunk_weights");
    try {
        t.profile.validate();
    } catch (const Error& e) {
        throw ConfigError(path, e.what());
    }
    return t;
}

HoppingSchedule parse_schedule(const json& j, const std::string& path) {
    expect_object(j, path);
    reject_unknown(j, path, {"schedule", "cyclic"});
    HoppingSchedule s;
    s.cyclic = field<bool>(j, path, "cyclic", true);
    const std::string sp = child(path, "schedule");
    const json& entries = required(j, path, "schedule");
    if (!entries.is_array() || entries.empty()) throw ConfigError(sp, "expected a non-empty array");
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const std::string ep = item(sp, i);
        expect_object(entries[i], ep);
        reject_unknown(entries[i], ep, {"method", "budget"});
        HopEntry e{parse_enum(required(entries[i], ep, "method"), child(ep, "method"), parse_method), 1};
        e.packet_budget = field<std::size_t>(entries[i], ep, "budget", 1);
        if (e.packet_budget < 1) throw ConfigError(child(ep, "budget"), "must be >= 1");
        s.entries.push_back(e);
    }
    return s;
}

SgsSpec parse_sgs(const json& j, const std::string& path) {
    expect_object(j, path);
    reject_unknown(j, path, {"strategy", "k", "channels", "replicas", "redundancy", "stagger"});
    SgsSpec s;
    s.strategy = parse_enum(required(j, path, "strategy"), child(path, "strategy"), parse_strategy);
    s.k = field<std::size_t>(j, path, "k", 1);
    s.replicas = field<std::size_t>(j, path, "replicas", 1);
    s.stagger = field<Tick>(j, path, "stagger", 0);
    if (auto it = j.find("channels"); it != j.end()) {
        const std::string cp = child(path, "channels");
        if (!it->is_array()) throw ConfigError(cp, "expected an array");
        for (std::size_t i = 0; i < it->size(); ++i) {
            const std::string ip = item(cp, i);
            const json& c = (*it)[i];
            expect_object(c, ip);
            reject_unknown(c, ip, {"flow", "method"});
            Channel ch{FlowId{as<std::uint32_t>(required(c, ip, "flow"), child(ip, "flow"))},
                       parse_enum(required(c, ip, "method"), child(ip, "method"), parse_method)};
            s.channels.push_back(ch);
        }
    }
    if (auto it = j.find("redundancy"); it != j.end()) {
        const std::string rp = child(path, "redundancy");
        if (!it->is_object()) throw ConfigError(rp, "expected an object of fragment index to replica count");
        for (const auto& [key, value] : it->items()) {
            std::size_t index = 0;
            try {
                std::size_t used = 0;
                index = std::stoul(key, &used);
                if (used != key.size()) throw std::invalid_argument(key);
            } catch (const std::exception&) {
                throw ConfigError(child(rp, key), "key must be a fragment index");
            }
            s.redundancy[index] = as<std::size_t>(value, child(rp, key));
        }
    }
    return s;
}

CmcSpec parse_cmc(const json& j, const std::string& path) {
    expect_object(j, path);
    reject_unknown(j, path, {"rate_reduction", "parameter_walk", "pattern_fit", "ticks_per_hour", "anomaly_ride"});
    CmcSpec c;
    if (j.contains("rate_reduction")) {
        const double p = as<double>(j["rate_reduction"], child(path, "rate_reduction"));
        if (!(p > 0.0 && p <= 1.0)) throw ConfigError(child(path, "rate_reduction"), "must be in (0,1]");
        c.rate_reduction = p;
    }
    if (auto it = j.find("parameter_walk"); it != j.end()) {
        const std::string wp = child(path, "parameter_walk");
        if (!it->is_array()) throw ConfigError(wp, "expected an array of steps");
        for (std::size_t i = 0; i < it->size(); ++i) {
            const std::string sp = item(wp, i);
            const json& s = (*it)[i];
            expect_object(s, sp);
            reject_unknown(s, sp, {"at", "streams", "addresses", "max_chunks", "min_payload_bytes",
                                   "retrans_payload_bits"});
            ParameterStep step;
            step.at = as<std::size_t>(required(s, sp, "at"), child(sp, "at"));
            if (s.contains("streams")) step.stream_count = as<std::uint32_t>(s["streams"], child(sp, "streams"));
            if (s.contains("addresses")) {
                step.address_count = as<std::uint32_t>(s["addresses"], child(sp, "addresses"));
            }
            if (s.contains("max_chunks")) {
                step.max_chunk_count = as<std::uint32_t>(s["max_chunks"], child(sp, "max_chunks"));
            }
            if (s.contains("min_payload_bytes")) {
                step.min_payload_bytes = as<std::size_t>(s["min_payload_bytes"], child(sp, "min_payload_bytes"));
            }
            if (s.contains("retrans_payload_bits")) {
                step.retrans_payload_bits =
                    as<std::size_t>(s["retrans_payload_bits"], child(sp, "retrans_payload_bits"));
            }
            if (i > 0 && step.at <= c.parameter_walk.back().at) {
                throw ConfigError(child(sp, "at"), "switch ordinals must increase");
            }
            c.parameter_walk.push_back(step);
        }
    }
    if (j.contains("pattern_fit")) {
        const std::string pp = child(path, "pattern_fit");
        const auto w = weights(j, path, "pattern_fit");
        if (w.size() != 24) throw ConfigError(pp, "expected 24 hour weights");
        PatternFit fit;
        std::copy(w.begin(), w.end(), fit.histogram.begin());
        try {
            fit_sessions(fit, 0, 0);
        } catch (const Error& e) {
            throw ConfigError(pp, e.what());
        }
        c.pattern_fit = fit;
    }
    c.ticks_per_hour = field<Tick>(j, path, "ticks_per_hour", 3600);
    if (c.ticks_per_hour < 1) throw ConfigError(child(path, "ticks_per_hour"), "must be >= 1");
    if (auto it = j.find("anomaly_ride"); it != j.end()) {
        const std::string ap = child(path, "anomaly_ride");
        expect_object(*it, ap);
        reject_unknown(*it, ap, {"kind", "rate"});
        AnomalyRideSpec r;
        r.kind = parse_enum(required(*it, ap, "kind"), child(ap, "kind"), parse_anomaly_kind);
        r.requested_rate = as<double>(required(*it, ap, "rate"), child(ap, "rate"));
        if (!(r.requested_rate >= 0.0 && r.requested_rate <= 1.0)) {
            throw ConfigError(child(ap, "rate"), "must be in [0,1]");
        }
        c.anomaly_ride = r;
    }
    return c;
}

MlsSpec parse_mls(const json& j, const std::string& path) {
    expect_object(j, path);
    reject_unknown(j, path, {"slot_ticks", "lower", "cover_per_slot"});
    MlsSpec m;
    m.slot_ticks = field<Tick>(j, path, "slot_ticks", 1000);
    if (m.slot_ticks < 1) throw ConfigError(child(path, "slot_ticks"), "must be >= 1");
    m.lower = parse_bits(required(j, path, "lower"), child(path, "lower"));
    m.cover_per_slot = field<std::size_t>(j, path, "cover_per_slot", 0);
    return m;
}

TechniqueStack parse_techniques(const json& j, const std::string& path) {
    expect_object(j, path);
    reject_unknown(j, path, {"sgs", "sgh", "cmc", "ips", "mls"});
    TechniqueStack t;
    if (j.contains("sgs")) t.sgs = parse_sgs(j["sgs"], child(path, "sgs"));
    if (j.contains("sgh")) t.sgh = parse_schedule(j["sgh"], child(path, "sgh"));
    if (j.contains("cmc")) t.cmc = parse_cmc(j["cmc"], child(path, "cmc"));
    if (j.contains("ips")) {
        const std::string ip = child(path, "ips");
        expect_object(j["ips"], ip);
        reject_unknown(j["ips"], ip, {"key"});
        t.ips_key = hex_field(required(j["ips"], ip, "key"), child(ip, "key"));
        if (t.ips_key->empty()) throw ConfigError(child(ip, "key"), "key must not be empty");
    }
    if (j.contains("mls")) t.mls = parse_mls(j["mls"], child(path, "mls"));
    return t;
}

DetectorConfig parse_detector_config(const json& j, const std::string& path, const NetworkConfig& net) {
    expect_object(j, path);
    reject_unknown(j, path, {"kind", "baseline", "natural_rate", "threshold", "flow"});
    DetectorConfig d;
    d.spec.kind = parse_enum(required(j, path, "kind"), child(path, "kind"), parse_detector);
    d.spec.baseline = weights(j, path, "baseline");
    const double natural = d.spec.kind == DetectorKind::PaddingRate ? net.natural_padding_rate
                                                                     : net.natural_retransmission_rate;
    d.spec.natural_rate = field<double>(j, path, "natural_rate", natural);
    d.flow = field<std::size_t>(j, path, "flow", 0);
    if (j.contains("threshold")) {
        d.spec.threshold = as<double>(j["threshold"], child(path, "threshold"));
        d.fixed_threshold = true;
    }
    try {
        d.spec.validate();
    } catch (const Error& e) {
        throw ConfigError(path, e.what());
    }
    return d;
}

} // namespace

Scenario parse_scenario(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("$", e.what());
    }
    expect_object(j, "");
    reject_unknown(j, "", {"seed", "network", "hosts", "flows", "carrier", "traffic", "steganogram", "method",
                           "techniques", "detectors", "calibration", "repetitions"});
    Scenario s;
    s.seed = field<std::uint64_t>(j, "", "seed", 1);
    if (j.contains("network")) s.network = parse_network(j["network"], "network");
    if (j.contains("hosts")) {
        expect_object(j["hosts"], "hosts");
        reject_unknown(j["hosts"], "hosts", {"senders", "receivers"});
        s.senders = field<std::uint32_t>(j["hosts"], "hosts", "senders", 1);
        s.receivers = field<std::uint32_t>(j["hosts"], "hosts", "receivers", 1);
    }
    const json& flows = required(j, "", "flows");
    if (!flows.is_array()) throw ConfigError("flows", "expected an array");
    for (std::size_t i = 0; i < flows.size(); ++i) {
        const std::string fp = item("flows", i);
        expect_object(flows[i], fp);
        reject_unknown(flows[i], fp, {"src", "dst", "protocol", "streams", "addresses", "label"});
        FlowSpec f;
        f.src = field<std::uint32_t>(flows[i], fp, "src", 0);
        f.dst = field<std::uint32_t>(flows[i], fp, "dst", 0);
        if (flows[i].contains("protocol")) {
            f.protocol = parse_enum(flows[i]["protocol"], child(fp, "protocol"), parse_protocol);
        }
        f.streams = field<std::uint32_t>(flows[i], fp, "streams", 1);
        f.addresses = field<std::uint32_t>(flows[i], fp, "addresses", 1);
        f.label = field<std::string>(flows[i], fp, "label", "");
        s.flows.push_back(f);
    }
    if (j.contains("carrier")) s.carrier = parse_carrier(j["carrier"], "carrier");
    if (j.contains("traffic")) s.traffic = parse_traffic(j["traffic"], "traffic");
    s.steganogram = parse_bits(required(j, "", "steganogram"), "steganogram");
    s.method = parse_enum(required(j, "", "method"), "method", parse_method);
    if (j.contains("techniques")) s.techniques = parse_techniques(j["techniques"], "techniques");
    if (j.contains("detectors")) {
        const json& d = j["detectors"];
        if (!d.is_array()) throw ConfigError("detectors", "expected an array");
        for (std::size_t i = 0; i < d.size(); ++i) {
            s.detectors.push_back(parse_detector_config(d[i], item("detectors", i), s.network));
        }
    }
    if (j.contains("calibration")) {
        const json& c = j["calibration"];
        expect_object(c, "calibration");
        reject_unknown(c, "calibration", {"trials", "quantile"});
        s.calibration_trials = field<std::size_t>(c, "calibration", "trials", 200);
        s.calibration_quantile = field<double>(c, "calibration", "quantile", 0.95);
    }
    s.repetitions = field<std::size_t>(j, "", "repetitions", 1);
    validate(s);
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

void validate(const Scenario& s) {
    if (s.senders < 1) throw ConfigError("hosts.senders", "must be >= 1");
    if (s.receivers < 1) throw ConfigError("hosts.receivers", "must be >= 1");
    if (s.flows.empty()) throw ConfigError("flows", "at least one flow is required");
    for (std::size_t i = 0; i < s.flows.size(); ++i) {
        const auto& f = s.flows[i];
        if (f.src >= s.senders) throw ConfigError(child(item("flows", i), "src"), "no such sender host");
        if (f.dst >= s.receivers) throw ConfigError(child(item("flows", i), "dst"), "no such receiver host");
    }
    if (s.calibration_trials < 1) throw ConfigError("calibration.trials", "must be >= 1");
    if (!(s.calibration_quantile > 0.0 && s.calibration_quantile <= 1.0)) {
        throw ConfigError("calibration.quantile", "must be in (0,1]");
    }
    if (s.repetitions < 1) throw ConfigError("repetitions", "must be >= 1");
    if (s.steganogram.bytes && s.steganogram.bytes->size() * 8 > 0xFFFF) {
        throw ConfigError("steganogram.hex", "longer than 65535 bits");
    }

    const auto& t = s.techniques;
    if (t.sgs) {
        const std::string p = "techniques.sgs";
        for (std::size_t i = 0; i < t.sgs->channels.size(); ++i) {
            if (t.sgs->channels[i].flow.value >= s.flows.size()) {
                throw ConfigError(child(item(child(p, "channels"), i), "flow"), "no such flow");
            }
        }
        if (t.sgs->replicas < 1) throw ConfigError(child(p, "replicas"), "must be >= 1");
        ScatterPlan plan;
        plan.strategy = t.sgs->strategy;
        plan.k = t.sgs->k;
        plan.stagger = t.sgs->stagger;
        if (t.sgs->channels.empty()) {
            for (std::uint32_t f = 0; f < s.flows.size(); ++f) plan.channels.push_back(Channel{FlowId{f}, s.method});
        } else {
            plan.channels = t.sgs->channels;
        }
        for (std::size_t i = 0; i < plan.k; ++i) {
            auto it = t.sgs->redundancy.find(i);
            plan.redundancy[i] = it == t.sgs->redundancy.end() ? t.sgs->replicas : it->second;
        }
        for (const auto& [index, count] : t.sgs->redundancy) {
            if (index >= plan.k) throw ConfigError(child(child(p, "redundancy"), std::to_string(index)), "beyond k");
        }
        try {
            plan.validate();
        } catch (const Error& e) {
            throw ConfigError(p, e.what());
        }
        if (plan.strategy == OrderingStrategy::TimeOrdered && plan.stagger <= s.network.reorder_window) {
            throw ConfigError(child(p, "stagger"), "must exceed network.reorder_window");
        }
    }
    if (t.mls) {
        const std::string p = "techniques.mls";
        if (t.sgs && (t.sgs->k != 1 || t.sgs->replicas != 1 || !t.sgs->redundancy.empty())) {
            throw ConfigError(p, "runs on a single unscattered channel");
        }
        if (t.ips_key) throw ConfigError(p, "cannot be combined with techniques.ips");
        if (t.cmc && (t.cmc->rate_reduction || t.cmc->anomaly_ride || !t.cmc->parameter_walk.empty())) {
            throw ConfigError(p, "cannot be combined with CMC gating or parameter walks");
        }
        MlsStack stack{t.sgh ? *t.sgh : HoppingSchedule::fixed(s.method), t.mls->slot_ticks, 0, 0, 0};
        try {
            stack.validate();
        } catch (const Error& e) {
            throw ConfigError("method", e.what());
        }
    }
    for (std::size_t i = 0; i < s.detectors.size(); ++i) {
        if (s.detectors[i].flow >= s.flows.size()) {
            throw ConfigError(child(item("detectors", i), "flow"), "no such flow");
        }
    }
}

} // namespace dht
