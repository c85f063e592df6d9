#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dht/cmc.hpp"
#include "dht/mls.hpp"
#include "dht/sgs.hpp"
#include "dht/steganalysis.hpp"

namespace dht {

class ConfigError : public Error {
public:
    ConfigError(std::string path, const std::string& message);
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

struct FlowSpec {
    std::uint32_t src = 0;  // sender host index
    std::uint32_t dst = 0;  // receiver host index
    CarrierProtocolTag protocol = CarrierProtocolTag::TCP;
    std::uint32_t streams = 1;
    std::uint32_t addresses = 1;
    std::string label;
};

struct TrafficSpec {
    std::size_t packets_per_flow = 100;
    Tick interval = 10;
    TrafficProfile profile;  // anomaly rates come from the network config
};

/// Explicit bytes, or `random_bits` bits drawn from the run seed.
struct BitSource {
    std::optional<std::vector<std::uint8_t>> bytes;
    std::size_t random_bits = 0;

    BitString make(std::uint64_t seed) const;
};

struct SgsSpec {
    OrderingStrategy strategy = OrderingStrategy::PositionalHeader;
    std::size_t k = 1;
    std::vector<Channel> channels;  // empty: every flow, carrying the scenario method
    std::map<std::size_t, std::size_t> redundancy;
    std::size_t replicas = 1;       // default for fragments absent from `redundancy`
    Tick stagger = 0;
};

struct AnomalyRideSpec {
    AnomalyKind kind = AnomalyKind::Retransmission;
    double requested_rate = 0.0;
};

struct CmcSpec {
    std::optional<double> rate_reduction;
    std::vector<ParameterStep> parameter_walk;
    std::optional<PatternFit> pattern_fit;
    Tick ticks_per_hour = 3600;
    std::optional<AnomalyRideSpec> anomaly_ride;
};

struct MlsSpec {
    Tick slot_ticks = 1000;
    BitSource lower;
    std::size_t cover_per_slot = 0;
};

/// Techniques in fixed composition order, outermost first.
struct TechniqueStack {
    std::optional<SgsSpec> sgs;
    std::optional<HoppingSchedule> sgh;
    std::optional<CmcSpec> cmc;
    std::optional<std::vector<std::uint8_t>> ips_key;
    std::optional<MlsSpec> mls;
};

struct DetectorConfig {
    DetectorSpec spec;   // threshold stays infinite until calibrated unless given
    std::size_t flow = 0;
    bool fixed_threshold = false;
};

struct Scenario {
    NetworkConfig network;  // network.seed is replaced by the run seed
    std::uint64_t seed = 1;
    std::uint32_t senders = 1;
    std::uint32_t receivers = 1;
    std::vector<FlowSpec> flows;
    CarrierConfig carrier;
    TrafficSpec traffic;
    BitSource steganogram;
    CarrierMethodId method = CarrierMethodId::MultiStreaming;
    TechniqueStack techniques;
    std::vector<DetectorConfig> detectors;
    std::size_t calibration_trials = 200;
    double calibration_quantile = 0.95;
    std::size_t repetitions = 1;
};

/// Parses and validates; every problem is a ConfigError naming the field.
Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::filesystem::path& path);
void validate(const Scenario& scenario);

struct SeedResult {
    std::uint64_t seed = 0;
    bool recovered = false;
    double overt_bps = 0.0;  // bits per tick
    double upper_bps = 0.0;
    double lower_bps = 0.0;
    PairedReport paired;
};

struct ExperimentReport {
    std::vector<SeedResult> seeds;
};

/// Runs `seed_count` seeds (scenario.repetitions when 0), each paired with a
/// naive single-method baseline on the same seed.
ExperimentReport run(const Scenario& scenario, std::size_t seed_count = 0);

/// One seed, DHT run only; exposed for tests.
SeedResult run_seed(const Scenario& scenario, std::uint64_t seed, const std::vector<DetectorSpec>& calibrated);

/// Detector specs with thresholds calibrated on clean traffic.
std::vector<DetectorSpec> calibrate(const Scenario& scenario);

enum class ReportFormat { Csv, Json };

inline constexpr const char* kCsvHeader =
    "seed,recovered,overt_bps,upper_bps,lower_bps,detector,statistic,threshold,verdict,n,naive_statistic,score";

std::string to_csv(const ExperimentReport& report);
std::string to_json(const ExperimentReport& report);
void emit(const ExperimentReport& report, ReportFormat format, const std::filesystem::path& path);

} // namespace dht
