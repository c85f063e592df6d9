#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dht/simnet.hpp"

namespace dht {

enum class Verdict { Clean, Suspicious };
std::string_view to_string(Verdict verdict);

struct DetectorReport {
    std::string detector;
    double statistic = 0.0;
    double threshold = 0.0;
    Verdict verdict = Verdict::Clean;
    std::size_t sample_size = 0;
};

/// Builds a report; the verdict is Suspicious iff statistic > threshold.
DetectorReport make_report(std::string detector, double statistic, double threshold, std::size_t sample_size);

/// Pearson statistic of `observed` against total * weights.
double chi_square(std::span<const std::uint64_t> observed, std::span<const double> weights);

/// Per-category counts of a packet field. Values outside [0, categories) throw.
std::vector<std::uint64_t> stream_counts(const std::vector<OvertPacket>& packets, std::size_t categories);
std::vector<std::uint64_t> address_counts(const std::vector<OvertPacket>& packets, std::size_t categories);
/// Category v counts packets with chunk_count v + 1.
std::vector<std::uint64_t> chunk_counts(const std::vector<OvertPacket>& packets, std::size_t categories);

inline constexpr double kNoThreshold = std::numeric_limits<double>::infinity();

DetectorReport stream_usage_stat(const std::vector<OvertPacket>& packets, std::size_t stream_count,
                                 std::span<const double> baseline, double threshold = kNoThreshold);
DetectorReport address_usage_stat(const std::vector<OvertPacket>& packets, std::size_t address_count,
                                  std::span<const double> baseline, double threshold = kNoThreshold);
DetectorReport chunk_count_stat(const std::vector<OvertPacket>& packets, std::size_t max_chunk_count,
                                std::span<const double> baseline, double threshold = kNoThreshold);

/// |p_hat - r| / sqrt(r(1-r)/n). Retransmission: every packet is a trial and
/// a retransmitted one is a hit. Padding: every padded frame is a trial and
/// one with a non-zero padding byte is a hit.
DetectorReport anomaly_rate_stat(const std::vector<OvertPacket>& packets, AnomalyKind kind, double natural_rate,
                                 double threshold = kNoThreshold);

enum class DetectorKind { StreamUsage, AddressUsage, ChunkCount, RetransmissionRate, PaddingRate };
std::string_view to_string(DetectorKind kind);
DetectorKind parse_detector(std::string_view name);

/// One configured detector. Usage detectors use `baseline` (its size is the
/// category count); rate detectors use `natural_rate`.
struct DetectorSpec {
    DetectorKind kind = DetectorKind::StreamUsage;
    std::vector<double> baseline;
    double natural_rate = 0.0;
    double threshold = kNoThreshold;

    void validate() const;
};

DetectorReport evaluate(const DetectorSpec& spec, const std::vector<OvertPacket>& packets);
std::vector<DetectorReport> evaluate_all(const std::vector<DetectorSpec>& specs,
                                         const std::vector<OvertPacket>& packets);

/// Empirical `quantile` of the detector statistic over `trials` clean traces.
double calibrate_threshold(const DetectorSpec& spec,
                           const std::function<std::vector<OvertPacket>(std::size_t trial)>& clean_trace,
                           std::size_t trials, double quantile = 0.95);

struct PairedReport {
    std::vector<DetectorReport> naive;
    std::vector<DetectorReport> dht;
    std::vector<double> ratios;  // dht / naive per detector
    double score = 1.0;          // max ratio
};

/// Side-by-side statistics. Equal statistics give ratio 1 (including 0/0);
/// a positive statistic over a zero one gives +inf.
PairedReport detectability_score(const std::vector<DetectorReport>& naive, const std::vector<DetectorReport>& dht);
PairedReport detectability_score(const std::vector<OvertPacket>& naive_trace,
                                 const std::vector<OvertPacket>& dht_trace,
                                 const std::vector<DetectorSpec>& detectors);

} // namespace dht
