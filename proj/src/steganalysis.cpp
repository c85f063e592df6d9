#include "dht/steganalysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dht {

std::string_view to_string(Verdict verdict) {
    return verdict == Verdict::Suspicious ? "Suspicious" : "Clean";
}

DetectorReport make_report(std::string detector, double statistic, double threshold, std::size_t sample_size) {
    const Verdict v = statistic > threshold ? Verdict::Suspicious : Verdict::Clean;
    return DetectorReport{std::move(detector), statistic, threshold, v, sample_size};
}

double chi_square(std::span<const std::uint64_t> observed, std::span<const double> weights) {
    if (observed.size() < 2) throw Error(ErrorCode::InvalidArgument, "chi-square needs at least two categories");
    if (observed.size() != weights.size()) {
        throw Error(ErrorCode::InvalidArgument, "observed and expected category counts differ");
    }
    double wsum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw Error(ErrorCode::InvalidArgument, "expected weights must be non-negative");
        wsum += w;
    }
    if (std::abs(wsum - 1.0) > 1e-9) throw Error(ErrorCode::InvalidArgument, "expected weights must sum to 1");

    const double total = std::accumulate(observed.begin(), observed.end(), 0.0,
                                         [](double acc, std::uint64_t o) { return acc + static_cast<double>(o); });
    double stat = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        const double o = static_cast<double>(observed[i]);
        if (weights[i] == 0.0) {
            if (observed[i] != 0) {
                throw Error(ErrorCode::DegenerateExpected,
                            "category " + std::to_string(i) + " has zero weight but " +
                                std::to_string(observed[i]) + " observations");
            }
            continue;
        }
        const double e = total * weights[i];
        stat += (o - e) * (o - e) / e;
    }
    return stat;
}

namespace {

template <class Field>
std::vector<std::uint64_t> count_field(const std::vector<OvertPacket>& packets, std::size_t categories,
                                       Field field, const char* what) {
    std::vector<std::uint64_t> counts(categories, 0);
    for (const auto& p : packets) {
        const std::size_t v = field(p);
        if (v >= categories) {
            throw Error(ErrorCode::InvalidArgument,
                        std::string(what) + " value " + std::to_string(v) + " outside the baseline");
        }
        ++counts[v];
    }
    return counts;
}

DetectorReport usage_report(const char* name, const std::vector<std::uint64_t>& counts,
                            std::span<const double> baseline, double threshold, std::size_t n) {
    if (n == 0) return make_report(name, 0.0, threshold, 0);
    return make_report(name, chi_square(counts, baseline), threshold, n);
}

void check_baseline(std::span<const double> baseline, std::size_t categories) {
    if (baseline.size() != categories) {
        throw Error(ErrorCode::InvalidArgument, "baseline has " + std::to_string(baseline.size()) +
                                                    " weights for " + std::to_string(categories) + " categories");
    }
}

} // namespace

std::vector<std::uint64_t> stream_counts(const std::vector<OvertPacket>& packets, std::size_t categories) {
    return count_field(packets, categories, [](const OvertPacket& p) { return std::size_t{p.stream.value}; },
                       "stream");
}

std::vector<std::uint64_t> address_counts(const std::vector<OvertPacket>& packets, std::size_t categories) {
    return count_field(packets, categories,
                       [](const OvertPacket& p) { return std::size_t{p.dest_address.value}; }, "address");
}

std::vector<std::uint64_t> chunk_counts(const std::vector<OvertPacket>& packets, std::size_t categories) {
    return count_field(packets, categories,
                       [](const OvertPacket& p) {
                           return p.chunk_count == 0 ? std::size_t(-1) : std::size_t{p.chunk_count - 1};
                       },
                       "chunk count");
}

DetectorReport stream_usage_stat(const std::vector<OvertPacket>& packets, std::size_t stream_count,
                                 std::span<const double> baseline, double threshold) {
    check_baseline(baseline, stream_count);
    return usage_report("stream_usage", stream_counts(packets, stream_count), baseline, threshold, packets.size());
}

DetectorReport address_usage_stat(const std::vector<OvertPacket>& packets, std::size_t address_count,
                                  std::span<const double> baseline, double threshold) {
    check_baseline(baseline, address_count);
    return usage_report("address_usage", address_counts(packets, address_count), baseline, threshold,
                        packets.size());
}

DetectorReport chunk_count_stat(const std::vector<OvertPacket>& packets, std::size_t max_chunk_count,
                                std::span<const double> baseline, double threshold) {
    check_baseline(baseline, max_chunk_count);
    return usage_report("chunk_count", chunk_counts(packets, max_chunk_count), baseline, threshold,
                        packets.size());
}

DetectorReport anomaly_rate_stat(const std::vector<OvertPacket>& packets, AnomalyKind kind, double natural_rate,
                                 double threshold) {
    if (!(natural_rate > 0.0 && natural_rate < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "natural rate must lie strictly between 0 and 1");
    }
    std::size_t n = 0;
    std::size_t hits = 0;
    for (const auto& p : packets) {
        if (kind == AnomalyKind::Retransmission) {
            ++n;
            hits += p.retransmitted ? 1 : 0;
        } else if (!p.padding.empty()) {
            ++n;
            hits += std::any_of(p.padding.begin(), p.padding.end(), [](std::uint8_t b) { return b != 0; }) ? 1 : 0;
        }
    }
    const std::string name =
        kind == AnomalyKind::Retransmission ? "retransmission_rate" : "padding_rate";
    if (n == 0) return make_report(name, 0.0, threshold, 0);
    const double nd = static_cast<double>(n);
    const double rate = static_cast<double>(hits) / nd;
    const double se = std::sqrt(natural_rate * (1.0 - natural_rate) / nd);
    return make_report(name, std::abs(rate - natural_rate) / se, threshold, n);
}

std::string_view to_string(DetectorKind kind) {
    switch (kind) {
    case DetectorKind::StreamUsage: return "stream_usage";
    case DetectorKind::AddressUsage: return "address_usage";
    case DetectorKind::ChunkCount: return "chunk_count";
    case DetectorKind::RetransmissionRate: return "retransmission_rate";
    case DetectorKind::PaddingRate: return "padding_rate";
    }
    return "?";
}

DetectorKind parse_detector(std::string_view name) {
    for (auto k : {DetectorKind::StreamUsage, DetectorKind::AddressUsage, DetectorKind::ChunkCount,
                   DetectorKind::RetransmissionRate, DetectorKind::PaddingRate}) {
        if (to_string(k) == name) return k;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown detector '" + std::string(name) + "'");
}

void DetectorSpec::validate() const {
    switch (kind) {
    case DetectorKind::StreamUsage:
    case DetectorKind::AddressUsage:
    case DetectorKind::ChunkCount: {
        if (baseline.size() < 2) throw Error(ErrorCode::InvalidArgument, "baseline needs at least two categories");
        const double s = std::accumulate(baseline.begin(), baseline.end(), 0.0);
        if (std::abs(s - 1.0) > 1e-9 ||
            std::any_of(baseline.begin(), baseline.end(), [](double w) { return !(w >= 0.0); })) {
            throw Error(ErrorCode::InvalidArgument, "baseline must be a probability vector");
        }
        break;
    }
    case DetectorKind::RetransmissionRate:
    case DetectorKind::PaddingRate:
        if (!(natural_rate > 0.0 && natural_rate < 1.0)) {
            throw Error(ErrorCode::InvalidArgument, "natural rate must lie strictly between 0 and 1");
        }
        break;
    }
}

DetectorReport evaluate(const DetectorSpec& spec, const std::vector<OvertPacket>& packets) {
    spec.validate();
    switch (spec.kind) {
    case DetectorKind::StreamUsage:
        return stream_usage_stat(packets, spec.baseline.size(), spec.baseline, spec.threshold);
    case DetectorKind::AddressUsage:
        return address_usage_stat(packets, spec.baseline.size(), spec.baseline, spec.threshold);
    case DetectorKind::ChunkCount:
        return chunk_count_stat(packets, spec.baseline.size(), spec.baseline, spec.threshold);
    case DetectorKind::RetransmissionRate:
        return anomaly_rate_stat(packets, AnomalyKind::Retransmission, spec.natural_rate, spec.threshold);
    case DetectorKind::PaddingRate:
        return anomaly_rate_stat(packets, AnomalyKind::Padding, spec.natural_rate, spec.threshold);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown detector kind");
}

std::vector<DetectorReport> evaluate_all(const std::vector<DetectorSpec>& specs,
                                         const std::vector<OvertPacket>& packets) {
    std::vector<DetectorReport> out;
    out.reserve(specs.size());
    for (const auto& s : specs) out.push_back(evaluate(s, packets));
    return out;
}

double calibrate_threshold(const DetectorSpec& spec,
                           const std::function<std::vector<OvertPacket>(std::size_t trial)>& clean_trace,
                           std::size_t trials, double quantile) {
    if (trials == 0) throw Error(ErrorCode::InvalidArgument, "calibration needs at least one trial");
    DetectorSpec open = spec;
    open.threshold = kNoThreshold;
    std::vector<double> stats;
    stats.reserve(trials);
    for (std::size_t t = 0; t < trials; ++t) stats.push_back(evaluate(open, clean_trace(t)).statistic);
    return empirical_quantile(stats, quantile);
}

PairedReport detectability_score(const std::vector<DetectorReport>& naive, const std::vector<DetectorReport>& dht) {
    if (naive.size() != dht.size()) throw Error(ErrorCode::ScenarioMismatch, "detector sets differ in size");
    PairedReport out{naive, dht, {}, 1.0};
    for (std::size_t i = 0; i < naive.size(); ++i) {
        if (naive[i].detector != dht[i].detector) {
            throw Error(ErrorCode::ScenarioMismatch,
                        "detector " + naive[i].detector + " paired with " + dht[i].detector);
        }
        const double a = naive[i].statistic;
        const double b = dht[i].statistic;
        double ratio = 1.0;
        if (a != b) ratio = a == 0.0 ? std::numeric_limits<double>::infinity() : b / a;
        out.ratios.push_back(ratio);
    }
    if (!out.ratios.empty()) out.score = *std::max_element(out.ratios.begin(), out.ratios.end());
    return out;
}

PairedReport detectability_score(const std::vector<OvertPacket>& naive_trace,
                                 const std::vector<OvertPacket>& dht_trace,
                                 const std::vector<DetectorSpec>& detectors) {
    return detectability_score(evaluate_all(detectors, naive_trace), evaluate_all(detectors, dht_trace));
}

} // namespace dht
