#include <charconv>
#include <cmath>
#include <fstream>

#include "json.hpp"

#include "dht/experiment.hpp"

namespace dht {

namespace {

std::string number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

nlohmann::ordered_json json_number(double v) {
    if (!std::isfinite(v)) return nullptr;
    return v;
}

struct Row {
    const SeedResult* seed;
    std::optional<std::size_t> detector;
};

std::vector<Row> rows(const ExperimentReport& report) {
    std::vector<Row> out;
    for (const auto& s : report.seeds) {
        if (s.paired.dht.empty()) {
            out.push_back(Row{&s, std::nullopt});
            continue;
        }
        for (std::size_t d = 0; d < s.paired.dht.size(); ++d) out.push_back(Row{&s, d});
    }
    return out;
}

} // namespace

std::string to_csv(const ExperimentReport& report) {
    std::string out = std::string(kCsvHeader) + "\n";
    for (const Row& r : rows(report)) {
        const SeedResult& s = *r.seed;
        out += std::to_string(s.seed) + "," + (s.recovered ? "true" : "false") + "," + number(s.overt_bps) + "," +
               number(s.upper_bps) + "," + number(s.lower_bps) + ",";
        if (r.detector) {
            const DetectorReport& d = s.paired.dht[*r.detector];
            out += d.detector + "," + number(d.statistic) + "," + number(d.threshold) + "," +
                   std::string(to_string(d.verdict)) + "," + std::to_string(d.sample_size) + "," +
                   number(s.paired.naive[*r.detector].statistic) + ",";
        } else {
            out += ",,,,,,";
        }
        out += number(s.paired.score) + "\n";
    }
    return out;
}

std::string to_json(const ExperimentReport& report) {
    nlohmann::ordered_json doc;
    doc["rows"] = nlohmann::ordered_json::array();
    for (const Row& r : rows(report)) {
        const SeedResult& s = *r.seed;
        nlohmann::ordered_json row;
        row["seed"] = s.seed;
        row["recovered"] = s.recovered;
        row["overt_bps"] = json_number(s.overt_bps);
        row["upper_bps"] = json_number(s.upper_bps);
        row["lower_bps"] = json_number(s.lower_bps);
        if (r.detector) {
            const DetectorReport& d = s.paired.dht[*r.detector];
            row["detector"] = d.detector;
            row["statistic"] = json_number(d.statistic);
            row["threshold"] = json_number(d.threshold);
            row["verdict"] = std::string(to_string(d.verdict));
            row["n"] = d.sample_size;
            row["naive_statistic"] = json_number(s.paired.naive[*r.detector].statistic);
        } else {
            for (const char* k : {"detector", "statistic", "threshold", "verdict", "n", "naive_statistic"}) {
                row[k] = nullptr;
            }
        }
        row["score"] = json_number(s.paired.score);
        doc["rows"].push_back(std::move(row));
    }
    return doc.dump(2) + "\n";
}

void emit(const ExperimentReport& report, ReportFormat format, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << (format == ReportFormat::Csv ? to_csv(report) : to_json(report));
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

} // namespace dht
