#include "kpd/report.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "kpd/metrics.hpp"

namespace kpd {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    return os;
}

std::string fmt(double v, int digits = 6) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << v;
    return os.str();
}

}  // namespace

void write_loss_csv(const std::string& path, const std::vector<LossRecord>& history,
                    const std::string& term1, const std::string& term2,
                    const std::string& term3) {
    auto os = open_out(path);
    os << "step,total," << term1 << "," << term2 << "," << term3 << "\n";
    for (const auto& r : history)
        os << r.step << "," << fmt(r.total, 8) << "," << fmt(r.term1, 8) << ","
           << fmt(r.term2, 8) << "," << fmt(r.term3, 8) << "\n";
}

void write_pair_metrics_csv(const std::string& path, const std::vector<PairMetrics>& rows) {
    auto os = open_out(path);
    os << "pair,precision_ab,precision_ba,precision_mean,repeatability_ab,repeatability_ba,"
          "repeatability_mean,f1,tp_ab,fp_ab,tp_ba,fp_ba,degenerate\n";
    for (size_t i = 0; i < rows.size(); ++i) {
        const auto& m = rows[i];
        os << i << "," << fmt(m.precision_ab) << "," << fmt(m.precision_ba) << ","
           << fmt(m.precision_mean) << "," << fmt(m.repeatability_ab) << ","
           << fmt(m.repeatability_ba) << "," << fmt(m.repeatability_mean) << ","
           << fmt(m.f1_score) << "," << m.tp_ab << "," << m.fp_ab << "," << m.tp_ba << ","
           << m.fp_ba << "," << (m.degenerate ? 1 : 0) << "\n";
    }
}

void write_aggregate_csv(const std::string& path, const std::vector<AggregateRow>& rows) {
    auto os = open_out(path);
    os << "model,precision,repeatability,harmonic_mean\n";
    for (const auto& r : rows)
        os << r.model << "," << fmt(r.precision) << "," << fmt(r.repeatability) << ","
           << fmt(f1(r.precision, r.repeatability)) << "\n";
}

std::vector<AggregateRow> read_aggregate_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::vector<AggregateRow> rows;
    std::string line;
    std::getline(is, line);  // header
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        AggregateRow row;
        std::string field;
        if (!std::getline(ls, row.model, ',')) continue;
        if (!std::getline(ls, field, ','))
            throw std::runtime_error("bad row in " + path + ": missing precision field");
        row.precision = std::stod(field);
        if (!std::getline(ls, field, ','))
            throw std::runtime_error("bad row in " + path + ": missing repeatability field");
        row.repeatability = std::stod(field);
        rows.push_back(row);
    }
    return rows;
}

std::string render_markdown_report(const std::vector<AggregateRow>& rows) {
    std::ostringstream os;
    os << "## Evaluation results\n\n";
    os << "| model | repeatability | precision | harmonic mean |\n";
    os << "|---|---|---|---|\n";
    for (const auto& r : rows)
        os << "| " << r.model << " | " << fmt(r.repeatability, 4) << " | " << fmt(r.precision, 4)
           << " | " << fmt(f1(r.precision, r.repeatability), 4) << " |\n";

    os << "\n## Harmonic vs arithmetic mean\n\n";
    os << "| model | precision | repeatability | harmonic mean | arithmetic mean |\n";
    os << "|---|---|---|---|---|\n";
    for (const auto& r : rows)
        os << "| " << r.model << " | " << fmt(r.precision, 2) << " | " << fmt(r.repeatability, 2)
           << " | " << fmt(f1(r.precision, r.repeatability), 2) << " | "
           << fmt((r.precision + r.repeatability) / 2.0, 2) << " |\n";
    return os.str();
}

}  // namespace kpd
