#pragma once

#include <string>
#include <vector>

#include "kpd/eval.hpp"
#include "kpd/train.hpp"

namespace kpd {

void write_loss_csv(const std::string& path, const std::vector<LossRecord>& history,
                    const std::string& term1, const std::string& term2,
                    const std::string& term3);

void write_pair_metrics_csv(const std::string& path, const std::vector<PairMetrics>& rows);

struct AggregateRow {
    std::string model;
    double precision = 0, repeatability = 0;
};

// "model,precision,repeatability" with a header row; appends harmonic mean.
void write_aggregate_csv(const std::string& path, const std::vector<AggregateRow>& rows);
std::vector<AggregateRow> read_aggregate_csv(const std::string& path);

// Markdown: one results table (model, repeatability, precision, harmonic
// mean) plus a harmonic-vs-arithmetic mean comparison table.
std::string render_markdown_report(const std::vector<AggregateRow>& rows);

}  // namespace kpd
