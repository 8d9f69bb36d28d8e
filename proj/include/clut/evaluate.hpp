#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "clut/data.hpp"
#include "clut/metrics.hpp"

namespace clut {

struct EvalRow {
    std::string id;
    MetricReport metrics;
};

struct EvalResult {
    std::vector<EvalRow> rows;  // ordered by id
    MetricReport mean;
    std::vector<std::string> errors;  // per-pair load failures
};

// Scores dataset inputs against their targets at native resolution. By
// default both sides are quantized to the 8-bit grid first (how results on
// saved PNGs are reported); float_metrics = true skips the quantization.
EvalResult evaluate_dataset(const PairedDataset& ds, bool float_metrics = false);

// Tab-separated report: one row per pair plus a mean row. Infinite PSNR is
// written as "inf".
void write_eval_report(const EvalResult& result, const std::filesystem::path& path);
// Structured JSON summary: pair count, mean metrics, per-image rows.
void write_eval_summary(const EvalResult& result, const std::filesystem::path& path);

} // namespace clut
