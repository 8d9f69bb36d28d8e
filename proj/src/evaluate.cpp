#include "clut/evaluate.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "clut/errors.hpp"
#include "clut/png_io.hpp"

namespace clut {

EvalResult evaluate_dataset(const PairedDataset& ds, bool float_metrics) {
    EvalResult result;
    double sum_psnr = 0, sum_ssim = 0, sum_de = 0;
    std::size_t scored = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        Image output, target;
        try {
            output = read_png(ds.base / ds.pairs[i].first);
            target = read_png(ds.base / ds.pairs[i].second);
        } catch (const IoError& e) {
            result.errors.emplace_back(e.what());
            continue;
        }
        if (!output.same_shape(target)) {
            result.errors.push_back("size mismatch for pair '" + ds.ids[i] + "'");
            continue;
        }
        if (!float_metrics) {
            output = quantize8(output);
            target = quantize8(target);
        }
        EvalRow row{ds.ids[i], evaluate_pair(output, target)};
        sum_psnr += row.metrics.psnr;
        sum_ssim += row.metrics.ssim;
        sum_de += row.metrics.delta_e;
        ++scored;
        result.rows.push_back(std::move(row));
    }
    if (scored > 0) {
        result.mean.psnr = sum_psnr / static_cast<double>(scored);
        result.mean.ssim = sum_ssim / static_cast<double>(scored);
        result.mean.delta_e = sum_de / static_cast<double>(scored);
    }
    return result;
}

namespace {

std::string fmt_metric(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

} // namespace

void write_eval_report(const EvalResult& result, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "id\tpsnr\tssim\tdelta_e\n";
    for (const auto& row : result.rows)
        out << row.id << "\t" << fmt_metric(row.metrics.psnr) << "\t"
            << fmt_metric(row.metrics.ssim) << "\t" << fmt_metric(row.metrics.delta_e)
            << "\n";
    out << "mean\t" << fmt_metric(result.mean.psnr) << "\t"
        << fmt_metric(result.mean.ssim) << "\t" << fmt_metric(result.mean.delta_e)
        << "\n";
    if (!out) throw IoError("write failed: " + path.string());
}

void write_eval_summary(const EvalResult& result, const std::filesystem::path& path) {
    nlohmann::json j;
    j["count"] = result.rows.size();
    auto metric_json = [](const MetricReport& m) {
        nlohmann::json o;
        o["psnr"] = std::isinf(m.psnr) ? nlohmann::json("inf") : nlohmann::json(m.psnr);
        o["ssim"] = m.ssim;
        o["delta_e"] = m.delta_e;
        return o;
    };
    j["mean"] = metric_json(result.mean);
    j["per_image"] = nlohmann::json::array();
    for (const auto& row : result.rows) {
        nlohmann::json o = metric_json(row.metrics);
        o["id"] = row.id;
        j["per_image"].push_back(o);
    }
    j["errors"] = result.errors;
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << j.dump(2) << "\n";
    if (!out) throw IoError("write failed: " + path.string());
}

} // namespace clut
