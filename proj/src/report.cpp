#include "cflab/report.hpp"

#include <charconv>
#include <fstream>
#include <system_error>

namespace cflab {

namespace {

using Json = nlohmann::ordered_json;

std::string flag(bool value) { return value ? "true" : "false"; }

Json optional_json(const std::optional<double>& value)
{
    return value ? Json(*value) : Json(nullptr);
}

} // namespace

std::string format_number(double value)
{
    char buffer[64];
    auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value,
                                   std::chars_format::general, 17);
    if (ec != std::errc{}) {
        throw std::runtime_error("format_number: conversion failed");
    }
    return std::string(buffer, ptr);
}

std::string format_optional(const std::optional<double>& value)
{
    return value ? format_number(*value) : std::string();
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<std::string> cells)
{
    if (cells.size() != header_.size()) {
        throw std::invalid_argument("CsvTable: row width does not match header");
    }
    rows_.push_back(std::move(cells));
}

std::string CsvTable::str() const
{
    std::string out;
    auto emit = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i > 0) {
                out += ',';
            }
            out += cells[i];
        }
        out += '\n';
    };
    emit(header_);
    for (const auto& row : rows_) {
        emit(row);
    }
    return out;
}

Json RunManifest::to_json() const
{
    Json j;
    j["tool"] = "cf_lab";
    j["version"] = version;
    j["command"] = command;
    j["seed"] = seed;
    j["parameters"] = parameters;
    j["wall_clock_seconds"] = wall_clock_seconds;
    j["outputs"] = outputs;
    return j;
}

void write_text_file(const std::filesystem::path& path, const std::string& content)
{
    std::error_code ec;
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) {
            throw IoError("cannot create directory " + path.parent_path().string() + ": " +
                          ec.message());
        }
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out << content;
    out.flush();
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

CsvTable bounds_table(const std::vector<BoundsRow>& rows, bool with_general)
{
    std::vector<std::string> header = {
        "alpha",          "azuma_raw",        "azuma_capped",     "refined_raw",
        "refined_capped", "mcdiarmid_raw",    "mcdiarmid_capped", "talagrand_raw",
        "talagrand_capped"};
    if (with_general) {
        for (const char* name : {"general_azuma", "general_refined", "general_refined_asymptotic"}) {
            header.push_back(std::string(name) + "_raw");
            header.push_back(std::string(name) + "_capped");
        }
    }
    CsvTable table(header);
    for (const auto& r : rows) {
        std::vector<std::string> cells = {format_number(r.alpha)};
        for (const BoundValue* b :
             {&r.ofdm.azuma, &r.ofdm.refined, &r.ofdm.mcdiarmid, &r.ofdm.talagrand}) {
            cells.push_back(format_number(b->raw));
            cells.push_back(format_number(b->capped));
        }
        if (with_general) {
            for (const auto* b : {&r.azuma_general, &r.refined_general, &r.refined_asymptotic}) {
                cells.push_back(*b ? format_number((*b)->raw) : "");
                cells.push_back(*b ? format_number((*b)->capped) : "");
            }
        }
        table.add_row(std::move(cells));
    }
    return table;
}

CsvTable tails_table(const TailReport& report)
{
    CsvTable table({"alpha", "tail_mean", "se_mean", "tail_median", "se_median", "azuma_raw",
                    "azuma_capped", "refined_raw", "refined_capped", "mcdiarmid_raw",
                    "mcdiarmid_capped", "talagrand_raw", "talagrand_capped", "azuma_violated",
                    "refined_violated", "mcdiarmid_violated", "talagrand_violated"});
    for (const auto& r : report.records) {
        table.add_row({format_number(r.alpha), format_number(r.mean_tail.probability),
                       format_number(r.mean_tail.standard_error),
                       format_number(r.median_tail.probability),
                       format_number(r.median_tail.standard_error),
                       format_number(r.bounds.azuma.raw), format_number(r.bounds.azuma.capped),
                       format_number(r.bounds.refined.raw), format_number(r.bounds.refined.capped),
                       format_number(r.bounds.mcdiarmid.raw),
                       format_number(r.bounds.mcdiarmid.capped),
                       format_number(r.bounds.talagrand.raw),
                       format_number(r.bounds.talagrand.capped), flag(r.azuma_violated),
                       flag(r.refined_violated), flag(r.mcdiarmid_violated),
                       flag(r.talagrand_violated)});
    }
    return table;
}

CsvTable trace_table(const DoobTrace& trace)
{
    CsvTable table({"i", "value", "standard_error", "increment", "cond_second_moment"});
    for (std::size_t i = 0; i < trace.values.size(); ++i) {
        const bool step = i > 0;
        table.add_row({std::to_string(i), format_number(trace.values[i]),
                       format_number(trace.standard_errors[i]),
                       step ? format_number(trace.increments[i - 1]) : "",
                       step ? format_number(trace.cond_second_moments[i - 1]) : ""});
    }
    return table;
}

CsvTable scaling_table(const ScalingTable& scaling)
{
    CsvTable table({"n", "mean_cf", "median_cf", "ratio_mean_to_sqrt_ln", "ratio_mean_to_sqrt_log2",
                    "band_half_width", "within_band"});
    for (const auto& r : scaling.rows) {
        table.add_row({std::to_string(r.n), format_number(r.mean_cf), format_number(r.median_cf),
                       format_optional(r.ratio_ln), format_optional(r.ratio_log2),
                       format_optional(r.band_half_width),
                       r.within_band ? flag(*r.within_band) : ""});
    }
    return table;
}

Json to_json(const BoundValue& value)
{
    return Json{{"raw", value.raw}, {"capped", value.capped}, {"asymptotic", value.asymptotic}};
}

Json sample_summary_json(const CfSample& sample)
{
    Json quantiles = Json::object();
    for (const auto& [p, q] : sample.quantiles) {
        quantiles[format_number(p)] = q;
    }
    return Json{{"trials", sample.values.size()}, {"mean", sample.mean},
                {"median", sample.median},        {"variance", sample.variance},
                {"min", sample.min},              {"max", sample.max},
                {"quantiles", quantiles}};
}

Json to_json(const TailReport& report)
{
    Json records = Json::array();
    for (const auto& r : report.records) {
        records.push_back(Json{
            {"alpha", r.alpha},
            {"tail_mean", r.mean_tail.probability},
            {"se_mean", r.mean_tail.standard_error},
            {"tail_median", r.median_tail.probability},
            {"se_median", r.median_tail.standard_error},
            {"bounds", Json{{"azuma", to_json(r.bounds.azuma)},
                            {"refined", to_json(r.bounds.refined)},
                            {"mcdiarmid", to_json(r.bounds.mcdiarmid)},
                            {"talagrand", to_json(r.bounds.talagrand)}}},
            {"violations", Json{{"azuma", r.azuma_violated},
                                {"refined", r.refined_violated},
                                {"mcdiarmid", r.mcdiarmid_violated},
                                {"talagrand", r.talagrand_violated}}},
        });
    }
    return Json{{"mean_center", report.mean_center},
                {"median_center", report.median_center},
                {"slack_standard_errors", TailReport::kSlackStandardErrors},
                {"violation_count", report.violation_count()},
                {"records", records}};
}

Json to_json(const DoobTrace& trace)
{
    return Json{{"mode", trace.mode == TraceMode::Exact ? "exact" : "mc"},
                {"inner_samples", trace.inner_samples},
                {"values", trace.values},
                {"standard_errors", trace.standard_errors},
                {"increments", trace.increments},
                {"cond_second_moments", trace.cond_second_moments}};
}

Json to_json(const ExhaustiveReport& report)
{
    return Json{{"codewords", report.codewords},
                {"expected_cf", report.expected_cf},
                {"max_tower_error", report.max_tower_error},
                {"tower_tolerance", ExhaustiveReport::kTowerTolerance},
                {"max_increment", report.max_increment},
                {"increment_bound", report.increment_bound},
                {"max_second_moment", report.max_second_moment},
                {"second_moment_bound", report.second_moment_bound},
                {"tower_violations", report.tower_violations},
                {"increment_violations", report.increment_violations},
                {"second_moment_violations", report.second_moment_violations},
                {"satisfied", report.satisfied()}};
}

Json to_json(const BoundedDifferenceReport& report)
{
    return Json{{"max_increment", report.max_increment},
                {"bound", report.bound},
                {"satisfied", report.satisfied}};
}

Json to_json(const GapReport& report)
{
    return Json{{"gap", report.gap}, {"bound", report.bound}, {"satisfied", report.satisfied}};
}

Json to_json(const ScalingTable& table)
{
    Json rows = Json::array();
    for (const auto& r : table.rows) {
        rows.push_back(Json{{"n", r.n},
                            {"mean_cf", r.mean_cf},
                            {"median_cf", r.median_cf},
                            {"ratio_mean_to_sqrt_ln", optional_json(r.ratio_ln)},
                            {"ratio_mean_to_sqrt_log2", optional_json(r.ratio_log2)},
                            {"band_half_width", optional_json(r.band_half_width)},
                            {"within_band", r.within_band ? Json(*r.within_band) : Json(nullptr)}});
    }
    return Json{{"rows", rows},
                {"mean_nondecreasing", table.mean_nondecreasing},
                {"mean_strictly_increasing", table.mean_strictly_increasing},
                {"ratio_ln_spread", table.ratio_ln_spread()},
                {"band_constant", ScalingTable::kBandConstant}};
}

} // namespace cflab
