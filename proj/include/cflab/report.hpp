#pragma once

// CSV/JSON serialization of results and run manifests. CSV output is
// byte-stable: header row, comma delimiter, '\n' line endings, doubles at 17
// significant digits, no locale formatting.

#include "cflab/bounds.hpp"
#include "cflab/martingale.hpp"
#include "cflab/montecarlo.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cflab {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string format_number(double value);
std::string format_optional(const std::optional<double>& value);

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);

    void add_row(std::vector<std::string> cells);
    std::string str() const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

struct RunManifest {
    std::string command;
    nlohmann::ordered_json parameters = nlohmann::ordered_json::object();
    std::uint64_t seed = 0;
    std::string version;
    double wall_clock_seconds = 0.0;
    std::vector<std::string> outputs;

    nlohmann::ordered_json to_json() const;
};

/// Writes `content` to `path`, creating parent directories.
void write_text_file(const std::filesystem::path& path, const std::string& content);

struct BoundsRow {
    double alpha = 0.0;
    OfdmBounds ofdm;
    std::optional<BoundValue> azuma_general;       // r = alpha n, d_k = d
    std::optional<BoundValue> refined_general;     // P(|X_n - X_0| >= alpha n)
    std::optional<BoundValue> refined_asymptotic;  // P(|X_n - X_0| >= alpha sqrt(n))
};

CsvTable bounds_table(const std::vector<BoundsRow>& rows, bool with_general);
CsvTable tails_table(const TailReport& report);
CsvTable trace_table(const DoobTrace& trace);
CsvTable scaling_table(const ScalingTable& table);

nlohmann::ordered_json to_json(const BoundValue& value);
nlohmann::ordered_json sample_summary_json(const CfSample& sample);
nlohmann::ordered_json to_json(const TailReport& report);
nlohmann::ordered_json to_json(const DoobTrace& trace);
nlohmann::ordered_json to_json(const ExhaustiveReport& report);
nlohmann::ordered_json to_json(const BoundedDifferenceReport& report);
nlohmann::ordered_json to_json(const GapReport& report);
nlohmann::ordered_json to_json(const ScalingTable& table);

} // namespace cflab
