#include "cflab/cli.hpp"

#include "cflab/bounds.hpp"
#include "cflab/martingale.hpp"
#include "cflab/montecarlo.hpp"
#include "cflab/report.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#ifndef CF_LAB_VERSION
#define CF_LAB_VERSION "dev"
#endif

namespace cflab::cli {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

std::vector<double> default_alpha_grid()
{
    std::vector<double> grid;
    for (int k = 1; k <= 16; ++k) {
        grid.push_back(0.25 * k);
    }
    return grid;
}

struct OutputOptions {
    std::string out;
    std::string format = "both";

    bool csv() const { return format != "json"; }
    bool json() const { return format != "csv"; }
};

void add_output_options(CLI::App* cmd, OutputOptions& options, bool required)
{
    auto* out = cmd->add_option("--out", options.out, "Output directory");
    if (required) {
        out->required();
    }
    cmd->add_option("--format", options.format, "Report format")
        ->check(CLI::IsMember({"csv", "json", "both"}));
}

fs::path prepare_output_dir(const std::string& out)
{
    const fs::path dir(out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw IoError("cannot create output directory " + dir.string() +
                      (ec ? ": " + ec.message() : ""));
    }
    return dir;
}

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// Writes the listed files plus manifest.json, recording every path in the
// manifest.
void write_outputs(const fs::path& dir, RunManifest& manifest,
                   const std::vector<std::pair<std::string, std::string>>& files)
{
    for (const auto& [name, content] : files) {
        manifest.outputs.push_back((dir / name).string());
    }
    manifest.outputs.push_back((dir / "manifest.json").string());
    for (const auto& [name, content] : files) {
        write_text_file(dir / name, content);
    }
    write_text_file(dir / "manifest.json", manifest.to_json().dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// bounds

struct BoundsOptions {
    std::vector<double> alphas = default_alpha_grid();
    std::optional<double> d;
    double sigma2 = 0.0;
    std::size_t n = 1;
    OutputOptions output;
};

int cmd_bounds(const BoundsOptions& opt)
{
    const auto start = Clock::now();
    for (double a : opt.alphas) {
        if (!(a >= 0.0) || !std::isfinite(a)) {
            throw UsageError("--alphas values must be finite and nonnegative");
        }
    }
    std::optional<MartingaleParams> params;
    if (opt.d) {
        params = MartingaleParams{*opt.d, opt.sigma2, opt.n};
        params->validate();
    }
    std::vector<BoundsRow> rows;
    for (double alpha : opt.alphas) {
        BoundsRow row;
        row.alpha = alpha;
        row.ofdm = ofdm_bounds(alpha);
        if (params) {
            const std::vector<double> d_list(params->n, params->d);
            row.azuma_general = azuma_bound(alpha * static_cast<double>(params->n), d_list);
            row.refined_general = refined_azuma_bound(alpha, *params);
            if (params->sigma2 > 0.0) {
                row.refined_asymptotic = refined_azuma_asymptotic(alpha, *params);
            }
        }
        rows.push_back(row);
    }
    const std::string csv = bounds_table(rows, params.has_value()).str();
    std::cout << csv;

    if (!opt.output.out.empty()) {
        const fs::path dir = prepare_output_dir(opt.output.out);
        RunManifest manifest;
        manifest.command = "bounds";
        manifest.version = CF_LAB_VERSION;
        manifest.parameters["alphas"] = opt.alphas;
        if (params) {
            manifest.parameters["d"] = params->d;
            manifest.parameters["sigma2"] = params->sigma2;
            manifest.parameters["n"] = params->n;
        }
        manifest.parameters["format"] = opt.output.format;
        manifest.wall_clock_seconds = seconds_since(start);
        std::vector<std::pair<std::string, std::string>> files;
        if (opt.output.csv()) {
            files.emplace_back("bounds.csv", csv);
        }
        if (opt.output.json()) {
            Json rows_json = Json::array();
            for (const auto& r : rows) {
                Json j{{"alpha", r.alpha},
                       {"azuma", to_json(r.ofdm.azuma)},
                       {"refined", to_json(r.ofdm.refined)},
                       {"mcdiarmid", to_json(r.ofdm.mcdiarmid)},
                       {"talagrand", to_json(r.ofdm.talagrand)}};
                if (r.azuma_general) {
                    j["general_azuma"] = to_json(*r.azuma_general);
                }
                if (r.refined_general) {
                    j["general_refined"] = to_json(*r.refined_general);
                }
                if (r.refined_asymptotic) {
                    j["general_refined_asymptotic"] = to_json(*r.refined_asymptotic);
                }
                rows_json.push_back(j);
            }
            Json manifest_preview = manifest.to_json();
            files.emplace_back("summary.json",
                               Json{{"manifest", manifest_preview}, {"rows", rows_json}}.dump(2) + "\n");
        }
        write_outputs(dir, manifest, files);
    }
    return kSuccess;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateOptions {
    std::size_t n = 64;
    std::string modulation = "psk4";
    std::size_t trials = 100'000;
    std::uint64_t seed = 1;
    std::vector<double> alphas = default_alpha_grid();
    std::size_t oversample = SignalParams::kDefaultOversampling;
    std::size_t workers = 0;
    OutputOptions output;
};

int cmd_simulate(const SimulateOptions& opt)
{
    const auto start = Clock::now();
    SimulationConfig config;
    config.n = opt.n;
    config.constellation = Constellation::parse(opt.modulation);
    config.trials = opt.trials;
    config.seed = opt.seed;
    config.alphas = opt.alphas;
    config.oversampling = opt.oversample;
    config.workers = opt.workers;
    config.validate();
    const fs::path dir = prepare_output_dir(opt.output.out);

    const CfSample sample = run_cf_simulation(config);
    const SymbolBoundModel model = symbol_bound_model(config.constellation);
    const TailReport tails = compare_bounds(sample, config.alphas, model);
    const GapReport gap = median_mean_gap(sample, model);
    const std::size_t violations = tails.violation_count();

    RunManifest manifest;
    manifest.command = "simulate";
    manifest.version = CF_LAB_VERSION;
    manifest.seed = opt.seed;
    manifest.parameters = Json{{"n", opt.n},
                               {"mod", config.constellation.name()},
                               {"trials", opt.trials},
                               {"seed", opt.seed},
                               {"alphas", opt.alphas},
                               {"oversample", opt.oversample},
                               {"workers", opt.workers},
                               {"format", opt.output.format}};
    manifest.wall_clock_seconds = seconds_since(start);

    std::vector<std::pair<std::string, std::string>> files;
    if (opt.output.csv()) {
        files.emplace_back("tails.csv", tails_table(tails).str());
    }
    if (opt.output.json()) {
        RunManifest embedded = manifest;
        if (opt.output.csv()) {
            embedded.outputs.push_back((dir / "tails.csv").string());
        }
        embedded.outputs.push_back((dir / "summary.json").string());
        embedded.outputs.push_back((dir / "manifest.json").string());
        Json summary{{"manifest", embedded.to_json()},
                     {"sample", sample_summary_json(sample)},
                     {"median_mean_gap", to_json(gap)},
                     {"tails", to_json(tails)},
                     {"violations", violations}};
        files.emplace_back("summary.json", summary.dump(2) + "\n");
    }
    write_outputs(dir, manifest, files);

    std::cout << "n=" << opt.n << " mod=" << config.constellation.name()
              << " trials=" << opt.trials << " mean=" << format_number(sample.mean)
              << " median=" << format_number(sample.median)
              << " gap=" << format_number(gap.gap) << " violations=" << violations << "\n";
    return violations == 0 ? kSuccess : kViolation;
}

// ---------------------------------------------------------------------------
// martingale

struct MartingaleOptions {
    std::optional<std::size_t> n;
    std::string modulation = "psk2";
    std::string mode = "exact";
    std::size_t inner_samples = 10'000;
    std::uint64_t seed = 1;
    std::size_t oversample = SignalParams::kDefaultOversampling;
    std::size_t workers = 0;
    std::vector<std::size_t> codeword;
    std::vector<std::size_t> psk_identity;
    OutputOptions output;
};

int cmd_martingale(const MartingaleOptions& opt)
{
    const auto start = Clock::now();
    if (!opt.n && opt.psk_identity.empty()) {
        throw UsageError("martingale: give --n and/or --psk-identity");
    }
    const fs::path dir = prepare_output_dir(opt.output.out);

    RunManifest manifest;
    manifest.command = "martingale";
    manifest.version = CF_LAB_VERSION;
    manifest.seed = opt.seed;
    manifest.parameters["format"] = opt.output.format;

    Json summary = Json::object();
    std::vector<std::pair<std::string, std::string>> files;
    bool satisfied = true;

    if (!opt.psk_identity.empty()) {
        constexpr double kIdentityTolerance = 1e-12;
        CsvTable table({"M", "value", "deviation_from_2"});
        Json identity = Json::array();
        for (std::size_t m : opt.psk_identity) {
            const double value = psk_variance_identity(m);
            table.add_row({std::to_string(m), format_number(value), format_number(value - 2.0)});
            identity.push_back(Json{{"M", m}, {"value", value}});
            std::cout << "psk_identity M=" << m << " value=" << format_number(value) << "\n";
            satisfied = satisfied && std::abs(value - 2.0) <= kIdentityTolerance;
        }
        manifest.parameters["psk_identity"] = opt.psk_identity;
        summary["psk_identity"] = identity;
        if (opt.output.csv()) {
            files.emplace_back("psk_identity.csv", table.str());
        }
    }

    if (opt.n) {
        const Constellation constellation = Constellation::parse(opt.modulation);
        const SignalParams params{*opt.n, opt.oversample};
        params.validate();
        if (opt.mode != "exact" && opt.mode != "mc") {
            throw UsageError("--mode must be exact or mc");
        }
        Codeword codeword = [&] {
            if (!opt.codeword.empty()) {
                if (opt.codeword.size() != *opt.n) {
                    throw UsageError("--codeword must list exactly n symbol indices");
                }
                return Codeword::from_indices(constellation, opt.codeword);
            }
            Rng rng = make_stream(opt.seed, {0xC0DEu});
            return sample_codeword(constellation, *opt.n, rng);
        }();
        const SymbolBoundModel model = symbol_bound_model(constellation);

        DoobTrace trace;
        if (opt.mode == "exact") {
            const CodewordEnumeration enumeration(constellation, params, opt.workers);
            const ExhaustiveReport exhaustive = enumeration.verify();
            trace = enumeration.trace(codeword);
            summary["exhaustive"] = to_json(exhaustive);
            satisfied = satisfied && exhaustive.satisfied();
            std::cout << "exact M=" << constellation.order() << " n=" << *opt.n
                      << " codewords=" << exhaustive.codewords
                      << " max_increment=" << format_number(exhaustive.max_increment)
                      << " bound=" << format_number(exhaustive.increment_bound)
                      << " max_second_moment=" << format_number(exhaustive.max_second_moment)
                      << " bound=" << format_number(exhaustive.second_moment_bound)
                      << " max_tower_error=" << format_number(exhaustive.max_tower_error) << "\n";
        } else {
            trace = mc_doob_trace(constellation, codeword, params, opt.inner_samples, opt.seed,
                                  opt.workers);
        }
        const BoundedDifferenceReport differences =
            verify_bounded_differences(trace, *opt.n, model.peak_amplitude);
        satisfied = satisfied && differences.satisfied;
        std::cout << "trace max_increment=" << format_number(differences.max_increment)
                  << " bound=" << format_number(differences.bound)
                  << " satisfied=" << (differences.satisfied ? "true" : "false") << "\n";

        std::vector<std::size_t> indices;
        for (const auto& s : codeword.symbols()) {
            indices.push_back(*constellation.index_of(s));
        }
        manifest.parameters["n"] = *opt.n;
        manifest.parameters["mod"] = constellation.name();
        manifest.parameters["mode"] = opt.mode;
        manifest.parameters["inner_samples"] = opt.inner_samples;
        manifest.parameters["seed"] = opt.seed;
        manifest.parameters["oversample"] = opt.oversample;
        manifest.parameters["workers"] = opt.workers;
        manifest.parameters["codeword"] = indices;
        summary["trace"] = to_json(trace);
        summary["bounded_differences"] = to_json(differences);
        if (opt.output.csv()) {
            files.emplace_back("trace.csv", trace_table(trace).str());
        }
    }

    summary["satisfied"] = satisfied;
    manifest.wall_clock_seconds = seconds_since(start);
    if (opt.output.json()) {
        Json full{{"manifest", manifest.to_json()}};
        full.update(summary);
        files.emplace_back("summary.json", full.dump(2) + "\n");
    }
    write_outputs(dir, manifest, files);
    return satisfied ? kSuccess : kViolation;
}

// ---------------------------------------------------------------------------
// scaling

struct ScalingOptions {
    std::vector<std::size_t> n_list;
    std::string modulation = "psk4";
    std::size_t trials = 10'000;
    std::uint64_t seed = 1;
    std::size_t oversample = SignalParams::kDefaultOversampling;
    std::size_t workers = 0;
    OutputOptions output;
};

int cmd_scaling(const ScalingOptions& opt)
{
    const auto start = Clock::now();
    if (opt.n_list.size() < 3) {
        throw UsageError("--n needs at least three values for a scaling study");
    }
    for (std::size_t i = 1; i < opt.n_list.size(); ++i) {
        if (opt.n_list[i] <= opt.n_list[i - 1]) {
            throw UsageError("--n values must be strictly increasing");
        }
    }
    SimulationConfig base;
    base.constellation = Constellation::parse(opt.modulation);
    base.trials = opt.trials;
    base.seed = opt.seed;
    base.oversampling = opt.oversample;
    base.workers = opt.workers;
    base.n = opt.n_list.front();
    base.validate();
    const fs::path dir = prepare_output_dir(opt.output.out);

    const ScalingTable table = scaling_study(opt.n_list, base);

    RunManifest manifest;
    manifest.command = "scaling";
    manifest.version = CF_LAB_VERSION;
    manifest.seed = opt.seed;
    manifest.parameters = Json{{"n", opt.n_list},
                               {"mod", base.constellation.name()},
                               {"trials", opt.trials},
                               {"seed", opt.seed},
                               {"oversample", opt.oversample},
                               {"workers", opt.workers},
                               {"format", opt.output.format}};
    manifest.wall_clock_seconds = seconds_since(start);

    std::vector<std::pair<std::string, std::string>> files;
    const std::string csv = scaling_table(table).str();
    files.emplace_back("scaling.csv", csv);
    if (opt.output.json()) {
        files.emplace_back("summary.json",
                           Json{{"manifest", manifest.to_json()}, {"scaling", to_json(table)}}.dump(2) +
                               "\n");
    }
    write_outputs(dir, manifest, files);
    std::cout << csv;
    return kSuccess;
}

template <typename Fn>
int guarded(Fn&& fn)
{
    try {
        return fn();
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kIo;
    } catch (const FeasibilityError& e) {
        std::cerr << "feasibility error: " << e.what() << "\n";
        return kFeasibility;
    } catch (const ResourceError& e) {
        std::cerr << "resource error: " << e.what() << "\n";
        return kFeasibility;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::domain_error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::out_of_range& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kUsage;
    }
}

} // namespace

int run(const std::vector<std::string>& args)
{
    CLI::App app{"Crest-factor concentration lab: bounds, simulations and martingale checks"};
    app.name("cf_lab");
    app.require_subcommand(1);
    app.set_version_flag("--version", CF_LAB_VERSION);

    BoundsOptions bounds;
    auto* bounds_cmd = app.add_subcommand("bounds", "Evaluate the concentration bounds on an alpha grid");
    bounds_cmd->add_option("--alphas", bounds.alphas, "Comma-separated deviations")->delimiter(',');
    bounds_cmd->add_option("--d", bounds.d, "Martingale jump bound d");
    bounds_cmd->add_option("--sigma2", bounds.sigma2, "Conditional variance bound");
    bounds_cmd->add_option("--n", bounds.n, "Number of martingale steps");
    add_output_options(bounds_cmd, bounds.output, false);

    SimulateOptions simulate;
    auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo crest-factor tails versus bounds");
    simulate_cmd->add_option("--n", simulate.n, "Number of sub-carriers");
    simulate_cmd->add_option("--mod", simulate.modulation, "Constellation: pskM, qamM, bpsk, qpsk");
    simulate_cmd->add_option("--trials", simulate.trials, "Number of codewords");
    simulate_cmd->add_option("--seed", simulate.seed, "Master seed");
    simulate_cmd->add_option("--alphas", simulate.alphas, "Comma-separated deviations")->delimiter(',');
    simulate_cmd->add_option("--oversample", simulate.oversample, "Oversampling factor L");
    simulate_cmd->add_option("--workers", simulate.workers, "Worker threads (0 = all cores)");
    add_output_options(simulate_cmd, simulate.output, true);

    MartingaleOptions martingale;
    auto* martingale_cmd = app.add_subcommand("martingale", "Doob martingale verification");
    martingale_cmd->add_option("--n", martingale.n, "Number of sub-carriers");
    martingale_cmd->add_option("--mod", martingale.modulation, "Constellation: pskM, qamM, bpsk, qpsk");
    martingale_cmd->add_option("--mode", martingale.mode, "exact or mc")
        ->check(CLI::IsMember({"exact", "mc"}));
    martingale_cmd->add_option("--inner-samples", martingale.inner_samples,
                               "Completions per conditional expectation (mc mode)");
    martingale_cmd->add_option("--seed", martingale.seed, "Master seed");
    martingale_cmd->add_option("--oversample", martingale.oversample, "Oversampling factor L");
    martingale_cmd->add_option("--workers", martingale.workers, "Worker threads (0 = all cores)");
    martingale_cmd->add_option("--codeword", martingale.codeword,
                               "Comma-separated symbol indices of the traced codeword")
        ->delimiter(',');
    martingale_cmd->add_option("--psk-identity", martingale.psk_identity,
                               "Comma-separated PSK orders for the variance identity")
        ->delimiter(',');
    add_output_options(martingale_cmd, martingale.output, true);

    ScalingOptions scaling;
    auto* scaling_cmd = app.add_subcommand("scaling", "Mean crest factor versus sqrt(log n)");
    scaling_cmd->add_option("--n", scaling.n_list, "Comma-separated sub-carrier counts")
        ->delimiter(',')
        ->required();
    scaling_cmd->add_option("--mod", scaling.modulation, "Constellation: pskM, qamM, bpsk, qpsk");
    scaling_cmd->add_option("--trials", scaling.trials, "Codewords per n");
    scaling_cmd->add_option("--seed", scaling.seed, "Master seed");
    scaling_cmd->add_option("--oversample", scaling.oversample, "Oversampling factor L");
    scaling_cmd->add_option("--workers", scaling.workers, "Worker threads (0 = all cores)");
    add_output_options(scaling_cmd, scaling.output, true);

    std::vector<std::string> argv_storage;
    argv_storage.reserve(args.size() + 1);
    argv_storage.push_back("cf_lab");
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : argv_storage) {
        argv.push_back(s.data());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kSuccess : kUsage;
    }

    if (bounds_cmd->parsed()) {
        return guarded([&] { return cmd_bounds(bounds); });
    }
    if (simulate_cmd->parsed()) {
        return guarded([&] { return cmd_simulate(simulate); });
    }
    if (martingale_cmd->parsed()) {
        return guarded([&] { return cmd_martingale(martingale); });
    }
    return guarded([&] { return cmd_scaling(scaling); });
}

int main(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args);
}

} // namespace cflab::cli
