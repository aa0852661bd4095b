// Command-line front end for forward regression.
//
//   fwdreg fit        --input data.csv -t 0.05 [--out fit.json]
//   fwdreg verify     --config sim.json --replications 200 [--out report.json]
//   fwdreg rates      --config sim.json --n-grid 200,400,800,1600 --out rates.csv
//   fwdreg sparse-eig --input data.csv -s 3 [--mode sampled --draws 2000]
//   fwdreg compare    --input data.csv -t 0.05 [-k 3]
//   fwdreg simulate   --config sim.json --out data.csv
//
// Exit codes: 0 ok, 2 input/config error, 3 data degeneracy, 4 bound check failed.

#include "fwdreg/fwdreg.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitDegenerate = 3;
constexpr int kExitBoundFailed = 4;

void emit(const std::string& path, const std::string& text)
{
    if (path.empty() || path == "-") {
        std::cout << text;
    } else {
        fwdreg::write_text(path, text);
    }
}

std::string dump(const fwdreg::json& j) { return j.dump(2) + "\n"; }

int exit_code_for(const fwdreg::Error& e, const std::vector<std::string>& names)
{
    using fwdreg::ErrorCode;
    switch (e.code()) {
        case ErrorCode::zero_variance_column:
            if (e.column() && *e.column() < names.size()) {
                std::cerr << "error: column '" << names[*e.column()]
                          << "' has zero variance; drop it and retry\n";
            } else {
                std::cerr << "error: " << e.what() << "\n";
            }
            return kExitDegenerate;
        case ErrorCode::rank_deficient_support:
        case ErrorCode::collinear_candidate:
        case ErrorCode::nonpositive_eigenvalue:
            std::cerr << "error: " << e.what() << "\n";
            return kExitDegenerate;
        default:
            std::cerr << "error: " << e.what() << "\n";
            return kExitInput;
    }
}

fwdreg::SimConfig load_config(const std::string& path, std::optional<std::uint64_t> seed)
{
    fwdreg::SimConfig cfg = fwdreg::read_sim_config(path);
    if (seed) cfg.seed = *seed;
    return cfg;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Thresholded forward regression with finite-sample bound checks"};
    app.require_subcommand(1);

    std::string input;
    std::string out;
    std::string config_path;
    double threshold = 0.0;
    std::optional<std::uint64_t> seed;
    std::size_t threads = 1;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--out,-o", out, "Output path (stdout when omitted)");
        cmd->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    };

    auto* fit = app.add_subcommand("fit", "Fit forward regression to a CSV file");
    fit->add_option("--input,-i", input, "CSV with header; response column named y")->required();
    fit->add_option("--threshold,-t", threshold, "Selection threshold t > 0")->required();
    add_common(fit);

    std::size_t replications = 200;
    double safety = 1.1;
    std::size_t eig_size = 8;
    bool timing = false;
    auto* verify = app.add_subcommand("verify", "Check the finite-sample bounds on simulated data");
    verify->add_option("--config,-c", config_path, "SimConfig JSON")->required();
    verify->add_option("--replications,-r", replications, "Number of seeds")->check(CLI::PositiveNumber);
    verify->add_option("--seed", seed, "Base seed (overrides the config)");
    verify->add_option("--safety", safety, "Oracle threshold safety factor (>= 1)");
    verify->add_option("--eig-size", eig_size, "Sparse-eigenvalue size for the oracle threshold");
    verify->add_flag("--timing", timing, "Include per-seed runtimes (breaks byte determinism)");
    add_common(verify);

    std::vector<std::size_t> n_grid{200, 400, 800, 1600};
    std::uint64_t draws = 2000;
    std::string report_path;
    auto* rates = app.add_subcommand("rates", "Sweep n and fit the log-log error slope");
    rates->add_option("--config,-c", config_path, "Base SimConfig JSON")->required();
    rates->add_option("--n-grid", n_grid, "Increasing sample sizes")->delimiter(',');
    rates->add_option("--replications,-r", replications, "Seeds per n")->check(CLI::PositiveNumber);
    rates->add_option("--seed", seed, "Base seed (overrides the config)");
    rates->add_option("--safety", safety, "Oracle threshold safety factor (>= 1)");
    rates->add_option("--eig-size", eig_size, "Sparse-eigenvalue size for the oracle threshold");
    rates->add_option("--draws", draws, "Sampled subsets when exact enumeration is too large");
    rates->add_option("--report", report_path, "Also write a JSON summary with the slope");
    add_common(rates);

    std::size_t s = 1;
    std::string mode = "exact";
    auto* seig = app.add_subcommand("sparse-eig", "Minimum s-sparse eigenvalue of the Gram matrix");
    seig->add_option("--input,-i", input, "CSV; a y column is ignored")->required();
    seig->add_option("-s,--size", s, "Subset size bound")->required()->check(CLI::PositiveNumber);
    seig->add_option("--mode", mode, "exact or sampled")->check(CLI::IsMember({"exact", "sampled"}));
    seig->add_option("--draws", draws, "Random subsets for sampled mode");
    seig->add_option("--seed", seed, "Seed for sampled mode");
    add_common(seig);

    std::optional<std::size_t> k;
    auto* compare = app.add_subcommand("compare", "Greedy selection against exhaustive best subset");
    compare->add_option("--input,-i", input, "CSV with header; response column named y")->required();
    compare->add_option("--threshold,-t", threshold, "Selection threshold t > 0")->required();
    compare->add_option("-k", k, "Cap greedy steps at k");
    add_common(compare);

    auto* simulate = app.add_subcommand("simulate", "Write a simulated dataset as CSV");
    simulate->add_option("--config,-c", config_path, "SimConfig JSON")->required();
    simulate->add_option("--seed", seed, "Seed (overrides the config)");
    add_common(simulate);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    fwdreg::CsvTable table;
    try {
        if (*fit) {
            table = fwdreg::read_csv(input);
            emit(out, dump(fwdreg::run_fit(table, threshold, threads).report));
            return kExitOk;
        }
        if (*verify) {
            fwdreg::VerifyOptions opt;
            opt.safety = safety;
            opt.eig_size = eig_size;
            opt.threads = threads;
            opt.timing = timing;
            const auto res = fwdreg::run_verify(load_config(config_path, seed), replications, opt);
            emit(out, dump(res.report));
            if (!res.all_pass) {
                std::cerr << "bound check failed on " << (replications - res.report["verdicts"]["passed"].get<std::size_t>())
                          << " of " << replications << " replications\n";
                return kExitBoundFailed;
            }
            return kExitOk;
        }
        if (*rates) {
            fwdreg::RatesOptions opt;
            opt.safety = safety;
            opt.eig_size = eig_size;
            opt.draws = draws;
            opt.threads = threads;
            const auto res = fwdreg::run_rates(load_config(config_path, seed), n_grid, replications, opt);
            emit(out, res.csv);
            if (!report_path.empty()) fwdreg::write_text(report_path, dump(res.report));
            if (res.slope) {
                std::cerr << "log-log slope: " << *res.slope << "\n";
            } else {
                std::cerr << "log-log slope undefined (median error ~0 at some n)\n";
            }
            return kExitOk;
        }
        if (*seig) {
            table = fwdreg::read_csv(input);
            const auto method = mode == "exact" ? fwdreg::EigMethod::exact : fwdreg::EigMethod::sampled;
            emit(out, dump(fwdreg::run_sparse_eig(table, s, method, draws, seed.value_or(0), threads)));
            return kExitOk;
        }
        if (*compare) {
            table = fwdreg::read_csv(input);
            emit(out, dump(fwdreg::run_compare(table, threshold, k, threads)));
            return kExitOk;
        }
        if (*simulate) {
            const fwdreg::SimConfig cfg = load_config(config_path, seed);
            const fwdreg::Dataset ds = fwdreg::simulate_dataset(cfg);
            std::ostringstream csv;
            fwdreg::write_csv(csv, fwdreg::default_names(cfg.p), ds.x, ds.y);
            emit(out, csv.str());
            return kExitOk;
        }
    } catch (const fwdreg::Error& e) {
        return exit_code_for(e, table.names);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitInput;
}
