// Command-line front end: arrival-time, characteristic-time and transmission
// sweeps over thermal wave packets crossing a parabolic repeller, with CSV
// output and a self-test suite of oracle cross-checks.

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wpt/model.hpp"
#include "wpt/selftest.hpp"
#include "wpt/times.hpp"
#include "wpt/timeseries.hpp"
#include "wpt/trajectories.hpp"
#include "wpt/transmission.hpp"
#include "wpt/version.hpp"

namespace {

// exit-code contract: 0 ok, 1 selftest failure, 2 usage error, 3 numerical failure
constexpr int exit_ok = 0;
constexpr int exit_selftest = 1;
constexpr int exit_usage = 2;
constexpr int exit_numerical = 3;

std::string param_str(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

struct CommonOpts {
    std::string model = "ck";
    double x0 = -20.0;
    double gamma = 0.0;
    double v0 = 0.0;
    double slope = 0.0;
    std::vector<double> omegas = {0.05};
    std::vector<double> temperatures = {0.0};
    int nodes = 64;
    bool truncate = true;
    bool renormalize = true;
    double threshold = 0.01;
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    double tail_cutoff = 1e-10;
    double t_bar_max = 0.0;
    std::string outdir = ".";
    bool plot_script = false;

    // physical-unit input (converted through the unit reduction)
    bool physical = false;
    double mass = wpt::constants::electron_mass;
    double sigma0 = 0.4e-10;
    double x0_si = -20.0 * 0.4e-10;
    double omega_si = 0.0;
    double gamma_si = 0.0;
    double temperature_si = 0.0;
    double v0_si = 0.0;
    double slope_si = 0.0;
};

// The config file is spliced into the argument list before parsing: a key
// contributes its value only when the matching flag is absent, so flags
// override file values. Keys mirror the long flag names.
std::vector<std::string> splice_config_file(std::vector<std::string> args) {
    std::string path;
    for (std::size_t i = 0; i < args.size();) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                       args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
        } else {
            ++i;
        }
    }
    if (path.empty())
        return args;
    std::ifstream in(path);
    if (!in)
        throw CLI::FileError::Missing(path);

    std::set<std::string> given;
    for (const auto& a : args)
        if (a.rfind("--", 0) == 0)
            given.insert(a.substr(0, a.find('=')));

    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string line;
    while (std::getline(in, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            continue;
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        while (!key.empty() && key.front() == '-')
            key.erase(key.begin());
        if (key.empty() || key == "config")
            continue;
        const std::string flag = "--" + key;
        if (given.count(flag))
            continue;
        args.push_back(flag);
        std::string token;
        for (const char c : value + " ") {
            if (c == ' ' || c == '\t' || c == ',') {
                if (!token.empty())
                    args.push_back(token);
                token.clear();
            } else {
                token.push_back(c);
            }
        }
    }
    return args;
}

void add_common_options(CLI::App* cmd, CommonOpts& o) {
    std::string config_doc;
    cmd->add_option("--config", config_doc,
                    "plain key=value configuration file; flags override file values");
    cmd->add_option("--model", o.model,
                    "wave equation: conservative-free | conservative-linear | "
                    "conservative-parabolic | ck | kostin")
        ->default_val(o.model);
    cmd->add_option("--x0-bar", o.x0, "initial packet center (reduced)")->default_val(o.x0);
    cmd->add_option("--omega-bar", o.omegas, "barrier strengths (reduced, repeatable)");
    cmd->add_option("--gamma-bar", o.gamma, "friction (reduced)")->default_val(o.gamma);
    cmd->add_option("--T-bar", o.temperatures, "temperatures (reduced, repeatable)");
    cmd->add_option("--v0-bar", o.v0, "initial central velocity (reduced)")->default_val(o.v0);
    cmd->add_option("--slope-bar", o.slope, "linear-potential strength (reduced)")
        ->default_val(o.slope);
    cmd->add_option("--nodes", o.nodes, "Gauss-Hermite nodes of the thermal ensemble")
        ->default_val(o.nodes);
    cmd->add_flag("--truncate,!--no-truncate", o.truncate,
                  "drop ensemble velocities below the transmission threshold");
    cmd->add_flag("--renormalize,!--no-renormalize", o.renormalize,
                  "renormalize truncated ensemble weights to total 1");
    cmd->add_option("--threshold", o.threshold, "transmission threshold for the truncation")
        ->default_val(o.threshold);
    cmd->add_option("--rel-tol", o.rel_tol, "relative tolerance")->default_val(o.rel_tol);
    cmd->add_option("--abs-tol", o.abs_tol, "absolute tolerance")->default_val(o.abs_tol);
    cmd->add_option("--tail-cutoff", o.tail_cutoff, "tail-truncation threshold")
        ->default_val(o.tail_cutoff);
    cmd->add_option("--t-bar-max", o.t_bar_max,
                    "hard time horizon for tail integrals (0 = unlimited)")
        ->default_val(o.t_bar_max);
    cmd->add_option("--output-dir", o.outdir, "directory for CSV output")->default_val(o.outdir);
    cmd->add_flag("--plot-script", o.plot_script, "also emit a gnuplot script for the CSVs");

    cmd->add_flag("--physical", o.physical, "interpret the physical-unit options below");
    cmd->add_option("--mass", o.mass, "particle mass (kg)")->default_val(o.mass);
    cmd->add_option("--sigma0", o.sigma0, "initial width (m)")->default_val(o.sigma0);
    cmd->add_option("--x0", o.x0_si, "initial center (m)")->default_val(o.x0_si);
    cmd->add_option("--omega", o.omega_si, "barrier strength (rad/s)")->default_val(o.omega_si);
    cmd->add_option("--gamma", o.gamma_si, "friction (1/s)")->default_val(o.gamma_si);
    cmd->add_option("--temperature", o.temperature_si, "temperature (K)")
        ->default_val(o.temperature_si);
    cmd->add_option("--v0", o.v0_si, "initial velocity (m/s)")->default_val(o.v0_si);
    cmd->add_option("--slope", o.slope_si, "linear-potential strength (N)")
        ->default_val(o.slope_si);
}

wpt::Tolerances tolerances(const CommonOpts& o) {
    wpt::Tolerances t;
    t.rel = o.rel_tol;
    t.abs = o.abs_tol;
    t.t_tail_cutoff = o.tail_cutoff;
    t.validate();
    return t;
}

wpt::TailOptions tail_options(const CommonOpts& o) {
    wpt::TailOptions t;
    t.t_max = o.t_bar_max;
    return t;
}

wpt::DimensionlessConfig make_config(const CommonOpts& o, double omega, double temperature) {
    wpt::DimensionlessConfig cfg;
    if (o.physical) {
        wpt::PhysicalParams p;
        p.mass = o.mass;
        p.sigma0 = o.sigma0;
        p.x0 = o.x0_si;
        p.omega = o.omega_si;
        p.gamma = o.gamma_si;
        p.temperature = o.temperature_si;
        p.v0 = o.v0_si;
        p.slope = o.slope_si;
        cfg = wpt::reduce(p, wpt::model_from_string(o.model)).second;
    } else {
        cfg.model = wpt::model_from_string(o.model);
        cfg.x0 = o.x0;
        cfg.omega = omega;
        cfg.gamma = o.gamma;
        cfg.temperature = temperature;
        cfg.v0 = o.v0;
        cfg.slope = o.slope;
    }
    for (const auto& warning : cfg.validate())
        std::cerr << "warning: " << warning << "\n";
    return cfg;
}

// In physical mode the reduction defines one parameter point; the reduced
// values take the place of the dimensionless sweep lists.
std::vector<double> loop_omegas(const CommonOpts& o) {
    if (!o.physical)
        return o.omegas;
    return {make_config(o, 0.0, 0.0).omega};
}

std::vector<double> loop_temperatures(const CommonOpts& o, std::vector<double> temps) {
    if (!o.physical)
        return temps;
    return {make_config(o, 0.0, 0.0).temperature};
}

void add_common_metadata(wpt::TimeSeries& ts, const wpt::DimensionlessConfig& cfg,
                         const CommonOpts& o, const std::string& subcommand) {
    ts.add_metadata("tool", std::string("wpt ") + wpt::version);
    ts.add_metadata("subcommand", subcommand);
    ts.add_metadata("model", to_string(cfg.model));
    ts.add_metadata("x0_bar", cfg.x0);
    ts.add_metadata("omega_bar", cfg.omega);
    ts.add_metadata("gamma_bar", cfg.gamma);
    ts.add_metadata("T_bar", cfg.temperature);
    ts.add_metadata("v0_bar", cfg.v0);
    ts.add_metadata("slope_bar", cfg.slope);
    ts.add_metadata("nodes", std::to_string(o.nodes));
    ts.add_metadata("truncate", o.truncate ? "true" : "false");
    ts.add_metadata("renormalize", o.renormalize ? "true" : "false");
    ts.add_metadata("rel_tol", o.rel_tol);
    ts.add_metadata("abs_tol", o.abs_tol);
    ts.add_metadata("tail_cutoff", o.tail_cutoff);
}

std::string out_path(const CommonOpts& o, const std::string& name) {
    std::filesystem::create_directories(o.outdir);
    return (std::filesystem::path(o.outdir) / name).string();
}

// Maxwell-Boltzmann ensemble with the section-5 truncation policy applied.
wpt::ThermalEnsemble make_policy_ensemble(const wpt::DimensionlessConfig& cfg,
                                          const CommonOpts& o, const wpt::Tolerances& tol) {
    std::optional<double> bound;
    if (o.truncate && cfg.temperature > 0.0 && cfg.omega > 0.0 && cfg.slope == 0.0) {
        wpt::DimensionlessConfig c = cfg;
        c.v0 = 0.0;
        bound = wpt::v0_min(c, o.threshold, wpt::ThresholdReading::Stationary, tol);
    }
    return wpt::make_ensemble(cfg.temperature, o.nodes, bound, o.renormalize);
}

void maybe_write_plot_script(const CommonOpts& o, const std::string& name,
                             const std::vector<std::string>& files, const std::string& ylabel) {
    if (!o.plot_script || files.empty())
        return;
    std::ofstream out(out_path(o, "plot_" + name + ".gp"), std::ios::binary);
    out << "# gnuplot script generated by wpt " << wpt::version << "\n";
    out << "set datafile separator ','\n";
    out << "set key autotitle columnhead\n";
    out << "set ylabel '" << ylabel << "'\n";
    out << "plot \\\n";
    for (std::size_t i = 0; i < files.size(); ++i)
        out << "  '" << files[i] << "' using 1:2 with lines" << (i + 1 < files.size() ? ", \\" : "")
            << "\n";
}

// ---------------------------------------------------------------------------

int cmd_arrival(const CommonOpts& opts, double x_detector) {
    const wpt::Tolerances tol = tolerances(opts);
    const wpt::TailOptions topt = tail_options(opts);
    std::vector<double> temps = loop_temperatures(opts, opts.temperatures);
    std::sort(temps.begin(), temps.end());
    temps.erase(std::unique(temps.begin(), temps.end()), temps.end());

    std::vector<std::string> files;
    for (const double omega : loop_omegas(opts)) {
        wpt::TimeSeries means({"T_bar", "tau_arrival"});
        wpt::DimensionlessConfig cfg0 = make_config(opts, omega, temps.front());
        add_common_metadata(means, cfg0, opts, "arrival");
        means.add_metadata("x_d_bar", x_detector);

        for (const double temp : temps) {
            wpt::DimensionlessConfig cfg = make_config(opts, omega, temp);
            const wpt::WidthSolution widths = wpt::width(cfg, tol);
            const wpt::ThermalEnsemble ens = make_policy_ensemble(cfg, opts, tol);
            const wpt::ArrivalDistribution dist =
                wpt::thermal_arrival(cfg, ens, widths, x_detector, tol, topt);

            wpt::TimeSeries ts({"t_bar", "pi_arrival"});
            add_common_metadata(ts, cfg, opts, "arrival");
            ts.add_metadata("x_d_bar", x_detector);
            ts.add_metadata("mean_arrival", dist.mean);
            ts.add_metadata("peak_time", dist.peak_time);
            if (ens.v0_min)
                ts.add_metadata("v0_min", *ens.v0_min);
            ts.add_metadata("discarded_mass", ens.discarded_mass);
            for (std::size_t i = 0; i < dist.t.size(); ++i)
                ts.add_row({dist.t[i], dist.density[i]});
            const std::string name = "arrival_" + opts.model + "_omega" + param_str(omega) +
                                     "_T" + param_str(temp) + ".csv";
            ts.write_csv_file(out_path(opts, name));
            files.push_back(name);
            means.add_row({temp, dist.mean});
        }
        means.write_csv_file(out_path(
            opts, "arrival_means_" + opts.model + "_omega" + param_str(omega) + ".csv"));
    }
    maybe_write_plot_script(opts, "arrival", files, "Pi_A");
    return exit_ok;
}

int cmd_times(const CommonOpts& opts, int figure, double x1, double x2, double gamma_max,
              double gamma_step, const std::vector<double>& gamma_list, double t_step,
              double temp_max, int temp_points, const std::vector<std::string>& models) {
    const wpt::Tolerances tol = tolerances(opts);
    if (!(x1 < x2))
        throw wpt::config_error("times: requires x1 < x2");
    std::vector<std::string> files;

    if (figure == 2) {
        for (const std::string& model : models) {
            CommonOpts o = opts;
            o.model = model;
            for (const double omega : loop_omegas(opts)) {
                wpt::TimeSeries ts({"gamma_bar", "p_tr", "tau_D", "tau_tr"});
                wpt::DimensionlessConfig cfg0 = make_config(o, omega, 0.0);
                add_common_metadata(ts, cfg0, o, "times");
                ts.add_metadata("figure", "2");
                ts.add_metadata("x1_bar", x1);
                ts.add_metadata("x2_bar", x2);
                const int n = static_cast<int>(std::round(gamma_max / gamma_step));
                for (int i = 0; i <= n; ++i) {
                    wpt::DimensionlessConfig cfg = cfg0;
                    cfg.gamma = i * gamma_step;
                    const wpt::WidthSolution widths = wpt::width(cfg, tol);
                    const wpt::CharacteristicTimes ct = wpt::split_times(cfg, widths, x1, x2, tol);
                    if (!ct.transmission)
                        throw wpt::degenerate_error("times: transmission branch absent");
                    ts.add_row({cfg.gamma, ct.p_tr, ct.dwell, *ct.transmission});
                }
                const std::string name =
                    "times_gamma_sweep_" + model + "_omega" + param_str(omega) + ".csv";
                ts.write_csv_file(out_path(o, name));
                files.push_back(name);
            }
        }
        maybe_write_plot_script(opts, "times_fig2", files, "tau_D");
        return exit_ok;
    }

    if (figure == 3) {
        for (const std::string& model : models) {
            CommonOpts o = opts;
            o.model = model;
            for (const double omega : loop_omegas(opts))
                for (const double gamma : gamma_list) {
                    CommonOpts oo = o;
                    oo.gamma = gamma;
                    wpt::DimensionlessConfig cfg = make_config(oo, omega, 0.0);
                    const wpt::WidthSolution widths = wpt::width(cfg, tol);
                    wpt::TimeSeries ts({"t_bar", "P_interval"});
                    add_common_metadata(ts, cfg, oo, "times");
                    ts.add_metadata("figure", "3");
                    ts.add_metadata("x1_bar", x1);
                    ts.add_metadata("x2_bar", x2);
                    const double t_end = (opts.t_bar_max > 0.0) ? opts.t_bar_max : 400.0;
                    const int n = static_cast<int>(std::ceil(t_end / t_step));
                    for (int i = 0; i <= n; ++i) {
                        const double t = std::min(i * t_step, t_end);
                        ts.add_row({t, wpt::interval_probability(cfg, widths, x1, x2, t)});
                    }
                    const std::string name = "interval_prob_" + model + "_omega" +
                                             param_str(omega) + "_gamma" + param_str(gamma) +
                                             ".csv";
                    ts.write_csv_file(out_path(oo, name));
                    files.push_back(name);
                }
        }
        maybe_write_plot_script(opts, "times_fig3", files, "P_interval");
        return exit_ok;
    }

    if (figure == 4) {
        for (const double omega : loop_omegas(opts))
            for (const double gamma : gamma_list) {
                CommonOpts o = opts;
                o.model = "kostin";
                o.gamma = gamma;
                wpt::TimeSeries ts({"T_bar", "tau_D", "tau_tr"});
                wpt::DimensionlessConfig cfg0 = make_config(o, omega, 0.0);
                add_common_metadata(ts, cfg0, o, "times");
                ts.add_metadata("figure", "4");
                ts.add_metadata("x1_bar", x1);
                ts.add_metadata("x2_bar", x2);
                const wpt::WidthSolution widths = wpt::width(cfg0, tol);
                for (int i = 0; i < temp_points; ++i) {
                    const double temp = temp_max * i / (temp_points - 1);
                    wpt::DimensionlessConfig cfg = cfg0;
                    cfg.temperature = temp;
                    const wpt::ThermalEnsemble ens = make_policy_ensemble(cfg, o, tol);
                    const wpt::CharacteristicTimes ct =
                        wpt::thermal_times(cfg, ens, widths, x1, x2, tol);
                    if (!ct.transmission)
                        throw wpt::degenerate_error("times: transmission branch absent");
                    ts.add_row({temp, ct.dwell, *ct.transmission});
                }
                const std::string name = "thermal_times_kostin_omega" + param_str(omega) +
                                         "_gamma" + param_str(gamma) + ".csv";
                ts.write_csv_file(out_path(o, name));
                files.push_back(name);
            }
        maybe_write_plot_script(opts, "times_fig4", files, "tau_D");
        return exit_ok;
    }
    throw wpt::config_error("times: --figure must be 2, 3 or 4");
}

int cmd_transmission(const CommonOpts& opts, bool v0min_mode, const std::string& sweep,
                     double sweep_min, double sweep_max, int sweep_points, bool log_sweep,
                     double t_step) {
    const wpt::Tolerances tol = tolerances(opts);

    if (v0min_mode) {
        for (const double omega : loop_omegas(opts)) {
            wpt::DimensionlessConfig cfg = make_config(opts, omega, 0.0);
            const double stat =
                wpt::v0_min(cfg, opts.threshold, wpt::ThresholdReading::Stationary, tol);
            const double maxt =
                wpt::v0_min(cfg, opts.threshold, wpt::ThresholdReading::MaxOverTime, tol);
            std::cout << "v0_min model=" << to_string(cfg.model)
                      << " omega_bar=" << param_str(cfg.omega)
                      << " gamma_bar=" << param_str(cfg.gamma)
                      << " threshold=" << param_str(opts.threshold)
                      << " stationary=" << wpt::format_value(stat)
                      << " max_over_time=" << wpt::format_value(maxt) << "\n";
        }
        return exit_ok;
    }

    std::vector<std::string> files;
    for (const double omega : loop_omegas(opts)) {
        wpt::DimensionlessConfig cfg = make_config(opts, omega, opts.temperatures.front());
        if (sweep == "time") {
            const wpt::WidthSolution widths = wpt::width(cfg, tol);
            const wpt::TransmissionCurve curve =
                wpt::transmission_curve(cfg, widths, t_step, opts.t_bar_max);
            wpt::TimeSeries ts({"t_bar", "p_tr"});
            add_common_metadata(ts, cfg, opts, "transmission");
            ts.add_metadata("sweep", sweep);
            ts.add_metadata("stationary", curve.stationary);
            ts.add_metadata("t_converged", curve.t_converged);
            for (std::size_t i = 0; i < curve.t.size(); ++i)
                ts.add_row({curve.t[i], curve.p[i]});
            const std::string name =
                "transmission_time_" + opts.model + "_omega" + param_str(omega) + ".csv";
            ts.write_csv_file(out_path(opts, name));
            files.push_back(name);
            continue;
        }

        wpt::TimeSeries ts({sweep + "_bar", "p_tr"});
        add_common_metadata(ts, cfg, opts, "transmission");
        ts.add_metadata("sweep", sweep);
        for (int i = 0; i < sweep_points; ++i) {
            const double f = static_cast<double>(i) / (sweep_points - 1);
            const double value = log_sweep ? sweep_min * std::pow(sweep_max / sweep_min, f)
                                           : sweep_min + (sweep_max - sweep_min) * f;
            wpt::DimensionlessConfig c = cfg;
            if (sweep == "gamma")
                c.gamma = value;
            else if (sweep == "omega")
                c.omega = value;
            else if (sweep == "temperature")
                c.temperature = value;
            else
                throw wpt::config_error("transmission: unknown sweep variable '" + sweep + "'");
            const wpt::WidthSolution widths = wpt::width(c, tol);
            ts.add_row({value, wpt::p_tr_stationary(c, widths)});
        }
        const std::string name =
            "transmission_" + sweep + "_" + opts.model + "_omega" + param_str(omega) + ".csv";
        ts.write_csv_file(out_path(opts, name));
        files.push_back(name);
    }
    maybe_write_plot_script(opts, "transmission", files, "P_tr");
    return exit_ok;
}

int cmd_selftest(std::optional<double> tolerance_override) {
    const auto reports = wpt::run_selftest(tolerance_override);
    std::string first_fail;
    for (const auto& r : reports) {
        std::printf("[%s] %-34s max_deviation=%s tolerance=%s\n", r.pass ? "PASS" : "FAIL",
                    r.name.c_str(), wpt::format_value(r.max_deviation).c_str(),
                    wpt::format_value(r.tolerance).c_str());
        if (!r.pass && first_fail.empty())
            first_fail = r.name;
    }
    std::printf("%zu oracle families checked\n", reports.size());
    if (!first_fail.empty()) {
        std::printf("FIRST FAILING ORACLE: %s\n", first_fail.c_str());
        return exit_selftest;
    }
    return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"thermal wave packets through a parabolic repeller: transmission "
                 "probabilities and Bohmian characteristic times"};
    app.require_subcommand(1);

    CommonOpts arrival_opts, times_opts, trans_opts;

    auto* arrival = app.add_subcommand("arrival", "arrival-time distributions and means");
    arrival_opts.temperatures = {0.0, 1.0, 5.0};
    add_common_options(arrival, arrival_opts);
    double x_detector = 20.0;
    arrival->add_option("--xd-bar", x_detector, "detector position (reduced)")
        ->default_val(x_detector);

    auto* times = app.add_subcommand("times", "dwell/transmission-time figure pipelines");
    add_common_options(times, times_opts);
    int figure = 2;
    double x1 = -1.0, x2 = 1.0, gamma_max = 0.1, gamma_step = 0.005, t_step = 0.5;
    double temp_max = 2.0;
    int temp_points = 9;
    std::vector<double> gamma_list = {0.0, 0.025, 0.04, 0.1};
    std::vector<std::string> times_models = {"ck", "kostin"};
    times->add_option("--figure", figure, "figure pipeline: 2, 3 or 4")->default_val(figure);
    times->add_option("--x1-bar", x1, "interval left edge")->default_val(x1);
    times->add_option("--x2-bar", x2, "interval right edge")->default_val(x2);
    times->add_option("--gamma-max", gamma_max, "gamma sweep upper bound (figure 2)")
        ->default_val(gamma_max);
    times->add_option("--gamma-step", gamma_step, "gamma sweep step (figure 2)")
        ->default_val(gamma_step);
    times->add_option("--gamma-list", gamma_list, "friction values (figures 3 and 4)");
    times->add_option("--t-bar-step", t_step, "time grid step (figure 3)")->default_val(t_step);
    times->add_option("--T-max", temp_max, "temperature sweep upper bound (figure 4)")
        ->default_val(temp_max);
    times->add_option("--T-points", temp_points, "temperature grid points (figure 4)")
        ->default_val(temp_points);
    times->add_option("--models", times_models, "models to sweep (figures 2 and 3)");

    auto* trans = app.add_subcommand("transmission", "transmission probability sweeps");
    add_common_options(trans, trans_opts);
    bool v0min_mode = false;
    std::string sweep = "gamma";
    double sweep_min = 0.0, sweep_max = 0.1;
    int sweep_points = 21;
    bool log_sweep = false;
    double trans_t_step = 1.0;
    trans->add_flag("--v0-min", v0min_mode, "emit the threshold velocity instead of a sweep");
    trans->add_option("--sweep", sweep, "sweep variable: gamma | omega | temperature | time")
        ->default_val(sweep);
    trans->add_option("--sweep-min", sweep_min, "sweep lower bound")->default_val(sweep_min);
    trans->add_option("--sweep-max", sweep_max, "sweep upper bound")->default_val(sweep_max);
    trans->add_option("--sweep-points", sweep_points, "sweep grid points")
        ->default_val(sweep_points);
    trans->add_flag("--log-sweep", log_sweep, "geometric sweep grid");
    trans->add_option("--t-bar-step", trans_t_step, "time grid step for --sweep time")
        ->default_val(trans_t_step);

    auto* selftest = app.add_subcommand("selftest", "run the oracle-equivalence suite");
    double selftest_tolerance = -1.0;
    selftest->add_option("--tolerance", selftest_tolerance,
                         "override every oracle tolerance (failure-path testing)");

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = splice_config_file(std::move(args));
        std::reverse(args.begin(), args.end()); // CLI11 consumes from the back
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (*arrival)
            return cmd_arrival(arrival_opts, x_detector);
        if (*times)
            return cmd_times(times_opts, figure, x1, x2, gamma_max, gamma_step, gamma_list,
                             t_step, temp_max, temp_points, times_models);
        if (*trans)
            return cmd_transmission(trans_opts, v0min_mode, sweep, sweep_min, sweep_max,
                                    sweep_points, log_sweep, trans_t_step);
        if (*selftest)
            return cmd_selftest(selftest_tolerance > 0.0
                                    ? std::optional<double>(selftest_tolerance)
                                    : std::nullopt);
    } catch (const wpt::config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const wpt::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numerical;
    }
    return exit_usage;
}
