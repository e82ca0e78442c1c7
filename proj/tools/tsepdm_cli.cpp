// tsepdm: command-line front end, one command per experiment.
//
// Exit codes: 0 success, 2 usage error, 3 numeric failure.

#include "tsepdm/analysis.hpp"
#include "tsepdm/config.hpp"
#include "tsepdm/experiments.hpp"
#include "tsepdm/gssa.hpp"
#include "tsepdm/modulator.hpp"
#include "tsepdm/ntf.hpp"
#include "tsepdm/plant.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace tsepdm;
using config::format_double;
using config::TableWriter;

namespace {

constexpr int kUsageError = 2;
constexpr int kNumericError = 3;

struct Common {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir = ".";
    bool json_summary = false;
    unsigned workers = 0;
};

struct NtfFlags {
    std::string kind = "tse";
    int order = 0;  // alternative spelling: --order 1 | 3
    double rho = 0.075;
    double r = 0.9;

    [[nodiscard]] experiments::NtfChoice choice() const {
        const bool first = order == 1 || (order == 0 && kind == "first");
        if (order != 0 && order != 1 && order != 3) {
            throw std::invalid_argument("--order must be 1 or 3");
        }
        if (first) {
            return experiments::NtfChoice::first_order();
        }
        auto c = experiments::NtfChoice::tse(rho, r);
        c.design.validate();
        return c;
    }
};

void add_ntf_flags(CLI::App* app, NtfFlags& f) {
    app->add_option("--ntf", f.kind, "NTF: first (1 - z^-1) or tse (third-order notch)")
        ->check(CLI::IsMember({"first", "tse"}));
    app->add_option("--order", f.order, "NTF order, 1 or 3 (overrides --ntf)");
    app->add_option("--rho", f.rho, "notch ratio omega_e / omega_s");
    app->add_option("--r", f.r, "pole radius");
}

plant::Side parse_side(const std::string& s) {
    return s == "secondary" ? plant::Side::secondary : plant::Side::primary;
}

class Output {
public:
    explicit Output(const Common& c) : dir_(c.out_dir) { fs::create_directories(dir_); }

    std::ofstream open(const std::string& name) {
        std::ofstream out(dir_ / name);
        if (!out) {
            throw config::ConfigError("cannot write " + (dir_ / name).string());
        }
        files_.push_back(name);
        return out;
    }

    void manifest(config::Manifest m) {
        std::string list;
        for (const auto& f : files_) {
            list += (list.empty() ? "" : ",") + f;
        }
        m.emplace_back("outputs", list);
        config::write_manifest(dir_ / "manifest.txt", m);
    }

private:
    fs::path dir_;
    std::vector<std::string> files_;
};

plant::PlantParams resolve_params(const Common& c) {
    plant::PlantParams p = c.config_path.empty() ? plant::PlantParams::table_one()
                                                 : config::load_plant_params(c.config_path);
    return config::apply_overrides(p, c.overrides);
}

config::Manifest base_manifest(const std::string& command, const Common& c, const plant::PlantParams& p) {
    std::ostringstream params;
    config::write_plant_params(params, p);
    config::Manifest m{{"command", command}, {"config", c.config_path.empty() ? "<built-in>" : c.config_path}};
    std::string line;
    std::istringstream in(params.str());
    while (std::getline(in, line)) {
        const auto eq = line.find(" = ");
        m.emplace_back(line.substr(0, eq), line.substr(eq + 3));
    }
    return m;
}

void emit(const Common& c, const json& summary) {
    if (c.json_summary) {
        std::cout << summary.dump(2) << "\n";
    }
}

std::vector<double> parse_grid(const std::string& spec) {
    if (spec == "standard") {
        return experiments::standard_density_grid();
    }
    std::vector<double> parts;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ':')) {
        parts.push_back(std::stod(item));
    }
    if (parts.size() == 1) {
        return {std::round(parts[0] * 1000.0) / 1000.0};
    }
    if (parts.size() != 3) {
        throw std::invalid_argument("grid must be 'standard', a single value or lo:hi:step");
    }
    return experiments::density_grid(parts[0], parts[1], parts[2]);
}

void write_coefficients(std::ostream& out, const std::string& label, const std::vector<double>& coeffs) {
    out << label;
    for (double c : coeffs) {
        out << "," << format_double(c);
    }
    out << "\n";
}

// ---------------------------------------------------------------------------

int cmd_ntf(const std::string& action, const Common& c, const NtfFlags& f, int n_points) {
    const auto choice = f.choice();
    const auto tf = choice.build();
    Output out(c);
    config::Manifest m{{"command", "ntf " + action}, {"ntf", choice.label()},
                       {"rho", format_double(f.rho)}, {"r", format_double(f.r)}};
    json summary{{"command", "ntf " + action}, {"ntf", choice.label()}};

    if (action == "design") {
        auto coeffs = out.open("ntf_coefficients.csv");
        write_coefficients(coeffs, "num", tf.aligned_numerator());
        write_coefficients(coeffs, "den", tf.denominator());
        const auto h = ntf::to_error_filter(tf);
        write_coefficients(coeffs, "error_filter_num", h.aligned_numerator());
        auto pz = out.open("ntf_pole_zero.csv");
        TableWriter table(pz, {"re", "im", "kind"});
        for (const auto& z : tf.zeros()) {
            table.cell(z.real()).cell(z.imag()).cell(std::string("zero")).end_row();
        }
        for (const auto& p : tf.poles()) {
            table.cell(p.real()).cell(p.imag()).cell(std::string("pole")).end_row();
        }
        summary["num"] = tf.aligned_numerator();
        summary["den"] = tf.denominator();
    } else if (action == "bode") {
        auto bode = out.open("ntf_bode.csv");
        TableWriter table(bode, {"ratio", "mag_dB", "phase_rad"});
        for (const auto& b : ntf::bode_data(tf, n_points)) {
            table.cell(b.ratio).cell(b.magnitude_db).cell(b.phase_rad).end_row();
        }
        m.emplace_back("n_points", std::to_string(n_points));
        summary["n_points"] = n_points;
    } else {
        const auto report = ntf::check_requirements(tf, {f.rho, f.r});
        auto check = out.open("ntf_check.csv");
        TableWriter table(check, {"requirement", "pass", "residual"});
        table.cell(std::string("dc_gain_zero")).cell(report.dc_gain_zero ? 1 : 0).cell(report.dc_residual).end_row();
        table.cell(std::string("realizable")).cell(report.realizable ? 1 : 0).cell(report.realizability_residual).end_row();
        table.cell(std::string("notch")).cell(report.notch ? 1 : 0).cell(report.notch_gain).end_row();
        std::cerr << "dc gain zero: " << (report.dc_gain_zero ? "pass" : "FAIL") << " (" << report.dc_residual << ")\n"
                  << "realizable:   " << (report.realizable ? "pass" : "FAIL") << "\n"
                  << "notch at " << f.rho << ": " << (report.notch ? "pass" : "FAIL") << " (" << report.notch_gain << ")\n"
                  << report.notes << "\n";
        summary["dc_gain_zero"] = report.dc_gain_zero;
        summary["realizable"] = report.realizable;
        summary["notch"] = report.notch;
        summary["notch_gain"] = report.notch_gain;
    }
    out.manifest(m);
    emit(c, summary);
    return 0;
}

int cmd_modulate(const Common& c, const NtfFlags& f, double d, long ticks, int oversample) {
    if (!(d >= 0.0 && d <= 1.0)) {
        throw std::invalid_argument("--d must lie in [0, 1]");
    }
    if (ticks < 1024) {
        throw std::invalid_argument("--ticks must be at least 1024");
    }
    const auto choice = f.choice();
    const std::vector<double> dseq(static_cast<std::size_t>(ticks), d);
    const auto run = modulator::run(choice.build(), dseq);
    const auto gates = modulator::gate_split(run.y, 1);

    Output out(c);
    {
        auto file = out.open("modulate.csv");
        TableWriter table(file, {"tick", "d", "y", "e", "s"});
        for (std::size_t n = 0; n < dseq.size(); ++n) {
            table.cell(static_cast<long long>(n)).cell(d).cell(run.y[n]).cell(run.e[n]).cell(gates[n].s).end_row();
        }
    }
    std::vector<double> y(run.y.begin(), run.y.end());
    std::vector<double> s;
    for (const auto& g : gates) {
        s.push_back(g.s);
    }
    const auto ys = analysis::spectrum_of_sequence(y);
    const auto ss = analysis::spectrum_of_held_sequence(s, oversample);
    for (auto [name, spec] : {std::pair{"modulate_spectrum_y.csv", &ys}, std::pair{"modulate_spectrum_s.csv", &ss}}) {
        auto file = out.open(name);
        TableWriter table(file, {"ratio", "magnitude"});
        for (std::size_t b = 0; b < spec->ratio.size(); ++b) {
            table.cell(spec->ratio[b]).cell(spec->magnitude[b]).end_row();
        }
    }
    double mean = 0.0;
    for (int v : run.y) {
        mean += v;
    }
    mean /= static_cast<double>(run.y.size());
    const double band = choice.kind == experiments::NtfKind::tse ? f.rho : 0.075;
    out.manifest({{"command", "modulate"}, {"ntf", choice.label()}, {"d", format_double(d)},
                  {"ticks", std::to_string(ticks)}, {"oversample", std::to_string(oversample)}});
    emit(c, {{"command", "modulate"},
             {"ntf", choice.label()},
             {"d", d},
             {"mean_y", mean},
             {"band_ratio", band},
             {"band_energy_db", analysis::band_energy_db(ys, band, 0.005)}});
    return 0;
}

int cmd_simulate(const Common& c, const NtfFlags& f, const std::string& side_name, double d,
                 double duration, int steps, double blanking, int stride, double settle) {
    const auto params = resolve_params(c);
    experiments::OperatingPointSettings s;
    s.params = params;
    s.side = parse_side(side_name);
    s.ntf = f.choice();
    s.steps_per_half_cycle = steps;
    s.blanking_fraction = blanking;
    s.settle = settle;
    s.window = duration - settle;
    if (!(s.window > 0.0)) {
        throw std::invalid_argument("--duration must exceed --settle");
    }
    const auto trace = experiments::simulate_operating_point(s, d, stride);

    Output out(c);
    {
        auto file = out.open("trace.csv");
        TableWriter table(file, {"t", "i1", "i2", "vC1", "vC2", "u1", "u2"});
        for (const auto& x : trace.samples) {
            table.cell(x.t).cell(x.i1).cell(x.i2).cell(x.vc1).cell(x.vc2).cell(x.u1).cell(x.u2).end_row();
        }
    }
    {
        auto file = out.open("events.csv");
        TableWriter table(file, {"tick", "side", "y", "s", "t_event"});
        for (const auto& e : trace.events) {
            table.cell(static_cast<long long>(e.tick)).cell(std::string(plant::to_string(e.side)))
                .cell(e.y).cell(e.s).cell(e.t).end_row();
        }
    }
    {
        auto file = out.open("envelope.csv");
        TableWriter table(file, {"t", "i1_peak", "i2_peak"});
        for (const auto& e : trace.envelope) {
            table.cell(e.t).cell(e.i1).cell(e.i2).end_row();
        }
    }
    const auto f1 = analysis::fluctuation(analysis::envelope_of(trace, plant::Side::primary), settle, s.window);
    const auto f2 = analysis::fluctuation(analysis::envelope_of(trace, plant::Side::secondary), settle, s.window);
    const auto zvs = analysis::zvs_polarity_check(trace, settle);

    auto m = base_manifest("simulate", c, params);
    m.insert(m.end(), {{"side", side_name}, {"d", format_double(d)}, {"ntf", s.ntf.label()},
                       {"duration", format_double(duration)}, {"settle", format_double(settle)},
                       {"steps_per_half_cycle", std::to_string(steps)},
                       {"blanking_fraction", format_double(blanking)}, {"sample_stride", std::to_string(stride)}});
    out.manifest(m);
    for (double t : trace.starvation_times) {
        std::cerr << "warning: no i2 zero crossing for 3 switching periods before t = " << t << " s\n";
    }
    emit(c, {{"command", "simulate"},
             {"fluct_i1_percent", f1.percent},
             {"fluct_i2_percent", f2.percent},
             {"i1_mean", f1.i_mean},
             {"i2_mean", f2.i_mean},
             {"zvs_pass_rate", zvs.pass_rate()},
             {"starvation_events", trace.starvation_times.size()}});
    return 0;
}

int cmd_sweep(const Common& c, const NtfFlags& f, const std::string& side_name, const std::string& grid_spec,
              int steps, double settle, double window, double blanking) {
    const auto params = resolve_params(c);
    experiments::OperatingPointSettings s;
    s.params = params;
    s.side = parse_side(side_name);
    s.ntf = f.choice();
    s.steps_per_half_cycle = steps;
    s.settle = settle;
    s.window = window;
    s.blanking_fraction = blanking;
    const auto grid = parse_grid(grid_spec);
    const auto results = experiments::run_sweep(s, grid, c.workers);

    Output out(c);
    auto file = out.open("sweep.csv");
    TableWriter table(file, {"d", "Imax", "Imin", "Imean", "fluct_percent", "current", "fluct_i1_percent",
                             "fluct_i2_percent"});
    double worst = -1.0;
    double worst_d = 0.0;
    for (const auto& r : results) {
        const bool first = r.i1.percent >= r.i2.percent;
        const auto& g = first ? r.i1 : r.i2;
        table.cell(r.d).cell(g.i_max).cell(g.i_min).cell(g.i_mean).cell(g.percent)
            .cell(std::string(first ? "i1" : "i2")).cell(r.i1.percent).cell(r.i2.percent).end_row();
        if (r.worst_percent() > worst) {
            worst = r.worst_percent();
            worst_d = r.d;
        }
    }
    auto m = base_manifest("sweep", c, params);
    m.insert(m.end(), {{"side", side_name}, {"ntf", s.ntf.label()}, {"grid", grid_spec},
                       {"points", std::to_string(grid.size())}, {"steps_per_half_cycle", std::to_string(steps)},
                       {"settle", format_double(settle)}, {"window", format_double(window)},
                       {"blanking_fraction", format_double(blanking)}});
    out.manifest(m);
    emit(c, {{"command", "sweep"}, {"side", side_name}, {"ntf", s.ntf.label()},
             {"worst_fluct_percent", worst}, {"worst_d", worst_d}, {"points", grid.size()}});
    return 0;
}

int cmd_gssa(const Common& c, int n_points, double lo, double hi) {
    const auto params = resolve_params(c);
    const auto model = gssa::build_envelope_model(params);
    const auto ratios = gssa::log_grid(lo, hi, n_points);

    Output out(c);
    json peaks = json::object();
    {
        auto file = out.open("gssa_bode.csv");
        TableWriter table(file, {"channel", "delta_omega_ratio", "mag_dB"});
        for (auto ch : {gssa::Channel::u1_to_i1, gssa::Channel::u1_to_i2, gssa::Channel::u2_to_i1,
                        gssa::Channel::u2_to_i2}) {
            for (const auto& p : gssa::amplitude_bode(model, ch, ratios)) {
                table.cell(std::string(gssa::to_string(ch))).cell(p.ratio).cell(p.magnitude_db).end_row();
            }
            peaks[gssa::to_string(ch)] = gssa::peak_ratio(model, ch, lo, hi);
        }
    }
    {
        auto file = out.open("gssa_eigenvalues.csv");
        TableWriter table(file, {"re", "im", "im_ratio"});
        const auto eig = gssa::eigenvalues(model);
        for (Eigen::Index i = 0; i < eig.size(); ++i) {
            table.cell(eig(i).real()).cell(eig(i).imag()).cell(eig(i).imag() / model.omega_s).end_row();
        }
    }
    auto m = base_manifest("gssa", c, params);
    m.insert(m.end(), {{"n_points", std::to_string(n_points)}, {"ratio_lo", format_double(lo)},
                       {"ratio_hi", format_double(hi)}});
    out.manifest(m);
    emit(c, {{"command", "gssa"},
             {"predicted_peak_ratio", 0.5 * params.k},
             {"peak_ratio", peaks},
             {"equilibrium_i1", model.equilibrium_amplitudes[0]},
             {"equilibrium_i2", model.equilibrium_amplitudes[1]}});
    return 0;
}

int cmd_stability(const Common& c, const std::vector<double>& rhos, double r, long ticks, double sine_period) {
    Output out(c);
    auto file = out.open("stability.csv");
    TableWriter table(file, {"ntf", "waveform", "d", "e_min", "e_max", "violations", "mean_density_error"});
    long long total = 0;
    auto probe = [&](const experiments::NtfChoice& choice, const modulator::DensityWaveform& w,
                     const std::string& name, double level) {
        const auto rep = modulator::stability_probe(choice.build(), w, ticks);
        table.cell(choice.label()).cell(name).cell(level).cell(rep.e_min).cell(rep.e_max)
            .cell(static_cast<long long>(rep.violation_count)).cell(rep.mean_density_error).end_row();
        total += rep.violation_count;
    };
    for (double rho : rhos) {
        const auto choice = experiments::NtfChoice::tse(rho, r);
        for (double d : experiments::standard_density_grid()) {
            probe(choice, modulator::DensityWaveform::constant(d), "constant", d);
        }
        probe(choice, modulator::DensityWaveform::sinusoid(0.5, 0.5, sine_period), "sinusoid", 0.5);
        probe(choice, modulator::DensityWaveform::ramp(0.0, 1.0), "ramp", 0.5);
    }
    std::string rho_list;
    for (double rho : rhos) {
        rho_list += (rho_list.empty() ? "" : ",") + format_double(rho);
    }
    out.manifest({{"command", "stability"}, {"rho", rho_list}, {"r", format_double(r)},
                  {"ticks", std::to_string(ticks)}, {"sine_period_ticks", format_double(sine_period)}});
    emit(c, {{"command", "stability"}, {"violations", total}});
    return 0;
}

int cmd_dynamic(const Common& c, const NtfFlags& f, double duration, int steps, int stride) {
    experiments::DynamicSettings s;
    plant::PlantParams p = c.config_path.empty() ? experiments::DynamicSettings::dynamic_params()
                                                 : config::load_plant_params(c.config_path);
    p = config::apply_overrides(p, c.overrides);
    s.params = p;
    s.ntf = f.choice();
    s.duration = duration;
    s.steps_per_half_cycle = steps;
    const auto r = experiments::run_dynamic(s, stride);

    Output out(c);
    {
        auto file = out.open("dynamic_envelope.csv");
        TableWriter table(file, {"t", "d2", "i1_peak", "i2_peak"});
        for (const auto& e : r.trace.envelope) {
            const double d2 = s.offset + s.amplitude * std::sin(2.0 * std::numbers::pi * s.frequency * e.t);
            table.cell(e.t).cell(d2).cell(e.i1).cell(e.i2).end_row();
        }
    }
    {
        auto file = out.open("dynamic_events.csv");
        TableWriter table(file, {"tick", "side", "y", "s", "t_event", "d"});
        for (const auto& e : r.trace.events) {
            table.cell(static_cast<long long>(e.tick)).cell(std::string(plant::to_string(e.side)))
                .cell(e.y).cell(e.s).cell(e.t).cell(e.d).end_row();
        }
    }
    if (stride > 0) {
        auto file = out.open("dynamic_trace.csv");
        TableWriter table(file, {"t", "i1", "i2", "vC1", "vC2", "u1", "u2"});
        for (const auto& x : r.trace.samples) {
            table.cell(x.t).cell(x.i1).cell(x.i2).cell(x.vc1).cell(x.vc2).cell(x.u1).cell(x.u2).end_row();
        }
    }
    auto m = base_manifest("dynamic", c, p);
    m.insert(m.end(), {{"ntf", s.ntf.label()}, {"duration", format_double(duration)},
                       {"steps_per_half_cycle", std::to_string(steps)}, {"d2", "0.5*sin(1000*pi*t)+0.5"}});
    out.manifest(m);
    emit(c, {{"command", "dynamic"},
             {"ntf", s.ntf.label()},
             {"tracked_amplitude", r.tracked_amplitude},
             {"amplitude_error", r.amplitude_error},
             {"correlation_i1", r.correlation_i1},
             {"correlation_i2", r.correlation_i2}});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Targeted-subharmonic-eliminating PDM simulator"};
    app.require_subcommand(1);
    Common common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config_path, "key-value plant config (L1, L2, C1, C2, R1, R2, k, Vg, Vo, fs)")
            ->check(CLI::ExistingFile);
        sub->add_option("--set", common.overrides, "override a plant symbol, e.g. --set k=0.13");
        sub->add_option("-o,--out", common.out_dir, "output directory");
        sub->add_flag("--json-summary", common.json_summary, "print headline metrics as JSON");
        sub->add_option("--workers", common.workers, "sweep worker threads (0 = hardware)");
    };

    NtfFlags ntf_flags;

    auto* ntf_cmd = app.add_subcommand("ntf", "design, plot or check a noise transfer function");
    std::string ntf_action = "design";
    int bode_points = 1000;
    ntf_cmd->add_option("action", ntf_action, "design | bode | check")->check(CLI::IsMember({"design", "bode", "check"}));
    ntf_cmd->add_option("--points", bode_points, "Bode points on (0, 1]")->check(CLI::Range(2, 10000000));
    add_ntf_flags(ntf_cmd, ntf_flags);
    add_common(ntf_cmd);

    auto* mod_cmd = app.add_subcommand("modulate", "run the modulator at a constant density");
    double density = 0.963;
    long ticks = 16384;
    int oversample = 4;
    mod_cmd->add_option("--d", density, "pulse density");
    mod_cmd->add_option("--ticks", ticks, "half-cycle ticks");
    mod_cmd->add_option("--oversample", oversample, "hold factor for the modulated-wave spectrum")->check(CLI::Range(1, 64));
    add_ntf_flags(mod_cmd, ntf_flags);
    add_common(mod_cmd);

    auto* sim_cmd = app.add_subcommand("simulate", "co-simulate one operating point");
    std::string side = "primary";
    double duration = 5e-3;
    double settle = 2e-3;
    double window = 3e-3;
    int steps = 256;
    double blanking = 0.25;
    int stride = 1;
    sim_cmd->add_option("--side", side, "controlled side")->check(CLI::IsMember({"primary", "secondary"}));
    sim_cmd->add_option("--d", density, "density of the controlled side (other side at 1)");
    sim_cmd->add_option("--duration", duration, "simulated time (s)");
    sim_cmd->add_option("--settle", settle, "settling interval excluded from metrics (s)");
    sim_cmd->add_option("--steps", steps, "RK4 steps per half cycle");
    sim_cmd->add_option("--blanking", blanking, "blanking window as a fraction of a half cycle");
    sim_cmd->add_option("--stride", stride, "trace sample stride (0 = none)");
    add_ntf_flags(sim_cmd, ntf_flags);
    add_common(sim_cmd);

    auto* sweep_cmd = app.add_subcommand("sweep", "fluctuation vs density with the other side at 1");
    std::string grid = "standard";
    sweep_cmd->add_option("--side", side, "controlled side")->check(CLI::IsMember({"primary", "secondary"}));
    sweep_cmd->add_option("--grid", grid, "standard | value | lo:hi:step");
    sweep_cmd->add_option("--steps", steps, "RK4 steps per half cycle");
    sweep_cmd->add_option("--settle", settle, "settling interval (s)");
    sweep_cmd->add_option("--window", window, "analysis window (s)");
    sweep_cmd->add_option("--blanking", blanking, "blanking window as a fraction of a half cycle");
    add_ntf_flags(sweep_cmd, ntf_flags);
    add_common(sweep_cmd);

    auto* gssa_cmd = app.add_subcommand("gssa", "envelope-model amplitude Bode plots");
    int gssa_points = 400;
    double ratio_lo = 0.005;
    double ratio_hi = 0.5;
    gssa_cmd->add_option("--points", gssa_points, "frequency points")->check(CLI::Range(2, 1000000));
    gssa_cmd->add_option("--lo", ratio_lo, "lowest delta_omega / omega_s");
    gssa_cmd->add_option("--hi", ratio_hi, "highest delta_omega / omega_s");
    add_common(gssa_cmd);

    auto* stab_cmd = app.add_subcommand("stability", "quantization error range probes");
    std::vector<double> rhos{0.065, 0.075, 0.085};
    double pole_radius = 0.9;
    long stab_ticks = 100000;
    double sine_period = 2000.0;
    stab_cmd->add_option("--rho", rhos, "notch ratios to probe");
    stab_cmd->add_option("--r", pole_radius, "pole radius");
    stab_cmd->add_option("--ticks", stab_ticks, "ticks per probe");
    stab_cmd->add_option("--sine-period", sine_period, "sinusoid period in ticks");
    add_common(stab_cmd);

    auto* dyn_cmd = app.add_subcommand("dynamic", "sinusoidal secondary density response at 15 V rails");
    double dyn_duration = 6e-3;
    int dyn_stride = 0;
    dyn_cmd->add_option("--duration", dyn_duration, "simulated time (s)");
    dyn_cmd->add_option("--steps", steps, "RK4 steps per half cycle");
    dyn_cmd->add_option("--stride", dyn_stride, "trace sample stride (0 = none)");
    add_ntf_flags(dyn_cmd, ntf_flags);
    add_common(dyn_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kUsageError;
    }

    try {
        if (*ntf_cmd) {
            return cmd_ntf(ntf_action, common, ntf_flags, bode_points);
        }
        if (*mod_cmd) {
            return cmd_modulate(common, ntf_flags, density, ticks, oversample);
        }
        if (*sim_cmd) {
            return cmd_simulate(common, ntf_flags, side, density, duration, steps, blanking, stride, settle);
        }
        if (*sweep_cmd) {
            return cmd_sweep(common, ntf_flags, side, grid, steps, settle, window, blanking);
        }
        if (*gssa_cmd) {
            return cmd_gssa(common, gssa_points, ratio_lo, ratio_hi);
        }
        if (*stab_cmd) {
            return cmd_stability(common, rhos, pole_radius, stab_ticks, sine_period);
        }
        if (*dyn_cmd) {
            return cmd_dynamic(common, ntf_flags, dyn_duration, steps, dyn_stride);
        }
    } catch (const plant::NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kNumericError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsageError;
    }
    return kUsageError;
}
