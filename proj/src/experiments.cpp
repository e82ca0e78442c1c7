#include "tsepdm/experiments.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <thread>

namespace tsepdm::experiments {

ntf::RationalTransferFunction NtfChoice::build() const {
    return kind == NtfKind::first ? ntf::build_first_order() : ntf::build_third_order(design);
}

std::string NtfChoice::label() const {
    if (kind == NtfKind::first) {
        return "first";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "tse(rho=%.4g,r=%.4g)", design.notch_ratio, design.pole_radius);
    return buf;
}

std::vector<double> density_grid(double lo, double hi, double step) {
    if (!(step > 0.0) || hi < lo || lo < 0.0 || hi > 1.0) {
        throw std::invalid_argument("density grid must satisfy 0 <= lo <= hi <= 1 with step > 0");
    }
    std::vector<double> out;
    const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long i = 0; i <= n; ++i) {
        out.push_back(std::round((lo + static_cast<double>(i) * step) * 1000.0) / 1000.0);
    }
    return out;
}

std::vector<double> standard_density_grid() {
    auto grid = density_grid(0.203, 0.903, 0.02);
    const auto fine = density_grid(0.903, 0.993, 0.01);
    for (double d : fine) {
        if (std::abs(d - grid.back()) > 1e-12) {
            grid.push_back(d);
        }
    }
    return grid;
}

plant::PlantState warm_start_state(const plant::PlantParams& params, double d1, double d2) {
    const auto phasor = plant::phasor_steady_state(params, d1 * plant::square_wave_fundamental(params.Vg),
                                                   d2 * plant::square_wave_fundamental(params.Vo));
    return plant::phasor_initial_state(params, phasor);
}

plant::SimConfig operating_point_config(const OperatingPointSettings& s, double d) {
    plant::SimConfig cfg;
    cfg.steps_per_half_cycle = s.steps_per_half_cycle;
    cfg.duration = s.settle + s.window;
    cfg.blanking_fraction = s.blanking_fraction;
    cfg.sample_stride = 0;
    if (s.warm_start) {
        const double d1 = s.side == plant::Side::primary ? d : 1.0;
        const double d2 = s.side == plant::Side::secondary ? d : 1.0;
        cfg.initial = warm_start_state(s.params, d1, d2);
    }
    return cfg;
}

plant::Trace simulate_operating_point(const OperatingPointSettings& s, double d, int sample_stride) {
    const auto tf = s.ntf.build();
    modulator::DeltaSigmaModulator primary(s.side == plant::Side::primary ? tf : ntf::build_first_order());
    modulator::DeltaSigmaModulator secondary(s.side == plant::Side::secondary ? tf : ntf::build_first_order());
    const double d1 = s.side == plant::Side::primary ? d : 1.0;
    const double d2 = s.side == plant::Side::secondary ? d : 1.0;
    plant::SimConfig cfg = operating_point_config(s, d);
    cfg.sample_stride = sample_stride;
    return plant::simulate(s.params, cfg, {&primary, plant::constant_density(d1)},
                           {&secondary, plant::constant_density(d2)});
}

OperatingPointResult evaluate_operating_point(const OperatingPointSettings& s, double d) {
    const auto trace = simulate_operating_point(s, d, 0);
    OperatingPointResult r;
    r.d = d;
    r.i1 = analysis::fluctuation(analysis::envelope_of(trace, plant::Side::primary), s.settle, s.window);
    r.i2 = analysis::fluctuation(analysis::envelope_of(trace, plant::Side::secondary), s.settle, s.window);
    r.i1.d = r.i2.d = d;
    r.i1.side = plant::Side::primary;
    r.i2.side = plant::Side::secondary;
    r.starvation_events = trace.starvation_times.size();
    return r;
}

std::vector<OperatingPointResult> run_sweep(const OperatingPointSettings& settings,
                                            std::span<const double> grid, unsigned workers) {
    std::vector<OperatingPointResult> results(grid.size());
    if (workers == 0) {
        workers = std::max(1u, std::thread::hardware_concurrency());
    }
    workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(grid.size(), 1)));

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < grid.size(); i = next++) {
            try {
                results[i] = evaluate_operating_point(settings, grid[i]);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 1; w < workers; ++w) {
            pool.emplace_back(worker);
        }
        worker();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    return results;
}

plant::PlantParams DynamicSettings::dynamic_params() {
    plant::PlantParams p = plant::PlantParams::table_one();
    p.Vg = 15.0;
    p.Vo = 15.0;
    return p;
}

double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) {
        throw std::invalid_argument("pearson needs two equal-length series");
    }
    const double n = static_cast<double>(a.size());
    double ma = 0.0;
    double mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return (saa > 0.0 && sbb > 0.0) ? sab / std::sqrt(saa * sbb) : 0.0;
}

DynamicResult run_dynamic(const DynamicSettings& s, int sample_stride) {
    const double w = 2.0 * std::numbers::pi * s.frequency;
    auto d2 = [=](double t) { return std::clamp(s.offset + s.amplitude * std::sin(w * t), 0.0, 1.0); };

    modulator::DeltaSigmaModulator primary(ntf::build_first_order());
    modulator::DeltaSigmaModulator secondary(s.ntf.build());
    plant::SimConfig cfg;
    cfg.steps_per_half_cycle = s.steps_per_half_cycle;
    cfg.duration = s.duration;
    cfg.blanking_fraction = s.blanking_fraction;
    cfg.sample_stride = sample_stride;
    cfg.initial = warm_start_state(s.params, 1.0, d2(0.0));

    DynamicResult r;
    r.trace = plant::simulate(s.params, cfg, {&primary, plant::constant_density(1.0)}, {&secondary, d2});

    // least-squares fit y2 = a + b sin(wt) + c cos(wt) over the post-settle ticks
    Eigen::Matrix3d normal = Eigen::Matrix3d::Zero();
    Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
    for (const auto& ev : r.trace.events) {
        if (ev.side != plant::Side::secondary || ev.t < s.settle) {
            continue;
        }
        const Eigen::Vector3d basis(1.0, std::sin(w * ev.t), std::cos(w * ev.t));
        normal += basis * basis.transpose();
        rhs += basis * static_cast<double>(ev.y);
    }
    const Eigen::Vector3d coef = normal.ldlt().solve(rhs);
    r.tracked_offset = coef(0);
    r.tracked_amplitude = std::hypot(coef(1), coef(2));
    r.amplitude_error = std::abs(r.tracked_amplitude - s.amplitude) / s.amplitude;

    std::vector<double> cmd;
    std::vector<double> env1;
    std::vector<double> env2;
    for (const auto& e : r.trace.envelope) {
        if (e.t < s.settle) {
            continue;
        }
        cmd.push_back(d2(e.t));
        env1.push_back(e.i1);
        env2.push_back(e.i2);
    }
    r.correlation_i1 = pearson(env1, cmd);
    r.correlation_i2 = pearson(env2, cmd);
    return r;
}

}  // namespace tsepdm::experiments
