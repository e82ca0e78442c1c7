#include "tsepdm/plant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace tsepdm::plant {

namespace {

struct Coefficients {
    double inv11, inv12, inv22;  // inverse of the symmetric inductance matrix
    double r1, r2;
    double inv_c1, inv_c2;

    explicit Coefficients(const PlantParams& p) {
        const double m = p.mutual();
        const double det = p.L1 * p.L2 - m * m;
        inv11 = p.L2 / det;
        inv12 = -m / det;
        inv22 = p.L1 / det;
        r1 = p.R1;
        r2 = p.R2;
        inv_c1 = 1.0 / p.C1;
        inv_c2 = 1.0 / p.C2;
    }

    [[nodiscard]] StateRates rates(const PlantState& x, double u1, double u2) const noexcept {
        const double a = u1 - r1 * x.i1 - x.vc1;
        const double b = -u2 - r2 * x.i2 - x.vc2;
        return {inv11 * a + inv12 * b, inv12 * a + inv22 * b, x.i1 * inv_c1, x.i2 * inv_c2};
    }

    [[nodiscard]] PlantState rk4(const PlantState& x, double u1, double u2, double h) const noexcept {
        auto shifted = [](const PlantState& s, const StateRates& r, double dt) {
            return PlantState{s.i1 + dt * r.di1, s.i2 + dt * r.di2, s.vc1 + dt * r.dvc1,
                              s.vc2 + dt * r.dvc2, s.t + dt};
        };
        const StateRates k1 = rates(x, u1, u2);
        const StateRates k2 = rates(shifted(x, k1, 0.5 * h), u1, u2);
        const StateRates k3 = rates(shifted(x, k2, 0.5 * h), u1, u2);
        const StateRates k4 = rates(shifted(x, k3, h), u1, u2);
        const double w = h / 6.0;
        return PlantState{
            x.i1 + w * (k1.di1 + 2.0 * k2.di1 + 2.0 * k3.di1 + k4.di1),
            x.i2 + w * (k1.di2 + 2.0 * k2.di2 + 2.0 * k3.di2 + k4.di2),
            x.vc1 + w * (k1.dvc1 + 2.0 * k2.dvc1 + 2.0 * k3.dvc1 + k4.dvc1),
            x.vc2 + w * (k1.dvc2 + 2.0 * k2.dvc2 + 2.0 * k3.dvc2 + k4.dvc2),
            x.t + h};
    }
};

bool finite_state(const PlantState& x) {
    return std::isfinite(x.i1) && std::isfinite(x.i2) && std::isfinite(x.vc1) &&
           std::isfinite(x.vc2);
}

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

double checked_density(const DensityProgram& program, double t) {
    const double d = program(t);
    if (!(d >= 0.0 && d <= 1.0)) {
        std::ostringstream msg;
        msg << "pulse density " << d << " at t = " << t << " outside [0, 1]";
        throw std::invalid_argument(msg.str());
    }
    return d;
}

}  // namespace

double PlantParams::mutual() const { return k * std::sqrt(L1 * L2); }

double PlantParams::omega_s() const { return 2.0 * std::numbers::pi * fs; }

void PlantParams::validate() const {
    for (double v : {L1, L2, C1, C2, R1, R2, Vg, Vo, fs}) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument("plant parameters must be positive and finite");
        }
    }
    if (!(k > 0.0 && k < 1.0)) {
        throw std::invalid_argument("coupling coefficient must lie in (0, 1)");
    }
}

StateRates derivatives(const PlantState& state, double u1, double u2, const PlantParams& params) {
    params.validate();
    return Coefficients(params).rates(state, u1, u2);
}

PlantState rk4_step(const PlantState& state, double u1, double u2, double h,
                    const PlantParams& params) {
    if (!(h > 0.0)) {
        throw std::invalid_argument("step size must be positive");
    }
    params.validate();
    PlantState next = Coefficients(params).rk4(state, u1, u2, h);
    if (!finite_state(next)) {
        throw NumericError("non-finite state after RK4 step");
    }
    return next;
}

double stored_energy(const PlantState& x, const PlantParams& p) {
    const double m = p.mutual();
    return 0.5 * (p.L1 * x.i1 * x.i1 + 2.0 * m * x.i1 * x.i2 + p.L2 * x.i2 * x.i2 +
                  p.C1 * x.vc1 * x.vc1 + p.C2 * x.vc2 * x.vc2);
}

Resonance resonance_report(const PlantParams& p) {
    const double two_pi = 2.0 * std::numbers::pi;
    return {1.0 / (two_pi * std::sqrt(p.L1 * p.C1)), 1.0 / (two_pi * std::sqrt(p.L2 * p.C2))};
}

double square_wave_fundamental(double v) { return 4.0 * v / std::numbers::pi; }

PhasorSolution phasor_steady_state(const PlantParams& p, double u1_amplitude, double u2_amplitude) {
    p.validate();
    using C = std::complex<double>;
    const double w = p.omega_s();
    const C j{0.0, 1.0};
    const C z1 = p.R1 + j * w * p.L1 + 1.0 / (j * w * p.C1);
    const C z2 = p.R2 + j * w * p.L2 + 1.0 / (j * w * p.C2);
    const C zm = j * w * p.mutual();
    const C u1 = -j * u1_amplitude;

    // For a secondary load resistance rho the network is linear; find rho with
    // rho * |I2(rho)| = |U2|.
    auto solve = [&](double rho) {
        const C i1 = u1 / (z1 - zm * zm / (z2 + rho));
        const C i2 = -zm * i1 / (z2 + rho);
        return std::pair{i1, i2};
    };
    auto voltage = [&](double rho) { return rho * std::abs(solve(rho).second); };

    double rho = 0.0;
    if (u2_amplitude > 0.0) {
        double lo = 0.0;
        double hi = 1.0;
        while (voltage(hi) < u2_amplitude) {
            hi *= 2.0;
            if (hi > 1e12) {
                throw NumericError("secondary amplitude not reachable by the primary drive");
            }
        }
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (voltage(mid) < u2_amplitude ? lo : hi) = mid;
        }
        rho = 0.5 * (lo + hi);
    }
    const auto [i1, i2] = solve(rho);
    const C u2 = std::abs(i2) > 0.0 ? rho * i2 : C{0.0, 0.0};
    return {u1, u2, i1, i2, rho};
}

PlantState phasor_initial_state(const PlantParams& p, const PhasorSolution& s) {
    const std::complex<double> jw{0.0, p.omega_s()};
    return PlantState{s.i1.real(), s.i2.real(), (s.i1 / (jw * p.C1)).real(),
                      (s.i2 / (jw * p.C2)).real(), 0.0};
}

const char* to_string(Side side) { return side == Side::primary ? "primary" : "secondary"; }

DensityProgram constant_density(double d) {
    return [d](double) { return d; };
}

void SimConfig::validate() const {
    if (steps_per_half_cycle < 32) {
        throw std::invalid_argument("steps_per_half_cycle must be at least 32");
    }
    if (!(duration > 0.0)) {
        throw std::invalid_argument("duration must be positive");
    }
    if (!(blanking_fraction > 0.0 && blanking_fraction < 0.5)) {
        throw std::invalid_argument("blanking fraction must lie in (0, 0.5)");
    }
    if (sample_stride < 0) {
        throw std::invalid_argument("sample stride must be non-negative");
    }
    if (carrier_phase0 != 1 && carrier_phase0 != -1) {
        throw std::invalid_argument("carrier phase must be +1 or -1");
    }
}

Trace simulate(const PlantParams& params, const SimConfig& config, const BridgeDrive& primary,
               const BridgeDrive& secondary) {
    params.validate();
    config.validate();
    if (primary.modulator == nullptr || secondary.modulator == nullptr || !primary.density ||
        !secondary.density) {
        throw std::invalid_argument("both bridges need a modulator and a density program");
    }

    const Coefficients model(params);
    const double th = params.half_period();
    const int per_half = config.steps_per_half_cycle;
    const double h = th / per_half;
    const auto n_steps = static_cast<std::int64_t>(std::llround(config.duration / h));
    const double blank = config.blanking_fraction * th;
    const double starvation_gap = 3.0 * 2.0 * th;
    const double min_split = 1e-9 * h;

    Trace trace;
    trace.step = h;
    if (config.sample_stride > 0) {
        trace.samples.reserve(static_cast<std::size_t>(n_steps / config.sample_stride + 2));
    }
    trace.envelope.reserve(static_cast<std::size_t>(n_steps / per_half + 1));

    PlantState x = config.initial;
    x.t = 0.0;
    double u1 = 0.0;
    double u2 = 0.0;

    // c2 == 0 until the first detected crossing unless the run starts with current
    // already flowing in the secondary.
    int c2 = sign_of(x.i2);
    int last_sign = c2;
    double blanking_until = -std::numeric_limits<double>::infinity();
    double last_cross = 0.0;
    bool starving = false;

    auto tick_secondary = [&](const PlantState& at) {
        const double d2 = checked_density(secondary.density, at.t);
        const int y2 = secondary.modulator->step(d2);
        const int s2 = y2 * c2;
        u2 = params.Vo * s2;
        trace.events.push_back({secondary.modulator->tick() - 1, Side::secondary, y2, s2, at.t, d2,
                                secondary.modulator->last_error(), at.i1, at.i2});
    };
    if (c2 != 0) {
        tick_secondary(x);
    }

    EnvelopeSample window{0.0, 0.0, 0.0};
    auto record_sample = [&](const PlantState& s) {
        trace.samples.push_back({s.t, s.i1, s.i2, s.vc1, s.vc2, u1, u2});
    };

    for (std::int64_t n = 0; n < n_steps; ++n) {
        const double t0 = static_cast<double>(n) * h;
        const double t1 = static_cast<double>(n + 1) * h;
        x.t = t0;

        if (n % per_half == 0) {
            const std::int64_t k = n / per_half;
            if (k > 0) {
                trace.envelope.push_back(window);
            }
            window = {t0, 0.0, 0.0};

            const double d1 = checked_density(primary.density, t0);
            const int y1 = primary.modulator->step(d1);
            const int c1 = (k % 2 == 0) ? config.carrier_phase0 : -config.carrier_phase0;
            const int s1 = y1 * c1;
            const double rail = config.primary_rail_scale ? config.primary_rail_scale(t0) : 1.0;
            u1 = params.Vg * rail * s1;
            trace.events.push_back({primary.modulator->tick() - 1, Side::primary, y1, s1, t0, d1,
                                    primary.modulator->last_error(), x.i1, x.i2});
        }
        window.i1 = std::max(window.i1, std::abs(x.i1));
        window.i2 = std::max(window.i2, std::abs(x.i2));
        if (config.sample_stride > 0 && n % config.sample_stride == 0) {
            record_sample(x);
        }

        PlantState next = model.rk4(x, u1, u2, h);

        const int reference = c2 != 0 ? c2 : last_sign;
        if (reference != 0 && next.i2 * reference < 0.0 && t1 > blanking_until) {
            double tc = t0;
            if (x.i2 * reference > 0.0) {
                tc = t0 + h * x.i2 / (x.i2 - next.i2);
            }
            tc = std::clamp(std::max(tc, blanking_until), t0, t1);

            PlantState at = x;
            if (tc - t0 > min_split) {
                at = model.rk4(x, u1, u2, tc - t0);
            }
            at.t = tc;
            c2 = -reference;
            tick_secondary(at);
            blanking_until = tc + blank;
            last_cross = tc;
            starving = false;
            next = (t1 - tc > min_split) ? model.rk4(at, u1, u2, t1 - tc) : at;
        } else if (c2 == 0 && last_sign == 0) {
            last_sign = sign_of(next.i2);
        }

        if (!finite_state(next)) {
            std::ostringstream msg;
            msg << "simulation diverged at t = " << t1;
            throw NumericError(msg.str());
        }
        x = next;
        x.t = t1;

        if (c2 != 0 && !starving && t1 - last_cross > starvation_gap &&
            secondary.density(t1) < 1.0) {
            starving = true;
            trace.starvation_times.push_back(t1);
        }
    }
    if (n_steps % per_half == 0 && n_steps > 0) {
        trace.envelope.push_back(window);
    }
    if (config.sample_stride > 0 && n_steps % config.sample_stride == 0) {
        record_sample(x);
    }
    trace.final_state = x;
    return trace;
}

}  // namespace tsepdm::plant
