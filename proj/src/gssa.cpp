#include "tsepdm/gssa.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace tsepdm::gssa {

namespace {

using Complex = std::complex<double>;

constexpr double kRelativeStep = 1e-6;

Complex pair(const StateVector& x, int index) { return {x(2 * index), x(2 * index + 1)}; }

void set_pair(StateVector& x, int index, Complex v) {
    x(2 * index) = v.real();
    x(2 * index + 1) = v.imag();
}

StateVector from_phasor(const plant::PlantParams& p, const plant::PhasorSolution& s) {
    const Complex jw{0.0, p.omega_s()};
    StateVector x;
    set_pair(x, 0, 0.5 * s.i1);
    set_pair(x, 1, 0.5 * s.i2);
    set_pair(x, 2, 0.5 * s.i1 / (jw * p.C1));
    set_pair(x, 3, 0.5 * s.i2 / (jw * p.C2));
    return x;
}

Eigen::Matrix<double, 8, 8> state_jacobian(const plant::PlantParams& p, const StateVector& x,
                                           double u1, double u2) {
    Eigen::Matrix<double, 8, 8> jac;
    for (int j = 0; j < 8; ++j) {
        const double scale = std::max(std::abs(pair(x, j / 2)), 1e-12);
        const double delta = kRelativeStep * scale;
        StateVector hi = x;
        StateVector lo = x;
        hi(j) += delta;
        lo(j) -= delta;
        jac.col(j) = (envelope_rates(p, hi, u1, u2) - envelope_rates(p, lo, u1, u2)) / (2.0 * delta);
    }
    return jac;
}

}  // namespace

const char* to_string(Channel channel) {
    switch (channel) {
    case Channel::u1_to_i1: return "U1->I1";
    case Channel::u1_to_i2: return "U1->I2";
    case Channel::u2_to_i1: return "U2->I1";
    case Channel::u2_to_i2: return "U2->I2";
    }
    return "?";
}

StateVector envelope_rates(const plant::PlantParams& p, const StateVector& x, double u1_amplitude,
                           double u2_amplitude) {
    const Complex j{0.0, 1.0};
    const double ws = p.omega_s();
    const double m = p.mutual();
    const double det = p.L1 * p.L2 - m * m;

    const Complex i1 = pair(x, 0);
    const Complex i2 = pair(x, 1);
    const Complex v1 = pair(x, 2);
    const Complex v2 = pair(x, 3);

    // square wave starting positive at t = 0: fundamental (4V/pi) sin(ws t)
    const Complex u1 = -j * 0.5 * u1_amplitude;
    const double i2_mag = std::abs(i2);
    const Complex u2 = i2_mag > 0.0 ? 0.5 * u2_amplitude * i2 / i2_mag : Complex{0.0, 0.0};

    const Complex a = u1 - p.R1 * i1 - v1;
    const Complex b = -u2 - p.R2 * i2 - v2;
    const Complex di1 = (p.L2 * a - m * b) / det - j * ws * i1;
    const Complex di2 = (p.L1 * b - m * a) / det - j * ws * i2;
    const Complex dv1 = i1 / p.C1 - j * ws * v1;
    const Complex dv2 = i2 / p.C2 - j * ws * v2;

    StateVector out;
    set_pair(out, 0, di1);
    set_pair(out, 1, di2);
    set_pair(out, 2, dv1);
    set_pair(out, 3, dv2);
    return out;
}

EnvelopeModel build_envelope_model(const plant::PlantParams& params) {
    const double u1 = plant::square_wave_fundamental(params.Vg);
    const double u2 = plant::square_wave_fundamental(params.Vo);
    return build_envelope_model(params, u1, u2);
}

EnvelopeModel build_envelope_model(const plant::PlantParams& params, double u1_amplitude,
                                   double u2_amplitude) {
    params.validate();
    StateVector x = from_phasor(params, plant::phasor_steady_state(params, u1_amplitude, u2_amplitude));

    // Newton refinement on the envelope equations themselves.
    bool converged = false;
    for (int it = 0; it < 50; ++it) {
        const StateVector f = envelope_rates(params, x, u1_amplitude, u2_amplitude);
        const auto jac = state_jacobian(params, x, u1_amplitude, u2_amplitude);
        const StateVector dx = jac.fullPivLu().solve(-f);
        x += dx;
        if (!x.allFinite()) {
            break;
        }
        if (dx.norm() <= 1e-12 * std::max(1.0, x.norm())) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        throw plant::NumericError("envelope equilibrium did not converge");
    }

    EnvelopeModel model;
    model.equilibrium = x;
    model.omega_s = params.omega_s();
    model.input_amplitudes = {u1_amplitude, u2_amplitude};
    model.a = state_jacobian(params, x, u1_amplitude, u2_amplitude);

    const std::array<double, 2> amps{u1_amplitude, u2_amplitude};
    for (int col = 0; col < 2; ++col) {
        const double delta = kRelativeStep * std::max(amps[static_cast<std::size_t>(col)], 1.0);
        auto shifted = [&](double sign) {
            std::array<double, 2> u = amps;
            u[static_cast<std::size_t>(col)] += sign * delta;
            return envelope_rates(params, x, u[0], u[1]);
        };
        model.b.col(col) = (shifted(1.0) - shifted(-1.0)) / (2.0 * delta);
    }

    model.c.setZero();
    for (int r = 0; r < 4; ++r) {
        model.c(r, r) = 1.0;
    }
    model.amplitude_output.setZero();
    for (int side = 0; side < 2; ++side) {
        const Complex ieq = pair(x, side);
        const double mag = std::abs(ieq);
        model.equilibrium_amplitudes[static_cast<std::size_t>(side)] = 2.0 * mag;
        model.amplitude_output(side, 2 * side) = 2.0 * ieq.real() / mag;
        model.amplitude_output(side, 2 * side + 1) = 2.0 * ieq.imag() / mag;
    }
    return model;
}

std::complex<double> frequency_response(const EnvelopeModel& model, Channel channel,
                                        double delta_omega) {
    const int input = (channel == Channel::u1_to_i1 || channel == Channel::u1_to_i2) ? 0 : 1;
    const int output = (channel == Channel::u1_to_i1 || channel == Channel::u2_to_i1) ? 0 : 1;
    Eigen::Matrix<Complex, 8, 8> sys = -model.a.cast<Complex>();
    sys.diagonal().array() += Complex{0.0, delta_omega};
    const Eigen::Matrix<Complex, 8, 1> rhs = model.b.col(input).cast<Complex>();
    const Eigen::Matrix<Complex, 8, 1> x = sys.partialPivLu().solve(rhs);
    return (model.amplitude_output.row(output).cast<Complex>() * x)(0);
}

std::vector<AmplitudeBodePoint> amplitude_bode(const EnvelopeModel& model, Channel channel,
                                               std::span<const double> ratios) {
    std::vector<AmplitudeBodePoint> out;
    out.reserve(ratios.size());
    for (double r : ratios) {
        const double mag = std::abs(frequency_response(model, channel, r * model.omega_s));
        out.push_back({r, 20.0 * std::log10(std::max(mag, 1e-300))});
    }
    return out;
}

std::vector<double> log_grid(double lo, double hi, int n) {
    if (!(lo > 0.0 && hi > lo) || n < 2) {
        throw std::invalid_argument("log grid needs 0 < lo < hi and n >= 2");
    }
    std::vector<double> out(static_cast<std::size_t>(n));
    const double step = std::log(hi / lo) / (n - 1);
    for (int i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] = lo * std::exp(step * i);
    }
    return out;
}

double peak_ratio(const EnvelopeModel& model, Channel channel, double lo, double hi) {
    const auto grid = log_grid(lo, hi, 2000);
    auto mag = [&](double r) { return std::abs(frequency_response(model, channel, r * model.omega_s)); };
    std::size_t best = 0;
    double best_mag = -1.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double m = mag(grid[i]);
        if (m > best_mag) {
            best_mag = m;
            best = i;
        }
    }
    double a = grid[best == 0 ? 0 : best - 1];
    double b = grid[std::min(best + 1, grid.size() - 1)];
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - phi * (b - a);
    double d = a + phi * (b - a);
    for (int it = 0; it < 80; ++it) {
        if (mag(c) > mag(d)) {
            b = d;
        } else {
            a = c;
        }
        c = b - phi * (b - a);
        d = a + phi * (b - a);
    }
    return 0.5 * (a + b);
}

double resonant_peak_prediction(const plant::PlantParams& params) {
    return 0.5 * params.k * params.omega_s();
}

Eigen::VectorXcd eigenvalues(const EnvelopeModel& model) {
    Eigen::EigenSolver<Eigen::Matrix<double, 8, 8>> solver(model.a, false);
    return solver.eigenvalues();
}

}  // namespace tsepdm::gssa
