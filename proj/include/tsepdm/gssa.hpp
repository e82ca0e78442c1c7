#pragma once

// First-harmonic generalized state-space averaging (envelope) model of the
// SS network. Each waveform is approximated as x(t) = 2 Re(<x>_1 e^{j ws t});
// the complex coefficients of i1, i2, vC1, vC2 are split into eight real
// states ordered (Re i1, Im i1, Re i2, Im i2, Re vC1, Im vC1, Re vC2, Im vC2).
//
// Inputs are fundamental amplitudes: the primary drive sits on a fixed phase
// axis, the secondary drive follows the phase of <i2>_1 (active rectifier).

#include "tsepdm/plant.hpp"

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <span>
#include <vector>

namespace tsepdm::gssa {

using StateVector = Eigen::Matrix<double, 8, 1>;

struct EnvelopeModel {
    Eigen::Matrix<double, 8, 8> a;
    Eigen::Matrix<double, 8, 2> b;
    /// Rows: Re/Im of <i1>_1 and <i2>_1.
    Eigen::Matrix<double, 4, 8> c;
    /// Linearized peak amplitude 2|<i>_1| of i1 (row 0) and i2 (row 1).
    Eigen::Matrix<double, 2, 8> amplitude_output;
    StateVector equilibrium;
    std::array<double, 2> input_amplitudes{};      ///< U1, U2 fundamental amplitudes
    std::array<double, 2> equilibrium_amplitudes{};  ///< |I1|, |I2| peak
    double omega_s = 0.0;
};

enum class Channel { u1_to_i1, u1_to_i2, u2_to_i1, u2_to_i2 };

const char* to_string(Channel channel);

/// Nonlinear envelope dynamics f(x, U1, U2).
StateVector envelope_rates(const plant::PlantParams& params, const StateVector& x,
                           double u1_amplitude, double u2_amplitude);

/// Solves the equilibrium at full drive (4V/pi on each side) and linearizes
/// by central differences (relative step 1e-6). Throws plant::NumericError if
/// Newton fails.
EnvelopeModel build_envelope_model(const plant::PlantParams& params);

/// Same, about arbitrary drive amplitudes.
EnvelopeModel build_envelope_model(const plant::PlantParams& params, double u1_amplitude,
                                   double u2_amplitude);

std::complex<double> frequency_response(const EnvelopeModel& model, Channel channel,
                                        double delta_omega);

struct AmplitudeBodePoint {
    double ratio;  ///< delta_omega / omega_s
    double magnitude_db;
};

std::vector<AmplitudeBodePoint> amplitude_bode(const EnvelopeModel& model, Channel channel,
                                               std::span<const double> ratios);

/// Logarithmically spaced ratios in [lo, hi].
std::vector<double> log_grid(double lo, double hi, int n);

/// Location (as delta_omega / omega_s) of the largest response in [lo, hi],
/// grid search followed by golden-section refinement.
double peak_ratio(const EnvelopeModel& model, Channel channel, double lo = 0.01, double hi = 0.3);

/// Beat frequency k ws / 2 in rad/s.
double resonant_peak_prediction(const plant::PlantParams& params);

Eigen::VectorXcd eigenvalues(const EnvelopeModel& model);

}  // namespace tsepdm::gssa
