#pragma once

// Time-domain model of the series-series compensated coupled-coil network
// driven by a PDM full bridge on each side.
//
//   [L1 M; M L2] d/dt [i1; i2] = [u1 - R1 i1 - vC1; -u2 - R2 i2 - vC2]
//   dvC1/dt = i1 / C1,  dvC2/dt = i2 / C2
//
// u2 is the voltage the secondary bridge presents to the coil loop; u2 * i2 > 0
// means power delivered to the output rail.

#include "tsepdm/modulator.hpp"

#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tsepdm::plant {

/// Raised when the integration produces non-finite values or an operating
/// point cannot be solved.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PlantParams {
    double L1 = 31.7e-6;
    double L2 = 29.7e-6;
    double C1 = 8.88e-9;
    double C2 = 9.47e-9;
    double R1 = 0.1;
    double R2 = 0.1;
    double k = 0.15;
    double Vg = 50.0;
    double Vo = 50.0;
    double fs = 300e3;

    /// Prototype constants: 31.7/29.7 uH, 8.88/9.47 nF, 100 mOhm, 50 V, k 0.15, 300 kHz.
    static PlantParams table_one() { return {}; }

    [[nodiscard]] double mutual() const;
    [[nodiscard]] double omega_s() const;
    [[nodiscard]] double half_period() const { return 0.5 / fs; }
    void validate() const;
};

struct PlantState {
    double i1 = 0.0;
    double i2 = 0.0;
    double vc1 = 0.0;
    double vc2 = 0.0;
    double t = 0.0;
};

struct StateRates {
    double di1;
    double di2;
    double dvc1;
    double dvc2;
};

StateRates derivatives(const PlantState& state, double u1, double u2, const PlantParams& params);

/// Classical RK4 with drives held constant over the step.
PlantState rk4_step(const PlantState& state, double u1, double u2, double h,
                    const PlantParams& params);

double stored_energy(const PlantState& state, const PlantParams& params);

struct Resonance {
    double f01;
    double f02;
};

Resonance resonance_report(const PlantParams& params);

/// Fundamental-frequency steady state with a fixed-phase primary drive and a
/// secondary drive aligned with i2 (active rectification). Complex amplitudes
/// use x(t) = Re(X e^{j omega_s t}); the primary square wave starting positive
/// at t = 0 has U1 = -j * u1_amplitude.
struct PhasorSolution {
    std::complex<double> u1;
    std::complex<double> u2;
    std::complex<double> i1;
    std::complex<double> i2;
    double load_resistance;  ///< |U2| / |I2|
};

PhasorSolution phasor_steady_state(const PlantParams& params, double u1_amplitude,
                                   double u2_amplitude);

/// Instantaneous state at t = 0 of a phasor solution.
PlantState phasor_initial_state(const PlantParams& params, const PhasorSolution& phasor);

/// Fundamental amplitude of a +-V square wave.
double square_wave_fundamental(double v);

enum class Side { primary, secondary };

const char* to_string(Side side);

using DensityProgram = std::function<double(double t)>;

DensityProgram constant_density(double d);

struct BridgeDrive {
    modulator::DeltaSigmaModulator* modulator = nullptr;
    DensityProgram density;
};

struct SimConfig {
    int steps_per_half_cycle = 256;
    double duration = 5e-3;
    double blanking_fraction = 0.25;
    PlantState initial{};
    /// Keep every n-th grid sample in the trace; 0 keeps none (envelope and
    /// events are always recorded).
    int sample_stride = 1;
    /// Optional multiplier on the primary rail, evaluated at each primary tick.
    std::function<double(double t)> primary_rail_scale;
    int carrier_phase0 = 1;

    void validate() const;
};

struct TraceSample {
    double t;
    double i1;
    double i2;
    double vc1;
    double vc2;
    double u1;
    double u2;
};

struct HalfCycleEvent {
    std::int64_t tick;
    Side side;
    int y;
    int s;
    double t;
    double d;
    double e;
    double i1;
    double i2;
};

/// Peak |i| over one primary half cycle [t, t + Tsw/2).
struct EnvelopeSample {
    double t;
    double i1;
    double i2;
};

struct Trace {
    double step = 0.0;
    std::vector<TraceSample> samples;
    std::vector<HalfCycleEvent> events;
    std::vector<EnvelopeSample> envelope;
    std::vector<double> starvation_times;
    PlantState final_state{};
};

/// Co-simulates the plant with both PDM bridges. The primary bridge ticks on
/// a fixed half-cycle clock; the secondary ticks on detected i2 zero
/// crossings, each followed by a blanking window.
Trace simulate(const PlantParams& params, const SimConfig& config, const BridgeDrive& primary,
               const BridgeDrive& secondary);

}  // namespace tsepdm::plant
