#pragma once

// Experiment presets shared by the CLI and the acceptance suite: density
// sweeps, the sinusoidal dynamic response, NTF comparison and modulator
// stability probes.

#include "tsepdm/analysis.hpp"
#include "tsepdm/modulator.hpp"
#include "tsepdm/ntf.hpp"
#include "tsepdm/plant.hpp"

#include <span>
#include <string>
#include <vector>

namespace tsepdm::experiments {

enum class NtfKind { first, tse };

struct NtfChoice {
    NtfKind kind = NtfKind::tse;
    ntf::NtfDesignSpec design{};

    static NtfChoice first_order() { return {NtfKind::first, {}}; }
    static NtfChoice tse(double notch_ratio, double pole_radius = 0.9) {
        return {NtfKind::tse, {notch_ratio, pole_radius}};
    }

    [[nodiscard]] ntf::RationalTransferFunction build() const;
    [[nodiscard]] std::string label() const;
};

/// 0.203..0.903 step 0.02 then 0.903..0.993 step 0.01, endpoints inclusive,
/// rounded to 3 decimals.
std::vector<double> standard_density_grid();

/// lo..hi inclusive in `step` increments, rounded to 3 decimals.
std::vector<double> density_grid(double lo, double hi, double step);

struct OperatingPointSettings {
    plant::PlantParams params{};
    plant::Side side = plant::Side::primary;  ///< side whose density is varied
    NtfChoice ntf{};
    int steps_per_half_cycle = 256;
    double settle = 2e-3;
    double window = 3e-3;
    double blanking_fraction = 0.25;
    /// Start from the averaged-drive phasor steady state instead of rest.
    bool warm_start = false;
};

struct OperatingPointResult {
    double d = 0.0;
    analysis::FluctuationReport i1;
    analysis::FluctuationReport i2;
    std::size_t starvation_events = 0;

    /// Larger of the two coil-current fluctuations.
    [[nodiscard]] double worst_percent() const { return std::max(i1.percent, i2.percent); }
};

/// Initial state for a warm start at densities (d1, d2).
plant::PlantState warm_start_state(const plant::PlantParams& params, double d1, double d2);

plant::SimConfig operating_point_config(const OperatingPointSettings& settings, double d);

/// Simulates one density point (the other side held at 1) and returns the trace.
plant::Trace simulate_operating_point(const OperatingPointSettings& settings, double d,
                                      int sample_stride = 0);

OperatingPointResult evaluate_operating_point(const OperatingPointSettings& settings, double d);

/// Runs every grid point on a worker pool; results keep grid order.
std::vector<OperatingPointResult> run_sweep(const OperatingPointSettings& settings,
                                            std::span<const double> grid, unsigned workers = 0);

struct DynamicSettings {
    plant::PlantParams params = dynamic_params();
    NtfChoice ntf{};
    double frequency = 500.0;  ///< d2 = offset + amplitude sin(2 pi f t)
    double offset = 0.5;
    double amplitude = 0.5;
    double duration = 6e-3;
    double settle = 2e-3;
    int steps_per_half_cycle = 256;
    double blanking_fraction = 0.25;

    /// Prototype network at 15 V on both rails.
    static plant::PlantParams dynamic_params();
};

struct DynamicResult {
    double tracked_offset = 0.0;
    double tracked_amplitude = 0.0;    ///< 500 Hz amplitude of y2 (least squares)
    double amplitude_error = 0.0;      ///< |tracked - commanded| / commanded
    double correlation_i1 = 0.0;       ///< Pearson correlation of the i1 envelope with d2
    double correlation_i2 = 0.0;
    plant::Trace trace;
};

DynamicResult run_dynamic(const DynamicSettings& settings, int sample_stride = 0);

double pearson(std::span<const double> a, std::span<const double> b);

}  // namespace tsepdm::experiments
