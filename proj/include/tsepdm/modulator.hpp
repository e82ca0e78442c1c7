#pragma once

// 1-bit error-feedback delta-sigma pulse density modulator, one tick per half
// switching cycle.
//
// Per tick:  w[n] = (h * e)[n]        h = 1 - NTF, strictly proper
//            v[n] = d[n] - w[n]
//            y[n] = v[n] >= threshold ? 1 : 0
//            e[n] = y[n] - v[n]
// so that y = d + NTF * e and d[n] = y[n] - e[n] + (h * e)[n] holds exactly.
// With threshold 1 and levels {0, 1}, a stable loop keeps e in [-1, 0].

#include "tsepdm/ntf.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace tsepdm::modulator {

struct QuantizerConvention {
    double threshold = 1.0;
};

// Boundary slack on the quantization error range.
inline constexpr double kErrorBoundTolerance = 1e-9;

class DeltaSigmaModulator {
public:
    explicit DeltaSigmaModulator(const ntf::RationalTransferFunction& ntf,
                                 QuantizerConvention quantizer = {});

    /// Advances one tick; returns y in {0, 1}. Throws on non-finite d.
    int step(double d);

    void reset();

    [[nodiscard]] std::int64_t tick() const noexcept { return tick_; }
    [[nodiscard]] double last_error() const noexcept { return last_error_; }
    [[nodiscard]] double last_feedback() const noexcept { return last_feedback_; }
    [[nodiscard]] const ntf::RationalTransferFunction& error_filter() const noexcept {
        return filter_;
    }
    [[nodiscard]] const QuantizerConvention& quantizer() const noexcept { return quantizer_; }

private:
    ntf::RationalTransferFunction filter_;
    QuantizerConvention quantizer_;
    std::vector<double> b_;  // h numerator aligned to den, b_[0] == 0
    std::vector<double> a_;  // den without the leading 1
    std::vector<double> e_history_;
    std::vector<double> w_history_;
    std::size_t head_ = 0;
    std::int64_t tick_ = 0;
    double last_error_ = 0.0;
    double last_feedback_ = 0.0;
};

struct RunResult {
    std::vector<int> y;
    std::vector<double> e;
    std::vector<double> w;  ///< filtered error fed back at each tick
};

RunResult run(const ntf::RationalTransferFunction& ntf, std::span<const double> d);

/// Recovers d from recorded (y, e) through the error filter: y - e + h * e.
std::vector<double> reconstruct_input(const ntf::RationalTransferFunction& error_filter,
                                      std::span<const int> y, std::span<const double> e);

struct GateRecord {
    std::int64_t tick;
    int y;
    int a;
    int b;
    int s;  ///< a - b
};

/// Free-running carrier starting at carrier_phase0 (+1 or -1), masked by y.
std::vector<GateRecord> gate_split(std::span<const int> y, int carrier_phase0 = 1);

/// Density excitation for stability probes, indexed by tick.
struct DensityWaveform {
    enum class Kind { constant, sinusoid, ramp };
    Kind kind = Kind::constant;
    double level = 0.5;           ///< constant value, or sinusoid offset
    double amplitude = 0.5;       ///< sinusoid amplitude
    double period_ticks = 2000.0; ///< sinusoid period
    double ramp_start = 0.0;
    double ramp_end = 1.0;

    static DensityWaveform constant(double d);
    static DensityWaveform sinusoid(double offset, double amplitude, double period_ticks);
    static DensityWaveform ramp(double from, double to);

    /// Value at tick n of an n_ticks-long run.
    [[nodiscard]] double at(std::int64_t n, std::int64_t n_ticks) const;
    [[nodiscard]] std::vector<double> sample(std::int64_t n_ticks) const;
};

struct StabilityReport {
    double e_min = 0.0;
    double e_max = 0.0;
    std::int64_t violation_count = 0;
    double mean_density_error = 0.0;  ///< mean(y) - mean(d)

    [[nodiscard]] bool stable() const noexcept { return violation_count == 0; }
};

StabilityReport stability_probe(const ntf::RationalTransferFunction& ntf,
                                const DensityWaveform& waveform, std::int64_t n_ticks);

}  // namespace tsepdm::modulator
