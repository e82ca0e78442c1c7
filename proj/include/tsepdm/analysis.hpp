#pragma once

// Measurement layer: spectra of modulated sequences, per-half-cycle current
// envelopes, fluctuation metrics and a coarse soft-switching polarity check.

#include "tsepdm/plant.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace tsepdm::analysis {

enum class Window { rectangular, hann };

const char* to_string(Window window);

/// One-sided magnitude spectrum. Frequencies are expressed as omega/omega_s
/// for a sequence sampled at 2 fs (one sample per half switching cycle), so
/// bin b sits at ratio 2 b / N before any hold upsampling.
struct Spectrum {
    std::vector<double> ratio;
    std::vector<double> magnitude;  ///< |X[b]|, unnormalized DFT magnitude
    Window window = Window::rectangular;
    std::size_t length = 0;          ///< transform length
    double ratio_per_bin = 0.0;
};

/// |DFT| of x at the tick rate. Requires x.size() >= 1024.
Spectrum spectrum_of_sequence(std::span<const double> x, Window window = Window::rectangular);

/// Spectrum of x held constant over each tick (zero-order hold), upsampled by
/// `oversample`. Extends the ratio axis to `oversample`, so the pair of
/// sidebands around omega_s appears as two distinct lines.
Spectrum spectrum_of_held_sequence(std::span<const double> x, int oversample,
                                   Window window = Window::rectangular);

/// Sum of |X|^2 over bins whose ratio lies in [center - half_width, center + half_width].
double band_energy(const Spectrum& spectrum, double center, double half_width);

/// 10 log10 of band_energy, floored at -400 dB.
double band_energy_db(const Spectrum& spectrum, double center, double half_width);

struct EnvelopePoint {
    double t;
    double peak;
};

/// Per-half-cycle maximum of |i| on the chosen side from full-rate trace
/// samples (sample_stride 1). Windows are [k Tsw/2, (k+1) Tsw/2).
std::vector<EnvelopePoint> envelope_extract(const plant::Trace& trace, plant::Side side,
                                            double half_period);

/// The envelope the simulator records online for one side.
std::vector<EnvelopePoint> envelope_of(const plant::Trace& trace, plant::Side side);

struct FluctuationReport {
    double d = 0.0;
    plant::Side side = plant::Side::primary;
    double i_max = 0.0;
    double i_min = 0.0;
    double i_mean = 0.0;
    double percent = 0.0;  ///< (i_max - i_min) / i_mean * 100
};

/// Fluctuation over envelope points with settle <= t < settle + window.
FluctuationReport fluctuation(std::span<const EnvelopePoint> envelope, double settle, double window);

struct ZvsEvent {
    plant::Side side;
    double t;
    double current;  ///< bridge current at the switching instant
    bool pass;
};

struct ZvsSummary {
    std::vector<ZvsEvent> events;
    std::size_t passed = 0;

    [[nodiscard]] double pass_rate() const {
        return events.empty() ? 1.0 : static_cast<double>(passed) / static_cast<double>(events.size());
    }
};

/// Polarity proxy for soft switching on every active edge at or after t_from.
/// Primary: an edge applying s = +-1 passes when i1 * s < 0 (the current
/// commutates the switch node before turn-on). Secondary: a toggle passes
/// when the current peak over the following half cycle exceeds
/// min_secondary_current.
ZvsSummary zvs_polarity_check(const plant::Trace& trace, double t_from = 0.0,
                              double min_secondary_current = 0.05);

}  // namespace tsepdm::analysis
