#include "tsepdm/analysis.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace tsepdm::analysis {

namespace {

// FFTW planning is not thread safe.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

std::vector<double> magnitude_rfft(std::vector<double> input) {
    const auto n = static_cast<int>(input.size());
    const std::size_t bins = input.size() / 2 + 1;
    auto* out = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * bins));
    if (out == nullptr) {
        throw std::bad_alloc();
    }
    std::unique_ptr<fftw_complex, decltype(&fftw_free)> guard(out, &fftw_free);
    fftw_plan plan = nullptr;
    {
        std::lock_guard lock(planner_mutex());
        plan = fftw_plan_dft_r2c_1d(n, input.data(), out, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    std::vector<double> mag(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        mag[b] = std::hypot(out[b][0], out[b][1]);
    }
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    return mag;
}

void apply_window(std::vector<double>& x, Window window) {
    if (window == Window::hann) {
        const double n = static_cast<double>(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] *= 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / n));
        }
    }
}

}  // namespace

const char* to_string(Window window) {
    return window == Window::rectangular ? "rectangular" : "hann";
}

Spectrum spectrum_of_sequence(std::span<const double> x, Window window) {
    return spectrum_of_held_sequence(x, 1, window);
}

Spectrum spectrum_of_held_sequence(std::span<const double> x, int oversample, Window window) {
    if (x.size() < 1024) {
        throw std::invalid_argument("spectrum needs at least 1024 samples");
    }
    if (oversample < 1) {
        throw std::invalid_argument("oversample factor must be positive");
    }
    const auto os = static_cast<std::size_t>(oversample);
    std::vector<double> held;
    held.reserve(x.size() * os);
    for (double v : x) {
        held.insert(held.end(), os, v);
    }
    apply_window(held, window);

    Spectrum s;
    s.window = window;
    s.length = held.size();
    s.magnitude = magnitude_rfft(std::move(held));
    // one tick = Tsw / 2, so the held sample rate is 2 fs * oversample
    s.ratio_per_bin = 2.0 * static_cast<double>(os) / static_cast<double>(s.length);
    s.ratio.resize(s.magnitude.size());
    for (std::size_t b = 0; b < s.ratio.size(); ++b) {
        s.ratio[b] = s.ratio_per_bin * static_cast<double>(b);
    }
    return s;
}

double band_energy(const Spectrum& spectrum, double center, double half_width) {
    double energy = 0.0;
    for (std::size_t b = 0; b < spectrum.ratio.size(); ++b) {
        if (std::abs(spectrum.ratio[b] - center) <= half_width) {
            energy += spectrum.magnitude[b] * spectrum.magnitude[b];
        }
    }
    return energy;
}

double band_energy_db(const Spectrum& spectrum, double center, double half_width) {
    const double e = band_energy(spectrum, center, half_width);
    return e > 0.0 ? std::max(-400.0, 10.0 * std::log10(e)) : -400.0;
}

std::vector<EnvelopePoint> envelope_extract(const plant::Trace& trace, plant::Side side,
                                            double half_period) {
    std::vector<EnvelopePoint> out;
    if (trace.samples.empty() || trace.step <= 0.0) {
        return out;
    }
    const auto per_half = static_cast<std::int64_t>(std::llround(half_period / trace.step));
    if (per_half <= 0) {
        throw std::invalid_argument("half period shorter than the sample step");
    }
    std::int64_t current = -1;
    for (const auto& s : trace.samples) {
        const auto index = static_cast<std::int64_t>(std::llround(s.t / trace.step)) / per_half;
        const double v = std::abs(side == plant::Side::primary ? s.i1 : s.i2);
        if (index != current) {
            out.push_back({static_cast<double>(index) * half_period, v});
            current = index;
        } else {
            out.back().peak = std::max(out.back().peak, v);
        }
    }
    // drop a trailing window that holds only the final sample
    const auto last_count = static_cast<std::int64_t>(std::llround(trace.samples.back().t / trace.step)) % per_half;
    if (last_count == 0 && out.size() > 1) {
        out.pop_back();
    }
    return out;
}

std::vector<EnvelopePoint> envelope_of(const plant::Trace& trace, plant::Side side) {
    std::vector<EnvelopePoint> out;
    out.reserve(trace.envelope.size());
    for (const auto& e : trace.envelope) {
        out.push_back({e.t, side == plant::Side::primary ? e.i1 : e.i2});
    }
    return out;
}

FluctuationReport fluctuation(std::span<const EnvelopePoint> envelope, double settle, double window) {
    FluctuationReport r;
    r.i_max = -std::numeric_limits<double>::infinity();
    r.i_min = std::numeric_limits<double>::infinity();
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& p : envelope) {
        if (p.t >= settle && p.t < settle + window) {
            r.i_max = std::max(r.i_max, p.peak);
            r.i_min = std::min(r.i_min, p.peak);
            sum += p.peak;
            ++count;
        }
    }
    if (count == 0) {
        throw std::invalid_argument("fluctuation window contains no envelope points");
    }
    r.i_mean = sum / static_cast<double>(count);
    r.percent = r.i_mean > 0.0 ? (r.i_max - r.i_min) / r.i_mean * 100.0 : 0.0;
    return r;
}

ZvsSummary zvs_polarity_check(const plant::Trace& trace, double t_from, double min_secondary_current) {
    ZvsSummary summary;
    const double half_period =
        trace.envelope.size() > 1 ? trace.envelope[1].t - trace.envelope[0].t : 0.0;
    for (const auto& ev : trace.events) {
        if (ev.y == 0 || ev.t < t_from) {
            continue;
        }
        ZvsEvent z{ev.side, ev.t, 0.0, false};
        if (ev.side == plant::Side::primary) {
            z.current = ev.i1;
            z.pass = ev.i1 * ev.s < 0.0;
        } else {
            z.current = ev.i2;
            double peak = 0.0;
            if (half_period > 0.0) {
                const auto k = static_cast<std::size_t>(ev.t / half_period);
                if (k < trace.envelope.size()) {
                    peak = trace.envelope[k].i2;
                }
            }
            z.pass = peak > min_secondary_current;
        }
        summary.passed += z.pass ? 1 : 0;
        summary.events.push_back(z);
    }
    return summary;
}

}  // namespace tsepdm::analysis
