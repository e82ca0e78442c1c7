#include "tsepdm/modulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace tsepdm::modulator {

DeltaSigmaModulator::DeltaSigmaModulator(const ntf::RationalTransferFunction& ntf,
                                         QuantizerConvention quantizer)
    : filter_(ntf::to_error_filter(ntf)), quantizer_(quantizer) {
    b_ = filter_.aligned_numerator();
    a_.assign(filter_.denominator().begin() + 1, filter_.denominator().end());
    // aligned numerator has one more slot than the history; drop the zero lag
    b_.erase(b_.begin());
    e_history_.assign(a_.size(), 0.0);
    w_history_.assign(a_.size(), 0.0);
}

void DeltaSigmaModulator::reset() {
    std::fill(e_history_.begin(), e_history_.end(), 0.0);
    std::fill(w_history_.begin(), w_history_.end(), 0.0);
    head_ = 0;
    tick_ = 0;
    last_error_ = 0.0;
    last_feedback_ = 0.0;
}

int DeltaSigmaModulator::step(double d) {
    if (!std::isfinite(d)) {
        throw std::invalid_argument("pulse density must be finite");
    }
    const std::size_t order = a_.size();
    double w = 0.0;
    // head_ is the slot of lag 1; lag k lives at (head_ + k - 1) mod order.
    for (std::size_t k = 0; k < order; ++k) {
        const std::size_t slot = (head_ + k) % order;
        w += b_[k] * e_history_[slot] - a_[k] * w_history_[slot];
    }
    const double v = d - w;
    const int y = v >= quantizer_.threshold ? 1 : 0;
    const double e = static_cast<double>(y) - v;

    if (order > 0) {
        head_ = (head_ + order - 1) % order;
        e_history_[head_] = e;
        w_history_[head_] = w;
    }
    last_error_ = e;
    last_feedback_ = w;
    ++tick_;
    return y;
}

RunResult run(const ntf::RationalTransferFunction& ntf, std::span<const double> d) {
    DeltaSigmaModulator mod(ntf);
    RunResult out;
    out.y.reserve(d.size());
    out.e.reserve(d.size());
    out.w.reserve(d.size());
    for (double dn : d) {
        if (!(dn >= 0.0 && dn <= 1.0)) {
            throw std::invalid_argument("pulse density must lie in [0, 1]");
        }
        out.y.push_back(mod.step(dn));
        out.e.push_back(mod.last_error());
        out.w.push_back(mod.last_feedback());
    }
    return out;
}

std::vector<double> reconstruct_input(const ntf::RationalTransferFunction& error_filter,
                                      std::span<const int> y, std::span<const double> e) {
    if (y.size() != e.size()) {
        throw std::invalid_argument("y and e must have equal length");
    }
    const auto b = error_filter.aligned_numerator();
    const auto& a = error_filter.denominator();
    const std::size_t order = a.size() - 1;
    std::vector<double> w(e.size(), 0.0);
    std::vector<double> d(e.size());
    for (std::size_t n = 0; n < e.size(); ++n) {
        double acc = 0.0;
        for (std::size_t k = 1; k <= order && k <= n; ++k) {
            acc += b[k] * e[n - k] - a[k] * w[n - k];
        }
        w[n] = acc;
        d[n] = static_cast<double>(y[n]) - e[n] + acc;
    }
    return d;
}

std::vector<GateRecord> gate_split(std::span<const int> y, int carrier_phase0) {
    if (carrier_phase0 != 1 && carrier_phase0 != -1) {
        throw std::invalid_argument("carrier phase must be +1 or -1");
    }
    std::vector<GateRecord> out;
    out.reserve(y.size());
    int carrier = carrier_phase0;
    for (std::size_t n = 0; n < y.size(); ++n) {
        const int a = (y[n] != 0 && carrier > 0) ? 1 : 0;
        const int b = (y[n] != 0 && carrier < 0) ? 1 : 0;
        out.push_back({static_cast<std::int64_t>(n), y[n] != 0 ? 1 : 0, a, b, a - b});
        carrier = -carrier;
    }
    return out;
}

DensityWaveform DensityWaveform::constant(double d) {
    DensityWaveform w;
    w.kind = Kind::constant;
    w.level = d;
    return w;
}

DensityWaveform DensityWaveform::sinusoid(double offset, double amplitude, double period_ticks) {
    DensityWaveform w;
    w.kind = Kind::sinusoid;
    w.level = offset;
    w.amplitude = amplitude;
    w.period_ticks = period_ticks;
    return w;
}

DensityWaveform DensityWaveform::ramp(double from, double to) {
    DensityWaveform w;
    w.kind = Kind::ramp;
    w.ramp_start = from;
    w.ramp_end = to;
    return w;
}

double DensityWaveform::at(std::int64_t n, std::int64_t n_ticks) const {
    double v = level;
    switch (kind) {
    case Kind::constant:
        break;
    case Kind::sinusoid:
        v = level + amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(n) / period_ticks);
        break;
    case Kind::ramp: {
        const double span = n_ticks > 1 ? static_cast<double>(n_ticks - 1) : 1.0;
        v = ramp_start + (ramp_end - ramp_start) * static_cast<double>(n) / span;
        break;
    }
    }
    return std::clamp(v, 0.0, 1.0);
}

std::vector<double> DensityWaveform::sample(std::int64_t n_ticks) const {
    std::vector<double> out(static_cast<std::size_t>(n_ticks));
    for (std::int64_t n = 0; n < n_ticks; ++n) {
        out[static_cast<std::size_t>(n)] = at(n, n_ticks);
    }
    return out;
}

StabilityReport stability_probe(const ntf::RationalTransferFunction& ntf,
                                const DensityWaveform& waveform, std::int64_t n_ticks) {
    if (n_ticks <= 0) {
        throw std::invalid_argument("stability probe needs a positive tick count");
    }
    DeltaSigmaModulator mod(ntf);
    StabilityReport report;
    report.e_min = std::numeric_limits<double>::infinity();
    report.e_max = -std::numeric_limits<double>::infinity();
    double sum_y = 0.0;
    double sum_d = 0.0;
    for (std::int64_t n = 0; n < n_ticks; ++n) {
        const double d = waveform.at(n, n_ticks);
        sum_y += mod.step(d);
        sum_d += d;
        const double e = mod.last_error();
        report.e_min = std::min(report.e_min, e);
        report.e_max = std::max(report.e_max, e);
        if (e < -1.0 - kErrorBoundTolerance || e > kErrorBoundTolerance) {
            ++report.violation_count;
        }
    }
    report.mean_density_error = (sum_y - sum_d) / static_cast<double>(n_ticks);
    return report;
}

}  // namespace tsepdm::modulator
