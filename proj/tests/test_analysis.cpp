#include "oracles.hpp"
#include "tsepdm/analysis.hpp"
#include "tsepdm/experiments.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace tsepdm;
using namespace tsepdm::analysis;
using Catch::Approx;

namespace {

std::vector<double> as_double(const std::vector<int>& v) { return {v.begin(), v.end()}; }

std::vector<double> modulated(const ntf::RationalTransferFunction& tf, double d, std::size_t n) {
    return as_double(modulator::run(tf, std::vector<double>(n, d)).y);
}

// Synthetic trace sampled at steps_per_half per half cycle.
plant::Trace synthetic(double half_period, int steps_per_half, std::size_t half_cycles,
                       const std::function<double(double)>& i1) {
    plant::Trace trace;
    trace.step = half_period / steps_per_half;
    const std::size_t n = half_cycles * static_cast<std::size_t>(steps_per_half);
    for (std::size_t k = 0; k <= n; ++k) {
        const double t = static_cast<double>(k) * trace.step;
        trace.samples.push_back({t, i1(t), 0.0, 0.0, 0.0, 0.0, 0.0});
    }
    return trace;
}

double energy(const std::vector<double>& x) {
    double e = 0.0;
    for (double v : x) {
        e += v * v;
    }
    return e;
}

double one_sided_energy(const Spectrum& s) {
    double e = 0.0;
    const std::size_t last = s.magnitude.size() - 1;
    for (std::size_t b = 0; b <= last; ++b) {
        const double w = (b == 0 || (b == last && s.length % 2 == 0)) ? 1.0 : 2.0;
        e += w * s.magnitude[b] * s.magnitude[b];
    }
    return e / static_cast<double>(s.length);
}

}  // namespace

TEST_CASE("alternating sequence is a single line at the switching frequency", "[analysis]") {
    std::vector<double> x(2048);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = i % 2 == 0 ? 1.0 : -1.0;
    }
    const auto s = spectrum_of_sequence(x);
    REQUIRE(s.ratio.size() == 1025);
    CHECK(s.ratio.back() == Approx(1.0));
    CHECK(s.magnitude.back() == Approx(2048.0));
    for (std::size_t b = 0; b + 1 < s.magnitude.size(); ++b) {
        REQUIRE(s.magnitude[b] < 1e-9);
    }
}

TEST_CASE("bins map to 2b/N and match a direct DFT", "[analysis]") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g;
    std::vector<double> x(1024);
    for (auto& v : x) {
        v = g(rng);
    }
    const auto s = spectrum_of_sequence(x);
    CHECK(s.ratio_per_bin == Approx(2.0 / 1024));
    for (std::size_t b : {0u, 1u, 77u, 300u, 512u}) {
        CHECK(s.ratio[b] == Approx(2.0 * b / 1024.0));
        CHECK(s.magnitude[b] == Approx(oracle::dft_magnitude(x, b)).epsilon(1e-9));
    }
    CHECK_THROWS_AS(spectrum_of_sequence(std::vector<double>(1000, 1.0)), std::invalid_argument);
}

TEST_CASE("held spectrum extends the ratio axis", "[analysis]") {
    const auto y = modulated(ntf::build_third_order({0.075, 0.9}), 0.963, 1 << 14);
    const auto gates = modulator::gate_split(modulator::run(ntf::build_third_order({0.075, 0.9}),
                                                            std::vector<double>(1 << 14, 0.963)).y);
    std::vector<double> s;
    for (const auto& gr : gates) {
        s.push_back(gr.s);
    }
    const auto held = spectrum_of_held_sequence(s, 4);
    CHECK(held.length == s.size() * 4);
    CHECK(held.ratio.back() == Approx(4.0));
    // the fundamental dominates; the notch images sit either side of it
    const double line = band_energy_db(held, 1.0, 0.001);
    CHECK(band_energy_db(held, 0.925, 0.005) < line - 40.0);
    CHECK(band_energy_db(held, 1.075, 0.005) < line - 40.0);
    CHECK_THROWS_AS(spectrum_of_held_sequence(s, 0), std::invalid_argument);
}

TEST_CASE("notch removes the band that the first-order modulator fills", "[analysis]") {
    const std::size_t n = 1 << 14;
    const auto y1 = spectrum_of_sequence(modulated(ntf::build_first_order(), 0.963, n));
    const auto y3 = spectrum_of_sequence(modulated(ntf::build_third_order({0.075, 0.9}), 0.963, n));
    CHECK(band_energy_db(y3, 0.075, 0.005) <= band_energy_db(y1, 0.075, 0.005) - 20.0);
}

TEST_CASE("band energy sums squared magnitudes", "[analysis]") {
    Spectrum s;
    s.ratio = {0.0, 0.1, 0.2, 0.3};
    s.magnitude = {1.0, 2.0, 3.0, 4.0};
    CHECK(band_energy(s, 0.2, 0.1 + 1e-12) == Approx(4.0 + 9.0 + 16.0));
    CHECK(band_energy_db(s, 0.2, 0.0) == Approx(10.0 * std::log10(9.0)));
    CHECK(band_energy_db(s, 0.9, 0.01) == -400.0);
}

TEST_CASE("property: Parseval", "[analysis][property]") {
    std::mt19937_64 rng(13);
    std::normal_distribution<double> g;
    for (std::size_t n : {1024u, 1025u, 4096u, 6000u}) {
        std::vector<double> x(n);
        for (auto& v : x) {
            v = g(rng);
        }
        const auto s = spectrum_of_sequence(x);
        CHECK(std::abs(one_sided_energy(s) - energy(x)) <= 1e-9 * energy(x));
    }
    const auto y = modulated(ntf::build_third_order({0.075, 0.9}), 0.6, 1 << 14);
    CHECK(std::abs(one_sided_energy(spectrum_of_sequence(y)) - energy(y)) <= 1e-9 * energy(y));
}

TEST_CASE("property: gating shifts the spectrum by half the sample rate", "[analysis][property]") {
    for (double d : {0.3, 0.7, 0.963}) {
        for (const auto& tf : {ntf::build_first_order(), ntf::build_third_order({0.075, 0.9})}) {
            const auto y = modulator::run(tf, std::vector<double>(1 << 12, d)).y;
            std::vector<double> s;
            for (const auto& gr : modulator::gate_split(y, 1)) {
                s.push_back(gr.s);
            }
            const auto ys = spectrum_of_sequence(as_double(y));
            const auto ss = spectrum_of_sequence(s);
            const std::size_t half = ys.length / 2;
            for (std::size_t b = 0; b <= half; ++b) {
                REQUIRE(std::abs(ss.magnitude[b] - ys.magnitude[half - b]) <= 1e-9 * (1.0 + ys.magnitude[half - b]));
            }
        }
    }
}

TEST_CASE("envelope of a pure sinusoid is flat", "[analysis]") {
    const double th = 0.5 / 300e3;
    const double w = 2.0 * std::numbers::pi * 300e3;
    const int steps = 256;
    const auto trace = synthetic(th, steps, 200, [&](double t) { return 5.0 * std::sin(w * t + 0.3); });
    const auto env = envelope_extract(trace, plant::Side::primary, th);
    REQUIRE(env.size() == 200);
    const double bound = 5.0 * std::numbers::pi * std::numbers::pi / (2.0 * steps * steps);
    for (const auto& p : env) {
        REQUIRE(p.peak <= 5.0 + 1e-12);
        REQUIRE(p.peak >= 5.0 - bound);
    }
    const auto zero = synthetic(th, steps, 20, [](double) { return 0.0; });
    for (const auto& p : envelope_extract(zero, plant::Side::primary, th)) {
        CHECK(p.peak == 0.0);
    }
}

TEST_CASE("property: envelope recovers modulation depth", "[analysis][property]") {
    const double th = 0.5 / 300e3;
    const double w = 2.0 * std::numbers::pi * 300e3;
    for (double m : {0.05, 0.2, 0.5}) {
        for (double beat : {0.05, 0.075, 0.1}) {
            const double wm = beat * w;
            const auto trace = synthetic(th, 128, 2000, [&](double t) {
                return 3.0 * (1.0 + m * std::cos(wm * t)) * std::sin(w * t);
            });
            const auto env = envelope_extract(trace, plant::Side::primary, th);
            const auto r = fluctuation(env, 0.0, 1.0);
            const double depth = (r.i_max - r.i_min) / (r.i_max + r.i_min);
            INFO("m " << m << " beat " << beat);
            CHECK(depth == Approx(m).epsilon(0.02));
        }
    }
}

TEST_CASE("fluctuation metric", "[analysis]") {
    std::vector<EnvelopePoint> flat;
    std::vector<EnvelopePoint> am;
    for (int i = 0; i < 1000; ++i) {
        const double t = i * 1e-6;
        flat.push_back({t, 4.0});
        am.push_back({t, 2.0 * (1.0 + 0.3 * std::cos(2.0 * std::numbers::pi * i / 100.0))});
    }
    CHECK(fluctuation(flat, 0.0, 1.0).percent == 0.0);
    const auto r = fluctuation(am, 0.0, 1.0);
    CHECK(r.percent == Approx(60.0).epsilon(1e-9));
    CHECK(r.i_min <= r.i_mean);
    CHECK(r.i_mean <= r.i_max);
    CHECK_THROWS_AS(fluctuation(am, 5.0, 1.0), std::invalid_argument);

    const auto window = fluctuation(am, 100e-6, 50e-6);
    CHECK(window.i_max <= r.i_max);
}

TEST_CASE("property: fluctuation is scale invariant", "[analysis][property]") {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> u(0.5, 2.0);
    std::vector<EnvelopePoint> env;
    for (int i = 0; i < 500; ++i) {
        env.push_back({i * 1e-6, u(rng)});
    }
    const double base = fluctuation(env, 0.0, 1.0).percent;
    for (double scale : {1e-3, 0.5, 7.0, 1e4}) {
        auto scaled = env;
        for (auto& p : scaled) {
            p.peak *= scale;
        }
        const auto r = fluctuation(scaled, 0.0, 1.0);
        CHECK(r.percent == Approx(base).epsilon(1e-12));
        CHECK(r.percent >= 0.0);
    }
}

TEST_CASE("online envelope equals offline extraction", "[analysis]") {
    experiments::OperatingPointSettings s;
    s.ntf = experiments::NtfChoice::first_order();
    s.settle = 0.5e-3;
    s.window = 0.5e-3;
    const auto trace = experiments::simulate_operating_point(s, 0.963, 1);
    const auto offline = envelope_extract(trace, plant::Side::primary, s.params.half_period());
    const auto online = envelope_of(trace, plant::Side::primary);
    REQUIRE(offline.size() == online.size());
    for (std::size_t i = 0; i < online.size(); ++i) {
        REQUIRE(offline[i].t == Approx(online[i].t));
        REQUIRE(offline[i].peak == online[i].peak);
    }
}

TEST_CASE("conventional modulation shows the beat in the envelope", "[analysis][slow]") {
    experiments::OperatingPointSettings s;
    s.ntf = experiments::NtfChoice::first_order();
    const auto trace = experiments::simulate_operating_point(s, 0.963, 0);
    const auto env = envelope_of(trace, plant::Side::primary);
    std::vector<double> x;
    for (const auto& p : env) {
        if (p.t >= s.settle) {
            x.push_back(p.peak);
        }
    }
    x.resize(std::min<std::size_t>(x.size(), 1024));
    REQUIRE(x.size() == 1024);
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
    for (auto& v : x) {
        v -= mean;
    }
    const auto spec = spectrum_of_sequence(x, Window::hann);
    const auto top = std::max_element(spec.magnitude.begin() + 1, spec.magnitude.end()) - spec.magnitude.begin();
    // envelope is sampled once per half cycle: ratio axis is omega / omega_s
    CHECK(spec.ratio[static_cast<std::size_t>(top)] == Approx(0.075).epsilon(0.1));
    CHECK(fluctuation(env, s.settle, s.window).percent >= 40.0);
}

TEST_CASE("soft-switching proxy", "[analysis]") {
    experiments::OperatingPointSettings s;
    s.ntf = experiments::NtfChoice::first_order();
    s.settle = 1e-3;
    s.window = 1e-3;
    const auto trace = experiments::simulate_operating_point(s, 1.0, 0);
    const auto full = zvs_polarity_check(trace, s.settle);
    CHECK(full.events.size() > 1000);
    CHECK(full.pass_rate() == 1.0);

    plant::Trace dead;
    dead.envelope = {{0.0, 0.0, 0.0}, {1e-6, 0.0, 0.0}};
    dead.events.push_back({0, plant::Side::primary, 1, 1, 0.0, 1.0, 0.0, 0.0, 0.0});
    dead.events.push_back({0, plant::Side::secondary, 1, 1, 0.0, 1.0, 0.0, 0.0, 0.0});
    const auto z = zvs_polarity_check(dead);
    REQUIRE(z.events.size() == 2);
    CHECK_FALSE(z.events[0].pass);
    CHECK_FALSE(z.events[1].pass);
}
