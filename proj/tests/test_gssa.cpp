#include "oracles.hpp"
#include "tsepdm/analysis.hpp"
#include "tsepdm/gssa.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace tsepdm;
using namespace tsepdm::gssa;
using Catch::Approx;

namespace {

oracle::Network network_of(const plant::PlantParams& p) {
    return {p.L1, p.L2, p.C1, p.C2, p.R1, p.R2, p.k, p.fs};
}

}  // namespace

TEST_CASE("equilibrium matches the phasor oracle", "[gssa]") {
    const plant::PlantParams p;
    const auto model = build_envelope_model(p);
    const double u = plant::square_wave_fundamental(50.0);
    const auto ref = oracle::phasor_oracle(network_of(p), u, u);
    CHECK(model.equilibrium_amplitudes[0] == Approx(std::abs(ref.i1)).epsilon(0.01));
    CHECK(model.equilibrium_amplitudes[1] == Approx(std::abs(ref.i2)).epsilon(0.01));
    CHECK(model.input_amplitudes[0] == Approx(u));
    CHECK(model.omega_s == Approx(p.omega_s()));
    const StateVector rates = envelope_rates(p, model.equilibrium, u, u);
    CHECK(rates.norm() < 1e-6 * p.omega_s() * model.equilibrium.norm());
}

TEST_CASE("eigenvalues are stable and include the beat mode", "[gssa]") {
    const plant::PlantParams p;
    const auto model = build_envelope_model(p);
    const auto eig = eigenvalues(model);
    bool beat = false;
    for (Eigen::Index i = 0; i < eig.size(); ++i) {
        CHECK(eig(i).real() <= 0.0);
        const double ratio = std::abs(eig(i).imag()) / p.omega_s();
        if (std::abs(ratio - 0.075) < 0.0075 && std::abs(eig(i).real()) < 0.2 * std::abs(eig(i).imag())) {
            beat = true;
        }
    }
    CHECK(beat);
}

TEST_CASE("heavy damping leaves only strictly decaying modes", "[gssa]") {
    plant::PlantParams p;
    p.R1 = p.R2 = 50.0;
    // the full secondary rail is out of reach at this damping
    const double u = plant::square_wave_fundamental(50.0);
    const auto model = build_envelope_model(p, u, 0.05 * u);
    const auto eig = eigenvalues(model);
    for (Eigen::Index i = 0; i < eig.size(); ++i) {
        CHECK(eig(i).real() < 0.0);
    }
}

TEST_CASE("amplitude Bode peak sits at the beat frequency", "[gssa]") {
    const plant::PlantParams p;
    const auto model = build_envelope_model(p);
    for (auto ch : {Channel::u1_to_i1, Channel::u1_to_i2, Channel::u2_to_i1, Channel::u2_to_i2}) {
        INFO(to_string(ch));
        CHECK(peak_ratio(model, ch) == Approx(0.075).epsilon(0.10));
    }
    const auto grid = log_grid(0.005, 0.5, 200);
    const auto bode = amplitude_bode(model, Channel::u1_to_i1, grid);
    REQUIRE(bode.size() == 200);
    const auto top = std::max_element(bode.begin(), bode.end(),
                                      [](const auto& a, const auto& b) { return a.magnitude_db < b.magnitude_db; });
    CHECK(top->ratio == Approx(0.075).epsilon(0.10));
    CHECK(top->magnitude_db > bode.front().magnitude_db);
}

TEST_CASE("low-frequency gain equals the static sensitivity", "[gssa]") {
    const plant::PlantParams p;
    const auto model = build_envelope_model(p);
    const double u = plant::square_wave_fundamental(50.0);
    const double du = 1e-4 * u;
    const auto net = network_of(p);
    const auto up1 = oracle::phasor_oracle(net, u + du, u);
    const auto dn1 = oracle::phasor_oracle(net, u - du, u);
    const auto up2 = oracle::phasor_oracle(net, u, u + du);
    const auto dn2 = oracle::phasor_oracle(net, u, u - du);
    const double w = 1e-7 * p.omega_s();
    CHECK(frequency_response(model, Channel::u1_to_i1, w).real() ==
          Approx((std::abs(up1.i1) - std::abs(dn1.i1)) / (2 * du)).epsilon(1e-3));
    CHECK(frequency_response(model, Channel::u1_to_i2, w).real() ==
          Approx((std::abs(up1.i2) - std::abs(dn1.i2)) / (2 * du)).epsilon(1e-3));
    CHECK(frequency_response(model, Channel::u2_to_i1, w).real() ==
          Approx((std::abs(up2.i1) - std::abs(dn2.i1)) / (2 * du)).epsilon(1e-3));
    CHECK(frequency_response(model, Channel::u2_to_i2, w).real() ==
          Approx((std::abs(up2.i2) - std::abs(dn2.i2)) / (2 * du)).epsilon(1e-3));
}

TEST_CASE("peak tracks the coupling coefficient", "[gssa]") {
    plant::PlantParams p;
    const double base = peak_ratio(build_envelope_model(p), Channel::u1_to_i1);
    p.k = 0.30;
    const double doubled = peak_ratio(build_envelope_model(p), Channel::u1_to_i1, 0.01, 0.5);
    CHECK(doubled / base == Approx(2.0).epsilon(0.15));
    for (double k : {0.10, 0.125, 0.15, 0.175, 0.20}) {
        p.k = k;
        INFO("k " << k);
        CHECK(peak_ratio(build_envelope_model(p), Channel::u1_to_i1) == Approx(0.5 * k).epsilon(0.10));
    }
}

TEST_CASE("resonant peak prediction", "[gssa]") {
    plant::PlantParams p;
    CHECK(resonant_peak_prediction(p) == Approx(2.0 * std::numbers::pi * 22.5e3).epsilon(1e-12));
    p.k = 0.13;
    CHECK(resonant_peak_prediction(p) / p.omega_s() == Approx(0.065).epsilon(1e-12));
    p.k = 0.0;
    CHECK(resonant_peak_prediction(p) == 0.0);
}

TEST_CASE("log grid", "[gssa]") {
    const auto g = log_grid(0.01, 1.0, 3);
    REQUIRE(g.size() == 3);
    CHECK(g[0] == Approx(0.01));
    CHECK(g[1] == Approx(0.1));
    CHECK(g[2] == Approx(1.0));
    CHECK_THROWS_AS(log_grid(0.0, 1.0, 3), std::invalid_argument);
}

TEST_CASE("envelope model settles to the switching simulation amplitudes", "[gssa][slow]") {
    const plant::PlantParams p;
    const auto model = build_envelope_model(p);
    plant::SimConfig cfg;
    cfg.duration = 3e-3;
    cfg.sample_stride = 0;
    modulator::DeltaSigmaModulator a(ntf::build_first_order());
    modulator::DeltaSigmaModulator b(ntf::build_first_order());
    const auto trace = plant::simulate(p, cfg, {&a, plant::constant_density(1.0)}, {&b, plant::constant_density(1.0)});
    const auto f1 = analysis::fluctuation(analysis::envelope_of(trace, plant::Side::primary), 2.5e-3, 0.5e-3);
    const auto f2 = analysis::fluctuation(analysis::envelope_of(trace, plant::Side::secondary), 2.5e-3, 0.5e-3);
    CHECK(f1.i_max == Approx(model.equilibrium_amplitudes[0]).epsilon(0.02));
    CHECK(f2.i_max == Approx(model.equilibrium_amplitudes[1]).epsilon(0.02));
}

TEST_CASE("amplitude-modulated rail excites the envelope most at the beat frequency", "[gssa][slow]") {
    const plant::PlantParams p;
    const double beat = resonant_peak_prediction(p);
    std::vector<double> ripple;
    for (double scale : {0.5, 0.75, 1.0, 1.25, 1.5}) {
        const double dw = scale * beat;
        plant::SimConfig cfg;
        cfg.duration = 5e-3;
        cfg.sample_stride = 0;
        cfg.primary_rail_scale = [dw](double t) { return 1.0 + 0.05 * std::cos(dw * t); };
        modulator::DeltaSigmaModulator a(ntf::build_first_order());
        modulator::DeltaSigmaModulator b(ntf::build_first_order());
        const auto trace = plant::simulate(p, cfg, {&a, plant::constant_density(1.0)}, {&b, plant::constant_density(1.0)});
        ripple.push_back(analysis::fluctuation(analysis::envelope_of(trace, plant::Side::primary), 2e-3, 3e-3).percent);
    }
    const auto top = std::max_element(ripple.begin(), ripple.end()) - ripple.begin();
    INFO(ripple[0] << " " << ripple[1] << " " << ripple[2] << " " << ripple[3] << " " << ripple[4]);
    CHECK(top == 2);
}
