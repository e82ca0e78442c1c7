#pragma once

// Noise transfer function construction and analysis for 1-bit pulse density
// modulators. All transfer functions are rational in z with coefficients in
// descending powers of z and a monic denominator.

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tsepdm::ntf {

using Complex = std::complex<double>;

/// Thrown when a transfer function is evaluated at (or numerically at) a pole.
class PoleEvaluationError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// z-domain rational function num(z)/den(z), den monic, deg(num) <= deg(den).
class RationalTransferFunction {
public:
    RationalTransferFunction(std::vector<double> num, std::vector<double> den);

    /// Expands prod(z - zeros) / prod(z - poles) and keeps the factors for
    /// pole/zero queries. Complex roots must come in conjugate pairs.
    static RationalTransferFunction from_roots(const std::vector<Complex>& zeros,
                                               const std::vector<Complex>& poles);

    [[nodiscard]] const std::vector<double>& numerator() const noexcept { return num_; }
    [[nodiscard]] const std::vector<double>& denominator() const noexcept { return den_; }
    [[nodiscard]] int order() const noexcept { return static_cast<int>(den_.size()) - 1; }

    /// Numerator coefficients padded with leading zeros to order()+1 entries.
    [[nodiscard]] std::vector<double> aligned_numerator() const;

    [[nodiscard]] Complex operator()(Complex z) const;

    /// Stored factors when built from roots, otherwise companion-matrix roots.
    [[nodiscard]] std::vector<Complex> zeros() const;
    [[nodiscard]] std::vector<Complex> poles() const;

private:
    std::vector<double> num_;
    std::vector<double> den_;
    std::optional<std::vector<Complex>> zeros_;
    std::optional<std::vector<Complex>> poles_;
};

/// Notch design: zero pair at angle +-pi*notch_ratio, poles at pole_radius.
/// notch_ratio is omega_e / omega_s with one modulator tick per half
/// switching cycle.
struct NtfDesignSpec {
    double notch_ratio = 0.075;
    double pole_radius = 0.9;

    void validate() const;
};

// Magnitude tolerances for the static requirement checks.
inline constexpr double kDcTolerance = 1e-9;
inline constexpr double kNotchTolerance = 1e-9;
inline constexpr double kDbFloor = -200.0;

struct RequirementReport {
    bool dc_gain_zero = false;
    double dc_residual = 0.0;
    /// NTF(z) - 1 vanishes as z -> infinity, i.e. NTF(inf) = 1 (the loop
    /// filter 1 - NTF is strictly proper and the modulator is causal).
    bool realizable = false;
    double realizability_residual = 0.0;
    bool notch = false;
    double notch_gain = 0.0;
    std::string notes;

    [[nodiscard]] bool all_pass() const noexcept { return dc_gain_zero && realizable && notch; }
};

/// 1 - z^-1.
RationalTransferFunction build_first_order();

/// (z-1)(z^2 - 2cos(pi rho) z + 1) / ((z-r)(z^2 - 2 r cos(pi rho) z + r^2)).
RationalTransferFunction build_third_order(const NtfDesignSpec& spec);

/// num(z)/den(z); throws PoleEvaluationError if |den(z)| is below tolerance.
Complex evaluate(const RationalTransferFunction& tf, Complex z);

RequirementReport check_requirements(const RationalTransferFunction& tf,
                                     const NtfDesignSpec& spec);

/// H(z) = 1 - NTF(z), the strictly proper filter the modulator applies to
/// past quantization errors. Requires NTF(inf) = 1.
RationalTransferFunction to_error_filter(const RationalTransferFunction& tf);

struct BodePoint {
    double ratio;         ///< omega / omega_s, unit-circle angle pi * ratio
    double magnitude_db;  ///< clamped at kDbFloor
    double phase_rad;
};

/// Evaluates tf at ratios i / n_points, i = 1..n_points.
std::vector<BodePoint> bode_data(const RationalTransferFunction& tf, int n_points);

/// Unit-circle point for a frequency ratio omega/omega_s.
Complex unit_circle_point(double ratio);

}  // namespace tsepdm::ntf
