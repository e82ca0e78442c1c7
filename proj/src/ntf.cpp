#include "tsepdm/ntf.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace tsepdm::ntf {

namespace {

constexpr double kPoleTolerance = 1e-13;
constexpr double kLeadingTolerance = 1e-12;

Complex horner(const std::vector<double>& coeffs, Complex z) {
    Complex acc{0.0, 0.0};
    for (double c : coeffs) {
        acc = acc * z + c;
    }
    return acc;
}

std::vector<double> expand_roots(const std::vector<Complex>& roots) {
    std::vector<Complex> poly{Complex{1.0, 0.0}};
    for (const Complex& r : roots) {
        std::vector<Complex> next(poly.size() + 1, Complex{0.0, 0.0});
        for (std::size_t i = 0; i < poly.size(); ++i) {
            next[i] += poly[i];
            next[i + 1] -= poly[i] * r;
        }
        poly = std::move(next);
    }
    std::vector<double> out(poly.size());
    for (std::size_t i = 0; i < poly.size(); ++i) {
        if (std::abs(poly[i].imag()) > 1e-9 * std::max(1.0, std::abs(poly[i].real()))) {
            throw std::invalid_argument("roots must form conjugate pairs");
        }
        out[i] = poly[i].real();
    }
    return out;
}

std::vector<Complex> polynomial_roots(const std::vector<double>& coeffs) {
    std::size_t first = 0;
    while (first < coeffs.size() && coeffs[first] == 0.0) {
        ++first;
    }
    if (coeffs.size() - first <= 1) {
        return {};
    }
    const auto degree = static_cast<Eigen::Index>(coeffs.size() - first - 1);
    const double lead = coeffs[first];
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(degree, degree);
    for (Eigen::Index j = 0; j < degree; ++j) {
        companion(0, j) = -coeffs[first + 1 + static_cast<std::size_t>(j)] / lead;
    }
    for (Eigen::Index i = 1; i < degree; ++i) {
        companion(i, i - 1) = 1.0;
    }
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    std::vector<Complex> roots;
    for (Eigen::Index i = 0; i < degree; ++i) {
        roots.push_back(solver.eigenvalues()(i));
    }
    return roots;
}

}  // namespace

RationalTransferFunction::RationalTransferFunction(std::vector<double> num, std::vector<double> den)
    : num_(std::move(num)), den_(std::move(den)) {
    if (den_.empty() || num_.empty()) {
        throw std::invalid_argument("transfer function needs non-empty numerator and denominator");
    }
    if (den_.front() != 1.0) {
        throw std::invalid_argument("denominator must be monic");
    }
    auto finite = [](double c) { return std::isfinite(c); };
    if (!std::all_of(num_.begin(), num_.end(), finite) ||
        !std::all_of(den_.begin(), den_.end(), finite)) {
        throw std::invalid_argument("transfer function coefficients must be finite");
    }
    while (num_.size() > 1 && num_.front() == 0.0) {
        num_.erase(num_.begin());
    }
    if (num_.size() > den_.size()) {
        throw std::invalid_argument("numerator degree exceeds denominator degree");
    }
}

RationalTransferFunction RationalTransferFunction::from_roots(const std::vector<Complex>& zeros,
                                                              const std::vector<Complex>& poles) {
    RationalTransferFunction tf(expand_roots(zeros), expand_roots(poles));
    tf.zeros_ = zeros;
    tf.poles_ = poles;
    return tf;
}

std::vector<double> RationalTransferFunction::aligned_numerator() const {
    std::vector<double> out(den_.size() - num_.size(), 0.0);
    out.insert(out.end(), num_.begin(), num_.end());
    return out;
}

Complex RationalTransferFunction::operator()(Complex z) const {
    const Complex d = horner(den_, z);
    if (std::abs(d) < kPoleTolerance) {
        std::ostringstream msg;
        msg << "transfer function evaluated at a pole: z = " << z;
        throw PoleEvaluationError(msg.str());
    }
    return horner(num_, z) / d;
}

std::vector<Complex> RationalTransferFunction::zeros() const {
    return zeros_ ? *zeros_ : polynomial_roots(num_);
}

std::vector<Complex> RationalTransferFunction::poles() const {
    return poles_ ? *poles_ : polynomial_roots(den_);
}

void NtfDesignSpec::validate() const {
    if (!(notch_ratio > 0.0 && notch_ratio < 1.0)) {
        throw std::invalid_argument("notch ratio must lie in (0, 1)");
    }
    if (!(pole_radius > 0.0 && pole_radius < 1.0)) {
        throw std::invalid_argument("pole radius must lie in (0, 1)");
    }
}

RationalTransferFunction build_first_order() {
    return RationalTransferFunction::from_roots({Complex{1.0, 0.0}}, {Complex{0.0, 0.0}});
}

RationalTransferFunction build_third_order(const NtfDesignSpec& spec) {
    spec.validate();
    const Complex notch = std::polar(1.0, std::numbers::pi * spec.notch_ratio);
    const double r = spec.pole_radius;
    return RationalTransferFunction::from_roots(
        {Complex{1.0, 0.0}, notch, std::conj(notch)},
        {Complex{r, 0.0}, r * notch, r * std::conj(notch)});
}

Complex evaluate(const RationalTransferFunction& tf, Complex z) { return tf(z); }

Complex unit_circle_point(double ratio) { return std::polar(1.0, std::numbers::pi * ratio); }

RequirementReport check_requirements(const RationalTransferFunction& tf, const NtfDesignSpec& spec) {
    spec.validate();
    RequirementReport report;

    report.dc_residual = std::abs(tf(Complex{1.0, 0.0}));
    report.dc_gain_zero = report.dc_residual <= kDcTolerance;

    // NTF(z) - 1 -> 0 as z -> inf: equal degree and equal leading coefficient.
    const auto num = tf.aligned_numerator();
    report.realizability_residual = std::abs(num.front() - tf.denominator().front());
    report.realizable = report.realizability_residual <= kLeadingTolerance;

    report.notch_gain = std::abs(tf(unit_circle_point(spec.notch_ratio)));
    report.notch = report.notch_gain <= kNotchTolerance;

    std::ostringstream notes;
    notes << "realizability enforced as NTF(inf) = 1 (loop filter 1 - NTF strictly proper)";
    if (!report.dc_gain_zero) {
        notes << "; dc gain " << report.dc_residual;
    }
    if (!report.notch) {
        notes << "; gain " << report.notch_gain << " at ratio " << spec.notch_ratio;
    }
    report.notes = notes.str();
    return report;
}

RationalTransferFunction to_error_filter(const RationalTransferFunction& tf) {
    const auto num = tf.aligned_numerator();
    const auto& den = tf.denominator();
    if (std::abs(num.front() - den.front()) > kLeadingTolerance) {
        throw std::invalid_argument("NTF is not realizable: NTF(inf) != 1");
    }
    std::vector<double> h(den.size() - 1);
    for (std::size_t i = 1; i < den.size(); ++i) {
        h[i - 1] = den[i] - num[i];
    }
    if (h.empty()) {
        h.push_back(0.0);
    }
    return RationalTransferFunction(std::move(h), den);
}

std::vector<BodePoint> bode_data(const RationalTransferFunction& tf, int n_points) {
    if (n_points < 2) {
        throw std::invalid_argument("bode_data needs at least two points");
    }
    std::vector<BodePoint> out;
    out.reserve(static_cast<std::size_t>(n_points));
    for (int i = 1; i <= n_points; ++i) {
        const double ratio = static_cast<double>(i) / n_points;
        const Complex h = tf(unit_circle_point(ratio));
        const double mag = std::abs(h);
        const double db = mag > 0.0 ? std::max(kDbFloor, 20.0 * std::log10(mag)) : kDbFloor;
        out.push_back({ratio, db, std::arg(h)});
    }
    return out;
}

}  // namespace tsepdm::ntf
