#include "bmc/kernel.hpp"

#include <cmath>
#include <stdexcept>

namespace bmc {

const char* regime_name(Regime r) {
    switch (r) {
        case Regime::sub_critical: return "sub-critical";
        case Regime::critical: return "critical";
        case Regime::super_critical: return "super-critical";
    }
    return "?";
}

BarKernel::BarKernel(double a, double sigma) : a_(a), sigma_(sigma) {
    if (!(std::fabs(a) > 0.0 && std::fabs(a) < 1.0))
        throw std::invalid_argument("autoregression coefficient needs 0 < |a| < 1");
    if (!(sigma >= 0.0))
        throw std::invalid_argument("innovation std deviation must be >= 0");
    alpha_ = std::fabs(a);
    theta_ = a > 0 ? 1.0 : -1.0;
    sigma_a_ = sigma / std::sqrt(1.0 - a * a);
}

Regime BarKernel::regime() const {
    const double gap = 2.0 * a_ * a_ - 1.0;
    if (std::fabs(gap) < 1e-12) return Regime::critical;
    return gap < 0 ? Regime::sub_critical : Regime::super_critical;
}

std::pair<double, double> BarKernel::sample_children(double x,
                                                     RngStream& rng) const {
    auto [g0, g1] = rng.gaussian_pair();
    return {a_ * x + sigma_ * g0, a_ * x + sigma_ * g1};
}

std::optional<GaussianSpec> BarKernel::invariant_measure() const {
    return GaussianSpec{0.0, sigma_a_ * sigma_a_};
}

Observable BarKernel::q_pow(const Observable& f, int n) const {
    if (n < 0) throw std::invalid_argument("negative kernel power");
    std::vector<double> c = f.coeffs();
    for (int m = 1; m < static_cast<int>(c.size()); ++m) {
        const long long e = static_cast<long long>(n) * m;
        double lambda = std::pow(alpha_, static_cast<double>(e));
        if (theta_ < 0 && (e & 1)) lambda = -lambda;
        c[m] *= lambda;
    }
    return Observable(f.scale(), std::move(c));
}

double BarKernel::q_apply(const Observable& f, double x, int n) const {
    return q_pow(f, n).evaluate(x);
}

namespace {

double require_basis(const BarKernel& k) {
    if (!(k.sigma_a() > 0.0))
        throw std::logic_error(
            "Hermite basis undefined for the noise-free diagnostic kernel");
    return k.sigma_a();
}

} // namespace

Observable BarKernel::constant(double v) const {
    return constant_observable(require_basis(*this), v);
}

Observable BarKernel::identity() const {
    return identity_observable(require_basis(*this));
}

Observable BarKernel::square_centered() const {
    return center(square_observable(require_basis(*this)));
}

Observable BarKernel::hermite(int m) const {
    return hermite_observable(require_basis(*this), m);
}

Observable BarKernel::decompose(const std::function<double(double)>& f,
                                int degree, bool allow_high) const {
    return bmc::decompose(f, degree, require_basis(*this), allow_high);
}

} // namespace bmc
