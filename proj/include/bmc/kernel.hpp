#pragma once

#include <optional>
#include <utility>

#include "bmc/hermite.hpp"
#include "bmc/rng.hpp"

// Transition kernels of a bifurcating chain: P(x, dy, dz) drives both
// children jointly, Q = (P0 + P1)/2 drives a uniformly chosen child.

namespace bmc {

struct GaussianSpec {
    double mean = 0.0;
    double variance = 0.0;
};

enum class Regime { sub_critical, critical, super_critical };

const char* regime_name(Regime r);

class Kernel {
  public:
    virtual ~Kernel() = default;
    // One joint draw (Y, Z) ~ P(x, .)
    virtual std::pair<double, double> sample_children(double x,
                                                      RngStream& rng) const = 0;
    // Stationary law of Q, when known in closed form.
    virtual std::optional<GaussianSpec> invariant_measure() const {
        return std::nullopt;
    }
};

// Symmetric Gaussian bifurcating autoregression: each child is
// a*x + sigma*eps with independent N(0, sigma^2) innovations, so
// P(x,.) = Q(x,.) x Q(x,.) and Q has invariant law N(0, sigma_a^2) with
// sigma_a = sigma / sqrt(1 - a^2). The orthonormal Hermite functions
// gbar_m for that law are eigenfunctions: Q gbar_m = a^m gbar_m.
class BarKernel final : public Kernel {
  public:
    // |a| in (0,1); sigma >= 0 (sigma = 0 is a noise-free diagnostic mode).
    BarKernel(double a, double sigma);

    double a() const { return a_; }
    double sigma() const { return sigma_; }
    double sigma_a() const { return sigma_a_; }
    double alpha() const { return alpha_; } // |a|
    double theta() const { return theta_; } // sign(a)

    // sub-critical 2a^2 < 1, critical 2a^2 = 1 (tol 1e-12), else super.
    Regime regime() const;

    std::pair<double, double> sample_children(double x,
                                              RngStream& rng) const override;
    std::optional<GaussianSpec> invariant_measure() const override;

    // a^{n m} applied coefficient-wise: the expansion of Q^n f.
    Observable q_pow(const Observable& f, int n) const;
    // Q^n f evaluated at x.
    double q_apply(const Observable& f, double x, int n) const;

    // Observables in this kernel's basis.
    Observable constant(double v) const;
    Observable identity() const;            // f(x) = x
    Observable square_centered() const;     // f(x) = x^2 - sigma_a^2
    Observable hermite(int m) const;        // gbar_m
    Observable decompose(const std::function<double(double)>& f,
                         int degree, bool allow_high = false) const;

  private:
    double a_, sigma_, sigma_a_, alpha_, theta_;
};

} // namespace bmc
