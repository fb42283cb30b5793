#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

// Orthonormal Hermite basis for the Gaussian N(0, sigma_a^2), Gauss-Hermite
// quadrature against it, and observables stored as finite expansions
// f = sum_m c_m gbar_m with gbar_m(x) = h_m(x / sigma_a), h_m the orthonormal
// probabilists' Hermite polynomial.

namespace bmc {

inline constexpr int kMaxDefaultDegree = 32;

// Quadrature rule for the standard normal weight: sum_i w_i p(u_i) equals
// E[p(G)] exactly for polynomials p of degree <= 2*order - 1.
struct GaussHermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

const GaussHermiteRule& gauss_hermite(int order);

// Default quadrature order used for expansions of the given degree.
inline int default_quadrature_order(int degree) {
    const int n = 2 * degree + 16;
    return n > 48 ? n : 48;
}

// h_0..h_max_degree at u, orthonormal w.r.t. N(0,1).
void hermite_values(double u, int max_degree, std::vector<double>& out);

class Observable {
  public:
    Observable() = default;
    Observable(double sigma_a, std::vector<double> coeffs);

    double scale() const { return sigma_a_; }
    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    const std::vector<double>& coeffs() const { return coeffs_; }
    double coeff(int m) const {
        return m < static_cast<int>(coeffs_.size()) ? coeffs_[m] : 0.0;
    }

    // <mu, f> is the degree-0 coefficient.
    double mean() const { return coeff(0); }

    double evaluate(double x) const;
    bool is_zero() const;

    friend bool operator==(const Observable&, const Observable&) = default;

  private:
    double sigma_a_ = 0.0;
    std::vector<double> coeffs_;
};

// f - <mu, f>
Observable center(const Observable& f);
// orthogonal projection onto the span of gbar_1
Observable project_R(const Observable& f);
// f - <mu,f> - R(f): kills the constant and the first eigen-component
Observable hat(const Observable& f);

Observable add(const Observable& f, const Observable& g);
Observable scaled(const Observable& f, double s);
// pointwise product re-expanded in the basis; result degree is the sum of
// the operand degrees (exact, quadrature-backed)
Observable multiply(const Observable& f, const Observable& g);

// <mu, f g> and <mu, f> by Gauss-Hermite quadrature of the pointwise values
double mu_inner(const Observable& f, const Observable& g);
double mu_inner(const Observable& f, const Observable& g, int order);

// Project a pointwise-evaluable function onto the basis; coefficients are
// c_m = <mu, f gbar_m>. Degrees above kMaxDefaultDegree need allow_high.
Observable decompose(const std::function<double(double)>& f, int degree,
                     double sigma_a, bool allow_high = false, int order = 0);

// Handy constructors.
Observable constant_observable(double sigma_a, double value);
Observable hermite_observable(double sigma_a, int m); // gbar_m
Observable identity_observable(double sigma_a);       // f(x) = x
Observable square_observable(double sigma_a);         // f(x) = x^2

// The sequence (f_l, l in N), finite list plus an explicit tail rule.
class ObservableSequence {
  public:
    enum class Tail { zero, constant_last };

    ObservableSequence(std::vector<Observable> entries, Tail tail);

    static ObservableSequence single(Observable f); // (f, 0, 0, ...)
    static ObservableSequence constant(Observable f); // (f, f, ...)

    Tail tail() const { return tail_; }
    int support() const { return static_cast<int>(entries_.size()); }
    double scale() const { return sigma_a_; }
    // entry(l) for any l >= 0, applying the tail rule
    const Observable& entry(int l) const;

  private:
    std::vector<Observable> entries_;
    Observable zero_;
    Tail tail_;
    double sigma_a_;
};

} // namespace bmc
