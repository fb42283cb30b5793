#include "bmc/hermite.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <mutex>

namespace bmc {

namespace {

GaussHermiteRule compute_rule(int order) {
    // Golub-Welsch on the Jacobi matrix of the orthonormal probabilists'
    // Hermite recurrence: zero diagonal, off-diagonal sqrt(k).
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(order);
    Eigen::VectorXd sub(order - 1);
    for (int k = 1; k < order; ++k) sub(k - 1) = std::sqrt(double(k));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    GaussHermiteRule rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    for (int i = 0; i < order; ++i) {
        rule.nodes[i] = solver.eigenvalues()(i);
        const double v0 = solver.eigenvectors()(0, i);
        rule.weights[i] = v0 * v0;
    }
    return rule;
}

} // namespace

const GaussHermiteRule& gauss_hermite(int order) {
    if (order < 1) throw std::invalid_argument("quadrature order must be >= 1");
    static std::map<int, GaussHermiteRule> cache;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(order);
    if (it == cache.end())
        it = cache.emplace(order, compute_rule(order)).first;
    return it->second;
}

void hermite_values(double u, int max_degree, std::vector<double>& out) {
    out.resize(max_degree + 1);
    out[0] = 1.0;
    if (max_degree == 0) return;
    out[1] = u;
    for (int m = 1; m < max_degree; ++m)
        out[m + 1] = (u * out[m] - std::sqrt(double(m)) * out[m - 1]) /
                     std::sqrt(double(m + 1));
}

Observable::Observable(double sigma_a, std::vector<double> coeffs)
    : sigma_a_(sigma_a), coeffs_(std::move(coeffs)) {
    if (!(sigma_a_ > 0.0))
        throw std::invalid_argument("observable basis scale must be positive");
    if (coeffs_.empty()) coeffs_.push_back(0.0);
}

double Observable::evaluate(double x) const {
    const double u = x / sigma_a_;
    // Forward recurrence fused with the dot product.
    double prev = 1.0;
    double acc = coeffs_[0];
    if (coeffs_.size() == 1) return acc;
    double cur = u;
    acc += coeffs_[1] * cur;
    for (int m = 1; m + 1 < static_cast<int>(coeffs_.size()); ++m) {
        const double next =
            (u * cur - std::sqrt(double(m)) * prev) / std::sqrt(double(m + 1));
        prev = cur;
        cur = next;
        acc += coeffs_[m + 1] * cur;
    }
    return acc;
}

bool Observable::is_zero() const {
    for (double c : coeffs_)
        if (c != 0.0) return false;
    return true;
}

namespace {

void check_same_basis(const Observable& f, const Observable& g) {
    if (f.scale() != g.scale())
        throw std::invalid_argument(
            "observables live in bases of different scale");
}

} // namespace

Observable center(const Observable& f) {
    std::vector<double> c = f.coeffs();
    c[0] = 0.0;
    return Observable(f.scale(), std::move(c));
}

Observable project_R(const Observable& f) {
    return Observable(f.scale(), {0.0, f.coeff(1)});
}

Observable hat(const Observable& f) {
    std::vector<double> c = f.coeffs();
    c[0] = 0.0;
    if (c.size() > 1) c[1] = 0.0;
    return Observable(f.scale(), std::move(c));
}

Observable add(const Observable& f, const Observable& g) {
    check_same_basis(f, g);
    std::vector<double> c(std::max(f.coeffs().size(), g.coeffs().size()), 0.0);
    for (size_t m = 0; m < c.size(); ++m)
        c[m] = f.coeff(static_cast<int>(m)) + g.coeff(static_cast<int>(m));
    return Observable(f.scale(), std::move(c));
}

Observable scaled(const Observable& f, double s) {
    std::vector<double> c = f.coeffs();
    for (double& v : c) v *= s;
    return Observable(f.scale(), std::move(c));
}

Observable multiply(const Observable& f, const Observable& g) {
    check_same_basis(f, g);
    const int deg = f.degree() + g.degree();
    const int order = default_quadrature_order(deg);
    const GaussHermiteRule& rule = gauss_hermite(order);
    std::vector<double> c(deg + 1, 0.0);
    std::vector<double> h;
    for (size_t i = 0; i < rule.nodes.size(); ++i) {
        const double x = f.scale() * rule.nodes[i];
        const double fg = rule.weights[i] * f.evaluate(x) * g.evaluate(x);
        hermite_values(rule.nodes[i], deg, h);
        for (int m = 0; m <= deg; ++m) c[m] += fg * h[m];
    }
    return Observable(f.scale(), std::move(c));
}

double mu_inner(const Observable& f, const Observable& g, int order) {
    check_same_basis(f, g);
    const GaussHermiteRule& rule = gauss_hermite(order);
    double acc = 0.0;
    for (size_t i = 0; i < rule.nodes.size(); ++i) {
        const double x = f.scale() * rule.nodes[i];
        acc += rule.weights[i] * f.evaluate(x) * g.evaluate(x);
    }
    return acc;
}

double mu_inner(const Observable& f, const Observable& g) {
    return mu_inner(f, g, default_quadrature_order(f.degree() + g.degree()));
}

Observable decompose(const std::function<double(double)>& f, int degree,
                     double sigma_a, bool allow_high, int order) {
    if (degree < 0) throw std::invalid_argument("negative degree");
    if (degree > kMaxDefaultDegree && !allow_high)
        throw std::invalid_argument(
            "degree above 32 requires explicit opt-in (quadrature order grows)");
    if (order <= 0) order = default_quadrature_order(degree);
    const GaussHermiteRule& rule = gauss_hermite(order);
    std::vector<double> c(degree + 1, 0.0);
    std::vector<double> h;
    for (size_t i = 0; i < rule.nodes.size(); ++i) {
        const double wf = rule.weights[i] * f(sigma_a * rule.nodes[i]);
        hermite_values(rule.nodes[i], degree, h);
        for (int m = 0; m <= degree; ++m) c[m] += wf * h[m];
    }
    return Observable(sigma_a, std::move(c));
}

Observable constant_observable(double sigma_a, double value) {
    return Observable(sigma_a, {value});
}

Observable hermite_observable(double sigma_a, int m) {
    std::vector<double> c(m + 1, 0.0);
    c[m] = 1.0;
    return Observable(sigma_a, std::move(c));
}

Observable identity_observable(double sigma_a) {
    // x = sigma_a * gbar_1
    return Observable(sigma_a, {0.0, sigma_a});
}

Observable square_observable(double sigma_a) {
    // x^2 = sigma_a^2 (1 + sqrt(2) gbar_2)
    return Observable(sigma_a,
                      {sigma_a * sigma_a, 0.0, std::sqrt(2.0) * sigma_a * sigma_a});
}

ObservableSequence::ObservableSequence(std::vector<Observable> entries,
                                       Tail tail)
    : entries_(std::move(entries)), tail_(tail) {
    if (entries_.empty())
        throw std::invalid_argument("observable sequence needs >= 1 entry");
    sigma_a_ = entries_.front().scale();
    for (const Observable& f : entries_)
        if (f.scale() != sigma_a_)
            throw std::invalid_argument(
                "sequence entries live in bases of different scale");
    zero_ = constant_observable(sigma_a_, 0.0);
}

ObservableSequence ObservableSequence::single(Observable f) {
    std::vector<Observable> e;
    e.push_back(std::move(f));
    return ObservableSequence(std::move(e), Tail::zero);
}

ObservableSequence ObservableSequence::constant(Observable f) {
    std::vector<Observable> e;
    e.push_back(std::move(f));
    return ObservableSequence(std::move(e), Tail::constant_last);
}

const Observable& ObservableSequence::entry(int l) const {
    if (l < 0) throw std::out_of_range("sequence index");
    if (l < support()) return entries_[l];
    return tail_ == Tail::constant_last ? entries_.back() : zero_;
}

} // namespace bmc
