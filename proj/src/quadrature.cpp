#include "nlac/quadrature.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace nlac {

namespace {

// Golub-Welsch for the Jacobi weight (1-x)^a (1+x)^b on [-1,1].
Rule1D golub_welsch_jacobi(int n, double a, double b) {
    if (n < 1) throw std::invalid_argument("quadrature: need at least one node");
    if (a <= -1.0 || b <= -1.0) throw std::invalid_argument("quadrature: Jacobi exponent <= -1");

    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    const double ab = a + b;
    auto diag = [&](int k) -> double {
        if (k == 0) return (b - a) / (ab + 2.0);
        const double den = (2.0 * k + ab) * (2.0 * k + ab + 2.0);
        return (b * b - a * a) / den;
    };
    auto offdiag2 = [&](int k) -> double {  // beta_k for k >= 1
        const double num = 4.0 * k * (k + a) * (k + b) * (k + ab);
        const double s = 2.0 * k + ab;
        return num / (s * s * (s + 1.0) * (s - 1.0));
    };
    for (int k = 0; k < n; ++k) {
        J(k, k) = diag(k);
        if (k + 1 < n) {
            const double bk = std::sqrt(offdiag2(k + 1));
            J(k, k + 1) = bk;
            J(k + 1, k) = bk;
        }
    }
    // total mass  int (1-x)^a (1+x)^b dx = 2^{a+b+1} B(a+1, b+1)
    const double mass =
        std::exp((ab + 1.0) * std::log(2.0) + std::lgamma(a + 1.0) + std::lgamma(b + 1.0) -
                 std::lgamma(ab + 2.0));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    Rule1D rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        rule.nodes[i] = es.eigenvalues()(i);
        const double v0 = es.eigenvectors()(0, i);
        rule.weights[i] = mass * v0 * v0;
    }
    return rule;
}

std::mutex cache_mutex;

}  // namespace

const Rule1D& gauss_legendre(int n) {
    static std::map<int, Rule1D> cache;
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, golub_welsch_jacobi(n, 0.0, 0.0)).first;
    return it->second;
}

const Rule1D& gauss_jacobi(int n, double b) {
    static std::map<std::pair<int, long long>, Rule1D> cache;
    // key on a fixed-point representation of b; the exponents used in
    // practice come from (p, beta) pairs and are reproducible.
    const long long key = static_cast<long long>(std::llround(b * 1e12));
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto it = cache.find({n, key});
    if (it == cache.end()) it = cache.emplace(std::make_pair(n, key), golub_welsch_jacobi(n, 0.0, b)).first;
    return it->second;
}

Rule1D gauss_on_interval(int n, double a, double b) {
    const Rule1D& ref = gauss_legendre(n);
    Rule1D out;
    out.nodes.resize(n);
    out.weights.resize(n);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int i = 0; i < n; ++i) {
        out.nodes[i] = mid + half * ref.nodes[i];
        out.weights[i] = half * ref.weights[i];
    }
    return out;
}

Rule1D gauss_weighted_segment(int n, double mu, double len) {
    // t = len*(1+x)/2  maps the weight (1+x)^mu to t^mu with the Jacobian
    // absorbed: int_0^len t^mu g dt = (len/2)^{mu+1} int (1+x)^mu g dx.
    const Rule1D& ref = gauss_jacobi(n, mu);
    Rule1D out;
    out.nodes.resize(n);
    out.weights.resize(n);
    const double scale = std::pow(0.5 * len, mu + 1.0);
    for (int i = 0; i < n; ++i) {
        out.nodes[i] = 0.5 * len * (1.0 + ref.nodes[i]);
        out.weights[i] = scale * ref.weights[i];
    }
    return out;
}

const TriRule& triangle_rule(int degree) {
    static std::map<int, TriRule> cache;
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto it = cache.find(degree);
    if (it != cache.end()) return it->second;

    TriRule r;
    auto sym3 = [&](double l, double w) {
        r.points.push_back({l, l, 1.0 - 2.0 * l, w});
        r.points.push_back({l, 1.0 - 2.0 * l, l, w});
        r.points.push_back({1.0 - 2.0 * l, l, l, w});
    };
    switch (degree) {
        case 1:
            r.points.push_back({1.0 / 3, 1.0 / 3, 1.0 / 3, 1.0});
            break;
        case 2:
            sym3(1.0 / 6.0, 1.0 / 3.0);
            break;
        case 3:
        case 4:
            // Dunavant degree-4, 6 points, all weights positive
            sym3(0.445948490915965, 0.223381589678011);
            sym3(0.091576213509771, 0.109951743655322);
            break;
        default: {
            // Dunavant degree-5, 7 points
            r.points.push_back({1.0 / 3, 1.0 / 3, 1.0 / 3, 0.225});
            sym3(0.470142064105115, 0.132394152788506);
            sym3(0.101286507323456, 0.125939180544827);
            break;
        }
    }
    return cache.emplace(degree, std::move(r)).first->second;
}

namespace {

double adapt_rec(const std::function<double(double)>& f, double a, double b, double whole,
                 double tol, int depth) {
    const double m = 0.5 * (a + b);
    auto gauss = [&](double lo, double hi) {
        const Rule1D& g = gauss_legendre(7);
        const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        double s = 0.0;
        for (size_t i = 0; i < g.nodes.size(); ++i) s += g.weights[i] * f(mid + half * g.nodes[i]);
        return half * s;
    };
    const double left = gauss(a, m), right = gauss(m, b);
    const double err = std::abs(left + right - whole);
    if (depth <= 0 || err <= tol * std::max(1.0, std::abs(left + right))) return left + right;
    return adapt_rec(f, a, m, left, 0.5 * tol, depth - 1) +
           adapt_rec(f, m, b, right, 0.5 * tol, depth - 1);
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double tol,
                          int max_depth) {
    if (a == b) return 0.0;
    const Rule1D& g = gauss_legendre(7);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double whole = 0.0;
    for (size_t i = 0; i < g.nodes.size(); ++i) whole += g.weights[i] * f(mid + half * g.nodes[i]);
    whole *= half;
    return adapt_rec(f, a, b, whole, tol, max_depth);
}

}  // namespace nlac
