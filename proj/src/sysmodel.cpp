#include "freqid/sysmodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace freqid {

namespace {

std::vector<double> trimmed(const std::vector<double> &c) {
    std::vector<double> out = c;
    while (out.size() > 1 && out.back() == 0.0)
        out.pop_back();
    return out;
}

cplx horner(const std::vector<double> &c, cplx z) {
    cplx acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it)
        acc = acc * z + *it;
    return acc;
}

double coeff_scale(const std::vector<double> &c) {
    double s = 0.0;
    for (double v : c)
        s = std::max(s, std::abs(v));
    return s;
}

} // namespace

void TransferFunction::validate() const {
    if (den.empty() || den.front() == 0.0)
        throw Error(ErrorCode::InvalidParams,
                    "denominator must have a nonzero constant coefficient");
    if (num.empty())
        throw Error(ErrorCode::InvalidParams, "numerator is empty");
    for (double v : num)
        if (!std::isfinite(v))
            throw Error(ErrorCode::InvalidParams, "non-finite numerator coefficient");
    for (double v : den)
        if (!std::isfinite(v))
            throw Error(ErrorCode::InvalidParams, "non-finite denominator coefficient");
}

void StateSpace::validate() const {
    const auto n = A.rows();
    if (A.cols() != n || B.size() != n || C.size() != n)
        throw Error(ErrorCode::DimensionMismatch, "state-space dimensions disagree");
}

FrequencyGrid::FrequencyGrid(std::vector<double> thetas, double margin)
    : thetas_(std::move(thetas)), margin_(margin) {
    if (thetas_.empty())
        throw Error(ErrorCode::EmptyGrid, "grid has no points");
    for (std::size_t i = 0; i < thetas_.size(); ++i) {
        const double t = thetas_[i];
        if (!(t > 0.0 && t < pi))
            throw Error(ErrorCode::InvalidRange, "grid angles must lie in (0, pi)");
        if (i > 0 && !(t > thetas_[i - 1]))
            throw Error(ErrorCode::InvalidRange, "grid angles must be strictly increasing");
    }
    points_.resize(static_cast<Eigen::Index>(thetas_.size()));
    for (std::size_t i = 0; i < thetas_.size(); ++i)
        points_[static_cast<Eigen::Index>(i)] = std::polar(1.0, thetas_[i]);
}

FrequencyGrid FrequencyGrid::reflected() const {
    std::vector<double> t(thetas_.size());
    std::transform(thetas_.rbegin(), thetas_.rend(), t.begin(),
                   [](double th) { return pi - th; });
    return FrequencyGrid(std::move(t), margin_);
}

cplx eval_tf(const TransferFunction &tf, cplx z) {
    tf.validate();
    const cplx d = horner(tf.den, z);
    const double scale = coeff_scale(tf.den) * std::max(1.0, std::pow(std::abs(z), double(tf.den.size() - 1)));
    if (std::abs(d) <= 64.0 * std::numeric_limits<double>::epsilon() * scale) {
        std::ostringstream os;
        os << "denominator vanishes at z = " << z;
        throw Error(ErrorCode::PoleAtPoint, os.str());
    }
    return horner(tf.num, z) / d;
}

cplx eval_ss(const StateSpace &ss, cplx z) {
    ss.validate();
    const auto n = ss.A.rows();
    if (n == 0)
        return ss.D;
    if (z == cplx(0.0))
        throw Error(ErrorCode::SingularResolvent, "z = 0 has no finite reciprocal");
    Eigen::MatrixXcd R = -ss.A.cast<cplx>();
    R.diagonal().array() += 1.0 / z;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(R);
    const double rc = lu.rcond();
    if (!(rc > 1e3 * std::numeric_limits<double>::epsilon())) {
        std::ostringstream os;
        os << "z^-1 I - A is singular at z = " << z;
        throw Error(ErrorCode::SingularResolvent, os.str());
    }
    const Eigen::VectorXcd x = lu.solve(ss.B.cast<cplx>());
    return (ss.C.cast<cplx>() * x)(0) + ss.D;
}

cplx eval_model(const Model &m, cplx z) {
    return std::visit(
        [z](const auto &sys) -> cplx {
            if constexpr (std::is_same_v<std::decay_t<decltype(sys)>, TransferFunction>)
                return eval_tf(sys, z);
            else
                return eval_ss(sys, z);
        },
        m);
}

Eigen::VectorXcd responses(const Model &m, const FrequencyGrid &grid) {
    Eigen::VectorXcd w(static_cast<Eigen::Index>(grid.size()));
    for (Eigen::Index r = 0; r < w.size(); ++r)
        w[r] = eval_model(m, grid.points()[r]);
    return w;
}

FrequencyGrid make_uniform_grid(std::size_t M, double delta_m) {
    if (M < 1)
        throw Error(ErrorCode::InvalidParams, "grid needs at least one point");
    if (!(delta_m > 0.0 && delta_m < pi / 2))
        throw Error(ErrorCode::InvalidMargin, "margin must lie in (0, pi/2)");
    std::vector<double> t(M);
    const double span = pi - 2.0 * delta_m;
    for (std::size_t r = 0; r < M; ++r)
        t[r] = delta_m + span * (static_cast<double>(r) + 0.5) / static_cast<double>(M);
    return FrequencyGrid(std::move(t), delta_m);
}

FrequencyGrid make_log_grid(std::size_t M, double theta_min, double theta_max) {
    if (M < 1)
        throw Error(ErrorCode::InvalidParams, "grid needs at least one point");
    if (!(theta_min > 0.0 && theta_min < theta_max && theta_max < pi))
        throw Error(ErrorCode::InvalidRange, "need 0 < theta_min < theta_max < pi");
    if (M == 1)
        return FrequencyGrid({theta_min}, theta_min);
    std::vector<double> t(M);
    const double la = std::log(theta_min), lb = std::log(theta_max);
    for (std::size_t r = 0; r < M; ++r)
        t[r] = std::exp(la + (lb - la) * static_cast<double>(r) / static_cast<double>(M - 1));
    t.front() = theta_min;
    t.back() = theta_max;
    return FrequencyGrid(std::move(t), theta_min);
}

std::vector<cplx> poly_roots(const std::vector<double> &coeffs) {
    const std::vector<double> c = trimmed(coeffs);
    const std::size_t n = c.size() - 1;
    if (n == 0)
        return {};
    // Companion matrix of the monic polynomial.
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                                 static_cast<Eigen::Index>(n));
    for (std::size_t i = 1; i < n; ++i)
        comp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
    for (std::size_t i = 0; i < n; ++i)
        comp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n - 1)) = -c[i] / c[n];
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
    std::vector<cplx> roots(n);
    for (std::size_t i = 0; i < n; ++i)
        roots[i] = es.eigenvalues()[static_cast<Eigen::Index>(i)];
    std::sort(roots.begin(), roots.end(), [](cplx a, cplx b) {
        return std::abs(a) != std::abs(b) ? std::abs(a) < std::abs(b) : std::arg(a) < std::arg(b);
    });
    return roots;
}

std::vector<cplx> poles(const Model &m) {
    if (const auto *tf = std::get_if<TransferFunction>(&m)) {
        tf->validate();
        return poly_roots(tf->den);
    }
    const auto &ss = std::get<StateSpace>(m);
    ss.validate();
    std::vector<cplx> out;
    if (ss.A.rows() == 0)
        return out;
    Eigen::EigenSolver<Eigen::MatrixXd> es(ss.A, false);
    const double tiny = 1e-14 * std::max(1.0, ss.A.norm());
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const cplx lam = es.eigenvalues()[i];
        if (std::abs(lam) > tiny)
            out.push_back(1.0 / lam);
    }
    return out;
}

bool is_stable(const Model &m) {
    for (cplx p : poles(m))
        if (!(std::abs(p) > stability_margin))
            return false;
    return true;
}

namespace {

double peak_gap(const Model &g1, const Model &g2, std::size_t density) {
    if (density < 2)
        throw Error(ErrorCode::InvalidParams, "grid density must be at least 2");
    auto gap = [&](double th) {
        const cplx z = std::polar(1.0, th);
        return std::abs(eval_model(g1, z) - eval_model(g2, z));
    };
    const double h = pi / static_cast<double>(density);
    std::vector<double> vals(density + 1);
    for (std::size_t i = 0; i <= density; ++i)
        vals[i] = gap(h * static_cast<double>(i));
    const double grid_max = *std::max_element(vals.begin(), vals.end());
    double best = grid_max;

    // Golden-section refinement inside the bracket of every grid local maximum
    // that could plausibly hold the supremum.
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    for (std::size_t i = 0; i <= density; ++i) {
        const double left = i > 0 ? vals[i - 1] : -1.0;
        const double right = i < density ? vals[i + 1] : -1.0;
        if (vals[i] < left || vals[i] < right || vals[i] < 0.5 * grid_max)
            continue;
        double a = h * static_cast<double>(i > 0 ? i - 1 : 0);
        double b = h * static_cast<double>(i < density ? i + 1 : density);
        double c = b - phi * (b - a), d = a + phi * (b - a);
        double fc = gap(c), fd = gap(d);
        for (int it = 0; it < 80 && (b - a) > 1e-15; ++it) {
            if (fc > fd) {
                b = d; d = c; fd = fc;
                c = b - phi * (b - a); fc = gap(c);
            } else {
                a = c; c = d; fc = fd;
                d = a + phi * (b - a); fd = gap(d);
            }
        }
        best = std::max({best, fc, fd});
    }
    return best;
}

} // namespace

double hinf_distance(const Model &g1, const Model &g2, std::size_t grid_density) {
    if (!is_stable(g1) || !is_stable(g2))
        throw Error(ErrorCode::UnstableSystem, "a pole lies on or inside the unit circle");
    return peak_gap(g1, g2, grid_density);
}

double circle_peak_distance(const Model &g1, const Model &g2, std::size_t grid_density) {
    return peak_gap(g1, g2, grid_density);
}

std::vector<double> impulse_response(const TransferFunction &tf, std::size_t n_terms) {
    tf.validate();
    if (!is_stable(tf))
        throw Error(ErrorCode::UnstableSystem, "impulse response of an unstable model diverges");
    std::vector<double> g(n_terms, 0.0);
    const double d0 = tf.den.front();
    for (std::size_t t = 0; t < n_terms; ++t) {
        double acc = t < tf.num.size() ? tf.num[t] : 0.0;
        for (std::size_t i = 1; i < tf.den.size() && i <= t; ++i)
            acc -= tf.den[i] * g[t - i];
        g[t] = acc / d0;
    }
    return g;
}

std::size_t mcmillan_degree(const TransferFunction &tf, double tol) {
    tf.validate();
    std::vector<cplx> zn = poly_roots(tf.num);
    std::vector<cplx> zd = poly_roots(tf.den);
    const std::size_t deg_num = trimmed(tf.num).size() - 1;
    const std::size_t deg_den = trimmed(tf.den).size() - 1;
    if (trimmed(tf.num).size() == 1 && tf.num.front() == 0.0)
        return 0;
    std::size_t cancelled = 0;
    std::vector<bool> used(zn.size(), false);
    for (cplx p : zd) {
        for (std::size_t i = 0; i < zn.size(); ++i) {
            if (!used[i] && std::abs(zn[i] - p) <= tol * std::max(1.0, std::abs(p))) {
                used[i] = true;
                ++cancelled;
                break;
            }
        }
    }
    return std::max(deg_num, deg_den) - cancelled;
}

DecayParams decay_params(const TransferFunction &tf, std::size_t n_terms) {
    tf.validate();
    const std::vector<cplx> roots = poly_roots(tf.den);
    for (cplx p : roots)
        if (!(std::abs(p) > stability_margin))
            throw Error(ErrorCode::UnstableSystem, "denominator root on or inside the unit circle");
    DecayParams out;
    out.rho = std::numeric_limits<double>::infinity();
    for (cplx p : roots)
        out.rho = std::min(out.rho, std::abs(p));

    const std::vector<double> g = impulse_response(tf, n_terms);
    constexpr double floor = 1e-12;
    bool any = false;
    double K = 1.0;
    // rho^k is evaluated in log space so that rho = inf (FIR models) and long
    // series stay finite.
    const double log_rho = std::log(out.rho);
    for (std::size_t t = 0; t < n_terms; ++t) {
        if (std::abs(g[t]) <= floor)
            continue;
        any = true;
        for (std::size_t k = 1; t + k < n_terms; ++k) {
            if (g[t + k] == 0.0)
                continue;
            const double v = std::exp(std::log(std::abs(g[t + k] / g[t])) + static_cast<double>(k) * log_rho);
            K = std::max(K, v);
        }
    }
    if (!any)
        throw Error(ErrorCode::DegenerateImpulse, "every impulse coefficient is below the floor");
    out.K = K;
    out.kappa = mcmillan_degree(tf);
    return out;
}

double dc_gain(const TransferFunction &tf) {
    return eval_tf(tf, cplx(1.0)).real();
}

} // namespace freqid
