#include "sdom/barrier.hpp"

#include "sdom/dominance.hpp"
#include "sdom/errors.hpp"
#include "sdom/risk.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace sdom {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double power(double base, double exponent) {
    if (exponent == 0.0) return 1.0;
    if (exponent == 1.0) return base;
    if (exponent == 2.0) return base * base;
    return std::pow(base, exponent);
}

// Hessian of the excess variables u together with their coupling to the core
// variables z. Each u_j enters a barrier term whose argument is linear in
// (u_j, e_j^T z) with curvature coupling_j; rest_j collects the remaining
// diagonal curvature and rho w w^T the curvature of the objective norm.
struct ExcessBlock {
    VectorXd coupling;
    VectorXd rest;
    MatrixXd E;
    double rho = 0.0;
    VectorXd w;
    VectorXd g;

    ExcessBlock(Eigen::Index n, Eigen::Index m)
        : coupling(VectorXd::Zero(n)), rest(VectorXd::Zero(n)), E(MatrixXd::Zero(n, m)), w(VectorXd::Zero(n)),
          g(VectorXd::Zero(n)) {}

    [[nodiscard]] VectorXd diagonal() const { return coupling + rest; }

    [[nodiscard]] VectorXd solve(const VectorXd& rhs) const {
        const VectorXd dinv = diagonal().cwiseInverse();
        VectorXd out = dinv.cwiseProduct(rhs);
        if (rho != 0.0) {
            const VectorXd dw = dinv.cwiseProduct(w);
            out -= (rho * w.dot(out) / (1.0 + rho * w.dot(dw))) * dw;
        }
        return out;
    }

    [[nodiscard]] VectorXd cross(const VectorXd& dz) const { return coupling.cwiseProduct(E * dz); }
    [[nodiscard]] VectorXd cross_transpose(const VectorXd& v) const { return E.transpose() * coupling.cwiseProduct(v); }

    // Core Hessian share minus C^T B^{-1} C, assembled from nonnegative
    // pieces apart from the objective's own rank-one correction.
    [[nodiscard]] MatrixXd reduced() const {
        const VectorXd D = diagonal();
        MatrixXd out = E.transpose() * coupling.cwiseProduct(rest).cwiseQuotient(D).asDiagonal() * E;
        if (rho != 0.0) {
            const VectorXd projected = E.transpose() * coupling.cwiseProduct(w).cwiseQuotient(D);
            out += (rho / (1.0 + rho * w.cwiseAbs2().cwiseQuotient(D).sum())) * projected * projected.transpose();
        }
        return out;
    }
};

// Hessian of one threshold's shortfall/moment pairs (s_j, r_j): a 2x2 block
// per scenario plus the rank-one term of the dominance row, which couples
// every r_j with the elastic variable. s_j couples to the weights through
// the shortfall slack s_j + x'xi_j - t with curvature c_j.
struct PairBlock {
    VectorXd c, bound, base_ss, sr, rr;  // P_ss = base_ss + c; bound is the s >= 0 curvature
    double rho = 0.0;
    VectorXd w;  // dominance row gradient in r
    VectorXd gs, gr;
    const MatrixXd* xi = nullptr;
    Eigen::Index sig = 0;

    explicit PairBlock(Eigen::Index n)
        : c(n), bound(n), base_ss(n), sr(n), rr(n), w(n), gs(n), gr(n), det_core(n), det(n) {}

    // Determinants are built from positive terms so nothing cancels:
    // det_core belongs to the power-cone part alone.
    VectorXd det_core, det;

    [[nodiscard]] double det_without_c(Eigen::Index j) const { return bound[j] * rr[j] + det_core[j]; }

    // Solve (blockdiag(P_j) + rho w w^T) [xs; xr] = [vs; vr].
    void solve(const VectorXd& vs, const VectorXd& vr, VectorXd& xs, VectorXd& xr) const {
        const VectorXd pss = base_ss + c;
        xs = (rr.cwiseProduct(vs) - sr.cwiseProduct(vr)).cwiseQuotient(det);
        xr = (pss.cwiseProduct(vr) - sr.cwiseProduct(vs)).cwiseQuotient(det);
        if (rho != 0.0) {
            const VectorXd ws = -sr.cwiseProduct(w).cwiseQuotient(det);
            const VectorXd wr = pss.cwiseProduct(w).cwiseQuotient(det);
            const double factor = rho * w.dot(xr) / (1.0 + rho * w.dot(wr));
            xs -= factor * ws;
            xr -= factor * wr;
        }
    }

    // C dz split into its s and r parts.
    void cross(const VectorXd& dz, Eigen::Index d, VectorXd& vs, VectorXd& vr) const {
        vs = c.cwiseProduct(xi->transpose() * dz.head(d));
        vr = (rho * dz[sig]) * w;
    }

    [[nodiscard]] VectorXd cross_transpose(const VectorXd& vs, const VectorXd& vr, Eigen::Index m, Eigen::Index d) const {
        VectorXd out = VectorXd::Zero(m);
        out.head(d) = *xi * c.cwiseProduct(vs);
        out[sig] = rho * w.dot(vr);
        return out;
    }

    [[nodiscard]] MatrixXd reduced(Eigen::Index m, Eigen::Index d) const {
        MatrixXd out = MatrixXd::Zero(m, m);
        VectorXd weight(c.size());
        for (Eigen::Index j = 0; j < c.size(); ++j) weight[j] = c[j] * det_without_c(j) / det[j];
        out.topLeftCorner(d, d) = *xi * weight.asDiagonal() * xi->transpose();
        if (rho != 0.0) {
            const VectorXd pss = base_ss + c;
            const VectorXd ws = -sr.cwiseProduct(w).cwiseQuotient(det);
            const VectorXd wr = pss.cwiseProduct(w).cwiseQuotient(det);
            VectorXd projected = VectorXd::Zero(m);
            projected[sig] = 1.0;
            projected.head(d) = -(*xi * c.cwiseProduct(ws));
            out += (rho / (1.0 + rho * w.dot(wr))) * projected * projected.transpose();
        }
        return out;
    }
};

struct Direction {
    VectorXd core;
    VectorXd excess;
    std::vector<VectorXd> shortfall;
    std::vector<VectorXd> moment;
    double decrement2 = 0.0;  // lambda^2
    double regularization = 0.0;
    bool ok = false;
};

// Barrier arguments in a fixed order: x, elastic, mean, [excess u, excess
// slack], then per threshold: shortfall s, shortfall slack, cone slack
// r^(1/k) - s, moment r, dominance row.
class BarrierModel {
public:
    BarrierModel(const RefineProblem& problem, std::span<const double> thresholds, double elastic_weight)
        : xi_(problem.scenarios.returns()),
          d_(xi_.rows()),
          n_(xi_.cols()),
          thresholds_(thresholds.begin(), thresholds.end()),
          k_(problem.order.moment()),
          theta_(1.0 / k_),
          elastic_weight_(elastic_weight),
          risk_(problem.risk),
          has_q_(has_risk_parameter(problem)) {
        const auto& p = problem.scenarios.scenario_probabilities();
        pi_ = Eigen::Map<const VectorXd>(p.data(), n_);
        xibar_ = xi_ * pi_;
        benchmark_mean_ = mean(problem.benchmark);
        for (double t : thresholds_) rhs_.push_back(lower_partial_moment(problem.benchmark, t, k_));
        sgn_ = risk_.loss_sign == LossSign::negate_returns ? -1.0 : 1.0;
        const bool min_risk = problem.objective == Objective::min_risk;
        linear_objective_ = min_risk ? VectorXd(sgn_ * xibar_) : VectorXd(-xibar_);
    }

    [[nodiscard]] Eigen::Index core_size() const { return d_ + (has_q_ ? 1 : 0) + 1; }
    [[nodiscard]] Eigen::Index q_index() const { return d_; }
    [[nodiscard]] Eigen::Index elastic_index() const { return d_ + (has_q_ ? 1 : 0); }
    [[nodiscard]] bool has_q() const { return has_q_; }

    [[nodiscard]] Eigen::Index excess_offset() const { return d_ + 2; }
    [[nodiscard]] Eigen::Index threshold_offset(std::size_t tau) const {
        return d_ + 2 + (has_q_ ? 2 * n_ : 0) + static_cast<Eigen::Index>(tau) * (4 * n_ + 1);
    }
    [[nodiscard]] Eigen::Index constraint_count() const { return threshold_offset(thresholds_.size()); }

    [[nodiscard]] BarrierPoint initial_point(const VectorXd& x_start, double mu) const {
        BarrierPoint z;
        const double eps = 1e-2;
        z.x = (1.0 - eps) * x_start + VectorXd::Constant(d_, eps / static_cast<double>(d_));
        z.x /= z.x.sum();
        z.mu = mu;
        const VectorXd y = xi_.transpose() * z.x;
        const double delta = 1e-2 * std::max(xi_.cwiseAbs().maxCoeff(), 1e-8);

        if (has_q_) {
            const DiscreteRandomVariable port(std::span(y.data(), static_cast<std::size_t>(n_)),
                                              std::span(pi_.data(), static_cast<std::size_t>(n_)));
            z.q = higher_order_risk(port, risk_).q_star;
            z.excess.resize(n_);
            for (Eigen::Index j = 0; j < n_; ++j) z.excess[j] = std::max(sgn_ * y[j] - z.q, 0.0) + delta;
        }

        double violation = std::max(0.0, benchmark_mean_ - xibar_.dot(z.x));
        for (std::size_t tau = 0; tau < thresholds_.size(); ++tau) {
            VectorXd s(n_);
            VectorXd r(n_);
            for (Eigen::Index j = 0; j < n_; ++j) {
                s[j] = std::max(thresholds_[tau] - y[j], 0.0) + delta;
                r[j] = power(s[j] + delta, k_);
            }
            violation = std::max(violation, pi_.dot(r) - rhs_[tau]);
            z.shortfall.push_back(std::move(s));
            z.moment.push_back(std::move(r));
        }
        z.elastic = 1.5 * violation + 1e-6;
        return z;
    }

    [[nodiscard]] double mean_slack(const BarrierPoint& z) const {
        return xibar_.dot(z.x) - benchmark_mean_ + z.elastic;
    }

    [[nodiscard]] VectorXd slacks(const BarrierPoint& z) const {
        VectorXd g(constraint_count());
        const VectorXd y = xi_.transpose() * z.x;
        g.head(d_) = z.x;
        g[d_] = z.elastic;
        g[d_ + 1] = mean_slack(z);
        if (has_q_) {
            const Eigen::Index o = excess_offset();
            for (Eigen::Index j = 0; j < n_; ++j) {
                g[o + j] = z.excess[j];
                g[o + n_ + j] = z.excess[j] - sgn_ * y[j] + z.q;
            }
        }
        for (std::size_t tau = 0; tau < thresholds_.size(); ++tau) {
            const Eigen::Index o = threshold_offset(tau);
            const VectorXd& s = z.shortfall[tau];
            const VectorXd& r = z.moment[tau];
            for (Eigen::Index j = 0; j < n_; ++j) {
                g[o + j] = s[j];
                g[o + n_ + j] = s[j] + y[j] - thresholds_[tau];
                g[o + 2 * n_ + j] = r[j] > 0.0 ? power(r[j], theta_) - s[j] : -1.0;
                g[o + 3 * n_ + j] = r[j];
            }
            g[o + 4 * n_] = rhs_[tau] + z.elastic - pi_.dot(r);
        }
        return g;
    }

    // Directional derivative of every barrier argument along `dir`.
    [[nodiscard]] VectorXd slack_derivative(const BarrierPoint& z, const Direction& dir) const {
        VectorXd dg(constraint_count());
        const VectorXd dx = dir.core.head(d_);
        const double dsig = dir.core[elastic_index()];
        const VectorXd dy = xi_.transpose() * dx;
        dg.head(d_) = dx;
        dg[d_] = dsig;
        dg[d_ + 1] = xibar_.dot(dx) + dsig;
        if (has_q_) {
            const Eigen::Index o = excess_offset();
            const double dq = dir.core[q_index()];
            for (Eigen::Index j = 0; j < n_; ++j) {
                dg[o + j] = dir.excess[j];
                dg[o + n_ + j] = dir.excess[j] - sgn_ * dy[j] + dq;
            }
        }
        for (std::size_t tau = 0; tau < thresholds_.size(); ++tau) {
            const Eigen::Index o = threshold_offset(tau);
            const VectorXd& r = z.moment[tau];
            const VectorXd& ds = dir.shortfall[tau];
            const VectorXd& dr = dir.moment[tau];
            for (Eigen::Index j = 0; j < n_; ++j) {
                dg[o + j] = ds[j];
                dg[o + n_ + j] = ds[j] + dy[j];
                dg[o + 2 * n_ + j] = theta_ * power(r[j], theta_ - 1.0) * dr[j] - ds[j];
                dg[o + 3 * n_ + j] = dr[j];
            }
            dg[o + 4 * n_] = dsig - pi_.dot(dr);
        }
        return dg;
    }

    [[nodiscard]] bool interior(const BarrierPoint& z) const {
        const VectorXd g = slacks(z);
        return g.allFinite() && (g.array() > 0.0).all();
    }

    [[nodiscard]] double objective(const BarrierPoint& z) const {
        double f = elastic_weight_ * z.elastic;
        if (has_q_) {
            f += z.q + excess_norm(z.excess) / (1.0 - risk_.beta);
        } else {
            f += linear_objective_.dot(z.x);
        }
        return f;
    }

    [[nodiscard]] Direction direction(const BarrierPoint& z, double mu) const {
        const Eigen::Index m = core_size();
        const Eigen::Index sig = elastic_index();
        VectorXd gc = VectorXd::Zero(m);
        MatrixXd S = MatrixXd::Zero(m, m);
        const VectorXd y = xi_.transpose() * z.x;
        // Curvature weight lambda_i g_i / mu of each barrier term; 1 on the
        // central path.
        const auto nu = [&](Eigen::Index i, double g) { return z.dual[i] * g / mu; };

        if (has_q_) {
            gc[q_index()] += 1.0 / mu;
        } else {
            gc.head(d_) += linear_objective_ / mu;
        }
        gc[sig] += elastic_weight_ / mu;

        for (Eigen::Index i = 0; i < d_; ++i) {
            gc[i] -= 1.0 / z.x[i];
            S(i, i) += nu(i, z.x[i]) / (z.x[i] * z.x[i]);
        }
        gc[sig] -= 1.0 / z.elastic;
        S(sig, sig) += nu(d_, z.elastic) / (z.elastic * z.elastic);
        {
            VectorXd e = VectorXd::Zero(m);
            e.head(d_) = xibar_;
            e[sig] = 1.0;
            const double c = mean_slack(z);
            gc -= e / c;
            S += (nu(d_ + 1, c) / (c * c)) * e * e.transpose();
        }

        std::optional<ExcessBlock> excess;
        if (has_q_) {
            const Eigen::Index qi = q_index();
            ExcessBlock b(n_, m);
            const double scale = 1.0 / ((1.0 - risk_.beta) * mu);
            const VectorXd& u = z.excess;
            if (risk_.r == 1.0) {
                b.g += scale * pi_;
            } else {
                const double r = risk_.r;
                const VectorXd v = pi_.cwiseProduct(u.array().pow(r - 1.0).matrix());
                const double norm = excess_norm(u);
                b.g += scale * std::pow(norm, 1.0 - r) * v;
                b.rest += scale * (r - 1.0) * std::pow(norm, 1.0 - r) *
                          pi_.cwiseProduct(u.array().pow(r - 2.0).matrix());
                b.rho = -scale * (r - 1.0) * std::pow(norm, 1.0 - 2.0 * r);
                b.w = v;
            }
            const Eigen::Index o = excess_offset();
            for (Eigen::Index j = 0; j < n_; ++j) {
                const double a = u[j] - sgn_ * y[j] + z.q;
                b.g[j] -= 1.0 / u[j] + 1.0 / a;
                b.coupling[j] = nu(o + n_ + j, a) / (a * a);
                b.rest[j] += nu(o + j, u[j]) / (u[j] * u[j]);
                b.E.row(j).head(d_) = -sgn_ * xi_.col(j).transpose();
                b.E(j, qi) = 1.0;
                gc.head(d_) += (sgn_ / a) * xi_.col(j);
                gc[qi] -= 1.0 / a;
            }
            S += b.reduced();
            excess = std::move(b);
        }

        std::vector<PairBlock> pairs;
        const double theta = theta_;
        for (std::size_t tau = 0; tau < thresholds_.size(); ++tau) {
            const VectorXd& s = z.shortfall[tau];
            const VectorXd& r = z.moment[tau];
            const double t = thresholds_[tau];
            const Eigen::Index o = threshold_offset(tau);
            const double h = rhs_[tau] + z.elastic - pi_.dot(r);
            PairBlock b(n_);
            b.xi = &xi_;
            b.sig = sig;
            for (Eigen::Index j = 0; j < n_; ++j) {
                const double slack = s[j] + y[j] - t;
                const double rt1 = theta * power(r[j], theta - 1.0);
                const double cone = power(r[j], theta) - s[j];
                const double n_s = nu(o + j, s[j]);
                const double n_b = nu(o + n_ + j, slack);
                const double n_c = nu(o + 2 * n_ + j, cone);
                const double n_r = nu(o + 3 * n_ + j, r[j]);
                const double concave = theta * (1.0 - theta) * power(r[j], theta - 2.0) / cone;

                b.gs[j] = -1.0 / s[j] - 1.0 / slack + 1.0 / cone;
                b.gr[j] = -rt1 / cone - 1.0 / r[j] + pi_[j] / h;
                gc.head(d_) -= xi_.col(j) / slack;

                b.c[j] = n_b / (slack * slack);
                b.bound[j] = n_s / (s[j] * s[j]);
                b.base_ss[j] = b.bound[j] + n_c / (cone * cone);
                b.sr[j] = -n_c * rt1 / (cone * cone);
                b.rr[j] = n_c * rt1 * rt1 / (cone * cone) + n_c * concave + n_r / (r[j] * r[j]);
                b.det_core[j] = (n_c / (cone * cone)) * (n_c * concave + n_r / (r[j] * r[j]));
                b.det[j] = b.det_without_c(j) + b.c[j] * b.rr[j];
                b.w[j] = -pi_[j];
            }
            b.rho = nu(o + 4 * n_, h) / (h * h);
            gc[sig] -= 1.0 / h;
            S += b.reduced(m, d_);
            pairs.push_back(std::move(b));
        }

        VectorXd rhs = -gc;
        if (excess) rhs += excess->cross_transpose(excess->solve(excess->g));
        for (const PairBlock& b : pairs) {
            VectorXd xs, xr;
            b.solve(b.gs, b.gr, xs, xr);
            rhs += b.cross_transpose(xs, xr, m, d_);
        }

        // Null space of sum(dx) = 0.
        MatrixXd Z = MatrixXd::Zero(m, m - 1);
        for (Eigen::Index i = 0; i + 1 < d_; ++i) {
            Z(i, i) = 1.0;
            Z(d_ - 1, i) = -1.0;
        }
        for (Eigen::Index i = d_; i < m; ++i) Z(i, i - 1) = 1.0;

        MatrixXd R = Z.transpose() * S * Z;
        R = 0.5 * (R + R.transpose());
        const VectorXd rr = Z.transpose() * rhs;
        const double diag_scale = std::max(1.0, R.diagonal().cwiseAbs().maxCoeff());

        Direction dir;
        for (double shift = 0.0; shift <= 1e-2; shift = shift == 0.0 ? 1e-10 : shift * 10.0) {
            MatrixXd Rs = R;
            Rs.diagonal().array() += shift * diag_scale;
            Eigen::LLT<MatrixXd> llt(Rs);
            if (llt.info() != Eigen::Success) continue;
            const VectorXd yv = llt.solve(rr);
            if (!yv.allFinite()) continue;
            dir.core = Z * yv;
            dir.regularization = shift;
            dir.ok = true;
            break;
        }
        if (!dir.ok) return dir;

        double dec = -gc.dot(dir.core);
        if (excess) {
            dir.excess = -excess->solve(excess->g + excess->cross(dir.core));
            dec -= excess->g.dot(dir.excess);
        }
        for (const PairBlock& b : pairs) {
            VectorXd vs, vr, xs, xr;
            b.cross(dir.core, d_, vs, vr);
            b.solve(b.gs + vs, b.gr + vr, xs, xr);
            xs = -xs;
            xr = -xr;
            dec -= b.gs.dot(xs) + b.gr.dot(xr);
            dir.shortfall.push_back(std::move(xs));
            dir.moment.push_back(std::move(xr));
        }
        dir.decrement2 = std::abs(dec);
        if (!std::isfinite(dir.decrement2)) dir.ok = false;
        return dir;
    }

    [[nodiscard]] BarrierPoint advance(const BarrierPoint& z, const Direction& dir, double alpha) const {
        BarrierPoint next = z;
        next.x += alpha * dir.core.head(d_);
        if (has_q_) {
            next.q += alpha * dir.core[q_index()];
            next.excess += alpha * dir.excess;
        }
        next.elastic += alpha * dir.core[elastic_index()];
        for (std::size_t tau = 0; tau < thresholds_.size(); ++tau) {
            next.shortfall[tau] += alpha * dir.shortfall[tau];
            next.moment[tau] += alpha * dir.moment[tau];
        }
        return next;
    }

    // Largest step keeping every linearized barrier argument positive; the
    // cone slacks are concave in r, so the line search rechecks them.
    [[nodiscard]] double max_step(const BarrierPoint& z, const Direction& dir) const {
        const VectorXd g = slacks(z);
        const VectorXd dg = slack_derivative(z, dir);
        double alpha = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < g.size(); ++i) {
            if (dg[i] < 0.0) alpha = std::min(alpha, -g[i] / dg[i]);
        }
        return alpha;
    }

    // Change of the primal-dual merit
    //   M = f / mu + sum_i (-2 log g_i + lambda_i g_i / mu - log lambda_i),
    // whose minimizer over lambda is mu / g, where it reduces to the barrier
    // function; +inf outside the interior.
    [[nodiscard]] double merit_change(const BarrierPoint& z, const BarrierPoint& next, double mu) const {
        const VectorXd g1 = slacks(next);
        if (!g1.allFinite() || !(g1.array() > 0.0).all() || !(next.dual.array() > 0.0).all()) {
            return std::numeric_limits<double>::infinity();
        }
        const VectorXd g0 = slacks(z);
        const double objective_change = objective(next) - objective(z);
        const double logs = -2.0 * g1.cwiseQuotient(g0).array().log().sum() -
                            next.dual.cwiseQuotient(z.dual).array().log().sum();
        const double products = (next.dual.cwiseProduct(g1) - z.dual.cwiseProduct(g0)).sum();
        return (objective_change + products) / mu + logs;
    }

    // Directional derivative of the merit along (dir, dl).
    [[nodiscard]] double merit_slope(const BarrierPoint& z, const Direction& dir, const VectorXd& dl, double mu) const {
        const VectorXd g = slacks(z);
        const VectorXd dg = slack_derivative(z, dir);
        const Direction grad = lagrangian_gradient(z, VectorXd::Zero(g.size()));
        double df = grad.core.dot(dir.core);
        if (has_q_) df += grad.excess.dot(dir.excess);
        const double primal = (z.dual / mu - 2.0 * g.cwiseInverse()).dot(dg);
        const double dual = (g / mu - z.dual.cwiseInverse()).dot(dl);
        return df / mu + primal + dual;
    }

    // Objective gradient plus J^T v for constraint weights v, laid out like a
    // direction. With v = -lambda this is the Lagrangian gradient.
    [[nodiscard]] Direction lagrangian_gradient(const BarrierPoint& z, const VectorXd& v) const {
        Direction out;
        const Eigen::Index m = core_size();
        const Eigen::Index sig = elastic_index();
        out.core = VectorXd::Zero(m);
        out.core[sig] = elastic_weight_;
        if (has_q_) {
            out.core[q_index()] = 1.0;
            const double scale = 1.0 / (1.0 - risk_.beta);
            if (risk_.r == 1.0) {
                out.excess = scale * pi_;
            } else {
                const double r = risk_.r;
                out.excess = scale * std::pow(excess_norm(z.excess), 1.0 - r) *
                             pi_.cwiseProduct(z.excess.array().pow(r - 1.0).matrix());
            }
        } else {
            out.core.head(d_) = linear_objective_;
        }
        out.core.head(d_) += v.head(d_) + v[d_ + 1] * xibar_;
        out.core[sig] += v[d_] + v[d_ + 1];
        if (has_q_) {
            const Eigen::Index o = excess_offset();
            for (Eigen::Index j = 0; j < n_; ++j) {
                out.excess[j] += v[o + j] + v[o + n_ + j];
                out.core.head(d_) -= (sgn_ * v[o + n_ + j]) * xi_.col(j);
                out.core[q_index()] += v[o + n_ + j];
            }
        }
        for (std::size_t tau = 0; tau < thresholds_.size(); ++tau) {
            const Eigen::Index o = threshold_offset(tau);
            const VectorXd& r = z.moment[tau];
            const double vh = v[o + 4 * n_];
            VectorXd ds(n_);
            VectorXd dr(n_);
            for (Eigen::Index j = 0; j < n_; ++j) {
                const double vc = v[o + 2 * n_ + j];
                ds[j] = v[o + j] + v[o + n_ + j] - vc;
                dr[j] = vc * theta_ * power(r[j], theta_ - 1.0) + v[o + 3 * n_ + j] - vh * pi_[j];
                out.core.head(d_) += v[o + n_ + j] * xi_.col(j);
            }
            out.core[sig] += vh;
            out.shortfall.push_back(std::move(ds));
            out.moment.push_back(std::move(dr));
        }
        return out;
    }

    // Perturbed first-order conditions at barrier weight mu: the Lagrangian
    // gradient projected on sum(dx) = 0, then lambda_i g_i - mu.
    [[nodiscard]] VectorXd kkt_vector(const BarrierPoint& z, double mu) const {
        const VectorXd g = slacks(z);
        const Direction grad = lagrangian_gradient(z, -z.dual);
        const Eigen::Index stat = stationarity_size();
        VectorXd out(stat + g.size());
        out.head(core_size()) = grad.core;
        out.head(d_).array() -= grad.core.head(d_).mean();
        Eigen::Index o = core_size();
        if (has_q_) {
            out.segment(o, n_) = grad.excess;
            o += n_;
        }
        for (std::size_t tau = 0; tau < thresholds_.size(); ++tau) {
            out.segment(o, n_) = grad.shortfall[tau];
            out.segment(o + n_, n_) = grad.moment[tau];
            o += 2 * n_;
        }
        out.tail(g.size()) = z.dual.cwiseProduct(g).array() - mu;
        return out;
    }

    [[nodiscard]] Eigen::Index stationarity_size() const {
        return core_size() + (has_q_ ? n_ : 0) + static_cast<Eigen::Index>(thresholds_.size()) * 2 * n_;
    }

    // Infinity norm of kkt_vector; stationarity is scaled down by the mean
    // multiplier size beyond 100.
    [[nodiscard]] double kkt_residual(const BarrierPoint& z, double mu) const {
        const VectorXd r = kkt_vector(z, mu);
        const Eigen::Index stat = stationarity_size();
        constexpr double kScaleFloor = 100.0;
        const double scale = std::max(kScaleFloor, z.dual.cwiseAbs().mean()) / kScaleFloor;
        return std::max(r.head(stat).cwiseAbs().maxCoeff() / scale, r.tail(r.size() - stat).cwiseAbs().maxCoeff());
    }

    // Barrier weight at which multipliers mu / g balance the elastic penalty.
    [[nodiscard]] double centering_weight(const BarrierPoint& z) const {
        const VectorXd g = slacks(z);
        double inv = 1.0 / g[d_] + 1.0 / g[d_ + 1];
        for (std::size_t tau = 0; tau < thresholds_.size(); ++tau) inv += 1.0 / g[threshold_offset(tau) + 4 * n_];
        return elastic_weight_ / inv;
    }

private:
    [[nodiscard]] double excess_norm(const VectorXd& u) const {
        if (risk_.r == 1.0) return pi_.dot(u);
        return std::pow(pi_.dot(u.array().pow(risk_.r).matrix()), 1.0 / risk_.r);
    }

    const MatrixXd& xi_;
    Eigen::Index d_;
    Eigen::Index n_;
    std::vector<double> thresholds_;
    std::vector<double> rhs_;
    double k_;
    double theta_;
    double elastic_weight_;
    RiskSpec risk_;
    bool has_q_;
    double sgn_ = -1.0;
    VectorXd pi_;
    VectorXd xibar_;
    VectorXd linear_objective_;
    double benchmark_mean_ = 0.0;
};

void check_problem(const RefineProblem& problem, std::span<const double> thresholds) {
    if (problem.order.value() < 2.0) {
        throw DomainError(fmt::format("optimization requires stochastic order >= 2, got {}", problem.order.value()));
    }
    if (thresholds.empty()) throw DomainError("threshold set must not be empty");
    for (double t : thresholds) {
        if (!std::isfinite(t)) throw DomainError("thresholds must be finite");
    }
    if (problem.objective == Objective::min_risk) problem.risk.validate();
}

// Newton step of the multipliers matching a primal direction.
VectorXd dual_direction(const BarrierModel& model, const BarrierPoint& z, const Direction& dir, double mu) {
    const VectorXd g = model.slacks(z);
    const VectorXd dg = model.slack_derivative(z, dir);
    return (mu - z.dual.cwiseProduct(dg).array()).matrix().cwiseQuotient(g) - z.dual;
}

// Keeps every multiplier within a bounded ratio of the primal estimate mu / g.
void safeguard_dual(const BarrierModel& model, BarrierPoint& z, double mu) {
    constexpr double kRatioBound = 1e10;
    const VectorXd g = model.slacks(z);
    for (Eigen::Index i = 0; i < g.size(); ++i) {
        const double primal = mu / g[i];
        z.dual[i] = std::clamp(z.dual[i], primal / kRatioBound, primal * kRatioBound);
    }
}

NewtonResult run_levels(const BarrierModel& model, BarrierPoint z, const SolverConfig& cfg) {
    NewtonResult result{PortfolioWeights::equal(static_cast<std::size_t>(z.x.size())), std::nullopt, {}, 0.0, false,
                        0, 0, 0.0};
    double mu = z.mu;
    if (z.dual.size() != model.constraint_count()) {
        // Cold start: begin where the multipliers mu / g balance the elastic
        // penalty, so the first iterate is roughly centered.
        mu = std::max(mu, model.centering_weight(z));
        z.dual = mu * model.slacks(z).cwiseInverse();
    }
    constexpr double kLevelTolerance = 0.1;
    bool level_converged = false;
    double residual = std::numeric_limits<double>::infinity();
    while (true) {
        z.mu = mu;
        const bool last_level = mu <= cfg.barrier_end * (1.0 + 1e-9);
        const double tol = last_level ? cfg.newton_tol : std::max(cfg.newton_tol, kLevelTolerance * mu);
        level_converged = false;
        for (int it = 0;; ++it) {
            residual = model.kkt_residual(z, mu);
            if (residual <= tol) {
                level_converged = true;
                break;
            }
            if (it == cfg.newton_max_iter) break;
            const Direction dir = model.direction(z, mu);
            if (!dir.ok) break;
            result.max_regularization = std::max(result.max_regularization, dir.regularization);
            const VectorXd dl = dual_direction(model, z, dir, mu);
            double alpha = std::min(1.0, 0.99 * model.max_step(z, dir));
            for (Eigen::Index i = 0; i < dl.size(); ++i) {
                if (dl[i] < 0.0) alpha = std::min(alpha, -0.99 * z.dual[i] / dl[i]);
            }
            const double slope = model.merit_slope(z, dir, dl, mu);
            BarrierPoint next;
            bool accepted = false;
            for (int halving = 0; halving < 60 && !accepted; ++halving, alpha *= 0.5) {
                next = model.advance(z, dir, alpha);
                next.dual = z.dual + alpha * dl;
                // Residual halving also counts: near the optimum the merit
                // decrease drops below rounding noise.
                accepted = model.merit_change(z, next, mu) <= 1e-4 * alpha * slope ||
                           (model.interior(next) && model.kkt_residual(next, mu) <= 0.5 * residual);
            }
            if (!accepted) break;
            safeguard_dual(model, next, mu);
            z = std::move(next);
            ++result.iterations;
        }
        ++result.barrier_levels;
        if (last_level) break;
        mu = std::max(mu / cfg.barrier_factor, cfg.barrier_end);
    }

    result.converged = level_converged;
    result.kkt_residual = residual;

    std::vector<double> x(z.x.data(), z.x.data() + z.x.size());
    double total = 0.0;
    for (double& xi : x) {
        xi = std::max(xi, 0.0);
        total += xi;
    }
    for (double& xi : x) xi /= total;
    result.weights = PortfolioWeights(std::move(x));
    if (model.has_q()) result.q = z.q;
    result.point = std::move(z);
    return result;
}

} // namespace

bool has_risk_parameter(const RefineProblem& problem) {
    return problem.objective == Objective::min_risk && problem.risk.beta > 0.0;
}

NewtonResult newton_refine(const RefineProblem& problem, const PortfolioWeights& start,
                           std::span<const double> thresholds, const SolverConfig& cfg) {
    cfg.validate();
    check_problem(problem, thresholds);
    if (start.size() != problem.scenarios.assets()) {
        throw DimensionError(fmt::format("start has {} weights but scenario set has {} assets", start.size(),
                                         problem.scenarios.assets()));
    }
    const BarrierModel model(problem, thresholds, cfg.elastic_weight);
    return run_levels(model, model.initial_point(start.as_vector(), cfg.barrier_start), cfg);
}

NewtonResult newton_refine(const RefineProblem& problem, const BarrierPoint& warm, std::span<const double> thresholds,
                           const SolverConfig& cfg) {
    cfg.validate();
    check_problem(problem, thresholds);
    const BarrierModel model(problem, thresholds, cfg.elastic_weight);
    if (warm.x.size() != static_cast<Eigen::Index>(problem.scenarios.assets()) ||
        warm.shortfall.size() != thresholds.size() || warm.moment.size() != thresholds.size() ||
        !model.interior(warm) || !(warm.mu > 0.0)) {
        throw DomainError("warm start is not a strictly interior iterate of this problem");
    }
    return run_levels(model, warm, cfg);
}

double barrier_kkt_residual(const RefineProblem& problem, std::span<const double> thresholds, const BarrierPoint& point,
                            const SolverConfig& cfg) {
    check_problem(problem, thresholds);
    const BarrierModel model(problem, thresholds, cfg.elastic_weight);
    if (!model.interior(point)) return std::numeric_limits<double>::infinity();
    BarrierPoint z = point;
    if (z.dual.size() != model.constraint_count()) z.dual = z.mu * model.slacks(z).cwiseInverse();
    return model.kkt_residual(z, z.mu);
}

} // namespace sdom
