#include "eqcycle/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

namespace eqcycle {

namespace {

constexpr double kUround = 2.220446049250313e-16;

double hermite_point(double t0, double t1, const std::vector<double>& y0,
                     const std::vector<double>& f0, const std::vector<double>& y1,
                     const std::vector<double>& f1, double tq, int i) {
  const double h = t1 - t0;
  const double s = (tq - t0) / h;
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1;
  const double h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2;
  const double h11 = s3 - s2;
  return h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i];
}

struct ErrWeights {
  const IntegratorConfig* cfg;
  double atol(int i) const {
    const auto& a = cfg->atol;
    return a.size() == 1 ? a[0] : a[static_cast<std::size_t>(i)];
  }
};

double error_norm(const std::vector<double>& err, const std::vector<double>& y0,
                  const std::vector<double>& y1, const ErrWeights& w) {
  double acc = 0.0;
  const int n = static_cast<int>(err.size());
  for (int i = 0; i < n; ++i) {
    const double sc =
        w.atol(i) + w.cfg->rtol * std::max(std::fabs(y0[i]), std::fabs(y1[i]));
    const double q = err[i] / sc;
    acc += q * q;
  }
  return std::sqrt(acc / n);
}

double initial_step(const Rhs& f, double t0, const std::vector<double>& y0,
                    double dir, const IntegratorConfig& cfg, int order) {
  const ErrWeights w{&cfg};
  const int n = static_cast<int>(y0.size());
  std::vector<double> f0(n);
  f(t0, y0, f0);
  double dn = 0, yn = 0;
  for (int i = 0; i < n; ++i) {
    const double sc = w.atol(i) + cfg.rtol * std::fabs(y0[i]);
    dn += (f0[i] / sc) * (f0[i] / sc);
    yn += (y0[i] / sc) * (y0[i] / sc);
  }
  dn = std::sqrt(dn / n);
  yn = std::sqrt(yn / n);
  double h0 = (dn < 1e-10 || yn < 1e-10) ? 1e-6 : 0.01 * yn / dn;
  h0 = std::min(h0, cfg.max_step);
  // one Euler probe
  std::vector<double> y1(n), f1(n);
  for (int i = 0; i < n; ++i) y1[i] = y0[i] + dir * h0 * f0[i];
  double h1 = h0;
  try {
    f(t0 + dir * h0, y1, f1);
    double d2 = 0;
    for (int i = 0; i < n; ++i) {
      const double sc = w.atol(i) + cfg.rtol * std::fabs(y0[i]);
      const double q = (f1[i] - f0[i]) / sc;
      d2 += q * q;
    }
    d2 = std::sqrt(d2 / n) / h0;
    const double dmax = std::max(dn, d2);
    if (dmax > 1e-15)
      h1 = std::pow(0.01 / dmax, 1.0 / order);
    else
      h1 = std::max(1e-6, h0 * 1e-3);
  } catch (const std::range_error&) {
    h1 = h0 * 1e-3;
  }
  return std::min({100 * h0, h1, cfg.max_step});
}

struct StepperBase {
  const Rhs& f;
  const Jac& jac;
  const IntegratorConfig& cfg;
  int n;
  // try_step returns true on acceptable local error; fills y1, f1, errnorm.
  virtual bool attempt(double t, const std::vector<double>& y0,
                       const std::vector<double>& f0, double h,
                       std::vector<double>& y1, std::vector<double>& f1,
                       double& errnorm) = 0;
  virtual int order() const = 0;
  StepperBase(const Rhs& f_, const Jac& j_, const IntegratorConfig& c_, int n_)
      : f(f_), jac(j_), cfg(c_), n(n_) {}
  virtual ~StepperBase() = default;
};

// Dormand-Prince 5(4), FSAL.
struct Dopri5 : StepperBase {
  using StepperBase::StepperBase;
  std::vector<double> k2, k3, k4, k5, k6, ytmp, err;
  int order() const override { return 5; }

  bool attempt(double t, const std::vector<double>& y0,
               const std::vector<double>& f0, double h, std::vector<double>& y1,
               std::vector<double>& f1, double& errnorm) override {
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                            a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600,
                            e3 = 500.0 / 1113 - 7571.0 / 16695,
                            e4 = 125.0 / 192 - 393.0 / 640,
                            e5 = -2187.0 / 6784 + 92097.0 / 339200,
                            e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;
    k2.resize(n); k3.resize(n); k4.resize(n); k5.resize(n); k6.resize(n);
    ytmp.resize(n); err.resize(n); y1.resize(n); f1.resize(n);
    for (int i = 0; i < n; ++i) ytmp[i] = y0[i] + h * a21 * f0[i];
    f(t + h / 5, ytmp, k2);
    for (int i = 0; i < n; ++i)
      ytmp[i] = y0[i] + h * (a31 * f0[i] + a32 * k2[i]);
    f(t + 3 * h / 10, ytmp, k3);
    for (int i = 0; i < n; ++i)
      ytmp[i] = y0[i] + h * (a41 * f0[i] + a42 * k2[i] + a43 * k3[i]);
    f(t + 4 * h / 5, ytmp, k4);
    for (int i = 0; i < n; ++i)
      ytmp[i] = y0[i] + h * (a51 * f0[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    f(t + 8 * h / 9, ytmp, k5);
    for (int i = 0; i < n; ++i)
      ytmp[i] = y0[i] + h * (a61 * f0[i] + a62 * k2[i] + a63 * k3[i] +
                             a64 * k4[i] + a65 * k5[i]);
    f(t + h, ytmp, k6);
    for (int i = 0; i < n; ++i)
      y1[i] = y0[i] +
              h * (b1 * f0[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    f(t + h, y1, f1);  // FSAL stage doubles as Hermite endpoint slope
    for (int i = 0; i < n; ++i)
      err[i] = h * (e1 * f0[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                    e6 * k6[i] + e7 * f1[i]);
    errnorm = error_norm(err, y0, y1, ErrWeights{&cfg});
    return errnorm <= 1.0;
  }
};

// Alexander's 3-stage stiffly accurate L-stable SDIRK, order 3, with an
// embedded order-2 estimate.  Modified Newton reuses one LU per step.
struct Sdirk3 : StepperBase {
  double gamma, b1, b2, bh1, bh2;
  Eigen::MatrixXd J, M;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
  std::vector<double> k1, k2, k3, Y, G, err;

  Sdirk3(const Rhs& f_, const Jac& j_, const IntegratorConfig& c_, int n_)
      : StepperBase(f_, j_, c_, n_) {
    // gamma: middle root of x^3 - 3x^2 + 3x/2 - 1/6.
    double g = 0.435866521508459;
    for (int it = 0; it < 8; ++it) {
      const double p = ((g - 3) * g + 1.5) * g - 1.0 / 6.0;
      const double dp = (3 * g - 6) * g + 1.5;
      g -= p / dp;
    }
    gamma = g;
    // weights from order conditions: sum b = 1, sum b*c = 1/2 with
    // c = (gamma, (1+gamma)/2, 1), b3 = gamma.
    const double c2 = (1 + gamma) / 2;
    // b1 + b2 = 1 - gamma ; b1*gamma + b2*c2 = 1/2 - gamma
    b2 = (0.5 - gamma - (1 - gamma) * gamma) / (c2 - gamma);
    b1 = 1 - gamma - b2;
    // embedded order 2: bh1 + bh2 = 1 ; bh1*gamma + bh2*c2 = 1/2
    bh2 = (0.5 - gamma) / (c2 - gamma);
    bh1 = 1 - bh2;
  }

  int order() const override { return 3; }

  // Solve Y = base + h*gamma*f(ts, Y); on success k = (Y - base)/(h*gamma).
  bool stage(double ts, const std::vector<double>& base,
             const std::vector<double>& pred, double h, std::vector<double>& k) {
    Y = pred;
    G.resize(n);
    Eigen::VectorXd rhs(n), dy(n);
    const double tol_newton = 5e-3;
    double prev = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 12; ++it) {
      f(ts, Y, G);
      for (int i = 0; i < n; ++i)
        rhs(i) = -(Y[i] - base[i] - h * gamma * G[i]);
      dy = lu.solve(rhs);
      double dn = 0;
      for (int i = 0; i < n; ++i) {
        const double sc = (cfg.atol.size() == 1 ? cfg.atol[0] : cfg.atol[i]) +
                          cfg.rtol * std::fabs(Y[i]);
        const double q = dy(i) / sc;
        dn += q * q;
      }
      dn = std::sqrt(dn / n);
      for (int i = 0; i < n; ++i) Y[i] += dy(i);
      if (dn <= tol_newton) {
        f(ts, Y, G);
        for (int i = 0; i < n; ++i) k[i] = G[i];
        return true;
      }
      if (it > 3 && dn > 0.9 * prev && dn > 1.0) return false;  // diverging
      prev = dn;
    }
    return false;
  }

  bool attempt(double t, const std::vector<double>& y0,
               const std::vector<double>& f0, double h, std::vector<double>& y1,
               std::vector<double>& f1, double& errnorm) override {
    (void)f0;
    k1.assign(n, 0); k2.assign(n, 0); k3.assign(n, 0);
    err.resize(n); y1.resize(n); f1.resize(n);
    J.resize(n, n);
    jac(t, y0, J);
    M = Eigen::MatrixXd::Identity(n, n) - h * gamma * J;
    lu.compute(M);
    const double c2 = (1 + gamma) / 2;
    std::vector<double> base(n), pred = y0;
    // stage 1
    if (!stage(t + gamma * h, y0, pred, h, k1)) { errnorm = 1e10; return false; }
    // stage 2
    for (int i = 0; i < n; ++i) {
      base[i] = y0[i] + h * (c2 - gamma) * k1[i];
      pred[i] = base[i] + h * gamma * k1[i];
    }
    if (!stage(t + c2 * h, base, pred, h, k2)) { errnorm = 1e10; return false; }
    // stage 3 (stiffly accurate: Y3 = y1)
    for (int i = 0; i < n; ++i) {
      base[i] = y0[i] + h * (b1 * k1[i] + b2 * k2[i]);
      pred[i] = base[i] + h * gamma * k2[i];
    }
    if (!stage(t + h, base, pred, h, k3)) { errnorm = 1e10; return false; }
    for (int i = 0; i < n; ++i) {
      y1[i] = y0[i] + h * (b1 * k1[i] + b2 * k2[i] + gamma * k3[i]);
      f1[i] = k3[i];  // f(t+h, y1) exactly, by stiff accuracy
      err[i] = h * ((b1 - bh1) * k1[i] + (b2 - bh2) * k2[i] + gamma * k3[i]);
    }
    errnorm = error_norm(err, y0, y1, ErrWeights{&cfg});
    return errnorm <= 1.0;
  }
};

void fd_jacobian(const Rhs& f, double t, const std::vector<double>& y,
                 Eigen::MatrixXd& J) {
  const int n = static_cast<int>(y.size());
  J.resize(n, n);
  std::vector<double> yp = y, f0(n), f1(n);
  f(t, y, f0);
  for (int j = 0; j < n; ++j) {
    const double h = 1e-7 * std::max(1.0, std::fabs(y[j]));
    yp[j] = y[j] + h;
    f(t, yp, f1);
    yp[j] = y[j];
    for (int i = 0; i < n; ++i) J(i, j) = (f1[i] - f0[i]) / h;
  }
}

}  // namespace

void Trajectory::eval(double tq, std::span<double> out) const {
  const auto nt = t.size();
  if (nt == 0) throw IntegrationError("Trajectory::eval on empty trajectory");
  const bool fwd = t.back() >= t.front();
  // binary search for the bracketing step
  std::size_t lo = 0, hi = nt - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (fwd ? (t[mid] <= tq) : (t[mid] >= tq))
      lo = mid;
    else
      hi = mid;
  }
  for (int i = 0; i < dim; ++i)
    out[i] = hermite_point(t[lo], t[hi], y[lo], dy[lo], y[hi], dy[hi], tq, i);
}

std::vector<double> Trajectory::eval(double tq) const {
  std::vector<double> out(dim);
  eval(tq, out);
  return out;
}

Trajectory integrate(const Rhs& f, const Jac& jac, std::span<const double> y0span,
                     double t0, double t1, const IntegratorConfig& cfg,
                     const std::vector<EventSpec>& events) {
  const int n = static_cast<int>(y0span.size());
  if (cfg.atol.size() != 1 && cfg.atol.size() != static_cast<std::size_t>(n))
    throw std::domain_error("integrate: atol must have 1 or n entries");
  if (!(cfg.rtol > 0 && cfg.rtol <= 1e-2))
    throw std::domain_error("integrate: rtol must be in (0, 1e-2]");
  for (double a : cfg.atol)
    if (!(a > 0)) throw std::domain_error("integrate: atol entries must be > 0");
  Trajectory tr;
  tr.dim = n;
  std::vector<double> y0(y0span.begin(), y0span.end());
  const double dir = (t1 >= t0) ? 1.0 : -1.0;

  Jac jac_eff = jac;
  if (!jac_eff && cfg.method == Method::stiff)
    jac_eff = [&f](double t, std::span<const double> y, Eigen::MatrixXd& J) {
      std::vector<double> yv(y.begin(), y.end());
      fd_jacobian(f, t, yv, J);
    };

  std::unique_ptr<StepperBase> st;
  if (cfg.method == Method::stiff)
    st = std::make_unique<Sdirk3>(f, jac_eff, cfg, n);
  else
    st = std::make_unique<Dopri5>(f, jac_eff, cfg, n);

  if (cfg.check_jacobian && jac) {
    Eigen::MatrixXd Ja(n, n), Jf(n, n);
    jac(t0, y0, Ja);
    fd_jacobian(f, t0, y0, Jf);
    double worst = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double d = std::fabs(Ja(i, j) - Jf(i, j)) /
                         std::max(1.0, std::fabs(Ja(i, j)));
        worst = std::max(worst, d);
      }
    if (worst > 1e-5)
      tr.warnings.push_back("jacobian consistency: max relative deviation " +
                            std::to_string(worst));
  }

  std::vector<double> f0(n), y1, f1;
  f(t0, y0, f0);
  tr.t.push_back(t0);
  tr.y.push_back(y0);
  tr.dy.push_back(f0);

  std::vector<double> gprev(events.size());
  for (std::size_t e = 0; e < events.size(); ++e) gprev[e] = events[e].g(t0, y0);

  double h = cfg.first_step > 0 ? cfg.first_step
                                : initial_step(f, t0, y0, dir, cfg, st->order());
  h = std::min(h, std::fabs(t1 - t0));
  double t = t0;
  std::int64_t nstep = 0;

  while (dir * (t1 - t) > 4 * kUround * std::max(std::fabs(t), std::fabs(t1))) {
    if (++nstep > cfg.max_steps) {
      tr.status = IntStatus::max_steps_exceeded;
      tr.message = "step budget exhausted";
      return tr;
    }
    h = std::min(h, std::fabs(t1 - t));
    const double hmin =
        std::max(cfg.min_step, 16 * kUround * std::max(std::fabs(t), 1e-30));
    if (h < hmin) {
      tr.status = IntStatus::step_underflow;
      tr.message = "step size underflow at t=" + std::to_string(t) +
                   " (h=" + std::to_string(h) + ")";
      return tr;
    }

    double errnorm = 0;
    bool ok = false;
    bool bad_eval = false;
    try {
      ok = st->attempt(t, tr.y.back(), tr.dy.back(), dir * h, y1, f1, errnorm);
    } catch (const std::range_error&) {
      bad_eval = true;  // e^z blew past double range inside a trial step
    } catch (const std::domain_error&) {
      bad_eval = true;  // trial step overshot a chart/domain boundary
    }
    if (bad_eval) {
      h *= 0.25;
      continue;
    }
    if (!ok) {
      const double fac =
          errnorm > 1e9 ? 0.25
                        : std::max(0.2, 0.9 * std::pow(errnorm, -1.0 / st->order()));
      h *= std::min(0.9, fac);
      continue;
    }

    const double tnew = t + dir * h;
    // event scan on this step's dense output
    for (std::size_t e = 0; e < events.size(); ++e) {
      const double g1 = events[e].g(tnew, y1);
      const double g0 = gprev[e];
      const bool crossed =
          (g0 < 0 && g1 > 0 && events[e].direction >= 0) ||
          (g0 > 0 && g1 < 0 && events[e].direction <= 0);
      if (crossed) {
        // bisection/secant hybrid on the Hermite interpolant
        double ta = t, tb = tnew, ga = g0, gb = g1;
        std::vector<double> ym(n);
        auto geval = [&](double tm) {
          for (int i = 0; i < n; ++i)
            ym[i] = hermite_point(t, tnew, tr.y.back(), tr.dy.back(), y1, f1, tm, i);
          return events[e].g(tm, ym);
        };
        for (int it = 0; it < 128; ++it) {
          double tm = 0.5 * (ta + tb);
          const double gsec = tb - gb * (tb - ta) / (gb - ga);
          if (it % 2 == 1 && gsec > std::min(ta, tb) && gsec < std::max(ta, tb))
            tm = gsec;
          const double gm = geval(tm);
          if ((ga < 0) == (gm < 0)) {
            ta = tm; ga = gm;
          } else {
            tb = tm; gb = gm;
          }
          if (std::fabs(tb - ta) <=
              events[e].root_tol * std::max(1.0, std::fabs(tnew)))
            break;
        }
        const double te = 0.5 * (ta + tb);
        geval(te);
        tr.events.push_back({te, events[e].id, ym});
        if (events[e].terminal) {
          tr.t.push_back(te);
          tr.y.push_back(ym);
          std::vector<double> fe(n);
          f(te, ym, fe);
          tr.dy.push_back(fe);
          tr.status = IntStatus::terminal_event;
          return tr;
        }
      }
      gprev[e] = g1;
    }

    t = tnew;
    tr.t.push_back(t);
    tr.y.push_back(y1);
    tr.dy.push_back(f1);

    if (cfg.guard_component >= 0 &&
        std::fabs(y1[cfg.guard_component]) > cfg.guard_threshold) {
      tr.status = IntStatus::guard_tripped;
      tr.message = "overflow guard |y[" + std::to_string(cfg.guard_component) +
                   "]| > " + std::to_string(cfg.guard_threshold);
      return tr;
    }

    const double fac = 0.9 * std::pow(std::max(errnorm, 1e-10), -1.0 / st->order());
    h = std::min(cfg.max_step, h * std::min(5.0, std::max(0.2, fac)));
  }
  tr.status = IntStatus::ok;
  return tr;
}

Trajectory integrate_checked(const Rhs& f, const Jac& jac,
                             std::span<const double> y0, double t0, double t1,
                             const IntegratorConfig& cfg,
                             const std::vector<EventSpec>& events) {
  Trajectory tr = integrate(f, jac, y0, t0, t1, cfg, events);
  if (tr.status == IntStatus::ok || tr.status == IntStatus::terminal_event)
    return tr;
  if (tr.status == IntStatus::guard_tripped)
    throw std::range_error("integrate: " + tr.message);
  throw IntegrationError("integrate: " + tr.message);
}

Eigen::MatrixXd integrate_variational(const Rhs& f, const Jac& jac,
                                      std::span<const double> y0, double T,
                                      const IntegratorConfig& cfg) {
  const int n = static_cast<int>(y0.size());
  const int N = n + n * n;
  std::vector<double> z0(N, 0.0);
  for (int i = 0; i < n; ++i) z0[i] = y0[i];
  for (int i = 0; i < n; ++i) z0[n + i * n + i] = 1.0;  // Phi = I, column-major

  Eigen::MatrixXd Jwork(n, n);
  Rhs faug = [&](double t, std::span<const double> z, std::span<double> dz) {
    std::span<const double> y = z.subspan(0, n);
    f(t, y, dz.subspan(0, n));
    jac(t, y, Jwork);
    for (int c = 0; c < n; ++c)
      for (int r = 0; r < n; ++r) {
        double acc = 0;
        for (int k = 0; k < n; ++k) acc += Jwork(r, k) * z[n + c * n + k];
        dz[n + c * n + r] = acc;
      }
  };
  // Newton matrix for the stiff method: block-diagonal J (the dJ/dy coupling
  // is dropped; it only affects Newton convergence, not accuracy).
  Jac jaug = [&](double t, std::span<const double> z, Eigen::MatrixXd& JA) {
    JA = Eigen::MatrixXd::Zero(N, N);
    Eigen::MatrixXd Jy(n, n);
    jac(t, z.subspan(0, n), Jy);
    JA.block(0, 0, n, n) = Jy;
    for (int c = 0; c < n; ++c) JA.block(n + c * n, n + c * n, n, n) = Jy;
  };
  // extend per-component atol onto the matrix part
  IntegratorConfig acfg = cfg;
  if (acfg.atol.size() > 1) {
    double amax = 0;
    for (double a : acfg.atol) amax = std::max(amax, a);
    acfg.atol.resize(N, amax);
  }
  acfg.guard_component = -1;  // the guard indexes state components only
  if (cfg.guard_component >= 0 && cfg.guard_component < n)
    acfg.guard_component = cfg.guard_component;
  Trajectory tr = integrate_checked(faug, jaug, z0, 0.0, T, acfg);
  const auto& zT = tr.back();
  Eigen::MatrixXd M(n, n);
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < n; ++r) M(r, c) = zT[n + c * n + r];
  return M;
}

namespace {

double simpson(double a, double fa, double b, double fb, double fm) {
  return (b - a) / 6.0 * (fa + 4 * fm + fb);
}

void adapt(const std::function<double(double)>& f, double a, double fa, double b,
           double fb, double fm, double whole, double tol, int depth,
           double& value, double& err) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(a, fa, m, fm, flm);
  const double right = simpson(m, fm, b, fb, frm);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15 * tol) {
    value += left + right + delta / 15.0;
    err += std::fabs(delta) / 15.0;
    return;
  }
  adapt(f, a, fa, m, fm, flm, left, tol / 2, depth - 1, value, err);
  adapt(f, m, fm, b, fb, frm, right, tol / 2, depth - 1, value, err);
}

}  // namespace

QuadResult quad_adaptive(const std::function<double(double)>& f, double a,
                         double b, double tol) {
  if (a == b) return {0.0, 0.0};
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = simpson(a, fa, b, fb, fm);
  double value = 0, err = 0;
  adapt(f, a, fa, b, fb, fm, whole, tol, 48, value, err);
  if (err > tol)
    throw AccuracyError("quad_adaptive: error estimate " + std::to_string(err) +
                        " exceeds tol " + std::to_string(tol));
  return {value, err};
}

QuadResult quad_adaptive_decay(const std::function<double(double)>& f, double a,
                               double tol, double rate, double coef) {
  if (!(rate > 0)) throw std::domain_error("quad_adaptive_decay: rate must be > 0");
  // choose B so the tail integral bound coef*exp(-rate*B)/rate < tol/4
  double B = a + 1;
  while (coef * std::exp(-rate * (B - 0.0)) / rate > tol / 4 && B < a + 1e4)
    B += 1;
  QuadResult r = quad_adaptive(f, a, B, tol / 2);
  const double tail = coef * std::exp(-rate * B) / rate;
  r.error += tail;
  if (r.error > tol)
    throw AccuracyError("quad_adaptive_decay: tolerance not met");
  return r;
}

}  // namespace eqcycle
