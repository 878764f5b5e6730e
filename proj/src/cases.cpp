#include "sdg/cases.hpp"
#include <cmath>
#include <memory>
#include <random>

namespace sdg {

namespace {

constexpr double kPi = 3.14159265358979323846;

// one-dimensional factor with derivatives 0..3
using Deriv4 = std::function<void(double, double*)>;

// f = u^3, u = a x - x^2 (triple zeros at 0 and a)
Deriv4 cubed(double a) {
  return [a](double x, double* d) {
    double u = a * x - x * x, up = a - 2 * x;
    d[0] = u * u * u;
    d[1] = 3 * u * u * up;
    d[2] = 6 * u * up * up - 6 * u * u;
    d[3] = 6 * up * up * up - 36 * u * up;
  };
}

// f = x^3 sin^3(w x) = x^3 (3 sin(wx) - sin(3wx))/4
Deriv4 trig_cubed(double w) {
  return [w](double x, double* d) {
    double s1 = std::sin(w * x), c1 = std::cos(w * x);
    double s3 = std::sin(3 * w * x), c3 = std::cos(3 * w * x);
    double T0 = 3 * s1 - s3;
    double T1 = 3 * w * (c1 - c3);
    double T2 = 3 * w * w * (-s1 + 3 * s3);
    double T3 = 3 * w * w * w * (-c1 + 9 * c3);
    double x2 = x * x, x3 = x2 * x;
    d[0] = x3 * T0 / 4;
    d[1] = (3 * x2 * T0 + x3 * T1) / 4;
    d[2] = (6 * x * T0 + 6 * x2 * T1 + x3 * T2) / 4;
    d[3] = (6 * T0 + 18 * x * T1 + 9 * x2 * T2 + x3 * T3) / 4;
  };
}

// Px = x(1/2-x)^2 and derivatives; shared Brinkman/Darcy pressure factor
inline void px_eval(double x, double* d) {
  d[0] = x / 4 - x * x + x * x * x;
  d[1] = 0.25 - 2 * x + 3 * x * x;
  d[2] = -2 + 6 * x;
  d[3] = 6;
}

struct DarcyFields {
  std::function<Vec2(double, double)> uD;
  std::function<double(double, double)> f;  // div uD
};

// assembles a case from a stream function psi(x,y) = F(x) G(y) for the
// Brinkman side; pressures are fixed, the Darcy side is supplied
ManufacturedCase assemble_case(const Deriv4& F, const Deriv4& G, const DarcyFields& dar,
                               double eps, double alpha, double kdarcy, double kdiff) {
  ManufacturedCase mc;
  mc.domB = {0, 0.5, 0, 1};
  mc.domD = {0.5, 1, 0, 1};
  mc.eps = eps;
  mc.alpha = alpha;
  mc.kdarcy = kdarcy;
  mc.kdiff = kdiff;

  auto ub_pt = [F, G](double x, double y) {
    double fx[4], gy[4];
    F(x, fx);
    G(y, gy);
    return Vec2(fx[0] * gy[1], -fx[1] * gy[0]);
  };
  mc.uB = [ub_pt](const MatX2& X) {
    MatrixXd out(X.rows(), 2);
    for (int i = 0; i < X.rows(); ++i) out.row(i) = ub_pt(X(i, 0), X(i, 1)).transpose();
    return out;
  };
  mc.L = [F, G, eps](const MatX2& X) {
    MatrixXd out(X.rows(), 4);
    for (int i = 0; i < X.rows(); ++i) {
      double fx[4], gy[4];
      F(X(i, 0), fx);
      G(X(i, 1), gy);
      out(i, 0) = eps * fx[1] * gy[1];
      out(i, 1) = eps * fx[0] * gy[2];
      out(i, 2) = -eps * fx[2] * gy[0];
      out(i, 3) = -eps * fx[1] * gy[1];
    }
    return out;
  };
  mc.pB = [](const MatX2& X) {
    VectorXd out(X.rows());
    for (int i = 0; i < X.rows(); ++i) {
      double px[4];
      px_eval(X(i, 0), px);
      out[i] = px[0] * (X(i, 1) - 0.5);
    }
    return out;
  };
  mc.fB = [F, G, eps, alpha](const MatX2& X) {
    MatrixXd out(X.rows(), 2);
    for (int i = 0; i < X.rows(); ++i) {
      double x = X(i, 0), y = X(i, 1), fx[4], gy[4], px[4];
      F(x, fx);
      G(y, gy);
      px_eval(x, px);
      out(i, 0) = -eps * (fx[2] * gy[1] + fx[0] * gy[3]) + alpha * fx[0] * gy[1] +
                  px[1] * (y - 0.5);
      out(i, 1) = eps * (fx[3] * gy[0] + fx[1] * gy[2]) - alpha * fx[1] * gy[0] + px[0];
    }
    return out;
  };

  mc.pD = [](const MatX2& X) {
    VectorXd out(X.rows());
    for (int i = 0; i < X.rows(); ++i) {
      double px[4];
      px_eval(X(i, 0), px);
      out[i] = px[0] * X(i, 1) * (1 - X(i, 1));
    }
    return out;
  };
  auto grad_pd = [](double x, double y) {
    double px[4];
    px_eval(x, px);
    return Vec2(px[1] * y * (1 - y), px[0] * (1 - 2 * y));
  };
  mc.uD = [dar](const MatX2& X) {
    MatrixXd out(X.rows(), 2);
    for (int i = 0; i < X.rows(); ++i) out.row(i) = dar.uD(X(i, 0), X(i, 1)).transpose();
    return out;
  };
  mc.fD = [dar, grad_pd, kdarcy](const MatX2& X) {
    MatrixXd out(X.rows(), 2);
    for (int i = 0; i < X.rows(); ++i) {
      Vec2 v = dar.uD(X(i, 0), X(i, 1)) / kdarcy + grad_pd(X(i, 0), X(i, 1));
      out.row(i) = v.transpose();
    }
    return out;
  };
  mc.f = [dar](const MatX2& X) {
    VectorXd out(X.rows());
    for (int i = 0; i < X.rows(); ++i) out[i] = dar.f(X(i, 0), X(i, 1));
    return out;
  };

  mc.c = [](const MatX2& X, double t) {
    VectorXd out(X.rows());
    for (int i = 0; i < X.rows(); ++i)
      out[i] = t * (std::cos(kPi * X(i, 0)) + std::cos(kPi * X(i, 1))) / kPi;
    return out;
  };
  mc.z = [kdiff](const MatX2& X, double t) {
    MatX2 out(X.rows(), 2);
    for (int i = 0; i < X.rows(); ++i) {
      out(i, 0) = kdiff * t * std::sin(kPi * X(i, 0));
      out(i, 1) = kdiff * t * std::sin(kPi * X(i, 1));
    }
    return out;
  };
  double xsplit = mc.domB.x1;
  mc.s = [ub_pt, dar, kdiff, xsplit](const MatX2& X, double t) {
    VectorXd out(X.rows());
    for (int i = 0; i < X.rows(); ++i) {
      double x = X(i, 0), y = X(i, 1);
      Vec2 u = x <= xsplit ? ub_pt(x, y) : dar.uD(x, y);
      double cx = -t * std::sin(kPi * x), cy = -t * std::sin(kPi * y);
      double lap = -kPi * t * (std::cos(kPi * x) + std::cos(kPi * y));
      out[i] = (std::cos(kPi * x) + std::cos(kPi * y)) / kPi + u.x() * cx + u.y() * cy -
               kdiff * lap;
    }
    return out;
  };

  mc.bc.g1 = [uB = mc.uB](const Edge& e, const MatX2& X) {
    MatrixXd u = uB(X);
    return VectorXd(u.col(0) * e.n.x() + u.col(1) * e.n.y());
  };
  mc.bc.g2 = [uD = mc.uD](const Edge& e, const MatX2& X) {
    MatrixXd u = uD(X);
    return VectorXd(u.col(0) * e.n.x() + u.col(1) * e.n.y());
  };
  return mc;
}

} // namespace

ManufacturedCase make_case1(double eps, double alpha, double kdarcy, double kdiff) {
  DarcyFields dar;
  dar.uD = [](double x, double y) {
    double px[4];
    px_eval(x, px);
    return Vec2(y * (y - 1) * px[1], px[0] * (2 * y - 1));
  };
  dar.f = [](double x, double y) {
    double px[4];
    px_eval(x, px);
    return y * (y - 1) * px[2] + 2 * px[0];
  };
  return assemble_case(cubed(0.5), cubed(1.0), dar, eps, alpha, kdarcy, kdiff);
}

ManufacturedCase make_case2(double eps, double alpha, double kdarcy, double kdiff) {
  DarcyFields dar;
  dar.uD = [](double x, double y) {
    double v = std::sin(2 * kPi * x) * std::cos(2 * kPi * y);
    return Vec2(v, v);
  };
  dar.f = [](double x, double y) {
    return 2 * kPi * (std::cos(2 * kPi * x) * std::cos(2 * kPi * y) -
                      std::sin(2 * kPi * x) * std::sin(2 * kPi * y));
  };
  return assemble_case(trig_cubed(2 * kPi), trig_cubed(kPi), dar, eps, alpha, kdarcy, kdiff);
}

namespace {

double at(const ScalarField& f, double x, double y) {
  MatX2 X(1, 2);
  X << x, y;
  return f(X)[0];
}
double at(const MultiField& f, int c, double x, double y) {
  MatX2 X(1, 2);
  X << x, y;
  return f(X)(0, c);
}
double att(const TimeField& f, double x, double y, double t) {
  MatX2 X(1, 2);
  X << x, y;
  return f(X, t)[0];
}
double atv(const TimeVecField& f, int c, double x, double y, double t) {
  MatX2 X(1, 2);
  X << x, y;
  return f(X, t)(0, c);
}

// fourth-order central differences, Richardson-extrapolated to sixth order
template <class F>
double d1_4(F f, double x, double h) {
  return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}
template <class F>
double d2_4(F f, double x, double h) {
  return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) /
         (12 * h * h);
}
template <class F>
double d1(F f, double x, double h) {
  return (16 * d1_4(f, x, h / 2) - d1_4(f, x, h)) / 15;
}
template <class F>
double d2(F f, double x, double h) {
  return (16 * d2_4(f, x, h / 2) - d2_4(f, x, h)) / 15;
}

double rel(double resid, double scale) { return std::abs(resid) / (scale + 1.0); }

} // namespace

double case_self_check(const ManufacturedCase& mc, int npts, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double h = 1e-3, margin = 3e-3, tref = 0.07;
  double worst = 0;
  auto bump = [&](double r) { worst = std::max(worst, r); };

  for (int p = 0; p < npts; ++p) {
    bool inB = p % 2 == 0;
    const Rect& dom = inB ? mc.domB : mc.domD;
    double x = dom.x0 + margin + (dom.x1 - dom.x0 - 2 * margin) * u01(rng);
    double y = dom.y0 + margin + (dom.y1 - dom.y0 - 2 * margin) * u01(rng);
    if (inB) {
      auto u0x = [&](double xx) { return at(mc.uB, 0, xx, y); };
      auto u1y = [&](double yy) { return at(mc.uB, 1, x, yy); };
      bump(rel(d1(u0x, x, h) + d1(u1y, y, h), std::abs(d1(u0x, x, h))));
      // L = eps grad uB
      for (int c = 0; c < 2; ++c) {
        auto ux = [&](double xx) { return at(mc.uB, c, xx, y); };
        auto uy = [&](double yy) { return at(mc.uB, c, x, yy); };
        double lx = mc.eps * d1(ux, x, h), ly = mc.eps * d1(uy, y, h);
        bump(rel(at(mc.L, 2 * c, x, y) - lx, std::abs(lx)));
        bump(rel(at(mc.L, 2 * c + 1, x, y) - ly, std::abs(ly)));
      }
      // momentum: -div L + alpha uB + grad pB = fB
      for (int c = 0; c < 2; ++c) {
        auto l0 = [&](double xx) { return at(mc.L, 2 * c, xx, y); };
        auto l1 = [&](double yy) { return at(mc.L, 2 * c + 1, x, yy); };
        double gp = c == 0 ? d1([&](double xx) { return at(mc.pB, xx, y); }, x, h)
                           : d1([&](double yy) { return at(mc.pB, x, yy); }, y, h);
        double r = -d1(l0, x, h) - d1(l1, y, h) + mc.alpha * at(mc.uB, c, x, y) + gp -
                   at(mc.fB, c, x, y);
        bump(rel(r, std::abs(at(mc.fB, c, x, y)) + std::abs(gp)));
      }
    } else {
      // Darcy: uD/KD + grad pD = fD, div uD = f
      for (int c = 0; c < 2; ++c) {
        double gp = c == 0 ? d1([&](double xx) { return at(mc.pD, xx, y); }, x, h)
                           : d1([&](double yy) { return at(mc.pD, x, yy); }, y, h);
        double r = at(mc.uD, c, x, y) / mc.kdarcy + gp - at(mc.fD, c, x, y);
        bump(rel(r, std::abs(gp) + std::abs(at(mc.fD, c, x, y))));
      }
      auto v0x = [&](double xx) { return at(mc.uD, 0, xx, y); };
      auto v1y = [&](double yy) { return at(mc.uD, 1, x, yy); };
      double dv = d1(v0x, x, h) + d1(v1y, y, h);
      bump(rel(dv - at(mc.f, x, y), std::abs(at(mc.f, x, y))));
    }
    // transport: c_t + u.grad c - K lap c = s ; z = -K grad c
    auto cx = [&](double xx) { return att(mc.c, xx, y, tref); };
    auto cy = [&](double yy) { return att(mc.c, x, yy, tref); };
    auto ct = [&](double tt) { return att(mc.c, x, y, tt); };
    double gcx = d1(cx, x, h), gcy = d1(cy, y, h);
    bump(rel(atv(mc.z, 0, x, y, tref) + mc.kdiff * gcx, std::abs(gcx)));
    bump(rel(atv(mc.z, 1, x, y, tref) + mc.kdiff * gcy, std::abs(gcy)));
    double ux = inB ? at(mc.uB, 0, x, y) : at(mc.uD, 0, x, y);
    double uy = inB ? at(mc.uB, 1, x, y) : at(mc.uD, 1, x, y);
    double lap = d2(cx, x, h) + d2(cy, y, h);
    double r = d1(ct, tref, h) + ux * gcx + uy * gcy - mc.kdiff * lap -
               att(mc.s, x, y, tref);
    bump(rel(r, std::abs(att(mc.s, x, y, tref)) + std::abs(lap)));
  }
  return worst;
}

double case_interface_check(const ManufacturedCase& mc, int npts) {
  // interface is the shared edge of the two rectangles
  bool vertical = mc.domB.x1 == mc.domD.x0 || mc.domD.x1 == mc.domB.x0;
  double worst = 0;
  for (int i = 0; i < npts; ++i) {
    double s = (i + 0.5) / npts;
    double x, y;
    Vec2 n;  // out of Brinkman
    if (vertical) {
      x = mc.domB.x1 == mc.domD.x0 ? mc.domB.x1 : mc.domB.x0;
      y = mc.domB.y0 + (mc.domB.y1 - mc.domB.y0) * s;
      n = Vec2(mc.domB.x1 == mc.domD.x0 ? 1 : -1, 0);
    } else {
      y = mc.domB.y1 == mc.domD.y0 ? mc.domB.y1 : mc.domB.y0;
      x = mc.domB.x0 + (mc.domB.x1 - mc.domB.x0) * s;
      n = Vec2(0, mc.domB.y1 == mc.domD.y0 ? 1 : -1);
    }
    Vec2 t(-n.y(), n.x());
    double ubn = at(mc.uB, 0, x, y) * n.x() + at(mc.uB, 1, x, y) * n.y();
    double udn = at(mc.uD, 0, x, y) * n.x() + at(mc.uD, 1, x, y) * n.y();
    Vec2 Ln(at(mc.L, 0, x, y) * n.x() + at(mc.L, 1, x, y) * n.y(),
            at(mc.L, 2, x, y) * n.x() + at(mc.L, 3, x, y) * n.y());
    worst = std::max(worst, std::abs(ubn - udn));                      // mass
    worst = std::max(worst, std::abs(at(mc.pB, x, y) - Ln.dot(n) - at(mc.pD, x, y)));
    worst = std::max(worst, std::abs(Ln.dot(t)));                      // L n = 0 on Gamma
  }
  return worst;
}

DemoCase make_case3() {
  DemoCase d;
  d.name = "case3";
  d.domB = {0, 1, 0.5, 1};
  d.domD = {0, 1, 0, 0.5};
  d.fprm.eps = 0.1;
  d.fprm.alpha = 1.0;
  d.fprm.kdarcy = 1e-2;
  d.fprm.relax_GB = true;

  auto profile = [](double y) { return y * (1.5 - y) / 5.0; };
  d.bc.brinkman_velocity = [profile](const MatX2& X) {
    MatrixXd out = MatrixXd::Zero(X.rows(), 2);
    for (int i = 0; i < X.rows(); ++i)
      if (X(i, 0) < 1e-12) out(i, 0) = profile(X(i, 1));
    return out;
  };
  d.bc.g1 = [profile](const Edge& e, const MatX2& X) {
    VectorXd out = VectorXd::Zero(X.rows());
    for (int i = 0; i < X.rows(); ++i)
      if (X(i, 0) < 1e-12) out[i] = profile(X(i, 1)) * e.n.x();
    return out;
  };
  d.bc.g2 = [](const Edge&, const MatX2& X) { return VectorXd(VectorXd::Zero(X.rows())); };
  d.bc.pressure_edge = [](const Edge& e) { return e.mid.y() < 1e-12; };
  d.bc.p_dirichlet = [](const Edge&, const MatX2& X) {
    return VectorXd(VectorXd::Constant(X.rows(), -0.05));
  };

  d.tprm.K = 1e-5 * Eigen::Matrix2d::Identity();
  d.tprm.phi = 1.0;
  d.tprm.dt = 1e-3;
  d.tprm.tfinal = 6.0;
  d.tdata.c0 = [](const MatX2& X) {
    VectorXd out(X.rows());
    for (int i = 0; i < X.rows(); ++i) {
      double dx = X(i, 0) - 0.1, dy = X(i, 1) - 0.7;
      out[i] = std::sqrt(dx * dx + dy * dy) < 0.1 ? 1.0 : 0.0;
    }
    return out;
  };
  d.snapshot_times = {1.0, 3.0, 6.0};
  return d;
}

DemoCase make_case4(int ncells, unsigned seed) {
  DemoCase d;
  d.name = "case4";
  d.fprm.eps = 1.0;
  d.fprm.alpha = 1.0;
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> logk(-6.0, -3.0);
  auto kd = std::make_shared<std::vector<double>>();
  kd->reserve(ncells);
  for (int i = 0; i < ncells; ++i) kd->push_back(std::pow(10.0, logk(rng)));
  d.fprm.kdarcy_cell = [kd](int cell) { return kd->at(cell); };

  d.bc.g1 = [](const Edge& e, const MatX2& X) {
    VectorXd out = VectorXd::Zero(X.rows());
    for (int i = 0; i < X.rows(); ++i) {
      double x = X(i, 0), y = X(i, 1);
      if (x < 1e-9) out[i] = 0.25 * (y - 4) * (8 - y);
      else if (x > 12 - 1e-9) out[i] = (3.0 / 16.0) * (y - 4) * (8 - y);
    }
    return out;
  };
  d.bc.g2 = [](const Edge&, const MatX2& X) { return VectorXd(VectorXd::Zero(X.rows())); };
  d.bc.pressure_edge = [](const Edge& e) { return e.mid.y() < 1e-9; };
  d.bc.p_dirichlet = [](const Edge&, const MatX2& X) {
    return VectorXd(VectorXd::Constant(X.rows(), -1e3));
  };

  d.tprm.K = Eigen::Matrix2d::Identity();
  d.tprm.phi = 1.0;
  d.tprm.dt = 1e-3;
  d.tprm.tfinal = 20.0;
  d.tdata.s = [](const MatX2& X, double) {
    return VectorXd(VectorXd::Constant(X.rows(), 0.01));
  };
  d.tdata.c_in = [](const MatX2& X, double) {
    return VectorXd(VectorXd::Ones(X.rows()));
  };
  d.snapshot_times = {1.0, 5.0, 10.0, 20.0};
  return d;
}

} // namespace sdg
