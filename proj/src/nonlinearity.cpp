#include "pmrd/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pmrd/quadrature.hpp"

namespace pmrd {

namespace {

bool near_integer(double x) { return std::abs(x - std::round(x)) < 1e-12; }

double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r *= double(n - k + i) / double(i);
  return r;
}

// int_{1-z}^{1} t^p dt
double tail_power_int(double p, double z) {
  if (std::abs(p + 1.0) < 1e-12) return -std::log1p(-z);
  return (1.0 - std::pow(1.0 - z, p + 1.0)) / (p + 1.0);
}

// int_0^z of tail_power_int(p, .)
double tail_power_int_prim(double p, double z) {
  if (std::abs(p + 1.0) < 1e-12) {
    // int_0^z -log(1-s) ds
    return (1.0 - z) * std::log1p(-z) + z;
  }
  double q = p + 1.0;
  double inner;  // int_0^z (1-s)^q ds
  if (std::abs(q + 1.0) < 1e-12)
    inner = -std::log1p(-z);
  else
    inner = (1.0 - std::pow(1.0 - z, q + 1.0)) / (q + 1.0);
  return (z - inner) / q;
}

// phi(z) = int_0^z s^b (1-s)^{-a} ds for z in [0,1), integer a,b via partial fractions
double biofilm_value_closed(int a, int b, double z) {
  double acc = 0.0;
  for (int k = 0; k <= b; ++k) {
    double sgn = (k % 2 == 0) ? 1.0 : -1.0;
    acc += binom(b, k) * sgn * tail_power_int(double(k - a), z);
  }
  return acc;
}

double biofilm_primitive_closed(int a, int b, double z) {
  double acc = 0.0;
  for (int k = 0; k <= b; ++k) {
    double sgn = (k % 2 == 0) ? 1.0 : -1.0;
    acc += binom(b, k) * sgn * tail_power_int_prim(double(k - a), z);
  }
  return acc;
}

double softplus(double y) {
  if (y > 30.0) return y;
  if (y < -30.0) return 0.0;
  return std::log1p(std::exp(y));
}

}  // namespace

// ---------------------------------------------------------------------------
// PhiSpec

PhiSpec PhiSpec::biofilm(double a, double b, bool symmetric) {
  if (a < 1.0 || b <= 0.0) throw std::invalid_argument("biofilm phi requires a >= 1, b > 0");
  PhiSpec s;
  s.kind = Kind::biofilm;
  s.a = a;
  s.b = b;
  s.symmetric_extension = symmetric;
  s.is_singular = true;
  s.label = "biofilm";
  return s;
}

PhiSpec PhiSpec::power(double m) {
  if (m <= 1.0) throw std::invalid_argument("power phi requires m > 1");
  auto val = [m](double z) { return std::copysign(std::pow(std::abs(z), m), z); };
  auto der = [m](double z) { return m * std::pow(std::abs(z), m - 1.0); };
  auto prim = [m](double z) { return std::pow(std::abs(z), m + 1.0) / (m + 1.0); };
  PhiSpec s = custom(val, der, prim, /*singular=*/false, "power");
  s.a = m;  // reused only for labeling
  return s;
}

PhiSpec PhiSpec::custom(std::function<double(double)> value, std::function<double(double)> derivative,
                        std::function<double(double)> primitive, bool singular, std::string label) {
  PhiSpec s;
  s.kind = Kind::custom;
  s.custom_value = std::move(value);
  s.custom_derivative = std::move(derivative);
  s.custom_primitive = std::move(primitive);
  s.is_singular = singular;
  s.label = std::move(label);
  return s;
}

double PhiSpec::value(double z) const {
  if (std::abs(z) >= 1.0) throw std::domain_error("phi: |z| >= 1");
  if (kind == Kind::custom) return custom_value(z);
  if (z < 0.0) {
    if (!symmetric_extension) throw std::domain_error("phi: z < 0 without symmetric extension");
    return -value(-z);
  }
  if (near_integer(a) && near_integer(b))
    return biofilm_value_closed(int(std::round(a)), int(std::round(b)), z);
  const double aa = a, bb = b;
  return adaptive_simpson([aa, bb](double s) { return std::pow(s, bb) * std::pow(1.0 - s, -aa); },
                          0.0, z);
}

double PhiSpec::derivative(double z) const {
  if (std::abs(z) >= 1.0) throw std::domain_error("phi': |z| >= 1");
  if (kind == Kind::custom) return custom_derivative(z);
  const double az = std::abs(z);
  if (z < 0.0 && !symmetric_extension) throw std::domain_error("phi': z < 0 without symmetric extension");
  if (az == 0.0) return 0.0;
  return std::pow(az, b) * std::pow(1.0 - az, -a);
}

double PhiSpec::primitive(double z) const {
  if (std::abs(z) >= 1.0) throw std::domain_error("Phi: |z| >= 1");
  if (kind == Kind::custom) {
    if (custom_primitive) return custom_primitive(z);
    return adaptive_simpson([this](double s) { return custom_value(s); }, 0.0, z);
  }
  if (z < 0.0) {
    if (!symmetric_extension) throw std::domain_error("Phi: z < 0 without symmetric extension");
    return primitive(-z);
  }
  if (near_integer(a) && near_integer(b))
    return biofilm_primitive_closed(int(std::round(a)), int(std::round(b)), z);
  return adaptive_simpson([this](double s) { return value(s); }, 0.0, z);
}

double PhiSpec::inverse(double w) const {
  if (w == 0.0) return 0.0;
  if (w < 0.0) {
    // mirrored bisection (odd symmetric case); asymmetric custom handled the same way
    if (kind == Kind::biofilm && symmetric_extension) return -inverse(-w);
  }
  const double sgn = (w > 0.0) ? 1.0 : -1.0;
  double lo = 0.0, hi = sgn * (1.0 - 1e-15);
  double flo = 0.0, fhi = value(hi);
  if (sgn * fhi < sgn * w) {
    if (!is_singular) throw std::domain_error("phi inverse: value out of range of phi");
    // singular phi is surjective; value(hi) is finite but huge, so this is roundoff
    return hi;
  }
  (void)flo;
  for (int it = 0; it < 200 && std::abs(hi - lo) > 1e-12; ++it) {
    double mid = 0.5 * (lo + hi);
    if (sgn * value(mid) < sgn * w)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

void PhiSpec::validate() const {
  const int n = 10000;
  const double zmax = 1.0 - 1e-4;
  const double zmin = symmetric_extension || kind == Kind::custom ? -zmax : 0.0;
  if (std::abs(value(0.0)) > 1e-12) throw std::invalid_argument("phi(0) != 0");
  if (std::abs(derivative(0.0)) > 1e-10) throw std::invalid_argument("phi'(0) != 0 (no degeneracy)");
  double prev = value(zmin);
  for (int i = 1; i <= n; ++i) {
    double z = zmin + (zmax - zmin) * double(i) / n;
    double v = value(z);
    if (v <= prev) throw std::invalid_argument("phi not strictly increasing");
    prev = v;
  }
  if (is_singular && value(1.0 - 1e-6) < 10.0)
    throw std::invalid_argument("phi not singular at 1 (phi(1-1e-6) below threshold)");
  // convexity on [0,1), concavity on the negative side, by second differences
  auto second_diff_sign = [this](double lo, double hi, double sign) {
    const int m = 2000;
    double h = (hi - lo) / m;
    for (int i = 1; i < m; ++i) {
      double z = lo + i * h;
      double d2 = value(z + h) - 2.0 * value(z) + value(z - h);
      double scale = std::abs(value(z)) + 1.0;
      if (sign * d2 < -1e-8 * scale) throw std::invalid_argument("phi convex/concave split violated");
    }
  };
  second_diff_sign(0.0, zmax, +1.0);
  if (zmin < 0.0) second_diff_sign(zmin, 0.0, -1.0);
  if (kind == Kind::biofilm) {
    // growth bound |phi(z)| <= c1 (1-|z|)^{1-ae} + c2
    const double ae = std::max(a, 1.5);
    const double c1 = (a > 1.0) ? 1.0 / (a - 1.0) : 1.0;
    const double c2 = (a > 1.0) ? 1.0 / (a - 1.0) : 1.0;
    for (int i = 0; i <= 1000; ++i) {
      double z = 0.999999 * double(i) / 1000;
      if (std::abs(value(z)) > c1 * std::pow(1.0 - z, 1.0 - ae) + c2 + 1e-9)
        throw std::invalid_argument("phi growth bound violated");
    }
  }
}

// ---------------------------------------------------------------------------
// RegularizedPhi

RegularizedPhi regularize(const PhiSpec& spec, double R) {
  if (R <= 1.0) throw std::invalid_argument("regularize: R must be > 1");
  RegularizedPhi p;
  p.base_ = spec;
  p.R_ = R;
  p.z_cut_ = 1.0 - 1.0 / R;
  p.eps_ = std::min(1.0 / (R * R), 1e-4);
  // slope floor; capped so that the additive (A1) bound |phi_R| <= |phi| + |z|/R holds
  p.m_R_ = 0.5 * std::min(spec.derivative(1.0 / R), 0.9 / R);
  p.symmetric_ = (spec.kind != PhiSpec::Kind::custom) ? spec.symmetric_extension : true;

  p.slope_pos_ = spec.derivative(p.z_cut_);
  p.val_pos_ = spec.value(p.z_cut_);
  p.prim_pos_ = spec.primitive(p.z_cut_);
  if (p.symmetric_) {
    p.slope_neg_ = p.slope_pos_;
    p.val_neg_ = -p.val_pos_;
    p.prim_neg_ = p.prim_pos_;
  } else {
    // one-sided spec: extend below zero linearly with the slope at the origin
    // (the slope floor keeps the regularized map strictly increasing there)
    p.slope_neg_ = spec.derivative(0.0);
    p.val_neg_ = 0.0;
    p.prim_neg_ = 0.0;
  }
  p.M_R_ = p.m_R_ + p.eps_ * softplus((std::max(p.slope_pos_, p.slope_neg_) - p.m_R_) / p.eps_);

  auto build_side = [&p](RegularizedPhi::Side& side, double sign) {
    const int cells = 8192;
    side.h = p.z_cut_ / cells;
    side.c.assign(cells + 1, 0.0);
    side.ci.assign(cells + 1, 0.0);
    for (int i = 0; i < cells; ++i) {
      double s0 = i * side.h, s1 = (i + 1) * side.h, sm = s0 + 0.5 * side.h;
      double inc = side.h / 6.0 *
                   (p.corr_density(sign * s0) + 4.0 * p.corr_density(sign * sm) +
                    p.corr_density(sign * s1));
      side.c[i + 1] = side.c[i] + inc;
      side.ci[i + 1] = side.ci[i] + 0.5 * side.h * (side.c[i] + side.c[i + 1]);
    }
  };
  build_side(p.pos_, +1.0);
  if (!p.symmetric_) build_side(p.neg_, -1.0);
  return p;
}

double RegularizedPhi::corr_density(double s) const {
  // phi_R'(s) - phi_ext'(s) = eps * softplus((m_R - phi'(s)) / eps) >= 0
  return eps_ * softplus((m_R_ - extended_derivative(s)) / eps_);
}

double RegularizedPhi::extended_derivative(double z) const {
  if (!symmetric_ && z < 0.0) return slope_neg_;
  double zc = std::clamp(z, -z_cut_, z_cut_);
  return base_.derivative(std::abs(zc));
}

double RegularizedPhi::extended_value(double z) const {
  if (!symmetric_ && z < 0.0) return slope_neg_ * z;
  if (z > z_cut_) return val_pos_ + slope_pos_ * (z - z_cut_);
  if (z < -z_cut_) return val_neg_ + slope_neg_ * (z + z_cut_);
  if (z < 0.0) return -base_.value(-z);
  return base_.value(z);
}

double RegularizedPhi::extended_primitive(double z) const {
  if (!symmetric_ && z < 0.0) return 0.5 * slope_neg_ * z * z;
  if (z > z_cut_) {
    double d = z - z_cut_;
    return prim_pos_ + val_pos_ * d + 0.5 * slope_pos_ * d * d;
  }
  if (z < -z_cut_) {
    double d = -z - z_cut_;  // distance past the negative cut
    return prim_neg_ - val_neg_ * d + 0.5 * slope_neg_ * d * d;
  }
  if (z < 0.0) return base_.primitive(-z);
  return base_.primitive(z);
}

double RegularizedPhi::side_correction(const Side& s, double z) const {
  // z in [0, z_cut]
  double x = z / s.h;
  int i = std::min(int(x), int(s.c.size()) - 2);
  double frac = x - i;
  return s.c[i] + frac * (s.c[i + 1] - s.c[i]);
}

double RegularizedPhi::side_correction_int(const Side& s, double z) const {
  double x = z / s.h;
  int i = std::min(int(x), int(s.c.size()) - 2);
  double zi = i * s.h;
  double cz = side_correction(s, z);
  return s.ci[i] + 0.5 * (s.c[i] + cz) * (z - zi);
}

double RegularizedPhi::correction(double z) const {
  if (z >= 0.0) {
    double zc = std::min(z, z_cut_);
    double c = side_correction(pos_, zc);
    if (z > z_cut_) c += corr_density(z_cut_) * (z - z_cut_);
    return c;
  }
  const Side& s = symmetric_ ? pos_ : neg_;
  double zc = std::min(-z, z_cut_);
  double c = side_correction(s, zc);
  if (-z > z_cut_) c += corr_density(-z_cut_) * (-z - z_cut_);
  return -c;
}

double RegularizedPhi::correction_int(double z) const {
  double az = std::abs(z);
  const Side& s = (z >= 0.0 || symmetric_) ? pos_ : neg_;
  double zc = std::min(az, z_cut_);
  double ci = side_correction_int(s, zc);
  if (az > z_cut_) {
    double c_at_cut = side_correction(s, z_cut_);
    double rho = corr_density(z >= 0.0 ? z_cut_ : -z_cut_);
    double d = az - z_cut_;
    ci += c_at_cut * d + 0.5 * rho * d * d;
  }
  return ci;  // int_0^z correction(s) ds is even in z for the symmetric case
}

double RegularizedPhi::value(double z) const { return extended_value(z) + correction(z); }

double RegularizedPhi::derivative(double z) const {
  double d = extended_derivative(z);
  return m_R_ + eps_ * softplus((d - m_R_) / eps_);
}

double RegularizedPhi::primitive(double z) const {
  return extended_primitive(z) + correction_int(z);
}

double RegularizedPhi::inverse(double w) const {
  // strictly increasing with slope >= m_R, so a bracket always exists
  double lo = 0.0, hi = 0.0;
  if (w >= 0.0)
    hi = z_cut_ + (std::max(w - value(z_cut_), 0.0)) / m_R_ + 1.0;
  else {
    lo = -z_cut_ - (std::max(value(-z_cut_) - w, 0.0)) / m_R_ - 1.0;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    double mid = 0.5 * (lo + hi);
    if (value(mid) < w)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// ReactionSpec

ReactionSpec ReactionSpec::scalar_decay(double lambda) {
  ReactionSpec r;
  r.kind = Kind::scalar_decay;
  r.lambda = lambda;
  r.lipschitz_L = lambda;
  return r;
}

ReactionSpec ReactionSpec::monod(double K1, double K2, double K3, double K4, double d1, double d2) {
  if (K1 < 0 || K2 < 0 || K3 < 0 || K4 <= 0 || d1 <= 0 || d2 <= 0)
    throw std::invalid_argument("monod: require K1,K2,K3 >= 0, K4 > 0, d1,d2 > 0");
  ReactionSpec r;
  r.kind = Kind::monod;
  r.K1 = K1;
  r.K2 = K2;
  r.K3 = K3;
  r.K4 = K4;
  r.d1 = d1;
  r.d2 = d2;
  r.lipschitz_L = std::max(K2 + K3, K1) + std::max(K3, K1) / K4;
  return r;
}

ReactionSpec ReactionSpec::custom(std::function<double(double, double)> f,
                                  std::function<double(double, double)> g, double lipschitz_L) {
  ReactionSpec r;
  r.kind = Kind::custom;
  r.custom_f = std::move(f);
  r.custom_g = std::move(g);
  r.lipschitz_L = lipschitz_L;
  return r;
}

ReactionSpec::Value ReactionSpec::eval(double u, double v) const {
  switch (kind) {
    case Kind::scalar_decay:
      if (std::abs(u) >= 1.0) throw std::domain_error("reaction: |u| >= 1");
      return {-lambda * u, 0.0};
    case Kind::monod:
      if (u < 0.0 || u >= 1.0) throw std::domain_error("reaction: u outside [0,1)");
      if (v < 0.0 || v > 1.0) throw std::domain_error("reaction: v outside [0,1]");
      return {-K2 * u + K3 * u * v / (K4 + v), -K1 * u * v / (K4 + v)};
    case Kind::custom:
      return {custom_f(u, v), custom_g ? custom_g(u, v) : 0.0};
  }
  return {};
}

ReactionSpec::Value ReactionSpec::eval_clamped(double u, double v) const {
  double uc = u, vc = std::clamp(v, 0.0, 1.0);
  if (kind == Kind::monod)
    uc = std::clamp(u, 0.0, 1.0 - 1e-12);
  else
    uc = std::clamp(u, -1.0 + 1e-12, 1.0 - 1e-12);
  if (kind == Kind::custom) return {custom_f(uc, vc), custom_g ? custom_g(uc, vc) : 0.0};
  return eval(uc, vc);
}

double ReactionSpec::f_u(double u, double v) const {
  switch (kind) {
    case Kind::scalar_decay:
      return -lambda;
    case Kind::monod:
      return -K2 + K3 * std::clamp(v, 0.0, 1.0) / (K4 + std::clamp(v, 0.0, 1.0));
    case Kind::custom: {
      const double h = 1e-6;
      return (eval_clamped(u + h, v).f - eval_clamped(u - h, v).f) / (2 * h);
    }
  }
  return 0.0;
}

double ReactionSpec::f_v(double u, double v) const {
  switch (kind) {
    case Kind::scalar_decay:
      return 0.0;
    case Kind::monod: {
      double vv = std::clamp(v, 0.0, 1.0);
      double uu = std::clamp(u, 0.0, 1.0);
      return K3 * uu * K4 / ((K4 + vv) * (K4 + vv));
    }
    case Kind::custom: {
      const double h = 1e-6;
      return (eval_clamped(u, v + h).f - eval_clamped(u, v - h).f) / (2 * h);
    }
  }
  return 0.0;
}

double ReactionSpec::g_u(double u, double v) const {
  switch (kind) {
    case Kind::scalar_decay:
      return 0.0;
    case Kind::monod: {
      double vv = std::clamp(v, 0.0, 1.0);
      return -K1 * vv / (K4 + vv);
    }
    case Kind::custom: {
      if (!custom_g) return 0.0;
      const double h = 1e-6;
      return (eval_clamped(u + h, v).g - eval_clamped(u - h, v).g) / (2 * h);
    }
  }
  return 0.0;
}

double ReactionSpec::g_v(double u, double v) const {
  switch (kind) {
    case Kind::scalar_decay:
      return 0.0;
    case Kind::monod: {
      double vv = std::clamp(v, 0.0, 1.0);
      double uu = std::clamp(u, 0.0, 1.0);
      return -K1 * uu * K4 / ((K4 + vv) * (K4 + vv));
    }
    case Kind::custom: {
      if (!custom_g) return 0.0;
      const double h = 1e-6;
      return (eval_clamped(u, v + h).g - eval_clamped(u, v - h).g) / (2 * h);
    }
  }
  return 0.0;
}

double ReactionSpec::f_sup() const {
  switch (kind) {
    case Kind::scalar_decay:
      return lambda;
    case Kind::monod:
      return K2 + K3 / (K4 + 1.0);  // upper bound over u in [0,1), v in [0,1]
    case Kind::custom: {
      double sup = 0.0;
      for (int i = 0; i <= 100; ++i)
        for (int j = 0; j <= 20; ++j) {
          double u = -0.999 + 1.998 * i / 100.0, v = j / 20.0;
          sup = std::max(sup, std::abs(eval_clamped(u, v).f));
        }
      return sup;
    }
  }
  return 0.0;
}

void ReactionSpec::validate() const {
  if (lipschitz_L < 0.0) throw std::invalid_argument("reaction: negative Lipschitz constant");
  if (kind == Kind::monod) {
    // sign conditions keeping (u,v) in [0,1) x [0,1]
    for (int j = 0; j <= 20; ++j) {
      double v = j / 20.0;
      if (eval(0.0, v).f < 0.0) throw std::invalid_argument("monod: f(0,v) < 0");
    }
    for (int i = 0; i <= 20; ++i) {
      double u = 0.999 * i / 20.0;
      if (eval(u, 0.0).g < 0.0) throw std::invalid_argument("monod: g(u,0) < 0");
      if (eval(u, 1.0).g > 1.0) throw std::invalid_argument("monod: g(u,1) > 1");
    }
  }
}

double lipschitz_bound(const ReactionSpec& spec) {
  switch (spec.kind) {
    case ReactionSpec::Kind::scalar_decay:
      return spec.lambda;
    case ReactionSpec::Kind::monod:
      return std::max(spec.K2 + spec.K3, spec.K1) + std::max(spec.K3, spec.K1) / spec.K4;
    case ReactionSpec::Kind::custom: {
      // finite-difference sup over a sampling lattice
      double sup = 0.0;
      const int nu = 200, nv = 20;
      const double hu = 1e-5, hv = 1e-5;
      for (int i = 0; i <= nu; ++i)
        for (int j = 0; j <= nv; ++j) {
          double u = -0.999 + 1.998 * i / nu, v = double(j) / nv;
          auto fp = spec.eval_clamped(u + hu, v), fm = spec.eval_clamped(u - hu, v);
          sup = std::max(sup, (std::abs(fp.f - fm.f) + std::abs(fp.g - fm.g)) / (2 * hu));
          auto gp = spec.eval_clamped(u, v + hv), gm = spec.eval_clamped(u, v - hv);
          sup = std::max(sup, (std::abs(gp.f - gm.f) + std::abs(gp.g - gm.g)) / (2 * hv));
        }
      return sup;
    }
  }
  return 0.0;
}

}  // namespace pmrd
