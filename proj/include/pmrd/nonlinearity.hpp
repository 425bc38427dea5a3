#pragma once

#include <functional>
#include <string>
#include <vector>

namespace pmrd {

/// Diffusion nonlinearity phi on (-1,1): degenerate at 0 (phi'(0)=0) and,
/// for the biofilm family, singular at 1 (phi -> +inf as z -> 1^-).
///
/// biofilm(a,b):  phi(z) = int_0^z s^b / (1-s)^a ds,  a >= 1, b > 0,
/// extended oddly to (-1,0] when symmetric_extension is set.
/// custom: caller-supplied monotone function (value/derivative/primitive).
struct PhiSpec {
  enum class Kind { biofilm, custom };

  Kind kind = Kind::biofilm;
  double a = 1.0;
  double b = 1.0;
  bool symmetric_extension = true;
  bool is_singular = true;  // phi(1^-) = +inf
  std::string label;

  std::function<double(double)> custom_value;
  std::function<double(double)> custom_derivative;
  std::function<double(double)> custom_primitive;

  static PhiSpec biofilm(double a, double b, bool symmetric = true);
  /// Pure-power phi(z) = sgn(z) |z|^m, m > 1 (PME core; no singularity at 1).
  static PhiSpec power(double m);
  static PhiSpec custom(std::function<double(double)> value,
                        std::function<double(double)> derivative,
                        std::function<double(double)> primitive, bool singular,
                        std::string label = "custom");

  double value(double z) const;       // phi(z), requires |z| < 1
  double derivative(double z) const;  // phi'(z)
  double primitive(double z) const;   // Phi(z) = int_0^z phi(s) ds >= 0
  double inverse(double w) const;     // phi^{-1}(w), bisection to 1e-12

  /// Lattice checks of the structural hypotheses (monotonicity, degeneracy,
  /// singularity, convex/concave split). Throws std::invalid_argument.
  void validate() const;
};

/// Non-degenerate approximation phi_R of phi:
///  - linear extension beyond +-(1 - 1/R) with the slope at the cut,
///  - slope floor m_R near 0, blended in smoothly,
///  - kinks mollified at width min(1/R^2, 1e-4).
/// Satisfies m_R <= phi_R' <= M_R everywhere and
/// |phi_R(z)| <= |phi(z)| + |z|/R on [-1+1/R, 1-1/R].
class RegularizedPhi {
 public:
  RegularizedPhi() = default;

  double value(double z) const;       // phi_R(z), defined on all of R
  double derivative(double z) const;  // phi_R'(z)
  double primitive(double z) const;   // Phi_R(z) = int_0^z phi_R
  double inverse(double w) const;

  const PhiSpec& base() const { return base_; }
  double R() const { return R_; }
  double slope_floor() const { return m_R_; }    // m_R
  double slope_cap() const { return M_R_; }      // M_R
  double mollifier_width() const { return eps_; }
  double cut() const { return z_cut_; }          // 1 - 1/R

 private:
  friend RegularizedPhi regularize(const PhiSpec& spec, double R);

  double correction(double z) const;       // phi_R - (extended) phi, >= 0 for z >= 0
  double correction_int(double z) const;   // int_0^z correction
  double extended_value(double z) const;   // phi with linear extension past the cut
  double extended_derivative(double z) const;
  double extended_primitive(double z) const;
  double corr_density(double s) const;     // smoothed floor excess at s

  PhiSpec base_;
  double R_ = 0.0;
  double m_R_ = 0.0;
  double M_R_ = 0.0;
  double eps_ = 0.0;
  double z_cut_ = 0.0;
  double slope_pos_ = 0.0, slope_neg_ = 0.0;  // phi'(+-z_cut)
  double val_pos_ = 0.0, val_neg_ = 0.0;      // phi(+-z_cut)
  double prim_pos_ = 0.0, prim_neg_ = 0.0;    // Phi(+-z_cut)

  // correction tables on [0, z_cut] (positive side; negative side by parity
  // for symmetric bases, separate tables otherwise)
  struct Side {
    double h = 0.0;
    std::vector<double> c;   // correction at nodes
    std::vector<double> ci;  // cumulative integral of the interpolated c
  };
  Side pos_, neg_;
  bool symmetric_ = true;

  double side_correction(const Side& s, double z) const;
  double side_correction_int(const Side& s, double z) const;
};

RegularizedPhi regularize(const PhiSpec& spec, double R);

/// Reaction terms. For the coupled biofilm system (u = biomass, v = nutrient):
///   f(u,v) = -K2 u + K3 u v / (K4 + v),   g(u,v) = -K1 u v / (K4 + v).
/// scalar_decay: f(u) = -lambda u (g unused).
struct ReactionSpec {
  enum class Kind { scalar_decay, monod, custom };

  Kind kind = Kind::scalar_decay;
  double lambda = 0.0;
  double K1 = 0.0, K2 = 0.0, K3 = 0.0, K4 = 1.0;
  double d1 = 1.0, d2 = 1.0;  // diffusion multipliers (v resp. u) in the coupled system
  double lipschitz_L = 0.0;

  std::function<double(double, double)> custom_f, custom_g;  // (u, v)

  static ReactionSpec scalar_decay(double lambda);
  static ReactionSpec monod(double K1, double K2, double K3, double K4, double d1 = 1.0,
                            double d2 = 1.0);
  static ReactionSpec custom(std::function<double(double, double)> f,
                             std::function<double(double, double)> g, double lipschitz_L);

  struct Value {
    double f = 0.0;
    double g = 0.0;
  };
  /// Requires u in the admissible range and v in [0,1]; throws std::domain_error.
  Value eval(double u, double v = 0.0) const;
  /// As eval, but arguments clamped into range (Lipschitz extension used by
  /// the implicit solver while Newton iterates may be slightly out of range).
  Value eval_clamped(double u, double v = 0.0) const;

  double f_u(double u, double v = 0.0) const;
  double f_v(double u, double v = 0.0) const;
  double g_u(double u, double v = 0.0) const;
  double g_v(double u, double v = 0.0) const;

  double f_sup() const;  // sup |f| over the admissible range
  void validate() const;
};

/// Analytic Lipschitz constant: lambda for scalar_decay,
/// max(K2+K3, K1) + max(K3, K1)/K4 for monod, sampled sup for custom.
double lipschitz_bound(const ReactionSpec& spec);

}  // namespace pmrd
