#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "vldp/grid.hpp"
#include "vldp/kernel.hpp"

namespace vldp {

// Closed registry of parametric coefficient families. Keeping the registry
// closed makes configs declarative and the optimizer's smoothness
// assumptions auditable.
enum class FnFamily {
  // U: R -> [0, inf)
  Identity,       // x
  PowerAbs,       // |x - center|^kappa, kappa in (0,1]
  Square,         // x^2
  Constant,       // level
  // sigma: R+ -> (0, inf)
  ShiftedPower,   // sigma0 (1 + x_+^beta)
  Affine,         // sigma0 (1 + b x)
  // drift b-bar
  Zero,           // 0
  MeanReverting,  // kappa (theta - x)
  AffineDrift,    // a + b x
  // dispersion sigma-bar: values clamped to [0, inf)
  SquareRoot,     // sqrt(x_+)
  PowerFrac,      // x_+^p, p in [1/2, 1)
  AffinePositive, // max(a + b x, 0), a > 0, b >= 0
};

// One coefficient function: a family tag plus up to two parameters whose
// meaning depends on the family (documented per constructor below).
struct FunctionSpec {
  FnFamily family = FnFamily::Constant;
  double a = 0.0;
  double b = 0.0;

  bool operator==(const FunctionSpec&) const = default;

  static FunctionSpec identity() { return {FnFamily::Identity, 0, 0}; }
  static FunctionSpec power_abs(double kappa, double center) { return {FnFamily::PowerAbs, kappa, center}; }
  static FunctionSpec square() { return {FnFamily::Square, 0, 0}; }
  static FunctionSpec constant(double level) { return {FnFamily::Constant, level, 0}; }
  static FunctionSpec shifted_power(double sigma0, double beta) { return {FnFamily::ShiftedPower, sigma0, beta}; }
  static FunctionSpec affine_sigma(double sigma0, double b = 1.0) { return {FnFamily::Affine, sigma0, b}; }
  static FunctionSpec zero() { return {FnFamily::Zero, 0, 0}; }
  static FunctionSpec mean_reverting(double kappa, double theta) { return {FnFamily::MeanReverting, kappa, theta}; }
  static FunctionSpec affine_drift(double a, double b) { return {FnFamily::AffineDrift, a, b}; }
  static FunctionSpec square_root() { return {FnFamily::SquareRoot, 0, 0}; }
  static FunctionSpec power_frac(double p) { return {FnFamily::PowerFrac, p, 0}; }
  static FunctionSpec affine_positive(double a, double b) { return {FnFamily::AffinePositive, a, b}; }
};

std::string family_name(FnFamily f);

// Total on R for every family: fractional powers clamp negative bases to 0
// before exponentiation, and dispersion families clamp their value at 0.
double eval_function(const FunctionSpec& spec, double x);

// d/dx of eval_function where it exists; one-sided 0 across clamped regions.
double eval_derivative(const FunctionSpec& spec, double x);

// Full model description. Immutable after construction; safe to share
// across parallel workers.
struct ModelSpec {
  KernelSpec kernel;
  FunctionSpec u_fn = FunctionSpec::identity();
  FunctionSpec sigma_fn = FunctionSpec::constant(0.2);
  FunctionSpec drift_fn = FunctionSpec::zero();
  FunctionSpec disp_fn = FunctionSpec::square_root();
  double v0 = 0.04;
  double rho = 0.0;
  double horizon = 1.0;

  bool operator==(const ModelSpec&) const = default;

  double rho_bar() const;

  // Driftless square-root driver with U = id and shifted-power sigma:
  // the scaling special case. Drift at zero vanishes there, which the
  // general assumptions would otherwise reject.
  bool is_scaling_special_case() const;
  // U(x) = x^2, unit constant dispersion, zero drift, v0 = 0: the control
  // map reduces to the identity and the Taylor expansion of the rate
  // function near 0 is available in closed form.
  bool is_taylor_special_case() const;

  // True when disp_fn requires a nonnegative state (square-root / fractional
  // power): the ODE and simulation schemes then truncate at 0.
  bool needs_truncation() const;
};

struct ValidationCheck {
  enum class Status { Pass, Fail, Special };
  std::string name;
  Status status;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool scaling_special_case = false;
  bool taylor_special_case = false;

  bool ok() const;
  std::string to_string() const;
};

// Reports each model assumption as pass / fail / flagged-special-case.
// Never mutates the spec.
ValidationReport validate_spec(const ModelSpec& spec);

// Flat key-value config format. Recognised keys:
//   kernel.type kernel.H kernel.delta kernel.lambda kernel.level
//   u.family u.kappa u.level
//   sigma.family sigma.sigma0 sigma.beta sigma.b
//   drift.family drift.kappa drift.theta drift.a drift.b
//   disp.family disp.p disp.level disp.a disp.b
//   v0 rho T
// Unknown keys are an error.
ModelSpec parse_config(std::istream& in);
ModelSpec parse_config_file(const std::string& path);
ModelSpec parse_config_string(const std::string& text);

// Canonical text form; parse_config_string(serialize_config(s)) == s.
std::string serialize_config(const ModelSpec& spec);

}  // namespace vldp
