#include "vldp/model.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace vldp {

namespace {

double pos(double x) { return x > 0.0 ? x : 0.0; }

}  // namespace

std::string family_name(FnFamily f) {
  switch (f) {
    case FnFamily::Identity: return "identity";
    case FnFamily::PowerAbs: return "power";
    case FnFamily::Square: return "square";
    case FnFamily::Constant: return "constant";
    case FnFamily::ShiftedPower: return "shifted-power";
    case FnFamily::Affine: return "affine";
    case FnFamily::Zero: return "zero";
    case FnFamily::MeanReverting: return "mean-reverting";
    case FnFamily::AffineDrift: return "affine";
    case FnFamily::SquareRoot: return "square-root";
    case FnFamily::PowerFrac: return "power";
    case FnFamily::AffinePositive: return "affine-positive";
  }
  return "?";
}

double eval_function(const FunctionSpec& spec, double x) {
  switch (spec.family) {
    case FnFamily::Identity: return x;
    case FnFamily::PowerAbs: return std::pow(std::abs(x - spec.b), spec.a);
    case FnFamily::Square: return x * x;
    case FnFamily::Constant: return spec.a;
    case FnFamily::ShiftedPower: return spec.a * (1.0 + std::pow(pos(x), spec.b));
    case FnFamily::Affine: return spec.a * (1.0 + spec.b * x);
    case FnFamily::Zero: return 0.0;
    case FnFamily::MeanReverting: return spec.a * (spec.b - x);
    case FnFamily::AffineDrift: return spec.a + spec.b * x;
    case FnFamily::SquareRoot: return std::sqrt(pos(x));
    case FnFamily::PowerFrac: return std::pow(pos(x), spec.a);
    case FnFamily::AffinePositive: return pos(spec.a + spec.b * x);
  }
  throw config_error("unknown function family");
}

double eval_derivative(const FunctionSpec& spec, double x) {
  switch (spec.family) {
    case FnFamily::Identity: return 1.0;
    case FnFamily::PowerAbs: {
      const double d = x - spec.b;
      if (d == 0.0) return 0.0;
      return spec.a * std::pow(std::abs(d), spec.a - 1.0) * (d > 0 ? 1.0 : -1.0);
    }
    case FnFamily::Square: return 2.0 * x;
    case FnFamily::Constant: return 0.0;
    case FnFamily::ShiftedPower:
      if (x <= 0.0) return 0.0;
      return spec.a * spec.b * std::pow(x, spec.b - 1.0);
    case FnFamily::Affine: return spec.a * spec.b;
    case FnFamily::Zero: return 0.0;
    case FnFamily::MeanReverting: return -spec.a;
    case FnFamily::AffineDrift: return spec.b;
    case FnFamily::SquareRoot:
      if (x <= 0.0) return 0.0;
      return 0.5 / std::sqrt(x);
    case FnFamily::PowerFrac:
      if (x <= 0.0) return 0.0;
      return spec.a * std::pow(x, spec.a - 1.0);
    case FnFamily::AffinePositive:
      return (spec.a + spec.b * x) > 0.0 ? spec.b : 0.0;
  }
  throw config_error("unknown function family");
}

double ModelSpec::rho_bar() const { return std::sqrt(1.0 - rho * rho); }

bool ModelSpec::is_scaling_special_case() const {
  return drift_fn.family == FnFamily::Zero && disp_fn.family == FnFamily::SquareRoot &&
         u_fn.family == FnFamily::Identity && sigma_fn.family == FnFamily::ShiftedPower;
}

bool ModelSpec::is_taylor_special_case() const {
  return drift_fn.family == FnFamily::Zero && disp_fn.family == FnFamily::Constant &&
         disp_fn.a == 1.0 && u_fn.family == FnFamily::Square && v0 == 0.0;
}

bool ModelSpec::needs_truncation() const {
  return disp_fn.family == FnFamily::SquareRoot || disp_fn.family == FnFamily::PowerFrac;
}

bool ValidationReport::ok() const {
  for (const auto& c : checks)
    if (c.status == ValidationCheck::Status::Fail) return false;
  return true;
}

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    const char* s = c.status == ValidationCheck::Status::Pass ? "pass"
                    : c.status == ValidationCheck::Status::Fail ? "FAIL"
                                                                : "special";
    os << s << "  " << c.name;
    if (!c.detail.empty()) os << " - " << c.detail;
    os << "\n";
  }
  if (scaling_special_case) os << "flag  special_scaling_case\n";
  if (taylor_special_case) os << "flag  special_taylor_case\n";
  return os.str();
}

ValidationReport validate_spec(const ModelSpec& spec) {
  using Status = ValidationCheck::Status;
  ValidationReport rep;
  rep.scaling_special_case = spec.is_scaling_special_case();
  rep.taylor_special_case = spec.is_taylor_special_case();
  const bool special = rep.scaling_special_case || rep.taylor_special_case;

  auto add = [&rep](const std::string& name, Status st, const std::string& detail = "") {
    rep.checks.push_back({name, st, detail});
  };

  // Kernel: all registered families have finite sup_t int K(t,.)^2 for the
  // admissible parameter ranges.
  {
    bool ok = true;
    std::string detail;
    switch (spec.kernel.family) {
      case KernelSpec::Family::Fractional:
      case KernelSpec::Family::ShiftedFractional:
        ok = spec.kernel.hurst > 0.0 && spec.kernel.hurst < 1.0;
        detail = ok ? "H in (0,1)" : "H outside (0,1)";
        if (spec.kernel.family == KernelSpec::Family::ShiftedFractional && spec.kernel.shift <= 0.0) {
          ok = false;
          detail = "shift must be positive";
        }
        break;
      case KernelSpec::Family::Exponential:
        ok = spec.kernel.decay >= 0.0;
        detail = ok ? "" : "decay must be nonnegative";
        break;
      case KernelSpec::Family::Constant:
        ok = std::isfinite(spec.kernel.level);
        break;
    }
    add("kernel L2 bound", ok ? Status::Pass : Status::Fail, detail);
  }

  add("correlation in (-1,1)",
      (spec.rho > -1.0 && spec.rho < 1.0) ? Status::Pass : Status::Fail);

  // v0 > 0 in general; v0 = 0 only in the flagged degenerate setup.
  if (spec.v0 > 0.0)
    add("initial level positive", Status::Pass);
  else if (spec.v0 == 0.0 && rep.taylor_special_case)
    add("initial level positive", Status::Special, "v0 = 0 allowed in this special case");
  else
    add("initial level positive", Status::Fail, "v0 must be positive");

  add("horizon positive", spec.horizon > 0.0 ? Status::Pass : Status::Fail);

  // sigma strictly positive on [0, inf).
  {
    bool ok = true;
    switch (spec.sigma_fn.family) {
      case FnFamily::ShiftedPower: ok = spec.sigma_fn.a > 0.0 && spec.sigma_fn.b > 0.0; break;
      case FnFamily::Constant: ok = spec.sigma_fn.a > 0.0; break;
      case FnFamily::Affine: ok = spec.sigma_fn.a > 0.0 && spec.sigma_fn.b >= 0.0; break;
      default: ok = false; break;
    }
    add("spot-vol map positive", ok ? Status::Pass : Status::Fail);
  }

  // U nonnegative: every registered U family is nonnegative by form.
  {
    bool ok = spec.u_fn.family == FnFamily::Identity || spec.u_fn.family == FnFamily::PowerAbs ||
              spec.u_fn.family == FnFamily::Square || spec.u_fn.family == FnFamily::Constant;
    if (spec.u_fn.family == FnFamily::Constant) ok = spec.u_fn.a >= 0.0;
    if (spec.u_fn.family == FnFamily::PowerAbs) ok = spec.u_fn.a > 0.0 && spec.u_fn.a <= 1.0;
    add("driver map nonnegative", ok ? Status::Pass : Status::Fail);
  }

  // Drift-at-zero condition: b(0) > 0, or dispersion bounded away from 0,
  // or one of the flagged special cases. The square-root family satisfies
  // the Yamada-Watanabe modulus with gamma(u) = sqrt(u); this is recorded
  // as documentation only and never evaluated.
  {
    double drift_at_zero = eval_function(spec.drift_fn, 0.0);
    bool disp_bounded_away =
        (spec.disp_fn.family == FnFamily::Constant && spec.disp_fn.a > 0.0) ||
        (spec.disp_fn.family == FnFamily::AffinePositive && spec.disp_fn.a > 0.0);
    if (drift_at_zero > 0.0 || disp_bounded_away)
      add("drift-at-zero condition", Status::Pass);
    else if (special)
      add("drift-at-zero condition", Status::Special, "degenerate case taken as-is");
    else
      add("drift-at-zero condition", Status::Fail,
          "drift at 0 must be positive unless dispersion is bounded away from 0");
  }

  // Dispersion parameter ranges.
  {
    bool ok = true;
    std::string detail;
    switch (spec.disp_fn.family) {
      case FnFamily::SquareRoot: break;
      case FnFamily::PowerFrac:
        ok = spec.disp_fn.a >= 0.5 && spec.disp_fn.a < 1.0;
        detail = ok ? "" : "exponent must lie in [1/2, 1)";
        break;
      case FnFamily::Constant:
        ok = spec.disp_fn.a >= 0.0;
        break;
      case FnFamily::AffinePositive:
        ok = spec.disp_fn.a > 0.0 && spec.disp_fn.b >= 0.0;
        detail = ok ? "" : "requires a > 0, b >= 0";
        break;
      default:
        ok = false;
        break;
    }
    add("dispersion family admissible", ok ? Status::Pass : Status::Fail, detail);
  }

  return rep;
}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

const std::set<std::string> kKnownKeys = {
    "kernel.type", "kernel.H", "kernel.delta", "kernel.lambda", "kernel.level",
    "u.family", "u.kappa", "u.level",
    "sigma.family", "sigma.sigma0", "sigma.beta", "sigma.b",
    "drift.family", "drift.kappa", "drift.theta", "drift.a", "drift.b",
    "disp.family", "disp.p", "disp.level", "disp.a", "disp.b",
    "v0", "rho", "T",
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_number(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size()) throw config_error("");
    return x;
  } catch (...) {
    throw config_error("config key '" + key + "': not a number: '" + v + "'");
  }
}

double require(const std::map<std::string, std::string>& kv, const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) throw config_error("config key '" + key + "' is required here");
  return to_number(key, it->second);
}

double optional(const std::map<std::string, std::string>& kv, const std::string& key, double dflt) {
  auto it = kv.find(key);
  if (it == kv.end()) return dflt;
  return to_number(key, it->second);
}

std::string require_str(const std::map<std::string, std::string>& kv, const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) throw config_error("config key '" + key + "' is required");
  return it->second;
}

}  // namespace

ModelSpec parse_config(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error("config line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!kKnownKeys.count(key))
      throw config_error("unknown config key '" + key + "'");
    if (kv.count(key)) throw config_error("duplicate config key '" + key + "'");
    kv[key] = value;
  }

  ModelSpec spec;

  const std::string ktype = require_str(kv, "kernel.type");
  if (ktype == "fractional") {
    spec.kernel.family = KernelSpec::Family::Fractional;
    spec.kernel.hurst = require(kv, "kernel.H");
  } else if (ktype == "shifted-fractional") {
    spec.kernel.family = KernelSpec::Family::ShiftedFractional;
    spec.kernel.hurst = require(kv, "kernel.H");
    spec.kernel.shift = require(kv, "kernel.delta");
  } else if (ktype == "exponential") {
    spec.kernel.family = KernelSpec::Family::Exponential;
    spec.kernel.decay = require(kv, "kernel.lambda");
  } else if (ktype == "constant") {
    spec.kernel.family = KernelSpec::Family::Constant;
    spec.kernel.level = optional(kv, "kernel.level", 1.0);
  } else {
    throw config_error("unknown kernel.type '" + ktype + "'");
  }

  spec.v0 = require(kv, "v0");
  spec.rho = require(kv, "rho");
  spec.horizon = require(kv, "T");

  const std::string ufam = require_str(kv, "u.family");
  if (ufam == "identity") spec.u_fn = FunctionSpec::identity();
  else if (ufam == "power") spec.u_fn = FunctionSpec::power_abs(require(kv, "u.kappa"), spec.v0);
  else if (ufam == "square") spec.u_fn = FunctionSpec::square();
  else if (ufam == "constant") spec.u_fn = FunctionSpec::constant(optional(kv, "u.level", 1.0));
  else throw config_error("unknown u.family '" + ufam + "'");

  const std::string sfam = require_str(kv, "sigma.family");
  if (sfam == "shifted-power")
    spec.sigma_fn = FunctionSpec::shifted_power(require(kv, "sigma.sigma0"), require(kv, "sigma.beta"));
  else if (sfam == "constant")
    spec.sigma_fn = FunctionSpec::constant(require(kv, "sigma.sigma0"));
  else if (sfam == "affine")
    spec.sigma_fn = FunctionSpec::affine_sigma(require(kv, "sigma.sigma0"), optional(kv, "sigma.b", 1.0));
  else
    throw config_error("unknown sigma.family '" + sfam + "'");

  const std::string dfam = require_str(kv, "drift.family");
  if (dfam == "zero") spec.drift_fn = FunctionSpec::zero();
  else if (dfam == "mean-reverting")
    spec.drift_fn = FunctionSpec::mean_reverting(require(kv, "drift.kappa"), require(kv, "drift.theta"));
  else if (dfam == "affine")
    spec.drift_fn = FunctionSpec::affine_drift(require(kv, "drift.a"), require(kv, "drift.b"));
  else
    throw config_error("unknown drift.family '" + dfam + "'");

  const std::string pfam = require_str(kv, "disp.family");
  if (pfam == "square-root") spec.disp_fn = FunctionSpec::square_root();
  else if (pfam == "power") spec.disp_fn = FunctionSpec::power_frac(require(kv, "disp.p"));
  else if (pfam == "constant") spec.disp_fn = FunctionSpec::constant(optional(kv, "disp.level", 1.0));
  else if (pfam == "affine-positive")
    spec.disp_fn = FunctionSpec::affine_positive(require(kv, "disp.a"), require(kv, "disp.b"));
  else
    throw config_error("unknown disp.family '" + pfam + "'");

  return spec;
}

ModelSpec parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file '" + path + "'");
  return parse_config(in);
}

ModelSpec parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

namespace {

void put(std::ostringstream& os, const std::string& key, double v) {
  std::ostringstream num;
  num.precision(17);
  num << v;
  os << key << " = " << num.str() << "\n";
}

}  // namespace

std::string serialize_config(const ModelSpec& spec) {
  std::ostringstream os;
  os << "kernel.type = " << kernel_family_name(spec.kernel.family) << "\n";
  switch (spec.kernel.family) {
    case KernelSpec::Family::Fractional:
      put(os, "kernel.H", spec.kernel.hurst);
      break;
    case KernelSpec::Family::ShiftedFractional:
      put(os, "kernel.H", spec.kernel.hurst);
      put(os, "kernel.delta", spec.kernel.shift);
      break;
    case KernelSpec::Family::Exponential:
      put(os, "kernel.lambda", spec.kernel.decay);
      break;
    case KernelSpec::Family::Constant:
      put(os, "kernel.level", spec.kernel.level);
      break;
  }

  os << "u.family = " << family_name(spec.u_fn.family) << "\n";
  if (spec.u_fn.family == FnFamily::PowerAbs) put(os, "u.kappa", spec.u_fn.a);
  if (spec.u_fn.family == FnFamily::Constant) put(os, "u.level", spec.u_fn.a);

  os << "sigma.family = " << family_name(spec.sigma_fn.family) << "\n";
  put(os, "sigma.sigma0", spec.sigma_fn.a);
  if (spec.sigma_fn.family == FnFamily::ShiftedPower) put(os, "sigma.beta", spec.sigma_fn.b);
  if (spec.sigma_fn.family == FnFamily::Affine) put(os, "sigma.b", spec.sigma_fn.b);

  os << "drift.family = " << family_name(spec.drift_fn.family) << "\n";
  if (spec.drift_fn.family == FnFamily::MeanReverting) {
    put(os, "drift.kappa", spec.drift_fn.a);
    put(os, "drift.theta", spec.drift_fn.b);
  }
  if (spec.drift_fn.family == FnFamily::AffineDrift) {
    put(os, "drift.a", spec.drift_fn.a);
    put(os, "drift.b", spec.drift_fn.b);
  }

  os << "disp.family = " << family_name(spec.disp_fn.family) << "\n";
  if (spec.disp_fn.family == FnFamily::PowerFrac) put(os, "disp.p", spec.disp_fn.a);
  if (spec.disp_fn.family == FnFamily::Constant) put(os, "disp.level", spec.disp_fn.a);
  if (spec.disp_fn.family == FnFamily::AffinePositive) {
    put(os, "disp.a", spec.disp_fn.a);
    put(os, "disp.b", spec.disp_fn.b);
  }

  put(os, "v0", spec.v0);
  put(os, "rho", spec.rho);
  put(os, "T", spec.horizon);
  return os.str();
}

}  // namespace vldp
