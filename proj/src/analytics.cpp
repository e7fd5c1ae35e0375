#include "dynetrack/analytics.hpp"

#include <cmath>
#include <cstdio>

#include "dynetrack/constants.hpp"
#include "dynetrack/errors.hpp"

namespace dynetrack {

namespace {

void require_positive(double value, const char* what) {
  if (!(value > 0.0)) throw ConfigError(std::string(what) + " must be positive");
}

using Form = ScalingLaw::Form;
using Var = ScalingLaw::Variable;

ScalingLaw exact(double c, int num, int den, Var v) { return {Form::kExact, c, num, den, v, false}; }
ScalingLaw scaling(int num, int den, Var v, bool log = false) {
  return {Form::kScaling, 1.0, num, den, v, log};
}

}  // namespace

double mse_adaptive_coherent(double photon_number) {
  require_positive(photon_number, "N");
  return 1.0 / (2.0 * std::sqrt(photon_number));
}

double mse_heterodyne(double photon_number) {
  require_positive(photon_number, "N");
  return 1.0 / std::sqrt(2.0 * photon_number);
}

double mse_vs_gain(double chi, double kappa, double alpha) {
  require_positive(chi, "chi");
  return chi / (8.0 * alpha * alpha) + kappa / (2.0 * chi);
}

double gain_mismatch_threshold() { return 1.0 + std::sqrt(2.0); }

SqueezedMse mse_adaptive_squeezed(double s, double photon_number) {
  require_positive(photon_number, "N");
  if (!(s > 0.0 && s <= 1.0)) throw ConfigError("mse_adaptive_squeezed: S must lie in (0, 1]");
  const bool moderate = s >= kModerateSqueezingFactor * std::cbrt(1.0 / photon_number);
  return {std::sqrt(s) / (2.0 * std::sqrt(photon_number)), moderate};
}

double photons_per_coherence_time(double power, double omega, double kappa) {
  require_positive(power, "P");
  require_positive(omega, "omega");
  require_positive(kappa, "kappa");
  return power / (kHbar * omega * kappa);
}

ScalingEntry sql_table(Mode mode, Detection detection, Source source, Adaptivity adaptivity) {
  ScalingEntry e{mode, detection, source, adaptivity, {}, false};
  const bool adaptive = adaptivity == Adaptivity::kAdaptive;
  const bool coherent = source == Source::kCoherent;
  if (mode == Mode::kCW) {
    if (detection == Detection::kDyne) {
      if (coherent) {
        e.law = adaptive ? exact(0.5, 1, 2, Var::kN) : exact(0.71, 1, 2, Var::kN);
      } else if (adaptive) {
        e.law = scaling(2, 3, Var::kN);
        e.beats_sql = true;
      } else {
        e.law = exact(0.66, 1, 2, Var::kN);
      }
    } else if (coherent) {
      e.law = exact(1.0, 1, 2, Var::kN);
    }  // CW interferometric nonclassical stays unknown.
    return e;
  }
  if (detection == Detection::kDyne) {
    if (coherent) {
      e.law = adaptive ? exact(0.25, 1, 1, Var::kMeanPhotons) : exact(0.5, 1, 1, Var::kMeanPhotons);
    } else if (adaptive) {
      e.law = scaling(2, 1, Var::kMeanPhotons, true);
      e.beats_sql = true;
    } else {
      e.law = exact(0.25, 1, 1, Var::kMeanPhotons);
    }
  } else if (coherent) {
    e.law = exact(1.0, 1, 1, Var::kPhotons);
  } else if (adaptive) {
    e.law = scaling(2, 1, Var::kPhotons, true);
    e.law.form = Form::kConjectured;
    e.beats_sql = true;
  } else {
    e.law = scaling(1, 1, Var::kPhotons);
  }
  return e;
}

std::string to_string(const ScalingLaw& law) {
  if (law.form == Form::kUnknown) return "?";
  const char* sym = law.variable == Var::kN ? "N" : law.variable == Var::kMeanPhotons ? "nbar" : "n";
  std::string power;
  if (law.exponent_den == 1) {
    if (law.exponent_num != 1) power = "^" + std::to_string(law.exponent_num);
  } else if (law.exponent_den == 2 && law.exponent_num == 1) {
    power = "^0.5";
  } else {
    power = "^(" + std::to_string(law.exponent_num) + "/" + std::to_string(law.exponent_den) + ")";
  }
  std::string numerator;
  if (law.log_factor) {
    numerator = std::string("log(") + sym + ")";
  } else {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", law.form == Form::kExact ? law.constant : 1.0);
    numerator = buf;
  }
  const std::string body = numerator + "/" + sym + power;
  switch (law.form) {
    case Form::kScaling: return "~" + body;
    case Form::kConjectured: return "?~" + body;
    default: return body;
  }
}

void write_sql_table_csv(std::ostream& out) {
  out << "mode,adaptivity,dyne_coherent,dyne_nonclassical,interferometric_coherent,"
         "interferometric_nonclassical\n";
  constexpr std::array modes{Mode::kCW, Mode::kSingleShot};
  constexpr std::array adaptivities{Adaptivity::kAdaptive, Adaptivity::kNonadaptive};
  constexpr std::array detections{Detection::kDyne, Detection::kInterferometric};
  constexpr std::array sources{Source::kCoherent, Source::kNonclassical};
  for (Mode m : modes) {
    for (Adaptivity a : adaptivities) {
      out << (m == Mode::kCW ? "CW" : "single-shot") << ','
          << (a == Adaptivity::kAdaptive ? "adaptive" : "non-adaptive");
      for (Detection d : detections) {
        for (Source s : sources) {
          const ScalingEntry e = sql_table(m, d, s, a);
          const std::string cell = to_string(e.law);
          out << ',' << (e.beats_sql ? "_" + cell + "_" : cell);
        }
      }
      out << '\n';
    }
  }
}

}  // namespace dynetrack
