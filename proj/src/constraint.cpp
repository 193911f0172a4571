// Copyright 2026 The ACIL Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "acil/constraint.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <unordered_set>

namespace acil {

namespace {

constexpr double kFeasTol = 1e-9;

double cap_slack(double cap) { return kFeasTol * std::max(1.0, cap); }

void check_dims(const Vector& action, const Vector& state,
                const ConstraintSpec& spec) {
  switch (spec.family) {
    case ConstraintFamily::kBox:
      if (action.size() != spec.box_half_width.size())
        throw ConfigError("constraint: action dimension " +
                          std::to_string(action.size()) +
                          " does not match box spec of dimension " +
                          std::to_string(spec.box_half_width.size()));
      break;
    case ConstraintFamily::kL2Groups:
      for (const auto& g : spec.groups)
        for (int idx : g.indices)
          if (idx < 0 || idx >= action.size())
            throw ConfigError("constraint: l2 group index " +
                              std::to_string(idx) +
                              " out of range for action dimension " +
                              std::to_string(action.size()));
      break;
    case ConstraintFamily::kWeightedAbsSum:
    case ConstraintFamily::kPositivePartSum:
      if (static_cast<int>(spec.state_index_map.size()) != action.size())
        throw ConfigError(
            "constraint: state index map size does not match action "
            "dimension");
      for (int idx : spec.state_index_map)
        if (idx < 0 || idx >= state.size())
          throw ConfigError("constraint: state index " + std::to_string(idx) +
                            " out of range for state dimension " +
                            std::to_string(state.size()));
      break;
    case ConstraintFamily::kUnconstrained:
      break;
  }
}

Vector weights_from_state(const Vector& state, const ConstraintSpec& spec) {
  Vector w(spec.state_index_map.size());
  for (size_t i = 0; i < spec.state_index_map.size(); ++i)
    w[static_cast<int>(i)] = state[spec.state_index_map[i]];
  return w;
}

// Projection onto { x : sum_i w_i |x_i| <= cap }, w_i >= 0, by
// soft-thresholding: x_i = sign(a_i) max(|a_i| - lambda w_i, 0) with the
// KKT multiplier lambda located among the breakpoints |a_i| / w_i.
Vector project_weighted_l1(const Vector& a, const Vector& w_raw, double cap) {
  const int n = static_cast<int>(a.size());
  Vector w = w_raw.cwiseAbs();
  std::vector<double> breakpoints;
  breakpoints.reserve(n);
  for (int i = 0; i < n; ++i)
    if (w[i] > 0.0) breakpoints.push_back(std::abs(a[i]) / w[i]);
  std::sort(breakpoints.begin(), breakpoints.end());

  // phi(lambda) = sum_i w_i max(|a_i| - lambda w_i, 0) is piecewise linear
  // and decreasing; find the segment where it crosses cap.
  auto phi = [&](double lambda) {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      s += w[i] * std::max(std::abs(a[i]) - lambda * w[i], 0.0);
    return s;
  };

  double lo = 0.0;
  double hi = breakpoints.empty() ? 0.0 : breakpoints.back();
  for (double b : breakpoints) {
    if (phi(b) <= cap) {
      hi = b;
      break;
    }
    lo = b;
  }
  // Linear on [lo, hi]: phi(lambda) = phi(lo) + slope * (lambda - lo) with
  // slope = -sum of w_i^2 over the dims active on the segment. Activity is
  // decided at the segment midpoint; at the endpoints a just-thresholded
  // dimension can flip sides through rounding alone.
  double mid = 0.5 * (lo + hi);
  double slope = 0.0;
  for (int i = 0; i < n; ++i)
    if (w[i] > 0.0 && std::abs(a[i]) - mid * w[i] > 0.0) slope -= w[i] * w[i];
  double lambda = hi;
  if (slope < 0.0) lambda = lo + (cap - phi(lo)) / slope;
  lambda = std::clamp(lambda, lo, hi);

  Vector x(n);
  for (int i = 0; i < n; ++i) {
    double mag = std::max(std::abs(a[i]) - lambda * w[i], 0.0);
    x[i] = (a[i] < 0.0 ? -mag : mag);
  }
  return x;
}

}  // namespace

ConstraintSpec ConstraintSpec::unconstrained() { return ConstraintSpec{}; }

ConstraintSpec ConstraintSpec::box(const Vector& half_width) {
  ConstraintSpec s;
  s.family = ConstraintFamily::kBox;
  s.box_half_width = half_width;
  return s;
}

ConstraintSpec ConstraintSpec::box_uniform(int action_dim, double half_width) {
  return box(Vector::Constant(action_dim, half_width));
}

ConstraintSpec ConstraintSpec::l2_groups(std::vector<L2Group> groups) {
  ConstraintSpec s;
  s.family = ConstraintFamily::kL2Groups;
  s.groups = std::move(groups);
  return s;
}

ConstraintSpec ConstraintSpec::weighted_abs_sum(
    std::vector<int> state_index_map, double cap) {
  ConstraintSpec s;
  s.family = ConstraintFamily::kWeightedAbsSum;
  s.state_index_map = std::move(state_index_map);
  s.cap = cap;
  return s;
}

ConstraintSpec ConstraintSpec::positive_part_sum(
    std::vector<int> state_index_map, double cap) {
  ConstraintSpec s;
  s.family = ConstraintFamily::kPositivePartSum;
  s.state_index_map = std::move(state_index_map);
  s.cap = cap;
  return s;
}

void ConstraintSpec::validate(int state_dim, int action_dim) const {
  switch (family) {
    case ConstraintFamily::kUnconstrained:
      return;
    case ConstraintFamily::kBox:
      if (box_half_width.size() != action_dim)
        throw ConfigError("constraint: box spec has " +
                          std::to_string(box_half_width.size()) +
                          " widths, action dimension is " +
                          std::to_string(action_dim));
      if ((box_half_width.array() <= 0.0).any())
        throw ConfigError("constraint: box half-widths must be positive");
      return;
    case ConstraintFamily::kL2Groups: {
      if (groups.empty())
        throw ConfigError("constraint: l2 spec needs at least one group");
      std::unordered_set<int> seen;
      for (const auto& g : groups) {
        if (g.cap <= 0.0)
          throw ConfigError("constraint: l2 group caps must be positive");
        if (g.indices.empty())
          throw ConfigError("constraint: empty l2 index group");
        for (int idx : g.indices) {
          if (idx < 0 || idx >= action_dim)
            throw ConfigError("constraint: l2 index " + std::to_string(idx) +
                              " out of range");
          if (!seen.insert(idx).second)
            throw ConfigError("constraint: l2 groups must be disjoint");
        }
      }
      return;
    }
    case ConstraintFamily::kWeightedAbsSum:
    case ConstraintFamily::kPositivePartSum:
      if (cap <= 0.0) throw ConfigError("constraint: cap must be positive");
      if (static_cast<int>(state_index_map.size()) != action_dim)
        throw ConfigError("constraint: state index map has " +
                          std::to_string(state_index_map.size()) +
                          " entries, action dimension is " +
                          std::to_string(action_dim));
      for (int idx : state_index_map)
        if (idx < 0 || idx >= state_dim)
          throw ConfigError("constraint: state index " + std::to_string(idx) +
                            " out of range for state dimension " +
                            std::to_string(state_dim));
      return;
  }
}

bool is_feasible(const Vector& action, const Vector& state,
                 const ConstraintSpec& spec) {
  check_dims(action, state, spec);
  switch (spec.family) {
    case ConstraintFamily::kUnconstrained:
      return true;
    case ConstraintFamily::kBox: {
      for (int i = 0; i < action.size(); ++i) {
        double b = spec.box_half_width[i];
        if (std::abs(action[i]) > b + cap_slack(b)) return false;
      }
      return true;
    }
    case ConstraintFamily::kL2Groups: {
      for (const auto& g : spec.groups) {
        double sq = 0.0;
        for (int idx : g.indices) sq += action[idx] * action[idx];
        if (sq > g.cap + cap_slack(g.cap)) return false;
      }
      return true;
    }
    case ConstraintFamily::kWeightedAbsSum: {
      Vector w = weights_from_state(state, spec);
      double s = (w.array() * action.array()).abs().sum();
      return s <= spec.cap + cap_slack(spec.cap);
    }
    case ConstraintFamily::kPositivePartSum: {
      Vector w = weights_from_state(state, spec);
      double s = (w.array() * action.array()).max(0.0).sum();
      return s <= spec.cap + cap_slack(spec.cap);
    }
  }
  return false;
}

Vector project(const Vector& action, const Vector& state,
               const ConstraintSpec& spec) {
  if (is_feasible(action, state, spec)) return action;
  switch (spec.family) {
    case ConstraintFamily::kUnconstrained:
      return action;
    case ConstraintFamily::kBox:
      return action.cwiseMin(spec.box_half_width)
          .cwiseMax(-spec.box_half_width);
    case ConstraintFamily::kL2Groups: {
      Vector out = action;
      for (const auto& g : spec.groups) {
        double sq = 0.0;
        for (int idx : g.indices) sq += out[idx] * out[idx];
        if (sq > g.cap) {
          double scale = std::sqrt(g.cap / sq);
          for (int idx : g.indices) out[idx] *= scale;
        }
      }
      return out;
    }
    case ConstraintFamily::kWeightedAbsSum:
      return project_weighted_l1(action, weights_from_state(state, spec),
                                 spec.cap);
    case ConstraintFamily::kPositivePartSum: {
      // Surrogate projection: shrink radially toward 0 (always feasible
      // since cap > 0) until the cap holds. Bisection on the shrink factor.
      Vector w = weights_from_state(state, spec);
      auto value = [&](double t) {
        return (w.array() * (t * action).array()).max(0.0).sum();
      };
      double lo = 0.0, hi = 1.0;
      for (int it = 0; it < 80; ++it) {
        double mid = 0.5 * (lo + hi);
        if (value(mid) <= spec.cap)
          lo = mid;
        else
          hi = mid;
      }
      return lo * action;
    }
  }
  return action;
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  return parts;
}

double parse_real(const std::string& text, const std::string& what) {
  try {
    size_t pos = 0;
    double v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("constraint: expected a real number for " + what +
                      ", got '" + text + "'");
  }
}

std::vector<int> parse_index_list(const std::string& text) {
  if (text.size() < 2 || text.front() != '[' || text.back() != ']')
    throw ConfigError("constraint: expected an index list like [0,1,2], got '" +
                      text + "'");
  std::vector<int> out;
  for (const auto& tok : split(text.substr(1, text.size() - 2), ',')) {
    try {
      out.push_back(std::stoi(tok));
    } catch (const std::exception&) {
      throw ConfigError("constraint: bad index '" + tok + "'");
    }
  }
  return out;
}

// 'v' / 'w' name the trailing velocity block of the state: action dim i
// reads its weight from s[d_s - d_a + i].
std::vector<int> velocity_index_map(int state_dim, int action_dim) {
  std::vector<int> map(action_dim);
  for (int i = 0; i < action_dim; ++i) map[i] = state_dim - action_dim + i;
  return map;
}

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_index_list(const std::vector<int>& idx) {
  std::string out = "[";
  for (size_t i = 0; i < idx.size(); ++i) {
    if (i > 0) out += ",";
    out += std::to_string(idx[i]);
  }
  return out + "]";
}

}  // namespace

ConstraintSpec parse_constraint(const std::string& text, int state_dim,
                                int action_dim) {
  if (text == "none" || text == "unconstrained")
    return ConstraintSpec::unconstrained();

  auto colon = text.find(':');
  std::string family = text.substr(0, colon);
  std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);

  ConstraintSpec spec;
  if (family == "box") {
    auto widths = split(rest, ',');
    if (widths.empty()) throw ConfigError("constraint: box needs a width");
    Vector hw(action_dim);
    if (widths.size() == 1) {
      hw.setConstant(parse_real(widths[0], "box width"));
    } else if (static_cast<int>(widths.size()) == action_dim) {
      for (int i = 0; i < action_dim; ++i)
        hw[i] = parse_real(widths[i], "box width");
    } else {
      throw ConfigError("constraint: box expects 1 or " +
                        std::to_string(action_dim) + " widths");
    }
    spec = ConstraintSpec::box(hw);
  } else if (family == "l2") {
    std::vector<L2Group> groups;
    for (const auto& gtext : split(rest, ';')) {
      auto close = gtext.find(']');
      if (close == std::string::npos || close + 1 >= gtext.size() ||
          gtext[close + 1] != ':')
        throw ConfigError("constraint: l2 group must look like [0,1,2]:0.5");
      L2Group g;
      g.indices = parse_index_list(gtext.substr(0, close + 1));
      g.cap = parse_real(gtext.substr(close + 2), "l2 cap");
      groups.push_back(std::move(g));
    }
    spec = ConstraintSpec::l2_groups(std::move(groups));
  } else if (family == "wabs" || family == "ppsum") {
    auto sep = rest.rfind(':');
    if (sep == std::string::npos)
      throw ConfigError("constraint: " + family +
                        " must look like " + family + ":v:0.5");
    std::string map_text = rest.substr(0, sep);
    double cap = parse_real(rest.substr(sep + 1), family + " cap");
    std::vector<int> map;
    if (map_text == "v" || map_text == "w")
      map = velocity_index_map(state_dim, action_dim);
    else
      map = parse_index_list(map_text);
    spec = family == "wabs"
               ? ConstraintSpec::weighted_abs_sum(std::move(map), cap)
               : ConstraintSpec::positive_part_sum(std::move(map), cap);
  } else {
    throw ConfigError("unknown constraint family '" + family + "'");
  }
  spec.validate(state_dim, action_dim);
  return spec;
}

std::string format_constraint(const ConstraintSpec& spec, int state_dim,
                              int action_dim) {
  switch (spec.family) {
    case ConstraintFamily::kUnconstrained:
      return "none";
    case ConstraintFamily::kBox: {
      bool uniform = (spec.box_half_width.array() ==
                      spec.box_half_width[0]).all();
      if (uniform) return "box:" + format_real(spec.box_half_width[0]);
      std::string out = "box:";
      for (int i = 0; i < spec.box_half_width.size(); ++i) {
        if (i > 0) out += ",";
        out += format_real(spec.box_half_width[i]);
      }
      return out;
    }
    case ConstraintFamily::kL2Groups: {
      std::string out = "l2:";
      for (size_t i = 0; i < spec.groups.size(); ++i) {
        if (i > 0) out += ";";
        out += format_index_list(spec.groups[i].indices) + ":" +
               format_real(spec.groups[i].cap);
      }
      return out;
    }
    case ConstraintFamily::kWeightedAbsSum:
    case ConstraintFamily::kPositivePartSum: {
      std::string family =
          spec.family == ConstraintFamily::kWeightedAbsSum ? "wabs" : "ppsum";
      std::string tag =
          spec.family == ConstraintFamily::kWeightedAbsSum ? "v" : "w";
      std::string map =
          spec.state_index_map == velocity_index_map(state_dim, action_dim)
              ? tag
              : format_index_list(spec.state_index_map);
      return family + ":" + map + ":" + format_real(spec.cap);
    }
  }
  return "none";
}

}  // namespace acil
