#pragma once

// Dilute-gas collision model. Particle a (mass m_a, temperature T_a) meets
// particle b (m_b, T_b) in one of two initial ensembles:
//
//   entangled  p_a = α_a k, p_b = α_b k with k ~ N(0, m_scale/γ) per
//              component, α = sqrt(γ T m / m_scale); the momenta are
//              collinear and each marginal is Maxwell-Boltzmann.
//   product    p_a, p_b independent Maxwell-Boltzmann draws.
//
// Each event is an elastic collision with a centre-of-mass scattering
// angle drawn from the configured angle law.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "entroflow/error.hpp"
#include "entroflow/parallel.hpp"
#include "entroflow/rng.hpp"

namespace entroflow::gas {

using Vec3 = Eigen::Vector3d;

enum class AngleLaw { Isotropic };
enum class Mode { Entangled, Product };

inline std::string to_string(Mode m) { return m == Mode::Entangled ? "entangled" : "product"; }

struct CollisionSpec {
  double m_a = 1.0;
  double m_b = 1.0;
  double t_a = 1.0;
  double t_b = 1.0;
  double gamma = 1.0;
  double m_scale = 1.0;
  std::optional<bool> flux_weighting = std::nullopt;  // unset: on for product, off for entangled
  AngleLaw angle_law = AngleLaw::Isotropic;

  void validate() const {
    for (double v : {m_a, m_b, t_a, t_b, gamma, m_scale})
      if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorCode::InvalidSpec, "gas parameters must be positive");
  }

  double alpha_a() const { return std::sqrt(gamma * t_a * m_a / m_scale); }
  double alpha_b() const { return std::sqrt(gamma * t_b * m_b / m_scale); }

  bool flux_for(Mode mode) const { return flux_weighting.value_or(mode == Mode::Product); }
};

/// x = [m_a/(m_a+m_b)] [(α_a+α_b)/α_a].
inline double x_parameter(const CollisionSpec& s) {
  s.validate();
  return s.m_a / (s.m_a + s.m_b) * (s.alpha_a() + s.alpha_b()) / s.alpha_a();
}

/// (m_a/m_b)(T_b/T_a); greater than one exactly when x > 1.
inline double reversal_ratio(const CollisionSpec& s) { return (s.m_a / s.m_b) * (s.t_b / s.t_a); }

/// ΔE_a / E_a for collinear incoming momenta: 4x(x-1) sin²(θ/2).
inline double fractional_gain(double x, double theta) {
  const double s = std::sin(0.5 * theta);
  return 4.0 * x * (x - 1.0) * s * s;
}

struct Collision {
  Vec3 p_a;
  Vec3 p_b;
  double de_a = 0.0;  // kinetic energy gained by a
};

/// Elastic collision: the relative momentum q = μ(v_a - v_b) is rotated by
/// polar angle θ and azimuth φ, measured in the frame (e1, e2, q̂) where e1
/// is q̂ × (unit axis of the smallest |q̂| component), normalized.
inline Collision collide(const Vec3& p_a, const Vec3& p_b, double m_a, double m_b, double theta, double azimuth) {
  if (!(m_a > 0.0) || !(m_b > 0.0)) throw Error(ErrorCode::InvalidSpec, "masses must be positive");
  const double mu = m_a * m_b / (m_a + m_b);
  const Vec3 q = mu * (p_a / m_a - p_b / m_b);
  const double qn = q.norm();
  const double scale = p_a.norm() + p_b.norm();
  if (qn <= 1e-13 * scale || qn == 0.0) return {p_a, p_b, 0.0};

  const Vec3 n = q / qn;
  Eigen::Index axis = 0;
  n.cwiseAbs().minCoeff(&axis);
  const Vec3 e1 = n.cross(Vec3::Unit(axis)).normalized();
  const Vec3 e2 = n.cross(e1);
  const Vec3 q_out =
      qn * (std::cos(theta) * n + std::sin(theta) * (std::cos(azimuth) * e1 + std::sin(azimuth) * e2));
  const Vec3 dq = q_out - q;
  Collision c{p_a + dq, p_b - dq, 0.0};
  // (|p'|² - |p|²)/2m written as a product to avoid cancellation.
  c.de_a = dq.dot(c.p_a + p_a) / (2.0 * m_a);
  return c;
}

struct CollisionEvent {
  Vec3 p_a;
  Vec3 p_b;
  double theta = 0.0;
  double azimuth = 0.0;
  double de_a = 0.0;
  double energy_a = 0.0;  // incoming kinetic energy of a
  double weight = 1.0;    // relative speed when flux weighting, else 1
};

namespace detail {

inline void scatter(CollisionEvent& ev, const CollisionSpec& spec, Mode mode, CounterRng& rng) {
  // Isotropic law: cos θ uniform on [-1, 1], azimuth uniform (2 draws).
  ev.theta = std::acos(std::clamp(2.0 * rng.uniform() - 1.0, -1.0, 1.0));
  ev.azimuth = 2.0 * std::numbers::pi * rng.uniform();
  ev.energy_a = ev.p_a.squaredNorm() / (2.0 * spec.m_a);
  ev.de_a = collide(ev.p_a, ev.p_b, spec.m_a, spec.m_b, ev.theta, ev.azimuth).de_a;
  ev.weight = spec.flux_for(mode) ? (ev.p_a / spec.m_a - ev.p_b / spec.m_b).norm() : 1.0;
}

inline Vec3 gaussian_vec(CounterRng& rng, double sigma) {
  const auto [x, y] = rng.normal_pair();
  const auto [z, unused] = rng.normal_pair();
  (void)unused;
  return sigma * Vec3(x, y, z);
}

}  // namespace detail

/// One event of the entangled ensemble (6 draws: k, then θ and azimuth).
inline CollisionEvent sample_entangled_event(const CollisionSpec& spec, CounterRng& rng) {
  spec.validate();
  const Vec3 k = detail::gaussian_vec(rng, std::sqrt(spec.m_scale / spec.gamma));
  CollisionEvent ev;
  ev.p_a = spec.alpha_a() * k;
  ev.p_b = spec.alpha_b() * k;
  detail::scatter(ev, spec, Mode::Entangled, rng);
  return ev;
}

/// One event of the uncorrelated ensemble (10 draws: p_a, p_b, θ, azimuth).
inline CollisionEvent sample_product_event(const CollisionSpec& spec, CounterRng& rng) {
  spec.validate();
  CollisionEvent ev;
  ev.p_a = detail::gaussian_vec(rng, std::sqrt(spec.m_a * spec.t_a));
  ev.p_b = detail::gaussian_vec(rng, std::sqrt(spec.m_b * spec.t_b));
  detail::scatter(ev, spec, Mode::Product, rng);
  return ev;
}

inline CollisionEvent sample_event(const CollisionSpec& spec, Mode mode, CounterRng& rng) {
  return mode == Mode::Entangled ? sample_entangled_event(spec, rng) : sample_product_event(spec, rng);
}

struct GasReport {
  Mode mode = Mode::Entangled;
  std::size_t n_samples = 0;
  bool flux_weighting = false;
  double mean_de_a = 0.0;
  double stderr_de_a = 0.0;
  double mean_fractional_gain = 0.0;  // weighted mean of ΔE_a/E_a
  double stderr_fractional_gain = 0.0;
  double x = 0.0;
  double closed_form_mean_gain = 0.0;  // 2x(x-1), isotropic ⟨sin²(θ/2)⟩ = 1/2
  double reversal_ratio = 0.0;
  int sign = 0;  // sign of mean_de_a: +1 a gains, -1 a loses
};

/// Weighted mean and its standard error (ratio estimator, n/(n-1)
/// corrected; reduces to s/√n for unit weights).
inline std::pair<double, double> weighted_mean_stderr(const std::vector<double>& values,
                                                      const std::vector<double>& weights) {
  const std::size_t n = values.size();
  double wsum = 0.0;
  double wxsum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    wsum += weights[i];
    wxsum += weights[i] * values[i];
  }
  if (wsum <= 0.0) return {0.0, 0.0};
  const double mean = wxsum / wsum;
  if (n < 2) return {mean, 0.0};
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = weights[i] * (values[i] - mean);
    acc += d * d;
  }
  const double se = std::sqrt(acc * static_cast<double>(n) / static_cast<double>(n - 1)) / wsum;
  return {mean, se};
}

/// Event i draws from CounterRng(seed, mode stream).substream(i); sums are
/// taken in index order, so the report is independent of `threads`.
inline GasReport ensemble_heat(const CollisionSpec& spec, Mode mode, std::size_t n, std::uint64_t seed,
                               unsigned threads = 1) {
  spec.validate();
  if (n < 2) throw Error(ErrorCode::InvalidSpec, "ensemble needs at least two samples");
  const CounterRng root(seed, mode == Mode::Entangled ? 0x656E74ULL : 0x70726FULL);
  std::vector<double> de(n), gain(n), weight(n);
  parallel_for(n, threads, [&](std::size_t i) {
    CounterRng rng = root.substream(i);
    const CollisionEvent ev = sample_event(spec, mode, rng);
    de[i] = ev.de_a;
    gain[i] = ev.energy_a > 0.0 ? ev.de_a / ev.energy_a : 0.0;
    weight[i] = ev.weight;
  });

  GasReport r;
  r.mode = mode;
  r.n_samples = n;
  r.flux_weighting = spec.flux_for(mode);
  std::tie(r.mean_de_a, r.stderr_de_a) = weighted_mean_stderr(de, weight);
  std::tie(r.mean_fractional_gain, r.stderr_fractional_gain) = weighted_mean_stderr(gain, weight);
  r.x = x_parameter(spec);
  r.closed_form_mean_gain = 2.0 * r.x * (r.x - 1.0);
  r.reversal_ratio = reversal_ratio(spec);
  r.sign = (r.mean_de_a > 0.0) - (r.mean_de_a < 0.0);
  return r;
}

}  // namespace entroflow::gas
