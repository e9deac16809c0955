#include "renewal/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include <Eigen/QR>

#include "renewal/errors.hpp"

namespace renewal {

namespace {

struct Segment {
  double a;
  double b;
  double da;  // p - q at a+
  double db;  // p - q at b-
};

// Values of the cell containing the open segment (a, b), evaluated at both ends.
std::pair<double, double> ends(const HalfLineDistribution& p, double a, double b) {
  if (p.cells() == 0) return {0.0, 0.0};
  const double mid = 0.5 * (a + b);
  if (mid < 0.0 || mid >= p.u_max()) return {0.0, 0.0};
  const auto i = std::min(static_cast<Eigen::Index>(std::floor(mid / p.step())), p.cells() - 1);
  const double x0 = p.step() * static_cast<double>(i);
  const double slope = (p.right()[i] - p.left()[i]) / p.step();
  return {p.left()[i] + slope * (a - x0), p.left()[i] + slope * (b - x0)};
}

std::vector<Segment> merged_segments(const HalfLineDistribution& p, const HalfLineDistribution& q) {
  std::vector<double> cuts;
  cuts.reserve(static_cast<std::size_t>(p.cells() + q.cells() + 2));
  for (Eigen::Index i = 0; i <= p.cells(); ++i) cuts.push_back(p.step() * static_cast<double>(i));
  for (Eigen::Index i = 0; i <= q.cells(); ++i) cuts.push_back(q.step() * static_cast<double>(i));
  std::sort(cuts.begin(), cuts.end());
  const double scale = std::max(p.u_max(), q.u_max());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [scale](double x, double y) { return std::abs(x - y) <= 1e-12 * scale; }),
             cuts.end());
  std::vector<Segment> out;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i];
    const double b = cuts[i + 1];
    const auto [pa, pb] = ends(p, a, b);
    const auto [qa, qb] = ends(q, a, b);
    out.push_back({a, b, pa - qa, pb - qb});
  }
  return out;
}

// ∫_a^b e^{cu} (α + β u) du.
double exp_linear(double c, double alpha, double beta, double a, double b) {
  if (c == 0.0) return alpha * (b - a) + 0.5 * beta * (b * b - a * a);
  auto prim = [&](double u) { return std::exp(c * u) * ((alpha + beta * u) / c - beta / (c * c)); };
  return prim(b) - prim(a);
}

// ∫_a^b e^{cu} |d(u)| for d linear from da to db.
double weighted_abs(double c, const Segment& s) {
  const double beta = (s.db - s.da) / (s.b - s.a);
  const double alpha = s.da - beta * s.a;
  if ((s.da >= 0.0) == (s.db >= 0.0)) {
    return std::abs(exp_linear(c, alpha, beta, s.a, s.b));
  }
  const double root = -alpha / beta;
  return std::abs(exp_linear(c, alpha, beta, s.a, root)) + std::abs(exp_linear(c, alpha, beta, root, s.b));
}

template <class Weight>
double atom_difference(const HalfLineDistribution& p, const HalfLineDistribution& q, Weight&& w) {
  std::map<double, double> diff;
  for (const Atom& a : p.atoms()) diff[a.location] += a.mass;
  for (const Atom& a : q.atoms()) diff[a.location] -= a.mass;
  double acc = 0.0;
  for (const auto& [loc, d] : diff) acc += w(loc) * std::abs(d);
  return acc;
}

}  // namespace

double tv_distance(const HalfLineDistribution& p, const HalfLineDistribution& q) {
  double acc = 0.0;
  for (const Segment& s : merged_segments(p, q)) acc += weighted_abs(0.0, s);
  return acc + atom_difference(p, q, [](double) { return 1.0; });
}

double weighted_tv(const HalfLineDistribution& p, const HalfLineDistribution& q, double lambda_min) {
  if (!(lambda_min > 0.0)) throw DomainError("weighted_tv needs lambda_min > 0");
  const double c = 0.5 * lambda_min;
  double acc = 0.0;
  const std::vector<Segment> segments = merged_segments(p, q);
  for (const Segment& s : segments) acc += weighted_abs(c, s);
  acc += atom_difference(p, q, [c](double u) { return std::exp(c * u); });
  if (!segments.empty()) {
    // Beyond the support the difference is assumed to keep decaying like e^{-λ_min u}.
    const Segment& last = segments.back();
    const double tail = std::exp(c * last.b) * std::abs(last.db) / (lambda_min - c);
    if (tail > 10.0 * acc && tail > 0.0) {
      throw UnreliableResultError("weighted_tv: tail estimate " + std::to_string(tail) +
                                  " dominates the result " + std::to_string(acc));
    }
  }
  return acc;
}

double binned_tv(const HalfLineDistribution& p, const HalfLineDistribution& q, double bin_width,
                 double u_max) {
  if (!(bin_width > 0.0) || !(u_max > 0.0)) throw DomainError("binned_tv needs positive bins");
  const auto bins = static_cast<Eigen::Index>(std::ceil(u_max / bin_width - 1e-9));
  double acc = 0.0;
  double p_in = 0.0;
  double q_in = 0.0;
  for (Eigen::Index b = 0; b < bins; ++b) {
    const double lo = bin_width * static_cast<double>(b);
    const double hi = std::min(u_max, lo + bin_width);
    const double pm = p.mass_in(lo, hi);
    const double qm = q.mass_in(lo, hi);
    p_in += pm;
    q_in += qm;
    acc += std::abs(pm - qm);
  }
  return acc + std::abs((p.mass() - p_in) - (q.mass() - q_in));
}

HalfLineDistribution empirical_distribution(const std::vector<double>& samples, double bin_width,
                                            double u_max) {
  if (samples.empty()) throw DomainError("empirical_distribution needs at least one sample");
  if (!(bin_width > 0.0) || !(u_max > 0.0)) throw DomainError("empirical_distribution: bad grid");
  const auto bins = static_cast<Eigen::Index>(std::ceil(u_max / bin_width - 1e-9));
  const double top = bin_width * static_cast<double>(bins);
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(bins);
  double overflow = 0.0;
  for (double x : samples) {
    if (x < 0.0) throw DomainError("empirical_distribution needs nonnegative samples");
    if (x >= top) {
      overflow += 1.0;
      continue;
    }
    counts[std::min(static_cast<Eigen::Index>(std::floor(x / bin_width)), bins - 1)] += 1.0;
  }
  const double n = static_cast<double>(samples.size());
  Eigen::VectorXd heights = counts / (n * bin_width);
  std::vector<Atom> atoms;
  if (overflow > 0.0) atoms.push_back({top, overflow / n, true});
  return HalfLineDistribution::from_cells(bin_width, heights, heights, std::move(atoms));
}

DecayFit decay_fit(const std::vector<double>& times, const std::vector<double>& distances) {
  if (times.size() != distances.size()) throw DomainError("decay_fit: size mismatch");
  DecayFit fit;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (distances[i] > kNoiseFloor) {
      fit.times.push_back(times[i]);
      fit.distances.push_back(distances[i]);
    }
  }
  const std::size_t n = fit.times.size();
  if (n < 3) throw DomainError("decay_fit needs at least 3 distances above the noise floor");
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = fit.times[i];
    y[i] = std::log(fit.distances[i]);
  }
  const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(y);
  fit.intercept = coef[0];
  fit.slope = coef[1];
  const double ss_res = (y - design * coef).squaredNorm();
  const double ss_tot = (y.array() - y.mean()).square().sum();
  fit.r_squared = ss_tot > 0.0 ? std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0) : 1.0;
  return fit;
}

bool bound_check(const std::vector<double>& times, const std::vector<double>& distances, double C,
                 double c, double s) {
  if (times.size() != distances.size()) throw DomainError("bound_check: size mismatch");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (distances[i] > C * std::exp(-c * (times[i] - s))) return false;
  }
  return true;
}

}  // namespace renewal
