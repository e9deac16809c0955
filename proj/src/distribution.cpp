#include "renewal/distribution.hpp"

#include <algorithm>
#include <cmath>

#include "renewal/errors.hpp"

namespace renewal {

HalfLineDistribution HalfLineDistribution::from_nodes(double step,
                                                      const Eigen::Ref<const Eigen::VectorXd>& nodes,
                                                      std::vector<Atom> atoms) {
  if (nodes.size() < 2) throw DomainError("density needs at least two nodes");
  const Eigen::Index n = nodes.size() - 1;
  return from_cells(step, nodes.head(n), nodes.tail(n), std::move(atoms));
}

HalfLineDistribution HalfLineDistribution::from_smooth_nodes(
    double step, const Eigen::Ref<const Eigen::VectorXd>& nodes, std::vector<Atom> atoms) {
  const Eigen::Index n = nodes.size() - 1;
  if (n < 3) return from_nodes(step, nodes, std::move(atoms));
  Eigen::VectorXd left = nodes.head(n);
  Eigen::VectorXd right = nodes.tail(n);
  const auto& f = nodes;
  for (Eigen::Index i = 0; i < n; ++i) {
    // Cell average of the cubic through four neighbouring nodes, one-sided at the ends.
    double avg;
    if (i == 0) {
      avg = (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]) / 24.0;
    } else if (i == n - 1) {
      avg = (f[n - 3] - 5.0 * f[n - 2] + 19.0 * f[n - 1] + 9.0 * f[n]) / 24.0;
    } else {
      avg = (-f[i - 1] + 13.0 * f[i] + 13.0 * f[i + 1] - f[i + 2]) / 24.0;
    }
    const double shift = avg - 0.5 * (f[i] + f[i + 1]);
    left[i] += shift;
    right[i] += shift;
  }
  return from_cells(step, std::move(left), std::move(right), std::move(atoms));
}

HalfLineDistribution HalfLineDistribution::from_cells(double step, Eigen::VectorXd left,
                                                      Eigen::VectorXd right,
                                                      std::vector<Atom> atoms) {
  if (!(step > 0.0)) throw DomainError("density step must be positive");
  if (left.size() != right.size()) throw DomainError("cell endpoint arrays differ in size");
  HalfLineDistribution d;
  d.step_ = step;
  d.left_ = std::move(left);
  d.right_ = std::move(right);
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& a, const Atom& b) { return a.location < b.location; });
  d.atoms_ = std::move(atoms);
  return d;
}

double HalfLineDistribution::density(double u) const {
  if (u < 0.0 || cells() == 0) return 0.0;
  const double x = u / step_;
  const auto i = static_cast<Eigen::Index>(std::floor(x));
  if (i >= cells()) return 0.0;
  const double frac = x - static_cast<double>(i);
  return left_[i] + frac * (right_[i] - left_[i]);
}

double HalfLineDistribution::density_left(double u) const {
  if (u <= 0.0 || cells() == 0) return 0.0;
  const double x = u / step_;
  auto i = static_cast<Eigen::Index>(std::ceil(x)) - 1;
  if (i >= cells()) return 0.0;
  i = std::max<Eigen::Index>(i, 0);
  const double frac = x - static_cast<double>(i);
  return left_[i] + frac * (right_[i] - left_[i]);
}

double HalfLineDistribution::density_mass() const {
  return 0.5 * step_ * (left_.sum() + right_.sum());
}

double HalfLineDistribution::atom_mass() const {
  double m = 0.0;
  for (const Atom& a : atoms_) m += a.mass;
  return m;
}

double HalfLineDistribution::mass_in(double lo, double hi) const {
  double m = 0.0;
  for (const Atom& a : atoms_) {
    if (a.location >= lo && a.location < hi) m += a.mass;
  }
  lo = std::max(lo, 0.0);
  hi = std::min(hi, u_max());
  if (!(hi > lo)) return m;
  auto first = static_cast<Eigen::Index>(std::floor(lo / step_));
  for (Eigen::Index i = first; i < cells(); ++i) {
    const double a = static_cast<double>(i) * step_;
    const double b = a + step_;
    if (a >= hi) break;
    const double x0 = std::max(a, lo);
    const double x1 = std::min(b, hi);
    if (!(x1 > x0)) continue;
    const double slope = (right_[i] - left_[i]) / step_;
    const double f0 = left_[i] + slope * (x0 - a);
    const double f1 = left_[i] + slope * (x1 - a);
    m += 0.5 * (f0 + f1) * (x1 - x0);
  }
  return m;
}

}  // namespace renewal
