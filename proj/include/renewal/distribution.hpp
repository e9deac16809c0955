#pragma once

#include <vector>

#include <Eigen/Core>

namespace renewal {

struct Atom {
  double location;
  double mass;
  bool overflow = false;  // pseudo-atom collecting mass beyond the grid
};

/**
 * A probability law on R+: a density on [0, u_max] plus a finite list of atoms.
 *
 * The density is piecewise linear on uniform cells [i h, (i+1) h] and may jump
 * at cell boundaries: cell i runs linearly from `left[i]` to `right[i]`. A
 * continuous density has right[i] == left[i+1]; a histogram has
 * left[i] == right[i].
 */
class HalfLineDistribution {
 public:
  HalfLineDistribution() = default;

  /// Continuous density from node values f(i h), i = 0..n.
  static HalfLineDistribution from_nodes(double step, const Eigen::Ref<const Eigen::VectorXd>& nodes,
                                         std::vector<Atom> atoms = {});
  /// Same nodes, with each cell shifted by a constant so that its integral is the
  /// cubic-interpolation one. Masses are then fourth-order accurate for a smooth
  /// density while values move by O(h^2); cells may jump slightly at boundaries.
  static HalfLineDistribution from_smooth_nodes(double step,
                                                const Eigen::Ref<const Eigen::VectorXd>& nodes,
                                                std::vector<Atom> atoms = {});
  static HalfLineDistribution from_cells(double step, Eigen::VectorXd left, Eigen::VectorXd right,
                                         std::vector<Atom> atoms = {});

  double step() const { return step_; }
  Eigen::Index cells() const { return left_.size(); }
  double u_max() const { return step_ * static_cast<double>(cells()); }
  const Eigen::VectorXd& left() const { return left_; }
  const Eigen::VectorXd& right() const { return right_; }
  const std::vector<Atom>& atoms() const { return atoms_; }

  /// Right-continuous density value; zero beyond u_max.
  double density(double u) const;
  /// Left limit of the density at u.
  double density_left(double u) const;

  double density_mass() const;
  double atom_mass() const;
  double mass() const { return density_mass() + atom_mass(); }

  /// Mass of [lo, hi): exact integral of the piecewise-linear density plus atoms.
  double mass_in(double lo, double hi) const;

 private:
  double step_ = 1.0;
  Eigen::VectorXd left_;
  Eigen::VectorXd right_;
  std::vector<Atom> atoms_;
};

}  // namespace renewal
