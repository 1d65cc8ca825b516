#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tsg {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class CoordTag { RUVW, RRVW, RRRW, RRRR, RUV, RRV, RRR, RU, RR };

std::string to_string(CoordTag tag);
CoordTag coord_tag_from_string(const std::string& name);

struct CoordType {
  CoordTag tag = CoordTag::RU;
  int dim = 3;

  // number of base vectors of the standard form (3, 2 or 1)
  int nbase() const;
  // number of m-vectors in the coordinate vector (points plus vectors)
  int nslots() const { return nbase() + 1; }
  int ncoords() const { return nslots() * dim; }
  bool is_bar() const { return tag == CoordTag::RU || tag == CoordTag::RR; }
  // slot k holds a point (true) or a free vector (false)
  bool slot_is_point(int k) const;
};

CoordType make_coord_type(CoordTag tag, int dim);

// Small (nslots x nslots) conversion factor; the full matrix is this ⊗ I_m.
MatrixXd conversion_factor(CoordTag tag);
MatrixXd conversion_matrix(CoordTag tag, int dim);
VectorXd to_standard(const VectorXd& q, CoordType type);

struct LocalPoint {
  VectorXd coeffs;
};

class MemberTemplate {
 public:
  // Inertia data per member class:
  //   3D body: principal moments (Ixx, Iyy, Izz) in the local frame
  //   2D body: principal second moments (∫x̄², ∫ȳ²); their sum is the polar moment
  //   bar: axial second moment ∫x̄² (e.g. mL²/12 for a uniform bar)
  static MemberTemplate create(CoordType type, double mass, const VectorXd& local_basic_point,
                               const MatrixXd& local_base, const VectorXd& inertia,
                               const std::string& name = "");

  // Uniform bar along the local x̄ axis with r̄_i = (-L/2, 0[, 0]).
  static MemberTemplate uniform_bar(CoordTag tag, int dim, double mass, double length,
                                    double axial_moment, const std::string& name = "");

  const CoordType& type() const { return type_; }
  double mass() const { return mass_; }
  const std::string& name() const { return name_; }
  const VectorXd& local_basic_point() const { return ri_; }
  const MatrixXd& local_base() const { return X_; }
  const VectorXd& inertia() const { return inertia_; }
  const MatrixXd& second_moment() const { return J_; }
  const MatrixXd& base_pinv() const { return Xp_; }
  const VectorXd& mass_center_coeffs() const { return cg_; }
  const std::vector<std::pair<int, int>>& constraint_pairs() const { return pairs_; }
  const VectorXd& reference_products() const { return ref_; }
  const MatrixXd& mass_matrix_std() const { return Mstd_; }
  const MatrixXd& mass_matrix() const { return M_; }
  const MatrixXd& conversion() const { return Y_; }
  int num_constraints() const { return static_cast<int>(pairs_.size()); }

  // Weights w with r = Σ_k w_k x_k over the native slots; C = wᵀ ⊗ I_m.
  VectorXd point_weights(const LocalPoint& pt) const;
  MatrixXd point_transform(const LocalPoint& pt) const;
  LocalPoint local_coeffs(const VectorXd& local_position) const;
  LocalPoint mass_center() const { return LocalPoint{cg_}; }

  VectorXd intrinsic_constraints(const VectorXd& q) const;
  MatrixXd intrinsic_jacobian(const VectorXd& q) const;
  // Constant Hessian of constraint k in native coordinates.
  const MatrixXd& intrinsic_hessian(int k) const;

  // Native coordinates of the member placed rigidly: r = origin + R r̄.
  VectorXd place(const VectorXd& origin, const MatrixXd& rotation) const;

 private:
  MemberTemplate() = default;
  void finalize();

  std::string name_;
  CoordType type_;
  double mass_ = 0.0;
  VectorXd ri_;
  MatrixXd X_;
  VectorXd inertia_;
  MatrixXd J_;
  MatrixXd Xp_;
  VectorXd cg_;
  std::vector<std::pair<int, int>> pairs_;
  VectorXd ref_;
  MatrixXd Mstd_;
  MatrixXd M_;
  MatrixXd Y_;
  MatrixXd Ysmall_;
  std::vector<MatrixXd> hess_;
};

// Moore-Penrose pseudoinverse with cutoff rel_tol × σ_max.
MatrixXd pseudo_inverse(const MatrixXd& A, double rel_tol = 1e-12);

}  // namespace tsg
