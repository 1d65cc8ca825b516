#include "tsg/members.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/SVD>

#include "tsg/errors.hpp"

namespace tsg {

std::string to_string(CoordTag tag) {
  switch (tag) {
    case CoordTag::RUVW: return "RUVW";
    case CoordTag::RRVW: return "RRVW";
    case CoordTag::RRRW: return "RRRW";
    case CoordTag::RRRR: return "RRRR";
    case CoordTag::RUV: return "RUV";
    case CoordTag::RRV: return "RRV";
    case CoordTag::RRR: return "RRR";
    case CoordTag::RU: return "RU";
    case CoordTag::RR: return "RR";
  }
  return "?";
}

CoordTag coord_tag_from_string(const std::string& name) {
  static const std::pair<const char*, CoordTag> table[] = {
      {"RUVW", CoordTag::RUVW}, {"RRVW", CoordTag::RRVW}, {"RRRW", CoordTag::RRRW},
      {"RRRR", CoordTag::RRRR}, {"RUV", CoordTag::RUV},   {"RRV", CoordTag::RRV},
      {"RRR", CoordTag::RRR},   {"RU", CoordTag::RU},     {"RR", CoordTag::RR}};
  for (const auto& [key, tag] : table)
    if (name == key) return tag;
  throw ModelError("unknown coordinate tag '" + name + "'");
}

int CoordType::nbase() const {
  switch (tag) {
    case CoordTag::RUVW:
    case CoordTag::RRVW:
    case CoordTag::RRRW:
    case CoordTag::RRRR: return 3;
    case CoordTag::RUV:
    case CoordTag::RRV:
    case CoordTag::RRR: return 2;
    default: return 1;
  }
}

bool CoordType::slot_is_point(int k) const {
  if (k == 0) return true;
  const std::string s = to_string(tag);
  return s[k] == 'R';
}

CoordType make_coord_type(CoordTag tag, int dim) {
  CoordType t{tag, dim};
  const int p = t.nbase();
  if (dim != 2 && dim != 3) throw ModelError("spatial dimension must be 2 or 3");
  if (p == 3 && dim != 3) throw ModelError(to_string(tag) + " requires a 3D space");
  if (p == 2 && dim != 2) throw ModelError(to_string(tag) + " requires a 2D space");
  return t;
}

MatrixXd conversion_factor(CoordTag tag) {
  const CoordType t{tag, 3};
  const int k = t.nslots();
  MatrixXd Y = MatrixXd::Identity(k, k);
  // each extra point r_x becomes the vector r_x - r_i
  for (int s = 1; s < k; ++s)
    if (t.slot_is_point(s)) Y(s, 0) = -1.0;
  return Y;
}

MatrixXd conversion_matrix(CoordTag tag, int dim) {
  const MatrixXd Ys = conversion_factor(tag);
  MatrixXd Y = MatrixXd::Zero(Ys.rows() * dim, Ys.cols() * dim);
  for (int i = 0; i < Ys.rows(); ++i)
    for (int j = 0; j < Ys.cols(); ++j)
      if (Ys(i, j) != 0.0) Y.block(i * dim, j * dim, dim, dim).diagonal().setConstant(Ys(i, j));
  return Y;
}

VectorXd to_standard(const VectorXd& q, CoordType type) {
  if (q.size() != type.ncoords())
    throw DimensionError("coordinate vector has length " + std::to_string(q.size()) +
                         ", expected " + std::to_string(type.ncoords()));
  return conversion_matrix(type.tag, type.dim) * q;
}

MatrixXd pseudo_inverse(const MatrixXd& A, double rel_tol) {
  Eigen::JacobiSVD<MatrixXd> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const VectorXd& s = svd.singularValues();
  const double cut = s.size() ? rel_tol * s(0) : 0.0;
  MatrixXd Sinv = MatrixXd::Zero(A.cols(), A.rows());
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > cut) Sinv(i, i) = 1.0 / s(i);
  return svd.matrixV() * Sinv * svd.matrixU().transpose();
}

MemberTemplate MemberTemplate::create(CoordType type, double mass, const VectorXd& local_basic_point,
                                      const MatrixXd& local_base, const VectorXd& inertia,
                                      const std::string& name) {
  type = make_coord_type(type.tag, type.dim);
  const int m = type.dim;
  const int p = type.nbase();
  if (!(mass > 0.0)) throw ModelError("member '" + name + "': mass must be positive");
  if (local_basic_point.size() != m) throw DimensionError("member '" + name + "': r̄_i has wrong size");
  if (local_base.rows() != m || local_base.cols() != p)
    throw DimensionError("member '" + name + "': X̄ must be " + std::to_string(m) + "x" +
                         std::to_string(p));

  MemberTemplate t;
  t.name_ = name;
  t.type_ = type;
  t.mass_ = mass;
  t.ri_ = local_basic_point;
  t.X_ = local_base;
  t.inertia_ = inertia;

  if (type.is_bar()) {
    if (local_base.col(0).norm() == 0.0) throw ModelError("member '" + name + "': zero-length bar");
    if (inertia.size() != 1 || inertia(0) < 0.0)
      throw ModelError("member '" + name + "': bar needs one non-negative axial second moment");
    // second moments along the bar axis only
    const VectorXd e = local_base.col(0).normalized();
    t.J_ = inertia(0) * e * e.transpose();
  } else {
    double scale = 1.0;
    for (int c = 0; c < p; ++c) scale *= local_base.col(c).norm();
    if (scale == 0.0 || std::abs(local_base.determinant()) < 1e-10 * scale)
      throw ModelError("member '" + name + "': base vectors are degenerate");
    if (p == 3) {
      if (inertia.size() != 3) throw ModelError("member '" + name + "': expects 3 principal moments");
      const double a = inertia(0), b = inertia(1), c = inertia(2);
      const double tol = 1e-12 * (a + b + c);
      if (a < 0 || b < 0 || c < 0 || a + b < c - tol || b + c < a - tol || a + c < b - tol)
        throw ModelError("member '" + name + "': principal moments violate the triangle inequality");
      t.J_ = 0.5 * (a + b + c) * MatrixXd::Identity(3, 3);
      t.J_.diagonal() -= inertia;
    } else {
      if (inertia.size() != 2 || inertia(0) < 0 || inertia(1) < 0)
        throw ModelError("member '" + name + "': expects 2 non-negative principal second moments");
      t.J_ = inertia.asDiagonal();
    }
  }
  t.finalize();
  return t;
}

MemberTemplate MemberTemplate::uniform_bar(CoordTag tag, int dim, double mass, double length,
                                           double axial_moment, const std::string& name) {
  VectorXd ri = VectorXd::Zero(dim);
  ri(0) = -0.5 * length;
  MatrixXd X = MatrixXd::Zero(dim, 1);
  X(0, 0) = length;
  VectorXd I(1);
  I << axial_moment;
  return create(make_coord_type(tag, dim), mass, ri, X, I, name);
}

void MemberTemplate::finalize() {
  const int m = type_.dim;
  const int p = type_.nbase();
  Xp_ = pseudo_inverse(X_);
  cg_ = -Xp_ * ri_;

  MatrixXd Mb = MatrixXd::Zero(p + 1, p + 1);
  Mb(0, 0) = mass_;
  Mb.block(0, 1, 1, p) = mass_ * cg_.transpose();
  Mb.block(1, 0, p, 1) = mass_ * cg_;
  Mb.block(1, 1, p, p) = Xp_ * (J_ + mass_ * ri_ * ri_.transpose()) * Xp_.transpose();
  Mb = 0.5 * (Mb + Mb.transpose()).eval();

  Ysmall_ = conversion_factor(type_.tag);
  Y_ = conversion_matrix(type_.tag, m);
  const MatrixXd Mbn = Ysmall_.transpose() * Mb * Ysmall_;
  Mstd_ = MatrixXd::Zero((p + 1) * m, (p + 1) * m);
  M_ = MatrixXd::Zero((p + 1) * m, (p + 1) * m);
  for (int i = 0; i <= p; ++i)
    for (int j = 0; j <= p; ++j) {
      Mstd_.block(i * m, j * m, m, m).diagonal().setConstant(Mb(i, j));
      M_.block(i * m, j * m, m, m).diagonal().setConstant(Mbn(i, j));
    }

  if (p == 3)
    pairs_ = {{0, 0}, {1, 1}, {2, 2}, {1, 2}, {0, 2}, {0, 1}};
  else if (p == 2)
    pairs_ = {{0, 0}, {1, 1}, {0, 1}};
  else
    pairs_ = {{0, 0}};
  ref_.resize(static_cast<Eigen::Index>(pairs_.size()));
  hess_.clear();
  for (std::size_t k = 0; k < pairs_.size(); ++k) {
    const auto [a, b] = pairs_[k];
    ref_(static_cast<Eigen::Index>(k)) = X_.col(a).dot(X_.col(b));
    // b_aᵀb_b in standard slots a+1, b+1; Hessian G = S_aᵀS_b + S_bᵀS_a
    MatrixXd Gs = MatrixXd::Zero(p + 1, p + 1);
    Gs(a + 1, b + 1) += 1.0;
    Gs(b + 1, a + 1) += 1.0;
    const MatrixXd Hs = Ysmall_.transpose() * Gs * Ysmall_;
    MatrixXd H = MatrixXd::Zero((p + 1) * m, (p + 1) * m);
    for (int i = 0; i <= p; ++i)
      for (int j = 0; j <= p; ++j)
        if (Hs(i, j) != 0.0) H.block(i * m, j * m, m, m).diagonal().setConstant(Hs(i, j));
    hess_.push_back(std::move(H));
  }
}

VectorXd MemberTemplate::point_weights(const LocalPoint& pt) const {
  const int p = type_.nbase();
  if (pt.coeffs.size() != p)
    throw DimensionError("member '" + name_ + "': local point needs " + std::to_string(p) + " coefficients");
  VectorXd w(p + 1);
  w(0) = 1.0;
  w.tail(p) = pt.coeffs;
  return Ysmall_.transpose() * w;
}

MatrixXd MemberTemplate::point_transform(const LocalPoint& pt) const {
  const int m = type_.dim;
  const VectorXd w = point_weights(pt);
  MatrixXd C = MatrixXd::Zero(m, w.size() * m);
  for (Eigen::Index k = 0; k < w.size(); ++k) C.block(0, k * m, m, m).diagonal().setConstant(w(k));
  return C;
}

LocalPoint MemberTemplate::local_coeffs(const VectorXd& local_position) const {
  if (local_position.size() != type_.dim) throw DimensionError("local position has wrong dimension");
  return LocalPoint{Xp_ * (local_position - ri_)};
}

VectorXd MemberTemplate::intrinsic_constraints(const VectorXd& q) const {
  const VectorXd qs = to_standard(q, type_);
  const int m = type_.dim;
  VectorXd phi(ref_.size());
  for (std::size_t k = 0; k < pairs_.size(); ++k) {
    const auto [a, b] = pairs_[k];
    phi(static_cast<Eigen::Index>(k)) =
        qs.segment((a + 1) * m, m).dot(qs.segment((b + 1) * m, m)) - ref_(static_cast<Eigen::Index>(k));
  }
  return phi;
}

MatrixXd MemberTemplate::intrinsic_jacobian(const VectorXd& q) const {
  MatrixXd A(ref_.size(), type_.ncoords());
  for (std::size_t k = 0; k < pairs_.size(); ++k)
    A.row(static_cast<Eigen::Index>(k)) = (hess_[k] * q).transpose();
  return A;
}

const MatrixXd& MemberTemplate::intrinsic_hessian(int k) const { return hess_.at(static_cast<std::size_t>(k)); }

VectorXd MemberTemplate::place(const VectorXd& origin, const MatrixXd& rotation) const {
  const int m = type_.dim;
  const int p = type_.nbase();
  VectorXd qs((p + 1) * m);
  qs.head(m) = origin + rotation * ri_;
  for (int a = 0; a < p; ++a) qs.segment((a + 1) * m, m) = rotation * X_.col(a);
  return Y_.triangularView<Eigen::Lower>().solve(qs);
}

}  // namespace tsg
