#include "roa/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <limits>
#include <map>
#include <tuple>

namespace roa::sdp {

// ---------------------------------------------------------------------------
// Problem

int Problem::add_block(int dim) {
  if (dim == 0) throw std::invalid_argument("block dimension must be nonzero");
  block_dims.push_back(dim);
  return static_cast<int>(block_dims.size()) - 1;
}

int Problem::add_constraint(double b) {
  constraints.emplace_back();
  rhs.push_back(b);
  return static_cast<int>(constraints.size()) - 1;
}

int Problem::add_free(double cost) {
  free_vars.push_back({cost, {}});
  return static_cast<int>(free_vars.size()) - 1;
}

void Problem::validate() const {
  if (constraints.size() != rhs.size()) throw std::invalid_argument("constraint/rhs count mismatch");
  auto check = [&](const Entry& e) {
    if (e.block < 0 || e.block >= static_cast<int>(block_dims.size())) {
      throw std::invalid_argument("entry refers to a missing block");
    }
    const int dim = std::abs(block_dims[static_cast<std::size_t>(e.block)]);
    if (e.row < 0 || e.col < 0 || e.row >= dim || e.col >= dim) {
      throw std::invalid_argument("entry index outside its block");
    }
    if (e.row > e.col) throw std::invalid_argument("entries must be upper triangular (row <= col)");
    if (block_dims[static_cast<std::size_t>(e.block)] < 0 && e.row != e.col) {
      throw std::invalid_argument("off-diagonal entry in a diagonal block");
    }
    if (!std::isfinite(e.value)) throw std::invalid_argument("non-finite entry");
  };
  for (int d : block_dims) {
    if (d == 0) throw std::invalid_argument("zero block dimension");
  }
  for (const auto& e : objective) check(e);
  for (const auto& c : constraints) {
    for (const auto& e : c) check(e);
  }
  for (const auto& fv : free_vars) {
    for (const auto& [j, v] : fv.coeffs) {
      if (j < 0 || j >= num_constraints()) throw std::invalid_argument("free variable refers to a missing constraint");
      if (!std::isfinite(v)) throw std::invalid_argument("non-finite free coefficient");
    }
  }
}

namespace {

void canonicalize_entries(std::vector<Entry>& es) {
  std::sort(es.begin(), es.end(), [](const Entry& a, const Entry& b) {
    return std::tie(a.block, a.row, a.col) < std::tie(b.block, b.row, b.col);
  });
  std::vector<Entry> out;
  out.reserve(es.size());
  for (const auto& e : es) {
    if (!out.empty() && out.back().block == e.block && out.back().row == e.row && out.back().col == e.col) {
      out.back().value += e.value;
    } else {
      out.push_back(e);
    }
  }
  out.erase(std::remove_if(out.begin(), out.end(), [](const Entry& e) { return e.value == 0.0; }), out.end());
  es = std::move(out);
}

}  // namespace

void Problem::canonicalize() {
  canonicalize_entries(objective);
  for (auto& c : constraints) canonicalize_entries(c);
  for (auto& fv : free_vars) {
    std::map<int, double> acc;
    for (const auto& [j, v] : fv.coeffs) acc[j] += v;
    fv.coeffs.clear();
    for (const auto& [j, v] : acc) {
      if (v != 0.0) fv.coeffs.emplace_back(j, v);
    }
  }
}

std::size_t Problem::nnz() const {
  std::size_t n = objective.size();
  for (const auto& c : constraints) n += c.size();
  for (const auto& fv : free_vars) n += fv.coeffs.size();
  return n;
}

std::string to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::near_optimal: return "near_optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::max_iter: return "max_iter";
    case Status::numerical_failure: return "numerical_failure";
  }
  return "unknown";
}

double min_eigenvalue(const std::vector<Eigen::MatrixXd>& blocks, const std::vector<int>& dims) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (dims[b] < 0) {
      if (blocks[b].size() > 0) m = std::min(m, blocks[b].minCoeff());
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(blocks[b], Eigen::EigenvaluesOnly);
      m = std::min(m, es.eigenvalues().minCoeff());
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// Solver

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using Blocks = std::vector<MatrixXd>;

/// Constraint data of one block, grouped by constraint. Off-diagonal entries
/// of PSD blocks are stored in both orientations.
struct BlockData {
  int dim = 0;
  bool diag = false;
  std::vector<int> cons;           // constraints touching this block, increasing
  std::vector<std::size_t> start;  // entry range per touching constraint
  std::vector<int> p, q;
  std::vector<double> a;
  MatrixXd C;  // dense objective (n x n, or n x 1 for diagonal blocks)
};

struct Direction {
  Blocks dX, dS;
  VectorXd dy, du;
};

class Solver {
 public:
  Solver(const Problem& prob, const Options& opts) : opts_(opts) { setup(prob); }
  Solution run();

 private:
  void setup(const Problem& prob);
  void initial_point(Blocks& X, Blocks& S) const;
  VectorXd apply_A(const Blocks& G) const;
  Blocks apply_At(const VectorXd& y) const;
  void build_schur(const Blocks& X, const Blocks& Sinv);
  bool factor();
  void solve_factored(const VectorXd& r, const VectorXd& rf, VectorXd& dy, VectorXd& du) const;
  void solve_kkt(const VectorXd& r, const VectorXd& rf, VectorXd& dy, VectorXd& du) const;
  Direction direction(double sigmu, const Blocks* corr, const Blocks& X, const Blocks& Sinv, const VectorXd& Rp,
                      const Blocks& Rd, const VectorXd& rf) const;
  double max_step(const Blocks& V, const Blocks& dV) const;

  Options opts_;
  int m_ = 0;
  int nf_ = 0;
  double nbar_ = 0;
  std::vector<BlockData> blocks_;
  VectorXd b_;          // scaled rhs
  VectorXd row_scale_;  // d_i; scaled row = d_i * original row
  MatrixXd F_;          // scaled free-variable columns (m x nf)
  VectorXd cf_;
  double norm_b_ = 0, norm_C_ = 0;

  MatrixXd M_;       // Schur complement, overwritten by its Cholesky factor
  MatrixXd M_full_;  // unfactored copy (lower triangle used)
  MatrixXd W_;  // L^{-1} F
  Eigen::LDLT<MatrixXd> K_;
};

double inner(const Blocks& A, const Blocks& B) {
  double s = 0.0;
  for (std::size_t k = 0; k < A.size(); ++k) s += A[k].cwiseProduct(B[k]).sum();
  return s;
}

double frob(const Blocks& A) {
  double s = 0.0;
  for (const auto& a : A) s += a.squaredNorm();
  return std::sqrt(s);
}

void Solver::setup(const Problem& prob) {
  prob.validate();
  m_ = prob.num_constraints();
  nf_ = static_cast<int>(prob.free_vars.size());

  VectorXd rn = VectorXd::Zero(m_);
  for (int i = 0; i < m_; ++i) {
    for (const auto& e : prob.constraints[static_cast<std::size_t>(i)]) {
      rn(i) += (e.row == e.col ? 1.0 : 2.0) * e.value * e.value;
    }
  }
  for (const auto& fv : prob.free_vars) {
    for (const auto& [j, v] : fv.coeffs) rn(j) += v * v;
  }
  row_scale_ = VectorXd::Ones(m_);
  for (int i = 0; i < m_; ++i) {
    if (rn(i) > 0) row_scale_(i) = 1.0 / std::sqrt(rn(i));
  }

  b_.resize(m_);
  double nb = 0.0;
  for (int i = 0; i < m_; ++i) {
    const double bi = prob.rhs[static_cast<std::size_t>(i)];
    nb += bi * bi;
    b_(i) = bi * row_scale_(i);
  }
  norm_b_ = std::sqrt(nb);

  blocks_.resize(prob.block_dims.size());
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    auto& B = blocks_[k];
    B.dim = std::abs(prob.block_dims[k]);
    B.diag = prob.block_dims[k] < 0;
    B.C = B.diag ? MatrixXd::Zero(B.dim, 1) : MatrixXd::Zero(B.dim, B.dim);
    nbar_ += B.dim;
  }
  for (const auto& e : prob.objective) {
    auto& B = blocks_[static_cast<std::size_t>(e.block)];
    if (B.diag) {
      B.C(e.row, 0) += e.value;
    } else {
      B.C(e.row, e.col) += e.value;
      if (e.row != e.col) B.C(e.col, e.row) += e.value;
    }
  }

  std::vector<std::vector<std::tuple<int, int, double>>> per_block(blocks_.size());
  for (int i = 0; i < m_; ++i) {
    for (auto& pb : per_block) pb.clear();
    for (const auto& e : prob.constraints[static_cast<std::size_t>(i)]) {
      per_block[static_cast<std::size_t>(e.block)].emplace_back(e.row, e.col, e.value * row_scale_(i));
    }
    for (std::size_t k = 0; k < blocks_.size(); ++k) {
      if (per_block[k].empty()) continue;
      auto& B = blocks_[k];
      B.cons.push_back(i);
      B.start.push_back(B.a.size());
      for (const auto& [r, c, v] : per_block[k]) {
        B.p.push_back(r);
        B.q.push_back(c);
        B.a.push_back(v);
        if (!B.diag && r != c) {
          B.p.push_back(c);
          B.q.push_back(r);
          B.a.push_back(v);
        }
      }
    }
  }
  for (auto& B : blocks_) B.start.push_back(B.a.size());

  F_ = MatrixXd::Zero(m_, nf_);
  cf_ = VectorXd::Zero(nf_);
  for (int j = 0; j < nf_; ++j) {
    const auto& fv = prob.free_vars[static_cast<std::size_t>(j)];
    cf_(j) = fv.cost;
    for (const auto& [i, v] : fv.coeffs) F_(i, j) += v * row_scale_(i);
  }
  double nc = cf_.squaredNorm();
  for (const auto& B : blocks_) nc += B.C.squaredNorm();
  norm_C_ = std::sqrt(nc);
}

void Solver::initial_point(Blocks& X, Blocks& S) const {
  double bmax = 0.0;
  for (int i = 0; i < m_; ++i) bmax = std::max(bmax, std::abs(b_(i)));
  X.resize(blocks_.size());
  S.resize(blocks_.size());
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    const auto& B = blocks_[k];
    const double n = B.dim;
    const double xi = std::max({10.0, std::sqrt(n), n * (1.0 + bmax) / 2.0});
    const double eta = std::max({10.0, std::sqrt(n), (1.0 + B.C.norm()) / std::sqrt(n)});
    if (B.diag) {
      X[k] = MatrixXd::Constant(B.dim, 1, xi);
      S[k] = MatrixXd::Constant(B.dim, 1, eta);
    } else {
      X[k] = xi * MatrixXd::Identity(B.dim, B.dim);
      S[k] = eta * MatrixXd::Identity(B.dim, B.dim);
    }
  }
}

VectorXd Solver::apply_A(const Blocks& G) const {
  VectorXd r = VectorXd::Zero(m_);
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    const auto& B = blocks_[k];
    const MatrixXd& g = G[k];
    for (std::size_t c = 0; c < B.cons.size(); ++c) {
      double s = 0.0;
      for (std::size_t e = B.start[c]; e < B.start[c + 1]; ++e) {
        s += B.diag ? B.a[e] * g(B.p[e], 0) : B.a[e] * g(B.q[e], B.p[e]);
      }
      r(B.cons[c]) += s;
    }
  }
  return r;
}

Blocks Solver::apply_At(const VectorXd& y) const {
  Blocks out(blocks_.size());
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    const auto& B = blocks_[k];
    out[k] = B.diag ? MatrixXd::Zero(B.dim, 1) : MatrixXd::Zero(B.dim, B.dim);
    for (std::size_t c = 0; c < B.cons.size(); ++c) {
      const double yc = y(B.cons[c]);
      if (yc == 0.0) continue;
      for (std::size_t e = B.start[c]; e < B.start[c + 1]; ++e) {
        out[k](B.p[e], B.diag ? 0 : B.q[e]) += yc * B.a[e];
      }
    }
  }
  return out;
}

// M_ij = tr(A_i X A_j S^{-1}). For each constraint i of a block we form
// P_i = S^{-1} A_i X with one GEMM; then M_ij = sum_{(r,s) in A_j} a_rs P_i(s, r).
void Solver::build_schur(const Blocks& X, const Blocks& Sinv) {
  M_.setZero(m_, m_);
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    const auto& B = blocks_[k];
    const std::size_t nc = B.cons.size();
    if (B.diag) {
      VectorXd ratio = X[k].col(0).cwiseProduct(Sinv[k].col(0));
      VectorXd dense = VectorXd::Zero(B.dim);
      for (std::size_t ci = 0; ci < nc; ++ci) {
        for (std::size_t e = B.start[ci]; e < B.start[ci + 1]; ++e) dense(B.p[e]) += B.a[e] * ratio(B.p[e]);
        for (std::size_t cj = ci; cj < nc; ++cj) {
          double s = 0.0;
          for (std::size_t f = B.start[cj]; f < B.start[cj + 1]; ++f) s += B.a[f] * dense(B.p[f]);
          M_(B.cons[ci], B.cons[cj]) += s;
        }
        for (std::size_t e = B.start[ci]; e < B.start[ci + 1]; ++e) dense(B.p[e]) = 0.0;
      }
      continue;
    }
    const MatrixXd& Xk = X[k];
    const MatrixXd& Si = Sinv[k];
    MatrixXd Lft, Rgt, P;
    for (std::size_t ci = 0; ci < nc; ++ci) {
      const std::size_t e0 = B.start[ci];
      const auto ne = static_cast<Index>(B.start[ci + 1] - e0);
      Lft.resize(B.dim, ne);
      Rgt.resize(ne, B.dim);
      for (Index e = 0; e < ne; ++e) {
        const std::size_t idx = e0 + static_cast<std::size_t>(e);
        Lft.col(e) = Si.col(B.p[idx]) * B.a[idx];
        Rgt.row(e) = Xk.row(B.q[idx]);
      }
      P.noalias() = Lft * Rgt;
      const int row = B.cons[ci];
      for (std::size_t cj = ci; cj < nc; ++cj) {
        double s = 0.0;
        for (std::size_t f = B.start[cj]; f < B.start[cj + 1]; ++f) s += B.a[f] * P(B.q[f], B.p[f]);
        M_(row, B.cons[cj]) += s;
      }
    }
  }
}

// Cholesky of M in place (lower triangle), with growing diagonal
// regularization when M is numerically singular. Then W = L^{-1} F and
// K = W^T W.
bool Solver::factor() {
  M_.triangularView<Eigen::StrictlyLower>() = M_.transpose();
  double dmax = 0.0;
  for (Index i = 0; i < M_.rows(); ++i) dmax = std::max(dmax, std::abs(M_(i, i)));
  if (dmax == 0.0) dmax = 1.0;
  M_full_ = M_;
  // Relative diagonal perturbation keeps rows of very different scale
  // intact; iterative refinement against M_full_ removes its effect.
  double reg = 1e-13;
  for (int attempt = 0; attempt < 8; ++attempt) {
    if (attempt > 0) {
      M_ = M_full_;
      M_.diagonal().array() *= 1.0 + reg;
      M_.diagonal().array() += 1e-6 * reg * dmax;
      reg *= 10.0;
    }
    Eigen::LLT<Eigen::Ref<MatrixXd>> llt(M_);
    if (llt.info() != Eigen::Success) continue;
    if (opts_.verbose && attempt > 0) std::fprintf(stderr, "     schur regularized %.1e\n", reg / 10.0);
    if (nf_ > 0) {
      W_ = F_;
      M_.triangularView<Eigen::Lower>().solveInPlace(W_);
      MatrixXd K = W_.transpose() * W_;
      const double kmax = std::max(1.0, K.diagonal().cwiseAbs().maxCoeff());
      K.diagonal().array() += 1e-15 * kmax;
      K_.compute(K);
      if (K_.info() != Eigen::Success) return false;
    }
    return true;
  }
  return false;
}

void Solver::solve_factored(const VectorXd& r, const VectorXd& rf, VectorXd& dy, VectorXd& du) const {
  VectorXd z = r;
  M_.triangularView<Eigen::Lower>().solveInPlace(z);
  if (nf_ > 0) {
    du = K_.solve(W_.transpose() * z - rf);
    z.noalias() -= W_ * du;
  } else {
    du.resize(0);
  }
  M_.triangularView<Eigen::Lower>().transpose().solveInPlace(z);
  dy = std::move(z);
}

// Solves [M F; F^T 0] [dy; du] = [r; rf] with iterative refinement against
// the unfactored M, which recovers accuracy lost to ill-conditioning late in
// the iteration.
void Solver::solve_kkt(const VectorXd& r, const VectorXd& rf, VectorXd& dy, VectorXd& du) const {
  solve_factored(r, rf, dy, du);
  auto residual = [&](VectorXd& e1, VectorXd& e2) {
    e1 = r;
    e1.noalias() -= M_full_.selfadjointView<Eigen::Lower>() * dy;
    if (nf_ > 0) {
      e1.noalias() -= F_ * du;
      e2 = rf - F_.transpose() * dy;
    } else {
      e2.resize(0);
    }
    return std::sqrt(e1.squaredNorm() + e2.squaredNorm());
  };
  VectorXd e1, e2, cy, cu;
  double res = residual(e1, e2);
  const double scale = std::sqrt(r.squaredNorm() + rf.squaredNorm());
  for (int it = 0; it < 3 && res > 1e-14 * scale; ++it) {
    solve_factored(e1, e2, cy, cu);
    VectorXd y1 = dy + cy;
    VectorXd u1 = nf_ > 0 ? VectorXd(du + cu) : du;
    std::swap(dy, y1);
    std::swap(du, u1);
    const double next = residual(e1, e2);
    if (!(next < res)) {
      std::swap(dy, y1);
      std::swap(du, u1);
      break;
    }
    res = next;
  }
  if (opts_.verbose) std::fprintf(stderr, "     kkt residual %.2e (rhs %.2e)\n", res, scale);
}

Direction Solver::direction(double sigmu, const Blocks* corr, const Blocks& X, const Blocks& Sinv,
                            const VectorXd& Rp, const Blocks& Rd, const VectorXd& rf) const {
  const std::size_t nb = blocks_.size();
  Blocks H(nb);
  for (std::size_t k = 0; k < nb; ++k) {
    if (blocks_[k].diag) {
      H[k] = sigmu * Sinv[k] - X[k] - (X[k].cwiseProduct(Rd[k])).cwiseProduct(Sinv[k]);
      if (corr) H[k] -= (*corr)[k].cwiseProduct(Sinv[k]);
    } else {
      MatrixXd T = X[k] * Rd[k];
      if (corr) T += (*corr)[k];
      H[k] = sigmu * Sinv[k] - X[k] - T * Sinv[k];
    }
  }
  Direction d;
  solve_kkt(Rp - apply_A(H), rf, d.dy, d.du);
  d.dS = apply_At(d.dy);
  d.dX.resize(nb);
  for (std::size_t k = 0; k < nb; ++k) {
    d.dS[k] = Rd[k] - d.dS[k];
    if (blocks_[k].diag) {
      d.dX[k] = sigmu * Sinv[k] - X[k] - X[k].cwiseProduct(d.dS[k]).cwiseProduct(Sinv[k]);
      if (corr) d.dX[k] -= (*corr)[k].cwiseProduct(Sinv[k]);
    } else {
      MatrixXd T = X[k] * d.dS[k];
      if (corr) T += (*corr)[k];
      MatrixXd D = sigmu * Sinv[k] - X[k] - T * Sinv[k];
      d.dX[k] = 0.5 * (D + D.transpose());
    }
  }
  return d;
}

// Largest alpha with V + alpha dV >= 0 (infinity if unbounded).
double Solver::max_step(const Blocks& V, const Blocks& dV) const {
  double alpha = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    if (blocks_[k].diag) {
      for (Index i = 0; i < V[k].rows(); ++i) {
        if (dV[k](i, 0) < 0) alpha = std::min(alpha, -V[k](i, 0) / dV[k](i, 0));
      }
      continue;
    }
    Eigen::LLT<MatrixXd> llt(V[k]);
    double lmin = 0.0;
    if (llt.info() == Eigen::Success) {
      MatrixXd T = dV[k];
      llt.matrixL().solveInPlace(T);
      MatrixXd T2 = T.transpose();
      llt.matrixL().solveInPlace(T2);
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (T2 + T2.transpose()), Eigen::EigenvaluesOnly);
      lmin = es.eigenvalues().minCoeff();
    } else {
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(V[k]);
      // V is numerically singular: compare against its eigen decomposition.
      VectorXd lam = es.eigenvalues().cwiseMax(1e-300);
      MatrixXd Q = es.eigenvectors();
      VectorXd isq = lam.cwiseSqrt().cwiseInverse();
      MatrixXd T = isq.asDiagonal() * (Q.transpose() * dV[k] * Q) * isq.asDiagonal();
      Eigen::SelfAdjointEigenSolver<MatrixXd> es2(0.5 * (T + T.transpose()), Eigen::EigenvaluesOnly);
      lmin = es2.eigenvalues().minCoeff();
    }
    if (lmin < 0) alpha = std::min(alpha, -1.0 / lmin);
  }
  return alpha;
}

Solution Solver::run() {
  const std::size_t nb = blocks_.size();
  Blocks X, S;
  initial_point(X, S);
  VectorXd y = VectorXd::Zero(m_);
  VectorXd u = VectorXd::Zero(nf_);

  Solution sol;
  int stall = 0;
  auto finish = [&](Status st) {
    sol.status = st;
    sol.X = X;
    sol.S = S;
    sol.y = y.cwiseProduct(row_scale_);
    sol.u = u;
    return sol;
  };
  // Best iterate by max(pinf, dinf, gap). Late iterations on degenerate
  // problems can drift once the Schur complement loses accuracy; the
  // solver then falls back to the best point seen.
  struct Snapshot {
    Blocks X, S;
    VectorXd y, u;
    double merit = std::numeric_limits<double>::infinity();
    double pobj = 0.0, dobj = 0.0, pinf = 0.0, dinf = 0.0, gap = 0.0;
    int iter = 0;
  } best;
  auto fallback = [&](Status st) {
    if (best.merit < std::max({sol.primal_infeasibility, sol.dual_infeasibility, sol.relative_gap})) {
      X = best.X;
      S = best.S;
      y = best.y;
      u = best.u;
      sol.primal_obj = best.pobj;
      sol.dual_obj = best.dobj;
      sol.primal_infeasibility = best.pinf;
      sol.dual_infeasibility = best.dinf;
      sol.relative_gap = best.gap;
    }
    const double merit = std::max({sol.primal_infeasibility, sol.dual_infeasibility, sol.relative_gap});
    return finish(merit <= opts_.near_tol ? Status::near_optimal : st);
  };

  for (int iter = 0;; ++iter) {
    sol.iterations = iter;
    // Residuals and objective values in the original scaling.
    VectorXd AX = apply_A(X);
    VectorXd Fu = F_ * u;
    VectorXd Rp = b_ - AX - Fu;
    Blocks AtY = apply_At(y);
    Blocks Rd(nb);
    for (std::size_t k = 0; k < nb; ++k) Rd[k] = blocks_[k].C - AtY[k] - S[k];
    VectorXd rf = cf_ - F_.transpose() * y;

    double pobj = cf_.dot(u), dobj = b_.dot(y);
    for (std::size_t k = 0; k < nb; ++k) pobj += blocks_[k].C.cwiseProduct(X[k]).sum();
    const double mu = inner(X, S) / nbar_;
    const double pinf = Rp.cwiseQuotient(row_scale_).norm() / (1.0 + norm_b_);
    const double rd_norm = std::sqrt(frob(Rd) * frob(Rd) + rf.squaredNorm());
    const double dinf = rd_norm / (1.0 + norm_C_);
    const double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    sol.primal_obj = pobj;
    sol.dual_obj = dobj;
    sol.primal_infeasibility = pinf;
    sol.dual_infeasibility = dinf;
    sol.relative_gap = gap;

    if (opts_.verbose) {
      std::fprintf(stderr, "%3d  pobj %+.8e  dobj %+.8e  pinf %.2e  dinf %.2e  gap %.2e  mu %.2e\n", iter, pobj,
                   dobj, pinf, dinf, gap, mu);
    }

    if (pinf <= opts_.tol && dinf <= opts_.tol && gap <= opts_.tol) return finish(Status::optimal);
    const double merit = std::max({pinf, dinf, gap});
    if (merit < best.merit) {
      best = Snapshot{X, S, y, u, merit, pobj, dobj, pinf, dinf, gap, iter};
    } else if (iter - best.iter >= 10 && best.merit <= opts_.near_tol) {
      sol.warnings.push_back("no progress in 10 iterations");
      return fallback(Status::near_optimal);
    }

    // Infeasibility certificates.
    if (dobj > 0) {
      double cn = 0.0;
      for (std::size_t k = 0; k < nb; ++k) cn += (AtY[k] + S[k]).squaredNorm();
      cn = std::sqrt(cn + (F_.transpose() * y).squaredNorm());
      if (cn / dobj < 1e-8 && dobj > 1e3) return finish(Status::infeasible);
    }
    if (pobj < 0) {
      const double an = (AX + Fu).cwiseQuotient(row_scale_).norm();
      if (an / -pobj < 1e-8 && -pobj > 1e3) return finish(Status::unbounded);
    }
    if (iter >= opts_.max_iter) return fallback(Status::max_iter);
    auto near = [&] { return fallback(Status::numerical_failure); };

    Blocks Sinv(nb);
    bool ok = true;
    for (std::size_t k = 0; k < nb && ok; ++k) {
      if (blocks_[k].diag) {
        Sinv[k] = S[k].cwiseInverse();
      } else {
        Eigen::LLT<MatrixXd> llt(S[k]);
        if (llt.info() != Eigen::Success) {
          ok = false;
          break;
        }
        Sinv[k] = llt.solve(MatrixXd::Identity(S[k].rows(), S[k].cols()));
        Sinv[k] = 0.5 * (Sinv[k] + Sinv[k].transpose());
      }
    }
    if (!ok) {
      sol.warnings.push_back("dual slack lost positive definiteness");
      return near();
    }
    build_schur(X, Sinv);
    if (!factor()) {
      sol.warnings.push_back("Schur complement factorization failed");
      return near();
    }

    // Predictor.
    Direction pred = direction(0.0, nullptr, X, Sinv, Rp, Rd, rf);
    const double ap = std::min(1.0, max_step(X, pred.dX));
    const double ad = std::min(1.0, max_step(S, pred.dS));
    double mu_aff = 0.0;
    for (std::size_t k = 0; k < nb; ++k) {
      mu_aff += (X[k] + ap * pred.dX[k]).cwiseProduct(S[k] + ad * pred.dS[k]).sum();
    }
    mu_aff /= nbar_;
    const double ratio = std::clamp(mu_aff / mu, 0.0, 1.0);
    const double sigma = std::max(ratio * ratio * ratio, 0.0);

    // Corrector.
    Blocks corr(nb);
    for (std::size_t k = 0; k < nb; ++k) {
      corr[k] = blocks_[k].diag ? MatrixXd(pred.dX[k].cwiseProduct(pred.dS[k])) : MatrixXd(pred.dX[k] * pred.dS[k]);
    }
    Direction d = direction(sigma * mu, &corr, X, Sinv, Rp, Rd, rf);
    const double amp = max_step(X, d.dX);
    const double amd = max_step(S, d.dS);
    const double gamma = 0.9 + 0.09 * std::min({ap, ad});
    const double alpha_p = std::min(1.0, gamma * amp);
    const double alpha_d = std::min(1.0, gamma * amd);

    if (!std::isfinite(alpha_p) || !std::isfinite(alpha_d) || !d.dy.allFinite()) {
      sol.warnings.push_back("non-finite search direction");
      return near();
    }
    if (alpha_p < 1e-8 && alpha_d < 1e-8) {
      if (++stall >= 3) {
        sol.warnings.push_back("step length stagnated");
        return near();
      }
    } else {
      stall = 0;
    }

    for (std::size_t k = 0; k < nb; ++k) {
      X[k] += alpha_p * d.dX[k];
      S[k] += alpha_d * d.dS[k];
    }
    u += alpha_p * d.du;
    y += alpha_d * d.dy;
  }
}

}  // namespace

Solution solve(const Problem& p, const Options& opts) {
  if (p.num_constraints() == 0) throw std::invalid_argument("problem has no constraints");
  Solver s(p, opts);
  return s.run();
}

}  // namespace roa::sdp
