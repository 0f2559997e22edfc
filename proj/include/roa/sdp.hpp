#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace roa::sdp {

/// One upper-triangle entry (row <= col, 0-based) of a symmetric block
/// matrix. For diagonal (LP) blocks row == col.
struct Entry {
  int block = 0;
  int row = 0;
  int col = 0;
  double value = 0.0;
};

/// A free (sign-unrestricted) primal variable: its objective coefficient and
/// its coefficients in the equality constraints.
struct FreeVariable {
  double cost = 0.0;
  std::vector<std::pair<int, double>> coeffs;
};

/// Block-diagonal SDP in standard form
///
///   min  C.X + c_f.u   s.t.  A_j.X + (F u)_j = b_j,  X >= 0,  u free
///   max  b.y           s.t.  C - sum_j y_j A_j = S >= 0,  F^T y = c_f.
///
/// Blocks with negative dimension are diagonal (LP) blocks. Matrices are
/// stored as upper-triangle entry lists; duplicate entries are summed.
struct Problem {
  std::vector<int> block_dims;
  std::vector<Entry> objective;
  std::vector<std::vector<Entry>> constraints;
  std::vector<double> rhs;
  std::vector<FreeVariable> free_vars;

  int num_constraints() const { return static_cast<int>(constraints.size()); }
  int add_block(int dim);
  int add_constraint(double b);
  int add_free(double cost);
  /// Throws std::invalid_argument on inconsistent dimensions or indices.
  void validate() const;
  /// Sums duplicates, drops zeros and sorts all entry lists.
  void canonicalize();
  std::size_t nnz() const;
};

enum class Status { optimal, near_optimal, infeasible, unbounded, max_iter, numerical_failure };

std::string to_string(Status s);

struct Solution {
  Status status = Status::numerical_failure;
  /// Primal blocks; diagonal blocks are stored as column vectors.
  std::vector<Eigen::MatrixXd> X;
  std::vector<Eigen::MatrixXd> S;
  Eigen::VectorXd y;
  Eigen::VectorXd u;
  double primal_obj = 0.0;
  double dual_obj = 0.0;
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  double relative_gap = 0.0;
  int iterations = 0;
  std::vector<std::string> warnings;
};

struct Options {
  double tol = 1e-7;
  int max_iter = 200;
  /// Accepted as near_optimal when the run stalls.
  double near_tol = 1e-5;
  bool verbose = false;
};

/// Infeasible primal-dual path-following method with the HKM search
/// direction and Mehrotra predictor-corrector steps. Dense Schur complement
/// with Cholesky; free variables are handled through the reduced system
/// F^T M^{-1} F. Deterministic.
Solution solve(const Problem& p, const Options& opts = {});

/// Smallest eigenvalue of every block of `blocks`, used for PSD checks.
double min_eigenvalue(const std::vector<Eigen::MatrixXd>& blocks, const std::vector<int>& dims);

// SDPA sparse (.dat-s) interchange.

/// Emits the SDPA sparse format. The standard form above maps to SDPA as
/// c := b, F_0 := -C, F_j := A_j. Free variables are written as the
/// difference of two nonnegative variables in an extra diagonal block.
std::string export_sdpa(const Problem& p);

class SdpaParseError : public std::runtime_error {
 public:
  SdpaParseError(const std::string& what, int line);
  int line() const { return line_; }

 private:
  int line_;
};

Problem parse_sdpa(const std::string& text);

}  // namespace roa::sdp
