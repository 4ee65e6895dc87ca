#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace sigsparse {

/// Feasible set for atoms: the unit l2 ball, optionally intersected with the
/// non-negative orthant.
enum class AtomConstraint : std::uint32_t { UnitBall = 0, NonNegativeUnitBall = 1 };

const char* to_string(AtomConstraint c);
AtomConstraint atom_constraint_from_string(const std::string& s);

/// Projects every column onto the constraint set in place.
void project_atoms(Eigen::MatrixXd& atoms, AtomConstraint constraint);

/// Overcomplete dictionary D = [d_1 ... d_K] of n-dimensional atoms.
/// Construction validates K > n, ||d_j||^2 <= 1 + 1e-9 and, for the
/// non-negative constraint, d_j >= 0.
class Dictionary {
 public:
  static constexpr double kNormSlack = 1e-9;

  explicit Dictionary(Eigen::MatrixXd atoms,
                      AtomConstraint constraint = AtomConstraint::UnitBall);

  /// Projects first, then validates.
  static Dictionary projected(Eigen::MatrixXd atoms,
                              AtomConstraint constraint = AtomConstraint::UnitBall);

  int n() const { return static_cast<int>(atoms_.rows()); }
  int K() const { return static_cast<int>(atoms_.cols()); }
  const Eigen::MatrixXd& atoms() const { return atoms_; }
  AtomConstraint constraint() const { return constraint_; }

  /// D^T D.
  const Eigen::MatrixXd& gram() const { return gram_; }

  friend bool operator==(const Dictionary& a, const Dictionary& b) {
    return a.constraint_ == b.constraint_ && a.atoms_ == b.atoms_;
  }

 private:
  Eigen::MatrixXd atoms_;
  AtomConstraint constraint_;
  Eigen::MatrixXd gram_;
};

// Binary dictionary file, little-endian:
//   char[8]  magic "SGSPDICT"
//   uint32   format version (1)
//   uint32   n
//   uint32   K
//   uint32   constraint tag (0 unit ball, 1 non-negative unit ball)
//   float64  atoms, row-major (n rows of K values)
// save_dictionary also writes "<path>.json" with the shape, tag and any
// caller metadata.
void save_dictionary(const std::filesystem::path& path, const Dictionary& dict,
                     const std::map<std::string, std::string>& metadata = {});
Dictionary load_dictionary(const std::filesystem::path& path);

enum class Solver : std::uint8_t { Omp, Lars };
const char* to_string(Solver s);

/// Per-column status bits of a sparse code.
enum CodeFlag : std::uint8_t {
  kCodeOk = 0,
  kCodeZeroInput = 1,      // x = 0, code is zero
  kCodeRankDeficient = 2,  // selection stopped early on a dependent atom
  kCodeTieBreak = 4,       // an exact tie was resolved by lowest atom index
};

/// K x M coefficient matrix A, stored column-compressed (per-column support
/// indices plus values).
struct SparseCodes {
  Eigen::SparseMatrix<double> A;
  Solver solver = Solver::Omp;
  /// rho for OMP, lambda for LARS.
  double sparsity_param = 0.0;
  bool positive = false;
  std::vector<std::uint8_t> flags;

  int K() const { return static_cast<int>(A.rows()); }
  int M() const { return static_cast<int>(A.cols()); }
  Eigen::MatrixXd dense() const { return Eigen::MatrixXd(A); }
  /// Number of nonzeros in column j.
  int support_size(int j) const;
};

}  // namespace sigsparse
