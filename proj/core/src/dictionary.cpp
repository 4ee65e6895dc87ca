#include "sigsparse/dictionary.hpp"

#include <cstring>
#include <fstream>

#include "json.hpp"
#include "sigsparse/error.hpp"

namespace sigsparse {

namespace {
constexpr char kMagic[8] = {'S', 'G', 'S', 'P', 'D', 'I', 'C', 'T'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

const char* to_string(AtomConstraint c) {
  return c == AtomConstraint::UnitBall ? "unit-ball" : "non-negative-unit-ball";
}

AtomConstraint atom_constraint_from_string(const std::string& s) {
  if (s == "unit-ball") return AtomConstraint::UnitBall;
  if (s == "non-negative-unit-ball") return AtomConstraint::NonNegativeUnitBall;
  throw Error("unknown atom constraint: " + s);
}

const char* to_string(Solver s) { return s == Solver::Omp ? "omp" : "lars"; }

void project_atoms(Eigen::MatrixXd& atoms, AtomConstraint constraint) {
  if (constraint == AtomConstraint::NonNegativeUnitBall) atoms = atoms.cwiseMax(0.0);
  for (Eigen::Index j = 0; j < atoms.cols(); ++j) {
    const double norm = atoms.col(j).norm();
    if (norm > 1.0) atoms.col(j) /= norm;
  }
}

Dictionary::Dictionary(Eigen::MatrixXd atoms, AtomConstraint constraint)
    : atoms_(std::move(atoms)), constraint_(constraint) {
  if (atoms_.rows() < 1) throw Error("dictionary: empty atoms");
  if (atoms_.cols() <= atoms_.rows())
    throw Error("dictionary must be overcomplete (K > n)");
  for (Eigen::Index j = 0; j < atoms_.cols(); ++j) {
    if (!atoms_.col(j).allFinite()) throw Error("dictionary: non-finite atom");
    if (atoms_.col(j).squaredNorm() > 1.0 + kNormSlack)
      throw Error("dictionary: atom outside the unit ball");
  }
  if (constraint_ == AtomConstraint::NonNegativeUnitBall && atoms_.minCoeff() < 0.0)
    throw Error("dictionary: negative entry under non-negative constraint");
  gram_ = atoms_.transpose() * atoms_;
}

Dictionary Dictionary::projected(Eigen::MatrixXd atoms, AtomConstraint constraint) {
  project_atoms(atoms, constraint);
  return Dictionary(std::move(atoms), constraint);
}

void save_dictionary(const std::filesystem::path& path, const Dictionary& dict,
                     const std::map<std::string, std::string>& metadata) {
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out.write(kMagic, sizeof kMagic);
    const std::uint32_t header[4] = {kVersion, static_cast<std::uint32_t>(dict.n()),
                                     static_cast<std::uint32_t>(dict.K()),
                                     static_cast<std::uint32_t>(dict.constraint())};
    out.write(reinterpret_cast<const char*>(header), sizeof header);
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows =
        dict.atoms();
    out.write(reinterpret_cast<const char*>(rows.data()),
              static_cast<std::streamsize>(rows.size() * sizeof(double)));
    if (!out) throw Error("write failed: " + path.string());
  }
  nlohmann::json meta;
  meta["format_version"] = kVersion;
  meta["n"] = dict.n();
  meta["K"] = dict.K();
  meta["constraint"] = to_string(dict.constraint());
  for (const auto& [k, v] : metadata) meta["metadata"][k] = v;
  std::ofstream js(path.string() + ".json");
  js << meta.dump(2) << '\n';
}

Dictionary load_dictionary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw Error("not a dictionary file: " + path.string());
  std::uint32_t header[4];
  in.read(reinterpret_cast<char*>(header), sizeof header);
  if (!in) throw Error("truncated dictionary header");
  if (header[0] != kVersion) throw Error("unsupported dictionary version");
  if (header[3] > 1) throw Error("unknown dictionary constraint tag");
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows(header[1],
                                                                               header[2]);
  in.read(reinterpret_cast<char*>(rows.data()),
          static_cast<std::streamsize>(rows.size() * sizeof(double)));
  if (!in) throw Error("truncated dictionary atoms");
  return Dictionary(Eigen::MatrixXd(rows), static_cast<AtomConstraint>(header[3]));
}

int SparseCodes::support_size(int j) const {
  int nnz = 0;
  for (Eigen::SparseMatrix<double>::InnerIterator it(A, j); it; ++it)
    if (it.value() != 0.0) ++nnz;
  return nnz;
}

}  // namespace sigsparse
