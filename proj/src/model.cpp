#include "sporadic/model.hpp"

#include <stdexcept>

namespace sporadic {

MatrixXd he(const MatrixXd& M) { return M + M.transpose(); }

PlantModel PlantModel::linear(MatrixXd A, MatrixXd C, MatrixXd N, MatrixXd Cp) {
  PlantModel p;
  const Eigen::Index nz = A.rows();
  p.A = std::move(A);
  p.C = std::move(C);
  p.N = std::move(N);
  p.Cp = std::move(Cp);
  p.B = MatrixXd::Zero(nz, 1);
  p.S = MatrixXd::Zero(1, nz);
  p.lipschitz_ell = 1.0;
  p.psi = [](const VectorXd& v) { return VectorXd::Zero(v.size()).eval(); };
  return p;
}

std::string to_string(DesignMethod m) {
  switch (m) {
    case DesignMethod::PropPred: return "PropPred";
    case DesignMethod::PropX80: return "PropX80";
    case DesignMethod::PropX8X6: return "PropX8X6";
    case DesignMethod::ZOH: return "ZOH";
    case DesignMethod::Manual: return "manual";
  }
  return "unknown";
}

DesignMethod method_from_string(const std::string& s) {
  if (s == "PropPred") return DesignMethod::PropPred;
  if (s == "PropX80") return DesignMethod::PropX80;
  if (s == "PropX8X6") return DesignMethod::PropX8X6;
  if (s == "ZOH") return DesignMethod::ZOH;
  if (s == "manual") return DesignMethod::Manual;
  throw std::invalid_argument("unknown design method: " + s);
}

std::vector<std::string> validate_plant(const PlantModel& p) {
  std::vector<std::string> bad;
  const Eigen::Index nz = p.A.rows();
  if (nz < 1) bad.push_back("A: empty state matrix");
  if (p.A.cols() != nz) bad.push_back("A: not square");
  if (p.C.rows() < 1) bad.push_back("C: at least one output required");
  if (p.C.cols() != nz) bad.push_back("C: column count != n_z");
  if (p.N.rows() != nz) bad.push_back("N: row count != n_z");
  if (p.N.cols() < 1) bad.push_back("N: at least one disturbance channel required");
  if (p.Cp.cols() != nz) bad.push_back("Cp: column count != n_z");
  if (p.Cp.rows() < 1) bad.push_back("Cp: at least one performance output required");
  if (p.B.rows() != nz) bad.push_back("B: row count != n_z");
  if (p.S.cols() != nz) bad.push_back("S: column count != n_z");
  if (!(p.lipschitz_ell > 0.0)) bad.push_back("lipschitz_ell: must be > 0");
  if (!p.is_linear() && !p.psi) bad.push_back("psi: required for nonlinear plants");
  return bad;
}

static void require_gain_dims(const PlantModel& p, const ObserverGains& g) {
  if (g.L.rows() != p.nz() || g.L.cols() != p.ny())
    throw std::invalid_argument("gain L must be n_z x n_y");
  if (g.H.rows() != p.ny() || g.H.cols() != p.ny())
    throw std::invalid_argument("gain H must be n_y x n_y");
}

ErrorSystemMatrices assemble_error_matrices(const PlantModel& p, const ObserverGains& g) {
  if (auto bad = validate_plant(p); !bad.empty())
    throw std::invalid_argument("invalid plant: " + bad.front());
  require_gain_dims(p, g);
  const Eigen::Index nz = p.nz(), ny = p.ny();
  ErrorSystemMatrices e;
  e.F.resize(nz + ny, nz + ny);
  e.F.topLeftCorner(nz, nz) = p.A - g.L * p.C;
  e.F.topRightCorner(nz, ny) = g.L;
  e.F.bottomLeftCorner(ny, nz) = p.C * p.A - p.C * g.L * p.C - g.H * p.C;
  e.F.bottomRightCorner(ny, ny) = p.C * g.L + g.H;
  e.Q.resize(nz + ny, p.ns());
  e.Q.topRows(nz) = p.B;
  e.Q.bottomRows(ny) = p.C * p.B;
  e.Tmat.resize(nz + ny, p.nw());
  e.Tmat.topRows(nz) = p.N;
  e.Tmat.bottomRows(ny) = p.C * p.N;
  e.Gjump = MatrixXd::Zero(nz + ny, nz + ny);
  e.Gjump.topLeftCorner(nz, nz).setIdentity();
  e.Njump = MatrixXd::Zero(nz + ny, ny);
  e.Njump.bottomRows(ny) = -MatrixXd::Identity(ny, ny);
  return e;
}

std::pair<MatrixXd, MatrixXd> factorize_F(const PlantModel& p, const ObserverGains& g) {
  if (auto bad = validate_plant(p); !bad.empty())
    throw std::invalid_argument("invalid plant: " + bad.front());
  require_gain_dims(p, g);
  const Eigen::Index nz = p.nz(), ny = p.ny();
  MatrixXd Fl = MatrixXd::Identity(nz + ny, nz + ny);
  Fl.bottomLeftCorner(ny, nz) = p.C;
  MatrixXd Fr(nz + ny, nz + ny);
  Fr.topLeftCorner(nz, nz) = p.A - g.L * p.C;
  Fr.topRightCorner(nz, ny) = g.L;
  Fr.bottomLeftCorner(ny, nz) = -g.H * p.C;
  Fr.bottomRightCorner(ny, ny) = g.H;
  return {Fl, Fr};
}

VectorXd zeta_mismatch(const PlantModel& p, const VectorXd& z, const VectorXd& eps) {
  if (p.is_linear()) return VectorXd::Zero(p.ns());
  return p.psi(p.S * z) - p.psi(p.S * (z - eps));
}

}  // namespace sporadic
