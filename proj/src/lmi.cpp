#include "sporadic/lmi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sporadic {

MatrixXd AffineSymMatrix::eval(const VectorXd& x) const {
  MatrixXd M = constant;
  for (const auto& [k, coef] : terms) M.noalias() += x(static_cast<Eigen::Index>(k)) * coef;
  return M;
}

MatrixXd MatrixVar::value(const VectorXd& x) const {
  MatrixXd M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
      M(i, j) = x(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(i * cols + j)]));
  return M;
}

const MatrixVar& LmiProblem::block(const std::string& name) const {
  for (const auto& mv : matrix_vars)
    if (mv.name == name) return mv;
  throw std::out_of_range("no such matrix variable: " + name);
}

bool LmiProblem::has_block(const std::string& name) const {
  return std::any_of(matrix_vars.begin(), matrix_vars.end(),
                     [&](const MatrixVar& mv) { return mv.name == name; });
}

MatrixXd LmiProblem::block_value(const std::string& name, const VectorXd& x) const {
  return block(name).value(x);
}

std::size_t LmiBuilder::scalar(const std::string& label) {
  labels_.push_back(label);
  return labels_.size() - 1;
}

const MatrixVar& LmiBuilder::sym(const std::string& name, Eigen::Index n) {
  MatrixVar mv;
  mv.name = name;
  mv.rows = mv.cols = n;
  mv.symmetric = true;
  mv.idx.resize(static_cast<std::size_t>(n * n));
  std::vector<std::size_t> upper(static_cast<std::size_t>(n * n));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j)
      upper[static_cast<std::size_t>(i * n + j)] =
          scalar(name + "[" + std::to_string(i) + "][" + std::to_string(j) + "]");
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      mv.idx[static_cast<std::size_t>(i * n + j)] =
          upper[static_cast<std::size_t>(std::min(i, j) * n + std::max(i, j))];
  matrix_vars_.push_back(std::move(mv));
  return matrix_vars_.back();
}

const MatrixVar& LmiBuilder::full(const std::string& name, Eigen::Index r, Eigen::Index c) {
  MatrixVar mv;
  mv.name = name;
  mv.rows = r;
  mv.cols = c;
  mv.symmetric = false;
  mv.idx.resize(static_cast<std::size_t>(r * c));
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j)
      mv.idx[static_cast<std::size_t>(i * c + j)] =
          scalar(name + "[" + std::to_string(i) + "][" + std::to_string(j) + "]");
  matrix_vars_.push_back(std::move(mv));
  return matrix_vars_.back();
}

void LmiBuilder::require_neg_semidef(const std::function<MatrixXd(const VectorXd&)>& fn,
                                     double eps_scale) {
  const auto n = static_cast<Eigen::Index>(labels_.size());
  VectorXd x = VectorXd::Zero(n);
  AffineSymMatrix c;
  c.constant = fn(x);
  c.dim = c.constant.rows();
  for (Eigen::Index k = 0; k < n; ++k) {
    x(k) = 1.0;
    MatrixXd coef = fn(x) - c.constant;
    x(k) = 0.0;
    coef = 0.5 * (coef + coef.transpose().eval());
    if (coef.cwiseAbs().maxCoeff() > 0.0) c.terms.emplace_back(static_cast<std::size_t>(k), coef);
  }
  c.constant = 0.5 * (c.constant + c.constant.transpose().eval());
  const double eps = eps_scale * (1.0 + c.constant.cwiseAbs().maxCoeff());
  c.constant += eps * MatrixXd::Identity(c.dim, c.dim);
  constraints_.push_back(std::move(c));
}

void LmiBuilder::require_pos_def(const std::string& block_name) {
  const MatrixVar* mv = nullptr;
  for (const auto& m : matrix_vars_)
    if (m.name == block_name) mv = &m;
  if (!mv || !mv->symmetric) throw std::invalid_argument("require_pos_def needs a symmetric block");
  AffineSymMatrix c;
  c.dim = mv->rows;
  c.constant = kEpsPd * MatrixXd::Identity(c.dim, c.dim);
  for (Eigen::Index i = 0; i < c.dim; ++i)
    for (Eigen::Index j = i; j < c.dim; ++j) {
      MatrixXd coef = MatrixXd::Zero(c.dim, c.dim);
      coef(i, j) = coef(j, i) = -1.0;
      c.terms.emplace_back(mv->idx[static_cast<std::size_t>(i * c.dim + j)], coef);
    }
  constraints_.push_back(std::move(c));
  psd_.push_back(block_name);
}

void LmiBuilder::require_nonneg(std::size_t var) {
  AffineSymMatrix c;
  c.dim = 1;
  c.constant = MatrixXd::Zero(1, 1);
  c.terms.emplace_back(var, -MatrixXd::Identity(1, 1));
  constraints_.push_back(std::move(c));
}

LmiProblem LmiBuilder::finish(std::optional<VectorXd> objective) {
  LmiProblem p;
  p.variables.reserve(labels_.size());
  for (std::size_t k = 0; k < labels_.size(); ++k) p.variables.push_back({k, labels_[k]});
  p.constraints = std::move(constraints_);
  p.matrix_vars = std::move(matrix_vars_);
  p.psd_variables = std::move(psd_);
  p.objective = std::move(objective);
  p.metadata = meta_;
  return p;
}

// ---- M(tau) and friends ----

namespace {

// Core block assembly shared by eval_M and the verification builder. gamma2
// enters linearly so the builder can substitute the decision variable mu.
MatrixXd m_matrix(const PlantModel& p, const ObserverGains& g, const MatrixXd& P1,
                  const MatrixXd& P2, double chi, double lambda_t, double gamma2, double delta,
                  double tau) {
  const Eigen::Index nz = p.nz(), ny = p.ny(), nw = p.nw();
  const bool lin = p.is_linear();
  const Eigen::Index ns = lin ? 0 : p.ns();
  const double e = std::exp(delta * tau);
  const double ell2 = p.lipschitz_ell * p.lipschitz_ell;

  const Eigen::Index dim = nz + ny + nw + ns;
  MatrixXd M = MatrixXd::Zero(dim, dim);
  const MatrixXd Alc = p.A - g.L * p.C;
  const MatrixXd Fy = p.C * p.A - p.C * g.L * p.C - g.H * p.C;

  MatrixXd M11 = he(P1 * Alc) + 2.0 * lambda_t * P1 + p.Cp.transpose() * p.Cp;
  if (!lin) M11 += chi * ell2 * p.S.transpose() * p.S;
  M.topLeftCorner(nz, nz) = M11;
  M.block(0, nz, nz, ny) = P1 * g.L + e * Fy.transpose() * P2;
  M.block(nz, nz, ny, ny) = e * (he(P2 * (p.C * g.L + g.H)) + (2.0 * lambda_t - delta) * P2);
  M.block(0, nz + ny, nz, nw) = P1 * p.N;
  M.block(nz, nz + ny, ny, nw) = e * P2 * p.C * p.N;
  M.block(nz + ny, nz + ny, nw, nw) = -gamma2 * MatrixXd::Identity(nw, nw);
  if (!lin) {
    M.block(0, nz + ny + nw, nz, ns) = P1 * p.B;
    M.block(nz, nz + ny + nw, ny, ns) = e * P2 * p.C * p.B;
    M.block(nz + ny + nw, nz + ny + nw, ns, ns) = -chi * MatrixXd::Identity(ns, ns);
  }
  M.triangularView<Eigen::StrictlyLower>() = M.transpose();
  return M;
}

void check_plant_gains(const PlantModel& p, const ObserverGains& g) {
  if (auto bad = validate_plant(p); !bad.empty())
    throw std::invalid_argument("invalid plant: " + bad.front());
  if (g.L.rows() != p.nz() || g.L.cols() != p.ny() || g.H.rows() != p.ny() ||
      g.H.cols() != p.ny())
    throw std::invalid_argument("gain dimensions do not match plant");
}

}  // namespace

MatrixXd eval_M(const PlantModel& plant, const ObserverGains& gains, const Certificate& cert,
                double tau) {
  check_plant_gains(plant, gains);
  if (tau < -1e-12 || tau > cert.T2 * (1.0 + 1e-12) + 1e-15)
    throw std::out_of_range("tau outside [0, T2]");
  const double chi = plant.is_linear() ? 0.0 : cert.chi;
  return m_matrix(plant, gains, cert.P1, cert.P2, chi, cert.lambda_t, cert.gamma * cert.gamma,
                  cert.delta, tau);
}

std::pair<double, double> convex_decomposition(double delta, double T2, double tau) {
  if (!(delta > 0.0) || !(T2 > 0.0)) throw std::invalid_argument("delta and T2 must be positive");
  const double lambda2 = std::expm1(delta * tau) / std::expm1(delta * T2);
  return {1.0 - lambda2, lambda2};
}

LmiProblem build_verification_problem(const PlantModel& plant, const ObserverGains& gains,
                                      double lambda_t, double delta, double T2,
                                      std::optional<double> fixed_gamma) {
  check_plant_gains(plant, gains);
  const bool lin = plant.is_linear();
  LmiBuilder b({"verify", delta, T2, lambda_t});
  const MatrixVar P1 = b.sym("P1", plant.nz());
  const MatrixVar P2 = b.sym("P2", plant.ny());
  std::optional<std::size_t> chi_var, mu_var;
  if (!lin) chi_var = b.scalar("chi");
  if (!fixed_gamma) mu_var = b.scalar("mu");

  auto M_at = [&, chi_var, mu_var](double tau) {
    return [&, chi_var, mu_var, tau](const VectorXd& x) {
      const double chi = chi_var ? x(static_cast<Eigen::Index>(*chi_var)) : 0.0;
      const double g2 = mu_var ? x(static_cast<Eigen::Index>(*mu_var))
                               : (*fixed_gamma) * (*fixed_gamma);
      return m_matrix(plant, gains, P1.value(x), P2.value(x), chi, lambda_t, g2, delta, tau);
    };
  };
  b.require_neg_semidef(M_at(0.0), kEpsNonstrictScale);
  b.require_neg_semidef(M_at(T2), kEpsNonstrictScale);
  b.require_pos_def("P1");
  b.require_pos_def("P2");
  if (chi_var) b.require_nonneg(*chi_var);
  if (mu_var) b.require_nonneg(*mu_var);

  std::optional<VectorXd> obj;
  if (mu_var) {
    VectorXd c = VectorXd::Zero(static_cast<Eigen::Index>(b.num_vars()));
    c(static_cast<Eigen::Index>(*mu_var)) = 1.0;
    obj = c;
  }
  return b.finish(std::move(obj));
}

// ---- slack-variable design block assembly ----

namespace {

// Bordered matrix common to the projection-based designs:
//   [ He(S1)   S2 + P    S3      S4   ]
//   [   .    Ncal+He(S5) S6      S7   ]
//   [   .        .     -g2 I     0    ]
//   [   .        .        .    -chi I ]
// with P = diag(P1, e P2), Ncal = diag(2 lt P1 + Cp'Cp + chi l^2 S'S, (-d+2 lt) e P2),
// e = 1 at tau=0 and e^{d T2} at tau=T2. The zeta row/column is dropped for linear plants.
MatrixXd slack_bordered(const PlantModel& p, const MatrixXd& S1, const MatrixXd& S2,
                        const MatrixXd& S5, const MatrixXd& S3, const MatrixXd& S4,
                        const MatrixXd& S6, const MatrixXd& S7, const MatrixXd& P1,
                        const MatrixXd& P2, double chi, double lambda_t, double gamma2,
                        double delta, double T2, bool at_T2) {
  const Eigen::Index nz = p.nz(), ny = p.ny(), nw = p.nw();
  const bool lin = p.is_linear();
  const Eigen::Index ns = lin ? 0 : p.ns();
  const Eigen::Index nv = nz + ny;
  const double e = at_T2 ? std::exp(delta * T2) : 1.0;
  const double ell2 = p.lipschitz_ell * p.lipschitz_ell;

  MatrixXd Pcal = MatrixXd::Zero(nv, nv);
  Pcal.topLeftCorner(nz, nz) = P1;
  Pcal.bottomRightCorner(ny, ny) = e * P2;
  MatrixXd Ncal = MatrixXd::Zero(nv, nv);
  Ncal.topLeftCorner(nz, nz) = 2.0 * lambda_t * P1 + p.Cp.transpose() * p.Cp;
  if (!lin) Ncal.topLeftCorner(nz, nz) += chi * ell2 * p.S.transpose() * p.S;
  Ncal.bottomRightCorner(ny, ny) = (-delta + 2.0 * lambda_t) * e * P2;

  const Eigen::Index dim = 2 * nv + nw + ns;
  MatrixXd M = MatrixXd::Zero(dim, dim);
  M.topLeftCorner(nv, nv) = he(S1);
  M.block(0, nv, nv, nv) = S2 + Pcal;
  M.block(nv, nv, nv, nv) = Ncal + he(S5);
  M.block(0, 2 * nv, nv, nw) = S3;
  M.block(nv, 2 * nv, nv, nw) = S6;
  M.block(2 * nv, 2 * nv, nw, nw) = -gamma2 * MatrixXd::Identity(nw, nw);
  if (!lin) {
    M.block(0, 2 * nv + nw, nv, ns) = S4;
    M.block(nv, 2 * nv + nw, nv, ns) = S7;
    M.block(2 * nv + nw, 2 * nv + nw, ns, ns) = -chi * MatrixXd::Identity(ns, ns);
  }
  M.triangularView<Eigen::StrictlyLower>() = M.transpose();
  return M;
}

MatrixXd stack2(const MatrixXd& top, const MatrixXd& bottom) {
  MatrixXd r(top.rows() + bottom.rows(), top.cols());
  r << top, bottom;
  return r;
}

}  // namespace

MatrixXd projection_constraint(const PlantModel& p, const ObserverGains& g,
                               const SlackBlocks& sb, const MatrixXd& P1, const MatrixXd& P2,
                               double chi, double lambda_t, double gamma2, double delta, double T2,
                               bool at_T2) {
  const Eigen::Index nz = p.nz(), ny = p.ny();
  const MatrixXd Alc = p.A - g.L * p.C;
  const MatrixXd HC = g.H * p.C;
  MatrixXd S1(nz + ny, nz + ny), S2(nz + ny, nz + ny), S5(nz + ny, nz + ny);
  S1 << -sb.X1 + p.C.transpose() * sb.X5, -sb.X2 + p.C.transpose() * sb.X6, -sb.X5, -sb.X6;
  S2 << sb.X1.transpose() * Alc - sb.X5.transpose() * HC - sb.X3 + p.C.transpose() * sb.X7,
      -sb.X4 + p.C.transpose() * sb.X8 + sb.X1.transpose() * g.L + sb.X5.transpose() * g.H,
      sb.X2.transpose() * Alc - sb.X6.transpose() * HC - sb.X7,
      -sb.X8 + sb.X2.transpose() * g.L + sb.X6.transpose() * g.H;
  S5 << Alc.transpose() * sb.X3 - p.C.transpose() * g.H.transpose() * sb.X7,
      Alc.transpose() * sb.X4 - p.C.transpose() * g.H.transpose() * sb.X8,
      g.L.transpose() * sb.X3 + g.H.transpose() * sb.X7,
      g.L.transpose() * sb.X4 + g.H.transpose() * sb.X8;
  const MatrixXd S3 = stack2(sb.X1.transpose() * p.N, sb.X2.transpose() * p.N);
  const MatrixXd S4 = stack2(sb.X1.transpose() * p.B, sb.X2.transpose() * p.B);
  const MatrixXd S6 = stack2(sb.X3.transpose() * p.N, sb.X4.transpose() * p.N);
  const MatrixXd S7 = stack2(sb.X3.transpose() * p.B, sb.X4.transpose() * p.B);
  return slack_bordered(p, S1, S2, S5, S3, S4, S6, S7, P1, P2, chi, lambda_t, gamma2, delta, T2,
                        at_T2);
}

namespace {

// Prop-2 style synthesis matrix: variables (P1, P2, J, Y); gains eliminated via
// J = P1 L, Y = (CL + H)' P2.
MatrixXd design_mat_pred(const PlantModel& p, const MatrixXd& P1, const MatrixXd& P2,
                         const MatrixXd& J, const MatrixXd& Y, double chi, double lambda_t,
                         double gamma2, double delta, double T2, bool at_T2) {
  const Eigen::Index nz = p.nz(), ny = p.ny(), nw = p.nw();
  const bool lin = p.is_linear();
  const Eigen::Index ns = lin ? 0 : p.ns();
  const double e = at_T2 ? std::exp(delta * T2) : 1.0;
  const double ell2 = p.lipschitz_ell * p.lipschitz_ell;

  const Eigen::Index dim = nz + ny + nw + ns;
  MatrixXd M = MatrixXd::Zero(dim, dim);
  MatrixXd M11 = he(P1 * p.A - J * p.C) + 2.0 * lambda_t * P1 + p.Cp.transpose() * p.Cp;
  if (!lin) M11 += chi * ell2 * p.S.transpose() * p.S;
  M.topLeftCorner(nz, nz) = M11;
  M.block(0, nz, nz, ny) =
      J + e * (p.A.transpose() * p.C.transpose() * P2 - p.C.transpose() * Y);
  M.block(nz, nz, ny, ny) = e * (he(Y) + (2.0 * lambda_t - delta) * P2);
  M.block(0, nz + ny, nz, nw) = P1 * p.N;
  M.block(nz, nz + ny, ny, nw) = e * P2 * p.C * p.N;
  M.block(nz + ny, nz + ny, nw, nw) = -gamma2 * MatrixXd::Identity(nw, nw);
  if (!lin) {
    M.block(0, nz + ny + nw, nz, ns) = P1 * p.B;
    M.block(nz, nz + ny + nw, ny, ns) = e * P2 * p.C * p.B;
    M.block(nz + ny + nw, nz + ny + nw, ns, ns) = -chi * MatrixXd::Identity(ns, ns);
  }
  M.triangularView<Eigen::StrictlyLower>() = M.transpose();
  return M;
}

// Shared by the X80/X8X6 designs; with_coupling adds the X8 = U blocks that
// remove the delta > 2 lambda_t restriction.
MatrixXd design_mat_x(const PlantModel& p, const MatrixXd& X, const MatrixXd& U, const MatrixXd& W,
                      const MatrixXd& J, const MatrixXd& P1, const MatrixXd& P2, double chi,
                      double lambda_t, double gamma2, double delta, double T2, bool at_T2,
                      bool with_coupling) {
  const Eigen::Index nz = p.nz(), ny = p.ny(), nw = p.nw();
  const Eigen::Index ns = p.is_linear() ? 0 : p.ns();
  MatrixXd S1(nz + ny, nz + ny), S2(nz + ny, nz + ny), S5(nz + ny, nz + ny);
  const MatrixXd Zyz = MatrixXd::Zero(ny, nz);
  const MatrixXd Zzy = MatrixXd::Zero(nz, ny);
  const MatrixXd Zyy = MatrixXd::Zero(ny, ny);
  S1 << -X, p.C.transpose() * U, Zyz, -U;
  if (with_coupling) {
    S2 << -X + X.transpose() * p.A - J * p.C, J + p.C.transpose() * U, -W * p.C, -U + W;
    S5 << p.A.transpose() * X - p.C.transpose() * J.transpose(), -p.C.transpose() * W.transpose(),
        J.transpose(), W.transpose();
  } else {
    S2 << -X + X.transpose() * p.A - J * p.C, J, -W * p.C, W;
    S5 << p.A.transpose() * X - p.C.transpose() * J.transpose(), Zzy, J.transpose(), Zyy;
  }
  const MatrixXd XtN = stack2(X.transpose() * p.N, MatrixXd::Zero(ny, nw));
  const MatrixXd XtB = stack2(X.transpose() * p.B, MatrixXd::Zero(ny, ns));
  return slack_bordered(p, S1, S2, S5, XtN, XtB, XtN, XtB, P1, P2, chi, lambda_t, gamma2, delta,
                        T2, at_T2);
}

// ZOH synthesis matrix; V5..V8 are the side-specific free slabs (X5..X8 at tau=0,
// Y5..Y8 at tau=T2).
MatrixXd design_mat_zoh(const PlantModel& p, const MatrixXd& X, const MatrixXd& V5,
                        const MatrixXd& V6, const MatrixXd& V7, const MatrixXd& V8,
                        const MatrixXd& J, const MatrixXd& P1, const MatrixXd& P2, double chi,
                        double lambda_t, double gamma2, double delta, double T2, bool at_T2) {
  const Eigen::Index nz = p.nz(), ny = p.ny(), nw = p.nw();
  const Eigen::Index ns = p.is_linear() ? 0 : p.ns();
  MatrixXd S1(nz + ny, nz + ny), S2(nz + ny, nz + ny), S5(nz + ny, nz + ny);
  S1 << -X + p.C.transpose() * V5, p.C.transpose() * V6, -V5, -V6;
  S2 << -X + X.transpose() * p.A - J * p.C + p.C.transpose() * V7, J + p.C.transpose() * V8, -V7,
      -V8;
  S5 << p.A.transpose() * X - p.C.transpose() * J.transpose(), MatrixXd::Zero(nz, ny),
      J.transpose(), MatrixXd::Zero(ny, ny);
  const MatrixXd XtN = stack2(X.transpose() * p.N, MatrixXd::Zero(ny, nw));
  const MatrixXd XtB = stack2(X.transpose() * p.B, MatrixXd::Zero(ny, ns));
  return slack_bordered(p, S1, S2, S5, XtN, XtB, XtN, XtB, P1, P2, chi, lambda_t, gamma2, delta,
                        T2, at_T2);
}

}  // namespace

LmiProblem build_design_problem(const PlantModel& plant, DesignMethod method, double lambda_t,
                                double delta, double T2, std::optional<double> fixed_gamma,
                                std::optional<double> gain_norm_cap, bool zoh_nonsingular) {
  if (auto bad = validate_plant(plant); !bad.empty())
    throw std::invalid_argument("invalid plant: " + bad.front());
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  if (method == DesignMethod::PropX80 && delta <= 2.0 * lambda_t)
    throw std::invalid_argument("PropX80 requires delta > 2 lambda_t");
  if (method == DesignMethod::Manual)
    throw std::invalid_argument("no design problem for manual gains");

  const bool lin = plant.is_linear();
  const Eigen::Index nz = plant.nz(), ny = plant.ny();
  LmiBuilder b({to_string(method), delta, T2, lambda_t});
  const MatrixVar P1 = b.sym("P1", nz);
  const MatrixVar P2 = b.sym("P2", ny);

  std::optional<std::size_t> chi_var, mu_var;
  auto chi_of = [&chi_var](const VectorXd& x) {
    return chi_var ? x(static_cast<Eigen::Index>(*chi_var)) : 0.0;
  };

  std::function<MatrixXd(const VectorXd&, bool)> mat;
  std::optional<MatrixVar> Jv;
  if (method == DesignMethod::PropPred) {
    const MatrixVar J = b.full("J", nz, ny);
    const MatrixVar Y = b.full("Y", ny, ny);
    Jv = J;
    if (!lin) chi_var = b.scalar("chi");
    if (!fixed_gamma) mu_var = b.scalar("mu");
    mat = [&, J, Y](const VectorXd& x, bool at_T2) {
      const double g2 =
          mu_var ? x(static_cast<Eigen::Index>(*mu_var)) : (*fixed_gamma) * (*fixed_gamma);
      return design_mat_pred(plant, P1.value(x), P2.value(x), J.value(x), Y.value(x), chi_of(x),
                             lambda_t, g2, delta, T2, at_T2);
    };
  } else if (method == DesignMethod::PropX80 || method == DesignMethod::PropX8X6) {
    const MatrixVar X = b.full("X", nz, nz);
    const MatrixVar U = b.full("U", ny, ny);
    const MatrixVar J = b.full("J", nz, ny);
    const MatrixVar W = b.full("W", ny, ny);
    Jv = J;
    if (!lin) chi_var = b.scalar("chi");
    if (!fixed_gamma) mu_var = b.scalar("mu");
    const bool coupling = method == DesignMethod::PropX8X6;
    mat = [&, X, U, J, W, coupling](const VectorXd& x, bool at_T2) {
      const double g2 =
          mu_var ? x(static_cast<Eigen::Index>(*mu_var)) : (*fixed_gamma) * (*fixed_gamma);
      return design_mat_x(plant, X.value(x), U.value(x), W.value(x), J.value(x), P1.value(x),
                          P2.value(x), chi_of(x), lambda_t, g2, delta, T2, at_T2, coupling);
    };
  } else {  // ZOH
    const MatrixVar X = b.full("X", nz, nz);
    const MatrixVar X5 = b.full("X5", ny, nz);
    const MatrixVar X6 = b.full("X6", ny, ny);
    const MatrixVar X7 = b.full("X7", ny, nz);
    const MatrixVar X8 = b.full("X8", ny, ny);
    const MatrixVar Y5 = b.full("Y5", ny, nz);
    const MatrixVar Y6 = b.full("Y6", ny, ny);
    const MatrixVar Y7 = b.full("Y7", ny, nz);
    const MatrixVar Y8 = b.full("Y8", ny, ny);
    const MatrixVar J = b.full("J", nz, ny);
    Jv = J;
    if (!lin) chi_var = b.scalar("chi");
    if (!fixed_gamma) mu_var = b.scalar("mu");
    mat = [&, X, X5, X6, X7, X8, Y5, Y6, Y7, Y8, J](const VectorXd& x, bool at_T2) {
      const double g2 =
          mu_var ? x(static_cast<Eigen::Index>(*mu_var)) : (*fixed_gamma) * (*fixed_gamma);
      if (!at_T2)
        return design_mat_zoh(plant, X.value(x), X5.value(x), X6.value(x), X7.value(x),
                              X8.value(x), J.value(x), P1.value(x), P2.value(x), chi_of(x),
                              lambda_t, g2, delta, T2, false);
      return design_mat_zoh(plant, X.value(x), Y5.value(x), Y6.value(x), Y7.value(x), Y8.value(x),
                            J.value(x), P1.value(x), P2.value(x), chi_of(x), lambda_t, g2, delta,
                            T2, true);
    };
    if (zoh_nonsingular) {
      b.require_neg_semidef(
          [X](const VectorXd& x) { return (-(X.value(x) + X.value(x).transpose())).eval(); },
          kEpsStrictScale);
    }
  }

  b.require_neg_semidef([&mat](const VectorXd& x) { return mat(x, false); }, kEpsStrictScale);
  b.require_neg_semidef([&mat](const VectorXd& x) { return mat(x, true); }, kEpsStrictScale);
  b.require_pos_def("P1");
  b.require_pos_def("P2");
  if (chi_var) b.require_nonneg(*chi_var);
  if (mu_var) b.require_nonneg(*mu_var);
  if (gain_norm_cap) {
    // [[kappa I, J],[J', kappa I]] >= 0 caps the singular values of the
    // auxiliary variable J (not of L itself).
    const double kappa = *gain_norm_cap;
    const MatrixVar J = *Jv;
    b.require_neg_semidef(
        [J, kappa, nz, ny](const VectorXd& x) {
          MatrixXd Mb = MatrixXd::Zero(nz + ny, nz + ny);
          Mb.topLeftCorner(nz, nz) = -kappa * MatrixXd::Identity(nz, nz);
          Mb.bottomRightCorner(ny, ny) = -kappa * MatrixXd::Identity(ny, ny);
          Mb.topRightCorner(nz, ny) = -J.value(x);
          Mb.bottomLeftCorner(ny, nz) = -J.value(x).transpose();
          return Mb;
        },
        0.0);
  }

  std::optional<VectorXd> obj;
  if (mu_var) {
    VectorXd c = VectorXd::Zero(static_cast<Eigen::Index>(b.num_vars()));
    c(static_cast<Eigen::Index>(*mu_var)) = 1.0;
    obj = c;
  }
  return b.finish(std::move(obj));
}

LmiProblem build_existence_problem(const PlantModel& plant) {
  if (auto bad = validate_plant(plant); !bad.empty())
    throw std::invalid_argument("invalid plant: " + bad.front());
  const bool lin = plant.is_linear();
  const Eigen::Index nz = plant.nz(), ny = plant.ny(), nw = plant.nw();
  const Eigen::Index ns = lin ? 0 : plant.ns();
  const double ell2 = plant.lipschitz_ell * plant.lipschitz_ell;

  LmiBuilder b({"existence", 0.0, 0.0, 0.0});
  const MatrixVar P1 = b.sym("P1", nz);
  const MatrixVar J = b.full("J", nz, ny);
  std::optional<std::size_t> chi_var;
  if (!lin) chi_var = b.scalar("chi");
  const std::size_t mu_var = b.scalar("mu_hat");

  b.require_neg_semidef(
      [&, chi_var, mu_var](const VectorXd& x) {
        const MatrixXd P = P1.value(x);
        const MatrixXd Jm = J.value(x);
        const double chi = chi_var ? x(static_cast<Eigen::Index>(*chi_var)) : 0.0;
        const double mu = x(static_cast<Eigen::Index>(mu_var));
        const Eigen::Index dim = nz + nw + ns;
        MatrixXd M = MatrixXd::Zero(dim, dim);
        MatrixXd M11 = he(P * plant.A - Jm * plant.C) + plant.Cp.transpose() * plant.Cp;
        if (!lin) M11 += chi * ell2 * plant.S.transpose() * plant.S;
        M.topLeftCorner(nz, nz) = M11;
        M.block(0, nz, nz, nw) = P * plant.N;
        M.block(nz, nz, nw, nw) = -mu * MatrixXd::Identity(nw, nw);
        if (!lin) {
          M.block(0, nz + nw, nz, ns) = P * plant.B;
          M.block(nz + nw, nz + nw, ns, ns) = -chi * MatrixXd::Identity(ns, ns);
        }
        M.triangularView<Eigen::StrictlyLower>() = M.transpose();
        return M;
      },
      kEpsStrictScale);
  b.require_pos_def("P1");
  if (chi_var) b.require_nonneg(*chi_var);
  b.require_nonneg(mu_var);
  return b.finish();
}

LmiProblem build_corollary_problem(const PlantModel& plant, const ObserverGains& gains,
                                   CorollaryVariant variant, double lambda_t_or_gamma,
                                   double delta, double T2) {
  check_plant_gains(plant, gains);
  const bool lin = plant.is_linear();
  const Eigen::Index nz = plant.nz(), ny = plant.ny(), nw = plant.nw();
  const Eigen::Index ns = lin ? 0 : plant.ns();
  const bool no_gamma = variant == CorollaryVariant::NoGamma;
  const double lambda_t = no_gamma ? lambda_t_or_gamma : 0.0;
  const double gamma = no_gamma ? 1.0 : lambda_t_or_gamma;

  LmiBuilder b({no_gamma ? "corollary-no-gamma" : "corollary-no-lambda", delta, T2, lambda_t});
  const MatrixVar P1 = b.sym("P1", nz);
  const MatrixVar P2 = b.sym("P2", ny);
  std::optional<std::size_t> chi_var;
  if (!lin) chi_var = b.scalar("chi");

  // NoGamma: delete the disturbance block row/column of M via the stated projection.
  MatrixXd proj = MatrixXd::Identity(nz + ny + nw + ns, nz + ny + nw + ns);
  if (no_gamma) {
    proj.resize(nz + ny + ns, nz + ny + nw + ns);
    proj.setZero();
    proj.topLeftCorner(nz + ny, nz + ny).setIdentity();
    proj.bottomRightCorner(ns, ns).setIdentity();
  }

  auto M_at = [&, chi_var](double tau) {
    return [&, chi_var, tau](const VectorXd& x) {
      const double chi = chi_var ? x(static_cast<Eigen::Index>(*chi_var)) : 0.0;
      MatrixXd M = m_matrix(plant, gains, P1.value(x), P2.value(x), chi, lambda_t, gamma * gamma,
                            delta, tau);
      if (no_gamma) M = (proj * M * proj.transpose()).eval();
      return M;
    };
  };
  b.require_neg_semidef(M_at(0.0), kEpsStrictScale);
  b.require_neg_semidef(M_at(T2), kEpsStrictScale);
  b.require_pos_def("P1");
  b.require_pos_def("P2");
  if (chi_var) b.require_nonneg(*chi_var);
  return b.finish();
}

std::size_t count_scalar_variables(DesignMethod method, Eigen::Index nz_, Eigen::Index ny_) {
  if (nz_ < 1 || ny_ < 1) throw std::invalid_argument("nz, ny must be >= 1");
  const std::size_t nz = static_cast<std::size_t>(nz_), ny = static_cast<std::size_t>(ny_);
  const std::size_t symP = nz * (nz + 1) / 2 + ny * (ny + 1) / 2;
  switch (method) {
    case DesignMethod::PropPred:
      return symP + ny * ny + nz * ny + 1;
    case DesignMethod::PropX80:
    case DesignMethod::PropX8X6:
      return symP + 2 * ny * ny + nz * nz + nz * ny + 1;
    case DesignMethod::ZOH:
      return symP + 4 * ny * ny + nz * nz + 5 * nz * ny + 1;
    case DesignMethod::Manual:
      break;
  }
  throw std::invalid_argument("no variable census for manual gains");
}

// ---- Hinf necessary condition ----

namespace {

bool hamiltonian_has_imag_eig(const MatrixXd& Abar, const MatrixXd& NNt, const MatrixXd& CtC,
                              double gamma) {
  const Eigen::Index n = Abar.rows();
  MatrixXd H(2 * n, 2 * n);
  H.topLeftCorner(n, n) = Abar;
  H.topRightCorner(n, n) = NNt / gamma;
  H.bottomLeftCorner(n, n) = -CtC / gamma;
  H.bottomRightCorner(n, n) = -Abar.transpose();
  Eigen::EigenSolver<MatrixXd> es(H, false);
  const auto vals = es.eigenvalues();
  for (Eigen::Index i = 0; i < vals.size(); ++i)
    if (std::abs(vals(i).real()) <= 1e-8 * (1.0 + std::abs(vals(i)))) return true;
  return false;
}

double sigma_max_at(const MatrixXd& Abar, const MatrixXd& N, const MatrixXd& Cp, double omega) {
  const Eigen::Index n = Abar.rows();
  Eigen::MatrixXcd G = std::complex<double>(0.0, omega) * Eigen::MatrixXcd::Identity(n, n) -
                       Abar.cast<std::complex<double>>();
  Eigen::MatrixXcd T =
      Cp.cast<std::complex<double>>() * G.lu().solve(N.cast<std::complex<double>>());
  return T.jacobiSvd().singularValues()(0);
}

}  // namespace

double hinf_necessary(const PlantModel& plant, const MatrixXd& L, double lambda_t) {
  const Eigen::Index nz = plant.nz();
  if (L.rows() != nz || L.cols() != plant.ny())
    throw std::invalid_argument("gain L must be n_z x n_y");
  const MatrixXd Abar = plant.A - L * plant.C + lambda_t * MatrixXd::Identity(nz, nz);
  const Eigen::VectorXcd eigs = Abar.eigenvalues();
  if (eigs.real().maxCoeff() >= 0.0) return std::numeric_limits<double>::infinity();
  if (plant.N.isZero(0.0) || plant.Cp.isZero(0.0)) return 0.0;

  // Lower bound from a frequency probe, then bisect the Hamiltonian test.
  double lo = sigma_max_at(Abar, plant.N, plant.Cp, 0.0);
  for (int i = 0; i <= 60; ++i) {
    const double w = std::pow(10.0, -4.0 + 10.0 * i / 60.0);
    lo = std::max(lo, sigma_max_at(Abar, plant.N, plant.Cp, w));
  }
  for (Eigen::Index i = 0; i < eigs.size(); ++i)
    if (std::abs(eigs(i).imag()) > 1e-12)
      lo = std::max(lo, sigma_max_at(Abar, plant.N, plant.Cp, std::abs(eigs(i).imag())));
  if (lo <= 0.0) return 0.0;

  const MatrixXd NNt = plant.N * plant.N.transpose();
  const MatrixXd CtC = plant.Cp.transpose() * plant.Cp;
  double hi = 2.0 * lo;
  int guard = 0;
  while (hamiltonian_has_imag_eig(Abar, NNt, CtC, hi) && guard++ < 80) hi *= 2.0;
  while (hi - lo > 1e-6 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (hamiltonian_has_imag_eig(Abar, NNt, CtC, mid))
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

}  // namespace sporadic
