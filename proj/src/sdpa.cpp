#include "sporadic/sdpa.hpp"

#include <cstdio>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace sporadic {

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

bool is_diagonal(const MatrixXd& M) {
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j)
      if (i != j && M(i, j) != 0.0) return false;
  return true;
}

}  // namespace

std::string export_sdpa(const LmiProblem& p) {
  if (p.constraints.empty())
    throw std::invalid_argument("SDPA export requires at least one constraint block");
  const std::size_t m = p.num_vars();
  std::ostringstream out;
  out << m << "\n" << p.constraints.size() << "\n";

  std::vector<bool> diag(p.constraints.size());
  for (std::size_t j = 0; j < p.constraints.size(); ++j) {
    bool d = is_diagonal(p.constraints[j].constant);
    for (const auto& [k, coef] : p.constraints[j].terms) d = d && is_diagonal(coef);
    diag[j] = d && p.constraints[j].dim > 1;
    if (j) out << " ";
    out << (diag[j] ? -p.constraints[j].dim : p.constraints[j].dim);
  }
  out << "\n";
  for (std::size_t k = 0; k < m; ++k) {
    if (k) out << " ";
    out << fmt17(p.objective ? (*p.objective)(static_cast<Eigen::Index>(k)) : 0.0);
  }
  out << "\n";

  auto emit = [&](std::size_t matno, std::size_t blk, const MatrixXd& F) {
    for (Eigen::Index i = 0; i < F.rows(); ++i)
      for (Eigen::Index j = i; j < F.cols(); ++j)
        if (F(i, j) != 0.0)
          out << matno << " " << blk << " " << (i + 1) << " " << (j + 1) << " " << fmt17(F(i, j))
              << "\n";
  };
  for (std::size_t j = 0; j < p.constraints.size(); ++j) {
    emit(0, j + 1, p.constraints[j].constant);  // F_0 = C
    for (const auto& [k, coef] : p.constraints[j].terms)
      emit(k + 1, j + 1, (-coef).eval());  // F_k = -A_k
  }
  return out.str();
}

LmiProblem import_sdpa(std::istream& in) {
  auto next_token = [&in]() {
    std::string tok;
    for (;;) {
      if (!(in >> tok)) throw std::runtime_error("SDPA parse: unexpected end of input");
      if (tok[0] == '"' || tok[0] == '*') {  // comment to end of line
        std::string rest;
        std::getline(in, rest);
        continue;
      }
      return tok;
    }
  };
  auto next_long = [&]() { return std::stol(next_token()); };
  auto next_double = [&]() { return std::stod(next_token()); };

  const long m = next_long();
  const long nblocks = next_long();
  if (m < 0 || nblocks < 1) throw std::runtime_error("SDPA parse: bad header");
  std::vector<long> sizes(static_cast<std::size_t>(nblocks));
  for (auto& s : sizes) {
    s = next_long();
    if (s == 0) throw std::runtime_error("SDPA parse: zero block size");
    if (s < 0) s = -s;
  }
  VectorXd c(m);
  for (long k = 0; k < m; ++k) c(k) = next_double();

  LmiProblem p;
  for (long k = 0; k < m; ++k)
    p.variables.push_back({static_cast<std::size_t>(k), "x" + std::to_string(k + 1)});
  p.objective = c;
  p.constraints.resize(static_cast<std::size_t>(nblocks));
  std::vector<std::map<std::size_t, MatrixXd>> terms(static_cast<std::size_t>(nblocks));
  for (std::size_t j = 0; j < sizes.size(); ++j) {
    p.constraints[j].dim = sizes[j];
    p.constraints[j].constant = MatrixXd::Zero(sizes[j], sizes[j]);
  }

  std::string tok;
  while (in >> tok) {
    if (tok[0] == '"' || tok[0] == '*') {
      std::string rest;
      std::getline(in, rest);
      continue;
    }
    const long matno = std::stol(tok);
    const long blk = next_long();
    const long i = next_long();
    const long j = next_long();
    const double v = next_double();
    if (blk < 1 || blk > nblocks) throw std::runtime_error("SDPA parse: block out of range");
    const auto b = static_cast<std::size_t>(blk - 1);
    const long dim = sizes[b];
    if (i < 1 || j < 1 || i > dim || j > dim || matno < 0 || matno > m)
      throw std::runtime_error("SDPA parse: entry out of range");
    if (matno == 0) {
      p.constraints[b].constant(i - 1, j - 1) = v;
      p.constraints[b].constant(j - 1, i - 1) = v;
    } else {
      auto [it, inserted] =
          terms[b].try_emplace(static_cast<std::size_t>(matno - 1), MatrixXd::Zero(dim, dim));
      it->second(i - 1, j - 1) = -v;  // A_k = -F_k
      it->second(j - 1, i - 1) = -v;
    }
  }
  for (std::size_t b = 0; b < terms.size(); ++b)
    for (auto& [k, coef] : terms[b])
      p.constraints[b].terms.emplace_back(k, std::move(coef));
  return p;
}

LmiProblem import_sdpa_string(const std::string& text) {
  std::istringstream in(text);
  return import_sdpa(in);
}

VectorXd import_solution_point(const LmiProblem& p, std::istream& in) {
  std::map<std::string, double> vals;
  std::string label;
  double v;
  while (in >> label >> v) vals[label] = v;
  VectorXd x(static_cast<Eigen::Index>(p.num_vars()));
  for (const auto& var : p.variables) {
    auto it = vals.find(var.label);
    if (it == vals.end())
      throw std::runtime_error("solution import: missing value for " + var.label);
    x(static_cast<Eigen::Index>(var.index)) = it->second;
  }
  return x;
}

}  // namespace sporadic
