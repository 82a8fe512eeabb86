#include "sporadic/io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace sporadic {

json matrix_to_json(const MatrixXd& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

MatrixXd matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument("matrix: expected array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  MatrixXd M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(j[static_cast<std::size_t>(i)].size()) != cols)
      throw std::invalid_argument("matrix: ragged rows");
    for (Eigen::Index k = 0; k < cols; ++k)
      M(i, k) = j[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)].get<double>();
  }
  return M;
}

json gains_to_json(const ObserverGains& g) {
  return {{"L", matrix_to_json(g.L)}, {"H", matrix_to_json(g.H)}, {"method", to_string(g.method)}};
}

ObserverGains gains_from_json(const json& j) {
  ObserverGains g;
  g.L = matrix_from_json(j.at("L"));
  g.H = matrix_from_json(j.at("H"));
  g.method = method_from_string(j.value("method", "manual"));
  return g;
}

json certificate_to_json(const Certificate& c) {
  return {{"P1", matrix_to_json(c.P1)}, {"P2", matrix_to_json(c.P2)}, {"delta", c.delta},
          {"chi", c.chi},               {"lambda_t", c.lambda_t},     {"gamma", c.gamma},
          {"T2", c.T2}};
}

Certificate certificate_from_json(const json& j) {
  Certificate c;
  c.P1 = matrix_from_json(j.at("P1"));
  c.P2 = matrix_from_json(j.at("P2"));
  c.delta = j.at("delta").get<double>();
  c.chi = j.at("chi").get<double>();
  c.lambda_t = j.at("lambda_t").get<double>();
  c.gamma = j.at("gamma").get<double>();
  c.T2 = j.at("T2").get<double>();
  return c;
}

json design_result_to_json(const DesignResult& r) {
  return {{"gains", gains_to_json(r.gains)},
          {"certificate", certificate_to_json(r.certificate)},
          {"delta", r.delta_selected},
          {"gamma", r.certificate.gamma},
          {"solver", {{"status", to_string(r.solution.status)},
                      {"iterations", r.solution.iterations},
                      {"max_constraint_eig", r.solution.max_constraint_eig}}}};
}

json report_to_json(const VerificationReport& rep) {
  return {{"eig_at_0", rep.eig_at_0},
          {"eig_at_T2", rep.eig_at_T2},
          {"grid_max_eig", rep.grid_max_eig},
          {"hinf_lower_bound", rep.hinf_lower_bound},
          {"tolerance", rep.tolerance},
          {"status", rep.pass ? "pass" : "fail"},
          {"margins", {{"eigenvalue", rep.eig_margin}, {"gamma", rep.gamma_margin}}}};
}

namespace {

const char* side_name(SampleSide s) {
  switch (s) {
    case SampleSide::Flow: return "flow";
    case SampleSide::PreJump: return "pre-jump";
    case SampleSide::PostJump: return "post-jump";
  }
  return "?";
}

void append_g12(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  out += buf;
}

}  // namespace

std::string arc_csv(const HybridArc& arc, const std::optional<Certificate>& cert) {
  std::string out = "t,j,side";
  if (!arc.samples.empty()) {
    const auto& s0 = arc.samples.front().state;
    for (Eigen::Index i = 0; i < s0.z.size(); ++i) out += ",z" + std::to_string(i + 1);
    for (Eigen::Index i = 0; i < s0.eps.size(); ++i) out += ",eps" + std::to_string(i + 1);
    for (Eigen::Index i = 0; i < s0.theta_tilde.size(); ++i)
      out += ",theta_tilde" + std::to_string(i + 1);
  }
  out += ",tau,dist_A,V\n";
  for (const auto& s : arc.samples) {
    append_g12(out, s.t);
    out += ",";
    out += std::to_string(s.j);
    out += ",";
    out += side_name(s.side);
    auto push = [&out](double v) {
      out += ",";
      append_g12(out, v);
    };
    for (Eigen::Index i = 0; i < s.state.z.size(); ++i) push(s.state.z(i));
    for (Eigen::Index i = 0; i < s.state.eps.size(); ++i) push(s.state.eps(i));
    for (Eigen::Index i = 0; i < s.state.theta_tilde.size(); ++i) push(s.state.theta_tilde(i));
    push(s.state.tau);
    push(distance_to_A(s.state));
    push(cert ? eval_V(*cert, s.state) : std::numeric_limits<double>::quiet_NaN());
    out += "\n";
  }
  return out;
}

std::string render_svg(const std::vector<PlotSeries>& series, const std::string& x_label,
                       const std::string& y_label) {
  const int W = 640, H = 420, ml = 60, mr = 20, mt = 20, mb = 45;
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  bool first = true;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if (first) {
        xmin = xmax = s.x[i];
        ymin = ymax = s.y[i];
        first = false;
      }
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  if (xmax <= xmin) xmax = xmin + 1;
  if (ymax <= ymin) ymax = ymin + 1;
  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr); };
  auto py = [&](double y) { return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb); };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b"};
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(W) +
                    "\" height=\"" + std::to_string(H) + "\">\n";
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "<rect width=\"%d\" height=\"%d\" fill=\"white\"/>\n"
                "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" stroke=\"black\"/>\n"
                "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" stroke=\"black\"/>\n",
                W, H, ml, H - mb, W - mr, H - mb, ml, mt, ml, H - mb);
  svg += buf;
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%d\" y=\"%d\" font-size=\"12\">%s</text>\n"
                "<text x=\"12\" y=\"%d\" font-size=\"12\" transform=\"rotate(-90 12 %d)\">%s</text>\n",
                (W - ml - mr) / 2 + ml, H - 10, x_label.c_str(), (H - mt - mb) / 2 + mt,
                (H - mt - mb) / 2 + mt, y_label.c_str());
  svg += buf;
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%d\" y=\"%d\" font-size=\"10\">%.4g</text>\n"
                "<text x=\"%d\" y=\"%d\" font-size=\"10\">%.4g</text>\n"
                "<text x=\"%d\" y=\"%d\" font-size=\"10\" text-anchor=\"end\">%.4g</text>\n"
                "<text x=\"%d\" y=\"%d\" font-size=\"10\" text-anchor=\"end\">%.4g</text>\n",
                ml, H - mb + 14, xmin, W - mr - 30, H - mb + 14, xmax, ml - 4, H - mb, ymin,
                ml - 4, mt + 8, ymax);
  svg += buf;
  int ci = 0;
  for (const auto& s : series) {
    std::string pts;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", px(s.x[i]), py(s.y[i]));
      pts += buf;
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(colors[ci % 5]) +
           "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    if (!s.label.empty()) {
      std::snprintf(buf, sizeof(buf),
                    "<text x=\"%d\" y=\"%d\" font-size=\"11\" fill=\"%s\">%s</text>\n",
                    W - mr - 150, mt + 14 * (ci + 1), colors[ci % 5], s.label.c_str());
      svg += buf;
    }
    ++ci;
  }
  svg += "</svg>\n";
  return svg;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << content;
}

}  // namespace sporadic
