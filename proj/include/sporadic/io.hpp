#pragma once

#include <optional>
#include <string>

#include "sporadic/design.hpp"
#include "sporadic/hybrid.hpp"
#include "sporadic/verify.hpp"

// vendored single-header nlohmann/json
#include "json.hpp"

namespace sporadic {

using json = nlohmann::json;

json matrix_to_json(const MatrixXd& M);
MatrixXd matrix_from_json(const json& j);

json gains_to_json(const ObserverGains& gains);
ObserverGains gains_from_json(const json& j);

json certificate_to_json(const Certificate& cert);
Certificate certificate_from_json(const json& j);

json design_result_to_json(const DesignResult& result);
json report_to_json(const VerificationReport& report);

/// Columns t,j,side,z...,eps...,theta_tilde...,tau,dist_A,V; 12 significant
/// digits; V needs a certificate and prints nan without one.
std::string arc_csv(const HybridArc& arc, const std::optional<Certificate>& cert);

/// Minimal static plot: one polyline per series over shared axes.
struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
};
std::string render_svg(const std::vector<PlotSeries>& series, const std::string& x_label,
                       const std::string& y_label);

void write_file(const std::string& path, const std::string& content);

}  // namespace sporadic
