#pragma once

#include <iosfwd>
#include <string>

#include "davar/profiles.hpp"
#include "davar/twin.hpp"

namespace davar {

/// Shortest decimal form that round-trips a double exactly ("%.17g" with
/// NaN/Inf spelled out).
std::string format_double(double value);
double parse_double(const std::string& text);

/// Results CSV, one row per (realization, method):
///   seed_index,method,l,kJ,cost_final,cost_best,grad_norm_final,
///   step_norm_final,rmse,stop_reason,cost_initial
void write_results_csv(std::ostream& out, const ResultTable& table);
std::string results_csv_string(const ResultTable& table);
ResultTable read_results_csv(std::istream& in);
ResultTable read_results_csv_file(const std::string& path);

/// Profile CSV: column `x` then one fraction column per method.
void write_profile_csv(std::ostream& out, const ProfileCurve& curve);
std::string profile_csv_string(const ProfileCurve& curve);

Method method_from_name(const std::string& name);
StopReason stop_reason_from_name(const std::string& name);

}  // namespace davar
