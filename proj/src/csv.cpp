#include "davar/csv.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

namespace davar {

namespace {

const char* kResultsHeader =
    "seed_index,method,l,kJ,cost_final,cost_best,grad_norm_final,step_norm_final,rmse,"
    "stop_reason,cost_initial";

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

int parse_int(const std::string& text) {
  std::size_t consumed = 0;
  const int value = std::stoi(text, &consumed);
  if (consumed != text.size()) throw ConfigError("bad integer field: '" + text + "'");
  return value;
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

double parse_double(const std::string& text) {
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size() || text.empty()) {
    throw ConfigError("bad float field: '" + text + "'");
  }
  return value;
}

Method method_from_name(const std::string& name) {
  if (name == "GN") return Method::GN;
  if (name == "LS") return Method::LS;
  if (name == "REG") return Method::REG;
  throw ConfigError("unknown method name: '" + name + "'");
}

StopReason stop_reason_from_name(const std::string& name) {
  if (name == "Budget") return StopReason::Budget;
  if (name == "RelFunc") return StopReason::RelFunc;
  if (name == "GradNorm") return StopReason::GradNorm;
  if (name == "MaxBacktracks") return StopReason::MaxBacktracks;
  if (name == "NonFinite") return StopReason::NonFinite;
  throw ConfigError("unknown stop reason: '" + name + "'");
}

void write_results_csv(std::ostream& out, const ResultTable& table) {
  out << kResultsHeader << "\n";
  for (const EnsembleResultRow& row : table) {
    out << row.seed_index << ',' << method_name(row.method) << ',' << row.l << ',' << row.kJ
        << ',' << format_double(row.cost_final) << ',' << format_double(row.cost_best) << ','
        << format_double(row.grad_norm_final) << ',' << format_double(row.step_norm_final)
        << ',' << format_double(row.rmse) << ',' << stop_reason_name(row.stop_reason) << ','
        << format_double(row.cost_initial) << "\n";
  }
}

std::string results_csv_string(const ResultTable& table) {
  std::ostringstream out;
  write_results_csv(out, table);
  return out.str();
}

ResultTable read_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("results CSV is empty");
  if (line != kResultsHeader) throw ConfigError("unexpected results CSV header: '" + line + "'");
  ResultTable table;
  int line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    const std::vector<std::string> f = split_line(line);
    if (f.size() != 11) {
      throw ConfigError("line " + std::to_string(line_number) + ": expected 11 fields, got " +
                        std::to_string(f.size()));
    }
    EnsembleResultRow row;
    row.seed_index = parse_int(f[0]);
    row.method = method_from_name(f[1]);
    row.l = parse_int(f[2]);
    row.kJ = parse_int(f[3]);
    row.cost_final = parse_double(f[4]);
    row.cost_best = parse_double(f[5]);
    row.grad_norm_final = parse_double(f[6]);
    row.step_norm_final = parse_double(f[7]);
    row.rmse = parse_double(f[8]);
    row.stop_reason = stop_reason_from_name(f[9]);
    row.cost_initial = parse_double(f[10]);
    table.push_back(row);
  }
  return table;
}

ResultTable read_results_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open results CSV: " + path);
  return read_results_csv(in);
}

void write_profile_csv(std::ostream& out, const ProfileCurve& curve) {
  out << "x";
  for (Method m : curve.methods) out << ',' << method_name(m);
  out << "\n";
  for (std::size_t g = 0; g < curve.x.size(); ++g) {
    out << format_double(curve.x[g]);
    for (std::size_t m = 0; m < curve.methods.size(); ++m) {
      out << ',' << format_double(curve.fractions[m][g]);
    }
    out << "\n";
  }
}

std::string profile_csv_string(const ProfileCurve& curve) {
  std::ostringstream out;
  write_profile_csv(out, curve);
  return out.str();
}

}  // namespace davar
