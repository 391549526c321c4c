#include <cmath>
#include <iomanip>
#include <sstream>

#include "mdpdesign/linear_solver.hpp"

namespace mdpdesign {

namespace {

std::string var_name(const LpModel& model, std::size_t j) {
  if (j < model.names.size() && !model.names[j].empty()) return model.names[j];
  return "x" + std::to_string(j);
}

void write_expression(std::ostream& out, const LpModel& model, const std::vector<double>& coeffs) {
  bool first = true;
  int on_line = 0;
  for (std::size_t j = 0; j < coeffs.size(); ++j) {
    const double c = coeffs[j];
    if (c == 0.0) continue;
    if (on_line == 8) {
      out << "\n   ";
      on_line = 0;
    }
    if (c < 0.0)
      out << (first ? "-" : " - ");
    else if (!first)
      out << " + ";
    out << std::abs(c) << ' ' << var_name(model, j);
    first = false;
    ++on_line;
  }
  if (first) out << "0 " << var_name(model, 0);
}

void write_lp(std::ostream& out, const LpModel& model, const std::vector<VarKind>* kinds) {
  out << std::setprecision(17);
  out << "\\ " << model.num_vars() << " variables, " << model.num_rows() << " rows\n";
  out << (model.sense == Sense::Minimize ? "Minimize\n" : "Maximize\n");
  out << " obj: ";
  write_expression(out, model, model.objective);
  out << "\nSubject To\n";
  for (std::size_t i = 0; i < model.rows.size(); ++i) {
    const auto& row = model.rows[i];
    out << ' ' << (row.name.empty() ? "r" + std::to_string(i) : row.name) << ": ";
    write_expression(out, model, row.coeffs);
    out << ' ' << to_string(row.rel) << ' ' << row.rhs << '\n';
  }
  out << "Bounds\n";
  for (std::size_t j = 0; j < model.num_vars(); ++j) {
    const auto [lo, up] = model.bounds[j];
    const auto name = var_name(model, j);
    if (!std::isfinite(lo) && !std::isfinite(up)) {
      out << ' ' << name << " free\n";
    } else if (lo == up) {
      out << ' ' << name << " = " << lo << '\n';
    } else {
      out << ' ';
      if (std::isfinite(lo))
        out << lo;
      else
        out << "-inf";
      out << " <= " << name << " <= ";
      if (std::isfinite(up))
        out << up;
      else
        out << "+inf";
      out << '\n';
    }
  }
  if (kinds) {
    std::ostringstream generals, binaries;
    for (std::size_t j = 0; j < kinds->size(); ++j) {
      if ((*kinds)[j] == VarKind::Integer) generals << ' ' << var_name(model, j) << '\n';
      if ((*kinds)[j] == VarKind::Binary) binaries << ' ' << var_name(model, j) << '\n';
    }
    if (!generals.str().empty()) out << "General\n" << generals.str();
    if (!binaries.str().empty()) out << "Binary\n" << binaries.str();
  }
  out << "End\n";
}

}  // namespace

std::string to_lp_format(const LpModel& model) {
  std::ostringstream out;
  write_lp(out, model, nullptr);
  return out.str();
}

std::string to_lp_format(const MipModel& model) {
  std::ostringstream out;
  write_lp(out, model.lp, &model.integrality);
  return out.str();
}

}  // namespace mdpdesign
