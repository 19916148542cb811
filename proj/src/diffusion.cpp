#include "selfdiff/diffusion.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "selfdiff/errors.hpp"

namespace selfdiff {

double SymMatrix::trace() const {
  double t = 0.0;
  for (int i = 0; i < dim; ++i) t += (*this)(i, i);
  return t;
}

double SymMatrix::form(const std::vector<double>& u) const {
  if (static_cast<int>(u.size()) != dim) throw ShapeMismatch("quadratic form: wrong vector length");
  double s = 0.0;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) s += u[static_cast<std::size_t>(i)] * (*this)(i, j) * u[static_cast<std::size_t>(j)];
  return s;
}

SymMatrix assemble_matrix(double q10, double q01, double q11) {
  SymMatrix d(2);
  d.set(0, 0, q10);
  d.set(1, 1, q01);
  d.set(0, 1, 0.5 * (q11 - q10 - q01));
  return d;
}

SymMatrix assemble_matrix(int dim, const std::vector<double>& diag, const std::vector<double>& pair) {
  if (dim < 1) throw std::invalid_argument("assemble_matrix: dim must be >= 1");
  if (static_cast<int>(diag.size()) != dim || static_cast<int>(pair.size()) != dim * (dim - 1) / 2)
    throw ShapeMismatch("assemble_matrix: wrong number of quadratic forms");
  SymMatrix d(dim);
  for (int i = 0; i < dim; ++i) d.set(i, i, diag[static_cast<std::size_t>(i)]);
  std::size_t p = 0;
  for (int i = 0; i < dim; ++i)
    for (int j = i + 1; j < dim; ++j, ++p)
      d.set(i, j, 0.5 * (pair[p] - diag[static_cast<std::size_t>(i)] - diag[static_cast<std::size_t>(j)]));
  return d;
}

std::vector<std::vector<double>> polarization_directions(int dim) {
  std::vector<std::vector<double>> out;
  for (int i = 0; i < dim; ++i) {
    std::vector<double> e(static_cast<std::size_t>(dim), 0.0);
    e[static_cast<std::size_t>(i)] = 1.0;
    out.push_back(e);
  }
  for (int i = 0; i < dim; ++i)
    for (int j = i + 1; j < dim; ++j) {
      std::vector<double> e(static_cast<std::size_t>(dim), 0.0);
      e[static_cast<std::size_t>(i)] = 1.0;
      e[static_cast<std::size_t>(j)] = 1.0;
      out.push_back(e);
    }
  return out;
}

SymMatrix assemble_from_polarization(int dim, const std::vector<double>& q) {
  if (static_cast<int>(q.size()) != dim * (dim + 1) / 2) throw ShapeMismatch("assemble: wrong number of forms");
  return assemble_matrix(dim, std::vector<double>(q.begin(), q.begin() + dim),
                         std::vector<double>(q.begin() + dim, q.end()));
}

std::string to_string(CurveMethod m) { return m == CurveMethod::Minimization ? "minimization" : "kmc"; }

bool DiffusionCurve::complete() const {
  if (num_sites < 1 || static_cast<int>(nodes.size()) != num_sites + 1) return false;
  for (int ell = 0; ell <= num_sites; ++ell)
    if (nodes[static_cast<std::size_t>(ell)].ell != ell) return false;
  return true;
}

SymMatrix interpolate(const DiffusionCurve& curve, double rho) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw std::out_of_range("interpolate: rho outside [0, 1]");
  if (!curve.complete()) throw std::invalid_argument("interpolate: curve is incomplete");
  const int n = curve.num_sites;
  const double x = rho * n;
  const int lo = std::min(static_cast<int>(std::floor(x)), n - 1);
  const double t = x - lo;
  const auto& a = curve.nodes[static_cast<std::size_t>(lo)].D;
  const auto& b = curve.nodes[static_cast<std::size_t>(lo + 1)].D;
  if (t == 0.0) return a;
  if (t == 1.0) return b;
  SymMatrix out(a.dim);
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = (1.0 - t) * a.data[i] + t * b.data[i];
  return out;
}

TraceAverage trace_average(const DiffusionCurve& curve) {
  if (!curve.complete()) throw std::invalid_argument("trace_average: curve is incomplete");
  TraceAverage out;
  for (const auto& node : curve.nodes) {
    out.reference += node.D(0, 0);
    out.trace += node.D.trace();
  }
  const double count = static_cast<double>(curve.num_sites + 1);
  out.reference *= 2.0 / count;
  out.trace /= count;
  return out;
}

void write_curve(std::ostream& os, const DiffusionCurve& curve, const std::vector<std::string>& header) {
  if (!curve.nodes.empty() && curve.nodes.front().D.dim != 2) throw ShapeMismatch("write_curve: 2-d curves only");
  os << "# selfdiff curve\n";
  for (const auto& h : header) os << "# " << h << '\n';
  os << "# num_sites=" << curve.num_sites << '\n';
  os << "ell\trho\tD11\tD12\tD22\tvar11\tvar12\tvar22\tmethod\tseed\n";
  const auto old = os.precision(std::numeric_limits<double>::max_digits10);
  for (const auto& node : curve.nodes) {
    const double rho = static_cast<double>(node.ell) / curve.num_sites;
    os << node.ell << '\t' << rho << '\t' << node.D(0, 0) << '\t' << node.D(0, 1) << '\t' << node.D(1, 1) << '\t'
       << node.variance(0, 0) << '\t' << node.variance(0, 1) << '\t' << node.variance(1, 1) << '\t'
       << to_string(curve.method) << '\t' << curve.seed << '\n';
  }
  os.precision(old);
}

DiffusionCurve read_curve(std::istream& is) {
  DiffusionCurve curve;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind("# num_sites=", 0) == 0) curve.num_sites = std::stoi(line.substr(12));
      continue;
    }
    if (line.rfind("ell", 0) == 0) continue;
    std::istringstream row(line);
    CurveNode node;
    node.D = SymMatrix(2);
    node.variance = SymMatrix(2);
    double rho = 0, d11 = 0, d12 = 0, d22 = 0, v11 = 0, v12 = 0, v22 = 0;
    std::string method;
    if (!(row >> node.ell >> rho >> d11 >> d12 >> d22 >> v11 >> v12 >> v22 >> method >> curve.seed))
      throw ConfigError(lineno, "curve file: malformed row");
    if (method == "minimization") curve.method = CurveMethod::Minimization;
    else if (method == "kmc") curve.method = CurveMethod::KMC;
    else throw ConfigError(lineno, "curve file: unknown method '" + method + "'");
    node.D.set(0, 0, d11);
    node.D.set(0, 1, d12);
    node.D.set(1, 1, d22);
    node.variance.set(0, 0, v11);
    node.variance.set(0, 1, v12);
    node.variance.set(1, 1, v22);
    curve.nodes.push_back(node);
  }
  return curve;
}

}  // namespace selfdiff
