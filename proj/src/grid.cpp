#include "nematic/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nematic {

std::string Grading::describe() const {
  switch (kind) {
    case Kind::Uniform: return "uniform";
    case Kind::Geometric: return "geometric(" + std::to_string(ratio) + ")";
    case Kind::Composite: return "composite";
  }
  return "unknown";
}

Grading Grading::parse(const std::string& text) {
  if (text == "uniform") return uniform();
  if (text == "composite") return composite();
  if (text.rfind("geometric", 0) == 0) {
    const auto open = text.find(':');
    double ratio = 10.0;
    if (open != std::string::npos) ratio = std::stod(text.substr(open + 1));
    if (!(ratio > 0.0)) throw std::invalid_argument("geometric ratio must be positive");
    return geometric(ratio);
  }
  throw std::invalid_argument("unknown grading '" + text + "'");
}

RadialGrid::RadialGrid(Eigen::VectorXd nodes, Grading grading)
    : nodes_(std::move(nodes)), grading_(grading) {
  if (nodes_.size() < kMinCells + 1) throw std::invalid_argument("grid needs at least 16 cells");
  if (nodes_[0] != 0.0) throw std::invalid_argument("grid must start at r = 0");
  for (Eigen::Index i = 1; i < nodes_.size(); ++i) {
    if (!(nodes_[i] > nodes_[i - 1])) throw std::invalid_argument("grid nodes must increase");
  }
  const Eigen::Index n = nodes_.size();
  weights_.resize(n);
  double inner = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double outer = (i + 1 < n) ? 0.5 * (nodes_[i] + nodes_[i + 1]) : nodes_[n - 1];
    weights_[i] = 0.5 * (outer - inner) * (outer + inner);
    inner = outer;
  }
}

Eigen::Index RadialGrid::lower_bound(double value) const {
  const double* begin = nodes_.data();
  return std::lower_bound(begin, begin + nodes_.size(), value) - begin;
}

namespace {

// Smallest q > 1 with h0 * sum_{j=1..m} q^j = length.
double growth_factor(double h0, Eigen::Index m, double length) {
  auto total = [&](double q) {
    double s = 0.0, t = 1.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      t *= q;
      s += t;
    }
    return h0 * s;
  };
  double lo = 1.0, hi = 2.0;
  while (total(hi) < length) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double q = 0.5 * (lo + hi);
    (total(q) < length ? lo : hi) = q;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

RadialGrid build_grid(double R, Eigen::Index cells, Grading grading) {
  if (!(R > 0.0) || !std::isfinite(R)) throw std::invalid_argument("grid radius must be positive");
  if (cells < kMinCells) throw std::invalid_argument("grid needs at least 16 cells");
  Eigen::VectorXd r(cells + 1);
  r[0] = 0.0;
  switch (grading.kind) {
    case Grading::Kind::Uniform:
      for (Eigen::Index i = 1; i <= cells; ++i) r[i] = R * double(i) / double(cells);
      break;
    case Grading::Kind::Geometric: {
      if (!(grading.ratio > 0.0)) throw std::invalid_argument("geometric ratio must be positive");
      const double q = std::pow(grading.ratio, 1.0 / double(cells - 1));
      double h = 1.0, s = 0.0;
      for (Eigen::Index i = 1; i <= cells; ++i) {
        s += h;
        r[i] = s;
        h *= q;
      }
      r *= R / s;
      break;
    }
    case Grading::Kind::Composite: {
      const double core = std::min(1.0, R / 10.0);
      const Eigen::Index n_core = (cells + 3) / 4;
      const double h0 = core / double(n_core);
      for (Eigen::Index i = 1; i <= n_core; ++i) r[i] = core * double(i) / double(n_core);
      const Eigen::Index m = cells - n_core;
      const double q = growth_factor(h0, m, R - core);
      double h = h0;
      for (Eigen::Index i = n_core + 1; i <= cells; ++i) {
        h *= q;
        r[i] = r[i - 1] + h;
      }
      break;
    }
  }
  r[cells] = R;
  return RadialGrid(std::move(r), grading);
}

double quadrature(const RadialGrid& g, const Eigen::VectorXd& f) {
  if (f.size() != g.size()) throw std::invalid_argument("quadrature: sample count mismatch");
  return g.weights().dot(f);
}

Eigen::VectorXd apply_radial_laplacian(const RadialGrid& g, const Eigen::VectorXd& f, int m) {
  if (f.size() != g.size()) throw std::invalid_argument("laplacian: sample count mismatch");
  if (m < 0) throw std::invalid_argument("laplacian: m must be nonnegative");
  const Eigen::Index n = g.size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  const double m2 = double(m) * double(m);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const double flux_out = g.mid(i) * (f[i + 1] - f[i]) / g.h(i);
    const double flux_in = (i == 0) ? 0.0 : g.mid(i - 1) * (f[i] - f[i - 1]) / g.h(i - 1);
    out[i] = (flux_out - flux_in) / g.weight(i);
    if (i > 0) out[i] -= m2 * f[i] / (g.r(i) * g.r(i));
  }
  if (m > 0) out[0] = f[0];
  return out;
}

double interpolate(const RadialGrid& from, const Eigen::VectorXd& f, double r) {
  if (r <= 0.0) return f[0];
  if (r >= from.radius()) return f[from.last()];
  const Eigen::Index j = from.lower_bound(r);
  const double t = (r - from.r(j - 1)) / (from.r(j) - from.r(j - 1));
  return (1.0 - t) * f[j - 1] + t * f[j];
}

}  // namespace nematic
