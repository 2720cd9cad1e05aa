#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <stdexcept>

#include "dfo/bench.hpp"

namespace dfo::bench {

std::vector<double> default_alphas() {
  std::vector<double> a;
  for (int i = 0; i <= 128; ++i) a.push_back(0.125 * i);
  return a;
}

ProfileData profile(const std::vector<std::vector<double>>& costs, const std::vector<std::string>& solvers,
                    double tau, const std::vector<double>& alphas) {
  if (costs.empty() || costs.size() != solvers.size()) throw std::invalid_argument("profile: bad cost matrix");
  const std::size_t np = costs.front().size();
  for (const auto& row : costs) {
    if (row.size() != np) throw std::invalid_argument("profile: ragged cost matrix");
  }
  ProfileData out;
  out.tau = tau;
  out.solvers = solvers;
  out.alphas = alphas;
  const Index ns = static_cast<Index>(solvers.size());
  const Index na = static_cast<Index>(alphas.size());
  out.proportion = Matrix::Zero(ns, na);
  out.at_infinity = Vector::Zero(ns);
  if (np == 0) return out;
  const double inv = 1.0 / static_cast<double>(np);
  for (std::size_t p = 0; p < np; ++p) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& row : costs) best = std::min(best, row[p]);
    if (!std::isfinite(best)) {
      out.all_failed.push_back(static_cast<Index>(p));
      continue;
    }
    for (Index s = 0; s < ns; ++s) {
      const double c = costs[static_cast<std::size_t>(s)][p];
      if (!std::isfinite(c)) continue;
      out.at_infinity[s] += inv;
      const double la = std::log2(c / best);
      for (Index a = 0; a < na; ++a) {
        if (la <= alphas[static_cast<std::size_t>(a)]) out.proportion(s, a) += inv;
      }
    }
  }
  return out;
}

ProfileData average(std::span<const ProfileData> runs) {
  if (runs.empty()) throw std::invalid_argument("average: no profiles");
  ProfileData out = runs.front();
  out.runs = static_cast<Index>(runs.size());
  for (std::size_t r = 1; r < runs.size(); ++r) {
    if (runs[r].solvers != out.solvers || runs[r].alphas != out.alphas) {
      throw std::invalid_argument("average: profiles do not share solvers and abscissae");
    }
    out.proportion += runs[r].proportion;
    out.at_infinity += runs[r].at_infinity;
    for (Index p : runs[r].all_failed) {
      if (std::find(out.all_failed.begin(), out.all_failed.end(), p) == out.all_failed.end()) out.all_failed.push_back(p);
    }
  }
  const double k = static_cast<double>(runs.size());
  out.proportion /= k;
  out.at_infinity /= k;
  std::sort(out.all_failed.begin(), out.all_failed.end());
  return out;
}

void write_profile_csv(std::ostream& os, const ProfileData& p) {
  os << "tau,solver,alpha,proportion\n";
  os << std::setprecision(17);
  for (std::size_t s = 0; s < p.solvers.size(); ++s) {
    for (std::size_t a = 0; a < p.alphas.size(); ++a) {
      os << p.tau << ',' << p.solvers[s] << ',' << p.alphas[a] << ','
         << p.proportion(static_cast<Index>(s), static_cast<Index>(a)) << '\n';
    }
  }
}

void write_profile_svg(std::ostream& os, const ProfileData& p, const std::string& title) {
  const double w = 640.0;
  const double h = 400.0;
  const double m = 50.0;
  const double amax = p.alphas.empty() ? 1.0 : std::max(p.alphas.back(), 1e-12);
  auto px = [&](double a) { return m + (w - 2 * m) * a / amax; };
  auto py = [&](double v) { return h - m - (h - 2 * m) * v; };
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  os << std::setprecision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  os << "<text x=\"" << m << "\" y=\"20\" font-size=\"14\">" << title << "</text>\n";
  os << "<line x1=\"" << m << "\" y1=\"" << py(0) << "\" x2=\"" << w - m << "\" y2=\"" << py(0) << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << m << "\" y1=\"" << py(0) << "\" x2=\"" << m << "\" y2=\"" << py(1) << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << w / 2 << "\" y=\"" << h - 15 << "\" font-size=\"12\">log2 normalized cost</text>\n";
  for (std::size_t s = 0; s < p.solvers.size(); ++s) {
    const char* col = colors[s % 6];
    os << "<polyline fill=\"none\" stroke=\"" << col << "\" points=\"";
    double prev = 0.0;
    for (std::size_t a = 0; a < p.alphas.size(); ++a) {
      const double v = p.proportion(static_cast<Index>(s), static_cast<Index>(a));
      if (a > 0) os << px(p.alphas[a]) << ',' << py(prev) << ' ';
      os << px(p.alphas[a]) << ',' << py(v) << ' ';
      prev = v;
    }
    os << "\"/>\n";
    os << "<text x=\"" << w - m - 80 << "\" y=\"" << m + 16.0 * static_cast<double>(s) << "\" font-size=\"12\" fill=\""
       << col << "\">" << p.solvers[s] << "</text>\n";
  }
  os << "</svg>\n";
}

}  // namespace dfo::bench
