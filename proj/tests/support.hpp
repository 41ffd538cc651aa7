#pragma once

// Shared generators and brute-force oracles for the unit and acceptance
// tests. The oracles below expand every matrix product into scalar loops over
// plain std::complex arrays so they share no code path with the Eigen-based
// implementation.

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "channel.hpp"
#include "precoding.hpp"
#include "ris.hpp"
#include "scenario.hpp"

namespace testsupport {

using crack::cdouble;
using crack::CMat;
using crack::Rng;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed * 0x9e3779b97f4a7c15ULL + 17); }

inline CMat random_cmat(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  CMat x(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) x(i, j) = cdouble(g(rng), g(rng));
  return x;
}

inline int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline double uniform_real(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Small, valid scenario with random sizes.
inline crack::ScenarioConfig small_config(Rng& rng, int max_m = 8) {
  crack::ScenarioConfig c;
  c.m = uniform_int(rng, 2, max_m);
  c.k = uniform_int(rng, 1, c.m - 1);
  const int blocks = uniform_int(rng, 1, 3);
  c.l = 2 * uniform_int(rng, 1, 3);
  c.n = c.l * blocks;
  return c;
}

// Channel set whose every field is i.i.d. Gaussian. The LoS caches are
// unit-modulus so HA objectives stay meaningful.
inline crack::ChannelSet random_channel_set(int m, int k, int n, Rng& rng) {
  crack::ChannelSet s;
  s.h_ub = random_cmat(m, k, rng);
  s.h_ur = random_cmat(n, k, rng);
  s.h_rb = random_cmat(m, n, rng);
  s.h_eb = random_cmat(m, 1, rng).col(0);
  s.h_er = random_cmat(n, 1, rng).col(0);
  s.g_ju = random_cmat(k, 1, rng).col(0);
  s.g_je = random_cmat(1, 1, rng)(0, 0);
  auto unit = [&](Eigen::Index r, Eigen::Index c) {
    CMat x(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
      for (Eigen::Index i = 0; i < r; ++i) x(i, j) = std::polar(1.0, uniform_real(rng, 0, 6.3));
    return x;
  };
  s.los_ub = unit(m, k);
  s.los_ur = unit(n, k);
  s.los_rb = unit(m, n);
  s.beta = Eigen::VectorXd::Ones(k);
  return s;
}

// ---- scalar oracles -------------------------------------------------------

using Dense = std::vector<std::vector<cdouble>>;

inline Dense to_dense(const CMat& x) {
  Dense d(x.rows(), std::vector<cdouble>(x.cols()));
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) d[i][j] = x(i, j);
  return d;
}

inline Dense phi_minus_identity(const crack::ScatteringMatrix& phi) {
  const int n = phi.size();
  Dense d(n, std::vector<cdouble>(n, 0.0));
  for (int r = 0; r < n; ++r) d[r][phi.column_of(r)] += phi.coefficient(r);
  for (int r = 0; r < n; ++r) d[r][r] -= 1.0;
  return d;
}

// H_up(m, k) = sum_a sum_b H_rb(m, a) (Phi - I)(a, b) H_ur(b, k) + H_ub(m, k).
inline Dense oracle_uplink(const crack::ChannelSet& s, const crack::ScatteringMatrix& phi) {
  const Dense rb = to_dense(s.h_rb), ur = to_dense(s.h_ur), ub = to_dense(s.h_ub);
  const Dense p = phi_minus_identity(phi);
  const int m = s.m(), k = s.k(), n = s.n();
  Dense out(m, std::vector<cdouble>(k));
  for (int i = 0; i < m; ++i)
    for (int u = 0; u < k; ++u) {
      cdouble acc = ub[i][u];
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) acc += rb[i][a] * p[a][b] * ur[b][u];
      out[i][u] = acc;
    }
  return out;
}

// Row u of the true downlink: sum_a sum_b H_ur(a, u) (Phi - I)(a, b) H_rb(m, b) + H_ub(m, u).
inline Dense oracle_downlink(const crack::ChannelSet& s, const crack::ScatteringMatrix& phi) {
  const Dense rb = to_dense(s.h_rb), ur = to_dense(s.h_ur), ub = to_dense(s.h_ub);
  const Dense p = phi_minus_identity(phi);
  const int m = s.m(), k = s.k(), n = s.n();
  Dense out(k, std::vector<cdouble>(m));
  for (int u = 0; u < k; ++u)
    for (int i = 0; i < m; ++i) {
      cdouble acc = ub[i][u];
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) acc += ur[a][u] * p[a][b] * rb[i][b];
      out[u][i] = acc;
    }
  return out;
}

inline std::vector<cdouble> oracle_eve_row(const crack::ChannelSet& s,
                                           const crack::ScatteringMatrix& phi) {
  const Dense rb = to_dense(s.h_rb);
  const Dense p = phi_minus_identity(phi);
  const int m = s.m(), n = s.n();
  std::vector<cdouble> out(m);
  for (int i = 0; i < m; ++i) {
    cdouble acc = s.h_eb(i);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) acc += s.h_er(a) * p[a][b] * rb[i][b];
    out[i] = acc;
  }
  return out;
}

inline cdouble dot_row_col(const std::vector<cdouble>& row, const Dense& w, int col) {
  cdouble acc = 0.0;
  for (std::size_t i = 0; i < row.size(); ++i) acc += row[i] * w[i][col];
  return acc;
}

struct OracleMetrics {
  std::vector<double> sinr, rate, eve_sinr, eve_rate, secrecy;
  std::vector<bool> outage;
};

// Single DT sub-slot metrics, every term written out.
inline OracleMetrics oracle_metrics(const Dense& h_down, const std::vector<cdouble>& h_eve,
                                    const Dense& w, double sigma2,
                                    const std::vector<double>& jam) {
  const int k = static_cast<int>(h_down.size());
  OracleMetrics o;
  for (int u = 0; u < k; ++u) {
    const double signal = std::norm(dot_row_col(h_down[u], w, u));
    double interference = 0.0;
    for (int i = 0; i < k; ++i)
      if (i != u) interference += std::norm(dot_row_col(h_down[u], w, i));
    const double sinr = signal / (interference + jam[u] + sigma2);
    const double e_signal = std::norm(dot_row_col(h_eve, w, u));
    double e_interference = 0.0;
    for (int i = 0; i < k; ++i)
      if (i != u) e_interference += std::norm(dot_row_col(h_eve, w, i));
    const double e_sinr = e_signal / (e_interference + sigma2);
    const double r = std::log(1.0 + sinr) / std::log(2.0);
    const double re = std::log(1.0 + e_sinr) / std::log(2.0);
    o.sinr.push_back(sinr);
    o.rate.push_back(r);
    o.eve_sinr.push_back(e_sinr);
    o.eve_rate.push_back(re);
    o.secrecy.push_back(r > re ? r - re : 0.0);
    o.outage.push_back(r < re);
  }
  return o;
}

inline double rel_err(double got, double want) {
  const double scale = std::max(std::abs(want), 1e-300);
  return std::abs(got - want) / scale;
}

}  // namespace testsupport
