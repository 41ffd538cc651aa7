#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "scenario.hpp"

namespace crack {

using cdouble = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using CRow = Eigen::RowVectorXcd;

class ScatteringMatrix;

// One coherence block's channel realization. Column conventions follow the
// uplink direction: h_ub column k is user k -> BS.
struct ChannelSet {
  CMat h_ub;  // M x K
  CMat h_ur;  // N x K
  CMat h_rb;  // M x N
  CVec h_eb;  // M
  CVec h_er;  // N
  CVec g_ju;  // K, jammer -> users
  cdouble g_je;

  // Unit-amplitude LoS components (before the large-scale gain).
  CMat los_ub;  // M x K, each column has squared norm M
  CMat los_ur;  // N x K, each column has squared norm N
  CMat los_rb;  // M x N, a_M a_N^H
  Eigen::VectorXd beta;  // K, HA weights

  std::vector<Vec3> user_positions;

  int m() const { return static_cast<int>(h_ub.rows()); }
  int k() const { return static_cast<int>(h_ub.cols()); }
  int n() const { return static_cast<int>(h_ur.rows()); }
};

// Half-wavelength ULA: entry i is exp(j*pi*i*sin(angle)).
CVec ula_response(int num_elements, double angle);

// Angle seen by an x-axis ULA at `from` towards `to`: asin(dx / d).
double array_angle(const Vec3& from, const Vec3& to);

// rho * d^-iota. Throws for d <= 0.
double path_loss(double rho, double d, double iota);

// Circular complex Gaussian, zero mean, unit variance.
inline cdouble complex_gaussian(Rng& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  const double re = normal(rng);
  const double im = normal(rng);
  return {re, im};
}

// sqrt(alpha) * (sqrt(kappa/(1+kappa)) los + sqrt(1/(1+kappa)) tilde).
// kappa = +inf gives the pure LoS channel.
template <class Derived>
typename Derived::PlainObject sample_rician(double alpha, double kappa,
                                            const Eigen::MatrixBase<Derived>& los,
                                            Rng& rng) {
  double los_weight = 1.0;
  double nlos_weight = 0.0;
  if (std::isfinite(kappa)) {
    los_weight = std::sqrt(kappa / (1.0 + kappa));
    nlos_weight = std::sqrt(1.0 / (1.0 + kappa));
  }
  typename Derived::PlainObject out(los.rows(), los.cols());
  // Column-major fill order keeps the draw sequence independent of Eigen's
  // expression evaluation.
  for (Eigen::Index j = 0; j < los.cols(); ++j)
    for (Eigen::Index i = 0; i < los.rows(); ++i) {
      const cdouble tilde = complex_gaussian(rng);
      out(i, j) = los_weight * los(i, j) + nlos_weight * tilde;
    }
  return std::sqrt(alpha) * out;
}

std::vector<Vec3> sample_user_positions(const ScenarioConfig& config, Rng& rng);

ChannelSet gen_channel_set(const ScenarioConfig& config,
                           const std::vector<Vec3>& user_positions, Rng& rng);

// H_rb (Phi - I) H_ur + H_ub, M x K.
CMat uplink_composite(const ChannelSet& set, const ScatteringMatrix& phi);

// H_ur^T (Phi - I) H_rb^T + H_ub^T, K x M; row k is the true BS -> user k
// channel.
CMat downlink_actual(const ChannelSet& set, const ScatteringMatrix& phi);

// h_er^T (Phi - I) H_rb^T + h_eb^T, 1 x M.
CRow eve_downlink(const ChannelSet& set, const ScatteringMatrix& phi);

}  // namespace crack
