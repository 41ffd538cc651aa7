#include "channel.hpp"

#include <numbers>
#include <string>

#include "ris.hpp"

namespace crack {

CVec ula_response(int num_elements, double angle) {
  if (num_elements < 1)
    throw Error(ErrorCode::kInvalidArgument, "ula_response: num_elements must be >= 1");
  CVec a(num_elements);
  const double step = std::numbers::pi * std::sin(angle);
  for (int i = 0; i < num_elements; ++i) a(i) = std::polar(1.0, step * i);
  return a;
}

double array_angle(const Vec3& from, const Vec3& to) {
  const double d = distance(from, to);
  if (!(d > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "degenerate geometry: coincident endpoints");
  return std::asin((to[0] - from[0]) / d);
}

double path_loss(double rho, double d, double iota) {
  if (!(d > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "path_loss: distance must be positive");
  return rho * std::pow(d, -iota);
}

std::vector<Vec3> sample_user_positions(const ScenarioConfig& config, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Vec3> users;
  users.reserve(config.k);
  for (int k = 0; k < config.k; ++k) {
    // sqrt of a uniform radius fraction gives area-uniform placement.
    const double r = config.user_radius * std::sqrt(unit(rng));
    const double theta = 2.0 * std::numbers::pi * unit(rng);
    users.push_back({config.user_center[0] + r * std::cos(theta),
                     config.user_center[1] + r * std::sin(theta),
                     config.user_center[2]});
  }
  return users;
}

ChannelSet gen_channel_set(const ScenarioConfig& config,
                           const std::vector<Vec3>& user_positions, Rng& rng) {
  const int m = config.m;
  const int n = config.n;
  const int k = static_cast<int>(user_positions.size());
  if (k != config.k)
    throw Error(ErrorCode::kInvalidArgument,
                "gen_channel_set: expected " + std::to_string(config.k) + " user positions");

  ChannelSet set;
  set.user_positions = user_positions;
  set.los_ub.resize(m, k);
  set.los_ur.resize(n, k);
  set.h_ub.resize(m, k);
  set.h_ur.resize(n, k);
  set.g_ju.resize(k);
  set.beta.resize(k);

  const double d_rb = distance(config.ris_pos, config.bs_pos);
  const double alpha_rb = path_loss(config.rho, d_rb, config.iota.rb);
  set.los_rb = ula_response(m, array_angle(config.bs_pos, config.ris_pos)) *
               ula_response(n, array_angle(config.ris_pos, config.bs_pos)).adjoint();

  // Draw order is fixed: per user (direct, RIS, jammer), then RIS->BS, then Eve.
  const CMat one = CMat::Ones(1, 1);
  for (int u = 0; u < k; ++u) {
    const Vec3& pos = user_positions[u];
    const double alpha_kb = path_loss(config.rho, distance(pos, config.bs_pos), config.iota.kb);
    const double alpha_kr = path_loss(config.rho, distance(pos, config.ris_pos), config.iota.kr);
    const double alpha_ju =
        path_loss(config.rho, distance(pos, config.jammer_pos), config.jam_iota);

    set.los_ub.col(u) = ula_response(m, array_angle(config.bs_pos, pos));
    set.los_ur.col(u) = ula_response(n, array_angle(config.ris_pos, pos));
    set.h_ub.col(u) = sample_rician(alpha_kb, config.kappa.kb, set.los_ub.col(u), rng);
    set.h_ur.col(u) = sample_rician(alpha_kr, config.kappa.kr, set.los_ur.col(u), rng);
    set.g_ju(u) = sample_rician(alpha_ju, config.jam_kappa, one, rng)(0, 0);

    const double kr = config.kappa.kr;
    const double krb = config.kappa.rb;
    set.beta(u) = alpha_kr * alpha_rb * kr * krb / ((1.0 + kr) * (1.0 + krb));
  }

  set.h_rb = sample_rician(alpha_rb, config.kappa.rb, set.los_rb, rng);

  const double alpha_eb =
      path_loss(config.rho, distance(config.eve_pos, config.bs_pos), config.iota.eb);
  const double alpha_er =
      path_loss(config.rho, distance(config.eve_pos, config.ris_pos), config.iota.er);
  const double alpha_je =
      path_loss(config.rho, distance(config.eve_pos, config.jammer_pos), config.jam_iota);
  set.h_eb = sample_rician(alpha_eb, config.kappa.eb,
                           ula_response(m, array_angle(config.bs_pos, config.eve_pos)), rng);
  set.h_er = sample_rician(alpha_er, config.kappa.er,
                           ula_response(n, array_angle(config.ris_pos, config.eve_pos)), rng);
  set.g_je = sample_rician(alpha_je, config.jam_kappa, one, rng)(0, 0);
  return set;
}

namespace {

void check_size(const ChannelSet& set, const ScatteringMatrix& phi) {
  if (phi.size() != set.n())
    throw Error(ErrorCode::kInvalidArgument,
                "scattering matrix is " + std::to_string(phi.size()) +
                    "x" + std::to_string(phi.size()) + " but the channel set has N=" +
                    std::to_string(set.n()));
}

}  // namespace

CMat uplink_composite(const ChannelSet& set, const ScatteringMatrix& phi) {
  check_size(set, phi);
  return set.h_rb * phi.apply_minus_identity(set.h_ur) + set.h_ub;
}

CMat downlink_actual(const ChannelSet& set, const ScatteringMatrix& phi) {
  check_size(set, phi);
  return set.h_ur.transpose() * phi.apply_minus_identity(set.h_rb.transpose()) +
         set.h_ub.transpose();
}

CRow eve_downlink(const ChannelSet& set, const ScatteringMatrix& phi) {
  check_size(set, phi);
  return set.h_er.transpose() * phi.apply_minus_identity(set.h_rb.transpose()) +
         set.h_eb.transpose();
}

}  // namespace crack
