#include "precoding.hpp"

#include <string>

namespace crack {

std::string_view to_string(PrecoderKind kind) {
  switch (kind) {
    case PrecoderKind::kMrt: return "mrt";
    case PrecoderKind::kZf: return "zf";
    case PrecoderKind::kExternal: return "external";
  }
  return "unknown";
}

PrecoderKind parse_precoder(std::string_view text) {
  if (text == "mrt") return PrecoderKind::kMrt;
  if (text == "zf") return PrecoderKind::kZf;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown precoder '" + std::string(text) + "' (expected mrt or zf)");
}

Precoder normalize_power(const CMat& w_raw, double p_total) {
  const double norm = w_raw.norm();
  if (!(norm > 0.0) || !std::isfinite(norm))
    throw Error(ErrorCode::kInvalidArgument, "cannot normalize a zero precoder");
  const double xi = std::sqrt(p_total) / norm;
  return Precoder{xi * w_raw, xi, PrecoderKind::kExternal};
}

Precoder mrt(const CMat& h_up, double p_total) {
  if (!(h_up.norm() > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "mrt: all-zero channel");
  Precoder p = normalize_power(h_up.conjugate(), p_total);
  p.kind = PrecoderKind::kMrt;
  return p;
}

Precoder zf(const CMat& h_up, double p_total, double cond_cap) {
  // W_raw = conj(H) A^{-1} with A = H^T conj(H). Transposing gives
  // (H^H H) W_raw^T = H^H, a Hermitian positive-definite system.
  const CMat gram = h_up.adjoint() * h_up;
  Eigen::SelfAdjointEigenSolver<CMat> eig(gram, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(hi > 0.0) || !(lo > 0.0) || hi / lo > cond_cap)
    throw Error(ErrorCode::kZfSingular, "zf-singular: channel Gram matrix is rank deficient "
                                        "or ill-conditioned");
  const Eigen::LDLT<CMat> ldlt(gram);
  const CMat w_raw_t = ldlt.solve(h_up.adjoint());
  Precoder p = normalize_power(w_raw_t.transpose(), p_total);
  p.kind = PrecoderKind::kZf;
  return p;
}

Precoder make_precoder(PrecoderKind kind, const CMat& h_up, double p_total,
                       double cond_cap) {
  switch (kind) {
    case PrecoderKind::kMrt: return mrt(h_up, p_total);
    case PrecoderKind::kZf: return zf(h_up, p_total, cond_cap);
    case PrecoderKind::kExternal: break;
  }
  throw Error(ErrorCode::kInvalidArgument, "make_precoder: external precoders are supplied by the caller");
}

}  // namespace crack
