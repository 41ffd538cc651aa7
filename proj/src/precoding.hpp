#pragma once

#include <string_view>

#include "channel.hpp"

namespace crack {

enum class PrecoderKind { kMrt, kZf, kExternal };

std::string_view to_string(PrecoderKind kind);
PrecoderKind parse_precoder(std::string_view text);

// Downlink precoder W = [w_1 ... w_K] with sum_k ||w_k||^2 = P_total. xi is
// the common scale applied to the unnormalized design.
struct Precoder {
  CMat w;  // M x K
  double xi = 0.0;
  PrecoderKind kind = PrecoderKind::kExternal;
};

// W = xi conj(H_up), xi = sqrt(P) / ||H_up||_F.
Precoder mrt(const CMat& h_up, double p_total);

// W = xi conj(H_up) (H_up^T conj(H_up))^{-1}. Throws Error(kZfSingular) when
// the Gram matrix is singular or its condition number exceeds cond_cap.
Precoder zf(const CMat& h_up, double p_total, double cond_cap = 1e10);

// sqrt(P) W_raw / ||W_raw||_F.
Precoder normalize_power(const CMat& w_raw, double p_total);

Precoder make_precoder(PrecoderKind kind, const CMat& h_up, double p_total,
                       double cond_cap);

}  // namespace crack
