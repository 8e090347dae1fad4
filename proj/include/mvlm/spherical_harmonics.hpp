#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "mvlm/types.hpp"

namespace mvlm {

namespace detail {

/// Associated Legendre P_l^m(x) for a fixed m, all l in [m, l_max], via the
/// standard stable recurrences (Condon-Shortley phase included):
///   P_m^m     = (-1)^m (2m-1)!! (1-x^2)^{m/2}
///   P_{m+1}^m = x (2m+1) P_m^m
///   P_l^m     = ((2l-1) x P_{l-1}^m - (l+m-1) P_{l-2}^m) / (l - m)
template <typename Scalar>
std::vector<Scalar> associated_legendre_column(int l_max, int m, Scalar x) {
  std::vector<Scalar> values(static_cast<std::size_t>(l_max - m + 1));
  const Scalar one_minus_x2 = std::max(Scalar(0), Scalar(1) - x * x);
  Scalar pmm = Scalar(1);
  Scalar sign = Scalar(1);
  const Scalar s = std::sqrt(one_minus_x2);
  for (int k = 1; k <= m; ++k) {
    sign = -sign;
    pmm *= Scalar(2 * k - 1) * s;
  }
  pmm *= sign;
  values[0] = pmm;
  if (l_max == m) return values;
  Scalar pm1 = x * Scalar(2 * m + 1) * pmm;
  values[1] = pm1;
  Scalar pm2 = pmm;
  for (int l = m + 2; l <= l_max; ++l) {
    const Scalar pl = (Scalar(2 * l - 1) * x * pm1 - Scalar(l + m - 1) * pm2) / Scalar(l - m);
    values[static_cast<std::size_t>(l - m)] = pl;
    pm2 = pm1;
    pm1 = pl;
  }
  return values;
}

/// sqrt((2l+1)/(4 pi) * (l-m)!/(l+m)!), the orthonormalization constant.
template <typename Scalar>
Scalar sh_normalization(int l, int m) {
  Scalar factorial_ratio = Scalar(1);
  for (int k = l - m + 1; k <= l + m; ++k) factorial_ratio /= Scalar(k);
  return std::sqrt(Scalar(2 * l + 1) / (Scalar(4) * Scalar(std::numbers::pi)) * factorial_ratio);
}

}  // namespace detail

/// Real (tesseral) spherical harmonic Y_l^m(theta, phi), orthonormal over the
/// unit sphere; theta is the polar angle in [0, pi], phi the azimuth.  The
/// (-1)^m factor cancels the Condon-Shortley phase carried by P_l^m, so the
/// basis matches the usual real-harmonic tables (e.g. Y_1^1 = +sqrt(3/4pi) x/r).
template <typename Scalar>
Scalar real_sh(int l, int m, Scalar theta, Scalar phi) {
  if (l < 0 || std::abs(m) > l) {
    throw InputError("real_sh: order must satisfy |m| <= l (got l=" + std::to_string(l) +
                     ", m=" + std::to_string(m) + ")");
  }
  const int m_abs = std::abs(m);
  const Scalar x = std::cos(theta);
  const Scalar legendre = detail::associated_legendre_column<Scalar>(l, m_abs, x).back();
  const Scalar norm = detail::sh_normalization<Scalar>(l, m_abs);
  if (m == 0) return norm * legendre;
  const Scalar sqrt2 = std::sqrt(Scalar(2));
  const Scalar parity = (m_abs % 2 == 0) ? Scalar(1) : Scalar(-1);
  if (m > 0) return parity * sqrt2 * norm * legendre * std::cos(Scalar(m) * phi);
  return parity * sqrt2 * norm * legendre * std::sin(Scalar(m_abs) * phi);
}

/// All real SH values for l <= max_degree at one direction, laid out as
/// Y_0^0, Y_1^{-1}, Y_1^0, Y_1^1, ..., Y_d^d (index l^2 + l + m).
/// One Legendre recurrence per order; cheaper than (d+1)^2 single calls.
template <typename Scalar>
VecX<Scalar> real_sh_block(int max_degree, Scalar theta, Scalar phi) {
  if (max_degree < 0) throw InputError("real_sh_block: negative degree");
  const int count = (max_degree + 1) * (max_degree + 1);
  VecX<Scalar> block(count);
  const Scalar x = std::cos(theta);
  const Scalar sqrt2 = std::sqrt(Scalar(2));
  for (int m = 0; m <= max_degree; ++m) {
    const auto legendre = detail::associated_legendre_column<Scalar>(max_degree, m, x);
    const Scalar cos_m = std::cos(Scalar(m) * phi);
    const Scalar sin_m = std::sin(Scalar(m) * phi);
    const Scalar parity = (m % 2 == 0) ? Scalar(1) : Scalar(-1);
    for (int l = m; l <= max_degree; ++l) {
      const Scalar norm = detail::sh_normalization<Scalar>(l, m);
      const Scalar base = norm * legendre[static_cast<std::size_t>(l - m)];
      if (m == 0) {
        block(l * l + l) = base;
      } else {
        block(l * l + l + m) = parity * sqrt2 * base * cos_m;
        block(l * l + l - m) = parity * sqrt2 * base * sin_m;
      }
    }
  }
  return block;
}

/// Upper bound on |Y_l^m| over the sphere for all l <= max_degree; from the
/// addition theorem, sum_m Y_l^m(w)^2 = (2l+1)/(4 pi).
template <typename Scalar>
Scalar sh_amplitude_bound(int max_degree) {
  return std::sqrt(Scalar(2 * max_degree + 1) / (Scalar(4) * Scalar(std::numbers::pi)));
}

}  // namespace mvlm
