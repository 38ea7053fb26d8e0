// SPDX-License-Identifier: Apache-2.0
#include "vempc/ckks/encoder.hpp"

#include <cmath>
#include <numbers>

#include "vempc/common.hpp"

namespace vempc::ckks {

namespace {

void bit_reverse_permute(std::vector<std::complex<double>>& v) {
  const size_t n = v.size();
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(v[i], v[j]);
  }
}

int64_t round_checked(double x) {
  if (!std::isfinite(x) || std::abs(x) > 0x1p62)
    throw NumericalError("encoder: coefficient out of range");
  return llround(x);
}

}  // namespace

CkksEncoder::CkksEncoder(int logn) : logn_(logn), n_(1 << logn), slots_(n_ >> 1) {
  if (logn < 3 || logn > 17) throw ConfigError("encoder: logN out of range");
  const uint64_t m = uint64_t(n_) << 1;
  ksi_.resize(m + 1);
  for (uint64_t k = 0; k <= m; ++k) {
    const double ang = 2.0 * std::numbers::pi * double(k) / double(m);
    ksi_[k] = {std::cos(ang), std::sin(ang)};
  }
  rot_group_.resize(static_cast<size_t>(slots_));
  uint64_t five = 1;
  for (int j = 0; j < slots_; ++j) {
    rot_group_[size_t(j)] = uint32_t(five);
    five = (five * 5) % m;
  }
}

void CkksEncoder::fft_special(std::vector<std::complex<double>>& vals) const {
  const int size = int(vals.size());
  const uint64_t m = uint64_t(n_) << 1;
  bit_reverse_permute(vals);
  for (int len = 2; len <= size; len <<= 1) {
    const int lenh = len >> 1;
    const uint64_t lenq = uint64_t(len) << 2;
    for (int i = 0; i < size; i += len) {
      for (int j = 0; j < lenh; ++j) {
        const uint64_t idx = (rot_group_[size_t(j)] % lenq) * m / lenq;
        const std::complex<double> u = vals[size_t(i + j)];
        const std::complex<double> v = vals[size_t(i + j + lenh)] * ksi_[idx];
        vals[size_t(i + j)] = u + v;
        vals[size_t(i + j + lenh)] = u - v;
      }
    }
  }
}

void CkksEncoder::fft_special_inv(std::vector<std::complex<double>>& vals) const {
  const int size = int(vals.size());
  const uint64_t m = uint64_t(n_) << 1;
  for (int len = size; len >= 2; len >>= 1) {
    const int lenh = len >> 1;
    const uint64_t lenq = uint64_t(len) << 2;
    for (int i = 0; i < size; i += len) {
      for (int j = 0; j < lenh; ++j) {
        const uint64_t idx = (lenq - rot_group_[size_t(j)] % lenq) * m / lenq;
        const std::complex<double> u = vals[size_t(i + j)] + vals[size_t(i + j + lenh)];
        const std::complex<double> v =
            (vals[size_t(i + j)] - vals[size_t(i + j + lenh)]) * ksi_[idx];
        vals[size_t(i + j)] = u;
        vals[size_t(i + j + lenh)] = v;
      }
    }
  }
  bit_reverse_permute(vals);
  for (auto& x : vals) x /= double(size);
}

std::vector<int64_t> CkksEncoder::encode(const SlotVector& v, double scale) const {
  if (int(v.size()) != slots_) throw ConfigError("encoder: slot-count mismatch");
  if (!(scale > 0.0)) throw ConfigError("encoder: scale must be positive");
  std::vector<std::complex<double>> vals(static_cast<size_t>(slots_));
  for (int j = 0; j < slots_; ++j) vals[size_t(j)] = {v[size_t(j)], 0.0};
  fft_special_inv(vals);
  std::vector<int64_t> coeffs(static_cast<size_t>(n_));
  for (int i = 0; i < slots_; ++i) {
    coeffs[size_t(i)] = round_checked(vals[size_t(i)].real() * scale);
    coeffs[size_t(i + slots_)] = round_checked(vals[size_t(i)].imag() * scale);
  }
  return coeffs;
}

SlotVector CkksEncoder::decode(const std::vector<int64_t>& coeffs, double scale) const {
  if (int(coeffs.size()) != n_) throw ConfigError("encoder: coefficient-count mismatch");
  std::vector<std::complex<double>> vals(static_cast<size_t>(slots_));
  for (int i = 0; i < slots_; ++i)
    vals[size_t(i)] = {double(coeffs[size_t(i)]) / scale,
                       double(coeffs[size_t(i + slots_)]) / scale};
  fft_special(vals);
  SlotVector out(static_cast<size_t>(slots_));
  for (int j = 0; j < slots_; ++j) out[size_t(j)] = vals[size_t(j)].real();
  return out;
}

std::vector<int64_t> CkksEncoder::encode_reference(const SlotVector& v, double scale) const {
  if (int(v.size()) != slots_) throw ConfigError("encoder: slot-count mismatch");
  const uint64_t m = uint64_t(n_) << 1;
  std::vector<int64_t> coeffs(static_cast<size_t>(n_));
  for (int i = 0; i < n_; ++i) {
    std::complex<double> acc{0.0, 0.0};
    for (int j = 0; j < slots_; ++j) {
      const uint64_t e = (uint64_t(i) * rot_group_[size_t(j)]) % m;
      acc += std::complex<double>(v[size_t(j)], 0.0) * std::conj(ksi_[e]);
    }
    coeffs[size_t(i)] = round_checked(2.0 * acc.real() / double(n_) * scale);
  }
  return coeffs;
}

SlotVector CkksEncoder::decode_reference(const std::vector<int64_t>& coeffs,
                                         double scale) const {
  if (int(coeffs.size()) != n_) throw ConfigError("encoder: coefficient-count mismatch");
  const uint64_t m = uint64_t(n_) << 1;
  SlotVector out(static_cast<size_t>(slots_));
  for (int j = 0; j < slots_; ++j) {
    std::complex<double> acc{0.0, 0.0};
    for (int i = 0; i < n_; ++i) {
      const uint64_t e = (uint64_t(i) * rot_group_[size_t(j)]) % m;
      acc += double(coeffs[size_t(i)]) * ksi_[e];
    }
    out[size_t(j)] = acc.real() / scale;
  }
  return out;
}

}  // namespace vempc::ckks
