#pragma once

// Scalar-generic array-factor kernels. Element n of an n_az x n_el planar
// array sits at azimuth column n % n_az; far field is evaluated at zero
// elevation, so every row contributes the same azimuth phase.

#include <cmath>
#include <complex>

#include <Eigen/Core>

namespace sda::beam {

template <typename Scalar>
using ComplexVector = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

template <typename Scalar>
ComplexVector<Scalar> steering_vector(int n_azimuth, int n_elevation, Scalar spacing_wavelengths,
                                      Scalar angle_rad) {
  const Scalar two_pi = Scalar(2) * Scalar(3.14159265358979323846264338327950288);
  const Scalar k = two_pi * spacing_wavelengths * std::sin(angle_rad);
  ComplexVector<Scalar> a(n_azimuth * n_elevation);
  for (int row = 0; row < n_elevation; ++row)
    for (int col = 0; col < n_azimuth; ++col)
      a(row * n_azimuth + col) = std::polar(Scalar(1), k * Scalar(col));
  return a;
}

/// AF(theta) = sum_n A_n exp(j(k n d sin(theta) - phi_n)) = w^H a(theta).
template <typename Derived>
typename Derived::Scalar array_factor(const Eigen::MatrixBase<Derived>& weights, int n_azimuth,
                                      typename Derived::Scalar::value_type spacing_wavelengths,
                                      typename Derived::Scalar::value_type angle_rad) {
  using Real = typename Derived::Scalar::value_type;
  const int n_elevation = static_cast<int>(weights.size()) / n_azimuth;
  const auto a = steering_vector<Real>(n_azimuth, n_elevation, spacing_wavelengths, angle_rad);
  return weights.dot(a);
}

/// |AF|^2 over a grid of angles (radians).
template <typename Derived, typename GridDerived>
Eigen::Matrix<typename Derived::Scalar::value_type, Eigen::Dynamic, 1> array_power(
    const Eigen::MatrixBase<Derived>& weights, int n_azimuth,
    typename Derived::Scalar::value_type spacing_wavelengths,
    const Eigen::MatrixBase<GridDerived>& angles_rad) {
  using Real = typename Derived::Scalar::value_type;
  Eigen::Matrix<Real, Eigen::Dynamic, 1> out(angles_rad.size());
  for (Eigen::Index i = 0; i < angles_rad.size(); ++i)
    out(i) = std::norm(array_factor(weights, n_azimuth, spacing_wavelengths, Real(angles_rad(i))));
  return out;
}

}  // namespace sda::beam
