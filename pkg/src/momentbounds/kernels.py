"""Limiting eigenvalue densities of the classical compact groups.

The one- and two-level densities are built from the sine kernel
``K(y) = sin(pi y)/(pi y)`` and its reflections
``K_eps(x, y) = K(x - y) + eps K(x + y)``:

* SO(even): ``det(K_1)``,
* SO(odd):  ``det(K_-1)`` plus point masses at the origin (the minors of
  the determinant with one index removed),
* O: the average of the two SO cases,
* U: ``det(K_0)``,
* Sp: ``det(K_-1)``.

Expectations of test-function sums against these densities are computed
in transform space wherever the transform is available: for compactly
supported ``phihat`` the oscillatory factor ``sin(2 pi x)/(2 pi x)``
integrates exactly to ``(1/2) int_{-1}^{1} phihat``, which removes all
oscillation from the quadrature.  The SO(odd) two-level point masses are
reduced analytically to one-dimensional integrals.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .quadrature import DEFAULT_SETTINGS, QuadratureSettings, integrate, integrate_2d
from .testfunc import TestFunction


class SymmetryGroup(enum.Enum):
    """Classical compact group attached to a family."""

    SO_EVEN = "so-even"
    SO_ODD = "so-odd"
    O = "o"
    U = "u"
    SP = "sp"

    @classmethod
    def from_string(cls, text: str) -> "SymmetryGroup":
        try:
            return cls(text.strip().lower())
        except ValueError:
            valid = ", ".join(g.value for g in cls)
            raise ValueError(f"unknown symmetry group {text!r} (valid: {valid})") from None

    @property
    def rank_parity(self) -> int | None:
        """Parity of admissible central vanishing orders (None if unconstrained)."""
        if self is SymmetryGroup.SO_EVEN:
            return 0
        if self is SymmetryGroup.SO_ODD:
            return 1
        return None


@dataclass(frozen=True)
class DensityValue:
    """A density evaluated at a point: smooth part plus origin point mass."""

    smooth_part: float
    delta_weight: float = 0.0


@dataclass(frozen=True)
class DensityValue2D:
    """Two-level density at (x, y): smooth part plus the two delta minors.

    The point-mass terms are ``delta_x_weight * delta(x)`` and
    ``delta_y_weight * delta(y)``; the weights depend on the other
    coordinate.
    """

    smooth_part: float
    delta_x_weight: float = 0.0
    delta_y_weight: float = 0.0


def kernel_K(y) -> np.ndarray:
    """Sine kernel sin(pi y)/(pi y), value 1 at y = 0."""
    return np.sinc(np.asarray(y, dtype=float))


def kernel_K_eps(eps: int, x, y) -> np.ndarray:
    """K(x - y) + eps * K(x + y) for eps in {-1, 0, 1}."""
    if eps not in (-1, 0, 1):
        raise ValueError("eps must be -1, 0 or 1")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return kernel_K(x - y) + eps * kernel_K(x + y)


def density_W1(group: SymmetryGroup, x: float) -> DensityValue:
    """One-level density of the given group at x."""
    s = float(kernel_K(2.0 * x))  # K_eps(x, x) = 1 + eps*K(2x)
    if group is SymmetryGroup.SO_EVEN:
        return DensityValue(1.0 + s)
    if group is SymmetryGroup.SO_ODD:
        return DensityValue(1.0 - s, delta_weight=1.0)
    if group is SymmetryGroup.O:
        return DensityValue(1.0, delta_weight=0.5)
    if group is SymmetryGroup.U:
        return DensityValue(1.0)
    return DensityValue(1.0 - s)  # Sp


def density_W2(group: SymmetryGroup, x: float, y: float) -> DensityValue2D:
    """Two-level density at (x, y): 2x2 determinant plus SO(odd) minors."""
    if group is SymmetryGroup.O:
        even = density_W2(SymmetryGroup.SO_EVEN, x, y)
        odd = density_W2(SymmetryGroup.SO_ODD, x, y)
        return DensityValue2D(
            0.5 * (even.smooth_part + odd.smooth_part),
            0.5 * odd.delta_x_weight,
            0.5 * odd.delta_y_weight,
        )
    eps = {SymmetryGroup.SO_EVEN: 1, SymmetryGroup.SO_ODD: -1, SymmetryGroup.U: 0, SymmetryGroup.SP: -1}[group]
    kxx = float(kernel_K_eps(eps, x, x))
    kyy = float(kernel_K_eps(eps, y, y))
    kxy = float(kernel_K_eps(eps, x, y))
    det = kxx * kyy - kxy * kxy
    if group is SymmetryGroup.SO_ODD:
        return DensityValue2D(det, delta_x_weight=kyy, delta_y_weight=kxx)
    return DensityValue2D(det)


def _half_transform_integral(
    tf: TestFunction, settings: QuadratureSettings
) -> float:
    """(1/2) int_{-1}^{1} phihat(y) dy == int phi(x) sin(2 pi x)/(2 pi x) dx."""
    upper = min(1.0, tf.support_bound)
    val, _ = integrate(
        lambda y: float(tf.phihat(y)),
        0.0,
        upper,
        settings,
        breakpoints=tf.phihat_breakpoints(),
    )
    return val


def expectation_1level(
    tf: TestFunction,
    group: SymmetryGroup,
    settings: QuadratureSettings = DEFAULT_SETTINGS,
) -> float:
    """(1/phi(0)) * int phi(x) W_1(x) dx, point masses included."""
    phi0 = tf.phi0
    if not phi0 > 0:
        raise ValueError("expectation_1level needs phi(0) > 0")
    phihat0 = tf.phihat0
    if group is SymmetryGroup.U:
        return phihat0 / phi0
    s = _half_transform_integral(tf, settings)
    if group is SymmetryGroup.SO_EVEN:
        return (phihat0 + s) / phi0
    if group is SymmetryGroup.SO_ODD:
        return (phihat0 - s + phi0) / phi0
    if group is SymmetryGroup.SP:
        return (phihat0 - s) / phi0
    # O: average of the split cases
    even = (phihat0 + s) / phi0
    odd = (phihat0 - s + phi0) / phi0
    return 0.5 * (even + odd)


def _pair_transform_integral(
    tf1: TestFunction, tf2: TestFunction, settings: QuadratureSettings
) -> float:
    """int (1 - |t|)_+ phihat_1(t) phihat_2(t) dt  (== int int Phi K(x-y)^2)."""
    upper = min(1.0, tf1.support_bound, tf2.support_bound)
    if upper <= 0:
        return 0.0
    kinks = sorted(
        {
            p
            for p in (*tf1.phihat_breakpoints(), *tf2.phihat_breakpoints())
            if 0.0 < p < upper
        }
    )
    val, _ = integrate(
        lambda t: (1.0 - t) * float(tf1.phihat(t)) * float(tf2.phihat(t)),
        0.0,
        upper,
        settings,
        breakpoints=kinks,
    )
    return 2.0 * val


def _cross_transform_integral(
    tf1: TestFunction, tf2: TestFunction, settings: QuadratureSettings
) -> float:
    """int int Phi(x, y) K(x-y) K(x+y) dx dy in transform coordinates.

    Writing each kernel factor as the transform of the unit rectangle on
    (-1/2, 1/2) and rotating coordinates gives
    (1/2) * int int phihat_1(a) phihat_2(b) over the rhombus
    {|a| + |b| < 1}.  When the supports fit inside the rhombus the
    integral factorizes into phi_1(0) phi_2(0); otherwise the rhombus is
    integrated as a nested one-dimensional integral (inner integral over
    |a| < 1 - |b|), which keeps every integrand continuous.
    """
    s1, s2 = tf1.support_bound, tf2.support_bound
    if s1 + s2 <= 1.0:
        return 0.5 * tf1.phi0 * tf2.phi0

    inner_settings = QuadratureSettings(
        abs_tol=settings.abs_tol, rel_tol=settings.rel_tol, max_subdivisions=settings.max_subdivisions
    )

    def inner(b: float) -> float:
        t = min(1.0 - abs(b), s1)
        if t <= 0.0:
            return 0.0
        kinks = [p for p in tf1.phihat_breakpoints() if 0.0 < p < t]
        val, _ = integrate(
            lambda a: float(tf1.phihat(a)), 0.0, t, inner_settings, breakpoints=kinks
        )
        return 2.0 * val * float(tf2.phihat(b))

    b_max = min(s2, 1.0)
    outer_kinks = sorted(
        {p for p in (*tf2.phihat_breakpoints(), 1.0 - s1) if 0.0 < p < b_max}
    )
    val, _ = integrate(inner, 0.0, b_max, settings, breakpoints=outer_kinks)
    return 0.5 * 2.0 * val


def expectation_2level(
    tf1: TestFunction,
    tf2: TestFunction,
    group: SymmetryGroup,
    settings: QuadratureSettings = DEFAULT_SETTINGS,
) -> float:
    """(1/Phi(0,0)) * int int phi_1(x) phi_2(y) W_2(x, y) dx dy.

    The 2x2 determinant splits into products of one-dimensional
    transform-space integrals; the SO(odd) point masses contribute the
    two one-dimensional minor terms.
    """
    norm = tf1.phi0 * tf2.phi0
    if not norm > 0:
        raise ValueError("expectation_2level needs phi_1(0) phi_2(0) > 0")
    if group is SymmetryGroup.O:
        even = expectation_2level(tf1, tf2, SymmetryGroup.SO_EVEN, settings)
        odd = expectation_2level(tf1, tf2, SymmetryGroup.SO_ODD, settings)
        return 0.5 * (even + odd)

    t_pair = _pair_transform_integral(tf1, tf2, settings)
    if group is SymmetryGroup.U:
        return (tf1.phihat0 * tf2.phihat0 - t_pair) / norm

    eps = 1 if group is SymmetryGroup.SO_EVEN else -1
    s1 = _half_transform_integral(tf1, settings)
    s2 = _half_transform_integral(tf2, settings)
    i1 = tf1.phihat0 + eps * s1
    i2 = tf2.phihat0 + eps * s2
    cross = _cross_transform_integral(tf1, tf2, settings)
    total = i1 * i2 - (2.0 * t_pair + 2.0 * eps * cross)
    if group is SymmetryGroup.SO_ODD:
        # delta(x) K_{-1}(y,y) and delta(y) K_{-1}(x,x) minors
        total += tf1.phi0 * i2 + tf2.phi0 * i1
    return total / norm


def raw_to_centered(mu: float, mu2raw: float) -> float:
    """Second centered moment from the raw second moment."""
    return mu2raw - mu * mu


def raw_to_centered3(mu: float, mu2raw: float, mu3raw: float) -> float:
    """Third centered moment from the raw moments."""
    return mu3raw - 3.0 * mu * mu2raw + 2.0 * mu**3
