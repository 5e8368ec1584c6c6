"""Deterministic numerical integration engine.

Three entry points cover every analytic formula in the package:

* :func:`integrate` -- adaptive 1-D quadrature on a finite interval
  (QUADPACK behind a uniform error contract),
* :func:`integrate_sinc_weighted` -- integrals of the form
  ``int_R F(x) * sin(2 pi x)/(2 pi x) dx`` for even ``F``.  The sinc
  weight decays only like 1/x, which defeats generic adaptive
  subdivision, so the real line is partitioned at the half-integer
  zeros of sin(2 pi x) and the tail is certified with a bound built
  from a caller-supplied integrable envelope of ``F``,
* :func:`integrate_2d` -- tensor-product adaptive quadrature on a
  rectangle.

All functions are pure; there is no shared mutable state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad


class QuadratureError(RuntimeError):
    """Raised when an integral does not converge within budget.

    Carries the best available estimate so callers can decide whether
    to proceed anyway.
    """

    def __init__(self, message: str, best_estimate: float, err_est: float):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.err_est = err_est


@dataclass(frozen=True)
class QuadratureSettings:
    """Error budget for a single integral.

    ``tail_fraction`` controls truncation of infinite domains: the tail
    is cut where its certified contribution drops below
    ``abs_tol * tail_fraction``.
    """

    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_subdivisions: int = 200
    tail_fraction: float = 0.1

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")
        if not (0 < self.tail_fraction <= 1):
            raise ValueError("tail_fraction must be in (0, 1]")


DEFAULT_SETTINGS = QuadratureSettings()


def integrate(
    f: Callable[[float], float],
    a: float,
    b: float,
    settings: QuadratureSettings = DEFAULT_SETTINGS,
    breakpoints: Sequence[float] | None = None,
) -> tuple[float, float]:
    """Integrate ``f`` over the finite interval ``[a, b]``.

    Returns ``(value, err_est)`` with ``err_est`` bounded by
    ``max(abs_tol, rel_tol * |value|)`` on success.  ``breakpoints``
    marks interior points where the integrand has kinks.

    Raises :class:`QuadratureError` (carrying the best estimate) if the
    subdivision budget is exhausted without convergence.
    """
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError("integrate requires finite endpoints")
    if not a < b:
        raise ValueError(f"need a < b, got a={a}, b={b}")

    pts = None
    if breakpoints is not None:
        pts = sorted(p for p in breakpoints if a < p < b)
        if not pts:
            pts = None

    value, err, info, *rest = quad(
        f,
        a,
        b,
        epsabs=settings.abs_tol,
        epsrel=settings.rel_tol,
        limit=settings.max_subdivisions,
        points=pts,
        full_output=True,
    )
    if rest:  # QUADPACK signalled trouble: (message,) or (message, explain)
        raise QuadratureError(
            f"quadrature did not converge on [{a}, {b}]: {rest[0]}",
            best_estimate=value,
            err_est=err,
        )
    if err > max(settings.abs_tol, settings.rel_tol * abs(value)) * 10:
        raise QuadratureError(
            f"error estimate {err:.3e} exceeds tolerance target on [{a}, {b}]",
            best_estimate=value,
            err_est=err,
        )
    return value, err


def _sinc2(x: np.ndarray | float):
    """sin(2 pi x) / (2 pi x), with the value 1 at x = 0."""
    return np.sinc(2.0 * x)


def integrate_sinc_weighted(
    F: Callable[[float], float],
    decay_bound: Callable[[float], float],
    settings: QuadratureSettings = DEFAULT_SETTINGS,
) -> float:
    """Integral of ``F(x) * sin(2 pi x)/(2 pi x)`` over the whole line.

    ``F`` must be even and dominated by ``decay_bound`` with a finite
    tail integral; the envelope is what certifies truncation.  The
    domain is split at the zeros x = k/2 of the weight so each panel is
    non-oscillatory, and summation stops once both the alternating-series
    bound (first omitted panel) and the absolute envelope bound for the
    remaining tail fall below the truncation budget.
    """
    budget = settings.abs_tol * settings.tail_fraction

    tail_cache: dict[float, float] = {}

    def tail_integral(t: float) -> float:
        if t not in tail_cache:
            val, _, _info, *rest = quad(
                decay_bound,
                t,
                np.inf,
                epsabs=budget,
                epsrel=1e-8,
                limit=settings.max_subdivisions,
                full_output=True,
            )
            if rest or not math.isfinite(val) or val < 0:
                raise ValueError(
                    "decay_bound is not integrable over the declared tail; "
                    "cannot certify truncation"
                )
            tail_cache[t] = val
        return tail_cache[t]

    # Reject non-integrable envelopes up front.
    tail_integral(1.0)

    max_panels = max(64, 8 * settings.max_subdivisions)
    panel_settings = QuadratureSettings(
        abs_tol=settings.abs_tol * settings.tail_fraction,
        rel_tol=settings.rel_tol,
        max_subdivisions=settings.max_subdivisions,
    )

    half_total = 0.0
    k = 0
    while True:
        a, b = 0.5 * k, 0.5 * (k + 1)
        val, _ = integrate(lambda x: F(x) * float(_sinc2(x)), a, b, panel_settings)
        half_total += val
        k += 1
        x0 = 0.5 * k
        tail = tail_integral(x0)
        # |sum of remaining panels| <= tail/(2 pi x0); the first omitted
        # panel alone is bounded by (tail - tail(next zero))/(2 pi x0).
        abs_bound = tail / (2.0 * math.pi * x0)
        alt_bound = max(0.0, tail - tail_integral(x0 + 0.5)) / (2.0 * math.pi * x0)
        if min(abs_bound, alt_bound) < budget:
            break
        if k >= max_panels:
            raise QuadratureError(
                f"sinc-weighted tail not certified after {k} panels",
                best_estimate=2.0 * half_total,
                err_est=abs_bound,
            )
    return 2.0 * half_total


def integrate_2d(
    f: Callable[[float, float], float],
    box: tuple[tuple[float, float], tuple[float, float]],
    settings: QuadratureSettings = DEFAULT_SETTINGS,
) -> float:
    """Tensor-product adaptive quadrature of ``f(x, y)`` over a rectangle.

    ``box`` is ``((x_lo, x_hi), (y_lo, y_hi))``.  The inner integral runs
    in x at a tightened tolerance so the outer y-integration sees an
    effectively smooth integrand.
    """
    (x_lo, x_hi), (y_lo, y_hi) = box
    inner_settings = QuadratureSettings(
        abs_tol=settings.abs_tol / max(1.0, (y_hi - y_lo)),
        rel_tol=settings.rel_tol,
        max_subdivisions=settings.max_subdivisions,
    )

    def marginal(y: float) -> float:
        val, _ = integrate(lambda x: f(x, y), x_lo, x_hi, inner_settings)
        return val

    value, _ = integrate(marginal, y_lo, y_hi, settings)
    return value
