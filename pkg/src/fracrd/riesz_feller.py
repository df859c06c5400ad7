"""Riesz-Feller symbol and quadrature oracles for fractional operators.

Fourier convention used throughout the package::

    f*(k) = int f(x) exp(+ikx) dx,     f(x) = (1/2pi) int f*(k) exp(-ikx) dk

with which the Riesz-Feller derivative acts as the multiplier ``-psi(k)``,
``psi(k) = |k|**alpha * exp(i sign(k) theta pi / 2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.signal import savgol_coeffs
from numpy.polynomial.chebyshev import Chebyshev, cheb2poly
from scipy.special import gamma

from .errors import InsufficientSamples, InvalidParams, QuadratureFailure

__all__ = [
    "RieszFellerParams",
    "TemporalParams",
    "apply_riesz_feller_fourier",
    "apply_riesz_feller_quadrature",
    "apply_riesz_feller_spectral",
    "caputo_derivative_quadrature",
    "caputo_derivative_samples",
    "rl_integral_samples",
    "fourier_wavenumbers",
    "rl_integral_quadrature",
    "symbol",
]


@dataclass(frozen=True)
class RieszFellerParams:
    """Space-fractional order ``alpha`` in (0, 2] and skewness ``theta``."""

    alpha: float
    theta: float = 0.0

    def __post_init__(self) -> None:
        a, th = self.alpha, self.theta
        if not (np.isfinite(a) and 0 < a <= 2):
            raise InvalidParams(f"0 < alpha <= 2 violated (alpha={a})")
        if not np.isfinite(th) or abs(th) > min(a, 2 - a) + 1e-14:
            raise InvalidParams(
                f"|theta| <= min(alpha, 2-alpha) violated (alpha={a}, theta={th})"
            )

    @property
    def rho(self) -> float:
        """``(alpha - theta) / (2 alpha)``, the skewness weight of the H-function forms."""
        return (self.alpha - self.theta) / (2 * self.alpha)

    def mirrored(self) -> RieszFellerParams:
        """Parameters of the reflected operator, ``x -> -x``."""
        return RieszFellerParams(self.alpha, -self.theta)


@dataclass(frozen=True)
class TemporalParams:
    """Caputo order ``beta`` in (0, 2] and diffusion constant ``eta > 0``."""

    beta: float
    eta: float = 1.0

    def __post_init__(self) -> None:
        if not (np.isfinite(self.beta) and 0 < self.beta <= 2):
            raise InvalidParams(f"0 < beta <= 2 violated (beta={self.beta})")
        if not (np.isfinite(self.eta) and self.eta > 0):
            raise InvalidParams(f"eta > 0 violated (eta={self.eta})")


def symbol(params: RieszFellerParams, k):
    """``psi(k) = |k|**alpha exp(i sign(k) theta pi/2)``, with ``sign(0) = 0``."""
    k = np.asarray(k, dtype=float)
    if params.alpha == 2:
        out = (k * k).astype(complex)
    else:
        out = np.abs(k) ** params.alpha * np.exp(1j * np.sign(k) * params.theta * np.pi / 2)
    return complex(out) if out.ndim == 0 else out


def fourier_wavenumbers(num_points: int, spacing: float) -> np.ndarray:
    """Angular wavenumbers in FFT order for a periodic grid."""
    return 2 * np.pi * np.fft.fftfreq(num_points, d=spacing)


def apply_riesz_feller_spectral(values, spacing: float, params: RieszFellerParams):
    """Periodic spectral application of the Riesz-Feller derivative to grid samples."""
    values = np.asarray(values, dtype=float)
    k = fourier_wavenumbers(values.shape[-1], spacing)
    mult = -symbol(params, k)
    # the Nyquist mode is its own partner: keep the real part so output stays real
    if values.shape[-1] % 2 == 0:
        mult[values.shape[-1] // 2] = mult[values.shape[-1] // 2].real
    out = np.fft.fft(np.fft.ifft(values, axis=-1) * mult, axis=-1)
    return out.real


def apply_riesz_feller_fourier(fhat: Callable, params: RieszFellerParams, x: float) -> float:
    """Multiplier form on the real line: ``(1/2pi) int -psi(k) fhat(k) exp(-ikx) dk``.

    ``fhat(k) = int f(y) exp(iky) dy`` is needed for ``k >= 0`` only (``f`` real).
    Free of the periodisation error of :func:`apply_riesz_feller_spectral`.
    """

    def g(k: float) -> complex:
        return -symbol(params, k) * complex(fhat(k))

    if x == 0:
        val, _ = integrate.quad(lambda k: g(k).real, 0, np.inf, limit=500, epsabs=1e-15, epsrel=1e-13)
        return val / math.pi
    w, sgn = abs(x), math.copysign(1.0, x)
    c, _ = integrate.quad(lambda k: g(k).real, 0, np.inf, weight="cos", wvar=w, limlst=200)
    s_, _ = integrate.quad(lambda k: g(k).imag, 0, np.inf, weight="sin", wvar=w, limlst=200)
    return (c + sgn * s_) / math.pi


def _check_quad(info: tuple, what: str) -> None:
    if len(info) > 3 and info[3] and "roundoff" not in str(info[3]).lower():
        raise QuadratureFailure(f"{what}: {info[3]}")


def apply_riesz_feller_quadrature(
    f: Callable,
    params: RieszFellerParams,
    x: float,
    *,
    local_radius: float = 0.25,
    local_degree: int = 24,
    tail_tol: float = 1e-14,
) -> float:
    """Evaluate the Riesz-Feller derivative of ``f`` at ``x`` in real space.

    Uses the two-sided hypersingular integral with kernel ``xi**(-1-alpha)``.
    For ``alpha >= 1`` the integrands are compensated by ``-+ xi f'(x)``,
    which is required as soon as the two sides carry different weights.

    Near the singularity (``xi < local_radius``) ``f`` is replaced by a
    Chebyshev interpolant whose Taylor coefficients are integrated against
    the kernel in closed form; this avoids the 0/0 difference quotients that
    rounding would otherwise amplify.  Only smooth, decaying ``f`` are
    supported.
    """
    a, th = params.alpha, params.theta
    if not 0 < a < 2:
        raise InvalidParams("integral representation requires 0 < alpha < 2")
    if a == 1 and th != 0:
        raise InvalidParams("integral representation at alpha = 1 requires theta = 0")
    sp = math.sin((a + th) * math.pi / 2)
    sm = math.sin((a - th) * math.pi / 2)
    r = local_radius

    local = Chebyshev.interpolate(lambda u: np.asarray(f(x + r * u), dtype=float), local_degree)
    taylor = cheb2poly(local.coef)  # coefficients in u = xi / r
    if np.max(np.abs(local.coef[-3:])) > 1e-13 * max(1.0, np.max(np.abs(local.coef))):
        raise QuadratureFailure("f is not resolved by the local polynomial model")
    f0 = float(f(x))
    f1 = taylor[1] / r
    compensate = a >= 1
    j = np.arange(taylor.size)
    first = 2 if compensate else 1
    side = sp + (-1.0) ** j[first:] * sm
    val_near = float(np.sum(taylor[first:] * side / (j[first:] - a)) * r ** (-a))

    def mid(xi):
        val = sp * (f(x + xi) - f0) + sm * (f(x - xi) - f0)
        if compensate:
            val -= (sp - sm) * xi * f1
        return val * xi ** (-1.0 - a)

    val_mid, err, *info = integrate.quad(
        mid, r, 1.0, limit=200, full_output=1, epsabs=1e-13, epsrel=1e-12
    )
    _check_quad((val_mid, err, *info), "near-field Riesz-Feller integral")

    xi_max = 2.0
    while max(abs(f(x + xi_max)), abs(f(x - xi_max))) > tail_tol and xi_max < 1e8:
        xi_max *= 2.0

    def far(xi):
        return (sp * f(x + xi) + sm * f(x - xi)) * xi ** (-1.0 - a)

    val_far, err, *info = integrate.quad(
        far, 1.0, xi_max, limit=400, full_output=1, epsabs=1e-13, epsrel=1e-12
    )
    _check_quad((val_far, err, *info), "far-field Riesz-Feller integral")
    # analytic pieces: int_1^inf xi^(-1-a) = 1/a and int_1^inf xi^(-a) = 1/(a-1)
    val_far -= f0 * (sp + sm) / a
    if compensate and a != 1:
        val_far -= (sp - sm) * f1 / (a - 1.0)
    return float(gamma(1 + a) / math.pi * (val_near + val_mid + val_far))


def _fd_matrix_rows(n: int, order: int, m: int, h: float) -> list[tuple[slice, np.ndarray]]:
    """Finite-difference rows for the m-th derivative at every node of a uniform grid."""
    width = order + m - (1 if (order + m) % 2 == 0 else 0)
    width = max(width, m + 1)
    if width % 2 == 0:
        width += 1
    if n < width:
        raise InsufficientSamples(
            f"{n} samples cannot support an order-{order} stencil for derivative {m}"
        )
    half = width // 2
    rows = []
    for i in range(n):
        start = min(max(i - half, 0), n - width)
        pos = i - start
        coeffs = savgol_coeffs(width, width - 1, deriv=m, delta=h, pos=pos, use="dot")
        rows.append((slice(start, start + width), coeffs))
    return rows


def _product_trapezoid_weights(n: int, gam: float) -> np.ndarray:
    """Weights a_j with int_0^{t_n} (t_n - s)^(gam-1) g(s) ds = h^gam/Gamma(gam+2)*sum a_j g_j
    times Gamma(gam), exact for piecewise-linear g."""
    j = np.arange(n + 1, dtype=float)
    a = np.empty(n + 1)
    if n == 0:
        return np.zeros(1)
    a[0] = (n - 1) ** (gam + 1) - (n - 1 - gam) * n**gam
    r = n - j[1:n]
    a[1:n] = (r + 1) ** (gam + 1) - 2 * r ** (gam + 1) + (r - 1) ** (gam + 1)
    a[n] = 1.0
    return a


def rl_integral_samples(
    values, dt: float, nu: float, *, exponents: tuple[float, ...] = ()
) -> np.ndarray:
    """RL integral of order ``nu`` at every node ``t_j = j*dt`` (time on axis 0).

    Product-trapezoid weights, optionally with starting weights that make the
    rule exact for the powers ``t**sigma`` listed in ``exponents`` (useful when
    the samples behave like ``t**beta`` near the origin).
    """
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    sig = [e for e in exponents if e > 0 and abs(e - round(e)) > 1e-12][: max(0, n - 1)]
    q = len(sig)
    out = np.zeros(values.shape)
    scale = 1.0 / gamma(nu + 2)
    j = np.arange(n, dtype=float)
    for i in range(1, n):
        w = scale * _product_trapezoid_weights(i, nu)
        if q:
            # exactness for sigma in exponents, in units where dt = 1
            base = np.array([np.dot(w, j[: i + 1] ** e) for e in sig])
            exact = np.array([gamma(e + 1) / gamma(e + 1 + nu) * i ** (e + nu) for e in sig])
            vand = np.array([[(r + 1.0) ** e for r in range(q)] for e in sig])
            full = np.zeros(max(i, q) + 1)
            full[: i + 1] = w
            full[1 : q + 1] += np.linalg.solve(vand, exact - base)
            w = full
        out[i] = np.tensordot(w, values[: w.size], axes=(0, 0))
    return out * dt**nu


def caputo_derivative_samples(
    values,
    dt: float,
    alpha: float,
    *,
    fd_order: int = 4,
    form: str = "fd",
    exponents: tuple[float, ...] = (),
    slope=None,
) -> np.ndarray:
    """Caputo derivative at every node of a uniform grid ``t_j = j*dt``, ``t_0 = 0``.

    ``values`` may carry extra trailing axes (e.g. space); time is axis 0.
    The first entry is returned as NaN (the derivative is not formed at t=0).

    ``form="fd"`` differences first and integrates the weakly singular
    kernel with product-trapezoid weights.  ``form="rl"`` differentiates
    ``I^(m-alpha)[f - f(0) - f'(0) t]`` ``m`` times instead, with the optional
    starting-weight ``exponents`` of :func:`rl_integral_samples`; for
    ``1 < alpha < 2`` the initial derivative must be passed as ``slope``.
    """
    if not 0 < alpha <= 2:
        raise InvalidParams(f"Caputo order must lie in (0, 2], got {alpha}")
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    m = math.ceil(alpha)
    out = np.full(values.shape, np.nan)
    if form == "rl" and alpha != m:
        shifted = values - values[0]
        if m == 2:
            if slope is None:
                raise InvalidParams("the RL form of order in (1, 2) needs the initial slope")
            tt = (np.arange(n) * dt).reshape((n,) + (1,) * (values.ndim - 1))
            shifted = shifted - np.asarray(slope, dtype=float) * tt
        integ = rl_integral_samples(shifted, dt, m - alpha, exponents=exponents)
        rows = _fd_matrix_rows(n, fd_order, m, dt)
        deriv = np.stack([np.tensordot(c, integ[sl], axes=(0, 0)) for sl, c in rows])
        out[1:] = deriv[1:]
        return out
    if form not in ("fd", "rl"):
        raise InvalidParams(f"unknown Caputo form {form!r}")
    rows = _fd_matrix_rows(n, fd_order, m, dt)
    deriv = np.stack([np.tensordot(c, values[sl], axes=(0, 0)) for sl, c in rows])
    if alpha == m:
        out[1:] = deriv[1:]
        return out
    gam = m - alpha
    scale = dt**gam / gamma(gam + 2)
    for i in range(1, n):
        a = _product_trapezoid_weights(i, gam)
        out[i] = scale * np.tensordot(a, deriv[: i + 1], axes=(0, 0))
    return out


def _sample(f, t: float, num_points: int) -> tuple[np.ndarray, float]:
    if callable(f):
        grid = np.linspace(0.0, t, num_points)
        return np.asarray([f(s) for s in grid], dtype=float), grid[1] - grid[0]
    vals = np.asarray(f, dtype=float)
    if vals.ndim != 1 or vals.size < 2:
        raise InsufficientSamples("samples must be a 1-D array on a uniform grid over [0, t]")
    return vals, t / (vals.size - 1)


def caputo_derivative_quadrature(
    f, alpha: float, t: float, *, num_points: int = 401, fd_order: int = 4
) -> float:
    """Caputo derivative of order ``alpha`` at time ``t``.

    ``f`` is a callable or samples on the uniform grid ``linspace(0, t, n)``.
    The m-th derivative is formed by finite differences and integrated
    against the weakly singular kernel with product-trapezoid weights.
    """
    if t <= 0:
        raise InvalidParams("Caputo derivative needs t > 0")
    vals, dt = _sample(f, t, num_points)
    return float(caputo_derivative_samples(vals, dt, alpha, fd_order=fd_order)[-1])


def rl_integral_quadrature(f, nu: float, t: float, *, num_points: int = 401) -> float:
    """Riemann-Liouville integral ``(1/Gamma(nu)) int_0^t (t-u)^(nu-1) f(u) du``.

    Callables go through QUADPACK's algebraic-weight rule (the endpoint
    singularity is part of the weight); samples use product-trapezoid weights.
    """
    if nu <= 0:
        raise InvalidParams(f"RL integral order must be positive, got {nu}")
    if t <= 0:
        raise InvalidParams("RL integral needs t > 0")
    if callable(f):
        if nu == 1:
            val, err, *info = integrate.quad(f, 0.0, t, limit=200, full_output=1, epsabs=1e-13, epsrel=1e-12)
        else:
            val, err, *info = integrate.quad(
                f, 0.0, t, weight="alg", wvar=(0.0, nu - 1.0), limit=200, full_output=1
            )
        _check_quad((val, err, *info), "Riemann-Liouville integral")
        return val / gamma(nu)
    vals, dt = _sample(f, t, num_points)
    n = vals.size - 1
    if nu >= 1:
        # smooth kernel: plain trapezoid on kernel * f
        s = np.linspace(0.0, t, n + 1)
        return float(np.trapezoid((t - s) ** (nu - 1) * vals, s) / gamma(nu))
    a = _product_trapezoid_weights(n, nu)
    return float(dt**nu / gamma(nu + 2) * np.dot(a, vals))
