"""Independent reference computations used by the verification suites.

None of these share code paths with the evaluators they check: Fourier
inversions use scipy's QAWF oscillatory quadrature on the real axis, Laplace
inversions use mpmath, and the elementary H-functions are built from their
closed forms.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate
from scipy.special import erfcx

from .errors import OracleFailure
from .hfunction import HFunctionSpec, h_scale


def fourier_inverse_qawf(multiplier, x: float, *, limlst: int = 200) -> float:
    """``(1/2pi) int M(k) exp(-ikx) dk`` for a conjugate-symmetric ``M`` and ``x != 0``.

    ``multiplier`` maps a float ``k > 0`` to a complex number.
    """
    if x == 0:
        raise OracleFailure("the oscillatory oracle needs x != 0")
    w = abs(x)
    sgn = 1.0 if x > 0 else -1.0

    def re(k):
        return complex(multiplier(k)).real

    def im(k):
        return complex(multiplier(k)).imag

    c, _, *info_c = integrate.quad(re, 0, np.inf, weight="cos", wvar=w, limlst=limlst, full_output=1)
    s, _, *info_s = integrate.quad(im, 0, np.inf, weight="sin", wvar=w, limlst=limlst, full_output=1)
    if len(info_c) > 1 or len(info_s) > 1:
        raise OracleFailure(f"oscillatory quadrature did not converge at x={x}")
    return (c + sgn * s) / math.pi


def cauchy_oracle(x, scale: float) -> np.ndarray:
    """Cauchy density of the given scale by oscillatory quadrature of ``exp(-scale |k|)``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty(x.shape)
    for i, xi in enumerate(x):
        if xi == 0:
            out[i] = 1.0 / (math.pi * scale)
            continue
        val, _ = integrate.quad(lambda k: math.exp(-scale * k), 0, np.inf, weight="cos", wvar=abs(xi))
        out[i] = val / math.pi
    return out


def cauchy_closed(x, scale: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return 1.0 / (math.pi * scale * (1.0 + (x / scale) ** 2))


def ml_half_oracle(x) -> np.ndarray:
    """``E_{1/2}(-x) = exp(x^2) erfc(x)`` via the scaled complementary error function."""
    return erfcx(np.asarray(x, dtype=float))


def elementary_h_corpus() -> list[tuple[str, HFunctionSpec, float, float]]:
    """``(label, spec, rho, mu)`` tuples whose H-functions are elementary.

    The exponents are chosen so that the cosine transform converges.
    """
    exp_ = HFunctionSpec(1, 0, [], [(0.0, 1.0)])
    xexp = HFunctionSpec(1, 0, [], [(0.5, 1.0)])
    # (1 + x)^-1.5; integer exponents would give double poles after transforming
    rational = HFunctionSpec(1, 1, [(-0.5, 1.0)], [(0.0, 1.0)], prefactor=1.0 / math.gamma(1.5))
    gauss = h_scale(exp_, 2.0)  # exp(-x^2)
    return [
        ("exp(-t)", exp_, 1.0, 1.0),
        ("exp(-t^2)", exp_, 1.0, 2.0),
        ("t^0.5 exp(-t)", xexp, 1.0, 1.0),
        ("sqrt(t) exp(-t)", exp_, 1.5, 1.0),
        ("(1+t)^-1.5", rational, 0.7, 1.0),
        ("exp(-t^2) via scaled spec", gauss, 1.0, 1.0),
    ]


def random_h_spec(rng: np.random.Generator) -> HFunctionSpec:
    """Random spec with a convergent residue series (Omega > 0, non-neutral)."""
    while True:
        m = int(rng.integers(1, 3))
        n = int(rng.integers(0, 2))
        p = n + int(rng.integers(0, 2))
        q = m + int(rng.integers(0, 2))
        upper = [(float(rng.uniform(0.0, 0.9)), float(rng.uniform(0.4, 1.2))) for _ in range(p)]
        lower = [(float(rng.uniform(0.05, 1.0)), float(rng.uniform(0.4, 1.2))) for _ in range(q)]
        spec = HFunctionSpec(m, n, upper, lower)
        if spec.omega > 0.2 and abs(spec.mu) > 0.2:
            return spec
