"""Fox H-functions of positive real argument.

The convention is

    H(x) = 1/(2 pi i) int_L  prod_{j<=m} G(b_j + B_j s) prod_{j<=n} G(1 - a_j - A_j s)
                            / [prod_{j>m} G(1 - b_j - B_j s) prod_{j>n} G(a_j + A_j s)]
                            x^(-s) ds

with ``L`` separating the poles of the first product (left) from those of
the second (right).  Evaluation sums residues: left poles when
``mu = sum B - sum A > 0`` (ascending powers of x), right poles when
``mu < 0``.  Pole orders are counted over *all* gamma factors, so poles
cancelled by denominator gammas drop out exactly.  When a series cannot
reach the tolerance (slow convergence or cancellation), the contour
integral itself is evaluated on a vertical line through the saddle of the
integrand.
"""

from __future__ import annotations

import contextlib
import contextvars
import heapq
import math
import re
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import integrate, optimize
from scipy.special import gammaln, gammasgn, loggamma

from .errors import InvalidParams, NonConvergent, PoleCollision, QuadratureFailure

__all__ = [
    "HConfig",
    "HFunctionSpec",
    "h_eval",
    "h_tolerance",
    "h_scale",
    "h_series",
    "h_contour_integral",
    "cosine_transform_spec",
    "format_spec",
    "parse_spec",
    "verify_cosine_transform",
    "space_time_spec",
]

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class HConfig:
    tol: float = 1e-12
    max_terms: int = 5000
    patience: int = 20
    collision_tol: float = 1e-8

    def __post_init__(self) -> None:
        if not (4 * np.finfo(float).eps < self.tol < 1):
            raise InvalidParams(f"tolerance must lie in (4*eps, 1), got {self.tol}")


DEFAULT_CONFIG = HConfig()
_ACTIVE = contextvars.ContextVar("h_config", default=DEFAULT_CONFIG)


@contextlib.contextmanager
def h_tolerance(tol: float):
    """Context-local override of the absolute tolerance used by default."""
    if not (tol > 0):
        raise InvalidParams(f"tolerance must be positive, got {tol}")
    token = _ACTIVE.set(replace(_ACTIVE.get(), tol=float(tol)))
    try:
        yield
    finally:
        _ACTIVE.reset(token)


def _pairs(rows) -> tuple[tuple[float, float], ...]:
    return tuple((float(a), float(b)) for a, b in rows)


@dataclass(frozen=True)
class HFunctionSpec:
    """Orders and parameter rows of ``prefactor * H^{m,n}_{p,q}``.

    ``prefactor`` defaults to one; it lets the scaling identity return a
    single object that evaluates to the rescaled function.
    """

    m: int
    n: int
    upper: tuple[tuple[float, float], ...] = ()
    lower: tuple[tuple[float, float], ...] = ()
    prefactor: float = 1.0
    omega: float = field(init=False, repr=False, compare=False)
    mu: float = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "upper", _pairs(self.upper))
        object.__setattr__(self, "lower", _pairs(self.lower))
        p, q = len(self.upper), len(self.lower)
        if not (0 <= self.m <= q and 0 <= self.n <= p):
            raise InvalidParams(f"orders need 0 <= m <= q and 0 <= n <= p (m={self.m}, n={self.n}, p={p}, q={q})")
        if any(not (A > 0) for _, A in self.upper) or any(not (B > 0) for _, B in self.lower):
            raise InvalidParams("all A_j and B_j must be positive")
        if not all(np.isfinite(v) for row in self.upper + self.lower for v in row):
            raise InvalidParams("H-function parameters must be finite")
        Bs = [B for _, B in self.lower]
        As = [A for _, A in self.upper]
        omega = sum(Bs[: self.m]) - sum(Bs[self.m :]) + sum(As[: self.n]) - sum(As[self.n :])
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "mu", sum(Bs) - sum(As))

    @property
    def p(self) -> int:
        return len(self.upper)

    @property
    def q(self) -> int:
        return len(self.lower)

    @property
    def radius(self) -> float:
        """Convergence radius of the series when ``mu == 0``."""
        logr = -sum(A * math.log(A) for _, A in self.upper) + sum(B * math.log(B) for _, B in self.lower)
        return math.exp(logr)

    def _factors(self):
        """``(c0, C, +1 numerator / -1 denominator)``; argument is ``c0 + C s``."""
        out = []
        for j, (b, B) in enumerate(self.lower):
            out.append((b, B, 1) if j < self.m else (1.0 - b, -B, -1))
        for j, (a, A) in enumerate(self.upper):
            out.append((1.0 - a, -A, 1) if j < self.n else (a, A, -1))
        return out

    def __str__(self) -> str:
        return format_spec(self)

    @classmethod
    def parse(cls, text: str) -> "HFunctionSpec":
        return parse_spec(text)


def _fmt(v: float) -> str:
    return format(v, ".17g")


def format_spec(spec: HFunctionSpec) -> str:
    """Text form ``[c*]H[m,n,p,q; a1:A1,a2:A2; b1:B1]`` (round-trips exactly)."""
    up = ",".join(f"{_fmt(a)}:{_fmt(A)}" for a, A in spec.upper)
    lo = ",".join(f"{_fmt(b)}:{_fmt(B)}" for b, B in spec.lower)
    head = "" if spec.prefactor == 1.0 else f"{_fmt(spec.prefactor)}*"
    return f"{head}H[{spec.m},{spec.n},{spec.p},{spec.q}; {up}; {lo}]"


_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_SPEC_RE = re.compile(
    rf"^\s*(?:(?P<c>{_NUM})\s*\*\s*)?H\[\s*(?P<orders>[^;\]]*);(?P<up>[^;\]]*);(?P<lo>[^;\]]*)\]\s*$"
)


def _parse_rows(text: str) -> list[tuple[float, float]]:
    text = text.strip()
    if not text or text == "-":
        return []
    rows = []
    for item in text.split(","):
        parts = item.split(":")
        if len(parts) != 2:
            raise InvalidParams(f"malformed parameter pair {item.strip()!r}; expected a:A")
        try:
            rows.append((float(parts[0]), float(parts[1])))
        except ValueError as exc:
            raise InvalidParams(f"malformed number in {item.strip()!r}") from exc
    return rows


def parse_spec(text: str) -> HFunctionSpec:
    match = _SPEC_RE.match(text)
    if match is None:
        raise InvalidParams(f"cannot parse H-function spec {text!r}")
    try:
        orders = [int(v) for v in match["orders"].split(",")]
    except ValueError as exc:
        raise InvalidParams(f"orders must be integers in {text!r}") from exc
    if len(orders) != 4:
        raise InvalidParams("expected four orders m,n,p,q")
    m, n, p, q = orders
    up, lo = _parse_rows(match["up"]), _parse_rows(match["lo"])
    if len(up) != p or len(lo) != q:
        raise InvalidParams(f"row lengths ({len(up)}, {len(lo)}) do not match p={p}, q={q}")
    c = float(match["c"]) if match["c"] else 1.0
    return HFunctionSpec(m, n, up, lo, prefactor=c)


def h_scale(spec: HFunctionSpec, delta: float) -> HFunctionSpec:
    """Spec ``S`` with ``h_eval(S, x) == h_eval(spec, x**delta)``.

    ``A_j, B_j`` are divided by ``delta`` and the prefactor picks up ``1/delta``.
    """
    if not (np.isfinite(delta) and delta > 0):
        raise InvalidParams(f"scaling exponent must be positive, got {delta}")
    return replace(
        spec,
        upper=[(a, A / delta) for a, A in spec.upper],
        lower=[(b, B / delta) for b, B in spec.lower],
        prefactor=spec.prefactor / delta,
    )


def _pole_families(spec: HFunctionSpec, side: str):
    """Yield ``(start, step)``: poles at ``start + k*step`` (signed along the sweep)."""
    if side == "left":
        return [(-b / B, -1.0 / B) for b, B in spec.lower[: spec.m]]
    return [((1.0 - a) / A, 1.0 / A) for a, A in spec.upper[: spec.n]]


def _residue(spec: HFunctionSpec, s0: float, logx: float, ctol: float):
    """``(residue, log_scale)`` of the integrand times ``x**(-s)`` at ``s0``.

    The residue is None if ``s0`` is regular.  ``log_scale`` sums the moduli of
    the log terms; times eps it bounds the relative rounding of the residue.
    """
    order = 0
    logmag = -s0 * logx
    log_scale = abs(logmag)
    sign = 1.0
    for c0, C, role in spec._factors():
        arg = c0 + C * s0
        k = round(arg)
        if k <= 0 and abs(arg - k) <= ctol * max(1.0, abs(arg)):
            # Gamma(-k + C eps) ~ (-1)^k / (k! C eps)
            lm = -gammaln(-k + 1.0) - math.log(abs(C))
            sg = (-1.0) ** (-k) * math.copysign(1.0, C)
            order += role
        else:
            lm = float(gammaln(arg))
            sg = float(gammasgn(arg))
        logmag += role * lm
        log_scale += abs(lm)
        sign *= sg
    if order >= 2:
        raise PoleCollision(f"pole of order {order} at s={s0 + 0.0:.12g}; the logarithmic case is not supported")
    if order <= 0:
        return None, log_scale
    return (sign * math.exp(logmag) if logmag < 709.0 else sign * math.inf), log_scale


def h_series(spec: HFunctionSpec, x: float, side: str, config: HConfig | None = None):
    """Residue sum over ``side`` in {'left', 'right'}.

    Returns ``(value, rounding)`` where ``rounding`` estimates the absolute
    floating-point error of the sum.  Raises NonConvergent when the term
    budget runs out.
    """
    config = config or _ACTIVE.get()
    logx = math.log(x)
    fams = _pole_families(spec, side)
    if not fams:
        return 0.0, 0.0
    orient = 1.0 if side == "left" else -1.0
    key = (lambda s: -s) if side == "left" else (lambda s: s)
    heap = [(key(start), start, step, 0, i) for i, (start, step) in enumerate(fams)]
    heapq.heapify(heap)
    total = 0.0
    rounding = 0.0
    run_max = 0.0
    quiet = 0
    for _ in range(config.max_terms):
        _, s0, step, k, i = heapq.heappop(heap)
        heapq.heappush(heap, (key(s0 + step), s0 + step, step, k + 1, i))
        # absorb coincident poles of other families into this point
        while heap and abs(heap[0][1] - s0) <= config.collision_tol * max(1.0, abs(s0)):
            _, s1, st1, k1, i1 = heapq.heappop(heap)
            heapq.heappush(heap, (key(s1 + st1), s1 + st1, st1, k1 + 1, i1))
        res, log_scale = _residue(spec, s0, logx, config.collision_tol)
        term = 0.0 if res is None else orient * res
        if not math.isfinite(term):
            raise NonConvergent(f"residue overflow at s={s0:.6g} for x={x:.6g}")
        total += term
        rounding += abs(term) * _EPS * (log_scale + 4.0)
        run_max = max(run_max, abs(total))
        if abs(term) <= config.tol * run_max or (term == 0.0 and run_max == 0.0):
            quiet += 1
            if quiet >= config.patience:
                return total, rounding + 4.0 * _EPS * run_max
        else:
            quiet = 0
    raise NonConvergent(f"H-function series did not settle in {config.max_terms} terms at x={x:.6g}")


def _log_integrand(spec: HFunctionSpec, s):
    val = 0.0
    for c0, C, role in spec._factors():
        val = val + role * loggamma(c0 + C * s)
    return val


def _strip(spec: HFunctionSpec) -> tuple[float, float]:
    left = max((-b / B for b, B in spec.lower[: spec.m]), default=-math.inf)
    right = min(((1.0 - a) / A for a, A in spec.upper[: spec.n]), default=math.inf)
    return left, right


def h_contour_integral(spec: HFunctionSpec, x: float, config: HConfig | None = None) -> float:
    """Direct quadrature of the Mellin-Barnes integral on ``Re s = c``.

    ``c`` minimises ``|integrand|`` on the real axis inside the separating
    strip, which keeps rounding proportional to the size of the result.
    """
    config = config or _ACTIVE.get()
    lo, hi = _strip(spec)
    if not lo < hi:
        raise InvalidParams("left and right pole sets overlap; no separating contour")
    logx = math.log(x)
    width = hi - lo
    pad = 0.02 * width if math.isfinite(width) else 0.02
    a = lo + pad if math.isfinite(lo) else (hi - pad) - 60.0 - abs(logx) * 4
    b = hi - pad if math.isfinite(hi) else (lo + pad) + 60.0 + abs(logx) * 4

    def phi(c):
        return float(np.real(_log_integrand(spec, c + 0j))) - c * logx

    c = optimize.minimize_scalar(phi, bounds=(a, b), method="bounded", options={"xatol": 1e-6}).x
    scale = math.exp(phi(c))

    def f(y):
        s = c + 1j * y
        return float(np.real(np.exp(_log_integrand(spec, s) - s * logx))) / math.pi

    floor = 1e-3 * config.tol
    ymax = 4.0
    while abs(np.exp(np.real(_log_integrand(spec, c + 1j * ymax)) - c * logx)) > floor:
        ymax *= 1.5
        if ymax > 1e4:
            raise NonConvergent("Mellin-Barnes integrand does not decay; contour integral unavailable")
    edges = np.linspace(0.0, ymax, int(math.ceil(ymax / 2.0)) + 1)
    total, err = 0.0, 0.0
    for y0, y1 in zip(edges[:-1], edges[1:]):
        v, e, *_ = integrate.quad(f, y0, y1, epsabs=floor, epsrel=1e-13, limit=200, full_output=1)
        total += v
        err += e
    err += 50 * _EPS * scale * ymax
    if err > 100 * config.tol * max(1.0, abs(total)):
        raise NonConvergent(f"Mellin-Barnes quadrature error {err:.2e} exceeds tolerance at x={x:.6g}")
    return total


def h_eval(spec: HFunctionSpec, x, config: HConfig | None = None):
    """Evaluate ``spec`` at real ``x > 0`` (scalar or array)."""
    config = config or _ACTIVE.get()
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)) or not np.all(np.isfinite(arr)):
        raise InvalidParams("H-function argument must be finite and positive")
    out = np.array([_h_scalar(spec, float(v), config) for v in arr.ravel()]).reshape(arr.shape)
    return float(out) if arr.ndim == 0 else out


def _h_scalar(spec: HFunctionSpec, x: float, config: HConfig) -> float:
    mu = spec.mu
    if abs(mu) > 1e-12:
        side = "left" if mu > 0 else "right"
    else:
        side = "left" if x < spec.radius else "right"
    try:
        val, rounding = h_series(spec, x, side, config)
        if rounding <= config.tol * max(1.0, abs(val)):
            return spec.prefactor * val
    except NonConvergent:
        pass
    return spec.prefactor * h_contour_integral(spec, x, config)


def cosine_transform_spec(spec: HFunctionSpec, rho: float, mu: float, a: float, k: float) -> HFunctionSpec:
    """Spec ``T`` with ``int_0^inf t^(rho-1) cos(kt) H[a t^mu] dt = h_eval(T, k^mu/a)``."""
    if not (k > 0 and a > 0 and mu > 0):
        raise InvalidParams("cosine transform needs k > 0, a > 0 and mu > 0")
    half = ((1.0 + rho) / 2.0, mu / 2.0)
    upper = [(1.0 - b, B) for b, B in spec.lower] + [half]
    lower = [(rho, mu)] + [(1.0 - a_, A) for a_, A in spec.upper] + [half]
    return HFunctionSpec(spec.n + 1, spec.m, upper, lower, prefactor=spec.prefactor * math.pi / k**rho)


def _check_cosine_conditions(spec: HFunctionSpec, rho: float, mu: float) -> None:
    if spec.m and not rho + mu * min(b / B for b, B in spec.lower[: spec.m]) > 0:
        raise InvalidParams("cosine transform needs rho + mu*min(b_j/B_j) > 0")
    if spec.n and not rho + mu * max((a - 1) / A for a, A in spec.upper[: spec.n]) < 0:
        raise InvalidParams("cosine transform needs rho + mu*max((a_j-1)/A_j) < 0")
    if not spec.omega > 0:
        raise InvalidParams(f"cosine transform needs Omega > 0, got {spec.omega}")


def verify_cosine_transform(
    spec: HFunctionSpec, rho: float, mu: float, a: float, k: float, config: HConfig | None = None
) -> float:
    """|oscillatory quadrature of the transform - H-function of the transformed spec|."""
    config = config or _ACTIVE.get()
    _check_cosine_conditions(spec, rho, mu)

    def g(t):
        if t == 0.0:
            return 0.0 if rho > 1 else float(h_eval(spec, a * 1e-300**mu) * 1e-300 ** (rho - 1))
        return t ** (rho - 1) * h_eval(spec, a * t**mu, config)

    head, e1, *info1 = integrate.quad(g, 0.0, 1.0, weight="cos", wvar=k, limit=200, full_output=1)
    tail, e2, *info2 = integrate.quad(g, 1.0, np.inf, weight="cos", wvar=k, limit=200, full_output=1)
    if len(info1) > 1 or len(info2) > 1:
        raise QuadratureFailure("oscillatory quadrature of the cosine transform did not converge")
    rhs = h_eval(cosine_transform_spec(spec, rho, mu, a, k), k**mu / a, config)
    return abs(head + tail - rhs)


def space_time_spec(alpha: float, theta: float, beta: float, gamma: float = 1.0) -> HFunctionSpec:
    """H^{2,1}_{3,3} whose ``(1/(alpha x)) H(x/(eta t^beta)^(1/alpha))`` is the
    inverse Fourier transform of ``E_{beta,gamma}(-eta t^beta Psi(k))`` for ``x > 0``.
    """
    if not alpha > 0:
        raise InvalidParams("alpha must be positive")
    rho = (alpha - theta) / (2.0 * alpha)
    upper = [(1.0, 1.0 / alpha), (gamma, beta / alpha), (1.0, rho)]
    lower = [(1.0, 1.0 / alpha), (1.0, 1.0), (1.0, rho)]
    return HFunctionSpec(2, 1, upper, lower)
