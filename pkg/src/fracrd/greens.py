"""Green's functions of the space-time fractional diffusion equation.

The kernel ``G_gamma(x, t)`` is the inverse Fourier transform of
``E_{beta,gamma}(-eta t**beta psi(k))``.  Two independent inversions are
provided:

* ``"dft"``: the periodic discrete transform on a :class:`SpatialGrid`.  It
  returns the periodised kernel, so the trapezoid mass equals the zero mode
  exactly.
* ``"quadrature"``: the Fourier integral for each ``x`` separately, taken
  along a ray rotated into the lower half plane where ``exp(-ikx)`` decays.
  This gives the kernel itself (no periodisation) and is the pointwise
  reference.

The closed forms (Gaussian, neutral, stable, time-fractional) live here too,
evaluated through elementary functions or H-function series.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import mpmath
import numpy as np
from scipy.special import roots_legendre

from .errors import GridTooCoarse, IllPosed, InvalidParams, NonConvergent, PoleCollision
from .hfunction import HFunctionSpec, h_contour_integral, h_eval, space_time_spec
from .mittag_leffler import MLParams, ml_eval
from .riesz_feller import RieszFellerParams, TemporalParams, fourier_wavenumbers, symbol

__all__ = [
    "DensityProfile",
    "SpatialGrid",
    "check_growth",
    "default_grid",
    "edge_point_mass",
    "fundamental_solution",
    "gaussian_density",
    "green_pointwise",
    "green_spectral",
    "kernel_multiplier",
    "levy_density",
    "neutral_density",
    "space_time_density",
    "time_fractional_density",
]

METHODS = ("spectral", "closed_form", "hfunction")
_DECAY_TOL = 1e-12


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform periodic grid on ``[x_min, x_max)``; ``x = 0`` is a node when symmetric."""

    x_max: float
    num_points: int = 4096
    x_min: float | None = None

    def __post_init__(self) -> None:
        if self.x_min is None:
            object.__setattr__(self, "x_min", -float(self.x_max))
        n = self.num_points
        if n < 16 or n & (n - 1):
            raise InvalidParams(f"num_points must be a power of two >= 16, got {n}")
        if not (self.x_min < 0 < self.x_max):
            raise InvalidParams("grid must satisfy x_min < 0 < x_max")

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def spacing(self) -> float:
        return self.length / self.num_points

    @property
    def points(self) -> np.ndarray:
        return self.x_min + self.spacing * np.arange(self.num_points)

    @property
    def symmetric(self) -> bool:
        return self.x_min == -self.x_max

    @property
    def wavenumbers(self) -> np.ndarray:
        return fourier_wavenumbers(self.num_points, self.spacing)

    def origin_index(self) -> int | None:
        j = int(round(-self.x_min / self.spacing))
        return j if abs(self.x_min + j * self.spacing) < 1e-12 * self.spacing else None


def similarity_scale(alpha: float, beta: float, eta: float, t: float) -> float:
    """``(eta t**beta)**(1/alpha)``, the natural length at time ``t``."""
    return (eta * t**beta) ** (1.0 / alpha)


def default_grid(rf: RieszFellerParams, tp: TemporalParams, t: float, num_points: int = 4096) -> SpatialGrid:
    return SpatialGrid(40.0 * similarity_scale(rf.alpha, tp.beta, tp.eta, t), num_points)


@dataclass
class DensityProfile:
    grid: SpatialGrid
    values: np.ndarray
    time: float
    params: dict
    method: str
    notes: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.num_points,):
            raise InvalidParams("profile values must match the grid")
        if not np.all(np.isfinite(self.values)):
            raise NonConvergent("profile contains non-finite values")
        if self.method not in METHODS:
            raise InvalidParams(f"unknown method {self.method!r}")

    @property
    def x(self) -> np.ndarray:
        return self.grid.points

    @property
    def mass(self) -> float:
        # periodic trapezoid rule
        return float(np.sum(self.values) * self.grid.spacing)

    def metadata(self) -> dict:
        meta = {"time": self.time}
        for key in ("alpha", "theta", "beta", "eta", "gamma"):
            if key in self.params:
                meta[key] = self.params[key]
        meta["method"] = self.method
        meta["mass"] = self.mass
        meta.update(x_min=self.grid.x_min, x_max=self.grid.x_max, num_points=self.grid.num_points)
        meta.update(self.notes)
        return meta

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        for key, val in self.metadata().items():
            buf.write(f"# {key}={_fmt(val)}\n")
        buf.write("x,value\n")
        for xv, v in zip(self.x, self.values):
            buf.write(f"{_fmt(xv)},{_fmt(v)}\n")
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, source) -> "DensityProfile":
        text = Path(source).read_text() if not isinstance(source, str) or "\n" not in source else source
        meta, rows = {}, []
        for line in text.splitlines():
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition("=")
                meta[key.strip()] = val.strip()
            elif line and line != "x,value":
                rows.append([float(v) for v in line.split(",")])
        data = np.array(rows)
        grid = SpatialGrid(float(meta["x_max"]), int(meta["num_points"]), float(meta["x_min"]))
        params = {k: float(meta[k]) for k in ("alpha", "theta", "beta", "eta", "gamma") if k in meta}
        known = {"time", "method", "mass", "x_min", "x_max", "num_points", *params}
        notes = {k: v for k, v in meta.items() if k not in known}
        return cls(grid, data[:, 1], float(meta["time"]), params, meta["method"], notes)


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(v).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _validate(rf: RieszFellerParams, tp: TemporalParams, t: float, gamma: float) -> None:
    if not (np.isfinite(t) and t > 0):
        raise InvalidParams(f"time must be positive, got {t}")
    if not gamma > 0:
        raise InvalidParams(f"gamma must be positive, got {gamma}")
    check_growth(rf, tp)


def check_growth(rf: RieszFellerParams, tp: TemporalParams) -> None:
    """For ``beta > 1`` the multiplier stays bounded only when ``|theta| <= 2 - beta``."""
    if tp.beta > 1 and abs(rf.theta) > 2 - tp.beta + 1e-14:
        raise IllPosed(
            f"|theta| <= 2-beta violated for beta > 1 (theta={rf.theta}, beta={tp.beta}); "
            "the Fourier multiplier would grow exponentially"
        )


def kernel_multiplier(rf: RieszFellerParams, tp: TemporalParams, gamma: float, t: float, k) -> np.ndarray:
    """``E_{beta,gamma}(-eta t**beta psi(k))``."""
    z = -tp.eta * t**tp.beta * np.asarray(symbol(rf, k))
    return ml_eval(MLParams(tp.beta, gamma), z)


def _fejer(num_points: int) -> np.ndarray:
    half = num_points // 2
    n = np.abs(np.fft.fftfreq(num_points, d=1.0 / num_points))
    return np.clip(1.0 - n / half, 0.0, None)


def green_spectral(
    rf: RieszFellerParams,
    tp: TemporalParams,
    gamma: float,
    t: float,
    grid: SpatialGrid | None = None,
    *,
    inversion: str = "dft",
    window: str | None = None,
) -> DensityProfile:
    """Kernel ``G_gamma(., t)`` on ``grid`` by spectral inversion.

    With ``inversion="dft"`` an unresolved multiplier (above 1e-12 at the
    Nyquist wavenumber) raises :class:`GridTooCoarse` unless
    ``window="fejer"`` is requested, which returns the periodised kernel
    averaged against the (positive) Fejer kernel.  Mass, symmetry and
    positivity survive that averaging; pointwise accuracy near cusps does not.
    """
    _validate(rf, tp, t, gamma)
    grid = grid or default_grid(rf, tp, t)
    params = dict(alpha=rf.alpha, theta=rf.theta, beta=tp.beta, eta=tp.eta, gamma=gamma)
    notes = {"inversion": inversion}
    if inversion == "quadrature":
        values = green_pointwise(rf, tp, gamma, t, grid.points)
        return DensityProfile(grid, values, t, params, "spectral", notes)
    if inversion != "dft":
        raise InvalidParams(f"unknown inversion {inversion!r}")
    k = grid.wavenumbers
    mult = np.asarray(kernel_multiplier(rf, tp, gamma, t, k))
    nyq = grid.num_points // 2
    mult[nyq] = mult[nyq].real
    scale = max(1.0, abs(mult[0]))
    if abs(mult[nyq]) > _DECAY_TOL * scale:
        if window != "fejer":
            raise GridTooCoarse(
                f"multiplier is {abs(mult[nyq]):.2e} at the Nyquist wavenumber; refine the grid "
                "or request window='fejer'"
            )
        mult = mult * _fejer(grid.num_points)
        notes["window"] = "fejer"
    phase = np.exp(-1j * k * grid.x_min)
    vals = np.fft.fft(mult * phase) / grid.length
    if np.max(np.abs(vals.imag)) > 1e-10 * max(1.0, np.max(np.abs(vals.real))):
        raise NonConvergent("spectral inversion left a non-negligible imaginary part")
    return DensityProfile(grid, vals.real, t, params, "spectral", notes)


class _NoRotation(Exception):
    pass


_GL_X, _GL_W = roots_legendre(16)


def _ray_nodes(per_octave: int, width: float) -> tuple[np.ndarray, np.ndarray]:
    """Nodes on [0, 44] for integrands ``g(u) exp(-u)`` with a branch point at 0."""
    edges = np.concatenate(([0.0], 2.0 ** np.arange(-50, 1, 1.0 / per_octave), np.arange(2.0, 44.0 + width / 2, width)))
    a, b = edges[:-1], edges[1:]
    u = (0.5 * (b - a)[:, None] * _GL_X + 0.5 * (a + b)[:, None]).ravel()
    w = (0.5 * (b - a)[:, None] * _GL_W).ravel()
    return u, w


# successive refinements; a point is accepted once two consecutive rules agree
_RAY_RULES = tuple(_ray_nodes(2 * 2**j, 1.0 / 2**j) for j in range(5))
_RAY_TOL = 1e-11


def green_pointwise(rf: RieszFellerParams, tp: TemporalParams, gamma: float, t: float, x) -> np.ndarray:
    """Inverse Fourier integral of the multiplier at individual points ``x``.

    For ``x > 0`` the ray ``k = r exp(-i phi)`` is used; the angle is chosen
    so that the Mittag-Leffler argument stays away from its growth sector.
    Negative ``x`` follow from ``G(x; theta) = G(-x; -theta)``.  On the edge
    ``|theta| = 2 - beta`` no rotation exists.  For ``alpha == beta`` and
    ``gamma == 1`` the multiplier then splits into ``exp(i x0 k) / beta`` (a point
    mass at ``x0``) plus a decaying remainder inverted by oscillatory quadrature;
    other edge cases use the H-function form.  At ``x = 0`` the integral is taken
    on the real axis and may be infinite.
    """
    _validate(rf, tp, t, gamma)
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape)
    flat, res = x.ravel(), out.ravel()
    pos, neg, zero = flat > 0, flat < 0, flat == 0
    for mask, th, sgn in ((pos, rf.theta, 1.0), (neg, -rf.theta, -1.0)):
        if not np.any(mask):
            continue
        try:
            res[mask] = _ray_integral(rf.alpha, th, tp, gamma, t, sgn * flat[mask])
        except _NoRotation:
            if abs(rf.alpha - tp.beta) < 1e-12 and gamma == 1:
                res[mask] = _edge_neutral_integral(rf.alpha, th, tp, t, sgn * flat[mask])
            else:
                res[mask] = space_time_density(rf, tp, t, flat[mask], gamma)
    if np.any(zero):
        res[zero] = _origin_value(rf, tp, gamma, t)
    return out


def _ray_integral(alpha, theta, tp, gamma, t, x) -> np.ndarray:
    a_arg = theta * math.pi / 2
    bound = math.pi * (1.0 - tp.beta / 2.0)
    room = a_arg + bound
    if abs(a_arg) > bound + 1e-12:
        raise InvalidParams("multiplier grows along the real axis: |theta| > 2 - beta")
    if room <= 1e-3:
        raise _NoRotation
    phi = min(0.45 * math.pi, 0.7 * room / alpha)
    c = tp.eta * t**tp.beta
    sphi, cphi = math.sin(phi), math.cos(phi)
    rot = np.exp(1j * (a_arg - alpha * phi))
    ml = MLParams(tp.beta, gamma)

    def rule(u, w, xs):
        # k = u / (x sin phi) along the ray, integrand weight exp(-u - i u cot phi)
        kk = u[None, :] / (xs[:, None] * sphi)
        mult = ml_eval(ml, -c * kk**alpha * rot)
        osc = np.exp(-u * (1.0 + 1j * cphi / sphi)) * w
        return ((mult * osc[None, :]).sum(axis=1) * np.exp(-1j * phi) / (xs * sphi)).real / math.pi

    out = rule(*_RAY_RULES[0], x)
    todo = np.arange(x.size)
    for u, w in _RAY_RULES[1:]:
        fine = rule(u, w, x[todo])
        bad = np.abs(fine - out[todo]) > _RAY_TOL * np.maximum(1.0, np.abs(fine))
        out[todo] = fine
        todo = todo[bad]
        if todo.size == 0:
            return out
    for i in todo:
        out[i] = _ray_adaptive(ml, c, alpha, rot, phi, float(x[i]))
    return out


def _ray_adaptive(ml, c, alpha, rot, phi, x) -> float:
    """Adaptive quadrature along the ray for one point (near the edge of the decay sector)."""
    from scipy import integrate

    sphi, cphi = math.sin(phi), math.cos(phi)
    pref = np.exp(-1j * phi) / (x * sphi * math.pi)

    def f(u):
        k = u / (x * sphi)
        return float((ml_eval(ml, complex(-c * k**alpha * rot)) * np.exp(-u * (1.0 + 1j * cphi / sphi)) * pref).real)

    total, err = 0.0, 0.0
    for lo, hi in ((0.0, 1.0), (1.0, 8.0), (8.0, 44.0)):
        v, e, *_ = integrate.quad(f, lo, hi, limit=2000, epsabs=1e-14, epsrel=1e-12, full_output=1)
        total += v
        err += e
    if err > 1e-8 * max(1.0, abs(total)):
        raise NonConvergent(f"ray quadrature error {err:.1e} at x={x:.6g}")
    return total


def edge_point_mass(rf: RieszFellerParams, tp: TemporalParams, t: float) -> tuple[float, float] | None:
    """``(location, weight)`` of the atom carried by the neutral edge case, else ``None``."""
    a, b, th = rf.alpha, tp.beta, rf.theta
    if abs(a - b) > 1e-12 or b <= 1 or abs(abs(th) - (2 - b)) > 1e-12:
        return None
    x0 = (tp.eta * t**b) ** (1 / b)
    # theta = -(2 - beta) puts the atom on the positive side
    return (x0 if th < 0 else -x0), 1.0 / b


def _edge_neutral_integral(alpha, theta, tp, t, x) -> np.ndarray:
    """Real-axis inversion for ``alpha == beta``, ``theta = -(2 - beta)``, ``x > 0``.

    In ``u = k x0`` the remainder ``E_beta(-u^beta e^{i theta pi/2}) - e^{iu}/beta``
    is integrated on graded panels up to ``_EDGE_CUT``; beyond it the remainder's
    asymptotic series is integrated term by term with incomplete gamma functions.
    """
    beta = tp.beta
    x0 = (tp.eta * t**beta) ** (1 / beta)
    y = np.asarray(x, dtype=float) / x0
    rot = complex(np.exp(1j * theta * math.pi / 2))
    ymax = max(float(np.max(np.abs(y))) if y.size else 0.0, 1.0)
    h = min(0.5, 4.0 / ymax)
    edges = np.concatenate(([0.0], 2.0 ** np.arange(-40, 0), np.arange(1.0, _EDGE_CUT + h / 2, h)))
    a, b = edges[:-1], edges[1:]
    u = (0.5 * (b - a)[:, None] * _GL_X + 0.5 * (a + b)[:, None]).ravel()
    w = (0.5 * (b - a)[:, None] * _GL_W).ravel()
    rem = ml_eval(MLParams(beta, 1.0), -(u**beta) * rot + 0j) - np.exp(1j * u) / beta
    body = (np.exp(-1j * np.outer(y, u)) * (rem * w)).sum(axis=1)
    tail = np.zeros(y.shape, dtype=complex)
    cut = mpmath.mpf(_EDGE_CUT)
    for n in range(1, 12):
        coef = -complex((-rot) ** (-n)) * float(mpmath.rgamma(1 - beta * n))
        if coef == 0:
            continue
        s_n = beta * n
        for i, yi in enumerate(y):
            if yi == 0:
                tail[i] += coef * _EDGE_CUT ** (1 - s_n) / (s_n - 1)
                continue
            wv = mpmath.mpc(0, yi)
            tail[i] += coef * complex(wv ** (s_n - 1) * mpmath.gammainc(1 - s_n, wv * cut))
    out = (body + tail).real / (math.pi * x0)
    out[np.abs(y - 1) < 1e-14] = math.inf
    return out


_EDGE_CUT = 64.0


def _origin_value(rf, tp, gamma, t) -> float:
    """``G(0, t)``: Mellin integral of the multiplier along the real axis."""
    from scipy import integrate

    c = tp.eta * t**tp.beta

    def f(k):
        return float(np.real(kernel_multiplier(rf, tp, gamma, t, k))) / math.pi

    if tp.beta == 1 and gamma == 1:
        # int_0^inf Re exp(-c k^a e^{i th pi/2}) dk
        return math.gamma(1 + 1 / rf.alpha) * math.cos(rf.theta * math.pi / (2 * rf.alpha)) / (
            math.pi * c ** (1 / rf.alpha)
        )
    if rf.alpha <= 1:
        return math.inf
    if abs(abs(rf.theta) - (2 - tp.beta)) < 1e-12:
        # the multiplier does not decay on the edge
        if abs(rf.alpha - tp.beta) < 1e-12 and gamma == 1:
            th = -abs(rf.theta)
            return float(_edge_neutral_integral(rf.alpha, th, tp, t, np.zeros(1))[0])
        return math.inf
    val, _ = integrate.quad(f, 0, np.inf, limit=500)
    return val


# closed forms -----------------------------------------------------------------------


def gaussian_density(eta: float, t: float, x):
    if not (eta > 0 and t > 0):
        raise InvalidParams("Gaussian density needs eta > 0 and t > 0")
    x = np.asarray(x, dtype=float)
    out = np.exp(-x * x / (4 * eta * t)) / np.sqrt(4 * np.pi * eta * t)
    return float(out) if out.ndim == 0 else out


def neutral_density(rf: RieszFellerParams, x):
    """Neutral (``alpha == beta``) density at unit ``eta t**beta``; ``x > 0``.

    Negative arguments use the reflection ``theta -> -theta``.
    """
    a, th = rf.alpha, rf.theta
    if not 0 < a < 2:
        raise InvalidParams("neutral diffusion requires 0 < alpha < 2")
    x = np.asarray(x, dtype=float)
    if np.any(x == 0):
        raise InvalidParams("neutral density is evaluated at x != 0 only")
    ax = np.abs(x)
    ang = np.where(x > 0, a - th, a + th) * np.pi / 2
    sn = np.sin(ang)
    # alpha -+ theta = 2: the density vanishes identically on that side
    dead = np.abs(sn) < 1e-15
    den = np.where(dead, 1.0, 1 + 2 * ax**a * np.cos(ang) + ax ** (2 * a))
    out = np.where(dead, 0.0, ax ** (a - 1) * sn / den / np.pi)
    return float(out) if out.ndim == 0 else out


def _stable_x_positive(alpha: float, theta: float, s: float, x: np.ndarray) -> np.ndarray:
    rho = (alpha - theta) / (2 * alpha)
    if alpha < 1:
        if rho <= 0:
            return np.zeros_like(x)
        spec = HFunctionSpec(1, 1, [(1, 1), (rho, rho)], [(1 / alpha, 1 / alpha), (rho, rho)])
        return h_eval(spec, s / x) / (alpha * s)
    spec = HFunctionSpec(1, 1, [(1 - 1 / alpha, 1 / alpha), (1 - rho, rho)], [(0, 1), (1 - rho, rho)])
    return h_eval(spec, x / s) / (alpha * s)


def levy_density(rf: RieszFellerParams, eta: float, t: float, x):
    """Stable density (``beta = 1``) at ``x != 0`` via H-function series."""
    a, th = rf.alpha, rf.theta
    if not (eta > 0 and t > 0):
        raise InvalidParams("stable density needs eta > 0 and t > 0")
    if not 0 < a < 2:
        raise InvalidParams("stable-density series need 0 < alpha < 2")
    x = np.asarray(x, dtype=float)
    if np.any(x == 0):
        raise InvalidParams("stable density series are evaluated at x != 0 only")
    s = (eta * t) ** (1 / a)
    if a == 1:
        if th != 0:
            return green_pointwise(rf, TemporalParams(1.0, eta), 1.0, t, x)
        out = 1.0 / (np.pi * s * (1 + (x / s) ** 2))
        return float(out) if out.ndim == 0 else out
    out = np.empty(x.shape)
    pos = x > 0
    if np.any(pos):
        out[pos] = _stable_x_positive(a, th, s, x[pos])
    if np.any(~pos):
        out[~pos] = _stable_x_positive(a, -th, s, -x[~pos])
    return float(out) if out.ndim == 0 else out


def time_fractional_density(beta: float, eta: float, t: float, x):
    """``alpha = 2`` fundamental solution through the H^{1,0}_{1,1} residue series."""
    if not 0 < beta < 2:
        raise InvalidParams("time-fractional series need 0 < beta < 2")
    if not (eta > 0 and t > 0):
        raise InvalidParams("time-fractional density needs eta > 0 and t > 0")
    x = np.asarray(x, dtype=float)
    if np.any(x == 0):
        raise InvalidParams("time-fractional density series are evaluated at x != 0 only")
    s = math.sqrt(eta * t**beta)
    spec = HFunctionSpec(1, 0, [(1.0, beta / 2)], [(1.0, 1.0)])
    ax = np.abs(x)
    try:
        out = h_eval(spec, ax / s) / (2 * ax)
    except PoleCollision:
        spec = HFunctionSpec(1, 0, [(1.0, (beta + 1e-6) / 2)], [(1.0, 1.0)])
        out = h_eval(spec, ax / s) / (2 * ax)
    return float(out) if np.ndim(out) == 0 else out


def space_time_density(rf: RieszFellerParams, tp: TemporalParams, t: float, x, gamma: float = 1.0):
    """Kernel through the general H^{2,1}_{3,3} representation at ``x != 0``.

    Coinciding poles (rational parameter ratios) are handled by integrating
    the Mellin-Barnes contour directly instead of summing residues.
    """
    a = rf.alpha
    x = np.asarray(x, dtype=float)
    if np.any(x == 0):
        raise InvalidParams("H-function kernel is evaluated at x != 0 only")
    s = similarity_scale(a, tp.beta, tp.eta, t)
    out = np.empty(x.shape)
    for idx, xv in np.ndenumerate(x):
        th = rf.theta if xv > 0 else -rf.theta
        if (a - th) / (2 * a) <= 0:
            out[idx] = 0.0
            continue
        spec = space_time_spec(a, th, tp.beta, gamma)
        arg = abs(xv) / s
        try:
            hv = h_eval(spec, arg)
        except PoleCollision:
            hv = h_contour_integral(spec, arg)
        out[idx] = hv / (a * abs(xv))
    return float(out) if out.ndim == 0 else out


# dispatcher -------------------------------------------------------------------------


def _special_case(rf: RieszFellerParams, tp: TemporalParams) -> str | None:
    a, b = rf.alpha, tp.beta
    if a == 2 and b == 1:
        return "gaussian"
    if a == b and a < 2:
        return "neutral"
    if b == 1 and a != 1:
        return "levy"
    if a == 2 and b < 2:
        return "time_fractional"
    return None


def _pointwise_closed(case: str, rf, tp, t, x) -> np.ndarray:
    s = similarity_scale(rf.alpha, tp.beta, tp.eta, t)
    if case == "gaussian":
        return gaussian_density(tp.eta, t, x)
    if case == "neutral":
        return neutral_density(rf, x / s) / s
    if case == "levy":
        return levy_density(rf, tp.eta, t, x)
    return time_fractional_density(tp.beta, tp.eta, t, x)


def _origin_closed(case: str, rf, tp, t) -> float | None:
    """Value at ``x = 0`` where it is finite, else None."""
    a, th = rf.alpha, rf.theta
    s = similarity_scale(a, tp.beta, tp.eta, t)
    if case == "gaussian":
        return gaussian_density(tp.eta, t, 0.0)
    if case == "levy":
        return math.gamma(1 + 1 / a) * math.cos(th * math.pi / (2 * a)) / (math.pi * s)
    if case == "time_fractional":
        return 1.0 / (2 * s * math.gamma(1 - tp.beta / 2))
    if a > 1:
        return 0.0
    if a == 1:
        return math.cos(th * math.pi / 2) / (math.pi * s)
    return None


def _fill_origin(grid: SpatialGrid, fn, origin: float | None) -> tuple[np.ndarray, dict]:
    """Evaluate ``fn`` off the origin; a divergent origin gets the mean of its neighbours."""
    x = grid.points
    j0 = grid.origin_index()
    if j0 is None:
        return np.asarray(fn(x), dtype=float), {}
    mask = np.ones(x.size, dtype=bool)
    mask[j0] = False
    vals = np.empty(x.size)
    vals[mask] = fn(x[mask])
    if origin is not None:
        vals[j0] = origin
        return vals, {}
    vals[j0] = 0.5 * (vals[j0 - 1] + vals[(j0 + 1) % x.size])
    return vals, {"origin": "neighbour_mean"}


def _add_atom(grid: SpatialGrid, vals: np.ndarray, notes: dict, rf, tp, t) -> None:
    # the continuous formulas miss the edge-case atom; place it as a single-bin spike
    atom = edge_point_mass(rf, tp, t)
    if atom is None:
        return
    x0, weight = atom
    idx = int(np.argmin(np.abs(grid.points - x0)))
    vals[idx] = weight / grid.spacing
    notes["atom"] = f"{weight:.17g}@{grid.points[idx]:.17g}"


def fundamental_solution(
    rf: RieszFellerParams,
    tp: TemporalParams,
    t: float,
    grid: SpatialGrid | None = None,
    *,
    method: str = "auto",
) -> DensityProfile:
    """Fundamental solution (delta initial data) on a grid.

    ``method`` is one of ``auto``, ``closed``, ``hfun`` or ``spectral``.
    ``auto`` prefers a closed form, then an H-function series, then the
    spectral path (falling back to the Fejer-averaged DFT when the grid
    cannot resolve the multiplier).
    """
    _validate(rf, tp, t, 1.0)
    grid = grid or default_grid(rf, tp, t)
    params = dict(alpha=rf.alpha, theta=rf.theta, beta=tp.beta, eta=tp.eta, gamma=1.0)
    case = _special_case(rf, tp)
    if method == "auto":
        method = "closed" if case is not None else "spectral"
    if method == "closed":
        if case is None:
            raise InvalidParams(
                f"no closed form for alpha={rf.alpha}, beta={tp.beta}; use method spectral or hfun"
            )
        vals, notes = _fill_origin(
            grid, lambda x: _pointwise_closed(case, rf, tp, t, x), _origin_closed(case, rf, tp, t)
        )
        kind = "closed_form" if case in ("gaussian", "neutral") else "hfunction"
        notes = {"case": case, **notes}
        _add_atom(grid, vals, notes, rf, tp, t)
        return DensityProfile(grid, vals, t, params, kind, notes)
    if method == "hfun":
        origin = _origin_value(rf, tp, 1.0, t)
        origin = origin if math.isfinite(origin) else None
        vals, notes = _fill_origin(grid, lambda x: space_time_density(rf, tp, t, x), origin)
        _add_atom(grid, vals, notes, rf, tp, t)
        return DensityProfile(grid, vals, t, params, "hfunction", notes)
    if method == "spectral":
        try:
            return green_spectral(rf, tp, 1.0, t, grid)
        except GridTooCoarse:
            return green_spectral(rf, tp, 1.0, t, grid, window="fejer")
    raise InvalidParams(f"unknown method {method!r}")
