"""Transform-domain solver for the space-time fractional reaction-diffusion equation.

On the periodic grid the Fourier coefficients evolve as

    N*(k, t) = f*(k) E_{b,1}(-eta t^b psi) + g*(k) t E_{b,2}(-eta t^b psi)
               + int_0^t phi*(k, t - s) s^(b-1) E_{b,b}(-eta psi s^b) ds.

The source integral uses product weights that are exact when ``phi*`` is
piecewise linear in ``s``; they come from the antiderivatives

    int_0^s u^(b-1) E_{b,b}(-l u^b) du = s^b E_{b,b+1}(-l s^b)
    int_0^s u^b     E_{b,b}(-l u^b) du = s^(b+1) [E_{b,b+1} - E_{b,b+2}](-l s^b).
"""

from __future__ import annotations

import hashlib
import io
import json
import warnings
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.special import roots_legendre

from .errors import IllPosed, InsufficientSamples, InvalidParams, NonConvergent
from .greens import DensityProfile, SpatialGrid, _fmt, check_growth
from .mittag_leffler import MLParams, ml_eval
from .riesz_feller import (
    RieszFellerParams,
    TemporalParams,
    apply_riesz_feller_spectral,
    caputo_derivative_samples,
    symbol,
)

__all__ = [
    "DiffusionProblem",
    "SolutionField",
    "delta_data",
    "moments",
    "residual_check",
    "solve",
    "solve_convolution",
    "solve_half_order",
]

Source = Callable[[np.ndarray, float], np.ndarray]


def delta_data(grid: SpatialGrid) -> np.ndarray:
    """Unit-mass spike at the node nearest to the origin."""
    out = np.zeros(grid.num_points)
    j = int(np.argmin(np.abs(grid.points)))
    out[j] = 1.0 / grid.spacing
    return out


@dataclass
class DiffusionProblem:
    rf: RieszFellerParams
    tp: TemporalParams
    grid: SpatialGrid
    times: np.ndarray
    f: np.ndarray
    g: np.ndarray | None = None
    phi: Source | None = None
    source_nodes: int = 256
    edge_tol: float = 1e-12

    def __post_init__(self) -> None:
        n = self.grid.num_points
        self.times = np.atleast_1d(np.asarray(self.times, dtype=float))
        if self.times.size == 0 or np.any(self.times <= 0) or np.any(np.diff(self.times) <= 0):
            raise InvalidParams("output times must be positive and strictly increasing")
        self.f = np.asarray(self.f, dtype=float)
        if self.f.shape != (n,):
            raise InvalidParams("initial value f must be sampled on the grid")
        if self.tp.beta > 1 and self.g is None:
            raise IllPosed("g required for beta > 1")
        check_growth(self.rf, self.tp)
        if self.tp.beta <= 1 and self.g is not None:
            raise IllPosed("g must be absent for beta <= 1 (only one initial condition)")
        if self.g is not None:
            self.g = np.asarray(self.g, dtype=float)
            if self.g.shape != (n,):
                raise InvalidParams("initial rate g must be sampled on the grid")
        for name, arr in (("f", self.f), ("g", self.g)):
            if arr is None:
                continue
            if not np.all(np.isfinite(arr)):
                raise InvalidParams(f"{name} contains non-finite samples")
            if max(abs(arr[0]), abs(arr[-1])) > self.edge_tol:
                raise InvalidParams(f"{name} does not decay below {self.edge_tol:g} at the grid edges")
        if self.source_nodes < 2:
            raise InvalidParams("source quadrature needs at least 2 nodes")


@dataclass
class SolutionField:
    grid: SpatialGrid
    times: np.ndarray
    values: np.ndarray
    params: dict
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.times), self.grid.num_points):
            raise InvalidParams("solution values must have shape (times, points)")
        if not np.all(np.isfinite(self.values)):
            raise NonConvergent("solution contains non-finite values")

    @property
    def masses(self) -> np.ndarray:
        return self.values.sum(axis=1) * self.grid.spacing

    def profile(self, i: int) -> DensityProfile:
        return DensityProfile(self.grid, self.values[i], float(self.times[i]), dict(self.params), "spectral")

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        for key, val in self.params.items():
            buf.write(f"# {key}={_fmt(val)}\n")
        buf.write(f"# x_min={_fmt(self.grid.x_min)}\n# x_max={_fmt(self.grid.x_max)}\n")
        buf.write(f"# num_points={self.grid.num_points}\n")
        x = self.grid.points
        for i, t in enumerate(self.times):
            buf.write(f"# block={i}\n# time={_fmt(float(t))}\n# mass={_fmt(float(self.masses[i]))}\n")
            buf.write("x,value\n")
            for xv, v in zip(x, self.values[i]):
                buf.write(f"{_fmt(xv)},{_fmt(v)}\n")
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, source) -> "SolutionField":
        text = Path(source).read_text() if not isinstance(source, str) or "\n" not in source else source
        head, times, blocks = {}, [], []
        for line in text.splitlines():
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition("=")
                key = key.strip()
                if key == "block":
                    blocks.append([])
                elif key == "time":
                    times.append(float(val))
                elif key != "mass" and not blocks:
                    head[key] = val.strip()
            elif line and line != "x,value":
                blocks[-1].append(float(line.split(",")[1]))
        grid = SpatialGrid(float(head.pop("x_max")), int(head.pop("num_points")), float(head.pop("x_min")))
        params = {}
        for k, v in head.items():
            try:
                params[k] = float(v)
            except ValueError:
                params[k] = v
        return cls(grid, np.array(times), np.array(blocks), params)

    def manifest(self, extra: dict | None = None, data_files: dict | None = None) -> dict:
        man = {
            "params": self.params,
            "grid": {"x_min": self.grid.x_min, "x_max": self.grid.x_max, "num_points": self.grid.num_points},
            "times": [float(t) for t in self.times],
            "masses": [float(m) for m in self.masses],
            "diagnostics": self.diagnostics,
            "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        }
        if data_files:
            man["files"] = {
                name: {"path": str(p), "sha256": hashlib.sha256(Path(p).read_bytes()).hexdigest()}
                for name, p in data_files.items()
            }
        if extra:
            man.update(extra)
        return man

    def write_manifest(self, path, extra: dict | None = None, data_files: dict | None = None) -> dict:
        man = self.manifest(extra, data_files)
        Path(path).write_text(json.dumps(man, indent=2, sort_keys=True) + "\n")
        return man


def _params(problem: DiffusionProblem) -> dict:
    return dict(alpha=problem.rf.alpha, theta=problem.rf.theta, beta=problem.tp.beta, eta=problem.tp.eta)


def _spectrum(values: np.ndarray) -> np.ndarray:
    # f*(k) / (N dx) convention: the dx N / L factors cancel on the way back
    return np.fft.ifft(values, axis=-1)


def _to_space(spec: np.ndarray) -> np.ndarray:
    out = np.fft.fft(spec, axis=-1)
    if np.max(np.abs(out.imag)) > 1e-10 * max(1.0, np.max(np.abs(out.real))):
        raise NonConvergent("inverse transform left an imaginary residue above 1e-10")
    return out.real


def _symbol_on_grid(problem: DiffusionProblem) -> np.ndarray:
    psi = np.asarray(symbol(problem.rf, problem.grid.wavenumbers), dtype=complex)
    nyq = problem.grid.num_points // 2
    psi[nyq] = psi[nyq].real
    return psi


def _ml(beta: float, gam: float, z) -> np.ndarray:
    return np.asarray(ml_eval(MLParams(beta, gam), z))


def _source_weights(beta: float, lam: np.ndarray, t: float, n: int) -> np.ndarray:
    """Weights ``w[i, k]`` with ``int_0^t c(s) s^(b-1) E_{b,b}(-lam s^b) ds = sum_i w[i] c(s_i)``
    for ``c`` piecewise linear on ``s_i = i t / n``."""
    s = np.linspace(0.0, t, n + 1)
    sb = s[:, None] ** beta
    z = -lam[None, :] * sb
    e1 = _ml(beta, beta + 1, z)
    e2 = _ml(beta, beta + 2, z)
    A0 = sb * e1
    A1 = sb * s[:, None] * (e1 - e2)
    K0 = np.diff(A0, axis=0)
    K1 = np.diff(A1, axis=0)
    h = t / n
    w = np.zeros((n + 1, lam.size), dtype=complex)
    w[:-1] += (s[1:, None] * K0 - K1) / h
    w[1:] += (K1 - s[:-1, None] * K0) / h
    return w


def _source_samples(problem: DiffusionProblem, times: np.ndarray) -> np.ndarray:
    x = problem.grid.points
    out = np.empty((times.size, x.size))
    for i, tau in enumerate(times):
        out[i] = problem.phi(x, float(tau))
    if not np.all(np.isfinite(out)):
        raise InvalidParams("source produced non-finite samples")
    return out


def _tail_ratio(spec: np.ndarray) -> float:
    top = float(np.max(np.abs(spec), axis=-1).max()) if spec.size else 0.0
    return float(np.max(np.abs(spec[..., spec.shape[-1] // 2])) / top) if top > 0 else 0.0


def solve(problem: DiffusionProblem) -> SolutionField:
    """Transform-domain solution at every output time.

    The multipliers are bounded by one in modulus, so grid resolution is
    limited by the data alone; ``data_nyquist_ratio`` in the diagnostics
    reports how well the data spectrum has decayed (delta or box data do not).
    """
    tp = problem.tp
    psi = _symbol_on_grid(problem)
    fh = _spectrum(problem.f)
    gh = _spectrum(problem.g) if problem.g is not None else None
    rows = []
    tails = []
    for t in problem.times:
        z = -tp.eta * t**tp.beta * psi
        spec = fh * _ml(tp.beta, 1.0, z)
        if gh is not None:
            spec = spec + gh * t * _ml(tp.beta, 2.0, z)
        if problem.phi is not None:
            n = problem.source_nodes
            s = np.linspace(0.0, t, n + 1)
            w = _source_weights(tp.beta, tp.eta * psi, t, n)
            ph = _spectrum(_source_samples(problem, t - s))
            spec = spec + np.sum(w * ph, axis=0)
        tails.append(_tail_ratio(spec))
        rows.append(_to_space(spec))
    data = [_tail_ratio(fh)] + ([_tail_ratio(gh)] if gh is not None else [])
    if problem.phi is not None:
        data.append(_tail_ratio(_spectrum(_source_samples(problem, problem.times[-1:]))))
    diag = {
        "nyquist_ratio": max(tails),
        "data_nyquist_ratio": max(data),
        "source_nodes": problem.source_nodes,
    }
    return SolutionField(problem.grid, problem.times.copy(), np.array(rows), _params(problem), diag)


def _kernel_on_grid(problem: DiffusionProblem, gam: float, t: float) -> np.ndarray:
    """Periodised kernel ``G_gam(., t)`` sampled on the grid (no resolution check)."""
    grid = problem.grid
    z = -problem.tp.eta * t**problem.tp.beta * _symbol_on_grid(problem)
    mult = _ml(problem.tp.beta, gam, z)
    # centre the kernel at index 0 so circular convolution needs no shift
    return _to_space(mult) / grid.length


def _circular_convolve(kernel: np.ndarray, data: np.ndarray, dx: float) -> np.ndarray:
    return dx * np.real(np.fft.ifft(np.fft.fft(kernel, axis=-1) * np.fft.fft(data, axis=-1), axis=-1))


def _graded_nodes(panels: int = 24, order: int = 10) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre on geometrically graded panels of [0, 1] (refined at 0)."""
    gx, gw = roots_legendre(order)
    edges = np.concatenate([[0.0], 2.0 ** np.arange(-panels, 1)])
    u = np.concatenate([0.5 * (b - a) * gx + 0.5 * (a + b) for a, b in zip(edges[:-1], edges[1:])])
    w = np.concatenate([0.5 * (b - a) * gw for a, b in zip(edges[:-1], edges[1:])])
    return u, w


def solve_convolution(problem: DiffusionProblem) -> SolutionField:
    """Real-space form: kernels convolved with the data.

    ``N = G_1(t) * f + int_0^t s^(b-1) G_b(s) * phi(t - s) ds``.  The time
    integral substitutes ``u = (s/t)**b``, which removes the endpoint
    singularity, and uses graded Gauss-Legendre panels.
    """
    if problem.g is not None:
        raise IllPosed("the convolution form assumes g = 0")
    tp = problem.tp
    dx = problem.grid.spacing
    u, w = _graded_nodes()
    rows = []
    for t in problem.times:
        val = _circular_convolve(_kernel_on_grid(problem, 1.0, t), problem.f, dx)
        if problem.phi is not None:
            s = t * u ** (1.0 / tp.beta)
            # s^(b-1) ds = t^b / b du
            kern = np.array([_kernel_on_grid(problem, tp.beta, si) for si in s])
            src = _source_samples(problem, t - s)
            val = val + (t**tp.beta / tp.beta) * np.tensordot(w, _circular_convolve(kern, src, dx), axes=(0, 0))
        rows.append(val)
    return SolutionField(problem.grid, problem.times.copy(), np.array(rows), _params(problem), {"path": "convolution"})


def solve_half_order(problem: DiffusionProblem) -> SolutionField:
    """The ``beta = 1/2`` special case; checks symmetry when ``theta = 0``."""
    if problem.tp.beta != 0.5:
        raise InvalidParams("half-order entry point needs beta = 1/2")
    field_ = solve(problem)
    if problem.rf.theta == 0 and problem.grid.symmetric:
        f = problem.f[1:]
        if np.max(np.abs(f - f[::-1])) <= 1e-14 * max(1.0, np.max(np.abs(f))):
            v = field_.values[:, 1:]
            asym = float(np.max(np.abs(v - v[:, ::-1])))
            field_.diagnostics["asymmetry"] = asym
            if asym > 1e-10 * max(1.0, float(np.max(np.abs(v)))):
                raise NonConvergent(f"symmetric data produced an asymmetric solution ({asym:.2e})")
    return field_


def residual_check(field_: SolutionField, problem: DiffusionProblem, *, skip: int = 2) -> float:
    """Sup-norm of ``D_t^b N - eta D_x N - phi`` over interior times.

    The output times must be ``dt, 2 dt, ...``; ``f`` supplies ``t = 0``.
    For ``beta != 1`` the Caputo derivative is an integer derivative of the RL
    integral of ``N - f`` (less ``g t`` when ``beta > 1``), with product-trapezoid
    weights corrected for the leading powers of ``t**beta``; ``beta == 1`` uses
    plain finite differences.  The space operator is applied spectrally.
    """
    times = np.asarray(field_.times)
    if times.size < 8:
        raise InsufficientSamples("residual check needs at least 8 output times")
    dt = times[0]
    if not np.allclose(times, dt * np.arange(1, times.size + 1), rtol=1e-10, atol=0):
        raise InsufficientSamples("residual check needs uniform output times dt, 2dt, ...")
    stack = np.vstack([problem.f[None, :], field_.values])
    beta = problem.tp.beta
    if beta < 1:
        # N - f behaves like a series in t**beta; make the weights exact for its leading powers
        powers = tuple(k * beta for k in range(1, 7) if k * beta < 3)
        dbeta = caputo_derivative_samples(stack, dt, beta, form="rl", exponents=powers)
    elif beta > 1:
        # N - f - g t carries t**(k beta) and t**(1 + k beta)
        powers = sorted({k * beta + j for k in range(1, 4) for j in (0, 1) if k * beta + j < 4})
        dbeta = caputo_derivative_samples(
            stack, dt, beta, form="rl", exponents=tuple(powers), slope=problem.g
        )
    else:
        dbeta = caputo_derivative_samples(stack, dt, beta)
    space = problem.tp.eta * apply_riesz_feller_spectral(field_.values, problem.grid.spacing, problem.rf)
    res = dbeta[1:] - space
    if problem.phi is not None:
        res = res - _source_samples(problem, times)
    lo = max(skip, 1)
    hi = times.size - 2
    if hi <= lo:
        raise InsufficientSamples("too few interior times for the residual")
    return float(np.max(np.abs(res[lo:hi])))


def moments(profile: DensityProfile, order: int) -> float:
    """Trapezoid moment ``int x**order N dx`` on the profile's grid."""
    if order not in (0, 1, 2):
        raise InvalidParams("moment order must be 0, 1 or 2")
    if order == 2 and profile.params.get("alpha", 2.0) < 2:
        warnings.warn(
            "second moment of a heavy-tailed density is truncated by the grid",
            RuntimeWarning,
            stacklevel=2,
        )
    x = profile.x
    return float(np.sum(x**order * profile.values) * profile.grid.spacing)
