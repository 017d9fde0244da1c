"""Fundamental solutions of right-invariant control systems and their cocycles.

The fundamental solution ``Phi(t)`` of ``dg/dt = (X0 + sum u_i X_i) g`` is
kept in renormalised form: it is integrated with RK4 in short blocks of
``renorm_interval`` steps, and every block propagator ``G_k`` is folded into
a QR chain ``G_k Q_{k-1} = Q_k R_k``.  ``Phi(t_k) k0 = Q_k R_k ... R_1`` is
then the Iwasawa (KAN) factorisation, the log-diagonal of the ``R`` product
is the a-cocycle, and singular values come from compound matrices so that
nothing overflows.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .lie import AlgebraSpec, CartanVector, LieError

Group = tuple[np.ndarray, ...]


class IntegrationError(RuntimeError):
    """Non-finite or singular state during integration."""


class UnresolvedSpectrumError(RuntimeError):
    """Oseledets clusters are not stable between the horizons n/2 and n."""


def _as_factor_tuple(spec: AlgebraSpec, mats) -> Group:
    mats = tuple(np.asarray(m, dtype=float) for m in mats)
    if len(mats) != len(spec.factors):
        raise LieError(f"expected {len(spec.factors)} factor matrices, got {len(mats)}")
    for n, m in zip(spec.factors, mats):
        if m.shape != (n, n):
            raise LieError(f"factor matrix has shape {m.shape}, expected {(n, n)}")
    return mats


@dataclass(frozen=True)
class BilinearControlSystem:
    """``dg/dt = (X0 + sum_k u_k X_k) g`` with ``u`` in a box around 0.

    ``drift`` and each entry of ``controls`` are tuples with one traceless
    matrix per factor.  ``lo``/``hi`` give the control box.
    """

    spec: AlgebraSpec
    drift: Group
    controls: tuple[Group, ...] = ()
    lo: tuple[float, ...] = ()
    hi: tuple[float, ...] = ()

    def __post_init__(self):
        drift = _as_factor_tuple(self.spec, self.drift)
        controls = tuple(_as_factor_tuple(self.spec, c) for c in self.controls)
        for mats in (drift, *controls):
            for m in mats:
                if abs(np.trace(m)) > 1e-12 * max(1.0, np.abs(m).max()):
                    raise LieError("generators must be traceless")
        lo = tuple(float(x) for x in self.lo)
        hi = tuple(float(x) for x in self.hi)
        if not (len(lo) == len(hi) == len(controls)):
            raise LieError("control range must have one interval per control")
        if any(not a < 0 < b for a, b in zip(lo, hi)):
            raise LieError("control range must contain 0 in its interior")
        object.__setattr__(self, "drift", drift)
        object.__setattr__(self, "controls", controls)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def n_controls(self) -> int:
        return len(self.controls)

    def in_range(self, value: Sequence[float], tol: float = 1e-12) -> bool:
        value = np.atleast_1d(np.asarray(value, dtype=float))
        if value.size != self.n_controls:
            return False
        return all(a - tol <= v <= b + tol for v, a, b in zip(value, self.lo, self.hi))

    def generator(self, value: Sequence[float]) -> Group:
        value = np.atleast_1d(np.asarray(value, dtype=float)) if self.n_controls else np.zeros(0)
        if not self.in_range(value):
            raise ValueError(f"control value {value} outside the range {list(zip(self.lo, self.hi))}")
        out = []
        for f, x0 in enumerate(self.drift):
            m = x0.copy()
            for u, ctrl in zip(value, self.controls):
                m = m + u * ctrl[f]
            out.append(m)
        return tuple(out)

    def vertices(self) -> list[np.ndarray]:
        """Corners of the control box (a single empty vector without controls)."""
        return [np.array(v) for v in itertools.product(*zip(self.lo, self.hi))]

    def factor(self, f: int) -> "BilinearControlSystem":
        """The system restricted to one factor; controls that vanish there are kept."""
        spec = AlgebraSpec((self.spec.factors[f],))
        return BilinearControlSystem(
            spec, (self.drift[f],), tuple((c[f],) for c in self.controls), self.lo, self.hi
        )


@dataclass(frozen=True)
class ControlSignal:
    """Piecewise-constant control: ``segments = ((duration, value), ...)``."""

    segments: tuple[tuple[float, tuple[float, ...]], ...]
    periodic: bool = False

    def __post_init__(self):
        segs = tuple((float(d), tuple(float(x) for x in np.atleast_1d(v))) for d, v in self.segments)
        if not segs:
            raise ValueError("a control signal needs at least one segment")
        if any(d <= 0 for d, _ in segs):
            raise ValueError("segment durations must be positive")
        object.__setattr__(self, "segments", segs)

    @classmethod
    def constant(cls, value: Sequence[float] = ()) -> "ControlSignal":
        return cls(((1.0, tuple(np.atleast_1d(np.asarray(value, dtype=float)))),), periodic=True)

    @property
    def period(self) -> float:
        return sum(d for d, _ in self.segments)

    def pieces(self, t0: float, t1: float) -> list[tuple[float, tuple[float, ...]]]:
        """Segments covering ``[t0, t1]`` (durations clipped)."""
        out = []
        start, k = 0.0, 0
        n = len(self.segments)
        while start < t1 - 1e-12:
            if k >= n:
                if not self.periodic:
                    # hold the last value past the end of the schedule
                    out.append((t1 - max(start, t0), self.segments[-1][1]))
                    break
                k = 0
            d, v = self.segments[k]
            end = start + d
            lo, hi = max(start, t0), min(end, t1)
            if hi - lo > 1e-12:
                out.append((hi - lo, v))
            start, k = end, k + 1
        return out

    def window(self, t0: float, t1: float) -> "ControlSignal":
        """Signal restricted to ``[t0, t1]`` and shifted to start at 0."""
        return ControlSignal(tuple(self.pieces(t0, t1)), periodic=False)

    def check_range(self, system: BilinearControlSystem):
        for _, v in self.segments:
            if not system.in_range(v if system.n_controls else ()):
                raise ValueError(f"control value {v} outside the range of the system")


def rk4_step_matrix(a: np.ndarray, dt: float) -> np.ndarray:
    """One classical RK4 step for the linear ODE ``dx/dt = A x`` as a matrix.

    For constant ``A`` the four stages collapse to the degree-4 Taylor
    polynomial of ``exp(dt A)``.
    """
    n = a.shape[0]
    ha = dt * a
    out = np.eye(n)
    term = np.eye(n)
    with np.errstate(over="ignore", invalid="ignore"):  # non-finite steps are caught by _unit_det
        for k in range(1, 5):
            term = term @ ha / k
            out = out + term
    return out


def _unit_det(m: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(m)):
        raise IntegrationError("integration produced non-finite entries")
    det = np.linalg.det(m)
    if not np.isfinite(det) or det <= 0:
        raise IntegrationError(f"integration lost invertibility (det={det})")
    return m / det ** (1.0 / m.shape[0])


def integrate_step(system: BilinearControlSystem, control_value, state: Group, dt: float,
                   max_substep: float = 1e-2) -> Group:
    """Advance ``state`` by ``dt`` with RK4 substeps no longer than ``max_substep``.

    Each substep is renormalised to ``det = 1``.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    gens = system.generator(control_value)
    n_sub = max(1, int(math.ceil(dt / max_substep - 1e-9)))
    h = dt / n_sub
    out = []
    for a, g in zip(gens, state):
        step = _unit_det(rk4_step_matrix(a, h))
        nxt = np.asarray(g, dtype=float)
        for _ in range(n_sub):
            nxt = step @ nxt
        if not np.all(np.isfinite(nxt)):
            raise IntegrationError("non-finite state after integration step")
        out.append(_unit_det(nxt))
    return tuple(out)


def positive_qr(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """QR with positive diagonal in ``R`` (the K and AN parts of the Iwasawa decomposition)."""
    q, r = np.linalg.qr(m)
    d = np.diag(r)
    if np.any(np.abs(d) <= 1e-300):
        raise IntegrationError("rank loss in QR factorisation")
    s = np.sign(d)
    return q * s, (r.T * s).T


@dataclass(frozen=True)
class CocycleTrail:
    """Renormalised fundamental solution on a time grid.

    ``times[k]`` is the k-th checkpoint, ``propagators[k]`` the block
    propagator from ``times[k]`` to ``times[k+1]`` (one matrix per factor);
    ``qs``/``rs`` the positive QR chain for basepoint ``k0 = I`` and
    ``log_diag[k]`` the accumulated log-diagonals of ``R`` at ``times[k]``.
    """

    spec: AlgebraSpec
    times: np.ndarray
    propagators: tuple[Group, ...]
    qs: tuple[Group, ...]
    rs: tuple[Group, ...]
    log_diag: np.ndarray
    log_det_steps: float = 0.0

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    def checkpoint(self, t: float) -> int:
        k = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[k] - t) > 1e-9 * max(1.0, abs(t)):
            raise ValueError(f"t={t} is not a checkpoint of the trail")
        return k

    def dense(self, t: float | None = None) -> Group:
        """Plain product of propagators (overflows for long horizons; small-T checks only)."""
        k = len(self.propagators) if t is None else self.checkpoint(t)
        out = tuple(np.eye(n) for n in self.spec.factors)
        for g in self.propagators[:k]:
            out = tuple(a @ b for a, b in zip(g, out))
        return out

    def reconstruct(self, t: float | None = None) -> Group:
        """``Q_k R_k ... R_1`` (basepoint I)."""
        k = len(self.propagators) if t is None else self.checkpoint(t)
        out = []
        for f, n in enumerate(self.spec.factors):
            r = np.eye(n)
            for j in range(k):
                r = self.rs[j][f] @ r
            out.append((self.qs[k - 1][f] if k else np.eye(n)) @ r)
        return tuple(out)


def _segment_grid(pieces, dt: float):
    """Split each constant piece into equal substeps no longer than ``dt``."""
    for duration, value in pieces:
        n = max(1, int(math.ceil(duration / dt - 1e-9)))
        h = duration / n
        for _ in range(n):
            yield h, value


def evolve_trail(
    system: BilinearControlSystem,
    signal: ControlSignal,
    horizon: float,
    dt: float = 1e-2,
    renorm_interval: int = 10,
) -> CocycleTrail:
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    if renorm_interval < 1:
        raise ValueError("renorm_interval must be >= 1")
    signal.check_range(system)
    spec = system.spec
    cache: dict[tuple, Group] = {}

    def step_mats(h, value):
        key = (round(h, 15), value)
        if key not in cache:
            gens = system.generator(value if system.n_controls else ())
            cache[key] = tuple(_unit_det(rk4_step_matrix(a, h)) for a in gens)
        return cache[key]

    times, props = [0.0], []
    block = tuple(np.eye(n) for n in spec.factors)
    t, count = 0.0, 0
    for h, value in _segment_grid(signal.pieces(0.0, horizon), dt):
        s = step_mats(h, value)
        block = tuple(a @ b for a, b in zip(s, block))
        t += h
        count += 1
        if count == renorm_interval:
            props.append(block)
            times.append(t)
            block = tuple(np.eye(n) for n in spec.factors)
            count = 0
    if count:
        props.append(block)
        times.append(t)

    qs, rs, diag_sum = [], [], [np.zeros(spec.dim_cartan)]
    q = tuple(np.eye(n) for n in spec.factors)
    log_det = 0.0
    for g in props:
        if not all(np.all(np.isfinite(m)) for m in g):
            raise IntegrationError("non-finite block propagator")
        pairs = [positive_qr(m @ qf) for m, qf in zip(g, q)]
        q = tuple(p[0] for p in pairs)
        r = tuple(p[1] for p in pairs)
        qs.append(q)
        rs.append(r)
        diag_sum.append(diag_sum[-1] + np.concatenate([np.log(np.diag(rf)) for rf in r]))
        log_det += sum(math.log(abs(np.linalg.det(m))) for m in g)
    return CocycleTrail(
        spec=spec,
        times=np.array(times),
        propagators=tuple(props),
        qs=tuple(qs),
        rs=tuple(rs),
        log_diag=np.array(diag_sum),
        log_det_steps=log_det,
    )


def _check_rotation(k0: np.ndarray):
    if not np.allclose(k0.T @ k0, np.eye(k0.shape[0]), atol=1e-10) or np.linalg.det(k0) < 0:
        raise LieError("basepoint must be a rotation (orthogonal, det 1)")


def a_cocycle_path(trail: CocycleTrail, k0: Sequence[np.ndarray] | None = None) -> np.ndarray:
    """Accumulated a-cocycle at every checkpoint, rows in flat Cartan coordinates."""
    spec = trail.spec
    if k0 is None:
        raw = trail.log_diag
    else:
        k0 = _as_factor_tuple(spec, k0)
        for k in k0:
            _check_rotation(k)
        q = k0
        rows = [np.zeros(spec.dim_cartan)]
        for g in trail.propagators:
            pairs = [positive_qr(m @ qf) for m, qf in zip(g, q)]
            q = tuple(p[0] for p in pairs)
            rows.append(rows[-1] + np.concatenate([np.log(np.diag(p[1])) for p in pairs]))
        raw = np.array(rows)
    out = raw.copy()
    for off, n in zip(spec.offsets, spec.factors):
        out[:, off:off + n] -= out[:, off:off + n].mean(axis=1, keepdims=True)
    return out


def a_cocycle(trail: CocycleTrail, k0: Sequence[np.ndarray] | None = None) -> CartanVector:
    """Log of the A-part of ``Phi(T) k0`` (traceless per factor)."""
    return CartanVector.from_flat(trail.spec, a_cocycle_path(trail, k0)[-1], project=True)


def transported_basepoint(trail: CocycleTrail, k0: Sequence[np.ndarray] | None = None) -> Group:
    """K-part of ``Phi(T) k0``: the flag point reached from ``k0 b0``."""
    spec = trail.spec
    q = tuple(np.eye(n) for n in spec.factors) if k0 is None else _as_factor_tuple(spec, k0)
    for g in trail.propagators:
        q = tuple(positive_qr(m @ qf)[0] for m, qf in zip(g, q))
    return q


def compound(m: np.ndarray, k: int) -> np.ndarray:
    """k-th exterior power: matrix of all k x k minors."""
    n = m.shape[0]
    idx = np.array(list(itertools.combinations(range(n), k)))
    sub = m[idx[:, None, :, None], idx[None, :, None, :]]
    return np.linalg.det(sub)


def log_singular_values(mats: Iterable[np.ndarray], n: int) -> np.ndarray:
    """Log singular values (descending) of the product ``M_N ... M_1``, overflow-free.

    ``log(s_1 ... s_k)`` is the log operator norm of the k-th compound of the
    product, accumulated factor by factor with rescaling.
    """
    mats = list(mats)
    logs = np.zeros(n + 1)
    for k in range(1, n + 1):
        acc = np.eye(math.comb(n, k))
        scale = 0.0
        for m in mats:
            acc = compound(m, k) @ acc
            # any positive rescaling cancels in the log; max-abs is the cheap one
            nrm = float(np.abs(acc).max())
            if not np.isfinite(nrm) or nrm == 0:
                raise IntegrationError("degenerate product in singular-value accumulation")
            acc /= nrm
            scale += math.log(nrm)
        logs[k] = scale + math.log(np.linalg.norm(acc, 2))
    return np.diff(logs)


def polar_exponent(trail: CocycleTrail, t: float | None = None) -> CartanVector:
    """``(1/t) log`` of the singular values of ``Phi(t)``, descending per factor."""
    k = len(trail.propagators) if t is None else trail.checkpoint(t)
    t = float(trail.times[k])
    parts = []
    for f, n in enumerate(trail.spec.factors):
        ls = log_singular_values((g[f] for g in trail.propagators[:k]), n) / t
        parts.append(tuple(ls - ls.mean()))
    return CartanVector(trail.spec, tuple(parts))


def trail_summary_rows(trail: CocycleTrail, k0=None) -> list[list[float]]:
    """Rows ``(t, a/t..., polar...)`` for every checkpoint after the start."""
    a_path = a_cocycle_path(trail, k0)
    rows = []
    for k in range(1, len(trail.times)):
        t = float(trail.times[k])
        rows.append([t, *(a_path[k] / t), *polar_exponent(trail, t).flat])
    return rows


def symmetric_log(g: np.ndarray, unimodular: bool = True) -> np.ndarray:
    """``log (g^T g)^{1/2}`` via the SVD.

    For ``g`` in SL(n) (``unimodular``) the smallest singular value is taken
    from ``det = 1``: with huge entries the floating-point SVD cannot
    resolve it.
    """
    g = np.asarray(g, dtype=float)
    _, s, vt = np.linalg.svd(g)
    if not np.all(np.isfinite(s)) or s[0] <= 0:
        raise LieError("sample is not invertible")
    if unimodular:
        logs = np.log(s[:-1])
        logs = np.append(logs, -logs.sum())
    else:
        if s[-1] <= 0:
            raise LieError("sample is not invertible")
        logs = np.log(s)
    return (vt.T * logs) @ vt


@dataclass(frozen=True)
class AsymptoticRay:
    direction: np.ndarray
    diagnostic: float


def asymptotic_ray(samples: Sequence[np.ndarray], times: Sequence[float],
                   unimodular: bool = True) -> AsymptoticRay:
    """``lim (1/n) log S(g_n)`` from the last samples, with a Cauchy diagnostic."""
    if len(samples) < 2 or len(samples) != len(times):
        raise ValueError("need at least two samples with matching times")
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError("sample times must increase")
    last = symmetric_log(samples[-1], unimodular) / times[-1]
    prev = symmetric_log(samples[-2], unimodular) / times[-2]
    return AsymptoticRay(last, float(np.linalg.norm(last - prev)))


@dataclass(frozen=True)
class OseledetsData:
    """Clustered exponents (descending), multiplicities and the slow filtration.

    ``filtration[i]`` is an orthonormal basis of ``V_i`` (all directions with
    exponent at most ``exponents[i]``); ``V_1`` is the whole space.
    """

    exponents: tuple[float, ...]
    multiplicities: tuple[int, ...]
    filtration: tuple[np.ndarray, ...]
    raw_exponents: np.ndarray
    equivariance_residual: float


def _cluster(values: np.ndarray, gap: float) -> list[list[int]]:
    groups = [[0]]
    for k in range(1, len(values)):
        if values[k - 1] - values[k] < gap:
            groups[-1].append(k)
        else:
            groups.append([k])
    return groups


def _slow_frames(mats: Sequence[np.ndarray]) -> np.ndarray:
    """Orthonormal frame ordered fast-to-slow for the right singular vectors of the product.

    Runs the transposed product backwards with QR renormalisation; the
    leading columns converge to the fastest right singular directions.
    """
    n = mats[0].shape[0]
    q = np.eye(n)
    for m in reversed(mats):
        q, _ = positive_qr(m.T @ q)
    return q


def oseledets_from_matrices(
    generators: Sequence[np.ndarray] | np.ndarray,
    n_max: int,
    clustering_gap: float = 0.05,
) -> OseledetsData:
    """Oseledets data of ``psi(n) = A_{n-1} ... A_0``.

    ``generators`` is a single matrix (constant cocycle) or a sequence with at
    least ``n_max + 1`` entries (one extra for the shifted equivariance check).
    """
    if n_max < 10:
        raise ValueError("n_max must be at least 10")
    gens = np.asarray(generators, dtype=float)
    if gens.ndim == 2:
        gens = np.repeat(gens[None], n_max + 1, axis=0)
    if len(gens) < n_max + 1:
        raise ValueError(f"need {n_max + 1} generators, got {len(gens)}")
    d = gens.shape[1]

    raw = log_singular_values(gens[:n_max], d) / n_max
    half = log_singular_values(gens[: n_max // 2], d) / (n_max // 2)
    groups = _cluster(raw, clustering_gap)
    if groups != _cluster(half, clustering_gap):
        raise UnresolvedSpectrumError(
            f"clusters at n={n_max} and n={n_max // 2} disagree; raise n_max or the gap"
        )

    frame = _slow_frames(list(gens[:n_max]))
    shifted = _slow_frames(list(gens[1:n_max + 1]))
    exps, mults, filt = [], [], []
    residual = 0.0
    from scipy.linalg import subspace_angles

    for g in groups:
        exps.append(float(raw[g].mean()))
        mults.append(len(g))
        basis = frame[:, g[0]:]
        filt.append(basis)
        if g[0] > 0:
            image = gens[0] @ basis
            target = shifted[:, g[0]:]
            residual = max(residual, float(np.max(subspace_angles(image, target))))
    return OseledetsData(tuple(exps), tuple(mults), tuple(filt), raw, residual)


def unit_time_generators(
    system: BilinearControlSystem, signal: ControlSignal, n: int, dt: float = 1e-2
) -> np.ndarray:
    """Block-diagonal time-one maps ``Phi(k+1) Phi(k)^{-1}`` for ``k = 0..n-1``."""
    out = []
    for k in range(n):
        trail = evolve_trail(system, signal.window(k, k + 1), 1.0, dt=dt, renorm_interval=10 ** 9)
        out.append(_block_diag(trail.propagators[0]))
    return np.array(out)


def _block_diag(blocks: Sequence[np.ndarray]) -> np.ndarray:
    from scipy.linalg import block_diag

    return block_diag(*blocks)


def oseledets(
    system: BilinearControlSystem,
    signal: ControlSignal,
    n_max: int,
    clustering_gap: float = 0.05,
    dt: float = 1e-2,
) -> OseledetsData:
    """Oseledets data of the time-one cocycle of the matrix system."""
    gens = unit_time_generators(system, signal, n_max + 1, dt=dt)
    return oseledets_from_matrices(gens, n_max, clustering_gap)


def projective_angle(v: np.ndarray) -> np.ndarray:
    """Angle in ``[0, pi)`` of (an array of) nonzero vectors in the plane."""
    v = np.asarray(v, dtype=float)
    return np.mod(np.arctan2(v[..., 1], v[..., 0]), np.pi)


def projective_derivative_exponent(
    system: BilinearControlSystem,
    signal: ControlSignal,
    angle: float,
    horizon: float,
    factor: int = 0,
    dt: float = 1e-2,
) -> float:
    """``(1/T) (-2 log |Phi(T) k e1|)`` for the point ``[k e1]`` at ``angle`` on P^1.

    For det-one flows on the angle chart the constant term vanishes, so
    this is exactly the growth rate of the projective derivative.
    """
    if system.spec.factors[factor] != 2:
        raise LieError("projective derivatives need an sl(2) factor")
    trail = evolve_trail(system, signal, horizon, dt=dt)
    c, s = math.cos(angle), math.sin(angle)
    k = np.array([[c, -s], [s, c]])
    # |Phi k e1| = exp(a_1) with a the a-cocycle at basepoint k
    path = a_cocycle_path(trail, tuple(k if f == factor else np.eye(n)
                                       for f, n in enumerate(system.spec.factors)))
    off = system.spec.offsets[factor]
    return float(-2.0 * path[-1, off] / trail.horizon)
