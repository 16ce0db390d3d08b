"""Normal extremal flows on step-2 Carnot groups and the orbital map between them.

Fields are realized in exponential coordinates of the first kind,
``X_i = d_i + 1/2 sum_{j<=m, t>m} c^t_ji x_j d_t`` for horizontal ``i`` and
``X_t = d_t`` for vertical ``t``.  A flow state is a base point ``x`` with fiber
coordinates ``u_i = p(X_i)``; the metric ``g1`` has ``h1 = 1/2 sum u_i^2`` and
``g2`` has ``h2 = 1/2 sum u_i^2 / alpha_i^2`` over the same frame.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .framekit import MetricPairFrame


class FlowError(ValueError):
    pass


@dataclass
class FlowState:
    x: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.u = np.asarray(self.u, dtype=float)
        if self.x.shape != self.u.shape or self.x.ndim != 1:
            raise FlowError("x and u must be vectors of the same length")
        if not (np.all(np.isfinite(self.x)) and np.all(np.isfinite(self.u))):
            raise FlowError("flow state has nonfinite entries")

    def vector(self) -> np.ndarray:
        return np.concatenate([self.x, self.u])


@dataclass
class OrbitalMapEval:
    alpha: float
    phi_u: np.ndarray


@dataclass
class Fields:
    """``X_i(x) = e_i + B_i x``; ``B`` has shape (n, n, n) indexed [i, row, col]."""
    n: int
    m: int
    B: np.ndarray
    c: np.ndarray        # c[i, j, k] = c^k_ij over all indices

    def at(self, i: int, x: np.ndarray) -> np.ndarray:
        v = self.B[i] @ x
        v[i] += 1.0
        return v


@dataclass
class Trajectory:
    t: np.ndarray
    x: np.ndarray        # shape (steps + 1, n)
    u: np.ndarray
    energy: np.ndarray
    metric: str

    @property
    def energy_drift(self) -> float:
        return float(abs(self.energy[-1] - self.energy[0]))

    @property
    def max_energy_deviation(self) -> float:
        return float(np.max(np.abs(self.energy - self.energy[0])))

    def vertical_drift(self, m: int) -> float:
        if self.u.shape[1] == m:
            return 0.0
        return float(np.max(np.abs(self.u[:, m:] - self.u[0, m:])))


def _tensor(f: MetricPairFrame) -> np.ndarray:
    n = f.n
    c = np.zeros((n, n, n))
    for (i, j, k), v in f.constants_full().items():
        c[i - 1, j - 1, k - 1] = float(v)
    return c


def _check_carnot(f: MetricPairFrame) -> None:
    m = f.m
    for (i, j, k) in f.c:
        if not (i <= m and j <= m and k > m):
            raise FlowError(f"c^{k}_{{{i},{j}}} is not a degree (-1,-1) -> -2 bracket; "
                            "flows need a step-2 Carnot frame")


def realize_fields(f: MetricPairFrame, rng: np.random.Generator | None = None,
                   points: int = 5, tol: float = 1e-12) -> Fields:
    _check_carnot(f)
    n, m = f.n, f.m
    c = _tensor(f)
    B = np.zeros((n, n, n))
    for i in range(m):
        # (B_i)_{t, j} = 1/2 c^t_{j i}
        B[i, m:, :m] = 0.5 * c[:m, i, m:].T
    fields = Fields(n, m, B, c)
    rng = rng or np.random.default_rng(0)
    for _ in range(points):
        x = rng.standard_normal(n)
        for i in range(n):
            for j in range(i + 1, n):
                xi, xj = fields.at(i, x), fields.at(j, x)
                br = B[j] @ xi - B[i] @ xj
                want = sum(c[i, j, k] * fields.at(k, x) for k in range(n)) if np.any(c[i, j]) else 0.0
                if np.max(np.abs(br - want)) > tol:
                    raise FlowError(f"bracket check failed for [X_{i + 1}, X_{j + 1}]")
    return fields


def _weights(f: MetricPairFrame, metric: str) -> np.ndarray:
    """``dh/du_i = w_i u_i`` for horizontal i."""
    if metric == "g1":
        return np.ones(f.m)
    if metric == "g2":
        return np.array([1.0 / float(f.alpha2_of(i)) for i in range(1, f.m + 1)])
    raise FlowError(f"unknown metric {metric!r}; use g1 or g2")


def energy(f: MetricPairFrame, u: np.ndarray, metric: str = "g1") -> float:
    w = _weights(f, metric)
    uh = np.asarray(u)[..., :f.m]
    return 0.5 * np.sum(w * uh * uh, axis=-1)


def _rhs_factory(fields: Fields, w: np.ndarray):
    n, m = fields.n, fields.m
    B, c = fields.B, fields.c
    ch = c[:m]                      # c[i, j, k] with i horizontal
    Bh = B[:m]

    def rhs(y: np.ndarray) -> np.ndarray:
        x, u = y[:n], y[n:]
        g = w * u[:m]               # dh/du_i
        xdot = np.zeros(n)
        xdot[:m] = g
        xdot += np.einsum("i,irc,c->r", g, Bh, x)
        udot = np.einsum("i,ijk,k->j", g, ch, u)
        return np.concatenate([xdot, udot])

    return rhs


def _rk4(rhs, y0: np.ndarray, dt: float, steps: int) -> np.ndarray:
    out = np.empty((steps + 1, y0.size))
    out[0] = y = y0
    for s in range(steps):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * dt * k1)
        k3 = rhs(y + 0.5 * dt * k2)
        k4 = rhs(y + dt * k3)
        y = y + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        out[s + 1] = y
    if not np.all(np.isfinite(out)):
        raise FlowError("trajectory became nonfinite")
    return out


def _steps(T: float, dt: float) -> int:
    if not dt > 0:
        raise FlowError("dt must be positive")
    if T < 0:
        raise FlowError("T must be nonnegative")
    return int(round(T / dt))


def flow_h(f: MetricPairFrame, metric: str, s0: FlowState, T: float, dt: float,
           fields: Fields | None = None) -> Trajectory:
    if s0.x.size != f.n:
        raise FlowError(f"state has length {s0.x.size}, frame has n = {f.n}")
    fields = fields or realize_fields(f)
    w = _weights(f, metric)
    steps = _steps(T, dt)
    ys = _rk4(_rhs_factory(fields, w), s0.vector(), dt, steps)
    n = f.n
    u = ys[:, n:]
    return Trajectory(np.arange(steps + 1) * dt, ys[:, :n], u, energy(f, u, metric), metric)


# -- orbital map ---------------------------------------------------------------

def _alpha2_vector(f: MetricPairFrame) -> np.ndarray:
    return np.array([float(f.alpha2_of(j)) for j in range(1, f.n + 1)])


def alpha_of(f: MetricPairFrame, u: np.ndarray) -> np.ndarray:
    """``sqrt(sum alpha_i^2 u_i^2 / sum u_i^2)`` over horizontal i; vectorized over rows."""
    a2 = _alpha2_vector(f)[:f.m]
    uh = np.asarray(u)[..., :f.m]
    den = np.sum(uh * uh, axis=-1)
    if np.any(den == 0):
        raise FlowError("horizontal covector is zero; the orbital map is undefined there")
    return np.sqrt(np.sum(a2 * uh * uh, axis=-1) / den)


def orbital_map(f: MetricPairFrame, s: FlowState) -> OrbitalMapEval:
    a = float(alpha_of(f, s.u))
    return OrbitalMapEval(a, _alpha2_vector(f) * s.u / a)


def _phi_rows(f: MetricPairFrame, u: np.ndarray) -> np.ndarray:
    a = alpha_of(f, u)
    return _alpha2_vector(f) * u / a[:, None]


@dataclass
class OrbitalReport:
    residual: float
    alpha_drift: float
    energy_drift: float
    dt: float
    T: float

    def to_json(self) -> dict:
        return {"residual": self.residual, "alpha_drift": self.alpha_drift,
                "energy_drift": self.energy_drift, "dt": self.dt, "T": self.T}


def orbital_residual(f: MetricPairFrame, s0: FlowState, T: float, dt: float,
                     fields: Fields | None = None) -> OrbitalReport:
    """Max of ``|d/dt Phi(s(t)) - alpha(s0) h2vec(Phi(s(t)))|`` along an h1 trajectory.

    Both base and fiber components enter the norm.  The time derivative is
    the five-point central difference, so the residual is O(dt^4) like RK4.
    """
    if not f.is_product():
        raise FlowError("orbital residual needs a product frame")
    fields = fields or realize_fields(f)
    tr = flow_h(f, "g1", s0, T, dt, fields)
    phi = _phi_rows(f, tr.u)
    y = np.concatenate([tr.x, phi], axis=1)
    if len(y) < 5:
        raise FlowError("need at least four steps for the difference stencil")
    dy = (y[:-4] - 8 * y[1:-3] + 8 * y[3:-1] - y[4:]) / (12 * dt)
    a0 = float(alpha_of(f, s0.u))
    rhs2 = _rhs_factory(fields, _weights(f, "g2"))
    target = np.array([rhs2(row) for row in y[2:-2]]) * a0
    res = np.max(np.linalg.norm(dy - target, axis=1))
    alphas = alpha_of(f, tr.u)
    return OrbitalReport(float(res), float(np.max(np.abs(alphas - a0))), tr.max_energy_deviation,
                         dt, T)


def geodesic_trace_compare(f: MetricPairFrame, s0: FlowState, T: float, dt: float,
                           fields: Fields | None = None) -> float:
    """Max base distance between the g1 geodesic and the time-rescaled g2 geodesic.

    With ``a = alpha(s0)`` the g2 curve from ``Phi(s0)`` is sampled at ``a t``,
    so it is integrated with step ``a dt`` over ``[0, a T]``.
    """
    if not f.is_product():
        raise FlowError("trace comparison needs a product frame")
    fields = fields or realize_fields(f)
    steps = _steps(T, dt)
    t1 = flow_h(f, "g1", s0, steps * dt, dt, fields)
    om = orbital_map(f, s0)
    a = om.alpha
    s2 = FlowState(s0.x.copy(), om.phi_u)
    ys = _rk4(_rhs_factory(fields, _weights(f, "g2")), s2.vector(), a * dt, steps)
    return float(np.max(np.linalg.norm(t1.x - ys[:, :f.n], axis=1)))


# -- closed form -----------------------------------------------------------------

def heisenberg_closed_form(omega: float, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Exact g1 extremal of the Heisenberg frame from x = 0, u = (1, 0, omega)."""
    t = np.asarray(t, dtype=float)
    if omega == 0:
        x = np.stack([t, np.zeros_like(t), np.zeros_like(t)], axis=1)
        u = np.stack([np.ones_like(t), np.zeros_like(t), np.zeros_like(t)], axis=1)
        return x, u
    wt = omega * t
    x = np.stack([np.sin(wt) / omega, (1 - np.cos(wt)) / omega,
                  0.5 * (t / omega - np.sin(wt) / omega ** 2)], axis=1)
    u = np.stack([np.cos(wt), np.sin(wt), np.full_like(t, omega)], axis=1)
    return x, u


def convergence_factors(f: MetricPairFrame, s0: FlowState, T: float, dts) -> list[float]:
    """Ratios of successive orbital residuals for the given step sizes."""
    fields = realize_fields(f)
    res = [orbital_residual(f, s0, T, dt, fields).residual for dt in dts]
    return [res[i] / res[i + 1] for i in range(len(res) - 1)]

