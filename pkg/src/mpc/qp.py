"""
Dense QP for the receding-horizon controller.

The decision vector is x = [a(0), ..., a(T+q-1), eps]: the realized ego
accelerations over the horizon extended by the delay, followed by one safety
slack. Positions and speeds are condensed out of the dynamics, so every
constraint and cost term is written directly in x:

    s(k) = s0 + k dt v0 + sum_{j<k} dt^2 (k - j - 1/2) a(j)
    v(k) = v0 + dt sum_{j<k} a(j)

The problem is  min 1/2 x'Px + g'x + const  s.t.  A_eq x = b_eq, G x <= h.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np

from ..dynamics import VehicleState
from ..errors import DomainError, QpBuildError
from ..predict import Prediction
from .margin import safety_margin_profile
from .params import MpcConfig


@dataclass
class MpcLayout:
    """Maps a decision vector back to the ego trajectory it implies."""
    s0: float
    v0: float
    dt: float
    T: int
    q: int
    S: np.ndarray
    V: np.ndarray

    @property
    def n_commands(self) -> int:
        return self.T + self.q

    def positions(self, x: np.ndarray) -> np.ndarray:
        k = np.arange(self.S.shape[0])
        return self.s0 + k * self.dt * self.v0 + self.S @ x[:self.n_commands]

    def speeds(self, x: np.ndarray) -> np.ndarray:
        return self.v0 + self.V @ x[:self.n_commands]


@dataclass
class QpProblem:
    """Convex QP  min 1/2 x'Px + g'x + const  s.t.  A_eq x = b_eq, G x <= h."""
    P: np.ndarray
    g: np.ndarray
    G: np.ndarray
    h: np.ndarray
    A_eq: Optional[np.ndarray] = None
    b_eq: Optional[np.ndarray] = None
    const: float = 0.0
    row_kinds: List[str] = field(default_factory=list)
    layout: Optional[MpcLayout] = field(default=None, repr=False)

    def __post_init__(self):
        self.P = np.atleast_2d(np.asarray(self.P, dtype=float))
        self.g = np.asarray(self.g, dtype=float).ravel()
        n = self.g.shape[0]
        self.G = np.asarray(self.G, dtype=float).reshape(-1, n)
        self.h = np.asarray(self.h, dtype=float).ravel()
        if self.A_eq is None:
            self.A_eq = np.zeros((0, n))
            self.b_eq = np.zeros(0)
        self.A_eq = np.asarray(self.A_eq, dtype=float).reshape(-1, n)
        self.b_eq = np.asarray(self.b_eq, dtype=float).ravel()
        if self.P.shape != (n, n):
            raise QpBuildError(f"cost matrix is {self.P.shape}, expected {(n, n)}")
        if self.G.shape[0] != self.h.shape[0]:
            raise QpBuildError(f"{self.G.shape[0]} inequality rows but {self.h.shape[0]} bounds")
        if self.A_eq.shape[0] != self.b_eq.shape[0]:
            raise QpBuildError(f"{self.A_eq.shape[0]} equality rows but {self.b_eq.shape[0]} values")

    @property
    def n(self) -> int:
        return self.g.shape[0]

    @property
    def m_ineq(self) -> int:
        return self.G.shape[0]

    @property
    def m_eq(self) -> int:
        return self.A_eq.shape[0]

    def objective(self, x: np.ndarray) -> float:
        return float(0.5 * x @ self.P @ x + self.g @ x + self.const)


def condensed_dynamics(n_commands: int, dt: float):
    """Maps from commands to s(k) - s0 - k dt v0 and v(k) - v0, k = 0..n_commands."""
    k = np.arange(n_commands + 1)[:, None]
    j = np.arange(n_commands)[None, :]
    past = j < k
    S = np.where(past, dt * dt * (k - j - 0.5), 0.0)
    V = np.where(past, dt, 0.0)
    return S, V


def build_qp(
    x0: VehicleState,
    committed: Sequence[float],
    pred: Prediction,
    cfg: MpcConfig,
) -> QpProblem:
    """
    Assemble the receding-horizon QP for the current ego state.

    ``committed`` holds the q accelerations already in the powertrain; they
    are pinned by equality rows. Rows that no free command can influence
    (speed box at k <= q, acceleration limits on committed commands) are
    left out.
    """
    q = cfg.q
    T = cfg.T
    committed = np.asarray(committed, dtype=float).ravel()
    if committed.shape[0] != q:
        raise QpBuildError(f"expected {q} committed commands, got {committed.shape[0]}")
    if pred.horizon < T:
        raise QpBuildError(f"prediction covers {pred.horizon} steps, horizon is {T}")
    if x0.v < 0:
        raise DomainError(f"speed must be non-negative, got {x0.v}")

    veh = cfg.vehicle
    dt = cfg.dt
    M = T + q
    n = M + 1
    eps = M
    S, V = condensed_dynamics(M, dt)
    k_all = np.arange(M + 1)
    s_free = x0.s + k_all * dt * x0.v
    v_free = np.full(M + 1, x0.v)
    s_hat = np.asarray(pred.s_hat[:T + 1], dtype=float)
    length = veh.length

    # headway tracking residual r(k) = c(k) - R(k) a, k = 0..T
    tau, d = cfg.range.tau, cfg.range.d
    R = S[:T + 1] + tau * V[:T + 1]
    c = s_hat - length - d - s_free[:T + 1] - tau * v_free[:T + 1]
    P = np.zeros((n, n))
    g = np.zeros(n)
    P[:M, :M] = 2.0 * cfg.q_g * R.T @ R
    P[np.arange(T), np.arange(T)] += 2.0 * cfg.q_a
    g[:M] = -2.0 * cfg.q_g * R.T @ c
    g[eps] = cfg.q_eps
    const = float(cfg.q_g * c @ c)

    A_eq = np.zeros((q, n))
    A_eq[np.arange(q), np.arange(q)] = 1.0

    rows: List[np.ndarray] = []
    bounds: List[float] = []
    kinds: List[str] = []

    def add(row: np.ndarray, bound: float, kind: str):
        rows.append(row)
        bounds.append(bound)
        kinds.append(kind)

    # soft safety: s_hat - s - l - H_min(v) - margin >= -eps
    margin = safety_margin_profile(cfg, T)
    for k in range(T + 1):
        row = np.zeros(n)
        row[:M] = S[k] + cfg.tau_min * V[k]
        row[eps] = -1.0
        add(row, s_hat[k] - length - cfg.d_min - margin[k] - s_free[k] - cfg.tau_min * v_free[k], "safety")

    for k in range(q + 1, T + 1):
        row = np.zeros(n)
        row[:M] = V[k]
        add(row, cfg.v_max - x0.v, "v_max")
        add(-row, x0.v, "v_min")

    for j in range(q, M):
        row = np.zeros(n)
        row[j] = -1.0
        add(row, -veh.u_min, "u_min")
        for slope, offset, kind in ((veh.m1, veh.b1, "envelope_1"), (veh.m2, veh.b2, "envelope_2")):
            row = np.zeros(n)
            row[:M] = -slope * V[j]
            row[j] += 1.0
            add(row, offset + slope * x0.v, kind)
        if veh.u_max_cap is not None:
            row = np.zeros(n)
            row[j] = 1.0
            add(row, veh.u_max_cap, "u_max_cap")

    row = np.zeros(n)
    row[eps] = -1.0
    add(row, 0.0, "slack")

    layout = MpcLayout(s0=x0.s, v0=x0.v, dt=dt, T=T, q=q, S=S, V=V)
    return QpProblem(
        P=P,
        g=g,
        G=np.vstack(rows),
        h=np.asarray(bounds),
        A_eq=A_eq,
        b_eq=committed,
        const=const,
        row_kinds=kinds,
        layout=layout,
    )


def dump_qp(qp: QpProblem, path: Union[str, Path]) -> Path:
    """
    Write a QP as dense plain text.

    Layout: a ``# ccc-lab qp`` header, a line ``n m_eq m_ineq``, the constant
    term, then the blocks P (n rows), g, A_eq (m_eq rows), b_eq, G (m_ineq
    rows) and h, each preceded by a line naming the block. Values are
    row-major and written with 17 significant digits.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        f.write("# ccc-lab qp: min 1/2 x'Px + g'x + const s.t. A_eq x = b_eq, G x <= h\n")
        f.write(f"{qp.n} {qp.m_eq} {qp.m_ineq}\n")
        f.write(f"const\n{qp.const:.17g}\n")
        for name, block in (
            ("P", qp.P),
            ("g", qp.g[None, :]),
            ("A_eq", qp.A_eq),
            ("b_eq", qp.b_eq[None, :]),
            ("G", qp.G),
            ("h", qp.h[None, :]),
        ):
            f.write(f"{name}\n")
            if block.size:
                np.savetxt(f, block, fmt="%.17g")
    return path


def load_qp(path: Union[str, Path]) -> QpProblem:
    """Read a QP written by ``dump_qp``."""
    lines = [line for line in Path(path).read_text().splitlines() if not line.startswith("#")]
    n, m_eq, m_ineq = (int(x) for x in lines[0].split())
    const = float(lines[2])
    blocks = {}
    i = 3
    for name, n_rows, n_cols in (
        ("P", n, n),
        ("g", 1, n),
        ("A_eq", m_eq, n),
        ("b_eq", 1 if m_eq else 0, m_eq),
        ("G", m_ineq, n),
        ("h", 1 if m_ineq else 0, m_ineq),
    ):
        if lines[i] != name:
            raise QpBuildError(f"expected block {name}, found {lines[i]!r}")
        body = " ".join(lines[i + 1:i + 1 + n_rows])
        blocks[name] = np.array(body.split(), dtype=float).reshape(n_rows, n_cols)
        i += 1 + n_rows
    return QpProblem(
        P=blocks["P"],
        g=blocks["g"].ravel(),
        G=blocks["G"],
        h=blocks["h"].ravel(),
        A_eq=blocks["A_eq"],
        b_eq=blocks["b_eq"].ravel(),
        const=const,
    )
