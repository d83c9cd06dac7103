"""Balanced urn simulation.

State C_n is a vector of d nonnegative real counts with total mass n + 1.
At time n a color is drawn with probability C_n[i] / (n + 1) and row i of
the replacement matrix is added, so the total always grows by exactly 1.

Two simulation paths are provided: simulate() runs one trajectory step by
step and records the draw history, while simulate_replicas() advances many
independent replicas in lockstep with vectorized draws.  Replica streams
are derived from (seed, chunk) via numpy SeedSequence spawn keys, chunks
have a fixed size, and chunk results are merged in index order, so results
are deterministic and independent of thread scheduling.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._format import write_csv
from .errors import DimensionMismatch
from .spectral import ReplacementMatrix

BALANCE_TOL = 1e-9
DEFAULT_CHUNK = 16384


@dataclass(frozen=True)
class ColorCount:
    """Counts at a fixed time; total mass must equal time + 1."""

    counts: np.ndarray
    time: int

    def __post_init__(self):
        c = np.array(self.counts, dtype=float)
        if c.ndim != 1 or c.size < 2:
            raise ValueError("counts must be a vector of at least 2 colors")
        if np.min(c) < 0:
            raise ValueError(f"negative count: {c.min()}")
        mass = self.time + 1.0
        if abs(c.sum() - mass) > BALANCE_TOL * mass:
            raise ValueError(
                f"counts sum to {c.sum()!r}, expected {mass} at time {self.time}")
        c.flags.writeable = False
        object.__setattr__(self, "counts", c)

    @property
    def dim(self) -> int:
        return self.counts.size


@dataclass(frozen=True)
class DrawIndicator:
    """One-hot record of the drawn color."""

    chosen: int
    dim: int

    def __post_init__(self):
        if not 0 <= self.chosen < self.dim:
            raise ValueError(f"chosen color {self.chosen} out of range")

    @property
    def vector(self) -> np.ndarray:
        v = np.zeros(self.dim)
        v[self.chosen] = 1.0
        return v


def _draw(counts: np.ndarray, total: float, u: float) -> int:
    """Index i with cumulative counts straddling u in [0, total)."""
    acc = 0.0
    last = 0
    for i, c in enumerate(counts):
        if c > 0:
            acc += c
            last = i
            if u < acc:
                return i
    return last  # float edge: u landed on the top boundary


def step(C: ColorCount, R: ReplacementMatrix,
         rng: np.random.Generator) -> tuple[ColorCount, DrawIndicator]:
    """Draw one color proportional to counts and add its replacement row."""
    if C.dim != R.dim:
        raise DimensionMismatch(f"state has {C.dim} colors, matrix {R.dim}")
    counts = C.counts
    i = _draw(counts, counts.sum(), rng.random() * counts.sum())
    return (ColorCount(counts + R.matrix[i], C.time + 1),
            DrawIndicator(i, C.dim))


@dataclass
class Trajectory:
    """Draw history of one simulated urn.

    `draws[j]` is the color drawn at time j (producing C_{j+1}).  The
    statistic path is always rebuilt from the draws so decompositions and
    their targets share one float recursion; `counts` (optional, memory
    permitting) stores the full history for export and inspection.
    """

    matrix: ReplacementMatrix
    initial: np.ndarray
    draws: np.ndarray
    seed: object
    counts: np.ndarray | None = None

    @property
    def n_draws(self) -> int:
        return self.draws.size

    def counts_matrix(self) -> np.ndarray:
        """All states C_0 .. C_N, reconstructed from draws if not stored."""
        if self.counts is not None:
            return self.counts
        hist = np.empty((self.n_draws + 1, self.initial.size))
        hist[0] = self.initial
        np.cumsum(self.matrix.matrix[self.draws], axis=0, out=hist[1:])
        hist[1:] += self.initial
        return hist

    def statistic(self, v: np.ndarray) -> np.ndarray:
        """Path j -> C_j . v for j = 0 .. N."""
        v = np.asarray(v, dtype=float)
        if v.shape != (self.initial.size,):
            raise DimensionMismatch(
                f"statistic vector has shape {v.shape}, need ({self.initial.size},)")
        out = np.empty(self.n_draws + 1)
        out[0] = self.initial @ v
        np.cumsum((self.matrix.matrix @ v)[self.draws], out=out[1:])
        out[1:] += out[0]
        return out

    def final_count(self) -> ColorCount:
        return ColorCount(self.counts_matrix()[-1], self.n_draws)

    def to_csv(self, path) -> None:
        """Columns time, count_0..count_{d-1}, draw.

        Row j >= 1 records the draw that produced state C_j; the draw cell
        of row 0 is empty.
        """
        d = self.initial.size
        hist = self.counts_matrix()
        header = ["time"] + [f"count_{i}" for i in range(d)] + ["draw"]
        rows = []
        for j in range(hist.shape[0]):
            drawn = "" if j == 0 else str(int(self.draws[j - 1]))
            rows.append([j, *hist[j], drawn])
        write_csv(path, header, rows)


def simulate(initial, R: ReplacementMatrix, n: int, seed,
             keep_counts: bool = True) -> Trajectory:
    """Run one trajectory of n draws from a unit-mass initial state."""
    c0 = np.array(initial, dtype=float)
    ColorCount(c0, 0)  # validates nonnegativity and unit mass
    if c0.size != R.dim:
        raise DimensionMismatch(f"initial has {c0.size} colors, matrix {R.dim}")
    if n < 0:
        raise ValueError("n must be nonnegative")
    rng = np.random.default_rng(seed)
    rows = R.matrix
    counts = c0.copy()
    draws = np.empty(n, dtype=np.int64)
    hist = np.empty((n + 1, c0.size)) if keep_counts else None
    if hist is not None:
        hist[0] = counts
    random = rng.random
    for j in range(n):
        total = j + 1.0
        i = _draw(counts, total, random() * total)
        counts += rows[i]
        draws[j] = i
        if hist is not None:
            hist[j + 1] = counts
    return Trajectory(R, c0, draws, seed, hist)


@dataclass
class ReplicaBatch:
    """Final states (and optionally draw histories) of many replicas."""

    matrix: ReplacementMatrix
    initial: np.ndarray
    n: int
    seed: object
    final_counts: np.ndarray
    draws: np.ndarray | None = None

    @property
    def replicas(self) -> int:
        return self.final_counts.shape[0]

    def statistics(self, v: np.ndarray) -> np.ndarray:
        """Final-state statistic C_n . v per replica."""
        v = np.asarray(v, dtype=float)
        if v.shape != (self.initial.size,):
            raise DimensionMismatch(
                f"statistic vector has shape {v.shape}, need ({self.initial.size},)")
        return self.final_counts @ v

    def trajectory(self, r: int) -> Trajectory:
        if self.draws is None:
            raise ValueError("batch was run without keep_draws")
        return Trajectory(self.matrix, self.initial.copy(),
                          self.draws[r].astype(np.int64), (self.seed, r))


def _run_chunk(rows: np.ndarray, c0: np.ndarray, n: int, m: int,
               seed_seq: np.random.SeedSequence, keep_draws: bool):
    rng = np.random.default_rng(seed_seq)
    d = rows.shape[0]
    counts = np.tile(c0, (m, 1))
    draws = np.empty((m, n), dtype=np.int16) if keep_draws else None
    for j in range(n):
        u = rng.random(m) * (j + 1.0)
        cumulative = np.cumsum(counts, axis=1)
        chosen = np.sum(u[:, None] >= cumulative, axis=1)
        np.clip(chosen, 0, d - 1, out=chosen)
        counts += rows[chosen]
        if keep_draws:
            draws[:, j] = chosen
    return counts, draws


def simulate_replicas(initial, R: ReplacementMatrix, n: int, replicas: int,
                      seed, keep_draws: bool = False, threads: int = 1,
                      chunk_size: int = DEFAULT_CHUNK) -> ReplicaBatch:
    """Advance many replicas in lockstep with vectorized draws.

    Chunk c of replicas uses the stream SeedSequence(seed, spawn_key=(c,)),
    so the result depends only on (seed, replicas, chunk_size), never on
    thread count or scheduling.
    """
    c0 = np.array(initial, dtype=float)
    ColorCount(c0, 0)
    if c0.size != R.dim:
        raise DimensionMismatch(f"initial has {c0.size} colors, matrix {R.dim}")
    if replicas < 1:
        raise ValueError("need at least one replica")
    rows = R.matrix
    sizes = [min(chunk_size, replicas - s) for s in range(0, replicas, chunk_size)]
    seqs = [np.random.SeedSequence(seed, spawn_key=(c,)) for c in range(len(sizes))]
    jobs = [(rows, c0, n, m, ss, keep_draws) for m, ss in zip(sizes, seqs)]
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda args: _run_chunk(*args), jobs))
    else:
        parts = [_run_chunk(*args) for args in jobs]
    finals = np.vstack([p[0] for p in parts])
    draws = np.vstack([p[1] for p in parts]) if keep_draws else None
    return ReplicaBatch(R, c0, n, seed, finals, draws)


def linear_statistic(traj: Trajectory, v) -> np.ndarray:
    """Path of C_j . v along a trajectory (length n_draws + 1)."""
    return traj.statistic(v)
