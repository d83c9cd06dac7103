"""Command-line front end for urn experiments.

Commands
--------
spectrum   stationary vector, real spectrum, right vectors, indicator alphas
simulate   one seeded trajectory -> trajectory file
decompose  trajectory + martingale expansion -> expansion file + residual
bound      deviation-bound reports over the threshold grid -> bounds.json
verify     bounds against exact enumeration or Monte Carlo -> dominance file
sweep      bound + verify over a grid of horizons

Exit codes: 0 success, 1 configuration error, 2 complex spectrum or
reducible matrix, 3 dominance failure.

Config files are flat key = value text; lines without '=' are matrix rows
(comma-separated).  A file whose first non-space character is '{' is
parsed as JSON with the same keys.  Keys: initial, horizon, horizons,
thresholds, replicas, seed, statistic (eigen:K | color:K | vector:...),
mode (auto | exact | mc).
"""
from __future__ import annotations

import argparse
import hashlib
import os
import sys
from dataclasses import dataclass

import numpy as np
import scipy

from . import __version__
from ._format import write_csv, write_json
from .bounds import BoundReport, color_deviation_bound, statistic_bound
from .decomposition import (
    jordan_decompose,
    martingale_decompose,
    repeated_zero_decompose,
)
from .errors import ComplexSpectrum, NotIrreducible, UrnboundError
from .process import simulate
from .spectral import ReplacementMatrix, decompose, validate_matrix
from .verification import (
    PATH_BUDGET,
    dominance_check,
    exact_distribution,
    exact_tail,
    tail_estimates,
)


class ConfigError(UrnboundError):
    """Bad or missing configuration."""


@dataclass
class ExperimentConfig:
    matrix: list[list[float]]
    initial: list[float] | None = None
    horizon: int | None = None
    horizons: list[int] | None = None
    thresholds: list[float] | None = None
    replicas: int = 100_000
    seed: int = 0
    statistic: str = "eigen:0"
    mode: str = "auto"


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.replace(",", " ").split()]


def parse_config(text: str) -> ExperimentConfig:
    stripped = text.lstrip()
    if stripped.startswith("{"):
        import json
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON config: {exc}") from exc
        rows = data.pop("matrix", None)
        cfg = ExperimentConfig(matrix=rows)
        for key, value in data.items():
            if not hasattr(cfg, key):
                raise ConfigError(f"unknown config key: {key}")
            setattr(cfg, key, value)
        if cfg.matrix is None:
            raise ConfigError("config is missing the matrix")
        return cfg

    rows: list[list[float]] = []
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line or line == "matrix:":
            continue
        if "=" in line:
            key, _, val = line.partition("=")
            key, val = key.strip(), val.strip()
            try:
                if key == "initial":
                    values[key] = _floats(val)
                elif key == "thresholds":
                    values[key] = _floats(val)
                elif key == "horizons":
                    values[key] = [int(x) for x in val.replace(",", " ").split()]
                elif key in ("horizon", "replicas", "seed"):
                    values[key] = int(val)
                elif key in ("statistic", "mode"):
                    values[key] = val
                else:
                    raise ConfigError(f"unknown config key: {key}")
            except ValueError as exc:
                raise ConfigError(f"line {lineno}: {exc}") from exc
        else:
            try:
                rows.append(_floats(line))
            except ValueError as exc:
                raise ConfigError(f"line {lineno}: bad matrix row: {exc}") from exc
    if not rows:
        raise ConfigError("config is missing the matrix")
    return ExperimentConfig(matrix=rows, **values)


def load_config(path: str) -> tuple[ExperimentConfig, str]:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    return parse_config(raw.decode()), hashlib.sha256(raw).hexdigest()


@dataclass
class Statistic:
    """Resolved statistic: what to project C_n on and how to bound it."""

    kind: str            # "eigen" | "color" | "vector"
    index: int | None
    vector: np.ndarray   # projection vector for simulation / truth
    label: str
    structure: object | None = None
    coefficients: np.ndarray | None = None  # basis expansion (vector kind)


def resolve_statistic(spec: str, S) -> Statistic:
    kind, _, arg = spec.partition(":")
    kind = kind.strip()
    if kind == "eigen":
        idx = int(arg or "0")
        if not 0 <= idx < len(S.structures):
            raise ConfigError(
                f"eigen:{idx} out of range ({len(S.structures)} structures)")
        st = S.structures[idx]
        vec = st.vectors[-1]  # generalized member for a chain, else the eigenvector
        return Statistic("eigen", idx, vec,
                         f"eigen:{idx} (lam={st.value:g})", structure=st)
    if kind == "color":
        idx = int(arg or "0")
        d = S.matrix.dim
        if not 0 <= idx < d:
            raise ConfigError(f"color:{idx} out of range for {d} colors")
        vec = np.zeros(d)
        vec[idx] = 1.0
        return Statistic("color", idx, vec, f"color:{idx}")
    if kind == "vector":
        try:
            vec = np.array(_floats(arg), dtype=float)
        except ValueError as exc:
            raise ConfigError(f"bad statistic vector: {exc}") from exc
        if vec.size != S.matrix.dim:
            raise ConfigError(
                f"statistic vector has {vec.size} entries for "
                f"{S.matrix.dim} colors")
        coeff = np.linalg.solve(S.basis, vec)
        return Statistic("vector", None, vec, f"vector:{arg}",
                         coefficients=coeff)
    raise ConfigError(f"unknown statistic selector: {spec!r}")


def _eigen_combo(stat: Statistic, S) -> list[tuple[float, np.ndarray, float]]:
    """Members (alpha, vector, lam) of the centered martingale part."""
    if stat.kind == "eigen":
        st = stat.structure
        return [(1.0, stat.vector, st.value)]
    if stat.kind == "vector":
        combo = []
        k = 1
        for st in S.structures:
            for v in st.vectors:
                a = float(stat.coefficients[k])
                if abs(a) > 0:
                    combo.append((a, v, st.value))
                k += 1
        return combo
    raise ConfigError(f"no eigen combination for statistic {stat.label}")


def _bound_reports(cfg, S, stat, n, initial) -> list[BoundReport]:
    if not cfg.thresholds:
        raise ConfigError("thresholds must be a nonempty list")
    if any(t < 0 for t in cfg.thresholds):
        raise ConfigError("thresholds must be nonnegative")
    if stat.kind == "color":
        return [color_deviation_bound(S, stat.index, n, t, initial=initial)
                for t in cfg.thresholds]
    combo = _eigen_combo(stat, S)
    return [statistic_bound(S, combo, n, t, initial=initial)
            for t in cfg.thresholds]


def _raw_threshold(cfg, S, stat, report: BoundReport, n: int) -> float:
    """Translate the centered event back to a threshold on C_n . vector."""
    if stat.kind == "color":
        return (S.pi[stat.index] * (n + 1.0) + report.zeroth_shift
                + report.t * (n + 1.0))
    base = 0.0
    if stat.kind == "vector":
        base = float(stat.coefficients[0]) * (n + 1.0)
    return base + report.zeroth_shift + report.t * n


def _initial(cfg, d: int) -> np.ndarray:
    if cfg.initial is None:
        c0 = np.zeros(d)
        c0[0] = 1.0
        return c0
    c0 = np.array(cfg.initial, dtype=float)
    if c0.size != d:
        raise ConfigError(f"initial has {c0.size} entries for {d} colors")
    if abs(c0.sum() - 1.0) > 1e-9:
        raise ConfigError(f"initial mass {c0.sum()!r} must be 1")
    if c0.min() < 0:
        raise ConfigError("initial counts must be nonnegative")
    return c0


def _need_horizon(cfg) -> int:
    if cfg.horizon is None:
        raise ConfigError("this command needs `horizon`")
    if cfg.horizon < 1:
        raise ConfigError("horizon must be at least 1")
    return cfg.horizon


def _table_rows(header, rows):
    return [dict(zip(header, row)) for row in rows]


def _write_table(path_base, out_dir, fmt, header, rows):
    if fmt == "json":
        path = os.path.join(out_dir, f"{path_base}.json")
        write_json(path, _table_rows(header, rows))
    else:
        path = os.path.join(out_dir, f"{path_base}.csv")
        write_csv(path, header, rows)
    return path


# -- commands ------------------------------------------------------------------

def cmd_spectrum(cfg, S, args, out_dir) -> int:
    payload = {
        "matrix": S.matrix.matrix,
        "pi": S.pi,
        "eigenvalues": [
            {"value": lam, "algebraic": am, "geometric": gm}
            for lam, am, gm in S.eigenvalues
        ],
        "structures": [
            {
                "value": st.value,
                "jordan": st.jordan,
                "vectors": [v for v in st.vectors],
            }
            for st in S.structures
        ],
        "alphas": S.alphas,
    }
    write_json(os.path.join(out_dir, "spectrum.json"), payload)
    return 0


def cmd_simulate(cfg, S, args, out_dir) -> int:
    n = _need_horizon(cfg)
    c0 = _initial(cfg, S.matrix.dim)
    traj = simulate(c0, S.matrix, n, cfg.seed)
    if args.format == "json":
        hist = traj.counts_matrix()
        rows = []
        for j in range(n + 1):
            row = {"time": j, "draw": None if j == 0 else int(traj.draws[j - 1])}
            for i in range(S.matrix.dim):
                row[f"count_{i}"] = hist[j, i]
            rows.append(row)
        write_json(os.path.join(out_dir, "trajectory.json"), rows)
    else:
        traj.to_csv(os.path.join(out_dir, "trajectory.csv"))
    return 0


def cmd_decompose(cfg, S, args, out_dir) -> int:
    n = _need_horizon(cfg)
    c0 = _initial(cfg, S.matrix.dim)
    stat = resolve_statistic(cfg.statistic, S)
    if stat.kind != "eigen":
        raise ConfigError("decompose needs an eigen:K statistic")
    st = stat.structure
    traj = simulate(c0, S.matrix, n, cfg.seed)
    if st.jordan:
        xi2, xi3 = st.vectors
        if abs(st.value) <= 1e-12:
            exp = repeated_zero_decompose(traj, xi2, xi3)
        else:
            exp = jordan_decompose(traj, xi2, xi3, st.value)
        summary = {
            "eigenvalue": exp.eigenvalue,
            "zeroth_xi3": exp.zeroth_xi3,
            "zeroth_xi2": exp.zeroth_xi2,
            "reconstructed": exp.reconstructed,
            "actual": exp.actual,
            "residual": exp.residual,
        }
        header = ["j", "direct_weight", "direct_increment",
                  "nested_weight", "nested_increment", "partial_sum"]
        partial = (exp.zeroth_xi3 + exp.zeroth_xi2
                   + np.cumsum(exp.direct_weights * exp.direct_increments
                               + exp.nested_weights * exp.nested_increments))
        rows = [[j, exp.direct_weights[j], exp.direct_increments[j],
                 exp.nested_weights[j], exp.nested_increments[j], partial[j]]
                for j in range(n)]
    else:
        exp = martingale_decompose(traj, stat.vector, st.value)
        summary = {
            "eigenvalue": exp.eigenvalue,
            "zeroth": exp.zeroth,
            "reconstructed": exp.reconstructed,
            "actual": exp.actual,
            "residual": exp.residual,
        }
        header = ["j", "weight", "increment", "partial_sum"]
        partial = exp.partial_sums()
        rows = [[j, exp.weights[j], exp.increments[j], partial[j]]
                for j in range(n)]
    _write_table("expansion", out_dir, args.format, header, rows)
    write_json(os.path.join(out_dir, "decompose.json"), summary)
    return 0


def cmd_bound(cfg, S, args, out_dir) -> int:
    n = _need_horizon(cfg)
    c0 = _initial(cfg, S.matrix.dim)
    stat = resolve_statistic(cfg.statistic, S)
    reports = _bound_reports(cfg, S, stat, n, c0)
    payload = {
        "statistic": stat.label,
        "reports": [r.to_json_dict() for r in reports],
        "zeroth_shifts": [r.zeroth_shift for r in reports],
    }
    write_json(os.path.join(out_dir, "bounds.json"), payload)
    return 0


def _truths(cfg, S, stat, reports, n, c0, threads):
    """Exact or estimated probabilities aligned with the reports."""
    d = S.matrix.dim
    mode = cfg.mode
    if mode == "auto":
        mode = "exact" if d ** n <= PATH_BUDGET and n <= 24 else "mc"
    if mode == "exact":
        dist = exact_distribution(c0, S.matrix, n)
        return [exact_tail(dist, stat.vector, _raw_threshold(cfg, S, stat, r, n))
                for r in reports], "exact"
    if mode != "mc":
        raise ConfigError(f"unknown mode: {cfg.mode!r}")
    thresholds = [_raw_threshold(cfg, S, stat, r, n) for r in reports]
    return tail_estimates(c0, S.matrix, n, stat.vector, thresholds,
                          cfg.replicas, cfg.seed, threads=threads), "mc"


def cmd_verify(cfg, S, args, out_dir) -> int:
    n = _need_horizon(cfg)
    c0 = _initial(cfg, S.matrix.dim)
    stat = resolve_statistic(cfg.statistic, S)
    reports = _bound_reports(cfg, S, stat, n, c0)
    truths, _ = _truths(cfg, S, stat, reports, n, c0, args.threads)
    table = dominance_check(reports, truths)
    header = ["n", "t", "bound", "probability", "mode", "margin", "pass"]
    rows = [[r.n, r.t, r.bound, r.probability, r.mode, r.margin,
             "true" if r.passed else "false"] for r in table.rows]
    _write_table("dominance", out_dir, args.format, header, rows)
    write_json(os.path.join(out_dir, "bounds.json"), {
        "statistic": stat.label,
        "reports": [r.to_json_dict() for r in reports],
        "zeroth_shifts": [r.zeroth_shift for r in reports],
    })
    return 0 if table.all_pass else 3


def cmd_sweep(cfg, S, args, out_dir) -> int:
    if not cfg.horizons:
        raise ConfigError("sweep needs `horizons`")
    c0 = _initial(cfg, S.matrix.dim)
    stat = resolve_statistic(cfg.statistic, S)
    all_rows = []
    all_reports = []
    ok = True
    for n in cfg.horizons:
        if n < 1:
            raise ConfigError("horizons must be at least 1")
        reports = _bound_reports(cfg, S, stat, n, c0)
        truths, _ = _truths(cfg, S, stat, reports, n, c0, args.threads)
        table = dominance_check(reports, truths)
        ok = ok and table.all_pass
        all_reports.extend(reports)
        all_rows.extend([r.n, r.t, r.bound, r.probability, r.mode, r.margin,
                         "true" if r.passed else "false"] for r in table.rows)
    header = ["n", "t", "bound", "probability", "mode", "margin", "pass"]
    _write_table("dominance", out_dir, args.format, header, all_rows)
    write_json(os.path.join(out_dir, "bounds.json"), {
        "statistic": stat.label,
        "reports": [r.to_json_dict() for r in all_reports],
        "zeroth_shifts": [r.zeroth_shift for r in all_reports],
    })
    return 0 if ok else 3


COMMANDS = {
    "spectrum": cmd_spectrum,
    "simulate": cmd_simulate,
    "decompose": cmd_decompose,
    "bound": cmd_bound,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="urnbound",
        description="Balanced urn simulation, decompositions and deviation bounds")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="experiment config file")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads (default: URNBOUND_THREADS or 1)")
        p.add_argument("--format", choices=("csv", "json"), default="csv",
                       help="tabular output format")
    return parser


def _write_manifest(out_dir, command, config_hash, cfg, args) -> None:
    write_json(os.path.join(out_dir, "manifest.json"), {
        "command": command,
        "config_sha256": config_hash,
        "seed": cfg.seed,
        "threads": args.threads,
        "format": args.format,
        "versions": {
            "urnbound": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
    })


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads is None:
        try:
            args.threads = max(1, int(os.environ.get("URNBOUND_THREADS", "1")))
        except ValueError:
            print("invalid URNBOUND_THREADS", file=sys.stderr)
            return 1
    try:
        cfg, config_hash = load_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        matrix = validate_matrix(cfg.matrix)
        S = decompose(matrix)
        os.makedirs(args.out, exist_ok=True)
        _write_manifest(args.out, args.command, config_hash, cfg, args)
        return COMMANDS[args.command](cfg, S, args, args.out)
    except (ComplexSpectrum, NotIrreducible) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (UrnboundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
