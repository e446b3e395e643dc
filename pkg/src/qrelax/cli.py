"""``qrelax`` command line: goe | boson | oscillator | external.

Exit status: 0 success, 2 configuration error, 3 ingestion error,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Optional

import numpy as np
from scipy import sparse

from . import __version__
from . import constants as C
from .analytic import universal_channels
from .boson import BosonModelParams, prepare_system, run_boson_relaxation
from .config import MODES, RunConfig, build_config, parse_tolerances, read_config_file
from .core import (
    ConfigError,
    DimensionError,
    HermitianOperator,
    IngestionError,
    NumericalError,
    TimeSeries,
    time_grid,
)
from .goe import GoeParams, sample_goe, uniform_observable
from .matrixfile import atomic_write_bytes, ingest_matrix, write_matrix
from .observables import amplitude_histogram, relaxation_record, strength_function
from .oscillator import CoherentParams, SqueezedParams, coherent_dynamics, coherent_numeric, squeezed_dynamics
from .spectral import (
    diagonal_variance,
    diagonalize,
    propagator_column,
    spectral_width,
    state_widths,
    trace_form_factor,
)

log = logging.getLogger("qrelax")

ANALYTIC_CHANNELS = ("survival", "Q", "dQ2", "P", "P2", "NPC")


@dataclass
class RunResult:
    series: TimeSeries
    meta: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)  # suffix -> {column: array}


def select_initial(selector, qvalues) -> list:
    """Basis indices for an index/q selector; q picks the nearest value (lowest index on ties)."""
    qvalues = np.asarray(qvalues, dtype=float)
    n = qvalues.size
    if selector.kind == "index":
        out = [int(k) for k in selector.values]
        for k in out:
            if not 0 <= k < n:
                raise ConfigError(f"initial index {k} outside [0, {n})")
        return out
    return [int(np.argmin(np.abs(qvalues - v))) for v in selector.values]


def _merge(target: TimeSeries, source: TimeSeries, suffix: str = "", names=None) -> None:
    for name in names or source.names:
        target.add(name + suffix, source[name])


def _suffix(indices, k) -> str:
    return "" if len(indices) == 1 else f"_a{k}"


def _records(spec, H, q, indices, tau, lam, debug):
    out = TimeSeries(tau)
    for k in indices:
        rec = relaxation_record(spec, H, q, k, tau, lam, debug=debug)
        _merge(out, rec, _suffix(indices, k))
    return out


# ---------------------------------------------------------------- goe


def goe_run(cfg: RunConfig) -> RunResult:
    tau = time_grid(cfg.tau_max, cfg.tau_steps)
    q = uniform_observable(cfg.dim)
    indices = select_initial(cfg.initial, q)
    acc = None
    lams, lam_as = [], []
    for r in range(cfg.realizations):
        H = sample_goe(GoeParams(cfg.dim, cfg.lam, cfg.seed + r))
        if r == 0:
            _export(cfg, H, q)
        spec = diagonalize(H, tol=cfg.tolerances)
        lam = spectral_width(H)
        ts = _records(spec, H, q, indices, tau, lam, cfg.debug)
        ts.add("F2", trace_form_factor(spec, tau, lam)["F2"])
        lams.append(lam)
        lam_as.append([float(state_widths(H)[k]) for k in indices])
        if acc is None:
            acc = {k: v.copy() for k, v in ts.channels.items()}
        else:
            for k in acc:
                acc[k] += ts[k]
    out = TimeSeries(tau)
    for k, v in acc.items():
        out.add(k, v / cfg.realizations)
    mean_q2 = float(np.mean(q**2))
    for k in indices:
        ref = universal_channels(tau, float(q[k]), cfg.dim, mean_q2)
        sfx = _suffix(indices, k)
        for name in ANALYTIC_CHANNELS:
            out.add(f"{name}{sfx}_analytic", ref[name])
    meta = dict(
        lam=lams[0] if len(lams) == 1 else lams,
        lam_a=lam_as[0] if len(lam_as) == 1 else lam_as,
        initial_indices=indices,
        initial_q=[float(q[k]) for k in indices],
        dim=cfg.dim,
        realizations=cfg.realizations,
    )
    return RunResult(out, meta)


def _export(cfg: RunConfig, H: HermitianOperator, q) -> None:
    if cfg.export_hamiltonian:
        kind = "coordinate" if H.is_sparse else "dense"
        write_matrix(cfg.export_hamiltonian, H.matrix, kind=kind)
    if cfg.export_observable:
        write_matrix(cfg.export_observable, np.diag(q), kind="coordinate")


# ---------------------------------------------------------------- boson


def boson_run(cfg: RunConfig) -> RunResult:
    tau = time_grid(cfg.tau_max, cfg.tau_steps)
    p = BosonModelParams(cfg.n_bosons, cfg.n_levels, cfg.v, cfg.seed)
    system = prepare_system(p, diagonalize_now=False)
    q = system.observable()
    indices = select_initial(cfg.initial, q)
    _export(cfg, system.H, q)
    out = TimeSeries(tau)
    meta = dict(dim=system.basis.dim, v=cfg.v, initial_indices=indices, lam_a=[], occupations=[])
    for k in indices:
        rec = run_boson_relaxation(p, k, tau, system)
        sfx = _suffix(indices, k)
        names = [n for n in rec.names if n != "F2"]
        _merge(out, rec, sfx, names)
        meta["lam"] = rec.meta["lam"]
        meta["lam_a"].append(rec.meta["lam_a"])
        meta["occupations"].append(rec.meta["occupation"])
        if "F2" not in out:
            out.add("F2", rec["F2"])
    out.add("F2_gaussian", np.exp(-(tau**2)))
    return RunResult(out, meta)


# ---------------------------------------------------------------- oscillator


def oscillator_run(cfg: RunConfig) -> RunResult:
    """Grid is tau = omega t."""
    tau = time_grid(cfg.tau_max, cfg.tau_steps)
    t = tau / cfg.omega
    p = CoherentParams(complex(cfg.alpha), cfg.omega, cfg.n_max)
    num = coherent_numeric(p, t, tol=cfg.tolerances)
    ref = coherent_dynamics(p, t)
    out = TimeSeries(tau)
    for name in num.names:
        out.add(name, num[name])
        out.add(name + "_analytic", ref[name])
    meta = dict(alpha=[p.alpha.real, p.alpha.imag], omega=cfg.omega, n_max=num.meta["n_max"], leakage=num.meta["leakage"])
    if cfg.squeeze_position is not None:
        sq = squeezed_dynamics(SqueezedParams(cfg.squeeze_position, cfg.omega, cfg.n_max or 200), t)
        for name in sq.names:
            out.add("sq_" + name, sq[name])
        meta.update(squeeze_position=cfg.squeeze_position, squeeze_effective=sq.meta["a_effective"])
    return RunResult(out, meta)


# ---------------------------------------------------------------- external


@dataclass
class ObservableBasis:
    """H expressed in the eigenbasis of Q, eigenvalues ascending."""

    H: HermitianOperator
    q: np.ndarray
    rotation: Optional[np.ndarray]  # None when Q was diagonal (pure permutation)
    permutation: Optional[np.ndarray]


def to_observable_basis(H: HermitianOperator, Q: HermitianOperator, tol=None) -> ObservableBasis:
    if H.dim != Q.dim:
        raise IngestionError(f"H has dimension {H.dim}, Q has dimension {Q.dim}")
    if Q.is_sparse:
        is_diag = (Q.matrix - sparse.diags(Q.diagonal())).count_nonzero() == 0
    else:
        qd = Q.dense()
        is_diag = not np.any(qd - np.diag(np.diag(qd)))
    if is_diag:
        qv = np.real(Q.diagonal()).astype(float)
        perm = np.argsort(qv, kind="stable")
        m = H.matrix
        if H.is_sparse:
            hm = m[perm][:, perm].tocsr()
        else:
            hm = np.asarray(m)[np.ix_(perm, perm)]
        return ObservableBasis(HermitianOperator(hm, name=H.name), qv[perm], None, perm)
    spec_q = diagonalize(Q, tol=tol)
    u = spec_q.vectors
    hm = u.T @ H.dense() @ u
    hm = 0.5 * (hm + hm.T)
    return ObservableBasis(HermitianOperator(hm, name=H.name), spec_q.energies, u, None)


def width_report(H: HermitianOperator, tol=None) -> dict:
    """Per-state widths together with a check of the global width identity."""
    tol = C.resolve_tolerances(tol)
    lam = spectral_width(H)
    lam_a = state_widths(H)
    var = diagonal_variance(H)
    gap = abs(float(np.mean(lam_a**2)) - (lam**2 - var))
    if gap > tol["identity_atol"] * max(lam**2, 1.0):
        raise NumericalError(f"mean state width squared differs from lambda^2 - Var[H_aa] by {gap:.3e}")
    return dict(lam=lam, lam_a=lam_a, var_diag=var, identity_gap=gap)


def external_analysis(H: HermitianOperator, Q: HermitianOperator, cfg: RunConfig) -> RunResult:
    tau = time_grid(cfg.tau_max, cfg.tau_steps)
    ob = to_observable_basis(H, Q, cfg.tolerances)
    widths = width_report(ob.H, cfg.tolerances)
    lam = widths["lam"]
    if not lam > 0:
        raise NumericalError("Hamiltonian has zero spectral width")
    spec = diagonalize(ob.H, tol=cfg.tolerances)
    q = ob.q - ob.q.mean()
    indices = select_initial(cfg.initial, q)
    out = _records(spec, ob.H, q, indices, tau, lam, cfg.debug)
    out.add("F2", trace_form_factor(spec, tau, lam)["F2"])
    strength = {}
    hist = {k: [] for k in ("tau", "initial_index", "part", "center", "density", "scaled_x", "scaled_density", "gaussian")}
    hist_stats = []
    for k in indices:
        for ht in cfg.hist_tau:
            col = propagator_column(spec, k, ht / lam)
            sf = strength_function(q, col, bins=50)
            if "q_center" not in strength:
                strength["q_center"] = sf.centers
            strength[f"mass_tau{ht:g}{_suffix(indices, k)}"] = sf.mass
            for part in ("real", "imag"):
                # histograms need enough off-diagonal samples to mean anything
                if H.dim > 100:
                    h = amplitude_histogram(col, part=part)
                    nb = h.density.size
                    hist["tau"].extend([ht] * nb)
                    hist["initial_index"].extend([k] * nb)
                    hist["part"].extend([0 if part == "real" else 1] * nb)
                    hist["center"].extend(h.centers)
                    hist["density"].extend(h.density)
                    hist["scaled_x"].extend(h.scaled_x)
                    hist["scaled_density"].extend(h.scaled_density)
                    hist["gaussian"].extend(h.gaussian)
                    hist_stats.append(dict(tau=ht, initial_index=k, part=part, excess_kurtosis=h.excess_kurtosis, ks=h.ks_statistic))
    tables = {"strength": strength}
    if hist["tau"]:
        tables["hist"] = {k: np.asarray(v, dtype=float) for k, v in hist.items()}
    meta = dict(
        dim=H.dim,
        lam=lam,
        lam_a=[float(widths["lam_a"][k]) for k in indices],
        lam_a_all_mean_sq=float(np.mean(widths["lam_a"] ** 2)),
        var_diag=widths["var_diag"],
        identity_gap=widths["identity_gap"],
        initial_indices=indices,
        initial_q=[float(q[k]) for k in indices],
        q_was_diagonal=ob.rotation is None,
        histograms=hist_stats,
    )
    return RunResult(out, meta, tables)


def external_run(cfg: RunConfig) -> RunResult:
    H = ingest_matrix(cfg.hamiltonian_file, name="H", tol=cfg.tolerances)
    if cfg.observable_file:
        Q = ingest_matrix(cfg.observable_file, name="Q", tol=cfg.tolerances)
    else:
        Q = HermitianOperator(np.diag(uniform_observable(H.dim)), name="Q")
    if H.dim != Q.dim:
        raise IngestionError(f"H has dimension {H.dim}, Q has dimension {Q.dim}")
    return external_analysis(H, Q, cfg)


RUNNERS = {"goe": goe_run, "boson": boson_run, "oscillator": oscillator_run, "external": external_run}


# ---------------------------------------------------------------- output


def format_csv(columns: dict) -> bytes:
    names = list(columns)
    data = np.column_stack([np.asarray(columns[n], dtype=float) for n in names])
    buf = io.StringIO(newline="")
    np.savetxt(buf, data, fmt="%.17g", delimiter=",", header=",".join(names), comments="", newline="\n")
    return buf.getvalue().encode("utf-8")


def series_columns(ts: TimeSeries) -> dict:
    cols = {ts.grid_name: ts.grid}
    cols.update(ts.channels)
    return cols


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def run_metadata(cfg: RunConfig, result: RunResult) -> dict:
    meta = dict(mode=cfg.mode, version=__version__, seed=cfg.seed, tau_max=cfg.tau_max, tau_steps=cfg.tau_steps)
    meta.update(result.meta)
    meta["config"] = {k: str(v) for k, v in sorted(vars(cfg).items())}
    if not cfg.deterministic:
        meta["timestamp"] = datetime.now(timezone.utc).isoformat()
    return _jsonable(meta)


def _side_path(out: str, suffix: str, ext: str) -> str:
    stem, _ = os.path.splitext(out)
    return f"{stem}{suffix}{ext}"


def emit(cfg: RunConfig, result: RunResult) -> list:
    """Write every artifact; returns the paths written."""
    meta = run_metadata(cfg, result)
    written = []
    if cfg.fmt == "csv":
        atomic_write_bytes(cfg.out, format_csv(series_columns(result.series)))
        written.append(cfg.out)
        for name, cols in result.tables.items():
            path = _side_path(cfg.out, "_" + name, ".csv")
            atomic_write_bytes(path, format_csv(cols))
            written.append(path)
        path = _side_path(cfg.out, "", ".json")
        atomic_write_bytes(path, (json.dumps(meta, indent=1, sort_keys=True) + "\n").encode())
        written.append(path)
    else:
        doc = dict(meta=meta, series=_jsonable(series_columns(result.series)), tables=_jsonable(result.tables))
        atomic_write_bytes(cfg.out, (json.dumps(doc, sort_keys=True) + "\n").encode())
        written.append(cfg.out)
    return written


def run(cfg: RunConfig) -> RunResult:
    result = RUNNERS[cfg.mode](cfg)
    for name in result.series.names:
        if not np.all(np.isfinite(result.series[name])):
            raise NumericalError(f"channel {name} contains non-finite values")
    return result


# ---------------------------------------------------------------- argument parsing

FLAG_KEYS = {
    "tau_max": ("--tau-max", float),
    "tau_steps": ("--tau-steps", int),
    "seed": ("--seed", int),
    "out": ("--out", str),
    "dim": ("--dim", int),
    "lam": ("--lambda", float),
    "realizations": ("--realizations", int),
    "initial": ("--initial", str),
    "n_bosons": ("--n-bosons", int),
    "n_levels": ("--n-levels", int),
    "v": ("--v", float),
    "alpha": ("--alpha", str),
    "omega": ("--omega", float),
    "n_max": ("--n-max", int),
    "squeeze_position": ("--squeeze-position", float),
    "hamiltonian_file": ("--hamiltonian-file", str),
    "observable_file": ("--observable-file", str),
    "hist_tau": ("--hist-tau", str),
    "export_hamiltonian": ("--export-hamiltonian", str),
    "export_observable": ("--export-observable", str),
}


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qrelax", description="Relaxation of observables in random and regular quantum systems.")
    parser.add_argument("--version", action="version", version=f"qrelax {__version__}")
    sub = parser.add_subparsers(dest="mode", metavar="{goe,boson,oscillator,external}")
    for mode in MODES:
        sp = sub.add_parser(mode, help=f"{mode} mode")
        sp.add_argument("--config", help="key=value file; flags override it")
        sp.add_argument("--format", dest="fmt", choices=("csv", "json"), default=None)
        sp.add_argument("--deterministic", action="store_true", default=None, help="omit the timestamp from metadata")
        sp.add_argument("--debug", action="store_true", default=None, help="extra diagnostic channels and logging")
        sp.add_argument("--tol", action="append", default=None, metavar="NAME=VALUE", help="tolerance override (repeatable)")
        for key, (flag, typ) in FLAG_KEYS.items():
            sp.add_argument(flag, dest=key, type=typ, default=None)
    return parser


def parse_config(argv) -> tuple:
    parser = make_parser()
    ns = parser.parse_args(argv)
    if ns.mode is None:
        parser.print_usage(sys.stderr)
        raise ConfigError("a mode is required")
    flags = {k: getattr(ns, k) for k in FLAG_KEYS}
    for k in ("fmt", "deterministic", "debug"):
        flags[k] = getattr(ns, k)
    if ns.tol:
        flags["tolerances"] = parse_tolerances(ns.tol)
    file_values = read_config_file(ns.config) if ns.config else {}
    return build_config(ns.mode, file_values, flags), parser


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    logging.basicConfig(level=logging.DEBUG if "--debug" in argv else logging.WARNING, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    parser = None
    try:
        cfg, parser = parse_config(argv)
        result = run(cfg)
        for path in emit(cfg, result):
            log.info("wrote %s", path)
        return 0
    except ConfigError as exc:
        if parser is None:
            parser = make_parser()
        parser.print_usage(sys.stderr)
        print(f"qrelax: config error: {exc}", file=sys.stderr)
        return 2
    except (IngestionError, DimensionError) as exc:
        print(f"qrelax: ingestion error: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"qrelax: numerical failure: {exc}", file=sys.stderr)
        return 4
    except (ValueError, IndexError, KeyError) as exc:
        print(f"qrelax: config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
