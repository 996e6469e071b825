"""Command-line front end: ``odba-chain <command> [options]``.

Exit codes: 0 success, 1 a scientific check failed, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .chain import ModelParams

SCHEMA_VERSION = 1
COMMANDS = ("verify", "spectrum", "table1", "bae", "ground", "thermo", "strings", "scaling")
THERMO_COLUMNS = ("eta", "b", "N", "E_g", "E_g_periodic", "E_b", "omega_max", "tail_bound")
STRING_COLUMNS = ("2N", "eta", "b", "E_string_closed", "E_lanczos", "delta_E", "max_deviation")
INHOM_COLUMNS = ("2N", "eta", "b", "E_h", "E_lanczos", "E_inh")
TABLE1_TOL = 5e-4

log = logging.getLogger("odba_chain")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    params: ModelParams
    tol: float
    out_path: str | None
    seed: int
    workers: int
    sizes: tuple[int, ...] = ()
    roots_path: str | None = None
    corrupt_r: bool = False

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if not self.tol > 0:
            raise ConfigError("tol must be positive")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")


# ---------------------------------------------------------------------------
# output helpers


def _clean(obj):
    """Plain JSON types; non-finite floats become None so output round-trips."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, complex):
        return [float(obj.real), float(obj.imag)]
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n"


def report(cfg: RunConfig, results, residuals: dict | None = None, **extra) -> dict:
    out = {
        "schema_version": SCHEMA_VERSION,
        "command": cfg.command,
        "params": cfg.params.as_dict(),
        "results": results,
        "residuals": residuals or {},
    }
    out.update(extra)
    return out


def csv_text(rows: list[dict], columns) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for row in rows:
        w.writerow({k: ("" if isinstance(v, float) and not math.isfinite(v) else repr(v) if isinstance(v, float) else v)
                    for k, v in row.items()})
    return buf.getvalue()


def _emit(cfg: RunConfig, doc: dict, rows: list[dict] | None = None, columns=None) -> None:
    """JSON report to --out (or stdout); a ``.csv`` --out gets the rows instead, JSON goes to stdout."""
    text = dumps(doc)
    if cfg.out_path and cfg.out_path.endswith(".csv") and rows is not None:
        with open(cfg.out_path, "w", encoding="utf-8") as fh:
            fh.write(csv_text(rows, columns))
        sys.stdout.write(text)
    elif cfg.out_path:
        with open(cfg.out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _map(cfg: RunConfig, fn, items):
    items = list(items)
    if cfg.workers == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# commands


def cmd_verify(cfg: RunConfig) -> int:
    from .suite import corrupted_r_matrix, run_identity_suite
    from .rmatrix import r_matrix

    if cfg.params.sites > 6:
        raise ConfigError("verify runs operator-level checks only up to 6 sites")
    r = corrupted_r_matrix if cfg.corrupt_r else r_matrix
    checks = run_identity_suite(cfg.params, seed=cfg.seed, tol=cfg.tol, r=r)
    ok = all(c["pass"] for c in checks)
    _emit(cfg, report(cfg, checks, {c["check"]: c["residual"] for c in checks}, passed=ok))
    return 0 if ok else 1


def cmd_spectrum(cfg: RunConfig) -> int:
    from .spectrum import full_spectrum

    rec = full_spectrum(cfg.params)
    results = [{"energy": float(e), "multiplicity": int(m)} for e, m in zip(rec.energies, rec.multiplicities)]
    _emit(cfg, report(cfg, results, total=rec.total))
    return 0


def _load_roots(path: str, params: ModelParams):
    from .bethe import BetheRoots

    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    rows = doc["results"] if isinstance(doc, dict) else doc
    return [BetheRoots.from_dict(row, params) for row in rows]


def _root_rows(sets, params: ModelParams, tol: float):
    from .bethe import bae_residual, energy_from_roots, newton_polish

    rows = []
    for s in sets:
        pol = newton_polish(s.lambdas, params, tol=tol)
        res = float(np.abs(bae_residual(pol)).max())
        rows.append({**pol.to_dict(energy_from_roots(pol)), "residual": res})
    rows.sort(key=lambda r: (round(r["energy"], 8), [tuple(z) for z in r["lambda"]]))
    return rows


def cmd_table1(cfg: RunConfig) -> int:
    from .bethe import TABLE1, canonical_roots, discover_root_sets
    from .spectrum import full_spectrum

    params = cfg.params
    if params.sites != 4:
        raise ConfigError("table1 is defined for 4 sites")
    sets = _load_roots(cfg.roots_path, params) if cfg.roots_path else discover_root_sets(params, seed=cfg.seed)
    rows = _root_rows(sets, params, cfg.tol)
    ed = full_spectrum(params).expanded()
    energies = np.sort([r["energy"] for r in rows])
    ed_match = len(energies) == len(ed) and bool(np.all(np.abs(energies - ed) <= 1e-8))
    printed = [(canonical_roots(np.array(lam), 4), E, n) for lam, E, n in TABLE1]
    for row in rows:
        key = canonical_roots(np.array([complex(*z) for z in row["lambda"]]), 4)
        hit = None
        for k, E, n in printed:
            close = len(k) == len(key) and all(
                abs(a[0] - b[0]) <= TABLE1_TOL and min(abs(a[1] - b[1]), np.pi - abs(a[1] - b[1])) <= TABLE1_TOL
                for a, b in zip(k, key)
            )
            if close and abs(row["energy"] - E) <= TABLE1_TOL:
                hit = (E, n)
                break
        row["table_energy"] = hit[0] if hit else None
        row["level"] = hit[1] if hit else None
        row["matched"] = hit is not None
    n_match = sum(r["matched"] for r in rows)
    ok = ed_match and n_match == len(TABLE1) and all(r["residual"] <= 1e-10 for r in rows)
    residuals = {"max_bae": max(r["residual"] for r in rows), "ed_energies_match": ed_match}
    _emit(cfg, report(cfg, rows, residuals, matched=n_match, ed_energies=[float(x) for x in ed]))
    return 0 if ok else 1


def cmd_bae(cfg: RunConfig) -> int:
    from .bethe import discover_root_sets

    params = cfg.params
    if params.sites > 8 and not cfg.roots_path:
        raise ConfigError("root discovery needs an exact spectrum; use at most 8 sites or --roots")
    sets = _load_roots(cfg.roots_path, params) if cfg.roots_path else discover_root_sets(params, seed=cfg.seed)
    rows = _root_rows(sets, params, cfg.tol)
    ok = all(r["residual"] <= max(cfg.tol, 1e-10) * 100 for r in rows)
    _emit(cfg, report(cfg, rows, {"max_bae": max(r["residual"] for r in rows)}))
    return 0 if ok else 1


def cmd_ground(cfg: RunConfig) -> int:
    from .bethe import ground_state_log_bae, homogeneous_energy
    from .spectrum import ground_energy

    p = cfg.params.with_(J=1)
    sol = ground_state_log_bae(p, tol=max(cfg.tol, 1e-12))
    e_h = homogeneous_energy(sol)
    result = {
        "u": [float(x) for x in sol.u],
        "I": list(sol.quantum_numbers.I),
        "holes": [float(x) for x in sol.hole_positions],
        "E_h": e_h,
    }
    if p.sites <= 18:
        e_g = ground_energy(p)
        result.update({"E_lanczos": e_g, "E_inh": e_h - e_g})
    _emit(cfg, report(cfg, [result], {"log_bae": sol.residual}))
    return 0


def cmd_thermo(cfg: RunConfig) -> int:
    from .thermo import thermo_row

    sizes = cfg.sizes or (cfg.params.sites,)
    rows = [thermo_row(cfg.params.with_(sites=L), cfg.tol) for L in sizes]
    ok = all(r["tail_bound"] <= cfg.tol for r in rows)
    _emit(cfg, report(cfg, rows), rows, THERMO_COLUMNS)
    return 0 if ok else 1


def cmd_strings(cfg: RunConfig) -> int:
    from .spectrum import ground_energy
    from .strings import scan_string_states, string_energy_thermo

    p = cfg.params.with_(J=-1)
    states = scan_string_states(p, tol=max(cfg.tol, 1e-12))
    e_ed = ground_energy(p) if p.sites <= 18 else None
    results = []
    for c in states:
        d = c.to_dict() if "error" not in c.extra else {"seed": c.seed, "error": c.extra["error"]}
        if e_ed is not None and "error" not in c.extra:
            d["energy_minus_lanczos"] = c.energy - e_ed
        results.append(d)
    doc = report(cfg, results, E_lanczos=e_ed, E_string_closed=string_energy_thermo(p))
    _emit(cfg, doc)
    return 0 if any("error" not in c.extra for c in states) else 1


def _string_row(args):
    sites, eta, b = args
    from .strings import string_scaling_row

    t = time.perf_counter()
    row = string_scaling_row(ModelParams(sites, eta, b, J=-1))
    log.info("sites=%d string row in %.1fs", sites, time.perf_counter() - t)
    return row


def _inhom_row(args):
    sites, eta, b = args
    from .bethe import inhomogeneous_contribution

    t = time.perf_counter()
    row = inhomogeneous_contribution(ModelParams(sites, eta, b, J=1), [sites])[0]
    log.info("sites=%d inhomogeneous row in %.1fs", sites, time.perf_counter() - t)
    return {"2N": sites, "eta": eta, "b": b, "E_h": row["E_h"], "E_lanczos": row["E_g"], "E_inh": row["E_inh"]}


def cmd_scaling(cfg: RunConfig) -> int:
    """J = +1: E_inh power law; J = -1: string-energy exponential decay."""
    from .bethe import fit_power_law
    from .strings import fit_exponential

    if not cfg.sizes:
        raise ConfigError("scaling needs a non-empty --sizes list")
    if max(cfg.sizes) > 18:
        raise ConfigError("sizes beyond 18 sites exceed the Lanczos budget")
    p = cfg.params
    jobs = [(L, p.eta, p.b) for L in sorted(set(cfg.sizes))]
    fn = _string_row if p.J == -1 else _inhom_row
    rows, failures = [], []
    for job, res in zip(jobs, _map(cfg, _safe(fn), jobs)):
        if isinstance(res, str):
            failures.append({"2N": job[0], "error": res})
        else:
            rows.append(res)
    rows.sort(key=lambda r: r["2N"])
    fit = None
    if len(rows) >= 4:
        x = [r["2N"] for r in rows]
        if p.J == -1:
            f = fit_exponential(x, [r["delta_E"] for r in rows])
            fit = {"model": "C*exp(alpha*2N)", "C": f.prefactor, "alpha": f.rate, "rms_log": f.residual}
        else:
            f = fit_power_law(x, [r["E_inh"] for r in rows])
            fit = {"model": "C*(2N)^alpha+d", "C": f.prefactor, "alpha": f.exponent, "d": f.offset, "rms": f.rms}
    columns = STRING_COLUMNS if p.J == -1 else INHOM_COLUMNS
    _emit(cfg, report(cfg, rows, fit=fit, failures=failures), rows, columns)
    return 0 if fit is not None else 1


class _safe:
    """Picklable wrapper turning exceptions into messages so one size cannot sink a sweep."""

    def __init__(self, fn):
        self.fn = fn

    def __call__(self, arg):
        try:
            return self.fn(arg)
        except Exception as exc:  # noqa: BLE001
            return f"{type(exc).__name__}: {exc}"


HANDLERS = {
    "verify": cmd_verify,
    "spectrum": cmd_spectrum,
    "table1": cmd_table1,
    "bae": cmd_bae,
    "ground": cmd_ground,
    "thermo": cmd_thermo,
    "strings": cmd_strings,
    "scaling": cmd_scaling,
}

DEFAULTS = {
    "verify": dict(sites=4, eta=1.0, b=0.3, tol=1e-11),
    "table1": dict(sites=4, eta=1.0, b=1.0, tol=1e-12),
    "bae": dict(sites=4, eta=1.0, b=1.0, tol=1e-12),
    "spectrum": dict(sites=4, eta=1.0, b=1.0, tol=1e-8),
    "ground": dict(sites=8, eta=2.0, b=0.3, tol=1e-12),
    "thermo": dict(sites=512, eta=2.0, b=0.3, tol=1e-12),
    "strings": dict(sites=8, eta=1.0, b=0.3, tol=1e-10),
    "scaling": dict(sites=8, eta=1.0, b=0.3, tol=1e-10),
}


def _sizes(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad size list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="odba-chain", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--sites", type=int, help="number of sites 2N")
    ap.add_argument("--eta", type=float)
    ap.add_argument("--b", type=float, help="imaginary part of the inhomogeneity a = i b")
    ap.add_argument("--coupling", type=int, choices=(1, -1), help="sign J of the coupling")
    ap.add_argument("--tol", type=float)
    ap.add_argument("--out", help="output path; '.csv' writes table rows")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--sizes", type=_sizes, default=(), help="comma-separated site counts")
    ap.add_argument("--roots", help="JSON file of root sets to polish instead of discovering them")
    ap.add_argument("--corrupt-r", action="store_true", help=argparse.SUPPRESS)
    return ap


def make_config(ns: argparse.Namespace) -> RunConfig:
    d = DEFAULTS[ns.command]
    J = ns.coupling if ns.coupling is not None else (-1 if ns.command == "strings" else 1)
    params = ModelParams(
        sites=ns.sites if ns.sites is not None else d["sites"],
        eta=ns.eta if ns.eta is not None else d["eta"],
        b=ns.b if ns.b is not None else d["b"],
        J=J,
    )
    return RunConfig(
        command=ns.command,
        params=params,
        tol=ns.tol if ns.tol is not None else d["tol"],
        out_path=ns.out,
        seed=ns.seed,
        workers=ns.workers,
        sizes=ns.sizes,
        roots_path=ns.roots,
        corrupt_r=ns.corrupt_r,
    )


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("ODBA_LOG", "WARNING").upper(), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    ap = build_parser()
    ns = ap.parse_args(argv)
    try:
        cfg = make_config(ns)
        return HANDLERS[cfg.command](cfg)
    except (ConfigError, ValueError, OSError, KeyError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except RuntimeError as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
