"""Command-line front end.

    mastertau spectrum CONFIG
    mastertau verify {hirota,qc,det-tau,all} CONFIG
    mastertau rs flow CONFIG
    mastertau solve classical CONFIG

Each command writes one JSON report (plus a CSV for ``rs flow``) into the
output directory.  Exit status: 0 all checks passed, 1 a check failed,
2 invalid configuration, 3 non-generic parameters.
Set ``MASTERTAU_LOG`` (e.g. ``INFO`` or ``DEBUG``) for log output.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .model import NonGenericSpecError, SpinChainSpec

log = logging.getLogger("mastertau")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NONGENERIC = 0, 1, 2, 3

_COMPLEX = {
    "oneOf": [
        {"type": "number"},
        {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
    ]
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "mastertau run configuration",
    "type": "object",
    "required": ["N", "u", "w"],
    "additionalProperties": False,
    "properties": {
        "N": {"type": "integer", "minimum": 1},
        "n": {"type": "integer", "minimum": 0},
        "u": {"type": "array", "items": _COMPLEX},
        "w": {"type": "array", "items": _COMPLEX},
        "K": {"type": "integer", "minimum": 0, "default": 6},
        "seed": {"type": "integer", "minimum": 0, "default": 42},
        "tol": {"type": "number", "exclusiveMinimum": 0, "default": 1e-8},
        "samples": {"type": "integer", "minimum": 1, "default": 20},
        "horizon": {"type": "number", "default": 0.5},
        "steps": {"type": "integer", "minimum": 2, "default": 51},
        "flow": {"type": "integer", "minimum": 1, "default": 1},
        "record": {"type": "integer", "minimum": 0, "default": 0},
        "budget": {"type": ["integer", "null"], "minimum": 1, "default": None},
        "output_dir": {"type": "string"},
    },
}

DEFAULTS = {k: v["default"] for k, v in CONFIG_SCHEMA["properties"].items() if "default" in v}


class ConfigError(ValueError):
    pass


def _complex(x) -> complex:
    return complex(x[0], x[1]) if isinstance(x, list) else complex(x)


def load_config(path) -> dict:
    """Read, validate and complete a JSON configuration."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        jsonschema.validate(raw, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"invalid config: {exc.message}") from exc
    if len(raw["w"]) != raw["N"]:
        raise ConfigError(f"invalid config: expected {raw['N']} twist eigenvalues")
    if "n" in raw and raw["n"] != len(raw["u"]):
        raise ConfigError(f"invalid config: n = {raw['n']} but {len(raw['u'])} sites given")
    cfg = dict(DEFAULTS)
    cfg.update(raw)
    cfg["n"] = len(raw["u"])
    return cfg


def config_hash(cfg: dict) -> str:
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def spec_from_config(cfg: dict) -> SpinChainSpec:
    return SpinChainSpec(cfg["N"], tuple(_complex(x) for x in cfg["u"]),
                         tuple(_complex(x) for x in cfg["w"]), cfg["K"], cfg["seed"], cfg["tol"])


def to_jsonable(obj):
    """Complex numbers become ``[re, im]``; arrays become lists."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(x) for x in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(x) for x in obj.tolist()]
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def _finite(x: float):
    return float(x) if np.isfinite(x) else None


def write_report(out_dir: Path, name: str, cfg: dict, command: str, body: dict) -> Path:
    report = {"tool": "mastertau", "version": __version__, "command": command,
              "config_hash": config_hash(cfg)}
    report.update(body)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    with open(path, "w") as fh:
        json.dump(to_jsonable(report), fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")
    return path


def _lam_key(lam) -> str:
    return "(" + ",".join(str(x) for x in lam) + ")"


def _pmap(fn, items, workers: int):
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ---- commands ---------------------------------------------------------------

def cmd_spectrum(spec, cfg, args):
    from .spinchain import spectrum

    recs = spectrum(spec)
    counts = {}
    for r in recs:
        counts[_lam_key(r.m)] = counts.get(_lam_key(r.m), 0) + 1
    records = [{"m": list(r.m), "H": r.H,
                "tau": {_lam_key(lam): c for lam, c in r.tau.items()}} for r in recs]
    body = {"passed": True, "count": len(recs), "sector_counts": counts, "records": records}
    return "spectrum.json", body


def _hirota_record(args_tuple):
    from . import mkp
    from .symfun import ShiftedTimes

    idx, tau, samples, seed = args_tuple
    rng = np.random.default_rng([seed, idx])
    zero = ShiftedTimes()

    def cz(scale=1.5):
        return complex(*rng.normal(size=2)) * scale

    worst = dict.fromkeys(("three_term", "shifted", "linear", "linear_adjoint", "residue"), 0.0)
    truncated = False
    for _ in range(samples):
        u = cz(1.0)
        r1 = mkp.hirota3(tau, u, zero, cz(), cz(), cz())
        r2 = mkp.hirota3_shifted(tau, u, zero, cz(), cz())
        truncated |= r1.truncated or r2.truncated
        worst["three_term"] = max(worst["three_term"], abs(r1))
        worst["shifted"] = max(worst["shifted"], abs(r2))
        if tau.spec.n:
            z = cz(2.0)
            worst["linear"] = max(worst["linear"], abs(mkp.linear_problem_residual(tau, u, z)))
            worst["linear_adjoint"] = max(
                worst["linear_adjoint"], abs(mkp.linear_problem_residual(tau, u, z, adjoint=True)))
            for m in range(1, min(3, tau.K) + 1):
                worst["residue"] = max(worst["residue"], abs(mkp.ba10_residual(tau, u, m)))
    return worst, truncated


def truncation_scan(tau, rng, Ks=(4, 6, 8), samples: int = 5, scale: float = 0.05):
    """Hirota residuals at small nonzero times for several truncations."""
    from . import mkp
    from .symfun import ShiftedTimes

    rows = []
    for _ in range(samples):
        base = tuple(scale * rng.random(4) * np.exp(2j * np.pi * rng.random(4)))
        t = ShiftedTimes(base)
        u = complex(*rng.normal(size=2))
        zs = [complex(*rng.normal(size=2)) * 1.5 for _ in range(3)]
        res = []
        for K in Ks:
            cut = mkp.TauSeries(tau.spec, {lam: c for lam, c in tau.coeffs.items()
                                           if lam.size <= K}, tau.eigenvector)
            res.append(abs(mkp.hirota3(cut, u, t, *zs)))
        rows.append(res)
    return rows


def cmd_verify_hirota(spec, cfg, args):
    from . import mkp
    from .spinchain import spectrum

    recs = spectrum(spec)
    taus = [mkp.TauSeries.from_record(r, spec) for r in recs]
    results = _pmap(_hirota_record, [(i, t, cfg["samples"], cfg["seed"])
                                     for i, t in enumerate(taus)], args.workers)
    limits = {"three_term": 1e-10, "shifted": 1e-10, "linear": 1e-8, "linear_adjoint": 1e-8,
              "residue": 1e-8}
    rows, passed = [], True
    for r, (worst, trunc) in zip(recs, results):
        ok = all(worst[k] <= limits[k] for k in limits) and not trunc
        passed &= ok
        rows.append({"m": list(r.m), "H": r.H, "max_residuals": worst,
                     "truncated": trunc, "passed": ok})
    body = {"passed": passed, "limits": limits, "records": rows}
    if spec.K >= 8 and spec.n:
        rng = np.random.default_rng(cfg["seed"])
        scan = truncation_scan(taus[0], rng)
        body["truncation_scan"] = {"K": [4, 6, 8], "residuals": scan,
                                   "note": "reported only; not part of the pass/fail status"}
    return "verify_hirota.json", body


def cmd_verify_qc(spec, cfg, args):
    from .rs import char_poly, twist_poly, y0_from_record
    from .spinchain import spectrum

    recs = spectrum(spec, with_tau=False)
    rows, passed = [], True
    for r in recs:
        if spec.n == 0:
            rows.append({"m": list(r.m), "charpoly": [1.0], "expected": [1.0],
                         "max_error": 0.0, "passed": True})
            continue
        got = char_poly(y0_from_record(r, spec))
        want = twist_poly(r.m, spec.w)
        err = float(np.max(np.abs(got - want)))
        ok = err <= cfg["tol"]
        passed &= ok
        rows.append({"m": list(r.m), "H": r.H, "charpoly": got, "expected": want,
                     "max_error": err, "passed": ok})
    return "verify_qc.json", {"passed": passed, "tolerance": cfg["tol"], "records": rows}


def det_tau_error(rec, spec, degree: int = 4) -> float:
    """Largest relative coefficient mismatch between the two tau expansions."""
    from . import mkp, rs
    from .series import weighted_monomials

    d = rs.tau_det_expansion(rec, spec, degree)
    s = mkp.tau_expansion(mkp.TauSeries.from_record(rec, spec), degree)
    worst = 0.0
    for e in weighted_monomials(degree):
        a, b = d.coefficient(e), s.coefficient(e)
        size = max(len(a), len(b))
        a = np.pad(a, (0, size - len(a)))
        b = np.pad(b, (0, size - len(b)))
        ref = np.max(np.abs(b))
        if ref == 0:
            worst = max(worst, float(np.max(np.abs(a))))
        else:
            worst = max(worst, float(np.max(np.abs(a - b)) / ref))
    return worst


def cmd_verify_det_tau(spec, cfg, args):
    from .spinchain import spectrum

    if spec.K < 4:
        raise ConfigError("verify det-tau needs K >= 4")
    recs = spectrum(spec)
    rows, passed = [], True
    for r in recs:
        err = det_tau_error(r, spec)
        ok = err <= cfg["tol"]
        passed &= ok
        rows.append({"m": list(r.m), "H": r.H, "max_relative_error": err, "passed": ok})
    return "verify_det_tau.json", {"passed": passed, "degree": 4, "tolerance": cfg["tol"],
                                   "records": rows}


def cmd_rs_flow(spec, cfg, args):
    from . import rs
    from .spinchain import spectrum

    recs = spectrum(spec, with_tau=False)
    if cfg["record"] >= len(recs):
        raise ConfigError(f"record index {cfg['record']} out of range ({len(recs)} records)")
    rec = recs[cfg["record"]]
    m = cfg["flow"]
    times = np.linspace(0.0, cfg["horizon"], cfg["steps"])
    state = rs.RSPhase(np.array(spec.u), -np.asarray(rec.H))
    traj = rs.integrate(state, m, times)
    Y0 = rs.lax(state).Y
    inv0 = [np.trace(np.linalg.matrix_power(Y0, j)) for j in range(1, spec.n + 1)]
    drift = 0.0
    for k in range(len(times)):
        Y = rs.lax(traj.state(k)).Y
        for j in range(1, spec.n + 1):
            drift = max(drift, abs(np.trace(np.linalg.matrix_power(Y, j)) - inv0[j - 1]))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    rs.write_trajectory_csv(out_dir / "trajectory.csv", times, traj.q)
    body = {"record": {"m": list(rec.m), "H": rec.H}, "flow": m,
            "times": {"start": 0.0, "stop": cfg["horizon"], "count": len(times)},
            "integrals": inv0, "max_integral_drift": drift, "csv": "trajectory.csv"}
    ok = drift <= cfg["tol"]
    if m == 1:
        roots = rs.track_roots(rec, spec, times)
        gap = float(np.max(np.abs(roots - traj.q), initial=0.0))
        body["max_deviation_from_spectral_curve"] = gap
        ok &= gap <= 1e-6
    body["passed"] = bool(ok)
    return "rs_flow.json", body


def cmd_solve_classical(spec, cfg, args):
    from . import qcsolver
    from .spinchain import spectrum

    recs = spectrum(spec, with_tau=False)
    sectors = qcsolver.solve_all(spec, cfg["budget"])
    sols = [s for sec in sectors for s in sec]
    report = qcsolver.match_spectra(sols, recs)
    rows = [{"m": list(sec.m), "target": sec.target, "found": len(sec), "starts": sec.starts,
             "rejected": len(sec.rejected),
             "solutions": [{"H": s.H, "max_residual": s.max_residual} for s in sec]}
            for sec in sectors]
    passed = report.perfect and all(sec.shortfall == 0 for sec in sectors)
    body = {"passed": bool(passed), "sectors": rows,
            "matching": {"pairs": [list(p) for p in report.pairs],
                         "unmatched_solutions": report.unmatched_solutions,
                         "unmatched_records": report.unmatched_records,
                         "max_distance": _finite(report.max_distance),
                         "tolerance": report.tol}}
    return "solve_classical.json", body


def cmd_verify_all(spec, cfg, args):
    summary = {}
    for name, fn in (("hirota", cmd_verify_hirota), ("qc", cmd_verify_qc),
                     ("det-tau", cmd_verify_det_tau), ("rs-flow", cmd_rs_flow),
                     ("solve-classical", cmd_solve_classical)):
        if name == "det-tau" and spec.K < 4:
            summary[name] = "skipped (K < 4)"
            continue
        if name in ("rs-flow", "solve-classical") and spec.n == 0:
            summary[name] = "skipped (n = 0)"
            continue
        fname, body = fn(spec, cfg, args)
        write_report(Path(args.out), fname, cfg, name, body)
        summary[name] = "pass" if body["passed"] else "FAIL"
    passed = all(v != "FAIL" for v in summary.values())
    return "verify_all.json", {"passed": passed, "summary": summary}


COMMANDS = {
    ("spectrum",): cmd_spectrum,
    ("verify", "hirota"): cmd_verify_hirota,
    ("verify", "qc"): cmd_verify_qc,
    ("verify", "det-tau"): cmd_verify_det_tau,
    ("verify", "all"): cmd_verify_all,
    ("rs", "flow"): cmd_rs_flow,
    ("solve", "classical"): cmd_solve_classical,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mastertau", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(q):
        q.add_argument("config", help="JSON configuration file")
        q.add_argument("--out", default=None, help="output directory (default: config "
                       "output_dir or the current directory)")
        q.add_argument("--workers", type=int, default=1, help="worker threads (default 1)")

    common(sub.add_parser("spectrum", help="joint spectrum and tau coefficients"))
    v = sub.add_parser("verify", help="verification suites")
    v.add_argument("what", choices=["hirota", "qc", "det-tau", "all"])
    common(v)
    r = sub.add_parser("rs", help="classical dynamics")
    r.add_argument("what", choices=["flow"])
    common(r)
    s = sub.add_parser("solve", help="inverse spectral problem")
    s.add_argument("what", choices=["classical"])
    common(s)
    return p


def run(argv=None) -> int:
    level = os.environ.get("MASTERTAU_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    key = (args.command,) + ((args.what,) if hasattr(args, "what") else ())
    try:
        cfg = load_config(args.config)
        if args.out is None:
            args.out = cfg.get("output_dir", ".")
        spec = spec_from_config(cfg)
        spec.check_generic()
        fname, body = COMMANDS[key](spec, cfg, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NonGenericSpecError as exc:
        print(f"error: non-generic spec, violated invariant: {exc.invariant}", file=sys.stderr)
        return EXIT_NONGENERIC
    path = write_report(Path(args.out), fname, cfg, " ".join(key), body)
    status = "passed" if body["passed"] else "FAILED"
    print(f"{' '.join(key)}: {status} ({path})")
    return EXIT_OK if body["passed"] else EXIT_FAIL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
