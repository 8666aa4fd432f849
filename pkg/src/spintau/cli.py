"""
Command line front end.

Every command writes a JSON report named by a hash of its configuration
(``<command>-<hash>.json``) plus CSV files for fitted series.  Reports are
never overwritten; run metadata such as timestamps goes to a sidecar
``.meta.json`` so that equal configurations give byte-identical reports.
The exit status is 0 iff every check of the command passed.
"""

import argparse
import csv
import hashlib
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import __version__
from .errors import SpinTauError

__all__ = ["RunConfig", "ConfigParse", "main", "run", "write_report"]

COMMANDS = ("theta", "periods", "spinor", "rbr", "tau-scale", "degenerate", "picard", "verify-all")
FAMILIES = ("irreducible", "reducible", "reducible-g3", "reducible-g4", "zg")
QUANTITIES = ("periods", "theta", "spinor", "tau")


class ConfigParse(SpinTauError, ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    curve: str = None
    omega: str = None
    z: str = None
    eta: str = None
    tol: float = None
    grid: tuple = None
    out: str = "reports"
    seed: int = 0
    level: str = "quick"
    g: int = None
    family: str = None
    quantity: str = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigParse("unknown command %r" % self.command)
        if self.tol is not None and not self.tol > 0:
            raise ConfigParse("tolerance must be positive")
        if self.level not in ("quick", "full"):
            raise ConfigParse("level must be quick or full")
        if self.grid is not None:
            t0, ratio, n = self.grid
            if not (t0 > 0 and 0 < ratio < 1 and int(n) >= 3):
                raise ConfigParse("grid needs t0 > 0, 0 < ratio < 1 and n >= 3")
        if self.family is not None and self.family not in FAMILIES:
            raise ConfigParse("family must be one of %s" % ", ".join(FAMILIES))
        if self.quantity is not None and self.quantity not in QUANTITIES:
            raise ConfigParse("quantity must be one of %s" % ", ".join(QUANTITIES))

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ConfigParse("unknown keys %s" % sorted(extra))
        d = dict(d)
        if d.get("grid") is not None:
            d["grid"] = tuple(d["grid"])
        return cls(**d)

    def hash_input(self):
        """Canonical description used for the report name (file contents, not paths)."""
        d = asdict(self)
        d.pop("out")
        for key in ("curve", "omega"):
            if d[key] is not None:
                with open(d[key], "rb") as fh:
                    d[key] = hashlib.sha256(fh.read()).hexdigest()
        return json.dumps(d, sort_keys=True, default=list)


def _parse_grid(s):
    try:
        t0, ratio, n = s.split(",")
        return float(t0), float(ratio), int(n)
    except ValueError as exc:
        raise ConfigParse("grid must be t0,ratio,n") from exc


def _parse_z(s, g):
    if s is None:
        return np.zeros(g, dtype=complex)
    parts = [p for p in s.split(";") if p.strip()]
    z = np.array([complex(*map(float, p.split(","))) for p in parts])
    if len(z) != g:
        raise ConfigParse("argument has %d components, expected %d" % (len(z), g))
    return z


# -- output -------------------------------------------------------------------------


def _clean(v):
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, np.ndarray):
        return _clean(v.tolist())
    if isinstance(v, (complex, np.complexfloating)):
        return [float(np.real(v)), float(np.imag(v))]
    if isinstance(v, np.generic):
        return v.item()
    if hasattr(v, "to_json"):
        return _clean(v.to_json())
    if isinstance(v, float) and not np.isfinite(v):
        return str(v)
    return v


def _write_new(path, text):
    """Append-only write; returns the path actually used."""
    stem, ext = os.path.splitext(path)
    k = 0
    while os.path.exists(path):
        with open(path) as fh:
            if fh.read() == text:
                return path
        k += 1
        path = "%s.%d%s" % (stem, k, ext)
    with open(path, "w") as fh:
        fh.write(text)
    return path


def write_series_csv(path, t, values, slope=float("nan"), intercept=float("nan"), kind="loglog"):
    """CSV with columns t, value_re, value_im, abs, fitted_slope, residual."""
    t = np.asarray(t, dtype=float)
    v = np.asarray(values, dtype=complex)
    rows = []
    for ti, vi in zip(t, v):
        if kind == "loglog" and np.isfinite(intercept):
            res = np.log(abs(vi)) - (slope * np.log(ti) + intercept) if abs(vi) > 0 else float("nan")
        elif kind == "limit":
            res = abs(vi.real - slope)
        else:
            res = float("nan")
        rows.append([repr(float(x)) for x in (ti, vi.real, vi.imag, abs(vi), slope, res)])
    import io

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "value_re", "value_im", "abs", "fitted_slope", "residual"])
    w.writerows(rows)
    return _write_new(path, buf.getvalue())


def write_report(cfg, payload, series=(), elapsed=None):
    """Write the JSON report, its CSV series and the metadata sidecar."""
    os.makedirs(cfg.out, exist_ok=True)
    h = hashlib.sha256(cfg.hash_input().encode()).hexdigest()[:16]
    stem = os.path.join(cfg.out, "%s-%s" % (cfg.command, h))
    csvs = []
    for s in series:
        p = write_series_csv("%s-%s.csv" % (stem, s["name"]), s["t"], s["values"], s.get("slope", float("nan")),
                             s.get("intercept", float("nan")), s.get("kind", "loglog"))
        csvs.append(os.path.basename(p))
    doc = {"command": cfg.command, "config": json.loads(cfg.hash_input()), "version": __version__,
           "result": _clean(payload), "series": csvs}
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    path = _write_new(stem + ".json", text)
    meta = os.path.splitext(path)[0] + ".meta.json"
    runs = []
    if os.path.exists(meta):
        with open(meta) as fh:
            runs = json.load(fh)
    runs.append({"timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"), "elapsed_s": elapsed})
    with open(meta, "w") as fh:
        json.dump(runs, fh, indent=2)
    return path


# -- commands -------------------------------------------------------------------------


def _surface(cfg, **kw):
    from .surface import Surface, load_curve

    if cfg.curve is None:
        raise ConfigParse("--curve is required")
    curve, marking = load_curve(cfg.curve)
    return Surface(curve, marking, **kw)


def _eta(cfg, g, default_parity=1):
    from .spin import enumerate_characteristics
    from .theta import Characteristic

    if cfg.eta is None:
        return enumerate_characteristics(g, default_parity)[0]
    try:
        eta = Characteristic.from_string(cfg.eta)
    except ValueError as exc:
        raise ConfigParse("bad characteristic %r" % cfg.eta) from exc
    if eta.g != g:
        raise ConfigParse("characteristic %s has genus %d, curve has %d" % (cfg.eta, eta.g, g))
    return eta


def cmd_theta(cfg):
    from .theta import PeriodMatrix, theta_batch

    if cfg.omega is not None:
        with open(cfg.omega) as fh:
            om = np.array([[complex(*c) for c in row] for row in json.load(fh)["omega"]])
        P = PeriodMatrix(om)
    else:
        P = _surface(cfg).period_matrix
    # order-2 rounding keeps the certified bound near 1e-12 for moderate Omega
    tol = cfg.tol or 1e-10
    eta = _eta(cfg, P.g, 0)
    z = _parse_z(cfg.z, P.g)
    (v, gr, he), err = theta_batch(eta, P, z, tol, order=2)
    return {"eta": str(eta), "z": z, "value": v, "gradient": gr, "hessian": he, "error_bound": err,
            "checks": {"error_bound": err <= tol}}, []


def cmd_periods(cfg):
    S = _surface(cfg)
    P = S.period_matrix
    tol = cfg.tol or 1e-8
    imin = float(np.min(np.linalg.eigvalsh(P.Y)))
    return {"Omega": P.Omega, "A": S.A, "B": S.B, "symmetry_defect": S.symmetry_defect, "min_eig_im": imin,
            "marking": S.marking.to_json(),
            "checks": {"symmetric": S.symmetry_defect < tol, "im_positive": imin > 0}}, []


def _differential(cfg, S):
    from .acceptance import simple_zero_differential
    from .spin import spinor

    if cfg.eta == "simple":
        return simple_zero_differential(S.curve, S.marking)
    return S, spinor(S, _eta(cfg, S.g))


def cmd_spinor(cfg):
    from .spin import homological_coordinates

    S, sq = _differential(cfg, _surface(cfg))
    co = homological_coordinates(sq)
    zeros = [{"x": q.x, "y": q.y, "kind": q.kind, "multiplicity": m} for q, m in sq.zeros]
    odd = any(m % 2 for _, m in sq.zeros)
    return {"eta": str(getattr(sq, "eta", cfg.eta)), "poly": sq.poly, "zeros": zeros, "z": co.z, "dual": co.dual,
            "paths": co.paths, "notes": sq.notes, "checks": {"even_multiplicities": not odd or cfg.eta == "simple"}}, []


def cmd_rbr(cfg):
    from .bergman import BergmanKernel, cycle_integrals, rbr_identity
    from .spin import homological_coordinates

    S, sq = _differential(cfg, _surface(cfg))
    co = homological_coordinates(sq)
    K = BergmanKernel(S)
    integ = cycle_integrals(K, sq, co)
    lhs, rhs, defect = rbr_identity(sq, co, integ)
    tol = cfg.tol or 1e-4
    return {"lhs": lhs, "rhs": rhs, "defect": defect, "integrals": integ, "dual": co.dual,
            "checks": {"defect": defect < tol}}, []


def cmd_tau_scale(cfg):
    from .bergman import BergmanKernel, tau_scaling_exponent

    S, sq = _differential(cfg, _surface(cfg))
    val, err = tau_scaling_exponent(BergmanKernel(S), sq, steps=8)
    target = 6 * (len(sq.zeros) + sum(m - 1.0 / (m + 1) for m in sq.multiplicities))
    tol = cfg.tol or 1e-3
    return {"exponent": val, "quadrature_error": err, "target": target,
            "checks": {"exponent": abs(val - target) < tol}}, []


def _family(cfg):
    from . import acceptance as acc
    from .degeneration import irreducible_family, reducible_family, zg_family

    kw = {}
    if cfg.grid is not None:
        kw = {"t0": cfg.grid[0], "ratio": cfg.grid[1], "n": int(cfg.grid[2])}
    name = cfg.family or "irreducible"
    if name == "irreducible":
        return irreducible_family(acc.IRREDUCIBLE_BASE, **kw)
    if name == "reducible":
        return reducible_family(acc.CLUSTER_G2, acc.FAR_G2, **kw)
    if name == "reducible-g3":
        return reducible_family(acc.CLUSTER_G2, acc.FAR_G4, **kw)
    if name == "reducible-g4":
        return reducible_family(acc.CLUSTER_G4, acc.FAR_G4, **kw)
    return zg_family(acc.ZG_CURVE, **kw)


def _fit_series(name, t, values, fit, kind="loglog"):
    return {"name": name, "t": t, "values": values, "slope": fit.slope, "intercept": fit.intercept, "kind": kind}


def cmd_degenerate(cfg):
    from .degeneration import (
        ExponentFit,
        check_spinor_degeneration,
        check_theta_degeneration,
        fit_tau_boundary_exponent,
        period_degeneration,
    )
    from .theta import Characteristic

    fam = _family(cfg)
    q = cfg.quantity or "periods"
    g = fam.genus
    eta = None if cfg.eta is None else _eta(cfg, g)
    out = {"family": fam.to_json(), "quantity": q}
    series, checks = [], {}
    ts = fam.grid()
    if q == "periods":
        r = period_degeneration(fam)
        om = r["Omega"]
        if fam.kind == "irreducible":
            L = np.log(ts)
            rate = 2j * np.pi * np.diff(om[:, g - 1, g - 1]) / np.diff(L)
            series.append(_fit_series("log_slope", ts[1:], rate, r["log_slope"], "limit"))
            out["fits"] = {"log_slope": r["log_slope"], "others": r["others"]}
            checks = {"log_slope": abs(r["log_slope"].slope - 1) < 0.02, "others": r["others"].slope >= 0.9}
        elif fam.kind == "reducible":
            j = fam.j
            nrm = np.linalg.norm(om[:, :j, j:].reshape(len(ts), -1), axis=1)
            series.append(_fit_series("offdiag", ts, nrm, r["offdiag"]))
            out["fits"] = {"offdiag": r["offdiag"]}
            out["singular_values"] = r["singular_values"]
            out["rank1_ratio"] = r["rank1_ratio"]
            checks = {"offdiag": abs(r["offdiag"].slope - 1) < 0.1, "rank1": r["rank1_ratio"] < 0.05}
        else:
            raise ConfigParse("periods do not degenerate along the zg family")
    elif q == "theta":
        default = "1100" if fam.kind == "reducible" else "00" * g
        eta = eta or Characteristic.from_string(default[: 2 * g].ljust(2 * g, "0"))
        r = check_theta_degeneration(fam, eta)
        targets = {"residual": (2.0, 0.1), "correction": (0.5, 0.05)}
        if fam.kind == "irreducible" and eta.top[g - 1] == 1:
            targets["leading"] = (0.125, 0.01)
        out["eta"] = str(eta)
        out["fits"] = {k: v for k, v in r.items() if isinstance(v, ExponentFit)}
        main_fit = "residual" if fam.kind == "reducible" else "leading"
        series.append(_fit_series(main_fit, ts, r["values"], r[main_fit]))
        checks = {k: abs(f.slope - targets[k][0]) < targets[k][1] for k, f in out["fits"].items() if k in targets}
    elif q == "spinor":
        eta = eta or Characteristic.from_string("1100".ljust(2 * g, "0"))
        r = check_spinor_degeneration(fam, eta)
        targets = {"C1": (0.0, 0.05), "C2": (1.0, 0.05), "correction": (0.5, 0.05)}
        if fam.kind == "irreducible" and eta.top[g - 1] == 1:
            targets["leading"] = (0.125, 0.02)
        out["eta"] = str(eta)
        out["fits"] = {k: v for k, v in r.items() if isinstance(v, ExponentFit)}
        if fam.kind == "reducible":
            series.append(_fit_series("C1", ts, r["values"][0], r["C1"]))
            series.append(_fit_series("C2", ts, r["values"][1], r["C2"]))
        else:
            series.append(_fit_series("leading", ts, r["values"], r["leading"]))
        checks = {k: abs(f.slope - targets[k][0]) < targets[k][1] for k, f in out["fits"].items() if k in targets}
    else:
        if fam.kind != "zg_collision":
            eta = eta or Characteristic.from_string("1100".ljust(2 * g, "0"))
        r = fit_tau_boundary_exponent(fam, eta)
        f = r["fit"]
        out.update({"eta": str(eta), "parameter": r["parameter"], "fit": f,
                    "euler": [row["euler"] for row in r["rows"]]})
        series.append(_fit_series("tau_rate", r["t"], r["rates"], f, "limit"))
        if fam.kind == "irreducible":
            target = 6.0 if eta.top[g - 1] == 1 else 16.0
        elif fam.kind == "reducible":
            target = 16.0 * (g - fam.j)
        else:
            target = 16.0 / 5.0
        out["target"] = target
        checks["exponent"] = abs(f.slope - target) < 0.05 * target
    out["checks"] = checks
    return out, series


def cmd_picard(cfg):
    from .picard import farkas_mismatch, solve_farkas, solve_theta_null

    g = cfg.g or 3
    z = solve_farkas(g) if g >= 2 else None
    th = solve_theta_null(g)
    out = {"g": g, "Theta_null": th.to_dict(), "latex": {"Theta_null": th.to_latex()}}
    checks = {}
    if z is not None:
        out["Z_g"] = z.to_dict()
        out["latex"]["Z_g"] = z.to_latex()
        checks["closed_formula"] = farkas_mismatch(z) is None
    return dict(out, checks=checks), []


def cmd_verify_all(cfg):
    from .acceptance import run_checks

    results = run_checks(cfg.level, cfg.seed)
    return {"level": cfg.level, "results": [{"criterion": r.number, "name": r.name, "passed": r.passed,
                                             "detail": r.detail} for r in results],
            "checks": {"criterion_%d" % r.number: r.passed for r in results}}, []


HANDLERS = {
    "theta": cmd_theta,
    "periods": cmd_periods,
    "spinor": cmd_spinor,
    "rbr": cmd_rbr,
    "tau-scale": cmd_tau_scale,
    "degenerate": cmd_degenerate,
    "picard": cmd_picard,
    "verify-all": cmd_verify_all,
}


def run(cfg):
    """Execute a command; returns (exit status, report path, payload)."""
    t0 = time.time()
    payload, series = HANDLERS[cfg.command](cfg)
    path = write_report(cfg, payload, series, elapsed=round(time.time() - t0, 3))
    ok = all(payload.get("checks", {}).values())
    return (0 if ok else 1), path, payload


def build_parser():
    p = argparse.ArgumentParser(prog="spintau", description=__doc__.strip().splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON file with RunConfig fields")
    p.add_argument("--curve", help="curve JSON {branch_points: [[re, im], ...], marking: {a, b}}")
    p.add_argument("--omega", help="JSON {omega: [[[re, im], ...], ...]} for the theta command")
    p.add_argument("--z", help="theta argument as 're,im;re,im;...'")
    p.add_argument("--eta", help="characteristic bits, e.g. 1100 (or 'simple' for (x - x0) dx / y)")
    p.add_argument("--tol", type=float)
    p.add_argument("--grid", help="t0,ratio,n")
    p.add_argument("--out", default="reports")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--level", default="quick", choices=("quick", "full"))
    p.add_argument("--g", type=int)
    p.add_argument("--family", choices=FAMILIES)
    p.add_argument("--quantity", choices=QUANTITIES)
    return p


def arg_given(argv, name):
    argv = sys.argv[1:] if argv is None else argv
    flag = "--" + name
    return any(a == flag or a.startswith(flag + "=") for a in argv)


def main(argv=None):
    args = build_parser().parse_args(argv)
    d = {k: v for k, v in vars(args).items() if v is not None and k != "config"}
    try:
        if args.config:
            with open(args.config) as fh:
                base = json.load(fh)
            if not isinstance(base, dict):
                raise ConfigParse("config file must hold a JSON object")
            d = dict(base, **{k: v for k, v in d.items() if k == "command" or arg_given(argv, k)})
        if isinstance(d.get("grid"), str):
            d["grid"] = _parse_grid(d["grid"])
        cfg = RunConfig.from_dict(d)
        status, path, payload = run(cfg)
    except SpinTauError as exc:
        mod = type(exc).__module__.rsplit(".", 1)[-1]
        print("error [%s.%s]: %s" % (mod, type(exc).__name__, exc), file=sys.stderr)
        return 2
    if cfg.command == "verify-all":
        for r in payload["results"]:
            print("[%s] criterion %d: %s" % ("PASS" if r["passed"] else "FAIL", r["criterion"], r["name"]))
    print(json.dumps({"report": path, "status": status, "checks": payload.get("checks", {})}, sort_keys=True))
    return status


if __name__ == "__main__":
    sys.exit(main())
