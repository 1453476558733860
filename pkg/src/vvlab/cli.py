"""Command-line runner: configuration, orchestration and report files.

Usage::

    vvlab --config run.json --case channel --eps 1e-2,1e-3,3.16e-4,1e-4 \\
          --checks rates,lighthill,sheet,l1 --out results --threads 4

The configuration is a JSON object (see :class:`ExperimentConfig`); flags
override its fields.  The run writes ``report.json`` (sorted keys),
``series.csv`` plus one ``tables/<norm_id>.csv`` per norm series (header
``eps,norm_id,value``, 17 significant digits, viscosities descending),
``sheet_gaps.csv`` and ``summary.txt``.  The exit code is 0 when every
requested check passes, 2 when a check fails and 1 on errors.
"""

from __future__ import annotations

import argparse
import datetime
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from .analysis import (DEFAULT_EPS, EXPECTED_RATES, GridSettings, channel_preset, convergence_sweep,
                       pipe_preset, sheet_gap_summary, uniform_l1_check, vortex_sheet_pairing)

__all__ = ["ConfigError", "ExperimentConfig", "Report", "run_experiment", "emit_outputs", "main",
           "series_field", "DEFAULT_TESTFNS"]

CASES = ("channel", "pipe", "csf")
CHECKS = ("rates", "lighthill", "sheet", "l1")
PRESETS = {"channel": ("reference", "compatible", "zero"), "pipe": ("reference", "csf", "zero"),
           "csf": ("csf", "zero")}
CSV_HEADER = "eps,norm_id,value\n"
GRID_FIELDS = ("n_wall", "n_periodic", "n_steps", "refine")


def _default_grids() -> dict:
    g = asdict(GridSettings())
    return {k: g[k] for k in GRID_FIELDS}


class ConfigError(ValueError):
    """Invalid configuration; ``problems`` lists every violated field."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid configuration: " + "; ".join(self.problems))


# --------------------------------------------------------------------------
# Inline data: truncated Fourier x polynomial series
# --------------------------------------------------------------------------

def series_field(spec: dict, period: float):
    """Callable ``f(s, w, t)`` from a coefficient description.

    ``spec = {"terms": [{"k": 1, "kind": "cos", "poly": [...], "t_poly": [...]}, ...]}``
    gives ``sum trig(2 pi k s / period) * P(w) * Q(t)`` with ``trig`` one of
    ``cos``/``sin``, ``P`` and ``Q`` polynomials in increasing powers
    (``t_poly`` defaults to ``[1]``).  ``{"poly": [...]}`` is shorthand for a
    single ``k = 0`` term.
    """
    terms = spec.get("terms")
    if terms is None:
        terms = [{"k": 0, "kind": "cos", "poly": spec["poly"], "t_poly": spec.get("t_poly", [1.0])}]
    parsed = []
    for term in terms:
        kind = term.get("kind", "cos")
        if kind not in ("cos", "sin"):
            raise ValueError(f"unknown trigonometric kind {kind!r}")
        parsed.append((int(term.get("k", 0)), kind, np.polynomial.Polynomial(term["poly"]),
                       np.polynomial.Polynomial(term.get("t_poly", [1.0]))))

    def f(s, w, t=0.0):
        s = np.asarray(s, dtype=float)
        w = np.asarray(w, dtype=float)
        out = np.zeros(np.broadcast(s, w).shape)
        for k, kind, poly, tpoly in parsed:
            trig = np.cos if kind == "cos" else np.sin
            out = out + trig(2.0 * math.pi * k * s / period) * poly(w) * float(tpoly(t))
        return out

    return f


def _validate_series(spec, name, problems):
    if not isinstance(spec, dict) or ("terms" not in spec and "poly" not in spec):
        problems.append(f"data.{name}: expected an object with 'terms' or 'poly'")
        return
    terms = spec.get("terms", [spec])
    if not isinstance(terms, list) or not terms:
        problems.append(f"data.{name}.terms: expected a nonempty list")
        return
    for i, term in enumerate(terms):
        if not isinstance(term, dict):
            problems.append(f"data.{name}.terms[{i}]: expected an object")
            continue
        if term.get("kind", "cos") not in ("cos", "sin"):
            problems.append(f"data.{name}.terms[{i}].kind: must be 'cos' or 'sin'")
        for key in ("poly", "t_poly"):
            val = term.get(key, [1.0])
            if not (isinstance(val, list) and val and all(isinstance(c, (int, float)) for c in val)):
                problems.append(f"data.{name}.terms[{i}].{key}: expected a nonempty list of numbers")
        if not isinstance(term.get("k", 0), int) or term.get("k", 0) < 0:
            problems.append(f"data.{name}.terms[{i}].k: expected a nonnegative integer")


# --------------------------------------------------------------------------
# Configuration
# --------------------------------------------------------------------------

@dataclass
class ExperimentConfig:
    """One experiment.

    Parameters
    ----------
    case : {"channel", "pipe", "csf"}
    geometry : dict
        Channel: ``h``, ``L``; pipe/csf: ``rL``, ``rR``, ``axial_period``.
    data : dict
        ``{"preset": name}`` or inline series for ``g1``, ``g2`` (and
        optionally ``f1``, ``f2``) in the channel, ``u0phi``, ``u0x`` (and
        ``fphi``, ``fx``) in the pipe; see :func:`series_field`.
    eps_list : list of float
        Strictly decreasing, at least four entries.
    grids : dict
        ``n_wall``, ``n_periodic`` (a power of two), ``n_steps``, ``refine``.
    T : float
    n_samples : int
    checks : list of str
        Subset of ``rates``, ``lighthill`` (channel only), ``sheet``, ``l1``.
    out : str
        Output directory.
    """

    case: str = "channel"
    geometry: dict = field(default_factory=dict)
    data: dict = field(default_factory=lambda: {"preset": "reference"})
    eps_list: list = field(default_factory=lambda: list(DEFAULT_EPS))
    grids: dict = field(default_factory=_default_grids)
    T: float = 0.25
    n_samples: int = 33
    checks: list = field(default_factory=lambda: ["rates", "l1", "sheet"])
    out: str = "vvlab-out"

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError([f"{k}: unknown field" for k in unknown])
        base = cls()
        kwargs = {k: d.get(k, getattr(base, k)) for k in known}
        if "grids" in d:
            kwargs["grids"] = {**_default_grids(), **d["grids"]} if isinstance(d["grids"], dict) else d["grids"]
        cfg = cls(**kwargs)
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        return json.loads(json.dumps(asdict(self)))

    def validate(self) -> None:
        problems = []
        if self.case not in CASES:
            problems.append(f"case: must be one of {', '.join(CASES)}")
        try:
            eps = [float(e) for e in self.eps_list]
            if len(eps) < 4:
                problems.append("eps_list: at least four values are needed")
            if any(not (e > 0 and math.isfinite(e)) for e in eps):
                problems.append("eps_list: values must be positive and finite")
            if any(b >= a for a, b in zip(eps, eps[1:])):
                problems.append("eps_list: values must be strictly decreasing")
        except (TypeError, ValueError):
            problems.append("eps_list: expected a list of numbers")
        g = self.grids if isinstance(self.grids, dict) else {}
        if not isinstance(self.grids, dict):
            problems.append("grids: expected an object")
        unknown = sorted(set(g) - set(GRID_FIELDS))
        problems.extend(f"grids.{k}: unknown field" for k in unknown)
        npd = g.get("n_periodic", 8)
        if not (isinstance(npd, int) and npd >= 4 and npd & (npd - 1) == 0):
            problems.append("grids.n_periodic: must be a power of two >= 4")
        for key, lo in (("n_wall", 9), ("n_steps", 32), ("refine", 1)):
            val = g.get(key, lo)
            if not (isinstance(val, int) and val >= lo):
                problems.append(f"grids.{key}: must be an integer >= {lo}")
        if not (isinstance(self.n_samples, int) and self.n_samples >= 3):
            problems.append("n_samples: must be an integer >= 3")
        elif isinstance(g.get("n_steps"), int) and g["n_steps"] % (self.n_samples - 1):
            problems.append("grids.n_steps: must be a multiple of n_samples - 1")
        if not (isinstance(self.T, (int, float)) and self.T > 0):
            problems.append("T: must be positive")
        if not isinstance(self.checks, list) or any(c not in CHECKS for c in self.checks):
            problems.append(f"checks: must be a list drawn from {', '.join(CHECKS)}")
        elif "lighthill" in self.checks and self.case != "channel":
            problems.append("checks: 'lighthill' applies to the channel case only")
        if len(set(self.checks if isinstance(self.checks, list) else [])) != len(self.checks or []):
            problems.append("checks: duplicate entries")
        geo = self.geometry if isinstance(self.geometry, dict) else None
        if geo is None:
            problems.append("geometry: expected an object")
            geo = {}
        if self.case == "channel":
            for k in sorted(set(geo) - {"h", "L"}):
                problems.append(f"geometry.{k}: unknown field for the channel")
            for k in ("h", "L"):
                if k in geo and not (isinstance(geo[k], (int, float)) and geo[k] > 0):
                    problems.append(f"geometry.{k}: must be positive")
        elif self.case in ("pipe", "csf"):
            for k in sorted(set(geo) - {"rL", "rR", "axial_period"}):
                problems.append(f"geometry.{k}: unknown field for the pipe")
            rL, rR = geo.get("rL", 1.0), geo.get("rR", 3.0)
            if not (isinstance(rL, (int, float)) and isinstance(rR, (int, float)) and 0 < rL < rR):
                problems.append("geometry.rL/rR: need 0 < rL < rR")
            ap = geo.get("axial_period", 1.0)
            if not (isinstance(ap, (int, float)) and ap > 0):
                problems.append("geometry.axial_period: must be positive")
        data = self.data if isinstance(self.data, dict) else None
        if data is None:
            problems.append("data: expected an object")
        elif "preset" in data:
            if self.case in PRESETS and data["preset"] not in PRESETS[self.case]:
                problems.append(f"data.preset: unknown preset {data['preset']!r} for case {self.case}")
            if geo and "preset" in data:
                problems.append("geometry: presets fix their own geometry; remove the geometry fields")
            if len(data) > 1:
                problems.append("data: a preset cannot be combined with inline series")
        else:
            required = ("g1", "g2") if self.case == "channel" else ("u0phi", "u0x")
            optional = ("f1", "f2") if self.case == "channel" else ("fphi", "fx")
            for k in required:
                if k not in data:
                    problems.append(f"data.{k}: required for inline data")
            for k in sorted(data):
                if k not in required + optional:
                    problems.append(f"data.{k}: unknown field")
                else:
                    _validate_series(data[k], k, problems)
        if not isinstance(self.out, str) or not self.out:
            problems.append("out: must be a nonempty path")
        if problems:
            raise ConfigError(problems)

    # -- problem construction --------------------------------------------
    def problem(self):
        data = self.data
        if "preset" in data:
            name = data["preset"]
            if self.case == "channel":
                return channel_preset(name, T=self.T)
            return pipe_preset(name, T=self.T)
        if self.case == "channel":
            from .channel import ChannelProblem

            h, L = float(self.geometry.get("h", 1.0)), float(self.geometry.get("L", 1.0))
            g1 = series_field(data["g1"], L)
            g2 = series_field(data["g2"], L)
            f1 = series_field(data["f1"], L) if "f1" in data else None
            f2 = series_field(data["f2"], L) if "f2" in data else None
            return ChannelProblem(lambda z: g1(0.0, z), lambda x, z: g2(x, z),
                                  None if f1 is None else (lambda z, t: f1(0.0, z, t)),
                                  None if f2 is None else (lambda x, z, t: f2(x, z, t)),
                                  h=h, L=L, T=self.T, name="channel-inline")
        from .pipe import PipeProblem

        geo = self.geometry
        two_pi = 2.0 * math.pi
        u0phi = series_field(data["u0phi"], two_pi)
        u0x = series_field(data["u0x"], two_pi)
        fphi = series_field(data["fphi"], two_pi) if "fphi" in data else None
        fx = series_field(data["fx"], two_pi) if "fx" in data else None
        return PipeProblem(lambda r: u0phi(0.0, r), lambda ph, r: u0x(ph, r),
                           None if fphi is None else (lambda r, t: fphi(0.0, r, t)),
                           None if fx is None else (lambda ph, r, t: fx(ph, r, t)),
                           rL=float(geo.get("rL", 1.0)), rR=float(geo.get("rR", 3.0)), T=self.T,
                           axial_period=float(geo.get("axial_period", 1.0)), name=f"{self.case}-inline")

    def grid_settings(self) -> GridSettings:
        return GridSettings(n_samples=self.n_samples, **{**_default_grids(), **self.grids})


# --------------------------------------------------------------------------
# Running
# --------------------------------------------------------------------------

def _channel_testfns():
    return {
        "wall_weight": lambda x, z: (0.0 * x * z, 1.0 + z * z + 0.0 * x, 0.0 * x * z),
        "fourier_mode": lambda x, z: (np.cos(2 * np.pi * x) * (1.0 - z), 0.0 * x * z, 0.0 * x * z),
        "mixed": lambda x, z: (np.cos(2 * np.pi * x) * np.exp(z), 1.0 + z ** 2 + 0.0 * x,
                               np.sin(2 * np.pi * x) * z),
    }


def _pipe_testfns():
    return {
        "radial_weight": lambda ph, r: (0.0 * ph * r, r * r + 0.0 * ph, 0.0 * ph * r),
        "fourier_mode": lambda ph, r: (np.cos(ph) * (4.0 - r), 0.0 * ph * r, 0.0 * ph * r),
        "mixed": lambda ph, r: (np.sin(ph) * r, np.cos(ph) + r + 0.0 * ph, np.cos(ph) * r),
    }


DEFAULT_TESTFNS = {"channel": _channel_testfns, "pipe": _pipe_testfns}


@dataclass
class Report:
    """Everything a run produces; ``payload()`` is the JSON tree."""

    config: ExperimentConfig
    table: object
    checks: dict
    sheet_gaps: dict
    errors: list = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return all(c["verdict"] == "pass" for c in self.checks.values())

    def payload(self) -> dict:
        t = self.table
        tables = {}
        if t is not None:
            tables = {
                "case": t.case,
                "metadata": t.metadata,
                "diagnostics": {repr(k): v for k, v in t.diagnostics.items()},
                "series": [{"norm_id": s.norm_id, "eps": list(s.eps_list), "values": list(s.values)}
                           for s in t.series],
                "fits": [asdict(f) for f in t.fits],
            }
        return _jsonable({
            "config": self.config.to_dict(),
            "table": tables,
            "checks": self.checks,
            "sheet_gaps": self.sheet_gaps,
            "errors": self.errors,
            "environment": {"vvlab": __version__, "numpy": np.__version__,
                            "determinism": "no random numbers; results depend only on the config"},
        })


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def _csf_sheet_direct(problem, pairing, testfn) -> float:
    """Largest relative gap between the CSF sheet term and direct quadrature.

    For rigid-rotation data the sheet term reduces to the boundary integral
    ``rL int u_phi_0(rL) psi_x(phi, rL) dphi - rR int u_phi_0(rR) psi_x(phi, rR) dphi``.
    """
    from .oracle import reference_quadrature

    def wall(rw):
        u = float(problem.u0phi(np.array([rw]))[0])
        integrand = lambda ph: u * np.asarray(testfn(np.asarray(ph), np.full_like(np.asarray(ph), rw))[1])
        return rw * reference_quadrature(integrand, 0.0, 2 * math.pi, tol=1e-13)

    direct = wall(problem.rL) - wall(problem.rR)
    worst = 0.0
    for t, s in zip(pairing.times, pairing.sheet):
        if t > 0:
            worst = max(worst, abs(s - direct) / max(abs(direct), 1e-300))
    return worst


def run_experiment(cfg: ExperimentConfig, threads: int = 1) -> Report:
    """Run the sweep and the requested checks.

    Per-viscosity solver failures are recorded in the table diagnostics and
    fail the affected checks; they never disappear silently.
    """
    cfg.validate()
    problem = cfg.problem()
    gs = cfg.grid_settings()
    policy = gs.channel if cfg.case == "channel" else gs.pipe
    need_runs = any(c in cfg.checks for c in ("lighthill", "sheet"))
    table = convergence_sweep(cfg.case, problem, cfg.eps_list, policy, threads=threads,
                              keep_trajectories=need_runs)
    checks: dict = {}
    gaps: dict = {}
    failed_eps = sorted(table.diagnostics, reverse=True)
    for name in cfg.checks:
        if name == "rates":
            entries = {}
            for norm_id, (target, tol) in sorted(EXPECTED_RATES[cfg.case].items()):
                try:
                    f = table.get_fit(norm_id)
                except KeyError:
                    entries[norm_id] = {"verdict": "fail", "reason": "series missing"}
                    continue
                v = "degenerate" if f.degenerate else ("pass" if f.within(target, tol) else "fail")
                entries[norm_id] = {"verdict": v, "slope": f.slope, "target": target, "tol": tol}
            ok = bool(entries) and all(e["verdict"] == "pass" for e in entries.values()) and not failed_eps
            checks[name] = {"verdict": "pass" if ok else "fail", "series": entries}
        elif name == "lighthill":
            from .channel import lighthill_bounds_check

            per_eps = {}
            for eps in sorted(table.runs, reverse=True):
                reps = lighthill_bounds_check(table.runs[eps]["viscous"], problem)
                per_eps[repr(eps)] = {r.bound_id: {"verdict": "pass" if r.verdict else "fail",
                                                   "worst_ratio": r.worst_ratio} for r in reps}
            ok = bool(per_eps) and not failed_eps and all(
                b["verdict"] == "pass" for d in per_eps.values() for b in d.values())
            checks[name] = {"verdict": "pass" if ok else "fail", "per_eps": per_eps, "slack": 0.05}
        elif name == "sheet":
            geom = "channel" if cfg.case == "channel" else "pipe"
            entries = {}
            eps_done = sorted(table.runs, reverse=True)
            for tname, tf in DEFAULT_TESTFNS[geom]().items():
                prs = [vortex_sheet_pairing(table.runs[e]["viscous"], table.runs[e]["euler"], tf, geom)
                       for e in eps_done]
                summ = sheet_gap_summary(prs) if prs else {"gaps": [], "inversions": 0,
                                                           "final_relative_gap": math.inf}
                ok = summ["inversions"] <= 1 and summ["final_relative_gap"] <= 0.10
                entry = {"verdict": "pass" if ok else "fail", **summ}
                if cfg.case == "csf" and prs:
                    dev = _csf_sheet_direct(problem, prs[-1], tf)
                    entry["direct_quadrature_rel_dev"] = dev
                    if dev > 1e-8:
                        entry["verdict"] = "fail"
                entries[tname] = entry
                gaps[tname] = {"eps": eps_done, "gap": summ["gaps"]}
            ok = bool(entries) and not failed_eps and all(e["verdict"] == "pass" for e in entries.values())
            checks[name] = {"verdict": "pass" if ok else "fail", "testfns": entries}
        elif name == "l1":
            rep = uniform_l1_check(table)
            ok = rep.verdict and not failed_eps
            checks[name] = {"verdict": "pass" if ok else "fail", **rep.info,
                            "values": list(rep.lhs), "eps": list(rep.points)}
    errors = [f"eps={e!r}: {table.diagnostics[e]}" for e in failed_eps]
    return Report(cfg, table, checks, gaps, errors)


# --------------------------------------------------------------------------
# Output
# --------------------------------------------------------------------------

def _csv(rows) -> str:
    return CSV_HEADER + "".join(f"{eps:.17g},{nid},{val:.17g}\n" for eps, nid, val in rows)


def _write(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def emit_outputs(report: Report, out_dir: str) -> list:
    """Write the report files into ``out_dir``; returns the written paths."""
    try:
        os.makedirs(os.path.join(out_dir, "tables"), exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create {out_dir}: {exc}") from exc
    written = []
    payload = report.payload()
    payload["generated_at"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    path = os.path.join(out_dir, "report.json")
    _write(path, json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n")
    written.append(path)
    t = report.table
    rows = t.rows() if t is not None else []
    path = os.path.join(out_dir, "series.csv")
    _write(path, _csv(rows))
    written.append(path)
    for s in (t.series if t is not None else ()):
        path = os.path.join(out_dir, "tables", f"{s.norm_id}.csv")
        _write(path, _csv((e, s.norm_id, v) for e, v in zip(s.eps_list, s.values)))
        written.append(path)
    gap_rows = []
    for tname in sorted(report.sheet_gaps):
        g = report.sheet_gaps[tname]
        gap_rows.extend((e, f"sheet_gap_{tname}", v) for e, v in zip(g["eps"], g["gap"]))
    gap_rows.sort(key=lambda r: -r[0])
    path = os.path.join(out_dir, "sheet_gaps.csv")
    _write(path, _csv(gap_rows))
    written.append(path)
    path = os.path.join(out_dir, "summary.txt")
    _write(path, summary_text(report))
    written.append(path)
    return written


def summary_text(report: Report) -> str:
    cfg = report.config
    lines = [f"vvlab {__version__}: case={cfg.case} data={json.dumps(cfg.data, sort_keys=True)}",
             f"eps = {', '.join(f'{e:g}' for e in cfg.eps_list)}", ""]
    t = report.table
    if t is not None and t.fits:
        lines.append("fitted rates:")
        for f in t.fits:
            slope = "degenerate" if f.degenerate else f"{f.slope:+.4f}"
            lines.append(f"  {f.norm_id:<20s} {slope}")
        lines.append("")
    for name, c in report.checks.items():
        lines.append(f"check {name}: {c['verdict'].upper()}")
        if name == "rates":
            for nid, e in c["series"].items():
                s = e.get("slope")
                s = "n/a" if s is None or (isinstance(s, float) and math.isnan(s)) else f"{s:.4f}"
                lines.append(f"  {nid:<20s} {e['verdict']:<10s} slope {s}"
                             + (f" target {e['target']} +- {e['tol']}" if "target" in e else ""))
        elif name == "l1":
            lines.append(f"  max/min ratio {c['ratio']:.4f}; L2 vorticity slope {c['l2_slope']:.4f}")
        elif name == "sheet":
            for tn, e in c["testfns"].items():
                lines.append(f"  {tn:<16s} {e['verdict']:<5s} inversions {e['inversions']}"
                             f" final gap/sheet {e['final_relative_gap']:.3e}")
        elif name == "lighthill":
            for eps, d in c["per_eps"].items():
                lines.append(f"  eps={eps}: " + ", ".join(f"{k} {v['verdict']} ({v['worst_ratio']:.3f})"
                                                          for k, v in d.items()))
    for e in report.errors:
        lines.append(f"error: {e}")
    return "\n".join(lines) + "\n"


def _parse_args(argv):
    ap = argparse.ArgumentParser(prog="vvlab", description="Vanishing-viscosity rate experiments.")
    ap.add_argument("--config", help="JSON experiment configuration")
    ap.add_argument("--case", choices=CASES)
    ap.add_argument("--eps", help="comma-separated viscosities (descending)")
    ap.add_argument("--out", help="output directory")
    ap.add_argument("--checks", help=f"comma-separated subset of {','.join(CHECKS)}")
    ap.add_argument("--threads", type=int, default=1, help="worker threads for the sweep")
    return ap.parse_args(argv)


def load_config(args) -> ExperimentConfig:
    d: dict = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            d = json.load(fh)
        if not isinstance(d, dict):
            raise ConfigError(["config: top level must be an object"])
    if args.case:
        d["case"] = args.case
        if "data" not in d:
            d["data"] = {"preset": "csf" if args.case == "csf" else "reference"}
    elif d.get("case") == "csf" and "data" not in d:
        d["data"] = {"preset": "csf"}
    if args.eps:
        try:
            d["eps_list"] = [float(e) for e in args.eps.split(",") if e.strip()]
        except ValueError:
            raise ConfigError(["--eps: expected comma-separated numbers"]) from None
    if args.checks:
        d["checks"] = [c.strip() for c in args.checks.split(",") if c.strip()]
    if args.out:
        d["out"] = args.out
    return ExperimentConfig.from_dict(d)


def main(argv: Optional[list] = None) -> int:
    args = _parse_args(sys.argv[1:] if argv is None else argv)
    try:
        cfg = load_config(args)
        if args.threads < 1:
            raise ConfigError(["--threads: must be at least 1"])
        report = run_experiment(cfg, threads=args.threads)
        emit_outputs(report, cfg.out)
    except ConfigError as exc:
        for p in exc.problems:
            print(f"config error: {p}", file=sys.stderr)
        return 1
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(summary_text(report))
    return 0 if report.all_passed else 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
