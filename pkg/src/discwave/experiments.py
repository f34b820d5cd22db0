"""Run orchestration and persistence: single runs, parameter sweeps, lifespan studies.

Every run writes into its own directory::

    config.ini     the resolved configuration
    trace.csv      per-step observables
    report.json    verdict, hypothesis check, constants and monitor log
    plot.svg       U_n and max|u| against n with the blow-up threshold (optional)
    manifest.json  version, config, verdict summary and sha256 of the files above
"""
from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .bounds import LifespanFit, lifespan_fit
from .config import RunConfig, render_config
from .observables import Trace
from .simulation import RunReport, run
from .svg import LinePlot

log = logging.getLogger(__name__)

OUTPUT_ROOT_ENV = "DISCWAVE_OUTPUT_ROOT"
SWEEP_AXES = ("p", "epsilon", "N0", "h", "R")
LIFESPAN_TOLERANCE = 0.30


def output_root() -> Path:
    return Path(os.environ.get(OUTPUT_ROOT_ENV, "."))


def resolve_output_dir(cfg: RunConfig, override: str | Path | None = None) -> Path:
    """``override`` wins; otherwise the config's output_dir under the output root."""
    if override is not None:
        return Path(override)
    out = Path(cfg.output_dir)
    return out if out.is_absolute() else output_root() / out


# manifests -------------------------------------------------------------------------


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir: Path, files: list[str], config_text: str, verdict: dict) -> dict:
    manifest = {
        "version": __version__,
        "config": config_text,
        "verdict": verdict,
        "files": [{"name": name, "sha256": sha256_file(out_dir / name), "bytes": (out_dir / name).stat().st_size}
                  for name in files],
    }
    _write_json(out_dir / "manifest.json", manifest)
    bad = verify_manifest(out_dir)
    if bad:
        raise OSError(f"manifest check failed after write for {', '.join(bad)}")
    return manifest


def verify_manifest(out_dir: str | Path) -> list[str]:
    """Names of listed files that are missing or whose digest does not match."""
    out_dir = Path(out_dir)
    manifest = json.loads((out_dir / "manifest.json").read_text())
    bad = []
    for entry in manifest["files"]:
        path = out_dir / entry["name"]
        if not path.is_file() or sha256_file(path) != entry["sha256"]:
            bad.append(entry["name"])
    return bad


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=False, allow_nan=False, default=_json_default) + "\n")


def _json_default(obj):
    if hasattr(obj, "item"):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _finite_or_none(obj):
    """JSON has no inf/nan; replace them by null recursively."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _finite_or_none(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite_or_none(v) for v in obj]
    return obj


# single runs -----------------------------------------------------------------------


@dataclass
class RunOutcome:
    out_dir: Path
    trace: Trace
    report: RunReport
    files: list[str] = field(default_factory=list)

    @property
    def summary(self) -> dict:
        v = self.report.verdict
        return {
            "status": v.status.value,
            "N_b": v.N_b,
            "i_b": list(v.i_b) if v.i_b is not None else None,
            "n": v.n,
            "steps": self.report.steps,
            "applicable": self.report.hypotheses.applicable,
            "monitor_failures": [m.bound_id for m in self.report.monitor_failures],
        }


def trace_plot(trace: Trace, title: str) -> LinePlot:
    plot = LinePlot(title=title, xlabel="n", ylabel="value (log scale)", logy=True)
    plot.add(trace.n, trace.U, "U_n")
    plot.add(trace.n, trace.max_abs, "max |u_n|")
    plot.add(trace.n, trace.threshold, "blow-up threshold", color="#555555", dashed=True)
    return plot


def run_experiment(cfg: RunConfig, out_dir: str | Path) -> RunOutcome:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    trace, report = run(cfg.params, cfg.f, cfg.g, monitors=cfg.monitors, epsilon=cfg.epsilon, seed=cfg.seed)
    config_text = render_config(cfg)
    (out_dir / "config.ini").write_text(config_text)
    trace.to_csv(out_dir / "trace.csv")
    _write_json(out_dir / "report.json", _finite_or_none(report.to_dict()))
    files = ["config.ini", "trace.csv", "report.json"]
    if cfg.plot:
        p = cfg.params
        title = f"d={p.d} p={p.p:g} N0={p.N0} eps={cfg.epsilon:g}: {report.verdict.status.value}"
        (out_dir / "plot.svg").write_text(trace_plot(trace, title).render())
        files.append("plot.svg")
    outcome = RunOutcome(out_dir, trace, report, files)
    write_manifest(out_dir, files, config_text, outcome.summary)
    log.info("wrote %s", out_dir)
    return outcome


# sweeps ----------------------------------------------------------------------------

SUMMARY_COLUMNS = ("index", "axis", "value", "status", "N_b", "i_b", "steps", "applicable",
                   "monitor_failures", "dir", "error")


@dataclass
class SweepResult:
    axis: str
    rows: list[dict]
    out_dir: Path

    @property
    def all_failed(self) -> bool:
        return all(r["error"] for r in self.rows)

    def n_b(self) -> list[int | None]:
        return [r["N_b"] for r in self.rows]


def parse_values(text: str) -> list[str]:
    vals = [v.strip() for v in text.split(",") if v.strip()]
    if not vals:
        raise ValueError("empty value list")
    return vals


def _coerce(axis: str, raw) -> float | int:
    if axis in ("N0", "R"):
        if isinstance(raw, str):
            return int(raw, 10)
        if float(raw) != int(raw):
            raise ValueError(f"{axis} needs integer values, got {raw!r}")
        return int(raw)
    return float(raw)


def _sweep_job(job: tuple[int, RunConfig, str, object, Path]) -> dict:
    index, base, axis, raw, sub = job
    row = {"index": index, "axis": axis, "value": raw, "status": "", "N_b": None, "i_b": None, "steps": None,
           "applicable": None, "monitor_failures": "", "dir": sub.name, "error": ""}
    try:
        cfg = base.with_value(axis, _coerce(axis, raw))
        outcome = run_experiment(cfg, sub)
    except Exception as exc:  # one bad value must not stop the sweep
        row["error"] = f"{type(exc).__name__}: {exc}"
        log.warning("sweep %s=%s failed: %s", axis, raw, row["error"])
        return row
    s = outcome.summary
    row.update(status=s["status"], N_b=s["N_b"], i_b=s["i_b"], steps=s["steps"], applicable=s["applicable"],
               monitor_failures=";".join(s["monitor_failures"]))
    return row


def _label(value) -> str:
    return str(value).replace("/", "_").replace(" ", "")


def sweep(cfg: RunConfig, axis: str, values: list, out_dir: str | Path, workers: int | None = None) -> SweepResult:
    """One run per value, each in ``out_dir/NNN_axis=value``; summary.csv in input order."""
    if axis not in SWEEP_AXES:
        raise ValueError(f"unknown sweep axis {axis!r}; expected one of {', '.join(SWEEP_AXES)}")
    values = list(values)
    if not values:
        raise ValueError("sweep needs at least one value")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    jobs = [(k, cfg, axis, v, out_dir / f"{k:03d}_{axis}={_label(v)}") for k, v in enumerate(values)]
    workers = workers or os.cpu_count() or 1
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            rows = list(pool.map(_sweep_job, jobs))
    else:
        rows = [_sweep_job(j) for j in jobs]
    with open(out_dir / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for r in rows:
            cells = dict(r)
            cells["i_b"] = "" if r["i_b"] is None else " ".join(str(c) for c in r["i_b"])
            w.writerow(["" if cells[c] is None else cells[c] for c in SUMMARY_COLUMNS])
    return SweepResult(axis, rows, out_dir)


# lifespan --------------------------------------------------------------------------


class LifespanAborted(RuntimeError):
    def __init__(self, epsilons: list[float], budget: int):
        listed = ", ".join(f"{e:g}" for e in epsilons)
        super().__init__(f"no blow-up for epsilon {listed}; raise scheme.step_budget (currently {budget}) "
                         f"or drop the smallest amplitudes")
        self.epsilons = epsilons


def reference_slope(d: int, p: float) -> float | None:
    """-(p-1)/(2-d(p-1)), the lifespan exponent for subcritical p; None otherwise."""
    denom = 2.0 - d * (p - 1.0)
    return -(p - 1.0) / denom if denom > 0 else None


@dataclass
class LifespanResult:
    fit: LifespanFit
    runs: list[tuple[float, int]]
    reference: float | None
    sweep: SweepResult

    @property
    def within_tolerance(self) -> bool | None:
        if self.reference is None:
            return None
        return abs(self.fit.slope - self.reference) <= LIFESPAN_TOLERANCE * abs(self.reference)


def check_epsilons(epsilons: list[float]) -> None:
    if len(epsilons) < 3:
        raise ValueError(f"lifespan study needs at least 3 epsilons, got {len(epsilons)}")
    if any(not e > 0 for e in epsilons):
        raise ValueError("epsilons must be positive")
    if math.log10(max(epsilons) / min(epsilons)) < 2.0 - 1e-12:
        raise ValueError("epsilons must span at least two decades")


def lifespan(cfg: RunConfig, epsilons: list[float], out_dir: str | Path,
             workers: int | None = None) -> LifespanResult:
    epsilons = [float(e) for e in epsilons]
    check_epsilons(epsilons)
    out_dir = Path(out_dir)
    sw = sweep(cfg, "epsilon", epsilons, out_dir, workers)
    missing = [e for e, r in zip(epsilons, sw.rows) if r["status"] != "BlewUp"]
    if missing:
        raise LifespanAborted(missing, cfg.params.step_budget)
    runs = [(e, int(r["N_b"])) for e, r in zip(epsilons, sw.rows)]
    fit = lifespan_fit(runs)
    result = LifespanResult(fit, runs, reference_slope(cfg.params.d, cfg.params.p), sw)

    _write_json(out_dir / "lifespan.json", _finite_or_none({
        "runs": [{"epsilon": e, "N_b": nb} for e, nb in runs],
        "fit": fit.to_dict(),
        "reference_slope": result.reference,
        "tolerance": LIFESPAN_TOLERANCE,
        "within_tolerance": result.within_tolerance,
    }))
    plot = LinePlot(title=f"lifespan, slope {fit.slope:.4f}", xlabel="epsilon", ylabel="N_b",
                    logx=True, logy=True)
    plot.add([e for e, _ in runs], [nb for _, nb in runs], "N_b", markers=True)
    plot.add([e for e, _ in runs], [math.exp(fit.intercept) * e**fit.slope for e, _ in runs],
             "least-squares fit", dashed=True)
    (out_dir / "lifespan.svg").write_text(plot.render())
    return result
