import logging
import math
import os
from pathlib import Path
from time import time
from typing import Any, Callable, Dict, List

import numpy as np

from cpoly import classify_permutation, loop_permutation, track_roots
from flow import (
    first_return,
    integrate,
    quasi_rotation_closed_form,
    quasi_sweep,
    quasi_transit,
    return_data,
    rotation_along_loop,
)
from models import ModelHandle, ModelKind
from monodromy import discriminant_scan, monodromy_verdict
from pipeline_steps.custom_exception import LaxMonodromyException, UsageError
from pipeline_steps.util import performance_monitor, rows_to_csv, write_json_file
from .config import RunConfig
from .manifest import RunManifest

BIFURCATION_COLUMNS = ["h", "k", "log10_abs_discriminant", "class"]
ROOT_COLUMNS = ["s"] + [f"{part}_r{i}" for i in range(1, 5) for part in ("re", "im")]
ROTATION_COLUMNS = ["s", "h", "k", "theta_unwrapped"]
QUASI_COLUMNS = ["eps", "delta", "closed_form", "error"]
NUMERICAL_FAILURE = 3


class OutputWriter:
    """Writes the files of one run and records each in the manifest."""

    def __init__(self, out_dir: Path, manifest: RunManifest):
        self.out_dir = out_dir
        self.manifest = manifest

    def csv(self, name: str, rows: List[Dict[str, Any]], columns: List[str]) -> Path:
        path = rows_to_csv(self.out_dir / name, rows, columns)
        self.manifest.record(path, self.out_dir)
        logging.info(f"wrote {path} ({len(rows)} rows)")
        return path

    def json(self, name: str, payload: Dict[str, Any]) -> Path:
        path = write_json_file(self.out_dir / name, payload)
        self.manifest.record(path, self.out_dir)
        logging.info(f"wrote {path}")
        return path


def run_bifurcation(cfg: RunConfig, m: ModelHandle, writer: OutputWriter) -> int:
    scan = discriminant_scan(m, cfg.h_range, cfg.k_range, cfg.grid)
    writer.csv("bifurcation.csv", scan.grid, BIFURCATION_COLUMNS)
    candidates = [
        {"h": c.point.h, "k": c.point.k, "class": c.kind, "abs_discriminant": c.abs_discriminant}
        for c in scan.candidates
    ]
    writer.json("summary.json", {"candidates": candidates})
    return 0


def run_roots(cfg: RunConfig, m: ModelHandle, writer: OutputWriter) -> int:
    loop = cfg.loop()
    track = track_roots(loop.coefficient_path(m), loop.n_samples, cfg.guard)
    rows = []
    for s, roots in zip(track.params, track.tracked_roots()):
        row = {"s": s}
        for index, root in enumerate(roots, start=1):
            row[f"re_r{index}"] = root.real
            row[f"im_r{index}"] = root.imag
        rows.append(row)
    writer.csv("roots.csv", rows, ROOT_COLUMNS)

    perm = loop_permutation(track)
    writer.json(
        "summary.json",
        {
            "permutation": perm.cycle_notation(),
            "permutation_class": classify_permutation(perm, track.rootsets[0]),
            "n_points": len(track),
        },
    )
    return 0


def _flow_row(m: ModelHandle, t: float, state: np.ndarray) -> Dict[str, float]:
    point = m.reduce(state)
    row = {"t": t}
    row.update(zip(m.state_labels, state))
    row.update(re_lam=point.lam.real, im_lam=point.lam.imag, re_mu=point.mu.real, im_mu=point.mu.imag)
    return row


def _uniform_times(t0: float, t1: float, step: float) -> np.ndarray:
    step = math.copysign(step, t1 - t0)
    times = np.arange(t0, t1, step)
    return np.append(times, t1)


def run_flow(cfg: RunConfig, m: ModelHandle, writer: OutputWriter) -> int:
    if m.kind == ModelKind.QUASI_LAX:
        transit = quasi_transit(cfg.rho, cfg.phi, m.ball_radius, cfg.tol, cfg.method)
        times, states = transit.times, transit.states
        summary = {
            "rho": cfg.rho,
            "phi": cfg.phi,
            "ball_radius": m.ball_radius,
            "t_entry": transit.t_entry,
            "t_exit": transit.t_exit,
            "theta": transit.theta,
            "closed_form": quasi_rotation_closed_form(cfg.rho, cfg.phi, m.ball_radius),
        }
    else:
        h, k = cfg.fiber
        s0 = m.seed_state(h, k)
        if cfg.t_max is None:
            _, traj = first_return(m, s0, cfg.tol, cfg.method)
            data = return_data(traj)
            summary = {"h": h, "k": k, "T": data.T, "theta": data.theta, "theta_im_defect": data.theta_im_defect}
        else:
            traj = integrate(m, s0, cfg.t_max, cfg.tol, cfg.method)
            summary = {"h": h, "k": k, "t_max": cfg.t_max, "theta": complex(traj.theta[-1])}
        times, states = traj.times, traj.states
        if cfg.step is not None:
            times = _uniform_times(float(traj.times[0]), float(traj.times[-1]), cfg.step)
            states = traj.dense_states(times)

    rows = [_flow_row(m, float(t), state) for t, state in zip(times, states)]
    writer.csv("flow.csv", rows, ["t", *m.state_labels, "re_lam", "im_lam", "re_mu", "im_mu"])
    writer.json("summary.json", summary)
    return 0


def run_rotation(cfg: RunConfig, m: ModelHandle, writer: OutputWriter) -> int:
    rotation = rotation_along_loop(m, cfg.loop(), cfg.tol, cfg.method)
    writer.csv("rotation.csv", rotation.rows(), ROTATION_COLUMNS)
    writer.json(
        "summary.json",
        {
            "delta": rotation.delta,
            "delta_over_two_pi": rotation.delta / (2 * math.pi),
            "n_points": len(rotation.s),
        },
    )
    return 0


def run_monodromy(cfg: RunConfig, m: ModelHandle, writer: OutputWriter) -> int:
    verdict, result = monodromy_verdict(m, cfg.loop(), cfg.guard)
    writer.json("monodromy.json", verdict.model_dump(mode="json"))
    if result.error is None:
        return 0
    logging.error(f"Error in monodromy: {verdict.status}: {verdict.error}")
    writer.manifest.error = verdict.error
    return getattr(result.error, "exit_code", NUMERICAL_FAILURE)


def run_quasi(cfg: RunConfig, m: ModelHandle, writer: OutputWriter) -> int:
    rows = quasi_sweep(cfg.rho, cfg.eps, m.ball_radius, cfg.tol)
    writer.csv("quasi.csv", rows, QUASI_COLUMNS)
    final = rows[-1]
    writer.json(
        "summary.json",
        {
            "rho": cfg.rho,
            "ball_radius": m.ball_radius,
            "eps": final["eps"],
            "delta": final["delta"],
            "closed_form": final["closed_form"],
            "relative_error": final["error"] / (2 * math.pi),
        },
    )
    return 0


COMMANDS: Dict[str, Callable[[RunConfig, ModelHandle, OutputWriter], int]] = {
    "bifurcation": run_bifurcation,
    "roots": run_roots,
    "flow": run_flow,
    "rotation": run_rotation,
    "monodromy": run_monodromy,
    "quasi": run_quasi,
}


def _prepare_output_dir(out_dir: Path) -> Path:
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise UsageError(f"cannot create output directory {out_dir}: {e}") from e
    if not os.access(out_dir, os.W_OK):
        raise UsageError(f"output directory {out_dir} is not writable")
    return out_dir


def execute(cfg: RunConfig) -> int:
    """
    Run one command and return its exit code: 0 on success, 2 for verdict
    failures, 3 for numerical failures, 64 for usage errors. The manifest is
    written when the command succeeded or failed after emitting files.
    """
    try:
        out_dir = _prepare_output_dir(Path(cfg.out))
    except UsageError as e:
        logging.error(e.message)
        return e.exit_code

    manifest = RunManifest(command=cfg.command, config=cfg.model_dump(mode="json"))
    writer = OutputWriter(out_dir, manifest)
    start_time = time()
    try:
        with performance_monitor(f"laxmono {cfg.command}"):
            exit_code = COMMANDS[cfg.command](cfg, cfg.build_model(), writer)
    except LaxMonodromyException as e:
        logging.error(f"Error in {cfg.command}: {type(e).__name__}: {e.message}")
        exit_code, manifest.error = e.exit_code, f"{type(e).__name__}: {e.message}"
    except ValueError as e:
        logging.error(f"Error in {cfg.command}: {e}")
        exit_code, manifest.error = UsageError.exit_code, str(e)
    except Exception as e:
        logging.error(f"Unexpected error occured in {cfg.command}: {e}", exc_info=True)
        exit_code, manifest.error = NUMERICAL_FAILURE, str(e)

    if exit_code == 0 or manifest.files:
        manifest.status = "ok" if exit_code == 0 else "partial"
        manifest.exit_code = exit_code
        manifest.duration_seconds = time() - start_time
        manifest.write(out_dir)
    return exit_code
