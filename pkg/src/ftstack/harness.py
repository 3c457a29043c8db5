"""Scenario-driven experiment runner.

Runs the trial batches behind each experiment family, aggregates reports with
Wilson confidence intervals, and writes diff-able artifacts: a YAML report,
columnar trace files, and plot-ready CSV tables. Reports contain no wall
clock and reference artifacts by relative name, so a re-run with the same
seeds is byte-identical regardless of where or how parallel it ran.

Per-trial randomness comes from SeedSequence([scenario_seed, trial_index])
split into a scenario stream (geometry sampling) and a sensor stream, which
makes trial results independent of execution order and worker count.
"""

from __future__ import annotations

import dataclasses
import math
import re
from concurrent.futures import ProcessPoolExecutor
from itertools import repeat
from pathlib import Path

import numpy as np
import yaml

from .estimation import DegenerateNormalForce, estimate_contact
from .policy import (
    PlacementOutcome,
    StackPlan,
    calibrate_for_held,
    press_and_estimate,
    propose_shift,
    run_placement,
    run_stack,
)
from .scenario import (
    PLACEMENT_FAMILIES,
    Scenario,
    build_object,
    build_policy,
    build_sensor,
    build_window,
    build_world,
    load_scenario,
    sample_start_xy,
)
from .spatial import FrameId, Wrench

REPORT_VERSION = 1
WILSON_Z = 1.959963984540054  # two-sided 95%


class ScenarioFamilyError(ValueError):
    """Subcommand invoked on a scenario of the wrong family."""


def wilson_interval(successes: int, trials: int, z: float = WILSON_Z):
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    if not 0 <= successes <= trials:
        raise ValueError("successes must lie in [0, trials]")
    p = successes / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2.0 * trials)) / denom
    half = z * math.sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials)) / denom
    return center - half, center + half


def angle_error_deg(proposed, reference) -> float:
    """Planar angle between a proposed shift and the reference direction."""
    u = np.asarray(proposed, dtype=float)[:2]
    v = np.asarray(reference, dtype=float)[:2]
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return float("nan")
    c = np.clip(float(u @ v) / (nu * nv), -1.0, 1.0)
    return float(np.degrees(np.arccos(c)))


def _trial_rngs(seed: int, trial: int):
    ss = np.random.SeedSequence([seed, trial])
    scn, sen = ss.spawn(2)
    return np.random.default_rng(scn), np.random.default_rng(sen)


def _listify(a) -> list:
    return [float(v) for v in np.asarray(a, dtype=float).ravel()]


def _trace_rows(trace) -> tuple[list, list]:
    descents = [[[float(v) for v in row] for row in series.tolist()]
                for series in trace.descent_series]
    iterations = [
        {
            "index": rec.index,
            "x": float(rec.press_xy[0]),
            "y": float(rec.press_xy[1]),
            "tip_z": float(rec.tip_z),
            "residual_norm": float(rec.residual_norm),
            "press_force": float(rec.press_force),
            "released": bool(rec.released),
            "degenerate": bool(rec.degenerate),
            "shift_x": float(rec.shift[0]),
            "shift_y": float(rec.shift[1]),
        }
        for rec in trace.iterations
    ]
    return descents, iterations


# -- per-trial runners (top level so worker processes can import them) --------


def _placement_trial(scenario: Scenario, trial: int) -> dict:
    rng_scn, rng_sen = _trial_rngs(scenario.seed, trial)
    row: dict = {"trial": trial}
    try:
        world = build_world(scenario)
        obj = build_object(scenario, rng_scn)
        start_xy = sample_start_xy(scenario, rng_scn)
        world.hold(obj)
        sensor = build_sensor(scenario, rng_sen)
        config = build_policy(scenario)
        window = build_window(scenario)
        place = scenario.placement
        calibration = calibrate_for_held(
            world, sensor, config, window,
            place["calibration_xy"], place["hover_tip_z"],
        )
        trace = run_placement(
            world, sensor, calibration, config, start_xy,
            start_tip_z=place["hover_tip_z"], window=window,
        )
    except Exception as exc:  # per-trial failures are recorded, never fatal
        row["error"] = f"{type(exc).__name__}: {exc}"
        return row

    descents, iterations = _trace_rows(trace)
    row.update({
        "outcome": trace.outcome.value,
        "iterations": len(trace.iterations),
        "start_xy": _listify(start_xy),
        "com_offset": _listify(obj.com_offset),
        "final_com": None if trace.final_com is None else _listify(trace.final_com),
        "descents": descents,
        "iteration_rows": iterations,
    })

    stable_xy = place["stable_xy"]
    if stable_xy is not None:
        angles = []
        for rec in trace.iterations:
            if rec.released or rec.degenerate or rec.est_offset is None:
                angles.append(None)
                continue
            to_stable = np.asarray(stable_xy) - rec.press_xy
            angles.append(angle_error_deg(rec.shift, to_stable))
        row["shift_angle_errors_deg"] = angles
        first = trace.iterations[0] if trace.iterations else None
        if first is not None and not first.released and not first.degenerate:
            com_after = first.press_xy + first.shift + obj.com_offset[:2]
            row["oneshot_com_error"] = float(
                np.linalg.norm(com_after - np.asarray(stable_xy))
            )
        else:
            row["oneshot_com_error"] = None
    return row


def _stack_trial(scenario: Scenario, trial: int) -> dict:
    rng_scn, rng_sen = _trial_rngs(scenario.seed, trial)
    row: dict = {"trial": trial}
    try:
        world = build_world(scenario)
        cfg = scenario.stack
        objects = [build_object(scenario, rng_scn) for _ in range(cfg["count"])]
        limit = cfg["perturbation_limit"]
        perturbations = rng_scn.uniform(-limit, limit, (cfg["count"], 2))
        sensor = build_sensor(scenario, rng_sen)
        config = build_policy(scenario)
        window = build_window(scenario)
        plan = StackPlan(
            target_xy=tuple(cfg["target_xy"]),
            perturbations=perturbations,
            calibration_xy=tuple(cfg["calibration_xy"]),
            hover_tip_z=cfg["hover_tip_z"],
            approach_clearance=cfg["approach_clearance"],
        )
        result = run_stack(world, sensor, objects, plan, config, window)
    except Exception as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
        return row

    objects_out = []
    for i, trace in enumerate(result.traces):
        descents, iterations = _trace_rows(trace)
        objects_out.append({
            "object": i,
            "outcome": trace.outcome.value,
            "iterations": len(trace.iterations),
            "final_com": None if trace.final_com is None else _listify(trace.final_com),
            "descents": descents,
            "iteration_rows": iterations,
        })
    row.update({
        "placed": result.placed,
        "success": bool(result.success),
        "objects": objects_out,
    })
    return row


def _sweep_point(scenario: Scenario, trial: int):
    sweep = scenario.sweep
    per_mag = sweep["directions"] * sweep["repeats"]
    mag_idx, rest = divmod(trial, per_mag)
    dir_idx, _repeat = divmod(rest, sweep["repeats"])
    magnitude = sweep["magnitudes"][mag_idx]
    theta = 2.0 * math.pi * dir_idx / sweep["directions"]
    return magnitude, math.degrees(theta), np.array(
        [sweep["center"][0] + magnitude * math.cos(theta),
         sweep["center"][1] + magnitude * math.sin(theta)]
    )


def _sweep_trial(scenario: Scenario, trial: int) -> dict:
    rng_scn, rng_sen = _trial_rngs(scenario.seed, trial)
    sweep = scenario.sweep
    magnitude, direction_deg, press_xy = _sweep_point(scenario, trial)
    row: dict = {
        "trial": trial,
        "magnitude": float(magnitude),
        "direction_deg": float(direction_deg),
    }
    try:
        world = build_world(scenario)
        obj = build_object(scenario, rng_scn)
        world.hold(obj)
        sensor = build_sensor(scenario, rng_sen)
        config = build_policy(scenario)
        window = build_window(scenario)
        calibration = calibrate_for_held(
            world, sensor, config, window,
            sweep["calibration_xy"], sweep["hover_tip_z"],
        )
        press = press_and_estimate(
            world, sensor, calibration, config, window,
            press_xy, sweep["hover_tip_z"],
        )
    except Exception as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
        return row

    row["degenerate"] = bool(press.degenerate)
    if press.estimate is None:
        row.update({"shift": None, "angle_error_deg": None, "press_force": None})
        return row
    shift = propose_shift(press.estimate, config)
    to_center = np.asarray(sweep["center"]) - press_xy
    err = angle_error_deg(shift, to_center)
    row.update({
        "shift": _listify(shift),
        "angle_error_deg": None if math.isnan(err) else float(err),
        "press_force": float(press.estimate.press_magnitude),
    })
    return row


def _press_torque(scenario: Scenario, trial: int) -> float:
    cfg = scenario.press["torques"]
    if isinstance(cfg, list):
        return float(cfg[trial])
    n = scenario.trials
    if n == 1:
        return float(cfg["min"])
    frac = trial / (n - 1)
    if cfg["spacing"] == "log":
        return float(cfg["min"] * (cfg["max"] / cfg["min"]) ** frac)
    return float(cfg["min"] + (cfg["max"] - cfg["min"]) * frac)


def _press_trial(scenario: Scenario, trial: int) -> dict:
    """Synthetic finger press: push down at a known offset, check the estimate.

    The object hangs in free space while an external press of magnitude P
    acts at a known horizontal offset from the assumed COM, giving torque
    P times the offset radius. No world model is involved; this exercises
    the sensor-plus-estimator chain alone.
    """
    rng_scn, rng_sen = _trial_rngs(scenario.seed, trial)
    cfg = scenario.press
    torque_mag = _press_torque(scenario, trial)
    theta = rng_scn.uniform(0.0, 2.0 * math.pi)
    offset = cfg["offset_radius"] * np.array([math.cos(theta), math.sin(theta), 0.0])
    push = torque_mag / cfg["offset_radius"]
    weight = cfg["mass"] * cfg["gravity"]

    row: dict = {
        "trial": trial,
        "torque": float(torque_mag),
        "direction_deg": float(math.degrees(theta)),
        "press_force": float(push),
    }
    try:
        sensor = build_sensor(scenario, rng_sen)
        config = build_policy(scenario)
        window = build_window(scenario)
        hover_true = Wrench(np.zeros(3), np.array([0.0, 0.0, -weight]),
                            frame=FrameId.ROCK_COM)
        finger = np.array([0.0, 0.0, -push])
        press_true = Wrench(np.cross(offset, finger), hover_true.force + finger,
                            frame=FrameId.ROCK_COM)
        hover = sensor.settle_and_average(lambda: hover_true, window)
        reading = sensor.settle_and_average(lambda: press_true, window)
        calibrated = Wrench(reading.torque - hover.torque, reading.force,
                            frame=FrameId.ROCK_COM)
        estimate = estimate_contact(calibrated, hover.force,
                                    force_floor=config.force_floor)
    except DegenerateNormalForce:
        row.update({"degenerate": True, "angle_error_deg": None})
        return row
    except Exception as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
        return row

    row.update({
        "degenerate": False,
        "angle_error_deg": float(angle_error_deg(estimate.tangent_offset, offset)),
    })
    return row


_TRIAL_RUNNERS = {
    "zero_offset": _placement_trial,
    "offset_recovery": _placement_trial,
    "ramp": _placement_trial,
    "multi_stack": _stack_trial,
    "noise_sweep": _sweep_trial,
    "finger_press": _press_trial,
}


def _run_trials(scenario: Scenario, jobs: int) -> list[dict]:
    runner = _TRIAL_RUNNERS[scenario.family]
    trials = range(scenario.trials)
    if jobs <= 1:
        return [runner(scenario, t) for t in trials]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        # map preserves order, so results land by trial index
        return list(pool.map(runner, repeat(scenario), trials))


# -- aggregation ---------------------------------------------------------------


def _median(values: list) -> float | None:
    clean = [v for v in values if v is not None and not math.isnan(v)]
    if not clean:
        return None
    return float(np.median(clean))


def _mean(values: list) -> float | None:
    clean = [v for v in values if v is not None and not math.isnan(v)]
    if not clean:
        return None
    return float(np.mean(clean))


OUTCOME_ORDER = ("released_stable", "released_toppled", "max_iterations", "no_contact")


def _aggregate_placement(scenario: Scenario, rows: list[dict]) -> dict:
    counts = {name: 0 for name in OUTCOME_ORDER}
    errors = 0
    iteration_counts = []
    for row in rows:
        if "error" in row:
            errors += 1
            continue
        counts[row["outcome"]] += 1
        iteration_counts.append(row["iterations"])
    successes = counts["released_stable"]
    lo, hi = wilson_interval(successes, scenario.trials)

    by_iteration = []
    if scenario.placement["stable_xy"] is not None:
        depth = max((len(r.get("shift_angle_errors_deg", [])) for r in rows), default=0)
        for k in range(depth):
            angles = [
                r["shift_angle_errors_deg"][k]
                for r in rows
                if "shift_angle_errors_deg" in r and len(r["shift_angle_errors_deg"]) > k
                and r["shift_angle_errors_deg"][k] is not None
            ]
            if angles:
                by_iteration.append({
                    "iteration": k,
                    "n": len(angles),
                    "median_deg": _median(angles),
                    "mean_deg": _mean(angles),
                })

    per_trial = []
    for row in rows:
        if "error" in row:
            per_trial.append({"trial": row["trial"], "error": row["error"]})
            continue
        entry = {
            "trial": row["trial"],
            "outcome": row["outcome"],
            "iterations": row["iterations"],
            "start_xy": row["start_xy"],
            "com_offset": row["com_offset"],
            "final_com": row["final_com"],
        }
        if "oneshot_com_error" in row:
            entry["oneshot_com_error"] = row["oneshot_com_error"]
        per_trial.append(entry)

    return {
        "outcomes": counts,
        "errors": errors,
        "success_rate": successes / scenario.trials,
        "wilson_ci_95": [lo, hi],
        "mean_iterations": _mean(iteration_counts),
        "direction_stats": by_iteration,
        "per_trial": per_trial,
    }


def _aggregate_stack(scenario: Scenario, rows: list[dict]) -> dict:
    successes = sum(1 for r in rows if r.get("success"))
    errors = sum(1 for r in rows if "error" in r)
    lo, hi = wilson_interval(successes, scenario.trials)
    per_trial = []
    for row in rows:
        if "error" in row:
            per_trial.append({"trial": row["trial"], "error": row["error"]})
            continue
        per_trial.append({
            "trial": row["trial"],
            "placed": row["placed"],
            "success": row["success"],
            "objects": [
                {k: o[k] for k in ("object", "outcome", "iterations", "final_com")}
                for o in row["objects"]
            ],
        })
    placed = [r["placed"] for r in rows if "placed" in r]
    return {
        "errors": errors,
        "success_rate": successes / scenario.trials,
        "wilson_ci_95": [lo, hi],
        "min_placed": min(placed) if placed else 0,
        "mean_placed": _mean(placed),
        "per_trial": per_trial,
    }


def _aggregate_sweep(scenario: Scenario, rows: list[dict]) -> dict:
    groups = []
    for magnitude in scenario.sweep["magnitudes"]:
        angles = [
            r["angle_error_deg"] for r in rows
            if r.get("magnitude") == magnitude and r.get("angle_error_deg") is not None
        ]
        groups.append({
            "magnitude": float(magnitude),
            "n": len(angles),
            "median_deg": _median(angles),
            "mean_deg": _mean(angles),
        })
    crossover = None
    for g in groups:
        if g["median_deg"] is not None and g["median_deg"] < 60.0:
            crossover = g["magnitude"]
            break
    errors = sum(1 for r in rows if "error" in r)
    return {
        "errors": errors,
        "by_magnitude": groups,
        "crossover_magnitude_below_60_deg": crossover,
        "per_trial": [
            {k: r.get(k) for k in ("trial", "magnitude", "direction_deg",
                                   "angle_error_deg", "press_force", "degenerate")}
            if "error" not in r else {"trial": r["trial"], "error": r["error"]}
            for r in rows
        ],
    }


def _aggregate_press(scenario: Scenario, rows: list[dict]) -> dict:
    valid = [r["angle_error_deg"] for r in rows
             if r.get("angle_error_deg") is not None]
    degenerate = sum(1 for r in rows if r.get("degenerate"))
    errors = sum(1 for r in rows if "error" in r)
    return {
        "errors": errors,
        "degenerate": degenerate,
        "n_valid": len(valid),
        "max_angle_error_deg": max(valid) if valid else None,
        "median_angle_error_deg": _median(valid),
        "per_trial": [
            {k: r.get(k) for k in ("trial", "torque", "direction_deg", "press_force",
                                   "angle_error_deg", "degenerate")}
            if "error" not in r else {"trial": r["trial"], "error": r["error"]}
            for r in rows
        ],
    }


_AGGREGATORS = {
    "zero_offset": _aggregate_placement,
    "offset_recovery": _aggregate_placement,
    "ramp": _aggregate_placement,
    "multi_stack": _aggregate_stack,
    "noise_sweep": _aggregate_sweep,
    "finger_press": _aggregate_press,
}


# -- embedded acceptance checks -------------------------------------------------


def _check(passed: bool, detail: str) -> dict:
    return {"passed": bool(passed), "detail": detail}


def _evaluate_expect(scenario: Scenario, body: dict) -> dict:
    e = scenario.expect
    checks: dict = {}
    if not e:
        return checks

    if "min_success_rate" in e:
        rate = body["success_rate"]
        checks["min_success_rate"] = _check(
            rate >= e["min_success_rate"],
            f"success_rate {rate:.6g} vs required {e['min_success_rate']:.6g}",
        )
    if "max_iterations_per_trial" in e:
        worst = max((t["iterations"] for t in body["per_trial"] if "iterations" in t),
                    default=0)
        checks["max_iterations_per_trial"] = _check(
            worst <= e["max_iterations_per_trial"],
            f"worst trial used {worst} iterations, limit {e['max_iterations_per_trial']}",
        )
    if "all_outcome" in e:
        outcomes = {t["outcome"] for t in body["per_trial"] if "outcome" in t}
        ok = outcomes == {e["all_outcome"]} and body.get("errors", 0) == 0
        checks["all_outcome"] = _check(
            ok, f"outcomes seen {sorted(outcomes)}, required all {e['all_outcome']}"
        )
    if "min_placed" in e:
        worst = min((t["placed"] for t in body["per_trial"] if "placed" in t), default=0)
        checks["min_placed"] = _check(
            worst >= e["min_placed"],
            f"least placed {worst}, required {e['min_placed']}",
        )
    if "oneshot_tolerance" in e:
        tol = e["oneshot_tolerance"]
        need = e.get("min_oneshot_rate", 1.0)
        vals = [t.get("oneshot_com_error") for t in body["per_trial"]
                if "error" not in t]
        hits = sum(1 for v in vals if v is not None and v <= tol)
        rate = hits / len(vals) if vals else 0.0
        checks["oneshot_tolerance"] = _check(
            rate >= need,
            f"{hits}/{len(vals)} first proposals within {tol:g} m (rate {rate:.6g})",
        )
    if "max_direction_error_deg" in e:
        worst = body.get("max_angle_error_deg")
        ok = worst is not None and worst <= e["max_direction_error_deg"]
        checks["max_direction_error_deg"] = _check(
            ok, f"max direction error {worst} deg, limit {e['max_direction_error_deg']}"
        )
    if "median_below_deg" in e:
        cutoff = e.get("at_or_above_offset", 0.0)
        groups = [g for g in body["by_magnitude"]
                  if g["magnitude"] >= cutoff and g["median_deg"] is not None]
        ok = bool(groups) and all(g["median_deg"] < e["median_below_deg"] for g in groups)
        checks["median_below_deg"] = _check(
            ok,
            "medians at offsets >= {:g}: {}".format(
                cutoff, [round(g["median_deg"], 2) for g in groups]),
        )
    if "median_above_deg" in e:
        cutoff = e.get("at_or_below_offset", float("inf"))
        groups = [g for g in body["by_magnitude"]
                  if g["magnitude"] <= cutoff and g["median_deg"] is not None]
        ok = bool(groups) and all(g["median_deg"] > e["median_above_deg"] for g in groups)
        checks["median_above_deg"] = _check(
            ok,
            "medians at offsets <= {:g}: {}".format(
                cutoff, [round(g["median_deg"], 2) for g in groups]),
        )
    if "monotone_slack_deg" in e:
        slack = e["monotone_slack_deg"]
        meds = [g["median_deg"] for g in body["by_magnitude"]
                if g["median_deg"] is not None]
        ok = all(b <= a + slack for a, b in zip(meds, meds[1:]))
        checks["monotone_slack_deg"] = _check(
            ok,
            "medians over ascending offsets: {}".format(
                [round(m, 2) for m in meds]),
        )
    return checks


# -- artifacts ------------------------------------------------------------------


def _r(value) -> str:
    """Shortest round-trip decimal text for a float; stable across runs."""
    return repr(float(value))


def _write_descent_section(lines: list, label: str, series: list) -> None:
    lines.append(f"# section: descent {label}")
    lines.append("# columns: t_s f_norm_N tau_norm_Nm")
    for t, f, tau in series:
        lines.append(f"{_r(t)} {_r(f)} {_r(tau)}")


def _write_iteration_section(lines: list, iterations: list) -> None:
    lines.append("# section: iterations")
    lines.append("# columns: index x_m y_m tip_z_m residual_norm_Nm press_force_N "
                 "released degenerate shift_x_m shift_y_m")
    for it in iterations:
        lines.append(" ".join([
            str(it["index"]), _r(it["x"]), _r(it["y"]), _r(it["tip_z"]),
            _r(it["residual_norm"]), _r(it["press_force"]),
            str(int(it["released"])), str(int(it["degenerate"])),
            _r(it["shift_x"]), _r(it["shift_y"]),
        ]))


def write_trace(scenario: Scenario, row: dict, out_dir: Path) -> str:
    """Write one trial's columnar trace; returns the file name."""
    name = f"trial_{row['trial']:03d}.trace"
    lines = [
        "# ftstack trace v1",
        f"# scenario: {scenario.name}",
        f"# trial: {row['trial']}",
    ]
    if "error" in row:
        lines.append(f"# error: {row['error']}")
    elif scenario.family == "multi_stack":
        for obj in row["objects"]:
            lines.append(f"# object: {obj['object']}")
            for k, series in enumerate(obj["descents"]):
                _write_descent_section(lines, f"{obj['object']}_{k}", series)
            _write_iteration_section(lines, obj["iteration_rows"])
            lines.append(f"# outcome: {obj['outcome']}")
    else:
        lines.append(f"# outcome: {row['outcome']}")
        for k, series in enumerate(row["descents"]):
            _write_descent_section(lines, str(k), series)
        _write_iteration_section(lines, row["iteration_rows"])
    lines.append("# end")
    (out_dir / name).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return name


def _write_table(out_dir: Path, name: str, header: list, rows: list) -> str:
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for v in row:
            if v is None:
                cells.append("")
            elif isinstance(v, bool):
                cells.append(str(int(v)))
            elif isinstance(v, float):
                cells.append(_r(v))
            else:
                cells.append(str(v))
        lines.append(",".join(cells))
    (out_dir / name).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return name


def emit_contact_plot_data(trace_path, out_dir=None) -> list:
    """Split a trace file's descent sections into plot-ready CSV files."""
    trace_path = Path(trace_path)
    out = Path(out_dir) if out_dir is not None else trace_path.parent
    out.mkdir(parents=True, exist_ok=True)
    sections: list[tuple[str, list]] = []
    current = None
    for line in trace_path.read_text(encoding="utf-8").splitlines():
        if line.startswith("#"):
            m = re.match(r"#\s*section:\s*descent\s+(\S+)", line)
            if m:
                current = (m.group(1), [])
                sections.append(current)
            elif not re.match(r"#\s*columns:", line):
                current = None  # any other marker ends the section
            continue
        if current is not None and line.strip():
            current[1].append(line.split())
    sections = [(label, rows) for label, rows in sections if rows]
    if not sections:
        raise ValueError(f"{trace_path}: no descent samples to plot")
    written = []
    for label, rows in sections:
        name = f"{trace_path.stem}_descent_{label}.csv"
        lines = ["t_s,f_norm_N,tau_norm_Nm"]
        lines.extend(",".join(r) for r in rows)
        (out / name).write_text("\n".join(lines) + "\n", encoding="utf-8")
        written.append(str(out / name))
    return written


# -- entry points ----------------------------------------------------------------


def _as_scenario(source, seed=None) -> Scenario:
    scenario = source if isinstance(source, Scenario) else load_scenario(source)
    if seed is not None:
        scenario = dataclasses.replace(scenario, seed=int(seed))
    return scenario


def run_scenario(source, out_dir=None, seed=None, jobs: int = 1) -> dict:
    """Run every trial of a scenario and assemble the report.

    ``source`` is a scenario path or a Scenario. Writes report and artifacts
    under out_dir when given. The report's ``passed`` field reflects the
    thresholds embedded in the scenario's expect block (vacuously true when
    the block is absent).
    """
    scenario = _as_scenario(source, seed)
    rows = _run_trials(scenario, jobs)
    body = _AGGREGATORS[scenario.family](scenario, rows)
    checks = _evaluate_expect(scenario, body)
    report = {
        "report_version": REPORT_VERSION,
        "scenario": scenario.name,
        "family": scenario.family,
        "seed": scenario.seed,
        "trials": scenario.trials,
        "results": body,
        "checks": checks,
        "passed": all(c["passed"] for c in checks.values()),
    }

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        artifacts = {}
        if scenario.family in PLACEMENT_FAMILIES or scenario.family == "multi_stack":
            artifacts["traces"] = [write_trace(scenario, row, out) for row in rows]
        elif scenario.family == "noise_sweep":
            artifacts["table"] = _write_table(
                out, "sweep.csv",
                ["trial", "magnitude_m", "direction_deg", "angle_error_deg",
                 "press_force_N", "degenerate"],
                [(r.get("trial"), r.get("magnitude"), r.get("direction_deg"),
                  r.get("angle_error_deg"), r.get("press_force"), r.get("degenerate"))
                 for r in rows],
            )
        else:
            artifacts["table"] = _write_table(
                out, "press.csv",
                ["trial", "torque_Nm", "direction_deg", "press_force_N",
                 "angle_error_deg", "degenerate"],
                [(r.get("trial"), r.get("torque"), r.get("direction_deg"),
                  r.get("press_force"), r.get("angle_error_deg"), r.get("degenerate"))
                 for r in rows],
            )
        report["artifacts"] = artifacts
        report_text = yaml.safe_dump(report, sort_keys=False)
        (out / "report.yaml").write_text(report_text, encoding="utf-8")
    return report


def sweep_offsets(source, out_dir=None, seed=None, jobs: int = 1) -> dict:
    """Offset-grid sweep: first-press shift proposals against known geometry."""
    scenario = _as_scenario(source, seed)
    if scenario.family != "noise_sweep":
        raise ScenarioFamilyError("sweep requires a noise_sweep scenario, got "
                                  f"{scenario.family}")
    return run_scenario(scenario, out_dir=out_dir, jobs=jobs)


def finger_press_check(source, out_dir=None, seed=None, jobs: int = 1) -> dict:
    """Synthetic wrench injections with known directions, estimator readback."""
    scenario = _as_scenario(source, seed)
    if scenario.family != "finger_press":
        raise ScenarioFamilyError("press-check requires a finger_press scenario, got "
                                  f"{scenario.family}")
    return run_scenario(scenario, out_dir=out_dir, jobs=jobs)
