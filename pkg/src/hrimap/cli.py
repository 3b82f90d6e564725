"""Command-line front end.

    hrimap optimize|simulate|channel-eval|props --config CFG [--out DIR] [--seed N]

Exit codes: 0 success, 2 invalid config or input file, 3 solver failure,
4 output I/O failure. Without ``--out`` the output directory comes from
``$HRIMAP_OUT`` and then from the config's ``output_dir``.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from pathlib import Path

import numpy as np
import yaml

from . import config as cfgmod
from .config import ConfigError, RunConfig, build
from .dynamics import RobotState
from .functionals import TERMS, CostWeights
from .interface import ActionSpace, LinearInterfaceMap, operator_space, robot_space
from .obschannel import (
    ChannelBudget,
    PNMError,
    bits_required,
    apply_transform,
    expected_preserved_info,
    parse_pipeline,
    pipeline_name,
    pool_corpus,
    select_transform,
)
from .obschannel import pnm
from .optimizer import ProblemConfig, SolverError, solve
from .props import Grid, evaluate_principles
from .simulator import Channel, OperatorScript, SmootherConfig, generated_script, replay_script, run_session

ENV_OUT = "HRIMAP_OUT"
EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_IO = 0, 2, 3, 4
TRAJECTORY_COLUMNS = ("t", "a_head", "a_body", "v", "w", "x", "y", "theta")


class OutputError(OSError):
    pass


def _fmt(x) -> str:
    return repr(float(x))


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


def _yaml_text(data) -> str:
    return yaml.safe_dump(data, sort_keys=False, default_flow_style=None)


class Outputs:
    def __init__(self, directory: Path):
        self.directory = directory
        self.written: list[Path] = []
        try:
            directory.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise OutputError(f"cannot create output directory {directory}: {exc.strerror}") from None

    def write(self, name: str, text: str) -> None:
        path = self.directory / name
        try:
            path.write_text(text)
        except OSError as exc:
            raise OutputError(f"cannot write {path}: {exc.strerror}") from None
        self.written.append(path)


# ------------------------------------------------------------------ config -> objects


def _bounds(cfg: RunConfig) -> tuple[ActionSpace, ActionSpace]:
    b = cfg.section("bounds") or {k: f.default for k, f in cfgmod.BOUNDS.items()}
    op = build(cfg, "bounds", operator_space, tuple(b["a_head"]), tuple(b["a_body"]))
    rb = build(cfg, "bounds", robot_space, tuple(b["v"]), tuple(b["w"]))
    return op, rb


def problem_config(cfg: RunConfig, seed: int) -> ProblemConfig:
    p = cfg.require("problem")
    w = p["weights"]
    weights = build(cfg, "problem.weights", CostWeights, w["alpha"], w["beta"], w["gamma"], w["delta"], np.array(w["M"]))
    op, rb = _bounds(cfg)
    return build(
        cfg, "problem", ProblemConfig,
        x_initial=build(cfg, "problem.x_initial", RobotState, *p["x_initial"]),
        x_final=build(cfg, "problem.x_final", RobotState, *p["x_final"]),
        weights=weights, horizon=p["horizon"], knots=p["knots"], dt=p["dt"],
        operator_bounds=op, robot_bounds=rb, seeds=p["restarts"], rng_seed=seed,
        max_evals=p["max_evals"], method=p["method"], g_init_range=p["g_init_range"],
        positions_only=p["positions_only"],
    )


def _read_g(cfg: RunConfig, path: Path, key: str) -> np.ndarray:
    if path.is_dir():
        path = path / "G.txt"
    try:
        rows = [line.split() for line in path.read_text().splitlines() if line.strip()]
        G = np.array([[float(v) for v in r] for r in rows])
    except OSError as exc:
        raise cfg.error(f"cannot read {path}: {exc.strerror}", key) from None
    except ValueError:
        raise cfg.error(f"{path} is not a numeric matrix", key) from None
    if G.shape != (2, 2):
        raise cfg.error(f"{path} must hold a 2x2 matrix", key)
    return G


def interface_map(cfg: RunConfig, fallback_dir: Path | None = None) -> LinearInterfaceMap:
    sec = cfg.section("interface") or {}
    _, rb = _bounds(cfg)
    if sec.get("G") is not None and sec.get("solution") is not None:
        raise cfg.error("give either G or solution, not both", "interface")
    if sec.get("G") is not None:
        G = np.array(sec["G"])
    elif sec.get("solution") is not None:
        G = _read_g(cfg, cfg.path(sec["solution"]), "interface.solution")
    elif fallback_dir is not None:
        G = _read_g(cfg, fallback_dir, "script.replay")
    else:
        raise cfg.error("interface needs G or solution", "interface")
    return build(cfg, "interface", LinearInterfaceMap, G, rb)


def _read_table(cfg: RunConfig, path: Path, key: str, required) -> dict:
    try:
        text = path.read_text()
    except OSError as exc:
        raise cfg.error(f"cannot read {path}: {exc.strerror}", key) from None
    rows = list(csv.reader(text.splitlines()))
    if not rows:
        raise cfg.error(f"{path} is empty", key)
    header = [h.strip() for h in rows[0]]
    missing = [c for c in required if c not in header]
    if missing:
        raise cfg.error(f"{path} lacks columns {missing}", key)
    try:
        cols = {h: np.array([float(r[i]) for r in rows[1:]]) for i, h in enumerate(header)}
    except (ValueError, IndexError):
        raise cfg.error(f"{path} has malformed rows", key) from None
    if len(rows) < 2:
        raise cfg.error(f"{path} has no data rows", key)
    return cols


def session_inputs(cfg: RunConfig):
    sc = cfg.require("script")
    sources = [k for k in ("file", "generate", "replay") if sc.get(k) is not None]
    if len(sources) != 1:
        raise cfg.error("exactly one of file, generate, replay is required", "script")
    x0 = build(cfg, "script.initial_state", RobotState, *sc["initial_state"])
    replay_dir = None
    if sc.get("file") is not None:
        cols = _read_table(cfg, cfg.path(sc["file"]), "script.file", ("t", "head", "body"))
        script = build(cfg, "script.file", OperatorScript, cols["t"], cols["head"], cols["body"], depth=cols.get("depth"))
    elif sc.get("generate") is not None:
        g = sc["generate"]
        script = build(cfg, "script.generate", generated_script, g["kind"], g["duration"], g["rate_hz"],
                       body_speed=g["body_speed"], head_rate=g["head_rate"], amplitude=g["amplitude"], period=g["period"])
    else:
        replay_dir = cfg.path(sc["replay"])
        cols = _read_table(cfg, replay_dir / "trajectory.csv", "script.replay", TRAJECTORY_COLUMNS)
        script = build(cfg, "script.replay", replay_script, cols["t"], np.column_stack([cols["a_head"], cols["a_body"]]))
        x0 = build(cfg, "script.replay", RobotState, cols["x"][0], cols["y"][0], cols["theta"][0])
    return script, x0, replay_dir


def smoother_config(cfg: RunConfig) -> SmootherConfig:
    s = cfg.section("smoother")
    if s is None:
        return SmootherConfig()
    return build(cfg, "smoother", SmootherConfig, s["buffer_size"], s["turn_threshold"], s["head_rate"])


def corpus(cfg: RunConfig):
    ch = cfg.require("channel")
    period = ch["frame_period"]
    if (ch.get("corpus") is None) == (ch.get("synthetic_pool") is None):
        raise cfg.error("exactly one of corpus, synthetic_pool is required", "channel")
    if ch.get("synthetic_pool") is not None:
        frames = pool_corpus(ch["synthetic_pool"], ch["pool_seed"])
        return [type(f)(f.pixels, f.channels, i * period) for i, f in enumerate(frames)]
    frames = []
    for i, p in enumerate(ch["corpus"]):
        path = cfg.path(p)
        try:
            frames.append(pnm.read(path, i * period))
        except PNMError as exc:
            raise cfg.error(str(exc), "channel.corpus") from None
        except OSError as exc:
            raise cfg.error(f"{path}: {exc.strerror}", "channel.corpus") from None
    return frames


def candidates(cfg: RunConfig):
    return [build(cfg, "channel.candidates", parse_pipeline, c) for c in cfg.require("channel")["candidates"]]


def budget(cfg: RunConfig) -> ChannelBudget | None:
    b = cfg.require("channel").get("budget")
    return None if b is None else build(cfg, "channel.budget", ChannelBudget.from_pairs, b)


# ------------------------------------------------------------------ commands


def cmd_optimize(cfg: RunConfig, out: Outputs, seed: int) -> int:
    problem = problem_config(cfg, seed)
    try:
        sol = solve(problem)
    except SolverError as exc:
        print(f"error: solver failed: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    out.write("G.txt", "".join(" ".join(_fmt(v) for v in row) + "\n" for row in sol.G))
    tr = sol.trajectory
    acts = np.vstack([tr.actions, tr.actions[-1:]])
    ctrl = np.vstack([tr.controls, tr.controls[-1:]])
    rows = [(tr.times[i], *acts[i], *ctrl[i], *tr.states[i]) for i in range(len(tr))]
    out.write("trajectory.csv", _csv_text(TRAJECTORY_COLUMNS, rows))
    knot_len = problem.horizon / problem.knots
    out.write("knots.csv", _csv_text(("knot", "t_start", "a_head", "a_body"),
                                     [(k, k * knot_len, *sol.actions[k]) for k in range(problem.knots)]))
    bd = sol.breakdown
    final = tr.final_state
    report = {
        "total": float(sol.cost),
        "terms": {t: {"raw": float(r), "weighted": float(bd.weighted[t])} for t, r in zip(TERMS, bd.raw)},
        "weights": {k: float(v) for k, v in zip(("alpha", "beta", "gamma", "delta"), bd.weights.as_vector())},
        "G": [[float(v) for v in row] for row in sol.G],
        "final_state": [final.x_pos, final.y_pos, final.theta],
        "restarts": [
            {"index": r.index, "initial_cost": float(r.initial_cost), "best_cost": float(r.best_cost),
             "evaluations": int(r.evaluations)}
            for r in sol.restarts
        ],
        "seed": seed,
    }
    out.write("cost.yaml", _yaml_text(report))
    return EXIT_OK


def cmd_simulate(cfg: RunConfig, out: Outputs, seed: int) -> int:
    script, x0, replay_dir = session_inputs(cfg)
    gmap = interface_map(cfg, replay_dir)
    channel = None
    if cfg.section("channel") is not None and cfg.section("channel").get("budget") is not None:
        channel = Channel(candidates(cfg), budget(cfg), corpus(cfg), cfg.section("channel")["bins"])
    log = build(cfg, "script", run_session, script, gmap, smoother_config(cfg), x0, channel)
    out.write("session.jsonl", log.to_jsonl())
    out.write("session.csv", log.to_csv())
    return EXIT_OK


def cmd_channel_eval(cfg: RunConfig, out: Outputs, seed: int) -> int:
    frames = corpus(cfg)
    cands = candidates(cfg)
    bins = cfg.section("channel")["bins"]
    rows = []
    for h in cands:
        bits = [bits_required(apply_transform(h, f)) for f in frames]
        b = bits[0] if len(set(bits)) == 1 else sum(bits) / len(bits)
        rows.append((pipeline_name(h), b, expected_preserved_info(h, frames, bins)))
    out.write("transforms.csv", _csv_text(("transform", "bits_required", "expected_preserved_info"), rows))
    sched = budget(cfg)
    if sched is not None:
        sel_rows = []
        for i, f in enumerate(frames):
            s = select_transform(cands, f, sched, f.timestamp, bins)
            sel_rows.append((f.timestamp, i, sched(f.timestamp), s.name, s.bits, s.information, int(s.over_budget)))
        out.write("selections.csv", _csv_text(
            ("t", "frame", "budget_bits", "transform", "bits", "information", "over_budget"), sel_rows))
    return EXIT_OK


def cmd_props(cfg: RunConfig, out: Outputs, seed: int) -> int:
    gmap = interface_map(cfg)
    op, _ = _bounds(cfg)
    p = cfg.section("props") or {"samples": 1000, "axes": ["head", "body"]}
    comp = None
    if p.get("completeness") is not None:
        c = p["completeness"]
        grid = build(cfg, "props.completeness", Grid, c["resolution"], c["headings"],
                     tuple(tuple(r) for r in c["workspace"]), c["primitive_dt"])
        comp = {"sample_pairs": c["pairs"], "horizon": c["horizon"], "grid": grid}
    reports = build(cfg, "props", evaluate_principles, gmap, op, p["samples"], seed, completeness=comp)
    keep = {"linearity", "continuity", "completeness"} | {f"symmetry_{a}" for a in p["axes"]}
    data = [
        {"name": r.name, "passed": bool(r.passed), "statistic": float(r.statistic), "samples": int(r.samples),
         "detail": {k: (float(v) if isinstance(v, float) else v) for k, v in r.detail.items()}}
        for r in reports if r.name in keep
    ]
    out.write("props.yaml", _yaml_text({"G": [[float(v) for v in row] for row in gmap.G], "seed": seed, "reports": data}))
    return EXIT_OK


COMMANDS = {
    "optimize": cmd_optimize,
    "simulate": cmd_simulate,
    "channel-eval": cmd_channel_eval,
    "props": cmd_props,
}


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hrimap", description="Interface-map optimization and teleoperation tools.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, type=Path, help="YAML run configuration")
        sp.add_argument("--out", type=Path, help=f"output directory (default ${ENV_OUT} or output_dir)")
        sp.add_argument("--seed", type=_u64, help="override the config seed")
    return ap


def main(argv=None) -> int:
    ap = parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = cfgmod.load(args.config)
        seed = args.seed if args.seed is not None else cfg.data["seed"]
        out_dir = args.out or (Path(os.environ[ENV_OUT]) if os.environ.get(ENV_OUT) else None)
        if out_dir is None and cfg.data.get("output_dir") is not None:
            out_dir = cfg.path(cfg.data["output_dir"])
        if out_dir is None:
            raise ConfigError(f"no output directory: pass --out, set ${ENV_OUT} or output_dir", "output_dir",
                              None, cfg.source)
        outputs = Outputs(out_dir)
        return COMMANDS[args.command](cfg, outputs, seed)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OutputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
