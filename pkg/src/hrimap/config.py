"""Run-configuration loading and validation.

Configs are YAML documents. Every key is declared in ``SCHEMA`` with its type,
unit and whether it is optional; unknown keys and type errors are reported with
the file line and dotted key path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

import yaml

SCHEMA_VERSION = "hrimap/1"


class ConfigError(ValueError):
    def __init__(self, message: str, key: str = "", line: int | None = None, source: str = "<config>"):
        self.key, self.line, self.source = key, line, source
        where = f"{source}:{line}" if line is not None else source
        label = f" key '{key}'" if key else ""
        super().__init__(f"{where}:{label} {message}")


# ------------------------------------------------------------------ field types


@dataclass(frozen=True)
class Field:
    kind: str  # float | int | bool | str | path | vec | matrix | list | section | pairs
    doc: str
    unit: str = ""
    optional: bool = True
    default: Any = None
    minimum: float | None = None
    size: int | None = None  # vector length / matrix order
    choices: tuple | None = None
    children: dict | None = None
    item: str = ""  # element kind for lists


def F(kind, doc, unit="", **kw) -> Field:
    return Field(kind, doc, unit, **kw)


def section(doc, children, optional=True) -> Field:
    return Field("section", doc, optional=optional, children=children)


BOUNDS = {
    "a_head": F("vec", "operator head-rate bounds [lo, hi]", "rad/s", size=2, default=[-1.0, 1.0]),
    "a_body": F("vec", "operator body-speed bounds [lo, hi]", "m/s", size=2, default=[-1.5, 1.5]),
    "v": F("vec", "robot forward-speed bounds [lo, hi]", "m/s", size=2, default=[-3.0, 3.0]),
    "w": F("vec", "robot turn-rate bounds [lo, hi]", "rad/s", size=2, default=[-2.0, 2.0]),
}

SCHEMA = {
    "schema": F("str", f"schema version string, must be '{SCHEMA_VERSION}'", optional=False),
    "seed": F("int", "random seed (overridden by --seed)", minimum=0, default=0),
    "output_dir": F("path", "default output directory (overridden by --out)"),
    "bounds": section("action-space boxes", BOUNDS),
    "problem": section(
        "interface optimization problem",
        {
            "x_initial": F("vec", "start pose [x, y, theta]", "m, m, rad", size=3, optional=False),
            "x_final": F("vec", "goal pose [x, y, theta]", "m, m, rad", size=3, optional=False),
            "horizon": F("float", "time horizon T", "s", minimum=0, default=10.0),
            "knots": F("int", "piecewise-constant action knots N", minimum=2, default=25),
            "dt": F("float", "integration step", "s", minimum=0, default=0.05),
            "weights": section(
                "cost weights",
                {
                    "alpha": F("float", "terminal-error weight", minimum=0, optional=False),
                    "beta": F("float", "action-effort weight", minimum=0, optional=False),
                    "gamma": F("float", "arc-length weight", minimum=0, optional=False),
                    "delta": F("float", "orthogonality weight", minimum=0, optional=False),
                    "M": F("matrix", "effort metric (SPD)", size=2, default=[[1.0, 0.0], [0.0, 1.0]]),
                },
                optional=False,
            ),
            "restarts": F("int", "random restarts", minimum=1, default=16),
            "max_evals": F("int", "objective evaluations per restart", minimum=1, default=20000),
            "method": F("str", "local search method", choices=("lbfgs", "nelder-mead", "gradient"), default="lbfgs"),
            "g_init_range": F("float", "G entries start uniform in [-r, r]", minimum=0, default=3.0),
            "positions_only": F("bool", "arc length over (x, y) only", default=False),
        },
    ),
    "interface": section(
        "interface map g(a) = G a",
        {
            "G": F("matrix", "2x2 map, rows (v, w), columns (a_head, a_body)", size=2),
            "solution": F("path", "read G from a G.txt written by 'optimize'"),
        },
    ),
    "smoother": section(
        "head-orientation smoothing",
        {
            "buffer_size": F("int", "moving-average buffer length", "ticks", minimum=1, default=10),
            "turn_threshold": F("float", "turn decision threshold", "rad", minimum=0, default=0.02),
            "head_rate": F("float", "head rate emitted for a turn", "rad/s", minimum=0, default=0.5),
        },
    ),
    "script": section(
        "operator script (exactly one of file, generate, replay)",
        {
            "file": F("path", "CSV with columns t, head, body[, depth]", "s, rad, m/s, m"),
            "replay": F("path", "directory written by 'optimize'; replays its actions"),
            "generate": section(
                "synthetic operator stream",
                {
                    "kind": F("str", "stream shape", choices=("still", "ramp", "sine"), optional=False),
                    "duration": F("float", "session length", "s", minimum=0, optional=False),
                    "rate_hz": F("float", "tick rate", "Hz", minimum=0, default=20.0),
                    "body_speed": F("float", "constant body command", "m/s", default=0.0),
                    "head_rate": F("float", "ramp slope", "rad/s", default=0.5),
                    "amplitude": F("float", "sine amplitude", "rad", default=0.5),
                    "period": F("float", "sine period", "s", minimum=0, default=4.0),
                },
            ),
            "initial_state": F("vec", "start pose [x, y, theta]", "m, m, rad", size=3, default=[0.0, 0.0, 0.0]),
        },
    ),
    "channel": section(
        "camera channel",
        {
            "corpus": F("list", "PGM/PPM/PBM image paths", item="path"),
            "synthetic_pool": F("int", "generate this many synthetic pool frames", minimum=1),
            "pool_seed": F("int", "seed of the synthetic pool frames", minimum=0, default=0),
            "candidates": F(
                "list", "transform pipelines, e.g. 'grayscale | downsample(2)'", item="str",
                default=["identity", "grayscale", "binarize(otsu)"],
            ),
            "budget": F("pairs", "schedule of [start time, bits per frame]", "s, bits", default=None),
            "frame_period": F("float", "spacing of frame timestamps", "s", minimum=0, default=1.0),
            "bins": F("int", "histogram bins per image (default by channel model)", minimum=1),
        },
    ),
    "props": section(
        "principle checks",
        {
            "samples": F("int", "random actions per check", minimum=2, default=1000),
            "axes": F("list", "symmetry reflections", item="str", choices=("head", "body"), default=["head", "body"]),
            "completeness": section(
                "lattice completeness check",
                {
                    "pairs": F("int", "u-reachable state pairs", minimum=1, default=20),
                    "horizon": F("float", "search horizon", "s", minimum=0, default=2.0),
                    "resolution": F("float", "lattice spacing", "m", minimum=0, default=0.5),
                    "headings": F("int", "heading bins", minimum=1, default=16),
                    "workspace": F("matrix", "[[x_min, x_max], [y_min, y_max]]", "m", size=2, default=[[-2.0, 2.0], [-2.0, 2.0]]),
                    "primitive_dt": F("float", "primitive duration", "s", minimum=0, default=0.5),
                },
            ),
        },
    ),
}


def schema_comment(schema: dict = SCHEMA, indent: int = 0) -> str:
    """Commented key reference (units, optional/required, defaults)."""
    lines = []
    for key, f in schema.items():
        pad = "#   " + "  " * indent
        flag = "optional" if f.optional else "required"
        if f.kind == "section":
            lines.append(f"{pad}{key}:  ({flag}) {f.doc}")
            lines.append(schema_comment(f.children, indent + 1))
            continue
        unit = f" [{f.unit}]" if f.unit else ""
        default = f", default {f.default!r}" if f.optional and f.default is not None else ""
        choices = f", one of {list(f.choices)}" if f.choices else ""
        lines.append(f"{pad}{key}{unit}: {f.kind} ({flag}{default}{choices}) {f.doc}")
    return "\n".join(lines)


# ------------------------------------------------------------------ validation


class _Validator:
    def __init__(self, source: str):
        self.source = source

    def fail(self, msg, key, node):
        line = node.start_mark.line + 1 if node is not None else None
        raise ConfigError(msg, key, line, self.source)

    def section(self, node, schema, path):
        if not isinstance(node, yaml.MappingNode):
            self.fail("must be a mapping", path, node)
        out, seen = {}, {}
        for knode, vnode in node.value:
            key = knode.value
            full = f"{path}.{key}" if path else key
            if key not in schema:
                self.fail("unknown key", full, knode)
            if key in seen:
                self.fail("duplicate key", full, knode)
            seen[key] = knode
            out[key] = self.value(vnode, schema[key], full)
        for key, f in schema.items():
            if key in out:
                continue
            full = f"{path}.{key}" if path else key
            if not f.optional:
                self.fail("missing required key", full, node)
            if f.kind == "section":
                continue
            out[key] = f.default
        return out

    def scalar(self, node, kind, key):
        if not isinstance(node, yaml.ScalarNode):
            self.fail(f"expected a {kind}", key, node)
        val = yaml.safe_load(node.value) if node.style is None else node.value
        if kind in ("str", "path"):
            if node.style is None and not isinstance(val, str):
                val = node.value
            return val
        if kind == "bool":
            if not isinstance(val, bool):
                self.fail("expected true or false", key, node)
            return val
        if kind == "int":
            if isinstance(val, bool) or not isinstance(val, int):
                self.fail("expected an integer", key, node)
            return val
        if isinstance(val, str):
            try:
                val = float(val)
            except ValueError:
                self.fail("expected a number", key, node)
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            self.fail("expected a number", key, node)
        val = float(val)
        if not math.isfinite(val):
            self.fail("must be finite", key, node)
        return val

    def seq(self, node, key):
        if not isinstance(node, yaml.SequenceNode):
            self.fail("expected a list", key, node)
        return node.value

    def value(self, node, f: Field, key):
        if f.kind == "section":
            if isinstance(node, yaml.ScalarNode) and node.value in ("", "null", "~"):
                node = yaml.MappingNode("tag:yaml.org,2002:map", [], node.start_mark, node.end_mark)
            return self.section(node, f.children, key)
        if f.kind == "vec":
            items = self.seq(node, key)
            if f.size is not None and len(items) != f.size:
                self.fail(f"expected {f.size} numbers", key, node)
            val = [self.scalar(n, "float", key) for n in items]
        elif f.kind == "matrix":
            rows = self.seq(node, key)
            if len(rows) != f.size:
                self.fail(f"expected a {f.size}x{f.size} matrix", key, node)
            val = []
            for r in rows:
                items = self.seq(r, key)
                if len(items) != f.size:
                    self.fail(f"expected a {f.size}x{f.size} matrix", key, r)
                val.append([self.scalar(n, "float", key) for n in items])
        elif f.kind == "list":
            val = [self.scalar(n, f.item, key) for n in self.seq(node, key)]
            if not val:
                self.fail("list must not be empty", key, node)
        elif f.kind == "pairs":
            val = []
            for r in self.seq(node, key):
                items = self.seq(r, key)
                if len(items) != 2:
                    self.fail("expected [time, bits] pairs", key, r)
                val.append((self.scalar(items[0], "float", key), self.scalar(items[1], "int", key)))
            if not val:
                self.fail("list must not be empty", key, node)
        else:
            val = self.scalar(node, f.kind, key)
        if f.minimum is not None:
            vals = val if isinstance(val, list) else [val]
            if any(v < f.minimum for v in vals):
                self.fail(f"must be >= {f.minimum:g}", key, node)
            if f.kind == "float" and key.split(".")[-1] in _STRICT and val <= 0:
                self.fail("must be > 0", key, node)
        if f.choices is not None and any(v not in f.choices for v in (val if f.kind == "list" else [val])):
            self.fail(f"must be one of {list(f.choices)}", key, node)
        return val


# floats that must be strictly positive
_STRICT = {"horizon", "dt", "duration", "rate_hz", "period", "turn_threshold", "frame_period",
           "resolution", "primitive_dt"}


@dataclass
class RunConfig:
    data: dict
    source: str
    base: Path
    lines: dict

    def section(self, name: str) -> dict | None:
        return self.data.get(name)

    def require(self, name: str) -> dict:
        sec = self.data.get(name)
        if sec is None:
            raise ConfigError("missing required section for this command", name, None, self.source)
        return sec

    def path(self, value) -> Path:
        p = Path(value)
        return p if p.is_absolute() else self.base / p

    def error(self, message: str, key: str) -> ConfigError:
        return ConfigError(message, key, self.lines.get(key), self.source)


def _key_lines(node, path="", out=None) -> dict:
    out = {} if out is None else out
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            full = f"{path}.{k.value}" if path else k.value
            out[full] = k.start_mark.line + 1
            _key_lines(v, full, out)
    return out


def loads(text: str, source: str = "<config>", base: Path | None = None) -> RunConfig:
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ConfigError(f"YAML syntax error: {getattr(exc, 'problem', exc)}", "", line, source) from None
    if root is None:
        raise ConfigError("empty config", "", None, source)
    v = _Validator(source)
    data = v.section(root, SCHEMA, "")
    if data["schema"] != SCHEMA_VERSION:
        lines = _key_lines(root)
        raise ConfigError(f"unsupported schema {data['schema']!r}, expected {SCHEMA_VERSION!r}", "schema", lines.get("schema"), source)
    return RunConfig(data, source, base or Path("."), _key_lines(root))


def load(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", "", None, str(path)) from None
    return loads(text, str(path), path.parent)


def build(cfg: RunConfig, key: str, fn: Callable, *args, **kw):
    """Call a constructor, turning its ValueError into a keyed ConfigError."""
    try:
        return fn(*args, **kw)
    except ValueError as exc:
        raise cfg.error(str(exc), key) from None
