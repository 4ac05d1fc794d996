"""Command line front end.

Exit codes: 0 all assertions pass, 1 an assertion failed, 2 usage or config
error, 3 numeric failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

SCHEMA = "willmore_lab.report/1"
COMMANDS = ("generate", "energy", "invert", "quartic", "bundle-dim", "verify", "flow", "rescale")
DEFAULT_TOLERANCES = {"quadrature": 1e-8, "assertion": 1e-3}
OPTION_KEYS = {
    "generate": {"n", "inverted"},
    "energy": {"inverted"},
    "invert": set(),
    "quartic": {"n", "h", "inverted"},
    "bundle-dim": {"genus", "divisor", "transform"},
    "verify": {"suite"},
    "flow": {"input", "steps", "dt", "snapshot_every", "stepper", "level", "amplitude", "min_steps"},
    "rescale": {"input", "factor", "synthetic"},
}
TOP_KEYS = {"command", "seed", "threads", "surface", "tolerances", "output", "options"}


class UsageExit(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    surface: dict = field(default_factory=lambda: {"name": "sphere"})
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    output: dict = field(default_factory=lambda: {"dir": "."})
    seed: int = 0
    threads: int | None = None
    options: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"command": self.command, "seed": self.seed, "threads": self.threads,
                "surface": dict(self.surface), "tolerances": dict(self.tolerances),
                "output": dict(self.output), "options": dict(self.options)}

    def to_toml(self) -> str:
        lines = [f"command = {_toml_value(self.command)}", f"seed = {self.seed}"]
        if self.threads is not None:
            lines.append(f"threads = {self.threads}")
        for table in ("surface", "tolerances", "output", "options"):
            d = getattr(self, table)
            if d:
                lines += ["", f"[{table}]"] + [f"{k} = {_toml_value(v)}" for k, v in d.items() if v is not None]
        return "\n".join(lines) + "\n"


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, float)):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    return json.dumps(str(v))


def _check_tol(name, v):
    from .errors import BadTolerance

    if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0 or not math.isfinite(v):
        raise BadTolerance(f"tolerance {name} must be a positive number, got {v!r}")
    return float(v)


def config_from_dict(d: dict) -> RunConfig:
    from .catalog import PARAMETERS
    from .errors import ConfigError, UnknownKey

    unknown = set(d) - TOP_KEYS
    if unknown:
        raise UnknownKey(f"unknown keys: {sorted(unknown)}")
    cmd = d.get("command")
    if cmd not in COMMANDS:
        raise ConfigError(f"command must be one of {list(COMMANDS)}, got {cmd!r}")
    surface = dict(d.get("surface") or {"name": "sphere"})
    name = surface.get("name", "sphere")
    if name not in PARAMETERS:
        raise ConfigError(f"unknown surface {name!r}")
    bad = set(surface) - {"name"} - set(PARAMETERS[name])
    if bad:
        raise UnknownKey(f"unknown parameters for {name}: {sorted(bad)}")
    surface = {"name": name, **{k: float(surface.get(k, v)) for k, v in PARAMETERS[name].items()}}
    tols = dict(DEFAULT_TOLERANCES)
    for k, v in (d.get("tolerances") or {}).items():
        if k not in DEFAULT_TOLERANCES:
            raise UnknownKey(f"unknown tolerance {k!r}")
        tols[k] = _check_tol(k, v)
    output = dict(d.get("output") or {})
    if set(output) - {"dir"}:
        raise UnknownKey(f"unknown output keys: {sorted(set(output) - {'dir'})}")
    output.setdefault("dir", ".")
    options = {k: v for k, v in (d.get("options") or {}).items() if v is not None}
    bad = set(options) - OPTION_KEYS[cmd]
    if bad:
        raise UnknownKey(f"unknown options for {cmd}: {sorted(bad)}")
    seed = d.get("seed", 0)
    threads = d.get("threads")
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigError("seed must be an integer")
    if threads is not None and (not isinstance(threads, int) or threads < 1):
        raise ConfigError("threads must be a positive integer")
    return RunConfig(cmd, surface, tols, output, seed, threads, options)


def parse_config(text: str) -> RunConfig:
    """Validate TOML config text into a :class:`RunConfig` with defaults filled."""
    import tomli

    from .errors import ParseError

    try:
        d = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        line = getattr(exc, "lineno", None)
        col = getattr(exc, "colno", None)
        if line is None:
            m = re.search(r"line (\d+), column (\d+)", str(exc))
            if m:
                line, col = int(m.group(1)), int(m.group(2))
        raise ParseError(f"config parse error at line {line}, column {col}: {exc}", line, col) from None
    return config_from_dict(d)


# ---------------------------------------------------------------------------
# report


def _plain(x):
    import numpy as np

    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    if hasattr(x, "to_json"):
        return _plain(x.to_json())
    return x


@dataclass
class Report:
    command: str
    inputs: dict
    outputs: dict = field(default_factory=dict)
    assertions: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(a["passed"] for a in self.assertions)

    def check(self, name, passed, value=None, target=None, tol=None, **detail):
        self.assertions.append({"name": name, "passed": bool(passed), "value": value, "target": target,
                                "tol": tol, "detail": detail})

    def to_json(self) -> dict:
        return _plain({"schema": SCHEMA, "command": self.command, "inputs": self.inputs,
                       "outputs": self.outputs, "assertions": self.assertions, "passed": self.passed})

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2) + "\n"


# ---------------------------------------------------------------------------
# commands


def _entry(cfg):
    from .catalog import get_surface

    p = {k: v for k, v in cfg.surface.items() if k != "name"}
    return get_surface(cfg.surface["name"], **p)


def _surface(cfg, entry):
    if cfg.options.get("inverted"):
        return entry.inverted()
    return entry.immersion


def _out(cfg) -> Path:
    d = Path(cfg.output["dir"])
    d.mkdir(parents=True, exist_ok=True)
    return d


def cmd_generate(cfg, rep):
    from .catalog import chart_mesh
    from .flow import save_obj

    e = _entry(cfg)
    inv = bool(cfg.options.get("inverted"))
    mesh = chart_mesh(e, int(cfg.options.get("n", 32)), inverted=inv)
    path = _out(cfg) / f"{e.name}{'_inverted' if inv else ''}.obj"
    save_obj(mesh, path)
    rep.outputs.update({"mesh": path.name, "vertices": mesh.n_vertices, "faces": len(mesh.faces),
                        "ends": [[str(p), k] for p, k in e.ends],
                        "center": None if e.center is None else e.center.tolist()})


def cmd_energy(cfg, rep):
    from .quadrature import integrate, quantization_verdict

    e = _entry(cfg)
    inv = bool(cfg.options.get("inverted"))
    s = _surface(cfg, e)
    dom = e.domain()
    vals = {}
    for den in ("H2", "A2", "K"):
        r = integrate(s, dom, den, rel_tol=cfg.tolerances["quadrature"])
        vals[den] = r.value
        rep.outputs[den] = {"value": r.value, "error_estimate": r.error_estimate, "cells": r.cells,
                            "tail": r.tail_contribution}
    k, dist = quantization_verdict(vals["H2"])
    rep.outputs["W_over_4pi"] = k
    rep.outputs["distance_to_quantum"] = dist
    tol = cfg.tolerances["assertion"]
    key = {"H2": "W_inverted" if inv else "W", "A2": "A2", "K": "K"}
    for den, v in vals.items():
        if inv and den != "H2":
            continue
        want = e.expected.get(key[den])
        if want is None:
            continue
        err = abs(v - want) / abs(want) if want else abs(v)
        rep.check(f"{den} = {want / math.pi:g}pi", err <= tol, v, want, tol, rel_error=err)


def cmd_invert(cfg, rep):
    from .moebius import verify_inversion_identities

    e = _entry(cfg)
    if e.center is None:
        from .errors import ConfigError
        raise ConfigError(f"{e.name} has no inversion center in the catalog")
    r = verify_inversion_identities(e.immersion, e.center, e.ends, e.preimages, dom=e.domain(),
                                    rel_tol=cfg.tolerances["quadrature"])
    rep.outputs.update(r.to_json())
    rep.outputs["center"] = e.center.tolist()
    for lbl, v in (("K", r.residual_k), ("W", r.residual_w), ("A2", r.residual_a2)):
        rep.check(f"inversion identity for {lbl}", v <= r.tolerance, v, 0.0, r.tolerance)


def cmd_quartic(cfg, rep):
    import numpy as np

    from .conformal_gauss import quartic_samples

    e = _entry(cfg)
    s = _surface(cfg, e)
    z = e.quartic_grid(int(cfg.options.get("n", 8)))
    q = quartic_samples(s, z, h=float(cfg.options.get("h", 1e-3)))
    path = _out(cfg) / f"{e.name}_quartic.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["z_re", "z_im", "Q_re", "Q_im", "dbarQ_abs"])
        for zz, Q, d in zip(q.z, q.Q, q.dbarQ):
            w.writerow([repr(float(x)) for x in (zz.real, zz.imag, Q.real, Q.imag, abs(d))])
    rep.outputs.update({"csv": path.name, "samples": len(z), "max_scaled_Q": float(np.max(q.scaled)),
                        "max_abs_Q": float(np.max(np.abs(q.Q))), "max_dbarQ": float(np.max(np.abs(q.dbarQ)))})


def _divisor_arg(text: str):
    text = str(text).strip()
    if re.fullmatch(r"[\d,\s]*", text):
        return tuple(int(x) for x in text.split(",") if x.strip())
    return text


def cmd_bundle_dim(cfg, rep):
    from .bundle_count import _as_divisor, classification_gate, quartic_pole_space_dim

    genus = int(cfg.options.get("genus", 0))
    div = _divisor_arg(cfg.options.get("divisor", ""))
    D = _as_divisor(div)
    d_abs = sum(m for _, m in D)
    rep.outputs["genus"] = genus
    rep.outputs["divisor"] = [list(x) for x in D]
    rep.outputs["D_abs"] = d_abs
    rep.outputs["gamma"] = quartic_pole_space_dim(genus, d_abs)
    if genus == 0:
        tr = cfg.options.get("transform")
        g = classification_gate(D, None if tr is None else _divisor_arg(tr))
        js = g.to_json()
        rep.outputs["cases"] = js["cases"]
        rep.outputs["labels"] = js["labels"]
        rep.outputs["candidates"] = js["candidates"]


def cmd_verify(cfg, rep):
    from .suites import SUITES

    name = cfg.options.get("suite", "all")
    names = list(SUITES) if name == "all" else [name]
    for n in names:
        if n not in SUITES:
            from .errors import ConfigError
            raise ConfigError(f"unknown suite {n!r}; known: {['all', *SUITES]}")
    tol = cfg.options.get("tol")
    for n in names:
        for c in SUITES[n](tol, seed=cfg.seed):
            rep.check(f"[{n}] {c.name}", c.passed, c.value, c.target, c.tol, **c.detail)
    rep.outputs["suites"] = names


def _load_mesh(path):
    from .errors import ParseError
    from .flow import load_obj

    try:
        m = load_obj(path)
    except (ValueError, IndexError) as exc:
        raise ParseError(f"malformed OBJ file {path}: {exc}") from None
    if not len(m.faces):
        raise ParseError(f"OBJ file {path} has no faces")
    return m


def cmd_flow(cfg, rep):
    from .flow import FlowParams, perturbed_sphere, run_flow, save_obj

    o = cfg.options
    mesh = _load_mesh(o["input"]) if o.get("input") else perturbed_sphere(int(o.get("level", 4)),
                                                                          float(o.get("amplitude", 0.05)))
    dt = o.get("dt", "auto")
    params = FlowParams(stepper=o.get("stepper", "semi-implicit"), dt=None if dt == "auto" else float(dt),
                        max_steps=int(o.get("steps", 5000)), min_steps=int(o.get("min_steps", 0)),
                        snapshot_every=int(o.get("snapshot_every", 100)))
    res = run_flow(mesh, params)
    out = _out(cfg)
    res.write_csv(out / "series.csv")
    with open(out / "snapshots.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["step", "time", "file"])
        for step, t, m in res.snapshots:
            name = f"snapshot_{step:06d}.obj"
            save_obj(m, out / name)
            w.writerow([step, repr(float(t)), name])
    W = [r[2] for r in res.series]
    rep.outputs.update({"reason": res.reason, "steps": res.state.steps, "time": res.state.time,
                        "rejected": res.rejected, "W0": W[0], "W": W[-1], "W_over_4pi": W[-1] / (4 * math.pi),
                        "series": "series.csv", "snapshots": len(res.snapshots)})
    mono = all(b <= a * (1 + 1e-12) for a, b in zip(W, W[1:]))
    rep.check("energy non-increasing", mono, W[-1], None, None)


def cmd_rescale(cfg, rep):
    from .flow import catenoid_fit, catenoid_mesh, rescale_blowup, save_obj

    o = cfg.options
    if o.get("synthetic", not o.get("input")):
        cm = catenoid_mesh()
        traj = [(1.0 - 2.0 ** (-4 * j), cm.with_vertices(cm.vertices * 2.0 ** -j)) for j in range(5)]
    else:
        root = Path(o["input"])
        with open(root / "snapshots.csv", newline="") as fh:
            traj = [(float(r["time"]), _load_mesh(root / r["file"])) for r in csv.DictReader(fh)]
    events = rescale_blowup(traj, factor=float(o.get("factor", 2.0)))
    out = _out(cfg)
    rows = []
    for j, e in enumerate(events):
        name = f"rescaled_{j:03d}.obj"
        save_obj(e.rescaled_mesh, out / name)
        row = {"t_j": e.t_j, "x_j": list(e.x_j), "r_j": e.r_j, "file": name}
        try:
            axis, center, a, res = catenoid_fit(e.rescaled_mesh)
            row["catenoid"] = {"axis": list(axis), "center": list(center), "a": a, "residual": res}
        except Exception as exc:  # a failed fit is a recorded outcome, not an error
            row["catenoid"] = {"error": type(exc).__name__}
        rows.append(row)
    rep.outputs["events"] = rows


HANDLERS = {
    "generate": cmd_generate, "energy": cmd_energy, "invert": cmd_invert, "quartic": cmd_quartic,
    "bundle-dim": cmd_bundle_dim, "verify": cmd_verify, "flow": cmd_flow, "rescale": cmd_rescale,
}


def run(cfg: RunConfig) -> Report:
    inputs = cfg.to_dict()
    inputs["output"] = {}  # output location does not change the result
    rep = Report(cfg.command, inputs)
    HANDLERS[cfg.command](cfg, rep)
    return rep


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="TOML config; flags override its values")
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--tol", type=float, metavar="X", help="assertion tolerance")
    common.add_argument("--threads", type=int, metavar="N", help="worker threads (else WILLMORE_LAB_THREADS)")
    common.add_argument("--seed", type=int, metavar="S")

    p = argparse.ArgumentParser(prog="willmore-lab", description="Branched Willmore sphere toolkit.",
                                epilog="exit codes: 0 pass, 1 assertion failed, 2 usage, 3 numeric failure, 4 I/O")
    sub = p.add_subparsers(dest="command", metavar="COMMAND")

    def surf(sp):
        sp.add_argument("--surface", help="catalog name (sphere, catenoid, enneper, trinoid, trinoid-sym, "
                                          "torus, spheroid, ellipsoid)")
        sp.add_argument("--param", action="append", default=[], metavar="KEY=VALUE", help="surface parameter")

    g = sub.add_parser("generate", parents=[common], help="export a catalog surface as an OBJ mesh")
    surf(g)
    g.add_argument("--n", type=int)
    g.add_argument("--inverted", action="store_true", default=None)
    g = sub.add_parser("energy", parents=[common], help="W, int |A|^2 and int K with error estimates")
    surf(g)
    g.add_argument("--inverted", action="store_true", default=None)
    g = sub.add_parser("invert", parents=[common], help="check the inversion identities")
    surf(g)
    g = sub.add_parser("quartic", parents=[common], help="sample the quartic differential to CSV")
    surf(g)
    g.add_argument("--n", type=int)
    g.add_argument("--h", type=float)
    g.add_argument("--inverted", action="store_true", default=None)
    g = sub.add_parser("bundle-dim", parents=[common], help="section counts and classification verdicts")
    g.add_argument("--genus", type=int)
    g.add_argument("--divisor", help="multiplicities '2,1' or labelled '2p1+p2'")
    g.add_argument("--transform", help="conformal transform points, same formats")
    g = sub.add_parser("verify", parents=[common], help="run a reproduction suite")
    g.add_argument("--suite", help="suite name or 'all'")
    g = sub.add_parser("flow", parents=[common], help="discrete Willmore flow of a mesh")
    g.add_argument("--input", metavar="MESH.obj")
    g.add_argument("--steps", type=int)
    g.add_argument("--dt")
    g.add_argument("--snapshot-every", dest="snapshot_every", type=int)
    g.add_argument("--stepper", choices=["semi-implicit", "explicit"])
    g.add_argument("--min-steps", dest="min_steps", type=int)
    g = sub.add_parser("rescale", parents=[common], help="parabolic blow-up of a flow trajectory")
    g.add_argument("--input", metavar="DIR", help="flow output directory with snapshots.csv")
    g.add_argument("--factor", type=float)
    g.add_argument("--synthetic", action="store_true", default=None, help="shrinking-catenoid trajectory")
    return p


def config_from_args(ns) -> RunConfig:
    from .errors import ConfigError

    d = {}
    if ns.config:
        with open(ns.config) as fh:
            d = _raw_toml(fh.read())
        if d.get("command", ns.command) != ns.command:
            raise ConfigError(f"config command {d['command']!r} differs from {ns.command!r}")
    d["command"] = ns.command
    if ns.seed is not None:
        d["seed"] = ns.seed
    if ns.threads is not None:
        d["threads"] = ns.threads
    if ns.out is not None:
        d.setdefault("output", {})["dir"] = ns.out
    if getattr(ns, "surface", None):
        d["surface"] = {"name": ns.surface}
    for kv in getattr(ns, "param", []) or []:
        k, _, v = kv.partition("=")
        if not _:
            raise ConfigError(f"--param expects KEY=VALUE, got {kv!r}")
        try:
            d.setdefault("surface", {})[k] = float(v)
        except ValueError:
            raise ConfigError(f"parameter {k} must be a number") from None
    opts = d.setdefault("options", {})
    for k in OPTION_KEYS[ns.command]:
        v = getattr(ns, k, None)
        if v is not None:
            opts[k] = v
    if ns.tol is not None:
        _check_tol("--tol", ns.tol)
        d.setdefault("tolerances", {})["assertion"] = ns.tol
        if ns.command == "verify":
            opts["tol"] = ns.tol
    cfg_opts = dict(opts)
    tol = cfg_opts.pop("tol", None)
    d["options"] = cfg_opts
    cfg = config_from_dict(d)
    if tol is not None:
        cfg.options["tol"] = tol
    return cfg


def _raw_toml(text):
    import tomli

    from .errors import ParseError

    try:
        return tomli.loads(text)
    except tomli.TOMLDecodeError:
        parse_config(text)  # re-raises with line and column
        raise ParseError("config parse error")


def _set_threads(n):
    if n is None:
        env = os.environ.get("WILLMORE_LAB_THREADS")
        n = int(env) if env and env.isdigit() else None
    if n:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, str(n))


def main(argv=None) -> int:
    from .errors import WillmoreLabError

    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    if not argv:
        parser.print_usage(sys.stderr)
        return 2
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if ns.command is None:
        parser.print_usage(sys.stderr)
        return 2
    try:
        _set_threads(ns.threads)
        cfg = config_from_args(ns)
        rep = run(cfg)
        text = rep.dumps()
        out = Path(cfg.output["dir"])
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(text)
        sys.stdout.write(text)
        return 0 if rep.passed else 1
    except WillmoreLabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
