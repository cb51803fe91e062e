"""Command-line front end: scenario runs, three-way comparisons, property
checks, and plot-script emission.

Config files are flat ``key = value`` text with dotted section keys; arrays
are bracketed comma lists (``[[1,0],[0,1]]`` for matrices). Flags override
file values. Every run writes the trajectory CSV plus a manifest that parses
back to the identical resolved config.

Exit codes: 0 ok, 1 config error, 2 episode divergence, 3 property-check
failure.
"""

import argparse
import copy
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .plant import ConfigurationError
from .scenarios import run_scenario
from .sim import SimConfig, TrajectoryLog

CSV_SCHEMA_VERSION = 1

# config keys <-> SimConfig fields; kind controls parsing/serialization
CONFIG_KEYS = {
    "scenario": ("scenario", "str"),
    "controller": ("controller", "str"),
    "sim.dt": ("dt", "float"),
    "sim.t_end": ("t_end", "float"),
    "sim.seed": ("seed", "int"),
    "sim.xdot_source": ("xdot_source", "str"),
    "init.x0": ("x0", "vector"),
    "tde.g_bar": ("g_bar", "matrix"),
    "cost.Q": ("Q", "matrix"),
    "cost.beta": ("beta", "float"),
    "cost.c_bar": ("c_bar", "float"),
    "learner.Gamma": ("Gamma", "matrix"),
    "learner.k_c": ("k_c", "float"),
    "learner.k_e": ("k_e", "float"),
    "learner.P": ("buffer_size", "int"),
    "learner.policy": ("buffer_policy", "str"),
    "learner.buffer_every": ("buffer_every", "int"),
    "learner.buffer_until": ("buffer_until", "float"),
    "learner.rank_deadline": ("rank_deadline", "float"),
    "basis.exponents": ("basis_exponents", "imatrix"),
    "zsadp.gamma": ("gamma", "float"),
    "tadp.rho": ("rho", "float"),
    "baselines.track_swap": ("baselines_track_swap", "bool"),
    "noise.absolute_power": ("noise_absolute_power", "bool"),
}


def _parse_scalar(text: str):
    t = text.strip()
    if t.lower() in ("true", "false"):
        return t.lower() == "true"
    try:
        return int(t)
    except ValueError:
        pass
    try:
        return float(t)
    except ValueError:
        return t


def _parse_value(text: str):
    """Parse a config value: scalar, [a, b, c], or [[..],[..]]."""
    t = text.strip()
    if not t.startswith("["):
        return _parse_scalar(t)
    # split the top bracket level on commas
    if not t.endswith("]"):
        raise ConfigurationError(f"unbalanced brackets in {text!r}")
    inner = t[1:-1]
    parts, depth, cur = [], 0, []
    for ch in inner:
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if cur or parts:
        parts.append("".join(cur))
    return [_parse_value(p) for p in parts if p.strip()]


def _format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, str):
        return v
    arr = np.asarray(v)
    if arr.ndim == 1:
        return "[" + ", ".join(_format_value(e) for e in arr) + "]"
    return "[" + ", ".join(_format_value(row) for row in arr) + "]"


def _coerce(key: str, kind: str, value, n_hint: int = 2, N_hint: int = 6):
    try:
        if kind == "str":
            return str(value)
        if kind == "int":
            return int(value)
        if kind == "float":
            return float(value)
        if kind == "bool":
            if isinstance(value, bool):
                return value
            return str(value).lower() in ("1", "true", "yes")
        if kind == "vector":
            return np.asarray(value, dtype=float).ravel()
        if kind == "imatrix":
            return np.atleast_2d(np.asarray(value, dtype=np.int64))
        if kind == "matrix":
            # scalar shorthand: c -> c * I
            if np.isscalar(value):
                size = N_hint if key == "learner.Gamma" else n_hint
                return float(value) * np.eye(size)
            arr = np.asarray(value, dtype=float)
            return arr if arr.ndim == 2 else arr.reshape(-1, 1)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"bad value for {key}: {exc}") from exc
    raise ConfigurationError(f"unknown kind {kind}")


def read_config_file(path) -> dict:
    """Read a flat key=value config file into a {key: raw_value} dict."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{lineno}: expected key = value")
        key, _, raw = line.partition("=")
        out[key.strip()] = _parse_value(raw)
    return out


def parse_config(path=None, overrides: dict | None = None) -> SimConfig:
    """Resolve a SimConfig from an optional file plus override pairs."""
    raw = read_config_file(path) if path else {}
    for k, v in (overrides or {}).items():
        raw[k] = _parse_value(v) if isinstance(v, str) else v

    cfg = SimConfig()
    for key, value in raw.items():
        if key not in CONFIG_KEYS:
            raise ConfigurationError(f"unknown config key {key!r}")
        field_name, kind = CONFIG_KEYS[key]
        setattr(cfg, field_name, _coerce(key, kind, value))
    cfg.__post_init__()  # re-validate after overrides
    # validate matrix shapes against the basis
    from .critic import BasisSet, CostConfig
    basis = BasisSet(cfg.basis_exponents)
    CostConfig(cfg.Q, cfg.beta, cfg.c_bar)
    if cfg.Gamma.shape != (basis.N, basis.N):
        raise ConfigurationError("learner.Gamma shape does not match basis size")
    return cfg


def config_dict(cfg: SimConfig) -> dict:
    """The resolved config as canonical {config key: value} pairs."""
    out = {}
    for key, (field_name, kind) in CONFIG_KEYS.items():
        out[key] = getattr(cfg, field_name)
    return out


def csv_header(n: int, m: int, N: int) -> str:
    cols = ["t"]
    cols += [f"x_true_{i+1}" for i in range(n)]
    cols += [f"x_meas_{i+1}" for i in range(n)]
    cols += [f"u_{j+1}" for j in range(m)]
    cols += [f"du_{j+1}" for j in range(m)]
    cols += [f"w_{k+1}" for k in range(N)]
    cols += ["theta_tilde"]
    cols += [f"xi_{j+1}" for j in range(m)]
    cols += ["d", "E_u", "E_x", "rank"]
    return ",".join(cols)


def write_csv(log: TrajectoryLog, path) -> None:
    """Trajectory CSV, floats as shortest round-trip decimals."""
    n = log.x_true.shape[1]
    m = log.u.shape[1]
    N = log.w.shape[1]
    block = np.column_stack([
        log.t, log.x_true, log.x_meas, log.u, log.du, log.w,
        log.theta_tilde, log.xi, log.d, log.E_u, log.E_x,
    ])
    lines = [f"# iadp csv schema v{CSV_SCHEMA_VERSION}", csv_header(n, m, N)]
    ranks = log.rank
    for i in range(block.shape[0]):
        row = ",".join(repr(float(v)) for v in block[i])
        lines.append(f"{row},{int(ranks[i])}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_csv(path):
    """Read a trajectory CSV back into (column name -> array)."""
    lines = [ln for ln in Path(path).read_text().splitlines()
             if ln and not ln.startswith("#")]
    names = lines[0].split(",")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    return {name: data[:, j] for j, name in enumerate(names)}


def write_manifest(cfg: SimConfig, path, outputs: list, duration: float) -> None:
    lines = [
        f"# iadp run manifest, software version {__version__}",
        f"# outputs: {', '.join(str(o) for o in outputs)}",
        f"# wall_clock_s: {duration:.3f}",
    ]
    for key, value in config_dict(cfg).items():
        lines.append(f"{key} = {_format_value(value)}")
    Path(path).write_text("\n".join(lines) + "\n")


def _resolved_cfg(args) -> SimConfig:
    overrides = {}
    for item in args.override or []:
        if "=" not in item:
            raise ConfigurationError(f"--override expects key=value, got {item!r}")
        k, _, v = item.partition("=")
        overrides[k.strip()] = v.strip()
    # dedicated flags win over file values; --override wins over both
    flag_map = {
        "scenario": args.scenario, "controller": args.controller,
        "sim.seed": args.seed, "sim.dt": args.dt, "sim.t_end": args.t_end,
        "sim.xdot_source": args.xdot_source,
    }
    merged = {k: v for k, v in flag_map.items() if v is not None}
    merged.update(overrides)
    return parse_config(args.config, merged)


def _out_dir(args) -> Path:
    out = args.out_dir or os.environ.get("IADP_OUT_DIR") or "runs"
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def cmd_run(args) -> int:
    cfg = _resolved_cfg(args)
    out = _out_dir(args)
    t0 = time.perf_counter()
    log = run_scenario(cfg)
    stem = f"{cfg.scenario}_{cfg.controller}_seed{cfg.seed}"
    csv_path = out / f"{stem}.csv"
    write_csv(log, csv_path)
    write_manifest(cfg, out / f"{stem}.manifest", [csv_path],
                   time.perf_counter() - t0)
    status = "diverged" if log.diverged else "completed"
    print(f"{stem}: {status}, rows={log.rows()}, "
          f"E_u={log.E_u[-1]:.6g}, E_x={log.E_x[-1]:.6g} -> {csv_path}")
    return 2 if log.diverged else 0


def cmd_compare(args) -> int:
    cfg = _resolved_cfg(args)
    out = _out_dir(args)
    t0 = time.perf_counter()
    results = {}
    csvs = []
    for ctrl in ("iadp", "zsadp", "tadp"):
        c = copy.deepcopy(cfg)
        c.controller = ctrl
        log = run_scenario(c)
        results[ctrl] = log
        csv_path = out / f"{cfg.scenario}_{ctrl}_seed{cfg.seed}.csv"
        write_csv(log, csv_path)
        csvs.append(csv_path)

    summary = [f"# compare {cfg.scenario}, seed {cfg.seed}",
               "controller,E_u,E_x,diverged,diverged_t"]
    for ctrl, log in results.items():
        dt_at = log.t[-1] if log.diverged else ""
        summary.append(f"{ctrl},{float(log.E_u[-1])!r},{float(log.E_x[-1])!r},"
                       f"{int(log.diverged)},{dt_at}")
    iadp_eu = results["iadp"].E_u[-1]
    for base in ("zsadp", "tadp"):
        summary.append(f"# E_u ratio {base}/iadp: "
                       f"{results[base].E_u[-1] / iadp_eu:.4g}")
    spath = out / f"{cfg.scenario}_compare_seed{cfg.seed}.csv"
    spath.write_text("\n".join(summary) + "\n")
    write_manifest(cfg, out / f"{cfg.scenario}_compare_seed{cfg.seed}.manifest",
                   csvs + [spath], time.perf_counter() - t0)
    print("\n".join(summary))
    print(f"-> {spath}")
    return 2 if any(log.diverged for log in results.values()) else 0


def cmd_check(args) -> int:
    from .checks import run_all
    results = run_all(seed=args.seed if args.seed is not None else 0)
    failed = 0
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
        failed += not ok
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 3 if failed else 0


FIGURES = {
    "weights": (["w_"], "critic weights"),
    "states": (["x_true_", "x_meas_"], "states"),
    "controls": (["u_", "du_"], "controls"),
    "metrics": (["E_u", "E_x"], "accumulated metrics"),
}


def emit_plots(log_paths, out_dir) -> list:
    """Write per-figure data files plus gnuplot scripts for each log.

    With multiple logs an extra overlay figure compares their E_u curves.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    tables = {}
    for path in log_paths:
        cols = read_csv(path)
        stem = Path(path).stem
        tables[stem] = cols
        for fig, (prefixes, title) in FIGURES.items():
            names = [c for c in cols if any(
                c == p or c.startswith(p) for p in prefixes)]
            if not names:
                raise ConfigurationError(
                    f"{path}: no columns matching {prefixes} for figure {fig}")
            dat = out / f"{stem}_{fig}.dat"
            data = np.column_stack([cols["t"]] + [cols[c] for c in names])
            header = "t " + " ".join(names)
            np.savetxt(dat, data, header=header)
            gp = out / f"{stem}_{fig}.gp"
            plot_cmds = ", ".join(
                f"'{dat.name}' using 1:{j+2} with lines title '{c}'"
                for j, c in enumerate(names))
            gp.write_text(
                f"set title '{stem}: {title}'\nset xlabel 't [s]'\n"
                f"set terminal pngcairo\nset output '{stem}_{fig}.png'\n"
                f"plot {plot_cmds}\n")
            written += [dat, gp]
    if len(tables) > 1:
        gp = out / "compare_E_u.gp"
        cmds = []
        for stem, cols in tables.items():
            dat = out / f"{stem}_metrics.dat"
            idx = 2  # E_u is the first metrics column
            cmds.append(f"'{dat.name}' using 1:{idx} with lines title '{stem}'")
        gp.write_text(
            "set title 'control energy comparison'\nset xlabel 't [s]'\n"
            "set terminal pngcairo\nset output 'compare_E_u.png'\n"
            "plot " + ", ".join(cmds) + "\n")
        written.append(gp)
    return written


def cmd_plots(args) -> int:
    out = _out_dir(args)
    written = emit_plots(args.logs, out)
    for p in written:
        print(p)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="iadp", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def add_common(sp):
        sp.add_argument("--scenario", choices=("s1", "s2", "s3"))
        sp.add_argument("--controller", choices=("iadp", "zsadp", "tadp"))
        sp.add_argument("--seed", type=int)
        sp.add_argument("--dt", type=float)
        sp.add_argument("--t-end", type=float)
        sp.add_argument("--xdot-source",
                        choices=("backward_difference", "ground_truth"))
        sp.add_argument("--config")
        sp.add_argument("--out-dir")
        sp.add_argument("--override", action="append", metavar="key=value")

    sp = sub.add_parser("run", help="run one episode")
    add_common(sp)
    sp.set_defaults(fn=cmd_run)

    sp = sub.add_parser("compare", help="run all three controllers on one scenario")
    add_common(sp)
    sp.set_defaults(fn=cmd_compare)

    sp = sub.add_parser("check", help="run the fast property suites")
    sp.add_argument("--seed", type=int)
    sp.set_defaults(fn=cmd_check)

    sp = sub.add_parser("plots", help="emit plot scripts and data files from logs")
    sp.add_argument("logs", nargs="*")
    sp.add_argument("--out-dir")
    sp.set_defaults(fn=cmd_plots)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
