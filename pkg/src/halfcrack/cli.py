"""Command-line front end: config parsing, subcommands, CSV/report output.

Run configuration is an INI-style document with sections for the source
region, the sensor grid, the crack (a single plane and/or a parameter
box), the slip family, quadrature order, stability and inversion
settings, and the output directory.  Unknown sections or keys are
rejected with the offending line number.  Every command writes the
fully resolved configuration next to its results, so a run can be
reproduced from its output directory alone; nothing in the outputs
depends on wall-clock time, so repeated runs are byte-identical.

Exit codes: 0 success, 2 config error, 3 numerical failure
(non-convergence), 4 I/O failure.
"""

from __future__ import annotations

import argparse
import configparser
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import counterexample as ce
from . import inversion, jumps, stability
from .forward import (
    BoundaryData,
    SensorSet,
    SlipGrid,
    assemble_A,
    check_harmonic,
    check_neumann_top,
    eval_field,
    extract_jump,
)
from .geometry import ParamBox, PlaneParams, SourceRegion, crack_depth_margin, make_frame


class ConfigError(Exception):
    pass


class NumericalError(Exception):
    pass


_SCHEMA = {
    "region": {"x1_min", "x1_max", "x2_min", "x2_max", "n1", "n2"},
    "sensors": {"x1_min", "x1_max", "x2_min", "x2_max", "n1", "n2"},
    "crack": {
        "a",
        "b",
        "d",
        "a_min",
        "a_max",
        "b_min",
        "b_max",
        "d_min",
        "d_max",
        "beta_dist",
    },
    "slip": {"family", "amplitude", "center1", "center2", "radius", "mode1", "mode2", "path"},
    "quadrature": {"order"},
    "stability": {"tau", "lambda", "num_pairs", "seed"},
    "inversion": {"lambda", "multistart", "tol", "max_iter"},
    "output": {"directory"},
}

DEFAULT_CONFIG = """\
[region]
x1_min = -1.0
x1_max = 1.0
x2_min = -1.0
x2_max = 1.0
n1 = 9
n2 = 9

[sensors]
x1_min = -3.0
x1_max = 3.0
x2_min = -3.0
x2_max = 3.0
n1 = 11
n2 = 11

[crack]
a = 0.2
b = -0.1
d = -1.5
a_min = -0.25
a_max = 0.25
b_min = -0.25
b_max = 0.25
d_min = -2.0
d_max = -1.4
beta_dist = 0.5

[slip]
family = bump
amplitude = 1.0
center1 = 0.1
center2 = -0.05
radius = 0.8

[quadrature]
order = 4

[stability]
tau = 1e-8
lambda = auto
num_pairs = 200
seed = 7

[inversion]
lambda = auto
multistart = 3 3 3
tol = 1e-8
max_iter = 30

[output]
directory = out
"""


def make_default_config() -> str:
    """The canonical run configuration used by the examples and tests."""
    return DEFAULT_CONFIG


def _find_line(text: str, needle: str) -> int:
    for i, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped.startswith(needle):
            return i
    return 0


@dataclass
class RunConfig:
    """Validated run configuration with every module input resolved."""

    region: SourceRegion
    sensors: SensorSet
    m: PlaneParams | None
    box: ParamBox | None
    slip_family: str
    slip_params: dict
    slip_path: str | None
    quad_order: int
    tau: float
    stab_lambda: float | None
    num_pairs: int
    seed: int
    inv_lambda: float | None
    multistart: tuple[int, int, int]
    tol: float
    max_iter: int
    out_dir: str
    source_text: str
    sensor_spec: dict

    def slip(self) -> SlipGrid:
        if self.slip_path is not None:
            values = _read_slip_csv(self.slip_path, self.region)
            return SlipGrid(self.region, values)
        return SlipGrid.from_family(self.region, self.slip_family, **self.slip_params)

    def resolved_text(self, seed_override: int | None = None, out_override: str | None = None) -> str:
        seed = self.seed if seed_override is None else seed_override
        out = self.out_dir if out_override is None else out_override
        lines = ["[region]"]
        r = self.region
        lines += [
            f"x1_min = {r.x1_min!r}",
            f"x1_max = {r.x1_max!r}",
            f"x2_min = {r.x2_min!r}",
            f"x2_max = {r.x2_max!r}",
            f"n1 = {r.n1}",
            f"n2 = {r.n2}",
            "",
            "[sensors]",
        ]
        lines += [f"{k} = {v!r}" for k, v in self.sensor_spec.items()]
        lines += ["", "[crack]"]
        if self.m is not None:
            lines += [f"a = {self.m.a!r}", f"b = {self.m.b!r}", f"d = {self.m.d!r}"]
        if self.box is not None:
            lines += [
                f"a_min = {self.box.lo.a!r}",
                f"a_max = {self.box.hi.a!r}",
                f"b_min = {self.box.lo.b!r}",
                f"b_max = {self.box.hi.b!r}",
                f"d_min = {self.box.lo.d!r}",
                f"d_max = {self.box.hi.d!r}",
                f"beta_dist = {self.box.beta_dist!r}",
            ]
        lines += ["", "[slip]"]
        if self.slip_path is not None:
            lines += [f"path = {self.slip_path}"]
        else:
            lines += [f"family = {self.slip_family}"]
            lines += [f"{k} = {v!r}" for k, v in sorted(self.slip_params.items())]
        lines += [
            "",
            "[quadrature]",
            f"order = {self.quad_order}",
            "",
            "[stability]",
            f"tau = {self.tau!r}",
            "lambda = auto" if self.stab_lambda is None else f"lambda = {self.stab_lambda!r}",
            f"num_pairs = {self.num_pairs}",
            f"seed = {seed}",
            "",
            "[inversion]",
            "lambda = auto" if self.inv_lambda is None else f"lambda = {self.inv_lambda!r}",
            "multistart = " + " ".join(str(v) for v in self.multistart),
            f"tol = {self.tol!r}",
            f"max_iter = {self.max_iter}",
            "",
            "[output]",
            f"directory = {out}",
            "",
        ]
        return "\n".join(lines)


def _getfloat(section, key, text, section_name):
    raw = section.get(key)
    try:
        return float(raw)
    except (TypeError, ValueError) as exc:
        line = _find_line(text, key)
        raise ConfigError(
            f"line {line}: key '{key}' in [{section_name}] must be a number, got {raw!r}"
        ) from exc


def _getint(section, key, text, section_name):
    raw = section.get(key)
    try:
        return int(raw)
    except (TypeError, ValueError) as exc:
        line = _find_line(text, key)
        raise ConfigError(
            f"line {line}: key '{key}' in [{section_name}] must be an integer, got {raw!r}"
        ) from exc


def parse_config(text: str) -> RunConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config does not parse: {exc}") from exc

    for section in parser.sections():
        if section not in _SCHEMA:
            line = _find_line(text, f"[{section}]")
            raise ConfigError(f"line {line}: unknown section [{section}]")
        for key in parser[section]:
            if key not in _SCHEMA[section]:
                line = _find_line(text, key)
                raise ConfigError(f"line {line}: unknown key '{key}' in [{section}]")

    # plane and box key groups must each be complete or absent
    if parser.has_section("crack"):
        plane_given = [k for k in ("a", "b", "d") if k in parser["crack"]]
        box_keys = ("a_min", "a_max", "b_min", "b_max", "d_min", "d_max", "beta_dist")
        box_given = [k for k in box_keys if k in parser["crack"]]
        if plane_given and len(plane_given) != 3:
            line = _find_line(text, plane_given[0])
            raise ConfigError(f"line {line}: [crack] plane needs all of a, b, d")
        if box_given and len(box_given) != len(box_keys):
            line = _find_line(text, box_given[0])
            raise ConfigError(
                f"line {line}: [crack] box needs all of {', '.join(box_keys)}"
            )
    else:
        plane_given = []
        box_given = []

    defaults = configparser.ConfigParser()
    defaults.read_string(DEFAULT_CONFIG)
    for section in defaults.sections():
        if not parser.has_section(section):
            parser.add_section(section)
        for key, value in defaults[section].items():
            if section == "crack":
                # fill a crack group from the defaults only when the user
                # supplied neither group member
                in_plane = key in ("a", "b", "d")
                if in_plane and (plane_given or box_given):
                    continue
                if not in_plane and (box_given or plane_given):
                    continue
            if key not in parser[section]:
                parser[section][key] = value

    reg = parser["region"]
    region = SourceRegion(
        _getfloat(reg, "x1_min", text, "region"),
        _getfloat(reg, "x1_max", text, "region"),
        _getfloat(reg, "x2_min", text, "region"),
        _getfloat(reg, "x2_max", text, "region"),
        _getint(reg, "n1", text, "region"),
        _getint(reg, "n2", text, "region"),
    )

    sen = parser["sensors"]
    sensor_spec = {
        "x1_min": _getfloat(sen, "x1_min", text, "sensors"),
        "x1_max": _getfloat(sen, "x1_max", text, "sensors"),
        "x2_min": _getfloat(sen, "x2_min", text, "sensors"),
        "x2_max": _getfloat(sen, "x2_max", text, "sensors"),
        "n1": _getint(sen, "n1", text, "sensors"),
        "n2": _getint(sen, "n2", text, "sensors"),
    }
    sensors = SensorSet.grid(**sensor_spec)

    crack = parser["crack"]
    m = None
    if all(crack.get(k) is not None for k in ("a", "b", "d")):
        m = PlaneParams(
            _getfloat(crack, "a", text, "crack"),
            _getfloat(crack, "b", text, "crack"),
            _getfloat(crack, "d", text, "crack"),
        )
    box = None
    box_keys = ("a_min", "a_max", "b_min", "b_max", "d_min", "d_max", "beta_dist")
    if all(crack.get(k) is not None for k in box_keys):
        vals = {k: _getfloat(crack, k, text, "crack") for k in box_keys}
        try:
            box = ParamBox(
                PlaneParams(vals["a_min"], vals["b_min"], vals["d_min"]),
                PlaneParams(vals["a_max"], vals["b_max"], vals["d_max"]),
                vals["beta_dist"],
            )
            box.check(region)
        except ValueError as exc:
            raise ConfigError(f"invalid crack box: {exc}") from exc

    slip_sec = parser["slip"]
    slip_path = slip_sec.get("path")
    slip_family = slip_sec.get("family", "bump")
    slip_params = {}
    for key in ("amplitude", "center1", "center2", "radius"):
        if slip_sec.get(key) is not None:
            slip_params[key] = _getfloat(slip_sec, key, text, "slip")
    for key in ("mode1", "mode2"):
        if slip_sec.get(key) is not None:
            slip_params[key] = _getint(slip_sec, key, text, "slip")
    if slip_family == "sine":
        slip_params = {
            k: v for k, v in slip_params.items() if k in ("amplitude", "mode1", "mode2")
        }
    if slip_family not in ("bump", "sine"):
        line = _find_line(text, "family")
        raise ConfigError(f"line {line}: unknown slip family '{slip_family}'")

    stab = parser["stability"]
    stab_lambda_raw = stab.get("lambda", "auto")
    inv_sec = parser["inversion"]
    inv_lambda_raw = inv_sec.get("lambda", "auto")
    multistart_raw = inv_sec.get("multistart", "3 3 3").split()
    if len(multistart_raw) != 3:
        line = _find_line(text, "multistart")
        raise ConfigError(f"line {line}: multistart needs 3 integers")

    return RunConfig(
        region=region,
        sensors=sensors,
        m=m,
        box=box,
        slip_family=slip_family,
        slip_params=slip_params,
        slip_path=slip_path,
        quad_order=_getint(parser["quadrature"], "order", text, "quadrature"),
        tau=_getfloat(stab, "tau", text, "stability"),
        stab_lambda=None if stab_lambda_raw == "auto" else float(stab_lambda_raw),
        num_pairs=_getint(stab, "num_pairs", text, "stability"),
        seed=_getint(stab, "seed", text, "stability"),
        inv_lambda=None if inv_lambda_raw == "auto" else float(inv_lambda_raw),
        multistart=tuple(int(v) for v in multistart_raw),
        tol=_getfloat(inv_sec, "tol", text, "inversion"),
        max_iter=_getint(inv_sec, "max_iter", text, "inversion"),
        out_dir=parser["output"].get("directory", "out"),
        source_text=text,
        sensor_spec=sensor_spec,
    )


def _require_plane(cfg: RunConfig) -> PlaneParams:
    if cfg.m is None:
        raise ConfigError("this command needs a plane (a, b, d) in [crack]")
    margin = crack_depth_margin(cfg.m, cfg.region)
    if margin <= 0:
        raise ConfigError(
            "crack plane violates the surface clearance bound: minimum "
            f"crack-to-surface distance over the region is {margin:.6g}, "
            "but a positive clearance is required"
        )
    return cfg.m


def _require_box(cfg: RunConfig) -> ParamBox:
    if cfg.box is None:
        raise ConfigError("this command needs a parameter box (a_min..d_max, beta_dist) in [crack]")
    return cfg.box


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _read_data_csv(path: str, sensors: SensorSet) -> BoundaryData:
    try:
        raw = np.genfromtxt(path, delimiter=",", names=True)
    except OSError:
        raise
    except Exception as exc:
        raise ConfigError(f"data file {path} does not parse as CSV: {exc}") from exc
    names = raw.dtype.names
    if names is None or "x1" not in names or "x2" not in names or "value" not in names:
        raise ConfigError(f"data file {path} needs columns x1,x2,value")
    pts = np.column_stack([raw["x1"], raw["x2"]])
    if pts.shape[0] != len(sensors) or not np.allclose(pts, sensors.points, atol=1e-9):
        raise ConfigError(
            f"data file {path} points do not match the configured sensor grid"
        )
    return BoundaryData(sensors, np.asarray(raw["value"], dtype=float))


def _read_slip_csv(path: str, region: SourceRegion) -> np.ndarray:
    raw = np.genfromtxt(path, delimiter=",", names=True)
    names = raw.dtype.names
    if names is None or "x1" not in names or "x2" not in names or "value" not in names:
        raise ConfigError(f"slip file {path} needs columns x1,x2,value")
    if len(raw) != region.n1 * region.n2:
        raise ConfigError(
            f"slip file {path} has {len(raw)} rows, expected {region.n1 * region.n2}"
        )
    return np.asarray(raw["value"], dtype=float).reshape(region.n1, region.n2)


def _write_resolved(cfg: RunConfig, out: Path, seed: int | None) -> None:
    (out / "resolved_config.ini").write_text(
        cfg.resolved_text(seed_override=seed, out_override=str(out))
    )


def cmd_forward(cfg: RunConfig, out: Path, seed: int | None) -> int:
    m = _require_plane(cfg)
    slip = cfg.slip()
    _write_resolved(cfg, out, seed)

    A = assemble_A(m, cfg.region, cfg.sensors, cfg.quad_order)
    data = A.apply(slip)
    pts3 = cfg.sensors.points3()
    write_csv(
        out / "boundary_data.csv",
        ["x1", "x2", "x3", "value"],
        zip(pts3[:, 0], pts3[:, 1], pts3[:, 2], data.values),
    )

    # vertical field slice through the region center, below the crack
    frame = make_frame(m)
    x1s = np.linspace(cfg.region.x1_min - 1.0, cfg.region.x1_max + 1.0, 41)
    depth = m.d - 2.0
    slice_pts = np.column_stack([x1s, np.zeros_like(x1s), np.full_like(x1s, depth)])
    slice_vals = eval_field(m, cfg.region, slip, slice_pts, cfg.quad_order)
    write_csv(
        out / "field_slice.csv",
        ["x1", "x2", "x3", "value"],
        zip(slice_pts[:, 0], slice_pts[:, 1], slice_pts[:, 2], slice_vals),
    )

    # PDE-level checks
    margin = crack_depth_margin(m, cfg.region)
    cx = 0.5 * (cfg.region.x1_min + cfg.region.x1_max)
    cy = 0.5 * (cfg.region.x2_min + cfg.region.x2_max)
    below = m.height(cx, cy) - 0.8 * margin
    probes = np.array(
        [
            [cx, cy, below],
            [cfg.region.x1_max + 1.0, cy, -0.5 * margin],
            [cx, cfg.region.x2_min - 1.5, below],
            [cfg.region.x1_min - 1.0, cfg.region.x2_max + 1.0, below - 1.0],
            [cx + 0.3, cy - 0.4, below - 2.0],
        ]
    )
    harm = check_harmonic(m, cfg.region, slip, probes, 1e-3, cfg.quad_order)
    neu_abs, neu_rel = check_neumann_top(m, cfg.region, slip, cfg.sensors.points, cfg.quad_order)

    horiz = np.array([-m.a, -m.b])
    nh = np.linalg.norm(horiz)
    horiz = horiz / nh if nh > 0 else np.array([1.0, 0.0])
    direction = np.array([horiz[0], horiz[1], -0.5])
    direction /= np.linalg.norm(direction)
    diam = np.hypot(
        cfg.region.x1_max - cfg.region.x1_min, cfg.region.x2_max - cfg.region.x2_min
    ) * frame.sigma
    base = max(10.0 * diam, 24.0)
    ray = direction[None, :] * (base * np.array([1.0, 2.0, 4.0]))[:, None]
    uray = eval_field(m, cfg.region, slip, ray, cfg.quad_order)
    ratios = uray[1:] / uray[:-1]

    p_jump = (cfg.slip_params.get("center1", cx), cfg.slip_params.get("center2", cy))
    eps0 = 0.4 * min(cfg.region.h1, cfg.region.h2)
    jump, _ = extract_jump(m, cfg.region, slip, p_jump, [eps0, eps0 / 2, eps0 / 4], cfg.quad_order)
    gval = slip.value_at(np.array(p_jump))
    jump_rel = abs(jump - gval) / max(abs(gval), 1e-300)

    report = [
        f"harmonic_max_rel = {float(harm)!r}",
        "harmonic_pass = " + ("yes" if harm <= 1e-5 else "no"),
        f"neumann_top_max_abs = {float(neu_abs)!r}",
        f"neumann_top_max_rel = {float(neu_rel)!r}",
        "neumann_pass = " + ("yes" if neu_rel <= 1e-12 else "no"),
        f"decay_ratio_1 = {float(ratios[0])!r}",
        f"decay_ratio_2 = {float(ratios[1])!r}",
        "decay_pass = "
        + (
            ("yes" if np.all((ratios > 0.23) & (ratios < 0.27)) else "no")
            if nh > 0
            else "n/a (horizontal crack has no leading far-field term)"
        ),
        f"jump_point = {float(p_jump[0])!r} {float(p_jump[1])!r}",
        f"jump_extrapolated = {float(jump)!r}",
        f"jump_slip_value = {float(gval)!r}",
        f"jump_rel_err = {float(jump_rel)!r}",
        "jump_pass = " + ("yes" if jump_rel <= 1e-2 else "no"),
    ]
    (out / "checks_report.txt").write_text("\n".join(report) + "\n")
    return 0


def cmd_invert(cfg: RunConfig, out: Path, seed: int | None, data_path: str) -> int:
    box = _require_box(cfg)
    data = _read_data_csv(data_path, cfg.sensors)
    _write_resolved(cfg, out, seed)
    inv_cfg = inversion.InverseConfig(
        region=cfg.region,
        box=box,
        lam=cfg.inv_lambda,
        multistart=cfg.multistart,
        max_iter=cfg.max_iter,
        tol=cfg.tol,
        quad_order=cfg.quad_order,
    )
    result = inversion.reconstruct(data, inv_cfg)

    nodes1 = cfg.region.x1_nodes()
    nodes2 = cfg.region.x2_nodes()
    rows = []
    for i, x1 in enumerate(nodes1):
        for j, x2 in enumerate(nodes2):
            rows.append((x1, x2, result.g_star.values[i, j]))
    write_csv(out / "slip_recovered.csv", ["x1", "x2", "value"], rows)

    summary = [
        f"a = {result.m_star.a!r}",
        f"b = {result.m_star.b!r}",
        f"d = {result.m_star.d!r}",
        f"residual_l2v = {result.residual!r}",
        f"iterations = {result.iterations}",
        f"converged = {'yes' if result.converged else 'no'}",
        f"on_box_boundary = {'yes' if result.on_boundary else 'no'}",
        f"lambda = {float(result.lam)!r}",
        f"multistart = {' '.join(str(v) for v in cfg.multistart)}",
        f"num_starts = {len(result.traces)}",
    ]
    (out / "result_summary.txt").write_text("\n".join(summary) + "\n")
    return 0 if result.converged else 3


def cmd_stability(cfg: RunConfig, out: Path, seed: int | None) -> int:
    m = _require_plane(cfg)
    box = _require_box(cfg)
    slip = cfg.slip()
    _write_resolved(cfg, out, seed)
    the_seed = cfg.seed if seed is None else seed
    fmap = stability.FixedSlipMap(cfg.region, cfg.sensors, slip, cfg.quad_order)

    A = fmap.operator(m)
    sigmas = stability.weighted_singular_values(A)
    write_csv(
        out / "spectrum.csv",
        ["k", "sigma_rel"],
        ((k, s / sigmas[0]) for k, s in enumerate(sigmas)),
    )

    scan = stability.lipschitz_scan(fmap, box, cfg.num_pairs, the_seed)
    rows = []
    for (ma, mb), ratio in zip(scan.pairs, scan.ratios):
        rows.append(
            (ma.a, ma.b, ma.d, mb.a, mb.b, mb.d,
             float(np.linalg.norm(ma.as_array() - mb.as_array())), float(ratio))
        )
    write_csv(
        out / "pair_scan.csv",
        ["a", "b", "d", "a2", "b2", "d2", "dist", "ratio"],
        rows,
    )

    rng = np.random.default_rng(the_seed + 1)
    direction = rng.normal(size=3)
    direction /= np.linalg.norm(direction)
    ray_rows = []
    for mode in ("projection", "regularized"):
        for dist in np.geomspace(0.02, 0.2, 7):
            m2 = PlaneParams.from_array(box.clip(m.as_array() + dist * direction))
            actual = float(np.linalg.norm(m2.as_array() - m.as_array()))
            if actual == 0.0:
                continue
            val = stability.inf_residual(
                fmap, m2, m, mode=mode, tau=cfg.tau, lam=cfg.stab_lambda
            )
            ray_rows.append((mode, actual, val, val / actual))
    write_csv(out / "inf_ray.csv", ["mode", "dist", "residual", "ratio"], ray_rows)

    jac = stability.forward_jacobian(fmap, m)
    summary = [
        f"c_emp = {float(scan.c_emp)!r}",
        f"argmin_pair = ({scan.argmin_pair[0].a!r}, {scan.argmin_pair[0].b!r}, "
        f"{scan.argmin_pair[0].d!r}) -> ({scan.argmin_pair[1].a!r}, "
        f"{scan.argmin_pair[1].b!r}, {scan.argmin_pair[1].d!r})",
        f"gram_min_eig_at_m = {float(stability.gram_min_eig(jac))!r}",
        f"num_pairs = {len(scan.pairs)}",
        f"tau = {cfg.tau!r}",
        "lambda = auto" if cfg.stab_lambda is None else f"lambda = {cfg.stab_lambda!r}",
        f"seed = {the_seed}",
        f"quad_order = {cfg.quad_order}",
        f"region = [{cfg.region.x1_min!r}, {cfg.region.x1_max!r}] x "
        f"[{cfg.region.x2_min!r}, {cfg.region.x2_max!r}] {cfg.region.n1}x{cfg.region.n2}",
    ]
    (out / "summary.txt").write_text("\n".join(summary) + "\n")
    return 0


def cmd_jumps(cfg: RunConfig, out: Path, seed: int | None) -> int:
    m = _require_plane(cfg)
    _write_resolved(cfg, out, seed)
    pair = jumps.TestPair()
    eps_list = [0.1, 0.05, 0.025]
    rows = []
    worst = 0.0
    for kind in jumps.ALL_KINDS:
        chk = jumps.verify_jump(kind, m, pair, eps_list)
        worst = max(worst, chk.rel_err)
        for eps, lhs in zip(chk.eps_list, chk.lhs_values):
            rows.append((kind.value, eps, lhs, chk.limit, chk.rhs, chk.rel_err))
    write_csv(
        out / "jumps.csv",
        ["kind", "eps", "lhs", "extrapolated", "rhs", "rel_err"],
        rows,
    )
    (out / "summary.txt").write_text(
        f"worst_rel_err = {float(worst)!r}\npass = {'yes' if worst <= 1e-2 else 'no'}\n"
    )
    return 0


def cmd_counterexample(cfg: RunConfig, out: Path, seed: int | None) -> int:
    _write_resolved(cfg, out, seed)
    setup = ce.CounterexampleSetup()
    pts3 = cfg.sensors.points3()
    from .geometry import CapKind

    u_low = ce.eval_counterexample_field(setup, CapKind.CAP_LOW, pts3)
    u_high = ce.eval_counterexample_field(setup, CapKind.CAP_HIGH, pts3)
    du_low = ce.counterexample_field_dx3(setup, CapKind.CAP_LOW, pts3)
    du_high = ce.counterexample_field_dx3(setup, CapKind.CAP_HIGH, pts3)
    write_csv(
        out / "fields.csv",
        ["x1", "x2", "u_low_cap", "u_high_cap", "u_diff", "dx3_diff"],
        zip(pts3[:, 0], pts3[:, 1], u_low, u_high, u_low - u_high, du_low - du_high),
    )
    scale = float(np.max(np.abs(u_low)))
    max_du = float(np.max(np.abs(u_low - u_high)))
    max_ddu = float(np.max(np.abs(du_low - du_high)))
    inside = ce.field_difference(setup, np.array([0.0, 0.0, -2.0]))
    outside = ce.field_difference(setup, np.array([0.0, 0.0, -10.0]))
    report = [
        f"max_abs_u_diff = {max_du!r}",
        f"max_abs_dx3_diff = {max_ddu!r}",
        f"field_scale = {scale!r}",
        f"max_rel_u_diff = {max_du / scale!r}",
        f"interior_probe_u_diff = {inside!r}",
        "interior_expected = -3",
        f"exterior_probe_u_diff = {outside!r}",
        "exterior_expected = 0",
        f"quadrature = n_r {setup.n_r} n_theta {setup.n_theta}",
    ]
    (out / "report.txt").write_text("\n".join(report) + "\n")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="halfcrack",
        description="Half-space crack potentials: forward runs, jump checks, "
        "stability scans, inversion, and the twin-crack counterexample.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("forward", "invert", "stability", "jumps", "counterexample"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="run configuration (INI)")
        p.add_argument("--out", default=None, help="output directory (overrides config)")
        p.add_argument("--seed", type=int, default=None, help="seed override")
        if name == "invert":
            p.add_argument("--data", required=True, help="boundary data CSV (x1,x2,value)")
    args = parser.parse_args(argv)

    try:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            print(f"halfcrack: cannot read config: {exc}", file=sys.stderr)
            return 4
        cfg = parse_config(text)
        out = Path(args.out if args.out is not None else cfg.out_dir)
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            print(f"halfcrack: cannot create output directory: {exc}", file=sys.stderr)
            return 4
        if args.command == "forward":
            return cmd_forward(cfg, out, args.seed)
        if args.command == "invert":
            try:
                return cmd_invert(cfg, out, args.seed, args.data)
            except OSError as exc:
                print(f"halfcrack: cannot read data: {exc}", file=sys.stderr)
                return 4
        if args.command == "stability":
            return cmd_stability(cfg, out, args.seed)
        if args.command == "jumps":
            return cmd_jumps(cfg, out, args.seed)
        if args.command == "counterexample":
            return cmd_counterexample(cfg, out, args.seed)
        raise AssertionError("unreachable")
    except ConfigError as exc:
        print(f"halfcrack: config error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"halfcrack: config error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"halfcrack: numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
