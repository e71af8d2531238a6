"""Command-line front end: direct computation, simulation, estimation,
prediction, and reproducible figure recipes.

Exit codes: 0 success, 2 parameter/usage error, 3 numerical-contract
violation (truncation, resolution, range, coverage).

Recipes write every numeric artifact as CSV, render a PNG next to each, and
finish with a JSON manifest recording parameters, verdicts, checksums, and
runtimes.  The CSV bytes are deterministic for a fixed config; runtimes
live only in the manifest.
"""

import argparse
import hashlib
import json
import os
import sys
import time

import numpy as np

from .errors import NumericalContractError, ParameterError
from .filters import build_filter
from .homodyne import read_dataset, simulate_dataset, write_dataset
from .processes import PhotonAddition, format_process, parse_process
from .quasiprob import (
    GridSpec, RadialGridSpec, negativity_scan, nqd_direct, nqd_direct_point,
    pnqd_direct, write_grid,
)
from .states import (
    Coherent, PhotonAdded, PhotonSubtracted, SqueezedVacuum, Thermal,
    parse_state,
)
from .estimator import (
    PnqdTable, read_pnqd, sample_nqd, sample_nqd_eta_removed,
    sample_nqd_point, sample_pnqd, write_pnqd,
)
from .predictor import ThermalRadial, parse_input_pspec, predict_output_nqd

_FMT = "{:.17g}".format


# ---------------------------------------------------------------------------
# shared argument plumbing

def _parse_grid_arg(text: str) -> GridSpec:
    parts = text.split(",")
    try:
        if len(parts) == 2:
            return GridSpec(n=int(parts[0]), half_width=float(parts[1]))
        if len(parts) == 4:
            return GridSpec(
                n=int(parts[0]), half_width=float(parts[1]),
                center=complex(float(parts[2]), float(parts[3])),
            )
    except ValueError:
        pass
    raise ParameterError(
        f"bad --grid {text!r}; expected n,half_width[,center_re,center_im]"
    )


def _parse_radial_arg(text: str) -> RadialGridSpec:
    parts = text.split(",")
    try:
        if len(parts) == 2:
            return RadialGridSpec(r_max=float(parts[0]), n=int(parts[1]))
    except ValueError:
        pass
    raise ParameterError(f"bad --radial {text!r}; expected r_max,n")


def _grid_from_args(args):
    if getattr(args, "radial", None):
        if getattr(args, "grid", None):
            raise ParameterError("--grid and --radial are mutually exclusive")
        return _parse_radial_arg(args.radial)
    if getattr(args, "grid", None):
        return _parse_grid_arg(args.grid)
    return GridSpec()


def _parse_alphas(text: str) -> list:
    """Amplitude lists: 'a,b,c' or 'start:stop:count'."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ParameterError(f"bad --alphas {text!r}; expected start:stop:count")
        try:
            lo, hi, k = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise ParameterError(f"bad --alphas {text!r}") from None
        if k < 1:
            raise ParameterError("amplitude count must be positive")
        return list(np.linspace(lo, hi, k))
    try:
        return [float(p) for p in text.split(",")]
    except ValueError:
        raise ParameterError(f"bad --alphas {text!r}") from None


def _report_scan(g, label: str) -> dict:
    scan = negativity_scan(g)
    line = (
        f"{label}: min={scan.min_value:.6g} at "
        f"({scan.argmin.real:.3g}, {scan.argmin.imag:.3g})"
    )
    if scan.significance is not None:
        line += f" significance={scan.significance:.2f}"
    line += f" -> {scan.verdict}"
    print(line)
    out = {
        "min_value": scan.min_value,
        "argmin": [scan.argmin.real, scan.argmin.imag],
        "verdict": scan.verdict,
    }
    if scan.significance is not None:
        out["significance"] = scan.significance
    return out


# ---------------------------------------------------------------------------
# subcommands

def cmd_filter(args) -> int:
    f = build_filter(args.width, args.tol)
    with open(args.out, "w") as fh:
        fh.write(f"# w={_FMT(args.width)} b_max={_FMT(f.b_max)} tol={_FMT(args.tol)}\n")
        fh.write("# columns: b,omega\n")
        for b, om in zip(f.table_b, f.table_omega):
            fh.write(f"{_FMT(b)},{_FMT(om)}\n")
    print(f"filter w={args.width:g}: b_max={f.b_max:.6g}, {f.table_b.size} rows -> {args.out}")
    if args.plot:
        from .plotting import plot_filter
        plot_filter(f, args.plot)
    return 0


def cmd_simulate(args) -> int:
    s = parse_state(args.state)
    if args.phases < 1:
        raise ParameterError("need at least one phase")
    if args.n % args.phases:
        raise ParameterError(
            f"total samples {args.n} not divisible by {args.phases} phases"
        )
    phases = [k * np.pi / args.phases for k in range(args.phases)]
    alpha = None
    if args.alpha is not None:
        parts = args.alpha.split(",")
        try:
            alpha = complex(float(parts[0]), float(parts[1]))
        except (ValueError, IndexError):
            raise ParameterError(f"bad --alpha {args.alpha!r}; expected re,im") from None
    d = simulate_dataset(
        s, phases, args.n // args.phases, eta=args.eta, seed=args.seed,
        alpha_tag=alpha,
    )
    write_dataset(d, args.out)
    print(f"simulated {d.n_total} samples ({args.phases} phases) -> {args.out}")
    return 0


def cmd_nqd(args) -> int:
    s = parse_state(args.state)
    f = build_filter(args.width, args.tol)
    g = nqd_direct(s, f, _grid_from_args(args))
    write_grid(g, args.out)
    _report_scan(g, args.state)
    if args.plot:
        from .plotting import plot_grid
        plot_grid(g, args.plot)
    return 0


def cmd_pnqd(args) -> int:
    p = parse_process(args.process)
    f = build_filter(args.width, args.tol)
    grid = _grid_from_args(args)
    alphas = _parse_alphas(args.alphas)
    if isinstance(grid, RadialGridSpec):
        from .predictor import direct_radial_pnqd_table
        table = direct_radial_pnqd_table(p, alphas, f, grid)
    else:
        grids = []
        for a in sorted(alphas):
            g = pnqd_direct(p, complex(a), f, grid)
            _report_scan(g, f"alpha={a:g}")
            grids.append(g)
        table = PnqdTable(
            alphas=tuple(complex(a) for a in sorted(alphas)), grids=tuple(grids),
            width=args.width, phase_randomized=False, process=p,
        )
    write_pnqd(table, args.out)
    print(f"{len(table.alphas)} amplitude grids -> {args.out}")
    return 0


def cmd_sample(args) -> int:
    d = read_dataset(args.data)
    grid = _grid_from_args(args)
    if args.phase_randomized and not isinstance(grid, RadialGridSpec):
        raise ParameterError("--phase-randomized needs --radial")
    if args.remove_eta:
        g = sample_nqd_eta_removed(d, grid, args.width, args.tol)
    else:
        g = sample_nqd(d, grid, build_filter(args.width, args.tol))
    write_grid(g, args.out)
    _report_scan(g, os.path.basename(args.data))
    if args.plot:
        from .plotting import plot_grid
        plot_grid(g, args.plot)
    return 0


def cmd_predict(args) -> int:
    table = read_pnqd(args.pnqd)
    spec = parse_input_pspec(args.input)
    g = predict_output_nqd(table, spec)
    write_grid(g, args.out)
    _report_scan(g, f"prediction for {args.input}")
    if args.plot:
        from .plotting import plot_grid
        plot_grid(g, args.plot)
    return 0


# ---------------------------------------------------------------------------
# recipes

_RECIPE_PHASES = 10
_RECIPE_SAMPLES = 266000
_RECIPE_AMPLITUDES = np.linspace(0.0, 1.6, 13)


class _Manifest:
    def __init__(self, recipe: str, out_dir: str, params: dict):
        self.data = {
            "recipe": recipe,
            "parameters": params,
            "artifacts": {},
            "verdicts": {},
            "runtimes_s": {},
        }
        self.out_dir = out_dir
        os.makedirs(out_dir, exist_ok=True)
        self._t0 = time.perf_counter()
        self._stage = None

    def path(self, name: str) -> str:
        return os.path.join(self.out_dir, name)

    def stage(self, name: str):
        self.finish_stage()
        self._stage = name
        self._t0 = time.perf_counter()
        print(f"[{self.data['recipe']}] {name} ...")

    def finish_stage(self):
        if self._stage is not None:
            self.data["runtimes_s"][self._stage] = round(
                time.perf_counter() - self._t0, 3
            )
            self._stage = None

    def record(self, name: str):
        p = self.path(name)
        digest = hashlib.sha256()
        with open(p, "rb") as fh:
            for chunk in iter(lambda: fh.read(1 << 20), b""):
                digest.update(chunk)
        self.data["artifacts"][name] = {
            "sha256": digest.hexdigest(),
            "bytes": os.path.getsize(p),
        }

    def write(self) -> str:
        self.finish_stage()
        p = self.path("manifest.json")
        with open(p, "w") as fh:
            json.dump(self.data, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return p


def _render_grid(m: _Manifest, g, stem: str):
    from .plotting import plot_grid
    write_grid(g, m.path(stem + ".csv"))
    m.record(stem + ".csv")
    plot_grid(g, m.path(stem + ".png"))
    m.record(stem + ".png")


def _recipe_fig1(m: _Manifest, args) -> None:
    m.stage("direct grid")
    f = build_filter(1.5)
    s = PhotonSubtracted(SqueezedVacuum(0.5, 3.0))
    g = nqd_direct(s, f, GridSpec(n=81, half_width=4.0))
    m.data["verdicts"]["nqd"] = _report_scan(g, "subtracted squeezed vacuum")
    _render_grid(m, g, "fig1_nqd")


def _recipe_fig2(m: _Manifest, args) -> None:
    m.stage("direct grid")
    f = build_filter(1.5)
    g = pnqd_direct(parse_process("kerrcat"), 2.0, f, GridSpec(n=81, half_width=4.0))
    m.data["verdicts"]["pnqd"] = _report_scan(g, "Kerr cat at amplitude 2")
    _render_grid(m, g, "fig2_pnqd")


def _simulated_addition_datasets(
    m: _Manifest, amplitudes, n_total, seed, stem, n_phases=_RECIPE_PHASES
):
    """One dataset per probe amplitude; dataset k uses seed + k."""
    datasets = []
    for k, a in enumerate(amplitudes):
        s = PhotonAdded(Coherent(complex(a)))
        phases = [j * np.pi / n_phases for j in range(n_phases)]
        d = simulate_dataset(
            s, phases, n_total // n_phases, eta=1.0, seed=seed + k,
            alpha_tag=complex(a),
        )
        name = f"{stem}_data_a{k:02d}.csv"
        write_dataset(d, m.path(name))
        m.record(name)
        datasets.append(d)
    return datasets


def _check_recipe_n(n_total: int, n_phases: int = _RECIPE_PHASES) -> None:
    if n_total % n_phases:
        raise ParameterError(
            f"total samples {n_total} not divisible by {n_phases} phases"
        )
    if n_total < 2 * n_phases:
        raise ParameterError("need at least 2 samples per phase")


def _recipe_fig3(m: _Manifest, args) -> None:
    # grid points reach |beta| = 3 sqrt(2); 40 phases keep the discrete phase
    # average faithful out there (harmonics below order 80 are exact)
    n_phases = 40
    n_total = args.n or _RECIPE_SAMPLES
    _check_recipe_n(n_total, n_phases)
    m.data["parameters"]["n_total"] = n_total
    m.data["parameters"]["n_phases"] = n_phases
    amplitudes = [0.0, 0.46, 1.12]
    m.stage("simulate")
    datasets = _simulated_addition_datasets(
        m, amplitudes, n_total, args.seed, "fig3", n_phases=n_phases
    )
    m.stage("sample grids")
    table = sample_pnqd(
        datasets, GridSpec(n=41, half_width=3.0), build_filter(1.2),
        process=PhotonAddition(),
    )
    write_pnqd(table, m.path("fig3_pnqd.csv"))
    m.record("fig3_pnqd.csv")
    from .plotting import plot_grid
    for k, (a, g) in enumerate(zip(table.alphas, table.grids)):
        m.record(f"fig3_pnqd_a{k:02d}.csv")
        m.data["verdicts"][f"alpha={a.real:g}"] = _report_scan(g, f"alpha={a.real:g}")
        plot_grid(g, m.path(f"fig3_pnqd_a{k:02d}.png"))
        m.record(f"fig3_pnqd_a{k:02d}.png")


def _recipe_fig4(m: _Manifest, args) -> None:
    n_total = args.n or _RECIPE_SAMPLES
    _check_recipe_n(n_total)
    m.data["parameters"]["n_total"] = n_total
    f = build_filter(1.2)
    m.stage("simulate")
    datasets = _simulated_addition_datasets(
        m, _RECIPE_AMPLITUDES, n_total, args.seed, "fig4"
    )
    m.stage("estimate at beta=0")
    rows = [sample_nqd_point(d, 0j, f) for d in datasets]
    with open(m.path("fig4.csv"), "w") as fh:
        fh.write(
            f"# fig4 w={_FMT(1.2)} n={n_total} phases={_RECIPE_PHASES} seed={args.seed}\n"
        )
        fh.write("# columns: alpha,value,stat_err\n")
        for a, (v, e) in zip(_RECIPE_AMPLITUDES, rows):
            fh.write(f"{_FMT(a)},{_FMT(v)},{_FMT(e)}\n")
    m.record("fig4.csv")
    m.stage("direct reference")
    direct = [
        nqd_direct_point(PhotonAdded(Coherent(complex(a))), f, 0j)
        for a in _RECIPE_AMPLITUDES
    ]
    with open(m.path("fig4_direct.csv"), "w") as fh:
        fh.write(f"# fig4-direct w={_FMT(1.2)}\n")
        fh.write("# columns: alpha,value\n")
        for a, v in zip(_RECIPE_AMPLITUDES, direct):
            fh.write(f"{_FMT(a)},{_FMT(v)}\n")
    m.record("fig4_direct.csv")
    worst = min(range(13), key=lambda k: rows[k][0] / rows[k][1])
    m.data["verdicts"]["most_negative"] = {
        "alpha": float(_RECIPE_AMPLITUDES[worst]),
        "value": rows[worst][0],
        "stat_err": rows[worst][1],
        "significance": -rows[worst][0] / rows[worst][1],
    }
    from .plotting import plot_point_curve
    plot_point_curve(
        _RECIPE_AMPLITUDES, [r[0] for r in rows], [r[1] for r in rows],
        m.path("fig4.png"), "probe amplitude", "P(0)",
        overlay=(_RECIPE_AMPLITUDES, direct),
        title="addition outputs at beta = 0",
    )
    m.record("fig4.png")


def _recipe_fig5(m: _Manifest, args) -> None:
    n_total = args.n or _RECIPE_SAMPLES
    _check_recipe_n(n_total)
    m.data["parameters"]["n_total"] = n_total
    f = build_filter(1.2)
    grid = RadialGridSpec(r_max=3.0, n=31)
    m.stage("simulate")
    datasets = _simulated_addition_datasets(
        m, _RECIPE_AMPLITUDES, n_total, args.seed, "fig5"
    )
    m.stage("phase-randomized tables")
    table = sample_pnqd(
        datasets, grid, f, phase_randomized=True, process=PhotonAddition(),
    )
    write_pnqd(table, m.path("fig5_pnqd.csv"))
    m.record("fig5_pnqd.csv")
    for k in range(len(table.alphas)):
        m.record(f"fig5_pnqd_a{k:02d}.csv")
    m.stage("predict thermal output")
    pred = predict_output_nqd(table, ThermalRadial(0.5))
    write_grid(pred, m.path("fig5_prediction.csv"))
    m.record("fig5_prediction.csv")
    m.data["verdicts"]["prediction"] = _report_scan(pred, "predicted thermal output")
    m.stage("direct reference")
    direct = nqd_direct(PhotonAdded(Thermal(0.5)), f, grid)
    write_grid(direct, m.path("fig5_direct.csv"))
    m.record("fig5_direct.csv")
    from .plotting import plot_radial_overlay
    plot_radial_overlay(
        [pred, direct], ["predicted", "direct"], m.path("fig5.png"),
        title="addition on thermal input (nbar = 0.5)",
    )
    m.record("fig5.png")


_RECIPES = {
    "fig1": _recipe_fig1,
    "fig2": _recipe_fig2,
    "fig3": _recipe_fig3,
    "fig4": _recipe_fig4,
    "fig5": _recipe_fig5,
}


def cmd_recipe(args) -> int:
    if args.name not in _RECIPES:
        raise ParameterError(
            f"unknown recipe {args.name!r}; choose from {sorted(_RECIPES)}"
        )
    params = {"seed": args.seed}
    m = _Manifest(args.name, args.out_dir, params)
    _RECIPES[args.name](m, args)
    path = m.write()
    print(f"manifest -> {path}")
    return 0


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="nqdkit",
        description="filtered quasiprobability toolkit for process nonclassicality",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(func=fn)
        sp.add_argument("--seed", type=int, default=0, help="base random seed")
        return sp

    sp = add("filter", cmd_filter, "build a filter table")
    sp.add_argument("--width", type=float, required=True)
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--out", required=True)
    sp.add_argument("--plot", help="optional PNG of profile and transform")

    sp = add("simulate", cmd_simulate, "simulate a homodyne dataset")
    sp.add_argument("--state", required=True, help="state descriptor")
    sp.add_argument("--eta", type=float, default=1.0)
    sp.add_argument("--n", type=int, required=True, help="total samples")
    sp.add_argument("--phases", type=int, required=True, help="number of phases")
    sp.add_argument("--alpha", help="probe amplitude tag re,im")
    sp.add_argument("--out", required=True)

    sp = add("nqd", cmd_nqd, "direct quasiprobability of a state")
    sp.add_argument("--state", required=True)
    sp.add_argument("--width", type=float, required=True)
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--grid", help="n,half_width[,center_re,center_im]")
    sp.add_argument("--radial", help="r_max,n")
    sp.add_argument("--out", required=True)
    sp.add_argument("--plot")

    sp = add("pnqd", cmd_pnqd, "direct conditional-output grids per amplitude")
    sp.add_argument("--process", required=True, help="process descriptor")
    sp.add_argument("--alphas", required=True, help="'a,b,c' or start:stop:count")
    sp.add_argument("--width", type=float, required=True)
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--grid")
    sp.add_argument("--radial")
    sp.add_argument("--out", required=True, help="index CSV path")

    sp = add("sample", cmd_sample, "estimate a quasiprobability from data")
    sp.add_argument("--data", required=True)
    sp.add_argument("--width", type=float, required=True)
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--grid")
    sp.add_argument("--radial")
    sp.add_argument("--phase-randomized", action="store_true")
    sp.add_argument("--remove-eta", action="store_true")
    sp.add_argument("--out", required=True)
    sp.add_argument("--plot")

    sp = add("predict", cmd_predict, "predict output quasiprobability")
    sp.add_argument("--pnqd", required=True, help="index CSV from pnqd/sample")
    sp.add_argument("--input", required=True, help="thermal:nbar=... or coherent:...")
    sp.add_argument("--out", required=True)
    sp.add_argument("--plot")

    sp = add("recipe", cmd_recipe, "run a named experiment recipe")
    sp.add_argument("--name", required=True, help="fig1..fig5")
    sp.add_argument("--out-dir", required=True)
    sp.add_argument("--n", type=int, help="override total samples per dataset")

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParameterError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except NumericalContractError as e:
        print(f"numerical contract violated: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
