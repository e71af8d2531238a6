"""Predict the quasiprobability of a process output for a mixed probe input.

Conditional processes are characterized on coherent probes |a>.  For an
input with classical rotation-invariant P function the ensemble output is
the weighted probe mixture

    P_out(beta) = (1/norm) int da p(a) W(a) Pbar(beta | a),

with p(a) the radial P density (2 pi a times the planar density), W(a) the
process success weight (addition 1 + a^2, subtraction a^2, Kerr-cat 1) and
norm its input average, known analytically: 1 + <n> for addition, <n> for
subtraction, 1 for Kerr-cat.

The table route integrates sampled Pbar(beta | a) tables over the probe
amplitude grid by the trapezoid rule; statistical errors propagate through
the fixed linear weights, and the quoted systematic error is the gap to a
natural-cubic-spline quadrature of the same integrand.

The direct route pairs the input characteristic function with the process
kernel in Fourier space, where the weighted probe integral collapses to a
closed differential expression in the input CF; it needs no probe
discretization and covers inputs whose P function is singular.
"""

from dataclasses import dataclass
from typing import Callable, Optional, Union
import numpy as np
from scipy.interpolate import CubicSpline

from .errors import (
    CapabilityError, CoverageError, ParameterError, ParseError,
    ZeroWeightError,
)
from .filters import FilterSpec
from .processes import (
    KerrCat, PhotonAddition, PhotonSubtraction, ProcessModel,
    ThermalDecoherence, format_process,
)
from .quasiprob import QuasiprobGrid, nqd_direct
from .states import (
    PhotonAdded, PhotonSubtracted, StateModel, format_state,
    is_phase_insensitive, parse_state, Coherent, Thermal,
)
from .estimator import PnqdTable

_COVERAGE_LIMIT = 0.01


# ---------------------------------------------------------------------------
# input specifications (classical P densities over probe amplitudes)

@dataclass(frozen=True)
class ThermalRadial:
    """P_in(a) = e^{-a^2/nbar}/(pi nbar); nbar = 0 degenerates to the vacuum."""

    nbar: float

    def __post_init__(self):
        if self.nbar < 0:
            raise ParameterError("nbar must be nonnegative")


@dataclass(frozen=True)
class CoherentDelta:
    alpha: complex

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))


@dataclass(frozen=True)
class DiscreteMixture:
    """Point masses (alpha_k, weight_k); weights nonnegative, summing to 1."""

    components: tuple

    def __post_init__(self):
        comps = tuple((complex(a), float(w)) for a, w in self.components)
        if not comps:
            raise ParameterError("mixture needs at least one component")
        weights = np.array([w for _, w in comps])
        if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-9:
            raise ParameterError("mixture weights must be nonnegative and sum to 1")
        object.__setattr__(self, "components", comps)


InputPSpec = Union[ThermalRadial, CoherentDelta, DiscreteMixture]


def parse_input_pspec(text: str) -> InputPSpec:
    """Input descriptors: thermal:nbar=0.5 or coherent:re=1,im=0."""
    try:
        s = parse_state(text)
    except ParseError:
        raise
    if isinstance(s, Thermal):
        return ThermalRadial(s.nbar)
    if isinstance(s, Coherent):
        return CoherentDelta(s.alpha)
    raise ParseError(
        f"input {text!r} has no classical P density; "
        "use the characteristic-function route for such inputs"
    )


def input_mean_photon(spec: InputPSpec) -> float:
    if isinstance(spec, ThermalRadial):
        return spec.nbar
    if isinstance(spec, CoherentDelta):
        return abs(spec.alpha) ** 2
    return float(sum(w * abs(a) ** 2 for a, w in spec.components))


def _describe_input(spec: InputPSpec) -> str:
    if isinstance(spec, ThermalRadial):
        return f"thermal:nbar={spec.nbar:g}"
    if isinstance(spec, CoherentDelta):
        return f"coherent:re={spec.alpha.real:g},im={spec.alpha.imag:g}"
    parts = ";".join(f"{abs(a):g}*{w:g}" for a, w in spec.components)
    return f"mixture:{parts}"


# ---------------------------------------------------------------------------
# table route

def _analytic_weight(process: ProcessModel):
    if isinstance(process, PhotonAddition):
        return lambda a: 1.0 + np.asarray(a, float) ** 2
    if isinstance(process, PhotonSubtraction):
        return lambda a: np.asarray(a, float) ** 2
    if isinstance(process, KerrCat):
        return lambda a: np.ones_like(np.asarray(a, float))
    raise CapabilityError(
        f"prediction not defined for process {format_process(process)}"
    )


def _analytic_norm(process: ProcessModel, mean_n: float) -> float:
    if isinstance(process, PhotonAddition):
        return 1.0 + mean_n
    if isinstance(process, PhotonSubtraction):
        if mean_n <= 0.0:
            raise ZeroWeightError(
                "subtraction weight vanishes on a zero-photon input"
            )
        return mean_n
    return 1.0


def _check_radial_tables(table: PnqdTable) -> np.ndarray:
    if not table.phase_randomized:
        raise ParameterError(
            "prediction integrates rotation averages; build the table with "
            "phase_randomized=True on a radial grid"
        )
    for alpha in table.alphas:
        if abs(alpha.imag) > 1e-12 or alpha.real < 0:
            raise ParameterError("radial tables need real nonnegative amplitudes")
    r = table.grids[0].re
    for g in table.grids[1:]:
        if g.re.shape != r.shape or not np.array_equal(g.re, r):
            raise ParameterError("amplitude tables disagree on the beta grid")
    return r


def _value_at_amplitude(table: PnqdTable, amplitude: float):
    """Pbar at one probe amplitude: exact at a node, linear between nodes."""
    a = np.array([alpha.real for alpha in table.alphas])
    if amplitude > a[-1] + 1e-12:
        raise CoverageError(
            f"probe amplitude {amplitude:g} beyond table coverage {a[-1]:g}",
            tail_mass=1.0,
        )
    k = int(np.searchsorted(a, amplitude))
    if k < a.size and abs(a[k] - amplitude) < 1e-12:
        g = table.grids[k]
        err = None if g.stat_err is None else g.stat_err.copy()
        return g.values.copy(), err
    lo, hi = table.grids[k - 1], table.grids[k]
    t = (amplitude - a[k - 1]) / (a[k] - a[k - 1])
    vals = (1 - t) * lo.values + t * hi.values
    if lo.stat_err is None or hi.stat_err is None:
        return vals, None
    err = (1 - t) * lo.stat_err + t * hi.stat_err
    return vals, err


def predict_output_nqd(
    table: PnqdTable,
    input_spec: InputPSpec,
    process_weight: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> QuasiprobGrid:
    """Ensemble-output quasiprobability from sampled per-amplitude tables.

    process_weight overrides the success weight; without it the weight and
    the normalization come from the process recorded in the table.  With a
    custom weight the normalization is the trapezoid of weight * density on
    the same amplitude grid, keeping numerator and denominator consistent.
    """
    if process_weight is None and table.process is None:
        raise ParameterError(
            "table does not record the process; pass process_weight explicitly"
        )
    r = _check_radial_tables(table)
    meta = {
        "source": "predicted:" + (
            format_process(table.process) if table.process else "custom-weight"
        ),
        "w": table.width,
        "input": _describe_input(input_spec),
        "geometry": "radial",
    }

    def finish(vals, stat, sys_err=None):
        vals = np.asarray(vals)
        vals.setflags(write=False)
        return QuasiprobGrid(
            "radial", re=r, im=np.zeros_like(r), values=vals,
            stat_err=stat, sys_err=sys_err, meta=meta,
        )

    if isinstance(input_spec, CoherentDelta) or (
        isinstance(input_spec, ThermalRadial) and input_spec.nbar == 0.0
    ):
        amp = abs(input_spec.alpha) if isinstance(input_spec, CoherentDelta) else 0.0
        vals, err = _value_at_amplitude(table, amp)
        return finish(vals, err)

    if isinstance(input_spec, DiscreteMixture):
        weight = process_weight or _analytic_weight(table.process)
        amps = np.array([abs(a) for a, _ in input_spec.components])
        probs = np.array([w for _, w in input_spec.components])
        a_max = max(alpha.real for alpha in table.alphas)
        outside = probs[amps > a_max + 1e-12].sum()
        if outside > _COVERAGE_LIMIT:
            raise CoverageError(
                f"mixture mass {outside:.3g} beyond table coverage {a_max:g}",
                tail_mass=float(outside),
            )
        wvals = np.array([float(weight(a)) for a in amps])
        if process_weight is None:
            norm = _analytic_norm(table.process, input_mean_photon(input_spec))
        else:
            norm = float(probs @ wvals)
        vals = np.zeros(r.size)
        stat = np.zeros(r.size)
        have_err = True
        for amp, prob, wv in zip(amps, probs, wvals):
            pv, pe = _value_at_amplitude(table, amp)
            c = prob * wv / norm
            vals += c * pv
            if pe is None:
                have_err = False
            else:
                stat += abs(c) * pe
        return finish(vals, stat if have_err else None)

    # thermal input: trapezoid over the amplitude grid
    a = np.array([alpha.real for alpha in table.alphas])
    if a.size < 3:
        raise ParameterError("need at least 3 amplitudes to integrate")
    nbar = input_spec.nbar
    density = (2.0 * a / nbar) * np.exp(-a * a / nbar)
    tail = float(np.exp(-a[-1] ** 2 / nbar))
    if tail > _COVERAGE_LIMIT:
        raise CoverageError(
            f"input tail mass {tail:.3g} beyond the largest probe amplitude "
            f"{a[-1]:g} exceeds {_COVERAGE_LIMIT}",
            tail_mass=tail,
        )
    weight = process_weight or _analytic_weight(table.process)
    wvals = np.asarray(weight(a), float)

    t = np.zeros_like(a)
    da = np.diff(a)
    t[:-1] += 0.5 * da
    t[1:] += 0.5 * da
    if process_weight is None:
        norm = _analytic_norm(table.process, nbar)
    else:
        norm = float(t @ (density * wvals))
    coef = t * density * wvals / norm

    pbar = np.stack([g.values for g in table.grids])          # (n_a, n_r)
    vals = coef @ pbar
    stat = None
    if all(g.stat_err is not None for g in table.grids):
        errs = np.stack([g.stat_err for g in table.grids])
        stat = np.abs(coef) @ errs
    integrand = (density * wvals / norm)[:, None] * pbar
    spline_vals = np.empty_like(vals)
    for j in range(r.size):
        spline_vals[j] = CubicSpline(
            a, integrand[:, j], bc_type="natural"
        ).integrate(a[0], a[-1])
    return finish(vals, stat, np.abs(vals - spline_vals))


def direct_radial_pnqd_table(
    process: ProcessModel, alphas, f: FilterSpec, grid,
) -> PnqdTable:
    """Noise-free rotation-averaged conditional tables from closed kernels.

    The rotation average of the conditional output CF on a coherent probe of
    amplitude a has a Bessel closed form per process: addition
    [(1+a^2-b^2) J0(2ab) - 2ab J1(2ab)] / (1+a^2); subtraction and Kerr-cat
    both J0(2ab) (subtraction returns the probe, Kerr evolution preserves
    the photon-number distribution).
    """
    from scipy.special import j0, j1
    from .quasiprob import RadialGridSpec, nqd_radial_from_cf

    if not isinstance(grid, RadialGridSpec):
        raise ParameterError("direct radial tables need a RadialGridSpec")
    cplx = [complex(a) for a in alphas]
    if any(a.imag != 0.0 or a.real < 0.0 for a in cplx):
        raise ParameterError("amplitudes must be real and nonnegative")
    amps = sorted(a.real for a in cplx)
    if len(set(amps)) != len(amps):
        raise ParameterError("duplicate amplitudes")
    r = grid.radii()
    b = f.gl_b
    grids = []
    for a in amps:
        if isinstance(process, PhotonAddition):
            cf = ((1.0 + a * a - b * b) * j0(2.0 * a * b)
                  - 2.0 * a * b * j1(2.0 * a * b)) / (1.0 + a * a)
        elif isinstance(process, PhotonSubtraction):
            if a == 0.0:
                raise ZeroWeightError("subtraction weight vanishes at amplitude 0")
            cf = j0(2.0 * a * b)
        elif isinstance(process, KerrCat):
            cf = j0(2.0 * a * b)
        else:
            raise CapabilityError(
                f"no radial kernel for process {format_process(process)}"
            )
        vals = nqd_radial_from_cf(cf, f, r)
        vals.setflags(write=False)
        grids.append(QuasiprobGrid(
            "radial", re=r, im=np.zeros_like(r), values=vals,
            meta={
                "source": f"radial-average:{format_process(process)}:a={a:.17g}",
                "w": f.width, "geometry": "radial", "alpha": complex(a),
            },
        ))
    return PnqdTable(
        alphas=tuple(complex(a) for a in amps), grids=tuple(grids),
        width=f.width, phase_randomized=True, process=process,
    )


# ---------------------------------------------------------------------------
# characteristic-function route

def parseval_output_nqd(
    process: ProcessModel,
    input_state: StateModel,
    f: FilterSpec,
    grid,
) -> QuasiprobGrid:
    """Direct prediction by characteristic-function pairing.

    The probe integral collapses in Fourier space: the success-weighted
    subtraction kernel acts on the input CF as -d^2/(dxi dxi~) for any
    input, so the ensemble output CF is available in closed form wherever
    the input CF is.  The addition and Kerr-cat kernels close only over
    rotation-invariant inputs (Kerr evolution is diagonal in photon number,
    so there the ensemble output equals the input); phase-sensitive inputs
    raise CapabilityError for those processes.
    """
    if isinstance(process, ThermalDecoherence):
        raise CapabilityError(
            "decoherence is a deterministic channel; evaluate its output "
            "characteristic function directly"
        )
    phase_ins = is_phase_insensitive(input_state)
    if isinstance(process, PhotonSubtraction):
        out_state: StateModel = PhotonSubtracted(input_state)
    elif isinstance(process, PhotonAddition):
        if not phase_ins:
            raise CapabilityError(
                "addition kernel does not close over phase-sensitive inputs"
            )
        out_state = PhotonAdded(input_state)
    elif isinstance(process, KerrCat):
        if not phase_ins:
            raise CapabilityError(
                "Kerr-cat kernel does not close over phase-sensitive inputs"
            )
        out_state = input_state
    else:
        raise CapabilityError(
            f"prediction not defined for process {format_process(process)}"
        )
    g = nqd_direct(out_state, f, grid)
    g.meta.update(
        source=f"predicted:{format_process(process)}",
        input=format_state(input_state),
        route="parseval",
    )
    return g
