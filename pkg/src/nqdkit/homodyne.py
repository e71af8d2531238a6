"""Balanced homodyne datasets: simulation and delimited-file round trip.

A dataset is quadrature samples x tagged by local-oscillator phase phi,
taken at detection efficiency eta.  Sampling draws from the exact marginal
p(x; phi) through an inverse-CDF table, with one independent, seed-derived
substream per phase so datasets are reproducible sample for sample.

File format (header lines in fixed order, alpha optional):

    # state=<descriptor>
    # alpha=<re>,<im>
    # eta=<eta>
    # phases=<p1;p2;...>
    # n=<total>
    # seed=<seed>
    x,phi
    ...
"""

from dataclasses import dataclass
from typing import Optional, Sequence
import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import PchipInterpolator

from .errors import FormatError, ParameterError, ParseError, RangeError
from .states import StateModel, format_state, quadrature_moments, quadrature_pdf

_CDF_NODES = 4096
_CDF_HALFSPAN_SIGMAS = 10.0
_MASS_DEFICIT_TOL = 1e-9


@dataclass(frozen=True)
class QuadratureDataset:
    state: str
    alpha: Optional[complex]
    eta: Optional[float]
    phases: tuple
    seed: Optional[int]
    x: np.ndarray
    phase_index: np.ndarray

    @property
    def n_total(self) -> int:
        return self.x.size

    def by_phase(self):
        """Yield (phi, samples) in declared phase order."""
        for k, phi in enumerate(self.phases):
            yield phi, self.x[self.phase_index == k]


def _check_phases(phases) -> tuple:
    phases = tuple(float(p) for p in phases)
    if not phases:
        raise ParameterError("need at least one phase")
    for p in phases:
        if not (0.0 <= p < np.pi):
            raise ParameterError(f"phase {p} outside [0, pi)")
    if len(set(phases)) != len(phases):
        raise ParameterError("phases must be distinct")
    return phases


def _inverse_cdf(s: StateModel, phi: float, eta: float):
    mean, var = quadrature_moments(s, phi, eta)
    span = _CDF_HALFSPAN_SIGMAS * np.sqrt(var)
    xs = np.linspace(mean - span, mean + span, _CDF_NODES)
    pdf = quadrature_pdf(s, xs, phi, eta)
    cdf = np.concatenate(([0.0], cumulative_trapezoid(pdf, xs)))
    deficit = abs(1.0 - cdf[-1])
    if deficit > _MASS_DEFICIT_TOL:
        raise RangeError(
            f"quadrature pdf mass deficit {deficit:.2e} at phi={phi}; "
            "distribution extends beyond the tabulated range"
        )
    cdf /= cdf[-1]
    keep = np.concatenate(([True], np.diff(cdf) > 1e-15))
    interp = PchipInterpolator(cdf[keep], xs[keep])
    top = cdf[keep][-1]
    return lambda u: interp(np.minimum(u, top))


def simulate_dataset(
    s: StateModel,
    phases: Sequence[float],
    n_per_phase: int,
    eta: float = 1.0,
    seed: int = 0,
    alpha_tag: Optional[complex] = None,
) -> QuadratureDataset:
    """Draw n_per_phase quadrature samples at each phase.

    Each phase uses its own child stream of `seed`, so adding or reordering
    phases never perturbs the samples of the others.
    """
    phases = _check_phases(phases)
    if n_per_phase < 1:
        raise ParameterError("n_per_phase must be positive")
    if not (0.0 < eta <= 1.0):
        raise ParameterError(f"eta={eta} outside (0, 1]")
    if seed < 0:
        raise ParameterError("seed must be nonnegative")
    xs, idx = [], []
    for k, phi in enumerate(phases):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, k])))
        inv = _inverse_cdf(s, phi, eta)
        xs.append(inv(rng.random(n_per_phase)))
        idx.append(np.full(n_per_phase, k, dtype=np.int64))
    return QuadratureDataset(
        state=format_state(s),
        alpha=None if alpha_tag is None else complex(alpha_tag),
        eta=eta,
        phases=phases,
        seed=seed,
        x=np.concatenate(xs),
        phase_index=np.concatenate(idx),
    )


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def write_dataset(d: QuadratureDataset, path) -> None:
    if d.eta is None:
        raise FormatError("dataset has no eta record; the file format requires one")
    with open(path, "w") as fh:
        fh.write(f"# state={d.state}\n")
        if d.alpha is not None:
            fh.write(f"# alpha={_fmt(d.alpha.real)},{_fmt(d.alpha.imag)}\n")
        fh.write(f"# eta={_fmt(d.eta)}\n")
        fh.write("# phases=" + ";".join(_fmt(p) for p in d.phases) + "\n")
        fh.write(f"# n={d.n_total}\n")
        if d.seed is not None:
            fh.write(f"# seed={d.seed}\n")
        fh.write("x,phi\n")
        phase_str = [_fmt(p) for p in d.phases]
        chunk = 65536
        for lo in range(0, d.n_total, chunk):
            hi = min(lo + chunk, d.n_total)
            lines = [
                f"{_fmt(d.x[i])},{phase_str[d.phase_index[i]]}"
                for i in range(lo, hi)
            ]
            fh.write("\n".join(lines) + "\n")


def _header_value(line: str, key: str, lineno: int, path) -> str:
    prefix = f"# {key}="
    if not line.startswith(prefix):
        raise FormatError(f"{path}: line {lineno}: expected '{prefix}...'")
    return line[len(prefix):].strip()


def read_dataset(path) -> QuadratureDataset:
    """Parse a dataset file; malformed rows raise ParseError naming the line."""
    with open(path) as fh:
        lineno = 0

        def next_line():
            nonlocal lineno
            lineno += 1
            return fh.readline().rstrip("\n")

        state = _header_value(next_line(), "state", lineno, path)
        line = next_line()
        alpha = None
        if line.startswith("# alpha="):
            parts = line[len("# alpha="):].split(",")
            try:
                alpha = complex(float(parts[0]), float(parts[1]))
            except (ValueError, IndexError):
                raise ParseError(f"{path}: line {lineno}: bad alpha record") from None
            line = next_line()
        if not line.startswith("# eta="):
            raise FormatError(f"{path}: line {lineno}: missing eta record")
        try:
            eta = float(line[len("# eta="):])
        except ValueError:
            raise ParseError(f"{path}: line {lineno}: bad eta record") from None
        if not (0.0 < eta <= 1.0):
            raise ParseError(f"{path}: line {lineno}: eta={eta:g} outside (0, 1]")
        line = next_line()
        phase_text = _header_value(line, "phases", lineno, path)
        try:
            phases = tuple(float(p) for p in phase_text.split(";"))
        except ValueError:
            raise ParseError(f"{path}: line {lineno}: bad phase list") from None
        try:
            n_total = int(_header_value(next_line(), "n", lineno + 1, path))
        except ValueError:
            raise ParseError(f"{path}: line {lineno}: bad sample count") from None
        line = next_line()
        seed = None
        if line.startswith("# seed="):
            try:
                seed = int(line[len("# seed="):])
            except ValueError:
                raise ParseError(f"{path}: line {lineno}: bad seed record") from None
            line = next_line()
        if line != "x,phi":
            raise FormatError(f"{path}: line {lineno}: expected column line 'x,phi'")

        lookup = {f"{p:.17g}": k for k, p in enumerate(phases)}
        xs = np.empty(n_total)
        idx = np.empty(n_total, dtype=np.int64)
        for i in range(n_total):
            row = next_line()
            if not row:
                raise ParseError(f"{path}: line {lineno}: unexpected end of data")
            parts = row.split(",")
            if len(parts) != 2:
                raise ParseError(f"{path}: line {lineno}: expected 'x,phi'")
            try:
                xs[i] = float(parts[0])
            except ValueError:
                raise ParseError(f"{path}: line {lineno}: bad x value {parts[0]!r}") from None
            k = lookup.get(parts[1])
            if k is None:
                try:
                    k = lookup[f"{float(parts[1]):.17g}"]
                except (ValueError, KeyError):
                    raise ParseError(
                        f"{path}: line {lineno}: phase {parts[1]!r} not in declared list"
                    ) from None
            idx[i] = k
        extra = fh.readline()
        if extra.strip():
            raise ParseError(f"{path}: line {lineno + 1}: trailing data past declared n")
    xs.setflags(write=False)
    idx.setflags(write=False)
    return QuadratureDataset(
        state=state, alpha=alpha, eta=eta, phases=phases,
        seed=seed, x=xs, phase_index=idx,
    )
