"""Single-mode process models.

A process is described by its action on coherent-state inputs together with
the heralding weight (the unnormalized output trace); linearity extends that
action to every input through the P-representation integrals in the
predictor.  Thermal-bath decoherence is additionally exposed at the
characteristic-function level, because its image generally falls outside
the symbolic state set (except on coherent inputs, where it is a displaced
thermal state).
"""

from dataclasses import dataclass
import numpy as np

from . import fock
from .errors import CapabilityError, ParameterError, ParseError, ZeroWeightError
from .states import (
    Cat, Coherent, DisplacedThermal, PhotonAdded, SqueezedVacuum, StateModel,
    Thermal, char_fn_normal, fock_density,
)


class ProcessModel:
    __slots__ = ()


@dataclass(frozen=True)
class PhotonAddition(ProcessModel):
    pass


@dataclass(frozen=True)
class PhotonSubtraction(ProcessModel):
    pass


@dataclass(frozen=True)
class KerrCat(ProcessModel):
    """Kerr evolution to the two-component cat time."""


@dataclass(frozen=True)
class ThermalDecoherence(ProcessModel):
    nbar_bath: float
    gt: float

    def __post_init__(self):
        if self.nbar_bath < 0:
            raise ParameterError(f"bath nbar must be nonnegative, got {self.nbar_bath}")
        if self.gt < 0:
            raise ParameterError(f"gt must be nonnegative, got {self.gt}")


@dataclass(frozen=True)
class ConditionalOutput:
    state: StateModel
    weight: float


def apply_to_coherent(p: ProcessModel, alpha: complex) -> ConditionalOutput:
    """Conditional output state and heralding weight for a coherent input."""
    alpha = complex(alpha)
    if isinstance(p, PhotonAddition):
        return ConditionalOutput(PhotonAdded(Coherent(alpha)), 1.0 + abs(alpha) ** 2)
    if isinstance(p, PhotonSubtraction):
        if alpha == 0:
            raise ZeroWeightError("photon subtraction at alpha = 0 has zero event weight")
        # subtracting a photon from |alpha> returns the same coherent state
        return ConditionalOutput(Coherent(alpha), abs(alpha) ** 2)
    if isinstance(p, KerrCat):
        return ConditionalOutput(Cat(alpha), 1.0)
    if isinstance(p, ThermalDecoherence):
        damp = np.exp(-p.gt)
        return ConditionalOutput(
            DisplacedThermal(alpha * damp, p.nbar_bath * (1.0 - damp * damp)), 1.0
        )
    raise CapabilityError(f"unknown process {type(p).__name__}")


def process_weight_fn(p: ProcessModel):
    """Heralding weight as a function of input amplitude |alpha|."""
    if isinstance(p, PhotonAddition):
        return lambda a: 1.0 + np.asarray(a, float) ** 2
    if isinstance(p, PhotonSubtraction):
        return lambda a: np.asarray(a, float) ** 2
    if isinstance(p, (KerrCat, ThermalDecoherence)):
        return lambda a: np.ones_like(np.asarray(a, float))
    raise CapabilityError(f"unknown process {type(p).__name__}")


def decohere_char_fn(nbar_bath: float, gt: float, s: StateModel, xi):
    """Characteristic function of s after bath contact:

    Phi(xi, t) = exp[-|xi|^2 (nbar - (nbar+1) e^{-2 gt})] * Phi_Q(xi e^{-gt}, 0)

    with Phi_Q(z) = e^{-|z|^2} Phi(z) the Husimi-ordered function of the input.
    Vectorized over xi.
    """
    if nbar_bath < 0 or gt < 0:
        raise ParameterError("nbar_bath and gt must be nonnegative")
    xi_arr = np.asarray(xi, complex)
    damp = np.exp(-gt)
    t2 = np.abs(xi_arr) ** 2
    z = xi_arr * damp
    phi_q = np.exp(-np.abs(z) ** 2) * char_fn_normal(s, z)
    out = np.exp(-t2 * (nbar_bath - (nbar_bath + 1.0) * damp * damp)) * phi_q
    if np.isscalar(xi) or np.asarray(xi).ndim == 0:
        return complex(out)
    return out


def is_past_classicality_threshold(nbar_bath: float, gt: float) -> bool:
    """True iff nbar/(nbar+1) > e^{-2 gt} (strict; the boundary is not past)."""
    if gt < 0:
        raise ParameterError(f"gt must be nonnegative, got {gt}")
    return nbar_bath / (nbar_bath + 1.0) > np.exp(-2.0 * gt)


def noise_gaussian_coefficient(nbar_bath: float, gt: float) -> float:
    """Isotropic covariance coefficient nbar - (nbar+1) e^{-2 gt} of the
    Gaussian noise kernel in the decoherence P-function decomposition.

    Positive exactly past the classicality threshold: once positive, the
    output P function is that Gaussian convolved with a (rescaled) Husimi
    function and is therefore a proper density for every input state.
    """
    return nbar_bath - (nbar_bath + 1.0) * float(np.exp(-2.0 * gt))


def p_gaussian_covariance_eigenvalues(s: StateModel, nbar_bath: float, gt: float):
    """Covariance eigenvalues (x then p axis) of the decohered state's P Gaussian.

    Only Gaussian inputs carry a Gaussian P form.  Negative eigenvalues mean
    the P function is not (yet) a normalizable Gaussian density.  Note the
    per-state sign flip generally happens before the process-level threshold:
    the threshold guarantees classicality of every input, while a specific
    finitely squeezed state becomes classical earlier.
    """
    if isinstance(s, SqueezedVacuum):
        cx0, cp0 = s.v_x - 1.0, s.v_p - 1.0
    elif isinstance(s, Thermal):
        cx0 = cp0 = 2.0 * s.nbar
    elif isinstance(s, (Coherent, DisplacedThermal)):
        extra = 2.0 * s.nbar if isinstance(s, DisplacedThermal) else 0.0
        cx0 = cp0 = extra
    else:
        raise CapabilityError(f"{type(s).__name__} has no Gaussian P form")
    t = float(np.exp(-2.0 * gt))
    noise = 2.0 * nbar_bath * (1.0 - t)
    return 0.25 * (cx0 * t + noise), 0.25 * (cp0 * t + noise)


def fixed_point_check(nbar: float, cutoff: int, p: ProcessModel = KerrCat()) -> float:
    """Trace distance between Thermal(nbar) and its image under the Kerr unitary.

    Diagonal states commute with any function of the number operator, so the
    distance is zero up to truncation and rounding.
    """
    if not isinstance(p, KerrCat):
        raise CapabilityError("fixed_point_check applies to the Kerr cat process")
    rho = fock_density(Thermal(nbar), cutoff).matrix
    u = fock.kerr_matrix(cutoff)
    return fock.trace_distance(u @ rho @ u.conj().T, rho)


def format_process(p: ProcessModel) -> str:
    if isinstance(p, PhotonAddition):
        return "add"
    if isinstance(p, PhotonSubtraction):
        return "subtract"
    if isinstance(p, KerrCat):
        return "kerrcat"
    if isinstance(p, ThermalDecoherence):
        return f"decohere:nbar={p.nbar_bath:.17g},gt={p.gt:.17g}"
    raise CapabilityError(f"no descriptor for {type(p).__name__}")


def parse_process(text: str) -> ProcessModel:
    """Parse process descriptors: add, subtract, kerrcat, decohere:nbar=..,gt=.."""
    t = text.strip()
    if t == "add":
        return PhotonAddition()
    if t == "subtract":
        return PhotonSubtraction()
    if t == "kerrcat":
        return KerrCat()
    if t.startswith("decohere:"):
        fields = {}
        for part in t[len("decohere:"):].split(","):
            if "=" not in part:
                raise ParseError(f"bad field {part!r} in process descriptor {text!r}")
            k, v = part.split("=", 1)
            try:
                fields[k.strip()] = float(v)
            except ValueError:
                raise ParseError(f"bad value {v!r} in process descriptor {text!r}") from None
        if set(fields) != {"nbar", "gt"}:
            raise ParseError(f"decohere descriptor needs nbar and gt, got {text!r}")
        return ThermalDecoherence(fields["nbar"], fields["gt"])
    raise ParseError(f"unknown process descriptor {text!r}")
