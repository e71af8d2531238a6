"""Truncated Fock-space engine.

Internal helpers shared by the state models and the brute-force fallbacks:
ladder operators, common state vectors/densities, unitaries, and the
quadrature eigenfunctions.  Everything is plain dense numpy; cutoffs stay
small (tens to a few hundred) so no sparse machinery is needed.

Convention: the quadrature observable is x(phi) = a e^{-i phi} + a^dag e^{i phi},
so the vacuum has unit variance and <x^2> = 2<n> + 1 + 2 Re(<a^2> e^{-2i phi}).
"""

import numpy as np
from scipy.linalg import expm


def ladder(cutoff: int) -> np.ndarray:
    """Annihilation operator on the (cutoff+1)-dimensional number basis."""
    return np.diag(np.sqrt(np.arange(1.0, cutoff + 1)), 1)


def displacement_matrix(alpha: complex, cutoff: int) -> np.ndarray:
    a = ladder(cutoff)
    return expm(alpha * a.conj().T - np.conj(alpha) * a)


def squeeze_matrix(r: float, cutoff: int) -> np.ndarray:
    """exp(r (a^2 - a^dag^2)/2); r > 0 shrinks the x quadrature."""
    a = ladder(cutoff)
    return expm(0.5 * r * (a @ a - a.conj().T @ a.conj().T))


def kerr_matrix(cutoff: int) -> np.ndarray:
    """Diagonal Kerr-evolution unitary exp(-i pi n^2 / 2) at the cat-formation time."""
    n = np.arange(cutoff + 1)
    return np.diag(np.exp(-0.5j * np.pi * n * n))


def normal_displacement(xi: complex, cutoff: int) -> np.ndarray:
    """Normally ordered displacement e^{xi a^dag} e^{-xi* a}.

    Both factors are nilpotent triangular matrices, so expm is exact up to
    rounding; Tr[rho @ normal_displacement(xi)] is the normally ordered
    characteristic function on the truncated space.
    """
    a = ladder(cutoff)
    return expm(xi * a.conj().T) @ expm(-np.conj(xi) * a)


def coherent_vector(alpha: complex, cutoff: int) -> np.ndarray:
    k = np.arange(cutoff + 1)
    # log-space to stay finite for large |alpha| and cutoff
    if alpha == 0:
        v = np.zeros(cutoff + 1, complex)
        v[0] = 1.0
        return v
    from scipy.special import gammaln

    logmag = k * np.log(abs(alpha)) - 0.5 * gammaln(k + 1.0) - 0.5 * abs(alpha) ** 2
    phase = np.exp(1j * k * np.angle(alpha))
    return np.exp(logmag) * phase


def fock_vector(n: int, cutoff: int) -> np.ndarray:
    v = np.zeros(cutoff + 1, complex)
    v[n] = 1.0
    return v


def cat_vector(alpha: complex, cutoff: int) -> np.ndarray:
    """(|alpha> + i|-alpha>)/sqrt(2); exactly normalized for every alpha."""
    return (coherent_vector(alpha, cutoff) + 1j * coherent_vector(-alpha, cutoff)) / np.sqrt(2.0)


def thermal_weights(nbar: float, cutoff: int) -> np.ndarray:
    """Geometric photon-number weights of a thermal state (untruncated normalization)."""
    if nbar == 0:
        w = np.zeros(cutoff + 1)
        w[0] = 1.0
        return w
    n = np.arange(cutoff + 1)
    return np.exp(n * np.log(nbar / (1.0 + nbar)) - np.log(1.0 + nbar))


def hermite_functions(nmax: int, x: np.ndarray) -> np.ndarray:
    """Quadrature eigenfunctions psi_n(x), n = 0..nmax, shape (nmax+1, len(x)).

    Normalized so that psi_n are orthonormal on the real line and the vacuum
    density psi_0^2 is the unit-variance Gaussian; recurrence
    psi_n = (x/sqrt(n)) psi_{n-1} - sqrt((n-1)/n) psi_{n-2}.
    """
    x = np.asarray(x, float)
    out = np.empty((nmax + 1, x.size))
    out[0] = (2.0 * np.pi) ** -0.25 * np.exp(-0.25 * x * x)
    if nmax >= 1:
        out[1] = x * out[0]
    for n in range(2, nmax + 1):
        out[n] = (x / np.sqrt(n)) * out[n - 1] - np.sqrt((n - 1) / n) * out[n - 2]
    return out


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Half the trace norm of rho - sigma."""
    diff = rho - sigma
    vals = np.linalg.eigvalsh(0.5 * (diff + diff.conj().T))
    return 0.5 * float(np.abs(vals).sum())
