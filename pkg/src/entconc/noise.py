"""Noisy two-qubit state preparation and gate-noise primitives.

Models an entangled pair shared between parties A and B where B's qubit is
the one exposed to noise: a coherent preparation error rotates the ideal
Bell state toward the other Bell states, and a probabilistic Pauli channel
acts on B's qubit afterwards. Also extracts the pure surrogate state (top
eigenvector) that the compilation pipeline plans against.

Weight tuples are ordered (x, z, y) throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .qmath import PAULI_I, PAULI_X, PAULI_Y, PAULI_Z, apply_channel, top_eigenstate

_INV_SQRT2 = 1.0 / np.sqrt(2.0)
_INV_SQRT3 = 1.0 / np.sqrt(3.0)

PHI_PLUS = np.array([1, 0, 0, 1], dtype=complex) * _INV_SQRT2
PHI_MINUS = np.array([1, 0, 0, -1], dtype=complex) * _INV_SQRT2
PSI_PLUS = np.array([0, 1, 1, 0], dtype=complex) * _INV_SQRT2
PSI_MINUS = np.array([0, 1, -1, 0], dtype=complex) * _INV_SQRT2


class BellBasis(NamedTuple):
    """The four maximally entangled two-qubit basis states."""

    phi_plus: np.ndarray
    phi_minus: np.ndarray
    psi_plus: np.ndarray
    psi_minus: np.ndarray


BELL = BellBasis(PHI_PLUS, PHI_MINUS, PSI_PLUS, PSI_MINUS)


@dataclass(frozen=True)
class NoiseParams:
    """Preparation and gate noise settings for one entangled pair.

    Parameters
    ----------
    a : float
        Coherent preparation error probability in [0, 1].
    coh_weights : tuple of complex
        Amplitudes (eps_x, eps_z, eps_y) distributing the coherent error
        over the non-target Bell states; squared magnitudes must sum to 1.
    p_d : float
        Pauli (depolarizing-type) error probability on B's qubit.
    depol_weights : tuple of float
        Probabilities (x, z, y) splitting p_d across the Pauli errors;
        must sum to 1.
    p_g : float
        Per-MCX-gate depolarizing probability during protocol execution.
    """

    a: float = 0.0
    coh_weights: tuple = (_INV_SQRT3, _INV_SQRT3, _INV_SQRT3)
    p_d: float = 0.0
    depol_weights: tuple = field(default=(1 / 3, 1 / 3, 1 / 3))
    p_g: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.a <= 1.0:
            raise ValueError("a must lie in [0, 1]")
        if not 0.0 <= self.p_d <= 1.0:
            raise ValueError("p_d must lie in [0, 1]")
        if not 0.0 <= self.p_g <= 1.0:
            raise ValueError("p_g must lie in [0, 1]")
        if len(self.coh_weights) != 3 or len(self.depol_weights) != 3:
            raise ValueError("weight tuples must have three entries (x, z, y)")
        csum = sum(abs(complex(w)) ** 2 for w in self.coh_weights)
        if abs(csum - 1.0) > 1e-12:
            raise ValueError("coherent weights must have unit squared norm")
        dsum = sum(float(w) for w in self.depol_weights)
        if abs(dsum - 1.0) > 1e-12 or min(float(w) for w in self.depol_weights) < 0:
            raise ValueError("depolarizing weights must be probabilities summing to 1")


def coherent_state(a: float, weights=None) -> np.ndarray:
    """Two-qubit pure state with coherent error probability ``a``.

    Superposes the target Bell state (weight 1-a) with the three error
    Bell states reached by single-qubit X, Z, and Y flips, with complex
    amplitudes sqrt(a) * weights. ``weights`` defaults to the symmetric
    choice 1/sqrt(3) each and is ordered (x, z, y).
    """
    if weights is None:
        weights = (_INV_SQRT3, _INV_SQRT3, _INV_SQRT3)
    ex, ez, ey = (complex(w) for w in weights)
    if abs(abs(ex) ** 2 + abs(ez) ** 2 + abs(ey) ** 2 - 1.0) > 1e-12:
        raise ValueError("coherent weights must have unit squared norm")
    if not 0.0 <= a <= 1.0:
        raise ValueError("a must lie in [0, 1]")
    psi = np.sqrt(1.0 - a) * PHI_PLUS + np.sqrt(a) * (
        ex * PSI_PLUS + ez * PHI_MINUS + ey * PSI_MINUS
    )
    return psi


def depolarize(rho: np.ndarray, p_d: float, weights=None, qubit: int = 1) -> np.ndarray:
    """Apply the probabilistic Pauli error channel to one qubit.

    Kraus operators are sqrt(1-p_d) I and sqrt(p_d w) P for P in (X, Z, Y)
    with probabilities ``weights`` (default 1/3 each, ordered (x, z, y)).
    """
    if weights is None:
        weights = (1 / 3, 1 / 3, 1 / 3)
    wx, wz, wy = (float(w) for w in weights)
    if abs(wx + wz + wy - 1.0) > 1e-12 or min(wx, wz, wy) < 0:
        raise ValueError("depolarizing weights must be probabilities summing to 1")
    if not 0.0 <= p_d <= 1.0:
        raise ValueError("p_d must lie in [0, 1]")
    kraus = [
        np.sqrt(1.0 - p_d) * PAULI_I,
        np.sqrt(p_d * wx) * PAULI_X,
        np.sqrt(p_d * wz) * PAULI_Z,
        np.sqrt(p_d * wy) * PAULI_Y,
    ]
    return apply_channel(rho, kraus, on=[qubit])


def prepare_state(params: NoiseParams) -> np.ndarray:
    """Density matrix of one noisy entangled pair.

    Builds the coherent-error pure state, then sends B's qubit (index 1)
    through the Pauli error channel with probability ``params.p_d``.
    """
    psi = coherent_state(params.a, params.coh_weights)
    rho = np.outer(psi, psi.conj())
    return depolarize(rho, params.p_d, params.depol_weights, qubit=1)


def surrogate(rho: np.ndarray) -> np.ndarray:
    """Pure state the planner treats as the actual preparation.

    The eigenvector of the largest eigenvalue. Degeneracy of that
    eigenvalue raises a RuntimeWarning from the eigensolver wrapper.
    """
    return top_eigenstate(rho)[1]
