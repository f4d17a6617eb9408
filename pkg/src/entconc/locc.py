"""Compile and execute local conversion schedules on bipartite states.

A schedule turns a pure-state conversion plan into executable rounds. Each
round is a diagonal two-outcome (or, for grouped rounds, multi-outcome)
measurement on party A, realized as an embedding unitary on A's data
register plus an auxiliary register, synthesized into multi-controlled
blocks with an MCX cost count. Outcome-conditioned corrections are basis
permutations tracked classically on both sides. A final diagonal filter
performs the probabilistic step that reaches the target.

Layout convention for states passed to ``execute_round``: qubit order is
[A-data..., A-aux..., B-data...], with the auxiliary register prepared in
the all-zeros state. ``run_schedule`` manages frames, auxiliary attach and
detach, and corrections, so most callers only need it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .majorize import (
    birkhoff_decompose,
    group_ttransforms,
    t_transform_decompose,
    vidal_intermediate,
    vidal_probability,
)
from .noise import depolarize
from .qmath import schmidt_decompose

COMPLETENESS_TOL = 1e-10
SUPPORT_TOL = 1e-12
_EQUAL_PAULI = (1 / 3, 1 / 3, 1 / 3)


@dataclass(frozen=True)
class DiagonalPOVM:
    """Diagonal measurement with classical correction permutations.

    ``elements`` holds the diagonals of the positive operators A_m as 1-D
    arrays; ``corrections`` holds one permutation index array per element,
    with (P v)[i] = v[perm[i]]. On the support (positions where the
    diagonals sum to 1) the elements are complete; off-support positions
    carry 0 in every element and are routed to outcome 0 at execution time.
    """

    elements: list
    corrections: list

    def __post_init__(self):
        if len(self.elements) != len(self.corrections):
            raise ValueError("need one correction permutation per element")
        total = np.zeros_like(np.asarray(self.elements[0], dtype=float))
        for el in self.elements:
            el = np.asarray(el, dtype=float)
            if el.min() < -SUPPORT_TOL or el.max() > 1 + 1e-12:
                raise ValueError("POVM diagonal entries must lie in [0, 1]")
            total = total + el
        on = np.abs(total - 1.0) <= COMPLETENESS_TOL
        off = np.abs(total) <= COMPLETENESS_TOL
        if not np.all(on | off):
            raise ValueError("POVM elements do not sum to identity on the support")

    @property
    def support(self) -> np.ndarray:
        """Boolean mask of positions where the elements sum to 1."""
        total = sum(np.asarray(el, dtype=float) for el in self.elements)
        return total > 0.5


@dataclass(frozen=True)
class EmbeddingUnitary:
    """Block-diagonal dilation of a diagonal POVM.

    One ``aux_count``-qubit unitary block per data basis state j; the
    assembled matrix sum_j |j><j| (x) U^j acts on A's data register plus
    the auxiliary register. Off-support blocks are identity.
    """

    data_dim: int
    aux_count: int
    n_outcomes: int
    blocks: list

    def assemble(self) -> np.ndarray:
        ka = 2**self.aux_count
        u = np.zeros((self.data_dim * ka, self.data_dim * ka), dtype=complex)
        for j, blk in enumerate(self.blocks):
            u[j * ka : (j + 1) * ka, j * ka : (j + 1) * ka] = blk
        return u


class SynthesisBlock(NamedTuple):
    """One multi-controlled unitary with its gate-cost accounting."""

    index: int
    unitary: np.ndarray
    mcx_count: int
    touched_qubits: tuple


@dataclass(frozen=True)
class SynthesisReport:
    """Non-identity controlled blocks of an embedding with MCX costs."""

    blocks: list

    @property
    def mcx_total(self) -> int:
        return sum(b.mcx_count for b in self.blocks)


@dataclass(frozen=True)
class ScheduleRound:
    """One communication round: measurement, dilation, synthesis, frames."""

    povm: DiagonalPOVM
    embedding: EmbeddingUnitary
    synthesis: SynthesisReport
    party: str
    current: np.ndarray
    target_vector: np.ndarray


@dataclass(frozen=True)
class ProtocolSchedule:
    """Executable conversion plan in the source state's Schmidt frame.

    ``left_basis``/``right_basis`` rotate the physical state into the frame
    where every round is diagonal; ``target_left``/``target_right`` rotate
    the frame back so the success branch lands on the physical target.
    """

    rounds: list
    final_filter: np.ndarray
    left_basis: np.ndarray
    right_basis: np.ndarray
    target_left: np.ndarray
    target_right: np.ndarray
    alpha: np.ndarray
    gamma: np.ndarray
    beta: np.ndarray
    success_probability: float
    group_size: int

    @property
    def dim(self) -> int:
        return self.alpha.size

    @property
    def mcx_total(self) -> int:
        return sum(r.synthesis.mcx_total for r in self.rounds)


def js_povm(current, dmat, target) -> DiagonalPOVM:
    """Diagonal POVM realizing one round of the conversion.

    Decomposes the doubly-stochastic ``dmat`` (which must map ``target``
    to ``current``) into permutations and builds one element per distinct
    permuted image w_m = P_m target, with diagonal q_m * w_m / current on
    the support of ``current`` and 0 elsewhere. Measuring a Schmidt-diagonal
    state with vector ``current`` gives outcome m with probability q_m and
    post-measurement vector w_m; the recorded correction permutation maps
    w_m back to ``target``.

    Permutations whose images coincide within 1e-12 are merged into a
    single element with summed weight.
    """
    current = np.asarray(current, dtype=float).reshape(-1)
    target = np.asarray(target, dtype=float).reshape(-1)
    dmat = np.asarray(dmat, dtype=float)
    if not np.allclose(dmat @ target, current, atol=1e-9):
        raise ValueError("dmat does not map the target vector to current")
    support = current > SUPPORT_TOL
    merged: list[list] = []
    for q, perm in birkhoff_decompose(dmat):
        image = target[perm]
        for entry in merged:
            if np.max(np.abs(entry[1] - image)) < 1e-12:
                entry[0] += q
                break
        else:
            merged.append([q, image, perm])
    elements = []
    corrections = []
    for q, image, perm in merged:
        diag = np.zeros_like(current)
        diag[support] = q * image[support] / current[support]
        elements.append(np.clip(diag, 0.0, 1.0))
        corrections.append(np.asarray(perm, dtype=int))
    total = sum(elements)
    if np.max(np.abs(total[support] - 1.0)) > COMPLETENESS_TOL:
        raise ArithmeticError("POVM completeness failed on the support")
    return DiagonalPOVM(elements=elements, corrections=corrections)


def _reflection_from_column(col: np.ndarray) -> np.ndarray:
    """Real unitary whose first column is ``col`` (nonnegative, unit norm).

    The reflection I - 2vv^T/|v|^2 with v = e_0 - col; for col = e_0 the
    limiting matrix diag(1, -1, 1, ...) is used. For two dimensions this
    reproduces sqrt(a_0) Z + sqrt(a_1) X exactly.
    """
    ka = col.size
    v = -col.copy()
    v[0] += 1.0
    norm2 = float(v @ v)
    if norm2 < 1e-28:
        u = np.eye(ka)
        if ka > 1:
            u[1, 1] = -1.0
        return u
    return np.eye(ka) - 2.0 * np.outer(v, v) / norm2


def embed_povm(povm: DiagonalPOVM, *, allow_multi: bool = False) -> EmbeddingUnitary:
    """Dilate a diagonal POVM into a block-diagonal embedding unitary.

    Applying the assembled unitary to |psi>_data |0...0>_aux and measuring
    the auxiliary register in the computational basis reproduces the POVM
    statistics and post-measurement states exactly. The auxiliary register
    has ceil(log2 m) qubits for m elements.

    The two-element case uses sqrt(a_0^j) Z + sqrt(a_1^j) X per block. More
    than two elements is a cost-model extension (unitary completion of the
    amplitude column) and must be opted into with ``allow_multi``.
    """
    m = len(povm.elements)
    if m < 1:
        raise ValueError("POVM must have at least one element")
    if m > 2 and not allow_multi:
        raise ValueError(
            "embedding supports two elements; pass allow_multi=True for the "
            "multi-element cost model"
        )
    diags = [np.asarray(el, dtype=float) for el in povm.elements]
    d = diags[0].size
    k = max(1, math.ceil(math.log2(m))) if m > 1 else 0
    ka = 2**k
    blocks = []
    for j in range(d):
        total = sum(el[j] for el in diags)
        if abs(total - 1.0) <= COMPLETENESS_TOL:
            col = np.zeros(ka)
            col[:m] = np.sqrt([el[j] for el in diags])
            col /= np.linalg.norm(col)
            blocks.append(_reflection_from_column(col))
        elif abs(total) <= COMPLETENESS_TOL:
            blocks.append(np.eye(ka))
        else:
            raise ValueError("POVM diagonals are neither complete nor zero at "
                             f"position {j}")
    emb = EmbeddingUnitary(data_dim=d, aux_count=k, n_outcomes=m, blocks=blocks)
    u = emb.assemble()
    if not np.allclose(u @ u.conj().T, np.eye(d * ka), atol=1e-10):
        raise ArithmeticError("assembled embedding is not unitary")
    return emb


def synthesize(emb: EmbeddingUnitary) -> SynthesisReport:
    """Break an embedding into multi-controlled blocks with MCX costs.

    Each non-identity block U^j becomes a controlled unitary acting on all
    of the party's data qubits plus the auxiliary register and is charged
    2 MCX gates (2(m-1) for the m-outcome cost-model extension); identity
    blocks cost nothing and are omitted. Single-qubit gates are free.
    """
    d, k = emb.data_dim, emb.aux_count
    ka = 2**k
    n_data = int(round(math.log2(d)))
    if 2**n_data != d:
        raise ValueError("data dimension must be a power of two for synthesis")
    touched = tuple(range(n_data + k))
    per_block = 2 * (emb.n_outcomes - 1)
    blocks = []
    for j, u_j in enumerate(emb.blocks):
        if np.allclose(u_j, np.eye(ka), atol=1e-12):
            continue
        full = np.eye(d * ka, dtype=complex)
        full[j * ka : (j + 1) * ka, j * ka : (j + 1) * ka] = u_j
        blocks.append(SynthesisBlock(j, full, per_block, touched))
    product = np.eye(d * ka, dtype=complex)
    for blk in blocks:
        product = blk.unitary @ product
    if not np.allclose(product, emb.assemble(), atol=1e-10):
        raise ArithmeticError("block product does not reproduce the embedding")
    return SynthesisReport(blocks=blocks)


def execute_round(state: np.ndarray, rnd: ScheduleRound, p_g: float) -> list:
    """Run one round on a density matrix, returning uncorrected branches.

    The state must include the acting party's auxiliary register in the
    all-zeros state (layout [A-data, A-aux, B-data]). Gate noise is applied
    first: for every MCX gate in the synthesis report, each touched qubit
    passes through the equal-weight Pauli channel with probability ``p_g``.
    Then the exact embedding unitary acts and the auxiliary register is
    measured projectively.

    Returns a list of (weight, density matrix, correction permutation)
    with weights summing to 1; branch states are normalized and have the
    auxiliary register reset to zeros. Corrections are not applied here.
    Noise-induced outcomes beyond the element list get the identity
    permutation.
    """
    emb = rnd.embedding
    d = emb.data_dim
    ka = 2**emb.aux_count
    dim = state.shape[0]
    d_b = dim // (d * ka)
    if d * ka * d_b != dim:
        raise ValueError("state dimension does not match the round's registers")
    pops = np.real(np.diag(state)).reshape(d, ka, d_b).sum(axis=(0, 2))
    if pops[1:].sum() > 1e-10:
        raise ValueError("auxiliary register is not in the all-zeros state")
    rho = state
    if p_g > 0:
        for blk in rnd.synthesis.blocks:
            for _ in range(blk.mcx_count):
                for q in blk.touched_qubits:
                    rho = depolarize(rho, p_g, _EQUAL_PAULI, qubit=q)
    u = emb.assemble()
    t = rho.reshape(d * ka, d_b, d * ka, d_b)
    t = np.einsum("ij,jakb->iakb", u, t, optimize=True)
    t = np.einsum("iakb,lk->ialb", t, u.conj(), optimize=True)
    view = t.reshape(d, ka, d_b, d, ka, d_b)
    branches = []
    for m in range(ka):
        block = view[:, m, :, :, m, :]
        w = float(np.real(np.einsum("abab->", block)))
        if w < 1e-14:
            continue
        out = np.zeros((d, ka, d_b, d, ka, d_b), dtype=complex)
        out[:, 0, :, :, 0, :] = block / w
        if m < len(rnd.povm.corrections):
            perm = np.asarray(rnd.povm.corrections[m], dtype=int)
        else:
            perm = np.arange(d)
        branches.append((w, out.reshape(dim, dim), perm))
    return branches


def apply_correction(state: np.ndarray, perm, aux_states: int = 1) -> np.ndarray:
    """Relabel both parties' data bases by the permutation.

    Moves the branch state with vector components v[perm[i]] back to v:
    new basis index perm[i] receives old index i on each side. The
    auxiliary register (``aux_states`` levels between the two data
    registers) is untouched.
    """
    p = np.asarray(perm, dtype=int)
    d = p.size
    dim = state.shape[0]
    if d * aux_states * d != dim:
        raise ValueError("permutation size does not match the state layout")
    x = np.arange(aux_states)
    full = ((p[:, None, None] * aux_states + x[None, :, None]) * d
            + p[None, None, :]).ravel()
    out = np.zeros_like(state)
    out[np.ix_(full, full)] = state
    return out


def execute_filter(state: np.ndarray, filter_diag) -> tuple:
    """Apply the final probabilistic filter on party A's data register.

    The filter F is diagonal with entries ``filter_diag`` and must satisfy
    F†F <= I. Returns (success weight, normalized success state) where the
    weight is tr(F rho F†).
    """
    f = np.asarray(filter_diag, dtype=float).reshape(-1)
    if np.max(f**2) > 1 + 1e-10 or f.min() < 0:
        raise ValueError("filter entries must satisfy 0 <= f_i^2 <= 1")
    d = f.size
    dim = state.shape[0]
    d_b = dim // d
    if d * d_b != dim:
        raise ValueError("filter size does not divide the state dimension")
    k_full = np.repeat(f, d_b)
    out = state * k_full[:, None] * k_full[None, :]
    w = float(np.real(np.trace(out)))
    if w > 1e-14:
        out = out / w
    return w, out


def _equal_qubit_split(size: int) -> int:
    n = int(round(math.log2(size)))
    if 2**n != size or n % 2 != 0:
        raise ValueError(
            "state size must be a power of 4 for an equal qubit split; "
            "pass explicit dims"
        )
    return 2 ** (n // 2)


def _pad_target(target: np.ndarray, d_l: int, d_r: int) -> np.ndarray:
    """Embed a smaller bipartite target on the leading qubits of each side."""
    size = target.size
    if size == d_l * d_r:
        return target
    t_l = _equal_qubit_split(size)
    if d_l % t_l != 0 or d_r % (size // t_l) != 0:
        raise ValueError("target dimensions do not embed in the source")
    t_r = size // t_l
    mat = np.zeros((d_l, d_r), dtype=complex)
    rows = np.arange(t_l) * (d_l // t_l)
    cols = np.arange(t_r) * (d_r // t_r)
    mat[np.ix_(rows, cols)] = target.reshape(t_l, t_r)
    return mat.ravel()


def compile_schedule(
    surrogate,
    target,
    g: int = 1,
    *,
    dims: tuple | None = None,
    allow_multi: bool = True,
) -> ProtocolSchedule:
    """Compile the conversion from a pure source to a pure target.

    Works in the source's Schmidt frame: the deterministic phase walks the
    Schmidt vector from the source to the intermediate vector in
    ceil(n_transforms / g) measurement rounds, then a single filter reaches
    the target with probability ``vidal_probability``. With g=1 every round
    has exactly two outcomes and one auxiliary qubit; larger g trades
    rounds for multi-outcome measurements.

    A target on fewer qubits than the source is embedded on the leading
    qubits of each party; the success branch then leaves the remaining
    qubits in their zero states.
    """
    if g < 1:
        raise ValueError("group size must be at least 1")
    s = np.asarray(surrogate, dtype=complex).reshape(-1)
    t = np.asarray(target, dtype=complex).reshape(-1)
    if dims is None:
        d_l = _equal_qubit_split(s.size)
        d_r = s.size // d_l
    else:
        d_l, d_r = dims
    if t.size > s.size:
        raise ValueError("target does not fit in the source registers")
    t_full = _pad_target(t, d_l, d_r)
    alpha_dec = schmidt_decompose(s, d_l, d_r)
    beta_dec = schmidt_decompose(t_full, d_l, d_r)
    alpha, beta = alpha_dec.coefficients, beta_dec.coefficients
    if np.sum(beta > 1e-12) > np.sum(alpha > 1e-12):
        raise ValueError("target Schmidt rank exceeds the source rank")
    d = alpha.size
    r = vidal_probability(alpha, beta)
    gamma = vidal_intermediate(alpha, beta)
    transforms = t_transform_decompose(alpha, gamma)
    groups = group_ttransforms(transforms, g, d)
    vectors = [gamma]
    for mat in groups:
        vectors.append(mat @ vectors[-1])
    if not np.allclose(vectors[-1], alpha, atol=1e-9):
        raise ArithmeticError("grouped transforms do not reproduce the source")
    rounds = []
    for i in range(len(groups) - 1, -1, -1):
        povm = js_povm(vectors[i + 1], groups[i], vectors[i])
        emb = embed_povm(povm, allow_multi=allow_multi)
        rep = synthesize(emb)
        rounds.append(
            ScheduleRound(povm, emb, rep, "A", vectors[i + 1], vectors[i])
        )
    on = gamma > SUPPORT_TOL
    filt = np.ones(d)
    filt[on] = np.sqrt(np.minimum(1.0, r * beta[on] / gamma[on]))
    return ProtocolSchedule(
        rounds=rounds,
        final_filter=filt,
        left_basis=alpha_dec.left_basis,
        right_basis=alpha_dec.right_basis,
        target_left=beta_dec.left_basis,
        target_right=beta_dec.right_basis,
        alpha=alpha,
        gamma=gamma,
        beta=beta,
        success_probability=float(r),
        group_size=g,
    )


def run_schedule(
    schedule: ProtocolSchedule, state: np.ndarray | None = None, p_g: float = 0.0
) -> tuple:
    """Execute a compiled schedule on a physical two-party density matrix.

    Rotates the state into the schedule's Schmidt frame, runs every round
    (attaching the auxiliary register in zeros, executing, applying the
    recorded corrections, and averaging the corrected branches), applies
    the final filter, and rotates the success branch into the physical
    target frame.

    With ``state`` omitted the pure source state of the schedule is used.
    Returns (success probability, output density matrix).
    """
    d = schedule.dim
    if state is None:
        mat = schedule.left_basis @ np.diag(np.sqrt(schedule.alpha)) \
            @ schedule.right_basis.T
        psi = mat.ravel()
        state = np.outer(psi, psi.conj())
    w_in = np.kron(schedule.left_basis, schedule.right_basis).conj().T
    rho = w_in @ state @ w_in.conj().T
    for rnd in schedule.rounds:
        ka = 2**rnd.embedding.aux_count
        rho4 = rho.reshape(d, d, d, d)
        aux = np.zeros((ka, ka))
        aux[0, 0] = 1.0
        big = np.einsum("abcd,xy->axbcyd", rho4, aux).reshape(
            d * ka * d, d * ka * d
        )
        acc = np.zeros((d * d, d * d), dtype=complex)
        for w, branch, perm in execute_round(big, rnd, p_g):
            small = branch.reshape(d, ka, d, d, ka, d)[:, 0, :, :, 0, :]
            acc += w * apply_correction(small.reshape(d * d, d * d), perm)
        rho = acc
    w, rho = execute_filter(rho, schedule.final_filter)
    v_out = np.kron(schedule.target_left, schedule.target_right)
    return w, v_out @ rho @ v_out.conj().T


def schedule_to_document(schedule: ProtocolSchedule) -> dict:
    """JSON-ready description of a schedule for inspection and golden tests."""
    rounds = []
    for rnd in schedule.rounds:
        rounds.append(
            {
                "party": rnd.party,
                "current": [float(x) for x in rnd.current],
                "target": [float(x) for x in rnd.target_vector],
                "elements": [
                    [float(x) for x in el] for el in rnd.povm.elements
                ],
                "corrections": [
                    [int(x) for x in p] for p in rnd.povm.corrections
                ],
                "aux_count": rnd.embedding.aux_count,
                "mcx_per_block": [b.mcx_count for b in rnd.synthesis.blocks],
                "touched_qubits": [
                    list(b.touched_qubits) for b in rnd.synthesis.blocks
                ],
                "mcx_total": rnd.synthesis.mcx_total,
            }
        )
    return {
        "group_size": schedule.group_size,
        "source_vector": [float(x) for x in schedule.alpha],
        "intermediate_vector": [float(x) for x in schedule.gamma],
        "target_vector": [float(x) for x in schedule.beta],
        "success_probability": schedule.success_probability,
        "final_filter": [float(x) for x in schedule.final_filter],
        "rounds": rounds,
        "mcx_total": schedule.mcx_total,
    }
