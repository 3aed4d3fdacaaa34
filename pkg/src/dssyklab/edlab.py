"""Finite-N laboratory: Majorana operators, random-coupling Hamiltonians,
the constant diagonal defect, spectra and empirical moments.

Majorana operators are tensor products of Pauli matrices, kept as signed
permutations (flip mask plus per-state phase vector) so a Hamiltonian with
thousands of interaction terms assembles in milliseconds.  The layout pairs
sigma_y/sigma_z factors behind a sigma_x string:

    psi_1    = X X ... X
    psi_2j   = X^(n-j) Y I^(j-1)      (n = N/2 qubits)
    psi_2j+1 = X^(n-j) Z I^(j-1)

With this layout the products (-i) psi_{N-2l-1} psi_{N-2l} are adjacent
Z Z dominoes and (-i)^(N/2) psi_1 ... psi_N is Z on the first qubit, which
is exactly what makes the diagonal defect expressible as a Majorana sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

import numpy as np

MAX_QUBITS = 12  # dimension cap 2^12
_STRUCTURE_BUDGET = 8_000_000  # cached term-structure entries (complex)


# ---------------------------------------------------------------------------
# Pauli-string machinery
# ---------------------------------------------------------------------------

def _string_action(labels: list[str]) -> tuple[int, np.ndarray]:
    """(flip mask, phase vector) of a Pauli tensor product.

    Qubit 1 is the leftmost factor / most significant bit.  The operator
    maps |b> to phase[b] |b XOR mask>.
    """
    n = len(labels)
    dim = 1 << n
    idx = np.arange(dim)
    mask = 0
    phase = np.ones(dim, dtype=complex)
    for m, label in enumerate(labels, start=1):
        bit = (idx >> (n - m)) & 1
        if label == "x":
            mask |= 1 << (n - m)
        elif label == "y":
            mask |= 1 << (n - m)
            phase = phase * np.where(bit == 0, 1j, -1j)
        elif label == "z":
            phase = phase * np.where(bit == 0, 1.0, -1.0)
        elif label != "i":
            raise ValueError(f"unknown Pauli label {label!r}")
    return mask, phase


def _majorana_labels(l: int, N: int) -> list[str]:
    n = N // 2
    if l == 1:
        return ["x"] * n
    j, odd = divmod(l, 2)
    # psi_{2j} carries Y, psi_{2j+1} carries Z, both at position n-j+1
    pos = n - j + 1
    labels = ["x"] * (pos - 1) + ["z" if odd else "y"] + ["i"] * (n - pos)
    return labels


@lru_cache(maxsize=8)
def _majorana_actions(N: int) -> list[tuple[int, np.ndarray]]:
    _check_even_dim(N)
    return [_string_action(_majorana_labels(l, N)) for l in range(1, N + 1)]


def _check_even_dim(N: int):
    if N % 2 or N <= 0:
        raise ValueError("N must be a positive even integer")
    if N // 2 > MAX_QUBITS:
        raise ValueError(f"dimension cap exceeded: N/2 must stay at or below {MAX_QUBITS} qubits")


def _action_matrix(mask: int, phase: np.ndarray) -> np.ndarray:
    dim = len(phase)
    out = np.zeros((dim, dim), dtype=complex)
    idx = np.arange(dim)
    out[idx ^ mask, idx] = phase
    return out


def _compose(actions) -> tuple[int, np.ndarray]:
    """Product of signed permutations, applied right to left."""
    mask = 0
    phase = None
    idx = None
    for a_mask, a_phase in reversed(list(actions)):
        if phase is None:
            idx = np.arange(len(a_phase))
            mask, phase = a_mask, a_phase.copy()
        else:
            phase = phase * a_phase[idx ^ mask]
            mask ^= a_mask
    if phase is None:
        raise ValueError("empty composition")
    return mask, phase


def majorana(l: int, N: int) -> np.ndarray:
    """Dense matrix of the l-th Majorana operator on 2^(N/2) states."""
    if not 1 <= l <= N:
        raise ValueError(f"Majorana index must satisfy 1 <= l <= N, got {l}")
    _check_even_dim(N)
    mask, phase = _majorana_actions(N)[l - 1]
    return _action_matrix(mask, phase)


# ---------------------------------------------------------------------------
# model parameters and Hamiltonians
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModelParams:
    """Run parameters: N Majoranas, degree-p interactions, defect strength
    theta on the first 2^(N/2-k) diagonal entries, seeded sampling."""

    N: int
    p: int = 4
    theta: float = 0.0
    k: int = 0
    seed: int = 0
    samples: int = 1

    def __post_init__(self):
        _check_even_dim(self.N)
        if self.p % 2 or not 0 < self.p <= self.N:
            raise ValueError("p must be even with 0 < p <= N")
        if not 0 <= self.k <= self.N // 2:
            raise ValueError("k must satisfy 0 <= k <= N/2")
        if self.samples < 1:
            raise ValueError("samples must be positive")

    @property
    def dim(self) -> int:
        return 1 << (self.N // 2)

    @property
    def r(self) -> float:
        return 2.0 ** (-self.k)

    @property
    def nonzero_entries(self) -> int:
        return 1 << (self.N // 2 - self.k)

    def metadata(self) -> dict:
        return {"N": self.N, "p": self.p, "theta": self.theta, "k": self.k,
                "seed": self.seed, "samples": self.samples}


@dataclass(frozen=True)
class SpectrumSample:
    """Sorted eigenvalues of one Hamiltonian realization."""

    eigenvalues: np.ndarray
    params: ModelParams
    sample_index: int

    def __post_init__(self):
        if len(self.eigenvalues) != self.params.dim:
            raise ValueError("eigenvalue count must equal the Hilbert dimension")


def sample_rng(seed: int, sample_index: int) -> np.random.Generator:
    """Counter-based per-sample stream: Philox keyed by the run seed, jumped
    to the sample index.  Streams are independent and order-insensitive."""
    return np.random.Generator(np.random.Philox(key=np.uint64(seed)).jumped(sample_index))


@lru_cache(maxsize=2)
def _term_structure(N: int, p: int):
    """Masks and phases of all C(N,p) interaction terms (with the Hermiticity
    prefactor folded in), or None when too large to cache."""
    dim = 1 << (N // 2)
    n_terms = math.comb(N, p)
    if n_terms * dim > _STRUCTURE_BUDGET:
        return None
    singles = _majorana_actions(N)
    prefactor = 1j ** (p * (p - 1) // 2)
    masks = np.empty(n_terms, dtype=np.int64)
    phases = np.empty((n_terms, dim), dtype=complex)
    for t, idx_set in enumerate(combinations(range(N), p)):
        mask, phase = _compose(singles[i] for i in idx_set)
        masks[t] = mask
        phases[t] = prefactor * phase
    return masks, phases


def build_h_syk(params: ModelParams, rng: np.random.Generator) -> np.ndarray:
    """One realization of the random p-body Hamiltonian.

    Couplings are i.i.d. normal with variance 1/C(N,p), which normalizes
    the trace of H^2 to one.  Hermitian by construction.
    """
    N, p = params.N, params.p
    dim = params.dim
    n_terms = math.comb(N, p)
    couplings = rng.standard_normal(n_terms) / math.sqrt(n_terms)
    H = np.zeros((dim, dim), dtype=complex)
    idx = np.arange(dim)
    structure = _term_structure(N, p)
    if structure is not None:
        masks, phases = structure
        for t in range(n_terms):
            H[idx ^ masks[t], idx] += couplings[t] * phases[t]
        return H
    singles = _majorana_actions(N)
    prefactor = 1j ** (p * (p - 1) // 2)
    for t, idx_set in enumerate(combinations(range(N), p)):
        mask, phase = _compose(singles[i] for i in idx_set)
        H[idx ^ mask, idx] += (couplings[t] * prefactor) * phase
    return H


def build_dc(N: int, k: int) -> np.ndarray:
    """Diagonal defect: first 2^(N/2-k) entries one, the rest zero."""
    _check_even_dim(N)
    if not 0 <= k <= N // 2:
        raise ValueError("k must satisfy 0 <= k <= N/2")
    dim = 1 << (N // 2)
    diag = np.zeros(dim)
    diag[: dim >> k] = 1.0
    return np.diag(diag)


def _chirality(N: int) -> np.ndarray:
    """(-i)^(N/2) psi_1 ... psi_N as a matrix."""
    singles = _majorana_actions(N)
    mask, phase = _compose(singles)
    return (-1j) ** (N // 2) * _action_matrix(mask, phase)


def _pert_sum(N: int, k: int) -> np.ndarray:
    """The defect rebuilt from its Majorana expansion: sum over domino
    subsets of {0..k-2} of (-i)^m (prod psi_{N-2l-1} psi_{N-2l}) (1 + chirality),
    divided by 2^k."""
    singles = _majorana_actions(N)
    dim = 1 << (N // 2)
    eye = np.eye(dim, dtype=complex)
    core = eye + _chirality(N)
    total = np.zeros((dim, dim), dtype=complex)
    for m in range(k):
        for subset in combinations(range(k - 1), m):
            term = core
            for l in subset:
                domino = _action_matrix(*_compose([singles[N - 2 * l - 2], singles[N - 2 * l - 1]]))
                term = domino @ term
            total += (-1j) ** m * term
    return total / 2 ** k


def _pert_display(N: int, k: int) -> np.ndarray:
    """The three printed special cases (k = 1, 2, 3), term by term."""
    dim = 1 << (N // 2)
    eye = np.eye(dim, dtype=complex)

    def prod_psi(upto: int) -> np.ndarray:
        singles = _majorana_actions(N)
        mask, phase = _compose(singles[:upto])
        return _action_matrix(mask, phase)

    psi = lambda l: majorana(l, N)
    if k == 1:
        return (eye + (-1j) ** (N // 2) * prod_psi(N)) / 2
    if k == 2:
        return (eye
                + (-1j) ** (N // 2) * prod_psi(N)
                + (-1j) ** ((N - 2) // 2) * prod_psi(N - 2)
                - 1j * psi(N - 1) @ psi(N)) / 4
    if k == 3:
        return (eye
                + (-1j) ** (N // 2) * prod_psi(N)
                + (-1j) ** ((N - 2) // 2) * prod_psi(N - 2)
                + (-1j) ** ((N - 4) // 2) * prod_psi(N - 4)
                - 1j * psi(N - 1) @ psi(N)
                - 1j * psi(N - 3) @ psi(N - 2)
                - psi(N - 3) @ psi(N - 2) @ psi(N - 1) @ psi(N)
                + (-1j) ** ((N - 2) // 2) * psi(N - 1) @ psi(N) @ prod_psi(N - 4)) / 8
    raise ValueError("printed displays exist for k in {1, 2, 3}")


def verify_dc_majorana_expansion(N: int, k: int) -> bool:
    """Check that the Majorana expansion of the defect reproduces the
    diagonal matrix exactly (entrywise below 1e-12).

    Both the general domino-subset sum and, for k <= 3, the printed
    special-case display are materialized and compared against build_dc.
    Raises with the first differing entry on mismatch.
    """
    if N > 10:
        raise ValueError("expansion check is meant for N <= 10")
    if not 1 <= k <= N // 2:
        raise ValueError("need 1 <= k <= N/2")
    target = build_dc(N, k).astype(complex)
    candidates = [("domino-subset sum", _pert_sum(N, k))]
    if k <= 3:
        candidates.append(("printed display", _pert_display(N, k)))
    for label, cand in candidates:
        delta = np.abs(cand - target)
        if delta.max() >= 1e-12:
            i, j = np.unravel_index(np.argmax(delta), delta.shape)
            raise ValueError(
                f"{label} mismatch at N={N}, k={k}: entry ({i},{j}) is "
                f"{cand[i, j]:.6g}, expected {target[i, j]:.6g}")
    return True


# ---------------------------------------------------------------------------
# sampling and empirical moments
# ---------------------------------------------------------------------------

def sample_spectra(params: ModelParams) -> list[SpectrumSample]:
    """Eigenvalue spectra of H = H_random + theta * D for each sample.

    Deterministic given the seed: sample s always uses the same coupling
    stream regardless of how many samples are requested.
    """
    defect = params.theta * np.diag(build_dc(params.N, params.k))
    out = []
    for s in range(params.samples):
        H = build_h_syk(params, sample_rng(params.seed, s))
        H[np.diag_indices_from(H)] += defect
        eigs = np.linalg.eigvalsh(H)
        out.append(SpectrumSample(np.sort(eigs), params, s))
    return out


def empirical_moments(spectra: list[SpectrumSample], max_n: int) -> list[float]:
    """Ensemble means of the normalized trace moments, orders 0..max_n."""
    if not spectra:
        raise ValueError("no spectra given")
    moments = np.zeros(max_n + 1)
    for sample in spectra:
        eigs = sample.eigenvalues
        moments += np.array([np.mean(eigs ** n) for n in range(max_n + 1)])
    return list(moments / len(spectra))


def paired_reduced_moments(params: ModelParams, max_n: int):
    """Matched-seed estimates of the reduced moments m_1..max_n.

    Each sample diagonalizes the same coupling realization with and without
    the defect; the pure-random trace moment is subtracted per sample (even
    orders only) before dividing by r, which cancels most of the sampling
    noise.  Returns (means, standard errors), both length max_n.
    """
    r = params.r
    defect = params.theta * np.diag(build_dc(params.N, params.k))
    per_sample = np.zeros((params.samples, max_n))
    for s in range(params.samples):
        H = build_h_syk(params, sample_rng(params.seed, s))
        eig_syk = np.linalg.eigvalsh(H)
        H[np.diag_indices_from(H)] += defect
        eig_full = np.linalg.eigvalsh(H)
        for n in range(1, max_n + 1):
            full = np.mean(eig_full ** n)
            syk = np.mean(eig_syk ** n) if n % 2 == 0 else 0.0
            per_sample[s, n - 1] = (full - syk) / r
    means = per_sample.mean(axis=0)
    if params.samples > 1:
        stderr = per_sample.std(axis=0, ddof=1) / math.sqrt(params.samples)
    else:
        stderr = np.full(max_n, np.inf)
    return list(means), list(stderr)


# ---------------------------------------------------------------------------
# finite-size weights
# ---------------------------------------------------------------------------

def qn_finite(p: int, N: int) -> Fraction:
    """Finite-size crossing weight: the normalized alternating overlap sum.

    Tends to exp(-2 p^2 / N) in the double-scaling regime; equals (-1)^p
    at p = N.
    """
    if not 0 < p <= N:
        raise ValueError("need 0 < p <= N")
    total = sum((-1) ** c * math.comb(p, c) * math.comb(N - p, p - c)
                for c in range(p + 1))
    return Fraction(total, math.comb(N, p))


def qj_weight(p: int, N: int, j: int) -> Fraction:
    """Average exchange factor q_j between a p-body term and a 2j-Majorana block."""
    if j < 0 or 2 * j > N:
        raise ValueError("need 0 <= 2j <= N")
    total = sum((-1) ** l * math.comb(2 * j, l) * math.comb(N - 2 * j, p - l)
                for l in range(min(2 * j, p) + 1))
    return Fraction(total, math.comb(N, p))


def qtilde_weight(p: int, N: int, k: int) -> Fraction:
    """Averaged wall weight for the defect at r = 2^-k.

    The defect splits into 2^(k-1) domino-subset components; a subset of
    size j carries exchange factor q_j, and there are C(k-1, j) of them:
    qtilde = sum_j C(k-1,j) q_j / 2^(k-1).  This reduces to the printed
    (q_0 + (k-1)(q_1+...+q_{k-2}) + q_{k-1})/2^(k-1) for every k <= 4.
    """
    if p % 2:
        raise ValueError("p must be even")
    if k < 1 or 2 * (k - 1) > N:
        raise ValueError("need k >= 1 and 2(k-1) <= N")
    total = sum(math.comb(k - 1, j) * qj_weight(p, N, j) for j in range(k))
    return total / 2 ** (k - 1)


def qtilde_weight_main_text(p: int, N: int, k: int) -> Fraction:
    """The alternate k = 3 value printed in the comparison section,
    (q_0 + 2 q_1)/4; identical to qtilde_weight for k in {1, 2, 4}."""
    if k == 3:
        return (qj_weight(p, N, 0) + 2 * qj_weight(p, N, 1)) / 4
    return qtilde_weight(p, N, k)


# ---------------------------------------------------------------------------
# phase scan
# ---------------------------------------------------------------------------

def spectral_gap_report(pooled: np.ndarray, trim: float = 0.005,
                        span_fraction: float = 0.05) -> dict:
    """Bimodality statistics of a pooled sorted spectrum.

    A `trim` fraction of points is dropped from each end (isolated extreme
    eigenvalues produce wide spacings that say nothing about the support),
    then the spectrum is flagged bimodal when the largest interior
    nearest-neighbor gap exceeds `span_fraction` of the interior span:
    a macroscopic void, not a sparse-sampling artifact.  `gap` is the
    detected gap size, zero for unimodal spectra; the max/median spacing
    ratio is reported alongside for reference.
    """
    pooled = np.sort(np.asarray(pooled, dtype=float))
    if len(pooled) < 10:
        raise ValueError("pooled spectrum too small for gap statistics")
    cut = int(len(pooled) * trim)
    interior = pooled[cut: len(pooled) - cut] if cut else pooled
    gaps = np.diff(interior)
    max_gap = float(gaps.max())
    median_gap = float(np.median(np.diff(pooled)))
    span = float(interior[-1] - interior[0])
    ratio = max_gap / median_gap if median_gap > 0 else math.inf
    bimodal = max_gap > span_fraction * span
    return {"max_gap": max_gap, "median_gap": median_gap, "gap_ratio": ratio,
            "bimodal": bimodal, "gap": max_gap if bimodal else 0.0}


def phase_scan(base: ModelParams, thetas: list[float], ks: list[int] | None = None,
               trim: float = 0.005, span_fraction: float = 0.05) -> list[dict]:
    """Gap statistics over a (theta, k) grid of pooled sampled spectra."""
    ks = ks if ks is not None else [base.k]
    rows = []
    for k in ks:
        for theta in thetas:
            params = ModelParams(N=base.N, p=base.p, theta=theta, k=k,
                                 seed=base.seed, samples=base.samples)
            pooled = np.concatenate([s.eigenvalues for s in sample_spectra(params)])
            report = spectral_gap_report(pooled, trim, span_fraction)
            rows.append({"theta": theta, "k": k, "samples": base.samples, **report})
    return rows


def histogram(pooled: np.ndarray, bins: int = 80):
    """(left_edge, count, density) rows for a pooled spectrum."""
    counts, edges = np.histogram(pooled, bins=bins)
    width = np.diff(edges)
    density = counts / (counts.sum() * width)
    return [(float(edges[i]), int(counts[i]), float(density[i])) for i in range(bins)]
