"""Dense complex linear algebra for small multi-qubit Hilbert spaces.

Conventions used throughout the package:

* qubit 0 is the most significant bit of an amplitude index, so the basis
  state ``|q0 q1 ... q(k-1)>`` sits at index ``q0 * 2**(k-1) + ... + q(k-1)``;
* states equal up to a global phase compare equal;
* entropies are measured in bits.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptySubset,
    IndexOutOfRange,
    InvalidDensityMatrix,
    LinearDependence,
    NonUnitaryProbe,
    ProbabilityNotNormalized,
    TooLarge,
    WrongDimension,
)

ATOL = 1e-10
DEPENDENCE_TOL = 1e-8
MAX_DIM = 2**8


def _qubits_for(dim: int) -> int:
    k = int(dim).bit_length() - 1
    if dim < 1 or 2**k != dim:
        raise DimensionMismatch(f"dimension {dim} is not a power of two")
    return k


@dataclass(frozen=True, eq=False)
class StateVec:
    """Normalized pure state over ``qubit_count`` labeled qubits."""

    amps: np.ndarray
    qubit_count: int

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=complex).reshape(-1)
        object.__setattr__(self, "amps", amps)
        if amps.size != 2**self.qubit_count or _qubits_for(amps.size) != self.qubit_count:
            raise DimensionMismatch(
                f"{amps.size} amplitudes cannot describe {self.qubit_count} qubits"
            )
        norm = np.vdot(amps, amps).real
        if abs(norm - 1.0) > ATOL:
            raise ValueError(f"state is not normalized (norm^2 = {norm!r})")

    @classmethod
    def from_amps(cls, amps, normalize: bool = False) -> "StateVec":
        amps = np.asarray(amps, dtype=complex).reshape(-1)
        if normalize:
            norm = np.linalg.norm(amps)
            if norm == 0:
                raise ValueError("cannot normalize the zero vector")
            amps = amps / norm
        return cls(amps, _qubits_for(amps.size))

    @property
    def dim(self) -> int:
        return self.amps.size

    def projector(self) -> np.ndarray:
        return np.outer(self.amps, self.amps.conj())

    def __repr__(self) -> str:
        return f"StateVec(qubit_count={self.qubit_count}, amps={np.round(self.amps, 6)!r})"


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    entries: np.ndarray
    qubit_count: int

    def __post_init__(self):
        rho = np.asarray(self.entries, dtype=complex)
        object.__setattr__(self, "entries", rho)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise InvalidDensityMatrix(f"not a square matrix: shape {rho.shape}")
        if 2**self.qubit_count != rho.shape[0]:
            raise DimensionMismatch(
                f"{rho.shape[0]}x{rho.shape[0]} matrix cannot describe {self.qubit_count} qubits"
            )
        if np.max(np.abs(rho - rho.conj().T)) > ATOL:
            raise InvalidDensityMatrix("matrix is not Hermitian")
        if abs(np.trace(rho).real - 1.0) > ATOL:
            raise InvalidDensityMatrix(f"trace {np.trace(rho).real!r} != 1")
        if np.linalg.eigvalsh(rho).min() < -ATOL:
            raise InvalidDensityMatrix("matrix has a negative eigenvalue")

    @classmethod
    def from_matrix(cls, entries) -> "DensityMatrix":
        entries = np.asarray(entries, dtype=complex)
        return cls(entries, _qubits_for(entries.shape[0]))

    @classmethod
    def from_state(cls, state: StateVec) -> "DensityMatrix":
        return cls(state.projector(), state.qubit_count)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True, eq=False)
class BasisSet:
    """An orthonormal basis of ``M = 2**n`` vectors, stored one vector per row."""

    vectors: np.ndarray

    def __post_init__(self):
        vecs = np.asarray(self.vectors, dtype=complex)
        object.__setattr__(self, "vectors", vecs)
        if vecs.ndim != 2 or vecs.shape[0] != vecs.shape[1]:
            raise DimensionMismatch(f"basis needs M vectors of dimension M, got {vecs.shape}")
        if vecs.shape[0] > MAX_DIM:
            raise TooLarge(f"dimension {vecs.shape[0]} exceeds the cap of {MAX_DIM}")
        _qubits_for(vecs.shape[0])
        gram = vecs.conj() @ vecs.T
        if np.max(np.abs(gram - np.eye(len(vecs)))) > ATOL:
            raise ValueError("basis vectors are not orthonormal")

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    @property
    def n(self) -> int:
        return _qubits_for(self.dim)

    @property
    def matrix(self) -> np.ndarray:
        """Column matrix ``A`` with ``A[:, j] = |a_j>``."""
        return self.vectors.T

    def __len__(self) -> int:
        return self.dim

    def __getitem__(self, j: int) -> StateVec:
        return StateVec(self.vectors[j], self.n)

    def relabeled(self, perm: "Permutation") -> "BasisSet":
        """Basis ``{|b_j>}`` with ``|b_j> = |a_perm(j)>``."""
        if len(perm) != self.dim:
            raise DimensionMismatch(f"permutation on {len(perm)} letters, basis has {self.dim}")
        return BasisSet(self.vectors[list(perm.map)])


@dataclass(frozen=True)
class Permutation:
    """Bijection on ``{0, ..., L-1}``; ``perm(i) == map[i]``."""

    map: tuple[int, ...]

    def __post_init__(self):
        m = tuple(int(x) for x in self.map)
        object.__setattr__(self, "map", m)
        if sorted(m) != list(range(len(m))):
            raise ValueError(f"not a bijection: {m}")

    @classmethod
    def identity(cls, length: int) -> "Permutation":
        return cls(tuple(range(length)))

    @classmethod
    def random(cls, length: int, rng: np.random.Generator) -> "Permutation":
        return cls(tuple(rng.permutation(length).tolist()))

    @classmethod
    def cycle(cls, length: int) -> "Permutation":
        """The shift ``i -> i + 1 mod length``."""
        return cls(tuple((i + 1) % length for i in range(length)))

    @classmethod
    def transposition(cls, length: int, i: int, j: int) -> "Permutation":
        m = list(range(length))
        m[i], m[j] = m[j], m[i]
        return cls(tuple(m))

    def __len__(self) -> int:
        return len(self.map)

    def __call__(self, i: int) -> int:
        return self.map[i]

    def compose(self, first: "Permutation") -> "Permutation":
        """``self . first``: apply ``first``, then ``self``."""
        if len(first) != len(self):
            raise DimensionMismatch("cannot compose permutations of different length")
        return Permutation(tuple(self.map[first.map[i]] for i in range(len(self))))

    def inverse(self) -> "Permutation":
        inv = [0] * len(self.map)
        for i, target in enumerate(self.map):
            inv[target] = i
        return Permutation(tuple(inv))

    def is_identity(self) -> bool:
        return self.map == tuple(range(len(self.map)))


@dataclass(frozen=True, eq=False)
class UnitaryFamily:
    """``M`` encoding unitaries acting on the code space, anchored at ``|a_i>``."""

    ops: np.ndarray
    anchor_index: int

    def __post_init__(self):
        ops = np.asarray(self.ops, dtype=complex)
        object.__setattr__(self, "ops", ops)
        if ops.ndim != 3 or ops.shape[1] != ops.shape[2]:
            raise DimensionMismatch(f"family must be a stack of square matrices, got {ops.shape}")
        if not 0 <= self.anchor_index < ops.shape[1]:
            raise IndexOutOfRange(f"anchor {self.anchor_index} outside 0..{ops.shape[1] - 1}")
        for u in ops:
            if not is_unitary(u):
                raise ValueError("family member is not unitary")

    @property
    def dim(self) -> int:
        return self.ops.shape[1]

    def __len__(self) -> int:
        return self.ops.shape[0]

    def __getitem__(self, j: int) -> np.ndarray:
        return self.ops[j]


class SubsetOutcome(NamedTuple):
    """Result of measuring some of a state's qubits.

    ``measured`` is the post-measurement state of the measured qubits (in the
    order they were given) and ``residual`` the conditional state of the
    remaining qubits in ascending position order, or ``None`` when nothing
    remains.  The full collapsed state is ``measured (x) residual`` up to the
    qubit reordering.
    """

    outcome: int | tuple[int, ...]
    measured: StateVec
    residual: StateVec | None
    probability: float


def is_unitary(u: np.ndarray, atol: float = ATOL) -> bool:
    u = np.asarray(u)
    return u.ndim == 2 and u.shape[0] == u.shape[1] and bool(
        np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) < atol
    )


def ket(bits: str) -> StateVec:
    """Computational basis state, e.g. ``ket("01")``; ``+``/``-`` give X eigenstates."""
    singles = {
        "0": np.array([1, 0], dtype=complex),
        "1": np.array([0, 1], dtype=complex),
        "+": np.array([1, 1], dtype=complex) / np.sqrt(2),
        "-": np.array([1, -1], dtype=complex) / np.sqrt(2),
    }
    amps = np.array([1], dtype=complex)
    for ch in bits:
        amps = np.kron(amps, singles[ch])
    return StateVec(amps, len(bits))


def tensor(*states: StateVec) -> StateVec:
    amps = np.array([1], dtype=complex)
    for s in states:
        amps = np.kron(amps, s.amps)
    return StateVec(amps, sum(s.qubit_count for s in states))


def fidelity(a: StateVec, b: StateVec) -> float:
    """``|<a|b>|``; phase-insensitive overlap magnitude."""
    if a.dim != b.dim:
        raise DimensionMismatch("states live in different spaces")
    return float(abs(np.vdot(a.amps, b.amps)))


def states_equal(a: StateVec, b: StateVec, atol: float = ATOL) -> bool:
    return a.dim == b.dim and abs(fidelity(a, b) - 1.0) < atol


def computational_basis(n: int) -> BasisSet:
    return BasisSet(np.eye(2**n, dtype=complex))


def bell_basis() -> BasisSet:
    """Bell basis ordered ``(|00>+|11>), (|00>-|11>), (|01>+|10>), (|01>-|10>)``, all /sqrt(2).

    Index 0 is the state the decoy pairs are prepared in.
    """
    s = 1 / np.sqrt(2)
    return BasisSet(
        np.array(
            [[s, 0, 0, s], [s, 0, 0, -s], [0, s, s, 0], [0, s, -s, 0]],
            dtype=complex,
        )
    )


def ghz_basis(n: int) -> BasisSet:
    """The ``2**n`` states ``(|x> +- |~x>)/sqrt(2)`` with ``x`` starting in 0.

    Reduces to ``{|+>, |->}`` for one qubit and to :func:`bell_basis` for two.
    """
    dim = 2**n
    vecs = []
    s = 1 / np.sqrt(2)
    for x in range(dim // 2):
        for sign in (1, -1):
            v = np.zeros(dim, dtype=complex)
            v[x] = s
            v[dim - 1 - x] = sign * s
            vecs.append(v)
    return BasisSet(np.array(vecs))


Z_BASIS = computational_basis(1)
X_BASIS = BasisSet(np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2))


def gram_schmidt(vectors: Sequence) -> BasisSet:
    """Orthonormalize ``M = 2**n`` linearly independent vectors of dimension ``M``.

    Each input is normalized before projection and projected twice against the
    vectors already accepted; a residual norm below ``1e-8`` after the second
    pass raises :class:`LinearDependence`.
    """
    rows = [np.asarray(v.amps if isinstance(v, StateVec) else v, dtype=complex).reshape(-1)
            for v in vectors]
    m = len(rows)
    if m == 0:
        raise DimensionMismatch("no vectors given")
    _qubits_for(m)
    if any(r.size != m for r in rows):
        raise DimensionMismatch(f"expected {m} vectors of dimension {m}")
    if m > MAX_DIM:
        raise TooLarge(f"dimension {m} exceeds the cap of {MAX_DIM}")

    accepted: list[np.ndarray] = []
    for idx, v in enumerate(rows):
        norm = np.linalg.norm(v)
        if norm < DEPENDENCE_TOL:
            raise LinearDependence(f"vector {idx} is (numerically) zero")
        w = v / norm
        if accepted:
            q = np.array(accepted)
            for _ in range(2):
                w = w - q.T @ (q.conj() @ w)
        residual = np.linalg.norm(w)
        if residual < DEPENDENCE_TOL:
            raise LinearDependence(
                f"vector {idx} lies in the span of the preceding vectors (residual {residual:.2e})"
            )
        accepted.append(w / residual)
    return BasisSet(np.array(accepted))


def permutation_unitary(basis: BasisSet, perm: Permutation) -> np.ndarray:
    """``U = sum_j |a_perm(j)><a_j|``, so that ``U|a_j> = |a_perm(j)>``."""
    if len(perm) != basis.dim:
        raise DimensionMismatch(f"permutation on {len(perm)} letters, basis has {basis.dim}")
    a = basis.matrix
    return a[:, list(perm.map)] @ a.conj().T


def change_of_basis_unitary(source: BasisSet, target: BasisSet) -> np.ndarray:
    """``sum_j |t_j><s_j|`` for an arbitrary output basis ``target``."""
    if source.dim != target.dim:
        raise DimensionMismatch("bases have different dimensions")
    return target.matrix @ source.matrix.conj().T


def hermitian_family(basis: BasisSet, i: int) -> UnitaryFamily:
    """Symmetric encoding family: identity at the anchor, basis-vector swaps elsewhere.

    ``ops[j]`` exchanges ``|a_i>`` and ``|a_j>`` and fixes every other basis
    vector, so ``ops[j] |a_i> = |a_j>`` and each op is its own inverse.
    """
    m = basis.dim
    if not 0 <= i < m:
        raise IndexOutOfRange(f"anchor {i} outside 0..{m - 1}")
    a = basis.matrix
    ops = np.empty((m, m, m), dtype=complex)
    for j in range(m):
        if j == i:
            ops[j] = np.eye(m)
            continue
        ai, aj = a[:, i], a[:, j]
        rest = [k for k in range(m) if k not in (i, j)]
        ops[j] = np.outer(ai, aj.conj()) + np.outer(aj, ai.conj()) + a[:, rest] @ a[:, rest].conj().T
    return UnitaryFamily(ops, i)


def encoding_family(basis: BasisSet, anchor: int, output_perm: Permutation | None = None) -> UnitaryFamily:
    """Family with ``ops[j] |a_anchor> = |b_j> = |a_output_perm(j)>``.

    Built from :func:`hermitian_family` by relabeling; with no ``output_perm``
    it is the symmetric family itself.
    """
    base = hermitian_family(basis, anchor)
    if output_perm is None or output_perm.is_identity():
        return base
    if len(output_perm) != basis.dim:
        raise DimensionMismatch("output permutation must act on M letters")
    return UnitaryFamily(base.ops[list(output_perm.map)], anchor)


def verify_orthogonal_family(family: UnitaryFamily, basis: BasisSet) -> bool:
    if family.dim != basis.dim:
        return False
    anchor = basis.vectors[family.anchor_index]
    images = family.ops @ anchor
    gram = images.conj() @ images.T
    off = gram - np.diag(np.diag(gram))
    return bool(np.max(np.abs(off), initial=0.0) < ATOL)


def _sample(probs: np.ndarray, rng: np.random.Generator) -> int:
    cdf = np.cumsum(probs)
    idx = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    return min(idx, len(probs) - 1)


def measure(state: StateVec, basis: BasisSet, rng: np.random.Generator) -> tuple[int, StateVec]:
    """Projective measurement of the whole state in ``basis``."""
    if basis.dim != state.dim:
        raise DimensionMismatch(f"basis dimension {basis.dim} != state dimension {state.dim}")
    probs = np.abs(basis.vectors.conj() @ state.amps) ** 2
    j = _sample(probs, rng)
    return j, basis[j]


def _split_axes(amps: np.ndarray, k: int, front: Sequence[int]) -> tuple[np.ndarray, list[int]]:
    """Reshape ``amps`` into a matrix whose rows index the ``front`` qubits."""
    rest = [q for q in range(k) if q not in front]
    t = amps.reshape((2,) * k).transpose(list(front) + rest)
    return t.reshape(2 ** len(front), 2 ** len(rest)), rest


def _check_positions(positions: Sequence[int], k: int) -> list[int]:
    pos = [int(p) for p in positions]
    if not pos:
        raise EmptySubset("no qubit positions given")
    if len(set(pos)) != len(pos) or any(not 0 <= p < k for p in pos):
        raise DimensionMismatch(f"positions {pos} invalid for a {k}-qubit state")
    return pos


def _joint_basis(basis, m: int) -> tuple[BasisSet, bool]:
    if isinstance(basis, BasisSet):
        if basis.dim != 2**m:
            raise DimensionMismatch(f"basis of dimension {basis.dim} cannot measure {m} qubits")
        return basis, False
    singles = list(basis)
    if len(singles) != m or any(b.dim != 2 for b in singles):
        raise DimensionMismatch("need exactly one single-qubit basis per measured position")
    vecs = np.array([[1]], dtype=complex)
    for b in singles:
        vecs = np.kron(vecs, b.vectors)
    return BasisSet(vecs), True


def measure_subset(state: StateVec, positions: Sequence[int], basis, rng: np.random.Generator) -> SubsetOutcome:
    """Measure the qubits at ``positions`` and return the post-measurement pieces.

    ``basis`` is either a joint :class:`BasisSet` over the listed positions (in
    the listed order) or a sequence of single-qubit bases, one per position;
    in the second case the outcome is a tuple of per-qubit indices.
    """
    k = state.qubit_count
    pos = _check_positions(positions, k)
    joint, per_qubit = _joint_basis(basis, len(pos))
    mat, rest = _split_axes(state.amps, k, pos)
    conditional = joint.vectors.conj() @ mat
    probs = np.einsum("ij,ij->i", conditional, conditional.conj()).real
    j = _sample(probs, rng)
    p = float(probs[j])
    residual = None
    if rest:
        residual = StateVec.from_amps(conditional[j], normalize=True)
    outcome: int | tuple[int, ...] = j
    if per_qubit:
        outcome = tuple(int(c) for c in format(j, f"0{len(pos)}b"))
    return SubsetOutcome(outcome, joint[j], residual, p)


def apply_unitary(state: StateVec, unitary: np.ndarray, positions: Sequence[int]) -> StateVec:
    """Apply ``unitary`` to the qubits at ``positions`` (listed order = operator order)."""
    k = state.qubit_count
    pos = _check_positions(positions, k)
    u = np.asarray(unitary, dtype=complex)
    if u.shape != (2 ** len(pos),) * 2:
        raise DimensionMismatch(f"operator of shape {u.shape} cannot act on {len(pos)} qubits")
    mat, rest = _split_axes(state.amps, k, pos)
    out = (u @ mat).reshape((2,) * k)
    inverse_order = np.argsort(pos + rest)
    return StateVec(out.transpose(inverse_order).reshape(-1), k)


def reduced_density(state: StateVec, keep: Sequence[int]) -> DensityMatrix:
    """Partial trace over every qubit not in ``keep``; kept qubits follow ``keep``'s order."""
    k = state.qubit_count
    try:
        pos = _check_positions(keep, k)
    except EmptySubset as exc:
        raise DimensionMismatch(str(exc)) from None
    mat, _ = _split_axes(state.amps, k, pos)
    rho = mat @ mat.conj().T
    rho = (rho + rho.conj().T) / 2
    return DensityMatrix(rho, len(pos))


def _as_density(rho) -> DensityMatrix:
    if isinstance(rho, DensityMatrix):
        return rho
    return DensityMatrix.from_matrix(rho)


def von_neumann_entropy(rho) -> float:
    """``-sum(l * log2(l))`` over the eigenvalues, in bits."""
    rho = _as_density(rho)
    evals = np.linalg.eigvalsh(rho.entries)
    evals = evals[evals > 1e-15]
    s = float(-np.sum(evals * np.log2(evals)))
    return min(max(s, 0.0), float(rho.qubit_count))


def holevo_bound(ensemble: Sequence[tuple[float, DensityMatrix]]) -> float:
    """Holevo quantity ``S(sum p rho) - sum p S(rho)`` of an ensemble, in bits."""
    if not ensemble:
        raise ProbabilityNotNormalized("empty ensemble")
    probs = np.array([float(p) for p, _ in ensemble])
    if np.any(probs < 0) or abs(probs.sum() - 1.0) > ATOL:
        raise ProbabilityNotNormalized(f"probabilities sum to {probs.sum()!r}")
    states = [_as_density(r) for _, r in ensemble]
    if len({r.dim for r in states}) != 1:
        raise DimensionMismatch("ensemble members live in different spaces")
    avg = sum(p * r.entries for p, r in zip(probs, states))
    avg = (avg + avg.conj().T) / 2
    chi = von_neumann_entropy(DensityMatrix(avg, states[0].qubit_count)) - sum(
        p * von_neumann_entropy(r) for p, r in zip(probs, states)
    )
    return max(chi, 0.0)


_YY = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]]))


def concurrence(rho) -> float:
    """Wootters concurrence of a two-qubit density matrix."""
    if isinstance(rho, DensityMatrix):
        entries = rho.entries
    else:
        entries = np.asarray(rho, dtype=complex)
    if entries.shape != (4, 4):
        raise WrongDimension(f"concurrence needs a 4x4 matrix, got {entries.shape}")
    rho = _as_density(entries)
    r = rho.entries
    tilde = _YY @ r.conj() @ _YY
    # eigenvalues of rho * tilde equal those of the Hermitian sqrt(rho) tilde sqrt(rho)
    w, v = np.linalg.eigh(r)
    sqrt_rho = (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T
    herm = sqrt_rho @ tilde @ sqrt_rho
    lam = np.sqrt(np.clip(np.linalg.eigvalsh((herm + herm.conj().T) / 2), 0, None))[::-1]
    return float(min(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]), 1.0))


def random_state(k: int, rng: np.random.Generator) -> StateVec:
    """Haar-random pure state from a normalized complex Gaussian vector."""
    z = rng.normal(size=2**k) + 1j * rng.normal(size=2**k)
    return StateVec.from_amps(z, normalize=True)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary: QR of a complex Gaussian matrix with the phase of R fixed."""
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_basis(n: int, rng: np.random.Generator) -> BasisSet:
    """Gram-Schmidt over ``2**n`` random complex vectors."""
    dim = 2**n
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return gram_schmidt(list(z))


def basis_from_dict(doc: dict) -> BasisSet:
    """Build a basis from ``{"n": int, "vectors": [[[re, im], ...], ...], "orthonormal": bool}``.

    Gram-Schmidt is applied unless ``orthonormal`` is true.
    """
    try:
        n = int(doc["n"])
        raw = np.asarray(doc["vectors"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise DimensionMismatch(f"malformed basis document: {exc}") from None
    dim = 2**n
    if raw.shape != (dim, dim, 2):
        raise DimensionMismatch(f"expected {dim} vectors of {dim} [re, im] pairs, got shape {raw.shape}")
    vecs = raw[..., 0] + 1j * raw[..., 1]
    if doc.get("orthonormal", False):
        return BasisSet(vecs)
    return gram_schmidt(list(vecs))


def basis_to_dict(basis: BasisSet) -> dict:
    return {
        "n": basis.n,
        "orthonormal": True,
        "vectors": [[[float(z.real), float(z.imag)] for z in row] for row in basis.vectors],
    }


def load_basis(path: str | Path) -> BasisSet:
    with open(path) as fh:
        return basis_from_dict(json.load(fh))


def matrix_from_pairs(rows) -> np.ndarray:
    """Complex matrix from nested ``[re, im]`` pairs."""
    raw = np.asarray(rows, dtype=float)
    if raw.ndim != 3 or raw.shape[-1] != 2:
        raise DimensionMismatch(f"expected a matrix of [re, im] pairs, got shape {raw.shape}")
    return raw[..., 0] + 1j * raw[..., 1]


def matrix_to_pairs(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def check_unitary_probe(op: np.ndarray) -> np.ndarray:
    op = np.asarray(op, dtype=complex)
    if not is_unitary(op):
        raise NonUnitaryProbe("probe operation is not unitary")
    return op
