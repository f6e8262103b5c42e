"""Bookkeeping for particles in flight.

The global state is kept as a set of mutually unentangled blocks, each a pure
state over an ordered list of particle ids.  Operations that act jointly on
particles from several blocks merge those blocks first; measurement splits
the result back into its finest product factors.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import DimensionMismatch, LengthMismatch, UnknownParticle
from .qlinalg import (
    DensityMatrix,
    Permutation,
    StateVec,
    _split_axes,
    apply_unitary,
    measure_subset,
    reduced_density,
)

HOLDERS = ("alice", "in_transit", "bob", "eve")
SCHMIDT_TOL = 1e-10
# exhaustive factor search above this block size falls back to contiguous cuts
SPLIT_SEARCH_LIMIT = 12

ParticleId = int


@dataclass
class Block:
    particles: list[ParticleId]
    state: StateVec

    def __post_init__(self):
        if len(set(self.particles)) != len(self.particles):
            raise ValueError(f"duplicate particles in block: {self.particles}")
        if self.state.qubit_count != len(self.particles):
            raise DimensionMismatch(
                f"{len(self.particles)} particles but a {self.state.qubit_count}-qubit state"
            )


@dataclass(frozen=True)
class TransportSequence:
    """Physical send order of a batch of particles."""

    ids: tuple[ParticleId, ...]

    def __post_init__(self):
        ids = tuple(self.ids)
        object.__setattr__(self, "ids", ids)
        if len(set(ids)) != len(ids):
            raise ValueError("transport sequence contains a particle twice")

    def __len__(self) -> int:
        return len(self.ids)

    def __iter__(self) -> Iterator[ParticleId]:
        return iter(self.ids)

    def __getitem__(self, i):
        return self.ids[i]


def permute_transport(seq: TransportSequence | Sequence[ParticleId], perm: Permutation) -> TransportSequence:
    """Reorder a send sequence so that ``output[perm(i)] == input[i]``."""
    ids = tuple(seq)
    if len(perm) != len(ids):
        raise LengthMismatch(f"permutation of length {len(perm)} for a sequence of {len(ids)}")
    out: list[ParticleId] = [0] * len(ids)
    for i, pid in enumerate(ids):
        out[perm(i)] = pid
    return TransportSequence(tuple(out))


def factorize(particles: Sequence[ParticleId], state: StateVec) -> list[Block]:
    """Split a pure state into its finest tensor factors.

    Each factor is the smallest particle subset (containing the first
    remaining particle) whose Schmidt rank against the rest is one.  Blocks
    bigger than ``SPLIT_SEARCH_LIMIT`` only try contiguous cuts; a missed split
    just leaves particles merged.
    """
    particles = list(particles)
    amps = state.amps
    out: list[Block] = []
    while len(particles) > 1:
        k = len(particles)
        if k <= SPLIT_SEARCH_LIMIT:
            candidates = (
                (0,) + combo for size in range(1, k) for combo in combinations(range(1, k), size - 1)
            )
        else:
            candidates = (tuple(range(size)) for size in range(1, k))
        for subset in candidates:
            mat, rest = _split_axes(amps, k, subset)
            u, s, vh = np.linalg.svd(mat, full_matrices=False)
            if len(s) < 2 or s[1] < SCHMIDT_TOL:
                left = u[:, 0]
                right = s[0] * vh[0]
                out.append(Block([particles[i] for i in subset], StateVec.from_amps(left, normalize=True)))
                particles = [particles[i] for i in rest]
                amps = right / np.linalg.norm(right)
                break
        else:
            break
    out.append(Block(particles, StateVec.from_amps(amps, normalize=True)))
    return out


class Ledger:
    """Registry of every particle in a run, its block, and who holds it."""

    def __init__(self):
        self._blocks: dict[int, Block] = {}
        self._block_of: dict[ParticleId, int] = {}
        self.owner: dict[ParticleId, str] = {}
        self._next_particle = 0
        self._next_block = 0

    def __contains__(self, pid: ParticleId) -> bool:
        return pid in self._block_of

    @property
    def blocks(self) -> list[Block]:
        return list(self._blocks.values())

    @property
    def particles(self) -> list[ParticleId]:
        return sorted(self._block_of)

    def _add(self, block: Block) -> None:
        key = self._next_block
        self._next_block += 1
        self._blocks[key] = block
        for pid in block.particles:
            self._block_of[pid] = key

    def _check(self, ids: Iterable[ParticleId]) -> list[ParticleId]:
        ids = list(ids)
        for pid in ids:
            if pid not in self._block_of:
                raise UnknownParticle(pid)
        return ids

    def create_block(self, state: StateVec, holder: str = "alice") -> list[ParticleId]:
        """Register a fresh block; ids are returned in qubit order."""
        ids = list(range(self._next_particle, self._next_particle + state.qubit_count))
        self._next_particle += state.qubit_count
        self._add(Block(ids, state))
        for pid in ids:
            self.owner[pid] = holder
        return ids

    def block_of(self, pid: ParticleId) -> Block:
        self._check([pid])
        return self._blocks[self._block_of[pid]]

    def transfer(self, ids: Iterable[ParticleId], holder: str) -> None:
        if holder not in HOLDERS:
            raise ValueError(f"unknown holder {holder!r}")
        for pid in self._check(ids):
            self.owner[pid] = holder

    def holders(self, ids: Iterable[ParticleId]) -> list[str]:
        return [self.owner[pid] for pid in self._check(ids)]

    def merge(self, ids: Iterable[ParticleId]) -> Block:
        """Tensor together every block touching ``ids`` and return the joint block."""
        ids = self._check(ids)
        keys: list[int] = []
        for pid in ids:
            key = self._block_of[pid]
            if key not in keys:
                keys.append(key)
        if len(keys) == 1:
            return self._blocks[keys[0]]
        particles: list[ParticleId] = []
        amps = np.array([1], dtype=complex)
        for key in keys:
            block = self._blocks.pop(key)
            particles.extend(block.particles)
            amps = np.kron(amps, block.state.amps)
        merged = Block(particles, StateVec(amps, len(particles)))
        self._add(merged)
        return merged

    def apply_unitary(self, ids: Sequence[ParticleId], unitary: np.ndarray) -> None:
        block = self.merge(ids)
        positions = [block.particles.index(pid) for pid in ids]
        block.state = apply_unitary(block.state, unitary, positions)

    def measure_particles(self, ids: Sequence[ParticleId], basis, rng: np.random.Generator):
        """Measure ``ids`` jointly in ``basis`` (or per-qubit bases) and return the outcome.

        The measured particles and the untouched remainder of their blocks are
        re-split into product factors afterwards.
        """
        ids = self._check(ids)
        block = self.merge(ids)
        positions = [block.particles.index(pid) for pid in ids]
        result = measure_subset(block.state, positions, basis, rng)
        del self._blocks[self._block_of[ids[0]]]
        pieces = factorize(ids, result.measured)
        if result.residual is not None:
            rest = [pid for i, pid in enumerate(block.particles) if i not in positions]
            pieces += factorize(rest, result.residual)
        for piece in pieces:
            self._add(piece)
        return result.outcome

    def state_of(self, ids: Sequence[ParticleId]) -> StateVec:
        """Joint pure state of ``ids``, which must be a union of whole blocks."""
        ids = self._check(ids)
        keys = []
        for pid in ids:
            key = self._block_of[pid]
            if key not in keys:
                keys.append(key)
        particles: list[ParticleId] = []
        amps = np.array([1], dtype=complex)
        for key in keys:
            particles.extend(self._blocks[key].particles)
            amps = np.kron(amps, self._blocks[key].state.amps)
        if sorted(particles) != sorted(ids):
            raise DimensionMismatch("requested particles do not form whole blocks; use density_of")
        order = [particles.index(pid) for pid in ids]
        k = len(ids)
        amps = amps.reshape((2,) * k).transpose(order).reshape(-1)
        return StateVec(amps, k)

    def density_of(self, ids: Sequence[ParticleId]) -> DensityMatrix:
        """Reduced state of ``ids`` (in the given order), leaving the ledger untouched."""
        ids = self._check(ids)
        keys = []
        for pid in ids:
            key = self._block_of[pid]
            if key not in keys:
                keys.append(key)
        whole = [pid for key in keys for pid in self._blocks[key].particles]
        return reduced_density(self.state_of(whole), [whole.index(pid) for pid in ids])

    def snapshot(self) -> dict:
        return {
            "blocks": [
                {
                    "particles": list(b.particles),
                    "amps": [[float(z.real), float(z.imag)] for z in b.state.amps],
                }
                for b in self._blocks.values()
            ],
            "owner": {str(pid): self.owner[pid] for pid in sorted(self.owner)},
        }

    def to_json(self) -> str:
        return json.dumps(self.snapshot())
