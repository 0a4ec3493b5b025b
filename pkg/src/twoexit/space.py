"""Finite state spaces, states, predicates, and relations.

A state space is an ordered list of variable declarations over finite
domains; its states are enumerated lexicographically over the declaration
order, and a state is addressed by its index in that enumeration.  A
predicate is a bit-per-state set over that order, so predicate equality is
exact array comparison.  A relation maps every source state to a predicate
over a target space.

All values here are immutable after construction; no operation mutates its
arguments, so everything may be shared freely across threads.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Union

import numpy as np

from ._kernels import rows_exists, rows_forall


class SpaceMismatch(ValueError):
    """An operation mixed values from different state spaces."""


# ---------------------------------------------------------------------------
# Domains
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IntRange:
    """Integers lo..hi inclusive."""

    lo: int
    hi: int

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty int range {self.lo}..{self.hi}")

    @property
    def size(self) -> int:
        return self.hi - self.lo + 1

    def values(self) -> tuple:
        return tuple(range(self.lo, self.hi + 1))

    def contains(self, v) -> bool:
        return isinstance(v, int) and self.lo <= v <= self.hi


@dataclass(frozen=True)
class BoolDomain:
    @property
    def size(self) -> int:
        return 2

    def values(self) -> tuple:
        return (False, True)

    def contains(self, v) -> bool:
        return isinstance(v, bool)


@dataclass(frozen=True)
class ArrayFixed:
    """Fixed-length arrays over an integer element range.

    Values are tuples; enumeration is lexicographic, so the enumeration index
    is the mixed-radix number of the per-position element indices (earliest
    position most significant).
    """

    length: int
    elem: IntRange

    def __post_init__(self):
        if self.length < 0:
            raise ValueError("array length must be >= 0")

    @property
    def size(self) -> int:
        return self.elem.size**self.length

    def values(self) -> tuple:
        return _array_values(self)

    def contains(self, v) -> bool:
        return (
            isinstance(v, tuple)
            and len(v) == self.length
            and all(self.elem.contains(x) for x in v)
        )

    def strides(self) -> tuple:
        """Index weight of each position: strides[p] = elem.size**(length-1-p)."""
        s = self.elem.size
        return tuple(s ** (self.length - 1 - p) for p in range(self.length))


@dataclass(frozen=True)
class BagCapped:
    """Multisets of at most `cap` elements drawn from an integer range.

    Values are canonically sorted tuples; enumeration is by size, then
    lexicographic within each size.
    """

    elem: IntRange
    cap: int

    def __post_init__(self):
        if self.cap < 0:
            raise ValueError("bag cap must be >= 0")

    @property
    def size(self) -> int:
        return len(self.values())

    def values(self) -> tuple:
        return _bag_values(self)

    def contains(self, v) -> bool:
        return (
            isinstance(v, tuple)
            and len(v) <= self.cap
            and tuple(sorted(v)) == v
            and all(self.elem.contains(x) for x in v)
        )


Domain = Union[IntRange, BoolDomain, ArrayFixed, BagCapped]


@lru_cache(maxsize=None)
def _array_values(dom: ArrayFixed) -> tuple:
    return tuple(itertools.product(dom.elem.values(), repeat=dom.length))


@lru_cache(maxsize=None)
def _bag_values(dom: BagCapped) -> tuple:
    out = []
    for k in range(dom.cap + 1):
        out.extend(itertools.combinations_with_replacement(dom.elem.values(), k))
    return tuple(out)


# ---------------------------------------------------------------------------
# State spaces and states
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StateSpace:
    """Ordered variable declarations; the empty declaration list has one state."""

    vars: tuple  # tuple of (name, Domain)

    def __post_init__(self):
        names = [n for n, _ in self.vars]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in state space: {names}")

    @classmethod
    def of(cls, *pairs) -> "StateSpace":
        return cls(tuple(pairs))

    @property
    def names(self) -> tuple:
        return tuple(n for n, _ in self.vars)

    def domain(self, name: str) -> Domain:
        for n, d in self.vars:
            if n == name:
                return d
        raise KeyError(name)

    def has(self, name: str) -> bool:
        return any(n == name for n, _ in self.vars)

    @property
    def n_states(self) -> int:
        n = 1
        for _, d in self.vars:
            n *= d.size
        return n

    def extend(self, name: str, dom: Domain) -> "StateSpace":
        if self.has(name):
            raise ValueError(f"variable {name!r} already declared")
        return StateSpace(self.vars + ((name, dom),))

    def var_stride(self, name: str) -> int:
        return _space_info(self).strides[self.names.index(name)]

    def column(self, name: str) -> np.ndarray:
        """Per-state domain-value index of a variable, over all states."""
        return _space_info(self).columns[name]

    def decode(self, index: int) -> tuple:
        """Domain values of state `index`, in declaration order."""
        info = _space_info(self)
        out = []
        for (name, dom), stride in zip(self.vars, info.strides):
            out.append(dom.values()[(index // stride) % dom.size])
        return tuple(out)

    def state_index(self, **bindings) -> int:
        """Index of the state with the given variable values."""
        if set(bindings) != set(self.names):
            raise KeyError(f"bindings {sorted(bindings)} != variables {sorted(self.names)}")
        idx = 0
        info = _space_info(self)
        for (name, dom), stride in zip(self.vars, info.strides):
            idx += dom.values().index(bindings[name]) * stride
        return idx

    def describe(self) -> str:
        return "{" + ", ".join(f"{n}" for n in self.names) + "}"


class _SpaceInfo:
    __slots__ = ("sizes", "strides", "columns")

    def __init__(self, space: StateSpace):
        sizes = [d.size for _, d in space.vars]
        strides = []
        acc = 1
        for s in reversed(sizes):
            strides.append(acc)
            acc *= s
        strides.reverse()
        self.sizes = tuple(sizes)
        self.strides = tuple(strides)
        idx = np.arange(space.n_states, dtype=np.int64)
        self.columns = {}
        for (name, dom), stride in zip(space.vars, strides):
            col = (idx // stride) % dom.size
            col.flags.writeable = False
            self.columns[name] = col


@lru_cache(maxsize=None)
def _space_info(space: StateSpace) -> _SpaceInfo:
    return _SpaceInfo(space)


@dataclass(frozen=True)
class State:
    space: StateSpace
    index: int

    def __getitem__(self, name: str):
        return self.space.decode(self.index)[self.space.names.index(name)]

    def bindings(self) -> dict:
        vals = self.space.decode(self.index)
        return dict(zip(self.space.names, vals))

    def __repr__(self):
        inner = ", ".join(f"{k}={_show_value(v)}" for k, v in self.bindings().items())
        return f"<{inner}>"


def _show_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        return "[" + ", ".join(str(x) for x in v) + "]"
    return str(v)


def enumerate_states(space: StateSpace) -> list:
    """All states of the space, in the canonical deterministic order."""
    return [State(space, i) for i in range(space.n_states)]


# ---------------------------------------------------------------------------
# Predicates
# ---------------------------------------------------------------------------


class Predicate:
    """A decidable set of states of one space, stored as a boolean mask."""

    __slots__ = ("space", "mask", "_hash")

    def __init__(self, space: StateSpace, mask):
        mask = np.ascontiguousarray(mask, dtype=bool)
        if mask.shape != (space.n_states,):
            raise ValueError(f"mask length {mask.shape} != state count {space.n_states}")
        mask.flags.writeable = False
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "mask", mask)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, *a):
        raise AttributeError("Predicate is immutable")

    @classmethod
    def true(cls, space: StateSpace) -> "Predicate":
        return cls(space, np.ones(space.n_states, dtype=bool))

    @classmethod
    def false(cls, space: StateSpace) -> "Predicate":
        return cls(space, np.zeros(space.n_states, dtype=bool))

    @classmethod
    def from_indices(cls, space: StateSpace, indices) -> "Predicate":
        m = np.zeros(space.n_states, dtype=bool)
        m[list(indices)] = True
        return cls(space, m)

    @classmethod
    def singleton(cls, state: State) -> "Predicate":
        return cls.from_indices(state.space, [state.index])

    def _check(self, other: "Predicate"):
        if self.space != other.space:
            raise SpaceMismatch(
                f"predicates over different spaces: {self.space.describe()} vs "
                f"{other.space.describe()}"
            )

    def __and__(self, other: "Predicate") -> "Predicate":
        self._check(other)
        return Predicate(self.space, self.mask & other.mask)

    def __or__(self, other: "Predicate") -> "Predicate":
        self._check(other)
        return Predicate(self.space, self.mask | other.mask)

    def __invert__(self) -> "Predicate":
        return Predicate(self.space, ~self.mask)

    def implies(self, other: "Predicate") -> "Predicate":
        self._check(other)
        return Predicate(self.space, ~self.mask | other.mask)

    def entails(self, other: "Predicate") -> bool:
        self._check(other)
        return not bool(np.any(self.mask & ~other.mask))

    __le__ = entails

    def __eq__(self, other):
        if not isinstance(other, Predicate):
            return NotImplemented
        return self.space == other.space and bool(np.array_equal(self.mask, other.mask))

    def __hash__(self):
        if self._hash is None:
            object.__setattr__(self, "_hash", hash((self.space, self.mask.tobytes())))
        return self._hash

    @property
    def count(self) -> int:
        return int(np.count_nonzero(self.mask))

    @property
    def is_false(self) -> bool:
        return not bool(np.any(self.mask))

    @property
    def is_true(self) -> bool:
        return bool(np.all(self.mask))

    def holds_at(self, state: State) -> bool:
        if state.space != self.space:
            raise SpaceMismatch("state from a different space")
        return bool(self.mask[state.index])

    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.mask)

    def states(self) -> Iterator[State]:
        for i in self.indices():
            yield State(self.space, int(i))

    def first_state(self):
        idx = self.indices()
        return State(self.space, int(idx[0])) if len(idx) else None

    def __repr__(self):
        if self.is_true:
            return f"Predicate(true over {self.space.describe()})"
        if self.is_false:
            return f"Predicate(false over {self.space.describe()})"
        return f"Predicate({{{', '.join(repr(s) for s in self.states())}}})"


def pred_entails(p: Predicate, q: Predicate) -> bool:
    """True iff every member of p is a member of q (universal implication)."""
    return p.entails(q)


# ---------------------------------------------------------------------------
# Relations
# ---------------------------------------------------------------------------

_FN = "fn"  # int64 target index per source, -1 for empty image
_KFN = "kfn"  # (k, n_src) int64 target indices, -1 for invalid slots
_DENSE = "dense"  # (n_src, n_tgt) bool matrix


class Relation:
    """A mapping from each source state to a predicate over a target space.

    Internally one of three layouts: a partial function (one target index per
    source), a k-function (at most k targets per source), or a dense boolean
    matrix.  The layouts agree observationally; the functional ones exist
    because assignments and projections dominate and reduce to gathers.
    """

    __slots__ = ("src", "tgt", "_kind", "_data")

    def __init__(self, src: StateSpace, tgt: StateSpace, kind: str, data):
        self.src = src
        self.tgt = tgt
        self._kind = kind
        self._data = data
        data.flags.writeable = False

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_fn(cls, src, tgt, idx) -> "Relation":
        idx = np.ascontiguousarray(idx, dtype=np.int64)
        if idx.shape != (src.n_states,):
            raise ValueError("function index length mismatch")
        return cls(src, tgt, _FN, idx)

    @classmethod
    def from_kfn(cls, src, tgt, idx) -> "Relation":
        idx = np.ascontiguousarray(idx, dtype=np.int64)
        if idx.ndim != 2 or idx.shape[1] != src.n_states:
            raise ValueError("k-function index shape mismatch")
        return cls(src, tgt, _KFN, idx)

    @classmethod
    def from_matrix(cls, src, tgt, mat) -> "Relation":
        mat = np.ascontiguousarray(mat, dtype=bool)
        if mat.shape != (src.n_states, tgt.n_states):
            raise ValueError("relation matrix shape mismatch")
        return cls(src, tgt, _DENSE, mat)

    @classmethod
    def from_pairs(cls, src, tgt, pairs) -> "Relation":
        mat = np.zeros((src.n_states, tgt.n_states), dtype=bool)
        for s, t in pairs:
            mat[s, t] = True
        return cls(src, tgt, _DENSE, mat)

    @classmethod
    def identity(cls, space: StateSpace) -> "Relation":
        return cls.from_fn(space, space, np.arange(space.n_states, dtype=np.int64))

    @classmethod
    def bottom(cls, src: StateSpace, tgt: StateSpace) -> "Relation":
        return cls.from_fn(src, tgt, np.full(src.n_states, -1, dtype=np.int64))

    @classmethod
    def top(cls, src: StateSpace, tgt: StateSpace) -> "Relation":
        return cls.from_matrix(src, tgt, np.ones((src.n_states, tgt.n_states), dtype=bool))

    # -- weakest-precondition primitives ------------------------------------

    def wp_all(self, q: np.ndarray) -> np.ndarray:
        """mask[s] = all(q[t] for t in image(s))."""
        if self._kind == _FN:
            idx = self._data
            valid = idx >= 0
            return np.where(valid, q[np.maximum(idx, 0)], True)
        if self._kind == _KFN:
            out = np.ones(self.src.n_states, dtype=bool)
            for row in self._data:
                valid = row >= 0
                out &= np.where(valid, q[np.maximum(row, 0)], True)
            return out
        return rows_forall(self._data, q)

    def wp_any(self, q: np.ndarray) -> np.ndarray:
        """mask[s] = any(q[t] for t in image(s))."""
        if self._kind == _FN:
            idx = self._data
            valid = idx >= 0
            return np.where(valid, q[np.maximum(idx, 0)], False)
        if self._kind == _KFN:
            out = np.zeros(self.src.n_states, dtype=bool)
            for row in self._data:
                valid = row >= 0
                out |= np.where(valid, q[np.maximum(row, 0)], False)
            return out
        return rows_exists(self._data, q)

    # -- structure -----------------------------------------------------------

    def to_matrix(self) -> np.ndarray:
        if self._kind == _DENSE:
            return self._data
        mat = np.zeros((self.src.n_states, self.tgt.n_states), dtype=bool)
        if self._kind == _FN:
            idx = self._data
            valid = idx >= 0
            mat[np.flatnonzero(valid), idx[valid]] = True
        else:
            for row in self._data:
                valid = row >= 0
                mat[np.flatnonzero(valid), row[valid]] = True
        mat.flags.writeable = False
        return mat

    def inverse(self) -> "Relation":
        return Relation.from_matrix(self.tgt, self.src, self.to_matrix().T)

    def image(self, src_index: int) -> Predicate:
        if self._kind == _FN:
            t = int(self._data[src_index])
            return (
                Predicate.from_indices(self.tgt, [t])
                if t >= 0
                else Predicate.false(self.tgt)
            )
        if self._kind == _KFN:
            ts = [int(t) for t in self._data[:, src_index] if t >= 0]
            return Predicate.from_indices(self.tgt, set(ts)) if ts else Predicate.false(self.tgt)
        return Predicate(self.tgt, self._data[src_index])

    def image_sizes(self) -> np.ndarray:
        """Number of distinct targets per source state."""
        if self._kind == _FN:
            return (self._data >= 0).astype(np.int64)
        if self._kind == _DENSE:
            return np.count_nonzero(self._data, axis=1).astype(np.int64)
        return np.count_nonzero(self.to_matrix(), axis=1).astype(np.int64)

    def contains(self, s: int, t: int) -> bool:
        return self.image(s).mask[t]

    def __eq__(self, other):
        if not isinstance(other, Relation):
            return NotImplemented
        return (
            self.src == other.src
            and self.tgt == other.tgt
            and bool(np.array_equal(self.to_matrix(), other.to_matrix()))
        )

    def __hash__(self):
        return hash((self.src, self.tgt, self.to_matrix().tobytes()))

    def __repr__(self):
        return (
            f"Relation({self.src.describe()} <-> {self.tgt.describe()}, "
            f"{self._kind})"
        )


def rel_inverse(r: Relation) -> Relation:
    """sigma in inverse(R).image(delta) iff delta in R.image(sigma)."""
    return r.inverse()
