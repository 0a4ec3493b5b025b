"""Dense-relation inner loops, with optional numba-compiled versions.

The generic weakest-precondition primitives reduce to row quantifiers over a
boolean relation matrix: "all successors satisfy q" and "some successor
satisfies q".  These are the only loops that get hot on large product spaces
(data-refinement projections), so they carry a numba @njit twin next to the
plain numpy implementation.

Backend selection, via the TWOEXIT_NUMBA environment variable:

  unset / "auto"   numpy for small matrices, numba beyond _NUMBA_THRESHOLD
                   elements (JIT cost dominates tiny inputs)
  "0" / "off"      always numpy
  "1" / "on"       always numba

``set_backend`` overrides the choice at runtime (used by the benchmark and by
tests that assert both paths agree).
"""

from __future__ import annotations

import os

import numpy as np

_NUMBA_THRESHOLD = 1 << 14

_mode = os.environ.get("TWOEXIT_NUMBA", "auto").strip().lower()
if _mode in ("", "auto"):
    _mode = "auto"
elif _mode in ("0", "off", "false", "numpy"):
    _mode = "numpy"
elif _mode in ("1", "on", "true", "numba"):
    _mode = "numba"
else:
    raise ValueError(f"unrecognized TWOEXIT_NUMBA value: {_mode!r}")

_numba_fns = None


def set_backend(mode: str) -> None:
    """Force the kernel backend: 'auto', 'numpy', or 'numba'."""
    global _mode
    if mode not in ("auto", "numpy", "numba"):
        raise ValueError(f"unknown backend {mode!r}")
    _mode = mode


def current_backend() -> str:
    return _mode


def _load_numba():
    global _numba_fns
    if _numba_fns is None:
        from numba import njit

        @njit(cache=True)
        def rows_forall_nb(mat, q):  # pragma: no cover - compiled
            ns, nt = mat.shape
            out = np.ones(ns, np.bool_)
            for i in range(ns):
                for j in range(nt):
                    if mat[i, j] and not q[j]:
                        out[i] = False
                        break
            return out

        @njit(cache=True)
        def rows_exists_nb(mat, q):  # pragma: no cover - compiled
            ns, nt = mat.shape
            out = np.zeros(ns, np.bool_)
            for i in range(ns):
                for j in range(nt):
                    if mat[i, j] and q[j]:
                        out[i] = True
                        break
            return out

        _numba_fns = (rows_forall_nb, rows_exists_nb)
    return _numba_fns


def _use_numba(size: int) -> bool:
    if _mode == "numpy":
        return False
    if _mode == "numba":
        return True
    return size >= _NUMBA_THRESHOLD


def rows_forall(mat: np.ndarray, q: np.ndarray) -> np.ndarray:
    """out[i] = all(q[j] for j with mat[i, j])."""
    if _use_numba(mat.size):
        return _load_numba()[0](mat, q)
    return ~np.any(mat & ~q[None, :], axis=1)


def rows_exists(mat: np.ndarray, q: np.ndarray) -> np.ndarray:
    """out[i] = any(q[j] for j with mat[i, j])."""
    if _use_numba(mat.size):
        return _load_numba()[1](mat, q)
    return np.any(mat & q[None, :], axis=1)
