# This file is part of disentanglement
#
# MIT License

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from ._typings import ComplexArray, RealArray


class lowlevel:
    """Raw dense kernels on plain ``ndarray`` operators.

    Nothing here validates physical invariants; callers in ``qmatrix``
    do that and hand only well-formed arrays down.
    """

    def __init__(self, *, cutoff: float = 1e-12) -> None:
        self._cutoff = cutoff

    @property
    def cutoff(self) -> float:
        return self._cutoff

    def eigh(self, m: ComplexArray) -> tuple[RealArray, ComplexArray]:
        w, v = np.linalg.eigh(m)
        return w[::-1].copy(), v[:, ::-1].copy()

    def spectral(
        self,
        m: ComplexArray,
        fn: Callable[[RealArray], RealArray],
        *,
        on_support: bool,
    ) -> ComplexArray:
        w, v = self.eigh(m)
        out = np.zeros_like(w)
        if on_support:
            mask = w > self._cutoff
            out[mask] = fn(w[mask])
        else:
            out = fn(w)
        return (v * out) @ v.conj().T

    def sqrt_psd(self, m: ComplexArray) -> ComplexArray:
        return self.spectral(m, lambda w: np.sqrt(np.clip(w, 0.0, None)), on_support=False)

    def trace_norm(self, m: ComplexArray) -> float:
        return float(np.sum(np.linalg.svd(m, compute_uv=False)))

    def kron(self, *ops: ComplexArray) -> ComplexArray:
        out = np.ones((1, 1), dtype=np.complex128)
        for op in ops:
            out = np.kron(out, op)
        return out

    def ptrace(
        self, op: ComplexArray, dims: Sequence[int], keep: Sequence[int]
    ) -> ComplexArray:
        n = len(dims)
        kept = sorted(keep)
        t = op.reshape(tuple(dims) * 2)
        for i in sorted(set(range(n)) - set(kept), reverse=True):
            t = np.trace(t, axis1=i, axis2=i + n)
            n -= 1
        d = math.prod(dims[k] for k in kept)
        return t.reshape(d, d)

    def ptranspose(
        self, op: ComplexArray, dims: Sequence[int], systems: Sequence[int]
    ) -> ComplexArray:
        n = len(dims)
        t = op.reshape(tuple(dims) * 2)
        for i in systems:
            t = np.swapaxes(t, i, i + n)
        return t.reshape(op.shape)

    def permute(
        self, op: ComplexArray, dims: Sequence[int], order: Sequence[int]
    ) -> ComplexArray:
        """Reorder registers; ``order[j]`` is the old index placed at ``j``."""
        n = len(dims)
        t = op.reshape(tuple(dims) * 2)
        t = t.transpose([*order, *(n + o for o in order)])
        return t.reshape(op.shape)

    def permute_vector(
        self, vec: ComplexArray, dims: Sequence[int], order: Sequence[int]
    ) -> ComplexArray:
        return vec.reshape(tuple(dims)).transpose(list(order)).reshape(-1)

    def log2_frechet(self, sigma: ComplexArray, x: ComplexArray) -> ComplexArray:
        """Directional derivative of ``log2`` at ``sigma`` along ``x``.

        Divided differences in the eigenbasis of ``sigma``; eigenvalues
        are floored at ``cutoff``.
        """
        w, v = self.eigh(sigma)
        w = np.clip(w, self._cutoff, None)
        lw = np.log(w)
        dw = w[:, None] - w[None, :]
        dl = lw[:, None] - lw[None, :]
        same = np.abs(dw) <= self._cutoff * np.maximum(w[:, None], w[None, :])
        kernel = np.where(same, 1.0 / np.maximum(w[:, None], w[None, :]), dl / np.where(same, 1.0, dw))
        xt = v.conj().T @ x @ v
        return (v @ (kernel * xt) @ v.conj().T) / math.log(2.0)
