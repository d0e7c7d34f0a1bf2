"""Nystrom discretizations of Fredholm determinants and Fredholm Pfaffians on [0, inf)."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import DomainError
from .quad import QuadratureRule
from .skewlin import pfaffian, standard_j


@dataclass(frozen=True)
class Kernel2x2:
    """A 2x2 matrix kernel K(l1, l2) with K(l1, l2)^T = -K(l2, l1).

    ``eval`` returns one block. ``grid``, if given, maps a node vector x to
    the four n x n arrays (K11, K12, K21, K22) at all node pairs and is used
    for fast assembly. ``tag`` is 'analytic' or 'sgn_block' (a 1/2 sgn entry).
    """
    eval: Callable[[float, float], np.ndarray]
    tag: str = "analytic"
    grid: Callable[[np.ndarray], tuple] | None = None

    def blocks(self, x: np.ndarray):
        if self.grid is not None:
            return self.grid(x)
        n = len(x)
        out = [np.empty((n, n), complex) for _ in range(4)]
        for i in range(n):
            for j in range(n):
                b = self.eval(x[i], x[j])
                out[0][i, j], out[1][i, j], out[2][i, j], out[3][i, j] = b[0, 0], b[0, 1], b[1, 0], b[1, 1]
        return tuple(out)

    def skew_residual(self, pairs) -> float:
        worst = 0.0
        for a, b in pairs:
            worst = max(worst, float(np.max(np.abs(self.eval(a, b) + self.eval(b, a).T))))
        return worst


def nystrom_det(kernel, rule: QuadratureRule) -> complex:
    """det(I - W^(1/2) K W^(1/2)) for a scalar kernel K(x, y) vectorized over arrays."""
    x = rule.nodes.real
    sw = np.sqrt(rule.weights.real)
    K = kernel(x[:, None], x[None, :])
    A = np.eye(len(x)) - sw[:, None] * K * sw[None, :]
    return complex(np.linalg.det(A))


def assemble(kernel: Kernel2x2, rule: QuadratureRule) -> np.ndarray:
    """Interleaved 2n x 2n matrix M[(i,a),(j,b)] = sqrt(w_i w_j) K_ab(x_i, x_j), skew by construction."""
    x = rule.nodes.real
    w = rule.weights.real
    if np.any(w <= 0):
        raise DomainError("Nystrom assembly needs positive weights")
    sw = np.sqrt(np.outer(w, w))
    K11, K12, K21, K22 = kernel.blocks(x)
    n = len(x)
    M = np.empty((2 * n, 2 * n), complex)
    M[0::2, 0::2] = K11 * sw
    M[0::2, 1::2] = K12 * sw
    M[1::2, 0::2] = K21 * sw
    M[1::2, 1::2] = K22 * sw
    M = 0.5 * (M - M.T)
    return M


def nystrom_pf(kernel: Kernel2x2, rule: QuadratureRule, debug: bool = False) -> complex:
    """pf(J - M) with M from ``assemble`` and J the block-diagonal standard form."""
    M = assemble(kernel, rule)
    n = M.shape[0] // 2
    J = standard_j(n)
    val = pfaffian(J - M)
    if debug:
        d = np.linalg.det(np.eye(2 * n) + J @ M)
        if abs(val * val - d) > 1e-9 * max(1.0, abs(d)):
            raise AssertionError(f"pf^2 = {val * val} but det = {d}")
    return val


def pf_series(kernel: Kernel2x2, rule: QuadratureRule, kmax: int = 4) -> complex:
    """Fredholm Pfaffian expansion sum_{k<=kmax} (-1)^k/k! int pf[K(l_a, l_b)] dl, tensor rule."""
    x = rule.nodes.real
    w = rule.weights.real
    n = len(x)
    if n ** kmax > 2e6:
        raise DomainError("tensor expansion too large")
    K11, K12, K21, K22 = kernel.blocks(x)
    total = 1.0 + 0j
    for k in range(1, kmax + 1):
        acc = 0j
        for idx in itertools.product(range(n), repeat=k):
            M = np.empty((2 * k, 2 * k), complex)
            for a, i in enumerate(idx):
                for b, j in enumerate(idx):
                    M[2 * a, 2 * b] = K11[i, j]
                    M[2 * a, 2 * b + 1] = K12[i, j]
                    M[2 * a + 1, 2 * b] = K21[i, j]
                    M[2 * a + 1, 2 * b + 1] = K22[i, j]
            acc += np.prod(w[list(idx)]) * pfaffian(0.5 * (M - M.T))
        total += (-1) ** k / math.factorial(k) * acc
    return total


def pf_sgn_rank2(K11S: np.ndarray, g: np.ndarray, w: np.ndarray) -> complex:
    """Square of pf[J - K] for kernels with K22 = 1/2 sgn(l2 - l1) and K12(l1, l2) = g(l1).

    K11S is the discretized composition K11 S (S the sgn kernel) at the nodes,
    already integrated in its inner variable; the outer weights are w. Then
    pf[J - K]^2 = det(I + K11 S) (1 - <1, (I + K11 S)^{-1} g>)^2.
    """
    n = len(w)
    T = np.eye(n) + K11S * w[None, :]
    r = np.linalg.solve(T, g)
    return complex(np.linalg.det(T) * (1.0 - w @ r) ** 2)


def pf_expansion_terms(kernel: Kernel2x2, rule: QuadratureRule, kmax: int = 4) -> np.ndarray:
    """Terms k = 0..kmax of the Fredholm Pfaffian expansion on the discretization.

    pf(J - z M) is a polynomial of degree n in z whose k-th coefficient is the
    k-th expansion term; it is recovered exactly by a DFT over n + 1 roots of unity.
    """
    M = assemble(kernel, rule)
    n = M.shape[0] // 2
    J = standard_j(n)
    z = np.exp(2j * np.pi * np.arange(n + 1) / (n + 1))
    vals = np.array([pfaffian(J - zz * M) for zz in z])
    coef = np.fft.fft(vals) / (n + 1)
    return coef[: kmax + 1]
