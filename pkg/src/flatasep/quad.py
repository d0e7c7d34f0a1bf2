"""Quadrature rules and scalar special functions (Airy, log-Gamma)."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import DomainError


@dataclass(frozen=True)
class QuadratureRule:
    kind: str
    nodes: np.ndarray
    weights: np.ndarray
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.nodes)

    def integrate(self, f):
        return np.sum(self.weights * f(self.nodes))


def circle_rule(N: int = 128, radius: float = 1.0) -> QuadratureRule:
    """Trapezoid rule for a contour integral over |y| = radius.

    Nodes sit at angles (j + 1/2) 2pi/N, so none lands on +-1 and the set is
    closed under y -> -y and (for radius 1) y -> 1/y. Weights include dy, so
    ``integrate_circle`` returns the plain contour integral.
    """
    if N % 2 or N < 8:
        raise DomainError("circle rule needs an even N >= 8")
    th = (np.arange(N) + 0.5) * 2.0 * np.pi / N
    y = radius * np.exp(1j * th)
    w = 1j * y * (2.0 * np.pi / N)
    return QuadratureRule("circle_pv", y, w, {"N": N, "radius": radius})


def integrate_circle(f, rule: QuadratureRule) -> complex:
    return complex(np.sum(rule.weights * f(rule.nodes)))


def pv_circle_oracle(g, pole_coef, N: int = 256, shrink: float = 0.5) -> complex:
    """PV of the contour integral of pole_coef(y) g(y) / (y^2 - 1) over |y| = 1.

    Used only as a test oracle: integral over a circle of radius ``shrink`` plus
    half the residues at y = +-1 (the Cauchy decomposition of a PV integral).
    """
    r = circle_rule(N, shrink)
    inner = integrate_circle(lambda y: pole_coef(y) * g(y) / (y * y - 1.0), r)
    res = 0j
    for s in (1.0, -1.0):
        res += pole_coef(s) * g(s) / (2.0 * s)
    return inner + 0.5 * 2j * np.pi * res


def halfline_rule(n_nodes: int = 48, lam: float = 40.0) -> QuadratureRule:
    """Gauss-Legendre mapped affinely onto [0, lam]."""
    if n_nodes < 4 or lam <= 0:
        raise DomainError("halfline rule needs n >= 4 and lam > 0")
    x, w = np.polynomial.legendre.leggauss(n_nodes)
    return QuadratureRule("halfline_gl", (x + 1.0) * lam / 2.0, w * lam / 2.0,
                          {"n": n_nodes, "cutoff": lam})


def graded_rule(per_panel: int = 8, edges=(0, 2, 6, 15, 35, 80, 180, 400), scale: float = 1.0) -> QuadratureRule:
    """Composite Gauss-Legendre on panels that widen geometrically."""
    x, w = np.polynomial.legendre.leggauss(per_panel)
    e = np.asarray(edges, dtype=float) * scale
    xs, ws = [], []
    for a, b in zip(e[:-1], e[1:]):
        xs.append((x + 1.0) * (b - a) / 2.0 + a)
        ws.append(w * (b - a) / 2.0)
    return QuadratureRule("halfline_gl", np.concatenate(xs), np.concatenate(ws),
                          {"per_panel": per_panel, "cutoff": float(e[-1])})


def vline_rule(c: float, S: float, n: int, b: float | None = None, midpoint: bool = False) -> QuadratureRule:
    """Trapezoid on the segment [c - iS, c + iS] of a vertical line.

    Weights include ds = i du. With ``midpoint`` the nodes are (j + 1/2)h - S,
    symmetric about u = 0 and avoiding it (for principal values at s = c).
    If a Gaussian damping rate b is given, meta['tail'] holds sqrt(pi/b) erfc(S sqrt(b)).
    """
    if n < 8:
        raise DomainError("vline rule needs n >= 8")
    if midpoint:
        h = 2.0 * S / n
        u = (np.arange(n) + 0.5) * h - S
        wu = np.full(n, h)
    else:
        u = np.linspace(-S, S, n)
        h = u[1] - u[0]
        wu = np.full(n, h)
        wu[0] = wu[-1] = h / 2.0
    meta = {"c": c, "S": S, "n": n}
    if b is not None:
        meta["tail"] = math.sqrt(math.pi / b) * math.erfc(S * math.sqrt(b))
    return QuadratureRule("vline_gauss", c + 1j * u, 1j * wu, meta)


# ---------------------------------------------------------------- log-Gamma

_LANCZOS_G = 7
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _lgamma_right(z: complex) -> complex:
    z = z - 1.0
    x = _LANCZOS[0]
    for i in range(1, _LANCZOS_G + 2):
        x += _LANCZOS[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * cmath.log(t) - t + cmath.log(x)


def gamma_ln(z) -> complex:
    """Log-Gamma for complex z off the poles, with reflection for Re z < 1/2.

    For Re z > 1/2 this is the principal branch. On the reflected side the
    imaginary part may differ from the principal branch by a multiple of 2*pi,
    which exp() does not see.
    """
    z = complex(z)
    if z.imag == 0.0 and z.real <= 0.0 and z.real == math.floor(z.real):
        raise DomainError(f"Gamma has a pole at {z.real}")
    if z.real < 0.5:
        return cmath.log(math.pi) - cmath.log(cmath.sin(math.pi * z)) - gamma_ln(1.0 - z)
    # shift upward so the Lanczos sum is evaluated where it is most accurate
    shift = 0j
    while z.real < 8.0:
        shift += cmath.log(z)
        z += 1.0
    return _lgamma_right(z) - shift


def gamma_ln_vec(z) -> np.ndarray:
    """Vectorized gamma_ln on an array (same Lanczos sum, shift and reflection)."""
    z = np.asarray(z, dtype=complex)
    if np.any((z.imag == 0.0) & (z.real <= 0.0) & (z.real == np.floor(z.real))):
        raise DomainError("Gamma has a pole in the argument array")
    refl = z.real < 0.5
    w = np.where(refl, 1.0 - z, z)
    shift = np.zeros(w.shape, complex)
    for _ in range(9):
        low = w.real < 8.0
        if not np.any(low):
            break
        shift = np.where(low, shift + np.log(np.where(low, w, 1.0)), shift)
        w = np.where(low, w + 1.0, w)
    v = w - 1.0
    x = np.full(w.shape, _LANCZOS[0], dtype=complex)
    for i in range(1, _LANCZOS_G + 2):
        x = x + _LANCZOS[i] / (v + i)
    t = v + _LANCZOS_G + 0.5
    out = _HALF_LOG_2PI + (v + 0.5) * np.log(t) - t + np.log(x) - shift
    return np.where(refl, math.log(math.pi) - np.log(np.sin(math.pi * z)) - out, out)


def gamma_c(z) -> complex:
    return cmath.exp(gamma_ln(z))


def gamma_ratio_sgn(m1: int, m2: int, eta: float = 1e-6) -> float:
    """Gamma-ratio expression whose eta -> 0 limit is (-1)^min(m1,m2) sgn(m2 - m1)."""
    num = gamma_ln(0.5 * (m1 - m2) + eta) + gamma_ln(0.5 * (m2 - m1) + eta)
    den = gamma_ln(0.5 * (m1 + m2) + eta) + gamma_ln(-0.5 * (m1 + m2) + eta)
    val = cmath.exp(num - den) * (m2 - m1 + 2 * eta) / (m1 + m2 + 2 * eta)
    return val.real


# ---------------------------------------------------------------- Airy

_AI0 = 0.355028053887817239260063186004  # 3^(-2/3)/Gamma(2/3)
_AIP0 = -0.258819403792806798405183560189  # -3^(-1/3)/Gamma(1/3)


def _airy_maclaurin(x: float):
    # Ai = c1 f - c2 g with f, g the two standard power series
    f = 1.0
    # f = sum x^{3k}/prod (3j-1)(3j), g = sum x^{3k+1}/prod (3j)(3j+1)
    g = x
    fp = 0.0
    gp = 1.0
    tf = 1.0
    tg = x
    x3 = x * x * x
    k = 0
    while True:
        k += 1
        tf *= x3 / ((3 * k - 1) * (3 * k))
        tg *= x3 / ((3 * k) * (3 * k + 1))
        f += tf
        g += tg
        fp += 3 * k * tf / x if x != 0 else 0.0
        gp += (3 * k + 1) * tg / x if x != 0 else 0.0
        if abs(tf) + abs(tg) < 1e-18 * (abs(f) + abs(g)) and k > 3:
            break
        if k > 400:
            break
    ai = _AI0 * f + _AIP0 * g
    aip = _AI0 * fp + _AIP0 * gp
    return ai, aip


def _airy_contour(x: float):
    # Ai(x) = 1/(2 pi i) int_{c + iR} exp(u^3/3 - u x) du on the line Re u = c > 0;
    # |integrand| = exp(c^3/3 - c x - c v^2), Gaussian in v.
    c = max(math.sqrt(x), 1.0)
    V = math.sqrt(40.0 / c)
    h = min(0.5 / math.sqrt(c), 0.05)
    n = int(2 * V / h) + 1
    v = np.linspace(-V, V, n)
    dv = v[1] - v[0]
    u = c + 1j * v
    # subtract the real log-magnitude at the saddle to avoid overflow
    base = c ** 3 / 3.0 - c * x
    e = np.exp(u ** 3 / 3.0 - u * x - base)
    scale = math.exp(base) / (2.0 * math.pi)
    ai = scale * np.sum(e).real * dv
    aip = scale * np.sum(-u * e).real * dv
    return ai, aip


def _airy_asym_neg(x: float):
    # oscillatory expansion for x -> -inf
    z = -x
    zeta = 2.0 / 3.0 * z ** 1.5
    u = [1.0]
    v = [1.0]
    for k in range(1, 40):
        uk = u[-1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216 * k)
        u.append(uk)
        v.append(-uk * (6 * k + 1) / (6 * k - 1))
    P = Q = Pp = Qp = 0.0
    last = math.inf
    for k in range(0, 40, 1):
        term_u = u[k] / zeta ** k
        term_v = v[k] / zeta ** k
        if abs(term_u) > last:
            break
        last = abs(term_u)
        s = (-1) ** (k // 2)
        if k % 2 == 0:
            P += s * term_u
            Pp += s * term_v
        else:
            Q += s * term_u
            Qp += s * term_v
    th = zeta + math.pi / 4.0
    ai = (math.sin(th) * P - math.cos(th) * Q) / (math.sqrt(math.pi) * z ** 0.25)
    aip = -z ** 0.25 / math.sqrt(math.pi) * (math.cos(th) * Pp + math.sin(th) * Qp)
    return ai, aip


def airy(x: float):
    """(Ai(x), Ai'(x)) for real x in [-30, 30]."""
    x = float(x)
    if not -30.0 <= x <= 30.0:
        raise DomainError("airy supports x in [-30, 30]")
    if x >= 0.0:
        return _airy_contour(x)
    if x > -7.0:
        return _airy_maclaurin(x)
    return _airy_asym_neg(x)


def airy_vec(xs):
    xs = np.asarray(xs, dtype=float)
    ai = np.empty(xs.shape)
    aip = np.empty(xs.shape)
    for i, x in np.ndenumerate(xs):
        ai[i], aip[i] = airy(x)
    return ai, aip
