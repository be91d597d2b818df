"""Fixed-point data, the Mehler model kernel, and the local index density.

Conventions fixed here once:

* Indices 1..a are tangent to the fixed-point set, a+1..n normal; the
  normal rotation acts blockwise by angle theta_j on (e_{2j-1}, e_{2j}).
* The curvature bivector is Rdot = sum_{i<j,k<l} R_{ijkl} e^i^e^j (x)
  ehat^k^ehat^l, matching -(1/2)Rdot against the four-index Clifford
  curvature term of the Weitzenboeck formula.
* Quantities carrying a factor pi^{-a/2} (Euler form, transgression,
  index density) are returned in "pi units": the exact coefficient of
  pi^{-a/2}.  Multiply by pi**(-a/2) for the numeric value.
* The Mehler prefactor is (4 pi t)^{-n/2}; the printed positive exponent
  would violate both the model heat equation and the Gaussian
  normalization, and the residual test pins the negative choice.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .clifford import CliffordElement, clifford_multiply, supertrace, symbol_map
from .multivector import (
    BigradeSplit, Multivector, berezin, exp_even, grade_component, wedge,
)

__all__ = [
    "IsometryNormalForm", "CurvatureTensor", "BundleVariationData",
    "phi_tilde", "sigma_phi_top", "equivariant_supertrace",
    "exterior_pushforward", "curvature_bivector", "mehler_kernel",
    "mehler_heat_residual", "fiber_integral", "curvature_form_matrix",
    "pfaffian", "euler_form", "local_index_density", "transgression",
    "hodge_variation_operator", "theta_form",
]


@dataclass(frozen=True)
class IsometryNormalForm:
    """Block normal form of an orientation-preserving isometry germ."""

    n: int
    a: int
    angles: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "angles", tuple(float(t) for t in self.angles))
        if self.n % 2 or self.a % 2 or self.a < 0:
            raise ValueError("n and a must be even and nonnegative")
        if self.a + 2 * len(self.angles) != self.n:
            raise ValueError("a + 2 * len(angles) must equal n")
        for t in self.angles:
            if math.isclose(math.sin(t / 2), 0.0, abs_tol=1e-15):
                raise ValueError(f"degenerate rotation angle {t}")

    @property
    def b(self) -> int:
        return self.n - self.a

    def split(self) -> BigradeSplit:
        return BigradeSplit(self.n, self.a)

    def normal_rotation(self) -> np.ndarray:
        """The b x b block rotation phi^N."""
        blocks = []
        for t in self.angles:
            c, s = math.cos(t), math.sin(t)
            blocks.append(np.array([[c, s], [-s, c]]))
        if not blocks:
            return np.zeros((0, 0))
        out = np.zeros((self.b, self.b))
        for j, blk in enumerate(blocks):
            out[2 * j:2 * j + 2, 2 * j:2 * j + 2] = blk
        return out

    def full_matrix(self) -> np.ndarray:
        out = np.eye(self.n)
        out[self.a:, self.a:] = self.normal_rotation()
        return out

    def det_one_minus_normal(self) -> float:
        """det(1 - phi^N) = prod (2 - 2 cos theta_j); always positive."""
        out = 1.0
        for t in self.angles:
            out *= 2.0 - 2.0 * math.cos(t)
        return out


class CurvatureTensor:
    """Components R_{ijkl} with the full algebraic symmetries.

    Stored on the canonical index set i<j, k<l, (i,j) <= (k,l); lookups
    resolve signs.  Input components that contradict the symmetries raise.
    """

    def __init__(self, n: int, components: dict):
        self.n = n
        canon: dict = {}
        for (i, j, k, l), v in components.items():
            for idx in (i, j, k, l):
                if not 1 <= idx <= n:
                    raise ValueError(f"index {idx} out of range")
            key, sign = self._canonical(i, j, k, l)
            if key is None:
                if v != 0:
                    raise ValueError(f"R[{i}{j}{k}{l}] must vanish by antisymmetry")
                continue
            sv = sign * v
            if key in canon and canon[key] != sv:
                raise ValueError(f"inconsistent components at {key}")
            canon[key] = sv
        self.components = {k: v for k, v in canon.items() if v != 0}

    @staticmethod
    def _canonical(i, j, k, l):
        sign = 1
        if i == j or k == l:
            return None, 0
        if i > j:
            i, j, sign = j, i, -sign
        if k > l:
            k, l, sign = l, k, -sign
        if (i, j) > (k, l):
            i, j, k, l = k, l, i, j
        return (i, j, k, l), sign

    def get(self, i, j, k, l):
        key, sign = self._canonical(i, j, k, l)
        if key is None:
            return 0
        return sign * self.components.get(key, 0)

    def scalar_curvature(self):
        return sum(self.get(i, j, i, j) for i in range(1, self.n + 1)
                   for j in range(1, self.n + 1))

    def tangent_block(self, a: int) -> "CurvatureTensor":
        comp = {k: v for k, v in self.components.items() if max(k) <= a}
        return CurvatureTensor(a, comp)

    def first_bianchi_residuals(self):
        """Cyclic sums R_{ijkl} + R_{iklj} + R_{iljk}; zero iff Bianchi holds."""
        out = {}
        for i, j, k, l in itertools.combinations(range(1, self.n + 1), 4):
            r = self.get(i, j, k, l) + self.get(i, k, l, j) + self.get(i, l, j, k)
            if r != 0:
                out[(i, j, k, l)] = r
        return out


@dataclass
class BundleVariationData:
    """Pointwise samples of the bundle/metric variation data.

    omega[j-1] is the End(F) matrix omega(F,h^F)(e_j); nabla_omega[(i,j)]
    the derivative of omega(e_j) in direction e_i; gdot the symmetric
    matrix (g^TM)^{-1} gdot^TM; V the matrix (h^F)^{-1} hdot^F; sdot a
    map (i,j) -> 1-form sample, antisymmetric in (i,j).
    """

    n: int
    omega: list = field(default_factory=list)
    nabla_omega: dict = field(default_factory=dict)
    phiF: np.ndarray | None = None
    gdot: np.ndarray | None = None
    V: np.ndarray | None = None
    sdot: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.gdot is not None:
            g = np.asarray(self.gdot, dtype=object)
            if g.shape != (self.n, self.n) or not (g == g.T).all():
                raise ValueError("gdot must be a symmetric n x n matrix")
            self.gdot = g


# -- phi-tilde and the equivariant supertrace --------------------------


def _trig_pairs(iso: IsometryNormalForm, trig=None):
    """(cos, sin) per rotation block; exact pairs may be supplied for
    rational-backend cross-checks (e.g. Pythagorean angles)."""
    if trig is not None:
        if len(trig) != len(iso.angles):
            raise ValueError("trig override length mismatch")
        return list(trig)
    return [(math.cos(t), math.sin(t)) for t in iso.angles]


def phi_tilde(iso: IsometryNormalForm, trig=None) -> CliffordElement:
    """Clifford expansion of the lifted isometry (product over rotation blocks)."""
    n = iso.n
    out = CliffordElement.one(n)
    for jblk, (c, s) in enumerate(_trig_pairs(iso, trig)):
        p = iso.a + 2 * jblk + 1   # block indices (p, p+1)
        cp, cq = 1 << (p - 1), 1 << p
        half = Fraction(1, 2) if isinstance(c, (int, Fraction)) else 0.5
        factor = CliffordElement(n, {
            (0, 0): half * (1 + c),
            (cp | cq, cp | cq): -half * (1 - c),
            (cp | cq, 0): half * s,
            (0, cp | cq): -half * s,
        })
        out = clifford_multiply(out, factor)
    return out


def exterior_pushforward(mat: np.ndarray) -> np.ndarray:
    """Induced matrix on the full exterior algebra, basis indexed by subsets.

    Entry [S, T] is the minor det(mat[S, T]); the degree-1 block is mat
    itself.  This is the independent oracle for represent(phi_tilde).
    """
    n = mat.shape[0]
    dim = 1 << n
    out = np.zeros((dim, dim))
    for t_mask in range(dim):
        cols = [i for i in range(n) if t_mask >> i & 1]
        for s_mask in range(dim):
            rows = [i for i in range(n) if s_mask >> i & 1]
            if len(rows) != len(cols):
                continue
            if not rows:
                out[s_mask, t_mask] = 1.0
                continue
            sub = mat[np.ix_(rows, cols)]
            out[s_mask, t_mask] = float(np.linalg.det(sub))
    return out


def _det_one_minus_normal(iso: IsometryNormalForm, trig=None):
    out = 1 if trig is not None else 1.0
    for c, _ in _trig_pairs(iso, trig):
        out *= 2 - 2 * c
    return out


def lambda_pushforward_oracle(iso: IsometryNormalForm) -> np.ndarray:
    """Matrix of the lifted isometry on the exterior algebra, by minors.

    The lift acts by pullback, i.e. by the exterior powers of the inverse
    block rotation; for the orthogonal normal form that inverse is the
    transpose.
    """
    return exterior_pushforward(iso.full_matrix().T)


def sigma_phi_top(iso: IsometryNormalForm, trig=None) -> Multivector:
    """Top normal bigrade of sigma(phi_tilde) in closed form."""
    quarter = Fraction(-1, 4) if trig is not None else -0.25
    coeff = (quarter ** (iso.b // 2)) * _det_one_minus_normal(iso, trig)
    split = iso.split()
    mask = split.normal_mask
    return Multivector(iso.n, {(mask, mask): coeff})


def equivariant_supertrace(iso: IsometryNormalForm, A: CliffordElement,
                           method: str = "matrix", trig=None):
    """Str[phi_tilde * A], by matrix representation or by the bigraded
    decomposition (leading det-term plus lower-normal-grade corrections)."""
    if method == "matrix":
        return supertrace(clifford_multiply(phi_tilde(iso, trig), A), "matrix")
    if method == "decomposition":
        lead, corr = supertrace_decomposition(iso, A, trig)
        return lead + corr
    raise ValueError(f"unknown method {method!r}")


def supertrace_decomposition(iso: IsometryNormalForm, A: CliffordElement,
                             trig=None):
    """(leading term, correction sum) of the bigraded supertrace formula.

    leading = (-1)^{n/2} 2^n (-1/4)^{b/2} det(1-phi^N) |sigma(A)|^{((a,0),(a,0))};
    the correction sums the pairings with lower normal grades of
    sigma(phi_tilde).
    """
    n, a, b = iso.n, iso.a, iso.b
    split = iso.split()
    pref = ((-1) ** (n // 2)) * (1 << n)
    sig_phi = symbol_map(phi_tilde(iso, trig))
    sig_a = symbol_map(A)
    quarter = Fraction(-1, 4) if trig is not None else -0.25
    lead = (pref * (quarter ** (b // 2)) * _det_one_minus_normal(iso, trig)
            * berezin(sig_a, split, "tangent"))
    corr = 0
    for l1 in range(b + 1):
        for l2 in range(b + 1):
            if l1 == b and l2 == b:
                continue
            p = grade_component(sig_phi, split, ((0, l1), (0, l2)))
            q = grade_component(sig_a, split, ((a, b - l1), (a, b - l2)))
            if p.is_zero() or q.is_zero():
                continue
            corr += pref * berezin(wedge(p, q), mode="full")
    return lead, corr


# -- curvature, Mehler kernel, fiber integral ---------------------------


def curvature_bivector(R: CurvatureTensor) -> Multivector:
    """Rdot = (1/4) sum_{ijkl} R_{ijkl} e^i^e^j (x) ehat^k^ehat^l."""
    terms = {}
    for (i, j, k, l), v in R.components.items():
        s = (1 << (i - 1)) | (1 << (j - 1))
        t = (1 << (k - 1)) | (1 << (l - 1))
        terms[(s, t)] = terms.get((s, t), 0) + v
        if (s, t) != (t, s):
            terms[(t, s)] = terms.get((t, s), 0) + v
    # pair-symmetric canonical storage counts (i,j)<=(k,l) once; the loop
    # above restores both orderings, diagonal pairs once.
    return Multivector(R.n, terms)


def mehler_kernel(R: CurvatureTensor, t: float, x, y) -> Multivector:
    """Model heat kernel (4 pi t)^{-n/2} exp(-|x-y|^2/4t) exp(t Rdot / 2)."""
    if t <= 0:
        raise ValueError("t must be positive")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    pref = (4.0 * math.pi * t) ** (-R.n / 2.0)
    pref *= math.exp(-float(np.dot(x - y, x - y)) / (4.0 * t))
    rdot = curvature_bivector(R)
    body = exp_even(rdot.scale(0.5 * t)) if not rdot.is_zero() \
        else Multivector.scalar(R.n, 1.0)
    return body.scale(pref)


def mehler_heat_residual(R: CurvatureTensor, t: float, x, y, dt=1e-5):
    """Max coefficient of (d/dt - Laplacian_y - Rdot/2) applied to the kernel.

    Time derivative by central difference; the spatial Laplacian of the
    Gaussian factor is evaluated in closed form.
    """
    n = R.n
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    kp = mehler_kernel(R, t + dt, x, y)
    km = mehler_kernel(R, t - dt, x, y)
    ddt = (kp - km).scale(1.0 / (2.0 * dt))
    # Laplacian_y of exp(-|x-y|^2/4t) = (|x-y|^2/4t^2 - n/2t) * gaussian
    r2 = float(np.dot(x - y, x - y))
    lap_factor = r2 / (4.0 * t * t) - n / (2.0 * t)
    k0 = mehler_kernel(R, t, x, y)
    lap = k0.scale(lap_factor)
    half_rdot = curvature_bivector(R).scale(0.5)
    half_rdot = Multivector(n, {k: float(v) for k, v in half_rdot.terms.items()})
    resid = ddt - lap - wedge(half_rdot, k0)
    return max((abs(c) for c in resid.terms.values()), default=0.0)


def fiber_integral(R: CurvatureTensor, iso: IsometryNormalForm, t: float,
                   mode: str = "closed-form") -> Multivector:
    """Integral of the Mehler kernel over the normal fiber at a fixed point.

    closed-form: (4 pi t)^{-a/2} det^{-1}(1 - phi^N) exp(t Rdot / 2).
    quadrature: tensor Gauss-Hermite evaluation of the Gaussian factor,
    refined until successive orders differ by < 1e-8.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    det = iso.det_one_minus_normal()
    rdot = curvature_bivector(R)
    body = exp_even(rdot.scale(0.5 * t)) if not rdot.is_zero() \
        else Multivector.scalar(R.n, 1.0)
    if mode == "closed-form":
        pref = (4.0 * math.pi * t) ** (-iso.a / 2.0) / det
        return body.scale(pref)
    if mode == "quadrature":
        from ._kernels import gauss_hermite_gaussian_integral
        one_minus = np.eye(iso.b) - iso.normal_rotation()
        M = one_minus.T @ one_minus
        integral = gauss_hermite_gaussian_integral(M, 4.0 * t)
        pref = (4.0 * math.pi * t) ** (-iso.n / 2.0) * integral
        return body.scale(pref)
    raise ValueError(f"unknown mode {mode!r}")


# -- Pfaffians, Euler form, index density ------------------------------


def curvature_form_matrix(R: CurvatureTensor, a: int):
    """Antisymmetric a x a matrix of tangent curvature 2-forms.

    Entry (i,j) is sum_{k<l<=a} R_{ijkl} e^k ^ e^l, an element of the
    exterior algebra on the tangent indices.
    """
    out = {}
    for i in range(1, a + 1):
        for j in range(i + 1, a + 1):
            terms = {}
            for k in range(1, a + 1):
                for l in range(k + 1, a + 1):
                    v = R.get(i, j, k, l)
                    if v != 0:
                        terms[((1 << (k - 1)) | (1 << (l - 1)), 0)] = v
            out[(i, j)] = Multivector(a, terms)
    return out


def _entry(matrix: dict, i: int, j: int, a: int, zero: Multivector):
    if i == j:
        return zero
    if i < j:
        return matrix.get((i, j), zero)
    return -matrix.get((j, i), zero)


def pfaffian(matrix: dict, a: int) -> Multivector:
    """Pfaffian of an antisymmetric matrix of commuting even forms.

    matrix maps (i,j) with i<j to Multivector entries on a tangent
    indices; implied antisymmetry below the diagonal.
    """
    if a % 2:
        raise ValueError("Pfaffian needs even dimension")
    zero = Multivector.zero(a)
    if a == 0:
        return Multivector.scalar(a, Fraction(1))

    def rec(indices):
        if not indices:
            return Multivector.scalar(a, Fraction(1))
        i0 = indices[0]
        rest = indices[1:]
        total = Multivector.zero(a)
        for pos, j in enumerate(rest):
            e = _entry(matrix, i0, j, a, zero)
            if e.is_zero():
                continue
            sub = rec(tuple(x for x in rest if x != j))
            term = wedge(e, sub)
            if pos & 1:
                term = -term
            total = total + term
        return total

    return rec(tuple(range(1, a + 1)))


def euler_form(R: CurvatureTensor, a: int | None = None):
    """Pf[-R / 2 pi] of the tangent block, in pi units.

    Returns the coefficient of the tangent volume form e^1..e^a, as the
    exact coefficient of pi^{-a/2}.
    """
    if a is None:
        a = R.n
    if a % 2:
        raise ValueError("Euler form needs even dimension")
    if a == 0:
        return Fraction(1)
    mat = curvature_form_matrix(R, a)
    pf = pfaffian(mat, a)
    top = (1 << a) - 1
    scale = Fraction(-1, 2) ** (a // 2)
    return scale * pf.coefficient(top, 0)


def local_index_density(R: CurvatureTensor, iso: IsometryNormalForm):
    """Left side of the index density identity, in pi units.

    (-1)^{n/2} 2^n (-1/4)^{b/2} (4 pi)^{-a/2} |exp(Rdot/2)|^{((a,0),(a,0))},
    returned as the exact coefficient of pi^{-a/2}.
    """
    n, a, b = iso.n, iso.a, iso.b
    rdot = curvature_bivector(R)
    body = exp_even(rdot.scale(Fraction(1, 2))) if not rdot.is_zero() \
        else Multivector.scalar(n, Fraction(1))
    coeff = berezin(body, BigradeSplit(n, a), "tangent")
    pref = Fraction((-1) ** (n // 2) * (1 << n))
    pref *= Fraction(-1, 4) ** (b // 2)
    pref *= Fraction(1, 4) ** (a // 2)
    return pref * coeff


def transgression(R: CurvatureTensor, sdot: dict, a: int) -> Multivector:
    """Directional derivative of Pf[-(R + b Sdot)/2 pi] at b = 0, in pi units.

    sdot maps (i,j), i<j, to form-valued entries (antisymmetric implied);
    computed by multilinear expansion, one marked entry per term.
    """
    if a % 2:
        raise ValueError("transgression needs even tangent dimension")
    base = curvature_form_matrix(R, a)
    zero = Multivector.zero(a)
    sdot_mv = {}
    for (i, j), v in sdot.items():
        if i >= j:
            raise ValueError("sdot keys must have i < j")
        sdot_mv[(i, j)] = v
    if a == 0:
        return Multivector.zero(0)

    def rec(indices, used_marked):
        if not indices:
            if used_marked:
                return Multivector.scalar(a, Fraction(1))
            return Multivector.zero(a)
        i0 = indices[0]
        rest = indices[1:]
        total = Multivector.zero(a)
        for pos, j in enumerate(rest):
            sub_rest = tuple(x for x in rest if x != j)
            sign = -1 if pos & 1 else 1
            e = _entry(base, i0, j, a, zero)
            if not used_marked:
                m = _entry(sdot_mv, i0, j, a, zero)
                if not m.is_zero():
                    term = wedge(m, rec(sub_rest, True))
                    total = total + (term if sign > 0 else -term)
                if not e.is_zero():
                    term = wedge(e, rec(sub_rest, False))
                    total = total + (term if sign > 0 else -term)
            else:
                if not e.is_zero():
                    term = wedge(e, rec(sub_rest, True))
                    total = total + (term if sign > 0 else -term)
        return total

    dpf = rec(tuple(range(1, a + 1)), False)
    return dpf.scale(Fraction(-1, 2) ** (a // 2))


# -- variation operators -----------------------------------------------


def hodge_variation_operator(data: BundleVariationData):
    """The metric-variation endomorphism in Clifford variables and its symbol.

    C = -(1/2) sum_{ij} gdot_{ij} c(e_i) chat(e_j); sigma(C) matches with
    e^i ^ ehat^j in place of the Clifford word.
    """
    n = data.n
    g = data.gdot
    if g is None:
        raise ValueError("gdot required")
    cl_terms = {}
    mv_terms = {}
    for i in range(n):
        for j in range(n):
            v = g[i, j]
            if v == 0:
                continue
            key = (1 << i, 1 << j)
            coeff = Fraction(-1, 2) * v if isinstance(v, (int, Fraction)) else -0.5 * v
            cl_terms[key] = cl_terms.get(key, 0) + coeff
            mv_terms[key] = mv_terms.get(key, 0) + coeff
    return CliffordElement(n, cl_terms), Multivector(n, mv_terms)


def theta_form(data: BundleVariationData):
    """Frame components Tr[phi^F omega(e_j)] of the theta 1-form."""
    phi = data.phiF
    out = []
    for om in data.omega:
        om = np.asarray(om, dtype=object)
        if phi is not None:
            phi_m = np.asarray(phi, dtype=object)
            if phi_m.shape != om.shape:
                raise ValueError("phi^F and omega dimension mismatch")
            prod = np.dot(phi_m, om)
        else:
            prod = om
        out.append(sum(prod[k, k] for k in range(prod.shape[0])))
    return out
