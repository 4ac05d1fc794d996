"""Exact dimension counts for line bundles and meromorphic forms.

Everything here is integer or ``Fraction`` arithmetic. The Riemann-Roch table
gives ``gamma(xi)`` from ``(genus, c1)`` and two flags; the genus-0 form spaces
are computed by linear algebra on polynomial coefficients, independently of
the table, so the two routes cross-check.

The classification gate enumerates divisor / conformal-transform
configurations of a branched Willmore sphere with ``|D| <= 3`` and
``W < 16 pi`` and applies the exclusion arguments in a fixed order:
transform consistency, the inversion energy bound, removable multiplicity-one
points, the umbilic case, the smooth energy gap, the odd-multiplicity lemma,
the ``4 pi Z`` parity of total curvature, catenoid ends and the
residue-constrained form count.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import comb, lcm

from .errors import EmptyAnsatz, InconsistentFlags, OutOfScope, UndeterminedDimension
from .meromorphic import INF, is_inf

# ---------------------------------------------------------------------------
# Riemann-Roch table


@dataclass(frozen=True)
class LineBundleSpec:
    """``is_trivial`` / ``is_canonical`` of ``None`` are inferred where the degree forces them."""

    genus: int
    c1: int
    is_trivial: bool | None = None
    is_canonical: bool | None = None

    def resolved(self) -> tuple[bool, bool]:
        g, c = self.genus, self.c1
        if g < 0:
            raise InconsistentFlags("genus must be non-negative")
        triv, can = self.is_trivial, self.is_canonical
        if triv and c != 0:
            raise InconsistentFlags("a trivial bundle has c1 = 0")
        if can and c != 2 * g - 2:
            raise InconsistentFlags("the canonical bundle has c1 = 2g - 2")
        if g == 0:
            # line bundles on the sphere are determined by their degree
            forced_t, forced_c = c == 0, c == -2
            for given, forced, name in ((triv, forced_t, "trivial"), (can, forced_c, "canonical")):
                if given is not None and given != forced:
                    raise InconsistentFlags(f"on genus 0 the {name} flag is fixed by c1 = {c}")
            return forced_t, forced_c
        if g == 1 and c == 0 and triv is not None and can is not None and triv != can:
            raise InconsistentFlags("on genus 1 the canonical bundle is trivial")
        if g == 1 and c == 0:
            t = bool(triv) or bool(can)
            return t, t
        return bool(triv), bool(can)

    def dual(self) -> "LineBundleSpec":
        """``kappa (x) xi^{-1}``: trivial and canonical swap."""
        t, c = self.resolved()
        return LineBundleSpec(self.genus, 2 * self.genus - 2 - self.c1, c, t)


def rr_dimension(spec: LineBundleSpec) -> int:
    g, c = spec.genus, spec.c1
    triv, can = spec.resolved()
    if c < 0:
        return 0
    if c == 0:
        return 1 if triv else 0
    if c == 2 * g - 2:
        return g if can else g - 1
    if c > 2 * g - 2:
        return c - (g - 1)
    raise UndeterminedDimension(f"gamma is not fixed by the table for 0 < c1 = {c} < 2g - 2 = {2 * g - 2}")


def quartic_pole_space_dim(genus: int, d_abs: int) -> int:
    """``gamma(kappa^4 (x) 2D)`` with ``c1 = 8(g - 1) + 2|D|``."""
    if d_abs < 0:
        raise ValueError("|D| must be non-negative")
    c1 = 8 * (genus - 1) + 2 * d_abs
    trivial = genus == 1 and d_abs == 0
    return rr_dimension(LineBundleSpec(genus, c1, trivial if genus > 0 else None, None if genus != 1 else trivial))


# ---------------------------------------------------------------------------
# genus-0 form spaces


def _point(p):
    if is_inf(p) or p == "inf":
        return INF
    if isinstance(p, (int, Fraction)):
        # integral points stay int so products avoid Fraction overhead
        p = Fraction(p)
        return p.numerator if p.denominator == 1 else p
    raise TypeError("points must be int, Fraction or infinity for exact arithmetic")


@dataclass
class FormSpaceSpec:
    pole_bounds: list = field(default_factory=list)
    zero_bounds: list = field(default_factory=list)
    residue_zero_at: list = field(default_factory=list)

    def __post_init__(self):
        self.pole_bounds = [(_point(p), int(k)) for p, k in self.pole_bounds]
        self.zero_bounds = [(_point(p), int(k)) for p, k in self.zero_bounds]
        self.residue_zero_at = [_point(p) for p in self.residue_zero_at]
        pts = [p for p, _ in self.pole_bounds] + [p for p, _ in self.zero_bounds]
        keys = [("inf" if is_inf(p) else p) for p in pts]
        if len(set(keys)) != len(keys):
            raise ValueError("pole and zero points must be distinct")
        if any(k < 1 for _, k in self.pole_bounds + self.zero_bounds):
            raise ValueError("orders must be >= 1")


def _poly_mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _taylor(poly, a, n):
    """First ``n`` Taylor coefficients of ``poly`` (ascending) at ``a``."""
    c = list(poly)
    out = []
    for _ in range(n):
        # synthetic division by (z - a)
        acc, quot = 0, []
        for x in reversed(c):
            acc = acc * a + x
            quot.append(acc)
        out.append(quot[-1])
        c = list(reversed(quot[:-1]))
        if not c:
            c = [0]
    return out


def _monomial_taylor(j, a, k):
    """Coefficient of ``(z - a)**k`` in ``z**j``."""
    return comb(j, k) * a ** (j - k) if j >= k else 0


def _series_inverse(c, n):
    """First ``n`` coefficients of ``1 / sum c_k t^k`` (``c_0 != 0``)."""
    inv = [Fraction(1) / c[0]]
    for k in range(1, n):
        s = sum(c[j] * inv[k - j] for j in range(1, min(k, len(c) - 1) + 1))
        inv.append(Fraction(-s) / c[0])
    return inv


def _integral(row):
    """Row scaled by the lcm of its denominators (rank is unchanged)."""
    d = lcm(*(Fraction(x).denominator for x in row))
    return [int(x * d) for x in row]


def _rank(rows) -> int:
    m = [_integral(r) for r in rows if any(r)]
    rank, col = 0, 0
    ncols = len(m[0]) if m else 0
    while rank < len(m) and col < ncols:
        piv = next((i for i in range(rank, len(m)) if m[i][col] != 0), None)
        if piv is None:
            col += 1
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for i in range(len(m)):
            if i != rank and m[i][col] != 0:
                # fraction-free elimination keeps integer rows integral
                a, b = m[rank][col], m[i][col]
                m[i] = [a * x - b * y for x, y in zip(m[i], m[rank])]
        rank += 1
        col += 1
    return rank


def _ansatz(spec: FormSpaceSpec):
    """Denominator and the numerator degree bound for ``omega = N(z) / den(z) dz``."""
    den = [1]
    a_inf = 0
    for p, k in spec.pole_bounds:
        if is_inf(p):
            a_inf = k
        else:
            for _ in range(k):
                den = _poly_mul(den, [-p, 1])
    b_inf = next((k for p, k in spec.zero_bounds if is_inf(p)), 0)
    # order at infinity of N/den dz is deg(den) - deg(N) - 2
    lower = b_inf if b_inf else -a_inf
    deg_max = len(den) - 1 - 2 - lower
    return den, deg_max


def _constraint_rows(spec: FormSpaceSpec, den, deg_max):
    n = deg_max + 1
    rows = []
    for q, b in spec.zero_bounds:
        if is_inf(q):
            continue
        for k in range(b):
            rows.append([_monomial_taylor(j, q, k) for j in range(n)])
    finite_poles = [(p, k) for p, k in spec.pole_bounds if not is_inf(p)]

    def residue_row(p, k):
        rest = [1]
        for p2, k2 in finite_poles:
            if p2 != p:
                for _ in range(k2):
                    rest = _poly_mul(rest, [-p2, 1])
        inv = _series_inverse(_taylor(rest, p, k), k)
        return [sum(_monomial_taylor(j, p, i) * inv[k - 1 - i] for i in range(k)) for j in range(n)]

    res_rows = {p: residue_row(p, k) for p, k in finite_poles}
    for p in spec.residue_zero_at:
        if is_inf(p):
            # global residue relation
            rows.append([-sum(col) for col in zip(*res_rows.values())] if res_rows else [0] * n)
        elif p in res_rows:
            rows.append(res_rows[p])
    return rows


def constrained_oneform_dim(spec: FormSpaceSpec) -> int:
    """Dimension of the rational 1-forms on the sphere obeying the bounds and residue conditions.

    Raises :class:`EmptyAnsatz` when the pole bounds alone admit no non-zero
    form; otherwise over-constrained systems return 0.
    """
    den, deg_max = _ansatz(FormSpaceSpec(spec.pole_bounds, [], []))
    if deg_max < 0:
        raise EmptyAnsatz("the pole bounds admit only the zero form")
    den, deg_max = _ansatz(spec)
    if deg_max < 0:
        return 0
    rows = _constraint_rows(spec, den, deg_max)
    return deg_max + 1 - _rank(rows)


# ---------------------------------------------------------------------------
# classification gate

CASES = {
    "sphere": "4pi sphere",
    "catenoid": "8pi catenoid",
    "enneper": "12pi Enneper",
    "trinoid": "12pi trinoid",
}

REASONS = {
    "inconsistent-transform": "a transform point of multiplicity n >= 2 must be a branch point of multiplicity n",
    "inversion-bound": "inverting at a branch point of multiplicity m needs W >= 4 pi m",
    "smooth-point": "multiplicity-one branch points off the conformal transform are smooth",
    "umbilic": "on the round sphere every branch point has multiplicity one and is smooth, so D is empty",
    "energy-gap": "smooth Willmore spheres have W = 4 pi or W >= 16 pi",
    "odd-multiplicity": "a single finite-area branch point cannot have even multiplicity",
    "white-parity": "total curvature of the inverted surface must lie in 4 pi Z",
    "catenoid-ends": "both catenoid ends are non-planar, so both lie in D",
    "riemann-roch": "the residue-constrained 1-form space is too small for three independent forms",
    "unclassified": "no case of the classification matches",
}


@dataclass(frozen=True)
class GateVerdict:
    divisor: tuple
    transform: tuple
    energy_quanta: int
    admissible: bool
    case: str | None
    reason: str | None
    total_curvature_quanta: int | None = None  # int K of the inverted surface in units of 2 pi

    def to_json(self) -> dict:
        return {
            "divisor": [list(x) for x in self.divisor],
            "transform": [list(x) for x in self.transform],
            "W_over_4pi": self.energy_quanta,
            "admissible": self.admissible,
            "case": self.case,
            "reason": self.reason,
            "reason_text": REASONS.get(self.reason) if self.reason else None,
            "K_over_2pi": self.total_curvature_quanta,
        }


@dataclass(frozen=True)
class GateReport:
    divisor: tuple
    candidates: tuple

    @property
    def cases(self) -> list[str]:
        return sorted({c.case for c in self.candidates if c.admissible})

    @property
    def admissible(self) -> bool:
        return bool(self.cases)

    @property
    def reasons(self) -> list[str]:
        return sorted({c.reason for c in self.candidates if not c.admissible})

    def to_json(self) -> dict:
        return {
            "divisor": [list(x) for x in self.divisor],
            "cases": [CASES[c] for c in self.cases],
            "labels": [f"{c} admissible" for c in self.cases],
            "candidates": [c.to_json() for c in self.candidates],
        }


def parse_divisor(text: str) -> tuple:
    """``"2p1+p2"`` -> ``(("p1", 2), ("p2", 1))``; ``""`` or ``"0"`` is the empty divisor."""
    text = text.replace(" ", "")
    if text in ("", "0", "empty"):
        return ()
    out = {}
    for term in text.split("+"):
        i = 0
        while i < len(term) and term[i].isdigit():
            i += 1
        m = int(term[:i]) if i else 1
        label = term[i:]
        if not label or m < 1:
            raise ValueError(f"bad divisor term {term!r}")
        out[label] = out.get(label, 0) + m
    return tuple(sorted(out.items()))


def _as_divisor(d) -> tuple:
    if isinstance(d, str):
        return parse_divisor(d)
    d = tuple(d)
    if all(isinstance(x, int) for x in d):
        return tuple((f"p{i + 1}", int(m)) for i, m in enumerate(d) if m > 0)
    return tuple(sorted((str(lbl), int(m)) for lbl, m in d if m > 0))


def _judge(D: dict, T: dict) -> GateVerdict:
    w = sum(T.values())
    div, tr = tuple(sorted(D.items())), tuple(sorted(T.items()))

    def no(reason, kq=None):
        return GateVerdict(div, tr, w, False, None, reason, kq)

    for p, n in T.items():
        m = D.get(p, 0)
        if (n >= 2 and m != n) or (n == 1 and m > 1):
            return no("inconsistent-transform")
    if any(m > w for m in D.values()):
        return no("inversion-bound")
    if any(m == 1 and p not in T for p, m in D.items()):
        return no("smooth-point")
    if w == 1:
        if D:
            return no("umbilic")
        return GateVerdict(div, tr, w, True, "sphere", None, None)
    if not D:
        return no("energy-gap")
    # the inverted surface: ends at the transform, interior branch points elsewhere
    ends = {p: n - 1 for p, n in T.items()}
    interior = {p: m for p, m in D.items() if p not in T}
    chi = 2 - len(ends)
    kq = chi - sum(k + 1 for k in ends.values()) + sum(m - 1 for m in interior.values())
    if len(D) == 1 and next(iter(D.values())) % 2 == 0:
        return no("odd-multiplicity", kq)
    if kq % 2:
        return no("white-parity", kq)
    if interior:
        # interior branching with only simple ends: the ends are planar and the
        # Weierstrass forms must vanish to order m - 1 at the interior points
        if all(k == 0 for k in ends.values()):
            pts = list(range(len(ends) + len(interior)))
            spec = FormSpaceSpec(
                pole_bounds=[(pts[i], 2) for i in range(len(ends))],
                zero_bounds=[(pts[len(ends) + j], m - 1) for j, m in enumerate(interior.values())],
                residue_zero_at=[pts[i] for i in range(len(ends))],
            )
            if constrained_oneform_dim(spec) < 3:
                return no("riemann-roch", kq)
        return no("unclassified", kq)
    if w == 2:
        if set(T) - set(D):
            return no("catenoid-ends", kq)
        return GateVerdict(div, tr, w, True, "catenoid", None, kq)
    if len(T) == 1:
        return GateVerdict(div, tr, w, True, "enneper", None, kq)
    if len(T) == 3:
        return GateVerdict(div, tr, w, True, "trinoid", None, kq)
    return no("white-parity", kq)


def _transforms(D: dict):
    """Every conformal transform compatible with ``D`` and ``W < 16 pi``."""
    labels = sorted(D)
    options = []
    for p in labels:
        m = D[p]
        options.append([None, (p, m)])
    seen = set()
    for choice in product(*options):
        base = dict(c for c in choice if c is not None)
        for extra in range(0, 4):
            T = dict(base)
            for j in range(extra):
                T[f"x{j + 1}"] = 1
            w = sum(T.values())
            if 1 <= w <= 3:
                key = tuple(sorted(T.items()))
                if key not in seen:
                    seen.add(key)
                    yield T


def classification_gate(divisor, conformal_transform=None) -> GateReport:
    """Admissible cases for a branched Willmore sphere with divisor ``D``.

    ``divisor`` is a multiplicity list (``(2, 1)``), labelled pairs or a string
    such as ``"2p1+p2"``. With ``conformal_transform`` given (same formats,
    labels shared with the divisor) only that configuration is judged;
    otherwise every compatible transform with ``W < 16 pi`` is enumerated.
    """
    D = dict(_as_divisor(divisor))
    size = sum(D.values())
    if size > 3:
        raise OutOfScope(f"|D| = {size} > 3")
    if conformal_transform is not None:
        T = dict(_as_divisor(conformal_transform))
        if not 1 <= sum(T.values()) <= 3:
            raise OutOfScope("the conformal transform must have 1 to 3 points (W < 16 pi)")
        cands = (_judge(D, T),)
    else:
        cands = tuple(_judge(D, T) for T in _transforms(D))
    return GateReport(tuple(sorted(D.items())), cands)
