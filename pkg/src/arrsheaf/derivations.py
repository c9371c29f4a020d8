"""Graded pieces of logarithmic derivation modules and freeness certification.

A derivation of degree d is written on the basis dx_1 ... dx_ell with
homogeneous degree-d polynomial coefficients (so the Euler derivation has
degree 1; the exponents of the free catalog arrangements are 1, 2, ..., ell
under this convention).  The defining condition "theta(alpha) is divisible by
alpha for every member form alpha" is imposed degreewise: theta(alpha) is
reduced modulo alpha by eliminating the pivot variable of alpha (its first
nonzero coordinate) and all coefficients of the reduction must vanish.  The
degree-d piece is the exact kernel of those stacked linear constraints.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .arrangement import Arrangement, ArrangementError, members_of
from .linalg import (
    ColumnSpace,
    ExactMatrix,
    RowReducer,
    sparse_kernel_basis,
    sparse_rank,
)
from .monomials import (
    basis,
    dim_poly,
    mono_mul,
    monomial_tuples,
    poly_from_linear,
    poly_mul,
    poly_product,
)


class FunctorError(RuntimeError):
    """An exact inclusion/restriction failed to hold; indicates a bug."""


def reduced_row_tuples(ell: int, degree: int, pivot: int) -> tuple:
    """Monomials of the given degree with zero exponent at the pivot variable."""
    out = []
    for m in monomial_tuples(ell - 1, degree):
        out.append(m[:pivot] + (0,) + m[pivot:])
    return tuple(out)


class DerivationEngine:
    """Per-arrangement cache of constraint matrices, ranks and kernel bases.

    All cached values are immutable once stored and keys are value-like
    tuples, so concurrent lookups/insertions of distinct keys are safe.
    """

    def __init__(self, arr: Arrangement):
        self.arr = arr
        self.field = arr.field
        self.ell = arr.ell
        self._subst: dict[int, dict] = {}       # h -> {monomial: reduction dict}
        self._pivot: dict[int, int] = {}
        self._columns: dict = {}
        self._rows: dict = {}
        self._rank: dict = {}
        self._basis: dict = {}
        for h in range(arr.size):
            normal = arr.normal(h)
            self._pivot[h] = next(i for i, c in enumerate(normal) if c != 0)
            self._subst[h] = {}

    # -- reduction of a monomial modulo one defining form --------------------

    def _substitution_form(self, h: int) -> dict:
        normal = self.arr.normal(h)
        p = self._pivot[h]
        f = self.field
        inv = f.div(f.one, normal[p])
        out = {}
        for j, c in enumerate(normal):
            if j != p and c != 0:
                e = [0] * self.ell
                e[j] = 1
                out[tuple(e)] = f.neg(f.mul(inv, c))
        return out

    def reduce_monomial(self, h: int, m: tuple) -> dict:
        """m mod alpha_h as {pivot-free monomial: scalar}."""
        memo = self._subst[h]
        hit = memo.get(m)
        if hit is not None:
            return hit
        p = self._pivot[h]
        if m[p] == 0:
            memo[m] = {m: self.field.one}
            return memo[m]
        lower = list(m)
        lower[p] -= 1
        partial = self.reduce_monomial(h, tuple(lower))
        form = self._substitution_form(h)
        out: dict = {}
        f = self.field
        for mono, c in partial.items():
            for lin, cl in form.items():
                key = mono_mul(mono, lin)
                w = f.add(out.get(key, f.zero), f.mul(c, cl))
                if w == 0:
                    out.pop(key, None)
                else:
                    out[key] = w
        memo[m] = out
        return out

    # -- stacked constraint matrix -------------------------------------------

    def row_layout(self, members: tuple[int, ...], d: int) -> dict:
        """Row indexing of the target space: one block per member form."""
        block = dim_poly(self.ell - 1, d)
        layout = {"block_dim": block, "offsets": {}, "row_index": {}}
        for pos, h in enumerate(members):
            layout["offsets"][h] = pos * block
            tuples = reduced_row_tuples(self.ell, d, self._pivot[h])
            layout["row_index"][h] = {m: i for i, m in enumerate(tuples)}
        layout["total"] = block * len(members)
        return layout

    def constraint_columns(self, members: tuple[int, ...], d: int):
        """Columns of the stacked constraint map S_d^ell -> sum_h S_d/(alpha_h).

        Column (i, m) collects, for every member h with nonzero i-th normal
        coefficient, that coefficient times the reduction of m mod alpha_h.
        """
        key = (members, d)
        hit = self._columns.get(key)
        if hit is not None:
            return hit
        f = self.field
        mono = basis(self.ell, d)
        layout = self.row_layout(members, d)
        cols = []
        for i in range(self.ell):
            for m in mono.tuples:
                col: dict = {}
                for h in members:
                    a = self.arr.normal(h)[i]
                    if a == 0:
                        continue
                    off = layout["offsets"][h]
                    idx = layout["row_index"][h]
                    for mono_red, c in self.reduce_monomial(h, m).items():
                        r = off + idx[mono_red]
                        w = f.add(col.get(r, f.zero), f.mul(a, c))
                        if w == 0:
                            col.pop(r, None)
                        else:
                            col[r] = w
                cols.append(col)
        result = (cols, layout)
        self._columns[key] = result
        return result

    def constraint_rows(self, members: tuple[int, ...], d: int) -> list[dict]:
        key = (members, d)
        hit = self._rows.get(key)
        if hit is not None:
            return hit
        cols, layout = self.constraint_columns(members, d)
        rows: list[dict] = [dict() for _ in range(layout["total"])]
        for j, col in enumerate(cols):
            for r, v in col.items():
                rows[r][j] = v
        self._rows[key] = rows
        return rows

    def constraint_rank(self, members: tuple[int, ...], d: int) -> int:
        key = (members, d)
        hit = self._rank.get(key)
        if hit is None:
            hit = sparse_rank(self.field, self.constraint_rows(members, d))
            self._rank[key] = hit
        return hit

    # -- the graded pieces -----------------------------------------------------

    def ambient_dim(self, d: int) -> int:
        return self.ell * dim_poly(self.ell, d)

    def space_dim(self, members: tuple[int, ...], d: int) -> int:
        if d < 0:
            return 0
        if not members:
            return self.ambient_dim(d)
        return self.ambient_dim(d) - self.constraint_rank(members, d)

    def space_basis(self, members: tuple[int, ...], d: int) -> list[dict]:
        """Deterministic kernel basis; columns are sparse (coord, monomial)
        dicts, scaled to primitive integer vectors over the rationals."""
        if d < 0:
            return []
        key = (members, d)
        hit = self._basis.get(key)
        if hit is not None:
            return hit
        if not members:
            vecs = [{j: self.field.one} for j in range(self.ambient_dim(d))]
        else:
            vecs = sparse_kernel_basis(
                self.field, self.constraint_rows(members, d), self.ambient_dim(d)
            )
            if self.field.kind == "rationals":
                vecs = [_primitive_integer_vector(v) for v in vecs]
        self._basis[key] = vecs
        return vecs


def _primitive_integer_vector(vec: dict) -> dict:
    """Scale a rational vector to coprime integers (same span, faster math)."""
    from math import gcd, lcm

    denom = 1
    for v in vec.values():
        if isinstance(v, Fraction):
            denom = lcm(denom, v.denominator)
    scaled = {j: int(v * denom) for j, v in vec.items()}
    g = 0
    for v in scaled.values():
        g = gcd(g, v)
    if g > 1:
        scaled = {j: v // g for j, v in scaled.items()}
    return scaled


_engines: dict[Arrangement, DerivationEngine] = {}


def engine_for(arr: Arrangement) -> DerivationEngine:
    eng = _engines.get(arr)
    if eng is None:
        eng = DerivationEngine(arr)
        _engines[arr] = eng
    return eng


@dataclass(frozen=True)
class DerivationSpace:
    """Basis of the degree-d piece of the derivation module of a localization."""

    members: tuple[int, ...]
    degree: int
    ell: int
    vectors: tuple

    @property
    def dim(self) -> int:
        return len(self.vectors)

    def as_matrix(self, field) -> ExactMatrix:
        ambient = self.ell * dim_poly(self.ell, self.degree)
        rows = []
        for i in range(ambient):
            rows.append(tuple(v.get(i, field.zero) for v in self.vectors))
        return ExactMatrix(field, ambient, len(self.vectors), tuple(rows))


def derivation_space(arr: Arrangement, flat, d: int) -> DerivationSpace:
    """Basis of {theta : theta(alpha_h) in (alpha_h) for h in the flat}_d.

    ``flat`` is a lattice element or a member index iterable; the bottom
    flat (no members) yields the full space S_d^ell of vector fields.
    """
    eng = engine_for(arr)
    members = members_of(flat)
    return DerivationSpace(
        members, d, arr.ell, tuple(eng.space_basis(members, d))
    )


def vector_to_polys(vec: dict, ell: int, d: int) -> list[dict]:
    """Split a flat (coord, monomial) vector into ell coefficient polynomials."""
    mono = basis(ell, d)
    n = len(mono)
    polys: list[dict] = [dict() for _ in range(ell)]
    for j, c in vec.items():
        polys[j // n][mono.tuples[j % n]] = c
    return polys


def euler_vector(arr: Arrangement, d: int = 1) -> dict:
    """The Euler derivation sum x_i d/dx_i as a degree-1 vector."""
    if d != 1:
        raise ValueError("the Euler derivation has degree 1")
    mono = basis(arr.ell, 1)
    out = {}
    for i in range(arr.ell):
        e = [0] * arr.ell
        e[i] = 1
        out[i * len(mono) + mono.index[tuple(e)]] = arr.field.one
    return out


def multiply_vector(arr: Arrangement, vec: dict, poly: dict, d_from: int) -> dict:
    """Multiply a degree-d_from derivation vector by a polynomial."""
    ell = arr.ell
    f = arr.field
    src = basis(ell, d_from)
    deg = max(sum(m) for m in poly) if poly else 0
    dst = basis(ell, d_from + deg)
    out: dict = {}
    for j, c in vec.items():
        i, m = j // len(src), src.tuples[j % len(src)]
        for mp, cp in poly.items():
            key = i * len(dst) + dst.index[mono_mul(m, mp)]
            w = f.add(out.get(key, f.zero), f.mul(c, cp))
            if w == 0:
                out.pop(key, None)
            else:
                out[key] = w
    return out


# ---------------------------------------------------------------------------
# restriction maps


def inclusion_matrix(arr: Arrangement, flat_small, flat_large, d: int) -> ExactMatrix:
    """Coordinates of D(A_Y)_d inside D(A_X)_d for flats Y inside X.

    Arguments are lattice elements or member index sets (A_Y and A_X); the
    precondition Y inside X means A_X is a subset of A_Y.  The result has
    full column rank; an inconsistent solve would mean the inclusion fails
    and is raised as FunctorError.
    """
    small = members_of(flat_small)
    large = members_of(flat_large)
    if not set(large) <= set(small):
        raise FunctorError(
            "inclusion requires the target localization to be a subset"
        )
    eng = engine_for(arr)
    b_small = eng.space_basis(small, d)
    b_large = eng.space_basis(large, d)
    space = ColumnSpace(arr.field, b_large, eng.ambient_dim(d))
    f = arr.field
    coords = []
    for v in b_small:
        c = space.coordinates(v)
        if c is None:
            raise FunctorError("derivation inclusion failed; constraint bug")
        coords.append(c)
    rows = []
    for i in range(len(b_large)):
        rows.append(tuple(c.get(i, f.zero) for c in coords))
    return ExactMatrix(f, len(b_large), len(b_small), tuple(rows))


# ---------------------------------------------------------------------------
# Saito determinant criterion


def saito_check(arr: Arrangement, candidates) -> bool:
    """Determinant criterion: the ell candidate derivations form a basis
    iff det of their coefficient matrix is a nonzero scalar times the product
    of all defining forms.  Both sides are expanded exactly as sparse
    polynomials, so the comparison is interpolation-free and exact.

    ``candidates`` is a list of (degree, vector) pairs.
    """
    ell = arr.ell
    f = arr.field
    if len(candidates) != ell:
        raise ArrangementError(f"need exactly {ell} candidate derivations")
    degrees = [d for d, _ in candidates]
    if sum(degrees) != arr.size:
        raise ArrangementError(
            f"degree sum {sum(degrees)} != number of hyperplanes {arr.size}"
        )
    entries = []
    for d, vec in candidates:
        entries.append(vector_to_polys(vec, ell, d))
    det: dict = {}
    for perm in itertools.permutations(range(ell)):
        sign = 1
        seen = list(perm)
        for i in range(len(seen)):
            for j in range(i + 1, len(seen)):
                if seen[i] > seen[j]:
                    sign = -sign
        term = {(0,) * ell: f.one}
        for col, row in enumerate(perm):
            term = poly_mul(f, term, entries[col][row])
            if not term:
                break
        for m, c in term.items():
            w = f.add(det.get(m, f.zero), f.mul(f.from_int(sign), c))
            if w == 0:
                det.pop(m, None)
            else:
                det[m] = w
    if not det:
        return False
    q = poly_product(
        f, (poly_from_linear(arr.normal(h), ell) for h in range(arr.size)), ell
    )
    lead = min(q)
    if lead not in det:
        return False
    c = f.div(det[lead], q[lead])
    if c == 0:
        return False
    scaled = {m: f.mul(c, v) for m, v in q.items()}
    return scaled == det


# ---------------------------------------------------------------------------
# minimal generators and the freeness certificate


_gens_cache: dict = {}
_cert_cache: dict = {}


def minimal_generators(arr: Arrangement, up_to_degree: int) -> list[tuple[int, dict]]:
    """Homogeneous generators of the derivation module up to the given degree.

    At each degree d the image of S_1 times the (d-1)-piece is spanned by
    multiplying every basis vector by every variable; basis vectors of the
    d-piece that enlarge that span are new generators.
    """
    if up_to_degree < 0:
        raise ValueError("scan bound must be nonnegative")
    hit = _gens_cache.get((arr, up_to_degree))
    if hit is not None:
        return hit
    eng = engine_for(arr)
    all_members = tuple(range(arr.size))
    ell = arr.ell
    f = arr.field
    gens: list[tuple[int, dict]] = []
    for d in range(0, up_to_degree + 1):
        cur = eng.space_basis(all_members, d)
        if not cur:
            continue
        red = RowReducer(f)
        if d > 0:
            prev = eng.space_basis(all_members, d - 1)
            for v in prev:
                for i in range(ell):
                    e = [0] * ell
                    e[i] = 1
                    shifted = multiply_vector(arr, v, {tuple(e): f.one}, d - 1)
                    red.add_row(shifted)
        for v in cur:
            if red.add_row(v):
                gens.append((d, v))
    _gens_cache[(arr, up_to_degree)] = gens
    return gens


@dataclass(frozen=True)
class FreenessCertificate:
    status: str                      # "free" | "not-free" | "undetermined"
    exponents: tuple[int, ...] = ()
    witness_degrees: tuple[int, ...] = ()
    scanned_bound: int = 0
    detail: str = ""

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "exponents": list(self.exponents),
            "witness_degrees": list(self.witness_degrees),
            "scanned_bound": self.scanned_bound,
            "detail": self.detail,
        }


def freeness_certificate(arr: Arrangement) -> FreenessCertificate:
    """Scan for minimal generators up to degree |A| and apply the determinant
    criterion when exactly ell generators with degree sum |A| are found."""
    hit = _cert_cache.get(arr)
    if hit is not None:
        return hit
    bound = arr.size
    gens = minimal_generators(arr, bound)
    degrees = tuple(sorted(d for d, _ in gens))
    ell = arr.ell
    if len(degrees) == ell and sum(degrees) == arr.size:
        ordered = sorted(gens, key=lambda g: g[0])
        if saito_check(arr, ordered):
            cert = FreenessCertificate(
                "free", exponents=degrees, scanned_bound=bound,
                detail="determinant criterion certified the generator basis",
            )
        else:
            cert = FreenessCertificate(
                "not-free", witness_degrees=degrees, scanned_bound=bound,
                detail="minimal generators match the free profile but fail "
                       "the determinant criterion",
            )
    elif len(degrees) > ell and sum(degrees) > arr.size:
        cert = FreenessCertificate(
            "not-free", witness_degrees=degrees, scanned_bound=bound,
            detail=f"{len(degrees)} minimal generators by degree {bound}",
        )
    else:
        cert = FreenessCertificate(
            "undetermined", witness_degrees=degrees, scanned_bound=bound,
            detail="generator scan inconclusive up to the bound",
        )
    _cert_cache[arr] = cert
    return cert


def free_module_dims(exponents, ell: int, d: int) -> int:
    """Hilbert function of a free graded module with the given exponents."""
    return sum(dim_poly(ell, d - e) for e in exponents)
