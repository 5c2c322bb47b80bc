"""Log-canonical Poisson data: the canonical skew form on X-degrees, the
compatible integer forms on A-degrees, their mutation rule, and symbolic
brackets on rational expressions.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm

from .exact import Infeasible, Matrix, integer_solution, solve_affine
from .laurent import LaurentPoly, RationalExpr, exp_add
from .mutation import trans_matrix
from .seeds import Seed, mutate_b


@dataclass(frozen=True)
class OmegaForm:
    """Canonical skew form on X-degrees: W[i][j] = b_ji / d_j."""

    seed: Seed
    w: Matrix

    def pairing(self, n1, n2):
        total = 0
        for i, x in enumerate(n1):
            if x == 0:
                continue
            row = self.w.rows[i]
            total += x * sum(r * y for r, y in zip(row, n2))
        return total


@dataclass(frozen=True)
class LambdaForm:
    """Compatible integer skew form on A-degrees with uniform scaling:
    pairing a degree with an exchange column is -alpha/d_k at the mutated
    vertex and zero elsewhere."""

    seed: Seed
    lam: Matrix
    alpha: int

    @property
    def delta(self) -> tuple:
        return tuple(Fraction(self.alpha, self.seed.d[k]) for k in self.seed.unfrozen)

    def pairing(self, m1, m2):
        total = 0
        for i, x in enumerate(m1):
            if x == 0:
                continue
            row = self.lam.rows[i]
            total += x * sum(r * y for r, y in zip(row, m2))
        return total


def omega_from_seed(seed: Seed) -> OmegaForm:
    w = seed.b.transpose() * seed.d_inverse_matrix()
    if not w.is_skew_symmetric():
        raise ValueError("seed data does not induce a skew form; check the symmetrizers")
    return OmegaForm(seed, w)


def _compatibility_residual(seed: Seed, lam: Matrix, alpha) -> bool:
    prod = lam * seed.b_tilde()
    for i in range(seed.n):
        for pos, k in enumerate(seed.unfrozen):
            want = -Fraction(alpha, seed.d[k]) if i == k else 0
            if prod[i, pos] != want:
                return False
    return True


def solve_compatible_lambda(seed: Seed, alpha: int | None = None, alpha_bound: int = 64):
    """Integer skew form compatible with the seed, plus the family dimension.

    With ``alpha`` unset, scans multiples of lcm(d) over unfrozen indices
    until an integer solution exists.  Raises ``Infeasible`` when the
    exchange columns are rank-deficient or the scan is exhausted.
    """
    n = seed.n
    bt = seed.b_tilde()
    if bt.rank() < seed.partition.n_unfrozen:
        raise Infeasible("no compatible form: exchange columns are rank-deficient")
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    # unknowns: lam[i][j] for i<j; equations: (lam * b_tilde)[i][pos] = rhs
    rows = []
    for i in range(n):
        for pos in range(seed.partition.n_unfrozen):
            row = []
            for (a, b) in pairs:
                coeff = 0
                if a == i:
                    coeff += bt[b, pos]
                if b == i:
                    coeff -= bt[a, pos]
                row.append(coeff)
            rows.append(row)
    coeffs = Matrix(rows).transpose()  # unknown-row times equation-col layout

    def rhs_for(alpha_val):
        vals = []
        for i in range(n):
            for pos, k in enumerate(seed.unfrozen):
                vals.append(-Fraction(alpha_val, seed.d[k]) if i == k else 0)
        return Matrix([vals])

    def assemble(vec):
        m = [[0] * n for _ in range(n)]
        for (a, b), v in zip(pairs, vec):
            m[a][b] = v
            m[b][a] = -v
        return Matrix(m)

    base = 1
    for k in seed.unfrozen:
        base = lcm(base, seed.d[k])
    candidates = [alpha] if alpha is not None else [base * m for m in range(1, alpha_bound + 1)]
    last_family = None
    for alpha_val in candidates:
        try:
            family = solve_affine(coeffs, rhs_for(alpha_val))
        except Infeasible:
            continue
        last_family = family
        member = integer_solution(family.particular, family.nullspace_basis)
        if member is None:
            continue
        lam = assemble(member.rows[0])
        form = LambdaForm(seed, lam, alpha_val)
        assert _compatibility_residual(seed, lam, alpha_val)
        return form, family.dim
    if alpha is None and last_family is not None:
        # scaling any rational solution clears denominators: the pair
        # (c*lam, c*alpha) stays compatible, at the cost of a larger alpha
        family = solve_affine(coeffs, rhs_for(base))
        scale = family.particular.denominator_lcm()
        lam = assemble(family.particular.scale(scale).rows[0])
        form = LambdaForm(seed, lam, base * scale)
        assert _compatibility_residual(seed, lam, base * scale)
        return form, family.dim
    if last_family is not None:
        raise Infeasible("no integer-valued compatible form for the requested alpha")
    raise Infeasible("compatibility equations are inconsistent")


def mutate_lambda(form: LambdaForm, seed: Seed, k: int) -> LambdaForm:
    """Transport a compatible form through one mutation; the two sign
    conventions are computed and asserted equal."""
    if form.seed != seed:
        raise ValueError("form does not belong to the seed being mutated")
    if not _compatibility_residual(seed, form.lam, form.alpha):
        raise ValueError("form is not compatible with the seed")
    target = mutate_b(seed, k)
    out = None
    for eps in (1, -1):
        pm = trans_matrix(seed, k, eps, "M").matrix
        cand = pm.transpose() * form.lam * pm
        if out is None:
            out = cand
        else:
            assert out == cand, "form transport must not depend on the sign"
    new_form = LambdaForm(target, out, form.alpha)
    if not _compatibility_residual(target, out, form.alpha):
        raise ValueError("transported form lost compatibility")
    return new_form


def transport_lambda(form: LambdaForm, seq) -> list:
    """Forms along a mutation sequence, starting with the given one."""
    out = [form]
    seed = form.seed
    for k in seq:
        out.append(mutate_lambda(out[-1], seed, k))
        seed = mutate_b(seed, k)
    return out


def check_lambda_omega_link(form: LambdaForm, seed: Seed) -> dict:
    """Induced form on unfrozen X-degrees vs. the canonical one, and the
    pairing identity between exchange columns and the skew form."""
    omega = omega_from_seed(seed)
    bt = seed.b_tilde()
    uf = seed.unfrozen
    w_uf = omega.w.submatrix(uf, uf)
    induced = bt.transpose() * form.lam * bt
    report = {
        "compatible": _compatibility_residual(seed, form.lam, form.alpha),
        "induced_equals_minus_alpha_omega": induced == w_uf.scale(-form.alpha),
        "pairing_identity": all(
            Fraction(seed.b[j, i], seed.d[j]) == omega.w[i, j]
            for i in range(seed.n)
            for j in range(seed.n)
        ),
    }
    report["ok"] = all(report.values())
    return report


# -- symbolic brackets --------------------------------------------------------


def _partial(poly: LaurentPoly, i: int) -> LaurentPoly:
    out = {}
    for e, c in poly.terms.items():
        if e[i] == 0:
            continue
        ne = list(e)
        ne[i] = e[i] - 1
        key = tuple(ne)
        nc = out.get(key, 0) + c * e[i]
        if nc == 0:
            out.pop(key, None)
        else:
            out[key] = nc
    return LaurentPoly(poly.seed, out, validate=False)


def _partial_expr(expr: RationalExpr, i: int) -> RationalExpr:
    da = _partial(expr.num, i)
    db = _partial(expr.den, i)
    return RationalExpr(da * expr.den - expr.num * db, expr.den * expr.den)


def poisson_bracket(f, g, form) -> RationalExpr:
    """Poisson bracket of two expressions over the form's seed.

    The log-canonical bracket on monomials is extended to fractions as a
    biderivation via formal partial derivatives and the quotient rule.
    """
    if isinstance(form, OmegaForm):
        cmat = -form.w
    elif isinstance(form, LambdaForm):
        cmat = form.lam
    else:
        raise TypeError("form must be an OmegaForm or a LambdaForm")
    seed = form.seed
    if isinstance(f, LaurentPoly):
        f = RationalExpr(f)
    if isinstance(g, LaurentPoly):
        g = RationalExpr(g)
    if f.seed != seed or g.seed != seed:
        raise ValueError("bracket operands must live over the form's seed")

    # monomial fast path reproducing the defining formula exactly
    if f.den.is_one() and g.den.is_one() and f.num.is_monomial() and g.num.is_monomial():
        (e1, c1), (e2, c2) = next(iter(f.num.terms.items())), next(iter(g.num.terms.items()))
        coeff = sum(
            x * sum(r * y for r, y in zip(cmat.rows[i], e2)) for i, x in enumerate(e1) if x != 0
        )
        return RationalExpr(LaurentPoly(seed, {exp_add(e1, e2): c1 * c2 * coeff}, validate=False))

    n = seed.n
    out = RationalExpr(LaurentPoly.zero(seed))
    partials_f = {}
    partials_g = {}

    def pf(i):
        if i not in partials_f:
            partials_f[i] = _partial_expr(f, i)
        return partials_f[i]

    def pg(i):
        if i not in partials_g:
            partials_g[i] = _partial_expr(g, i)
        return partials_g[i]

    for i in range(n):
        for j in range(i + 1, n):
            cij = cmat[i, j]
            if cij == 0:
                continue
            xij = [0] * n
            xij[i] += 1
            xij[j] += 1
            mono = RationalExpr(LaurentPoly.monomial(seed, xij, cij))
            out = out + mono * (pf(i) * pg(j) - pf(j) * pg(i))
    return out
