"""Mutation maps on expressions, transition matrices, trajectory matrices
with canonical signs, cluster-variable expansion, and the bounded search
for a seed whose c-matrix is minus a permutation.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from math import comb

from .exact import InternalConsistencyError, Matrix, NotFound
from .laurent import (
    LaurentPoly,
    PointedDecomposition,
    RationalExpr,
    binomial_power,
    divide_binomial,
    exp_scale,
    pointed_decompose,
)
from .seeds import Seed, SimilarityWitness, find_similarities, mutate_b, p_star


@dataclass(frozen=True)
class TransitionMatrix:
    """Monomial part of a single mutation, as an exponent-lattice map from
    the mutated seed back to the source seed."""

    matrix: Matrix
    side: str  # 'N' (X-degrees) or 'M' (A-degrees)
    k: int
    eps: int
    source: Seed
    target: Seed


def trans_matrix(seed: Seed, k: int, eps: int, side: str) -> TransitionMatrix:
    if k not in seed.unfrozen:
        raise ValueError(f"vertex {k} is frozen")
    if eps not in (1, -1):
        raise ValueError("eps must be +1 or -1")
    n = seed.n
    rows = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    if side == "N":
        for j in range(n):
            rows[k][j] = -1 if j == k else max(eps * seed.b[k, j], 0)
    elif side == "M":
        for i in range(n):
            rows[i][k] = -1 if i == k else max(-eps * seed.b[i, k], 0)
    else:
        raise ValueError("side must be 'N' or 'M'")
    return TransitionMatrix(Matrix(rows), side, k, eps, seed, mutate_b(seed, k))


def verify_matrix_identities(seed: Seed, k: int, eps: int, lam: Matrix | None = None) -> dict:
    """Check the transition-matrix identities for one mutation step.

    Returns a name -> bool report; `ok` is the conjunction.
    """
    t2 = mutate_b(seed, k)
    pn = trans_matrix(seed, k, eps, "N").matrix
    pm = trans_matrix(seed, k, eps, "M").matrix
    pn_back = trans_matrix(t2, k, -eps, "N").matrix
    pm_back = trans_matrix(t2, k, -eps, "M").matrix
    ident = Matrix.identity(seed.n)
    dmat = seed.d_inverse_matrix()
    report = {
        "N_involution": pn * pn == ident,
        "N_back_equals_forward": pn_back == pn,
        "M_involution": pm * pm == ident,
        "M_back_equals_forward": pm_back == pm,
        "M_is_N_inverse_transpose_conjugate": dmat * pm * dmat.inverse() == pn.inverse().transpose(),
        "B_conjugation": t2.b == pm * seed.b * pn,
    }
    if lam is not None:
        pm_other = trans_matrix(seed, k, -eps, "M").matrix
        conj = pm.transpose() * lam * pm
        report["Lambda_conjugation_sign_free"] = conj == pm_other.transpose() * lam * pm_other
        report["Lambda_conjugation_skew"] = conj.is_skew_symmetric()
    report["ok"] = all(report.values())
    return report


# -- mutation maps on expressions -------------------------------------------


def _image_exponent_map(seed: Seed, k: int, side: str):
    """Exponent action of the monomial mutation part at the plus sign,
    specialized to the single modified row/column."""
    n = seed.n
    if side == "X":
        row = [max(seed.b[k, j], 0) for j in range(n)]

        def act(exp):
            new_k = -exp[k] + sum(r * x for r, x in zip(row, exp) if r)
            out = list(exp)
            out[k] = new_k
            return tuple(out)

    else:
        col = [max(-seed.b[i, k], 0) for i in range(n)]

        def act(exp):
            ek = exp[k]
            if ek == 0:
                return exp
            out = [x + ek * c if c else x for x, c in zip(exp, col)]
            out[k] = -ek
            return tuple(out)

    return act


def _pullback_poly_factored(poly: LaurentPoly, seed: Seed, k: int, side: str):
    """Image of a polynomial over mu_k(seed) in the fraction field of seed.

    Returns (numerator, power, base) with the value equal to
    numerator / (1 + X^base)^power.
    """
    n = seed.n
    act = _image_exponent_map(seed, k, side)
    if side == "X":
        base_exp = tuple(1 if i == k else 0 for i in range(n))
        brow = seed.b.row(k)

        def binom_pow(exp):
            p = -sum(b * x for b, x in zip(brow, exp) if b)
            if not isinstance(p, int):
                raise ValueError("X-side mutation needs integral unfrozen data")
            return p

    elif side == "A":
        base_exp = p_star(seed, tuple(1 if i == k else 0 for i in range(n)))

        def binom_pow(exp):
            p = exp[k]
            if not isinstance(p, int):
                raise ValueError("unfrozen exponent must be integral")
            return p

    else:
        raise ValueError("side must be 'A' or 'X'")

    if poly.is_zero():
        return LaurentPoly.zero(seed), 0, base_exp
    by_power = {}
    low = None
    for exp, c in poly.terms.items():
        p = binom_pow(exp)
        by_power.setdefault(p, []).append((act(exp), c))
        if low is None or p < low:
            low = p
    shift = min(low, 0)
    out = {}
    for p, terms in by_power.items():
        m = p - shift
        if m == 0:
            for e, c in terms:
                nc = out.get(e, 0) + c
                if nc == 0:
                    out.pop(e, None)
                else:
                    out[e] = nc
            continue
        coeffs = [comb(m, j) for j in range(m + 1)]
        for e, c in terms:
            cur = e
            for j in range(m + 1):
                key = cur if j == 0 else tuple(x + j * y for x, y in zip(e, base_exp))
                nc = out.get(key, 0) + c * coeffs[j]
                if nc == 0:
                    out.pop(key, None)
                else:
                    out[key] = nc
    num = LaurentPoly(seed, out, validate=False)
    return num, -shift, base_exp


def mutate_expr(expr, seed: Seed, k: int, side: str) -> RationalExpr:
    """Pull an expression over mu_k(seed) back to the fraction field of seed.

    Accepts a Laurent polynomial or a rational expression whose ambient
    seed equals mu_k(seed).
    """
    target = mutate_b(seed, k)
    if isinstance(expr, LaurentPoly):
        expr = RationalExpr(expr)
    if expr.seed != target:
        raise ValueError("expression does not live over the mutated seed")
    num, pnum, base_exp = _pullback_poly_factored(expr.num, seed, k, side)
    den, pden, _ = _pullback_poly_factored(expr.den, seed, k, side)
    # balance the binomial powers between numerator and denominator
    if pden > pnum:
        num = num * binomial_power(seed, base_exp, pden - pnum)
    elif pnum > pden:
        den = den * binomial_power(seed, base_exp, pnum - pden)
    # clear shared binomial factors introduced by the step
    while not den.is_monomial():
        qn = divide_binomial(num, base_exp)
        if qn is None:
            break
        qd = divide_binomial(den, base_exp)
        if qd is None:
            break
        num, den = qn, qd
    return RationalExpr(num, den)


def mutate_poly(poly: LaurentPoly, seed: Seed, k: int, side: str) -> LaurentPoly:
    """mutate_expr for inputs whose image must clear to a Laurent polynomial."""
    out = mutate_expr(poly, seed, k, side)
    if not out.is_laurent():
        raise InternalConsistencyError(
            "mutation image failed to be a Laurent polynomial"
        )
    return out.as_poly()


def pullback_sequence(expr, seeds: list, seq, side: str) -> RationalExpr:
    """Pull an expression over the final seed of a trajectory back to its
    initial seed, one mutation at a time."""
    out = expr if isinstance(expr, RationalExpr) else RationalExpr(expr)
    for s in range(len(seq) - 1, -1, -1):
        out = mutate_expr(out, seeds[s], seq[s], side)
    return out


def relabel_expr(expr, seed: Seed) -> RationalExpr:
    """Move an expression to a content-equal seed object."""
    if isinstance(expr, LaurentPoly):
        expr = RationalExpr(expr)
    if expr.seed != seed:
        raise ValueError("relabel target must be content-equal")
    return RationalExpr(
        LaurentPoly(seed, expr.num.terms, validate=False),
        LaurentPoly(seed, expr.den.terms, validate=False),
        normalize=False,
    )


def pushforward_sequence(expr, seeds: list, seq, side: str):
    """Inverse of pullback_sequence, using that single mutations are
    involutive once seeds are identified by content."""
    out = expr if isinstance(expr, RationalExpr) else RationalExpr(expr)
    for s in range(len(seq)):
        # out lives over seeds[s], which is content-equal to
        # mu_{seq[s]}(seeds[s+1]); relabel and pull back to seeds[s+1]
        out = mutate_expr(relabel_expr(out, mutate_b(seeds[s + 1], seq[s])), seeds[s + 1], seq[s], side)
    return out


# -- Hamiltonian / monomial decomposition ------------------------------------


def psi_expr(expr, tm: TransitionMatrix):
    """Monomial substitution along a transition matrix (target -> source)."""
    if isinstance(expr, LaurentPoly):
        expr = RationalExpr(expr)
    if expr.seed != tm.target:
        raise ValueError("expression does not live over the transition's target seed")
    return RationalExpr(
        expr.num.substitute_monomial(tm.matrix, tm.source),
        expr.den.substitute_monomial(tm.matrix, tm.source),
    )


def rho_expr(expr, seed: Seed, k: int, eps: int, side: str, inverse: bool = False):
    """Hamiltonian flow factor of the mutation, via its monomial action.

    ``inverse=True`` applies the inverse automorphism, which acts by the
    same binomial with the opposite exponent sign.
    """
    if isinstance(expr, LaurentPoly):
        expr = RationalExpr(expr)
    if expr.seed != seed:
        raise ValueError("expression does not live over the given seed")
    n = seed.n
    flip = -1 if inverse else 1
    if side == "X":
        base_exp = tuple(eps if i == k else 0 for i in range(n))
        brow = seed.b.row(k)

        def power(exp):
            return -flip * sum(b * x for b, x in zip(brow, exp))

    else:
        base_exp = exp_scale(p_star(seed, tuple(1 if i == k else 0 for i in range(n))), eps)

        def power(exp):
            return -flip * exp[k]

    def act(poly):
        by_power = {}
        low = 0
        for exp, c in poly.terms.items():
            p = power(exp)
            if not isinstance(p, int):
                raise ValueError("flow exponent must be integral")
            by_power.setdefault(p, []).append((exp, c))
            low = min(low, p)
        out = {}
        for p, terms in by_power.items():
            m = p - low
            coeffs = [comb(m, j) for j in range(m + 1)]
            for e, c in terms:
                for j in range(m + 1):
                    key = e if j == 0 else tuple(x + j * y for x, y in zip(e, base_exp))
                    nc = out.get(key, 0) + c * coeffs[j]
                    if nc == 0:
                        out.pop(key, None)
                    else:
                        out[key] = nc
        return LaurentPoly(seed, out, validate=False), -low

    nnum, pn = act(expr.num)
    nden, pd = act(expr.den)
    if pd > pn:
        nnum = nnum * binomial_power(seed, base_exp, pd - pn)
    elif pn > pd:
        nden = nden * binomial_power(seed, base_exp, pn - pd)
    return RationalExpr(nnum, nden)


def hamiltonian_decompose_check(seed: Seed, k: int, eps: int, side: str) -> dict:
    """Check the flow/monomial factorization of a single mutation map on
    all generators of the mutated seed.

    Verifies mu* = rho(t) . psi and equally mu* = psi . (inverse flow of
    the mutated seed at the opposite sign); the flow crosses the monomial
    map as its pullback, whence the inverse.
    """
    target = mutate_b(seed, k)
    tm = trans_matrix(seed, k, eps, "N" if side == "X" else "M")
    report = {}
    ok = True
    for i in range(seed.n):
        gen = LaurentPoly.generator(target, i)
        direct = mutate_expr(gen, seed, k, side)
        composed = rho_expr(psi_expr(gen, tm), seed, k, eps, side)
        swapped = psi_expr(rho_expr(gen, target, k, -eps, side, inverse=True), tm)
        good = direct == composed == swapped
        report[i] = good
        ok = ok and good
    report["ok"] = ok
    return report


# -- trajectories -------------------------------------------------------------


def _sign_coherent(vec):
    has_pos = any(x > 0 for x in vec)
    has_neg = any(x < 0 for x in vec)
    if has_pos and has_neg:
        return None
    return -1 if has_neg else 1


@dataclass
class SeedTrajectory:
    """Seeds along a mutation sequence together with the running degree
    transition matrices computed at canonical signs."""

    initial: Seed
    seq: tuple
    seeds: list
    signs: tuple
    e_matrix: Matrix
    f_matrix: Matrix

    @property
    def final(self) -> Seed:
        return self.seeds[-1]

    @property
    def c_matrix(self) -> Matrix:
        uf = self.initial.unfrozen
        return self.e_matrix.submatrix(uf, uf)

    @property
    def g_matrix(self) -> Matrix:
        uf = self.initial.unfrozen
        return self.f_matrix.submatrix(uf, uf)

    @property
    def e_high(self) -> Matrix:
        return self.e_matrix.submatrix(self.initial.unfrozen, self.initial.frozen)

    @property
    def f_low(self) -> Matrix:
        return self.f_matrix.submatrix(self.initial.frozen, self.initial.unfrozen)


def run_trajectory(t0: Seed, seq) -> SeedTrajectory:
    """Mutate along ``seq`` keeping the degree matrices, with each step's
    sign taken from the sign-coherent c-vector of the current vertex."""
    seq = tuple(seq)
    seeds = [t0]
    e = Matrix.identity(t0.n)
    f = Matrix.identity(t0.n)
    dmat = t0.d_inverse_matrix()
    dinv = t0.d_matrix()
    signs = []
    uf = t0.unfrozen
    pos_of = {i: p for p, i in enumerate(uf)}
    for k in seq:
        if k not in pos_of:
            raise ValueError(f"vertex {k} is frozen")
        cur = seeds[-1]
        cvec = [e[i, k] for i in uf]
        eps = _sign_coherent(cvec)
        if eps is None or all(x == 0 for x in cvec):
            raise InternalConsistencyError(f"c-vector at vertex {k} is not sign-coherent: {cvec}")
        signs.append(eps)
        e = e * trans_matrix(cur, k, eps, "N").matrix
        f = f * trans_matrix(cur, k, eps, "M").matrix
        seeds.append(mutate_b(cur, k))
        if e.transpose() != dmat * f.inverse() * dinv:
            raise InternalConsistencyError("degree matrices lost their duality relation")
        for j in range(t0.n):
            if _sign_coherent(e.col(j)) is None:
                raise InternalConsistencyError(f"column {j} of the X-degree matrix lost sign coherence")
            if _sign_coherent(f.row(j)) is None:
                raise InternalConsistencyError(f"row {j} of the A-degree matrix lost sign coherence")
    return SeedTrajectory(t0, seq, seeds, tuple(signs), e, f)


# -- cluster-variable expansion ----------------------------------------------


@dataclass(frozen=True)
class XRatioForm:
    """Normalized X-side expansion: degree monomial times P/Q with both
    parts having constant term one."""

    degree: tuple
    p_terms: tuple
    q_terms: tuple


@dataclass(frozen=True)
class Expansion:
    expr: RationalExpr
    pointed: PointedDecomposition | None
    ratio: XRatioForm | None
    trajectory: SeedTrajectory


def expand_cluster_variable(t0: Seed, seq, i: int, side: str) -> Expansion:
    """Laurent expansion of the i-th generator of the endpoint of ``seq``
    in the initial seed's variables."""
    traj = run_trajectory(t0, seq)
    gen = LaurentPoly.generator(traj.final, i)
    expr = pullback_sequence(gen, traj.seeds, traj.seq, side)
    if side == "A":
        if not expr.is_laurent():
            raise InternalConsistencyError("A-side expansion is not Laurent")
        dec = pointed_decompose(expr.as_poly(), t0, "A")
        if dec is None:
            raise InternalConsistencyError("A-side expansion is not pointed")
        if list(dec.degree) != list(traj.f_matrix.col(i)):
            raise InternalConsistencyError("pointed degree disagrees with the A-degree matrix")
        return Expansion(expr, dec, None, traj)
    num_dec = pointed_decompose(expr.num, t0, "X")
    den_dec = pointed_decompose(expr.den, t0, "X")
    if num_dec is None or den_dec is None:
        raise InternalConsistencyError("X-side expansion parts are not pointed")
    degree = tuple(a - b for a, b in zip(num_dec.degree, den_dec.degree))
    if list(degree) != list(traj.e_matrix.col(i)):
        raise InternalConsistencyError("X-side degree disagrees with the X-degree matrix")
    ratio = XRatioForm(degree, num_dec.f_terms, den_dec.f_terms)
    return Expansion(expr, None, ratio, traj)


# -- search for a seed with c-matrix equal to minus a permutation -------------


@dataclass(frozen=True)
class T1Witness:
    seq: tuple
    sigma: SimilarityWitness
    c_matrix: Matrix
    trajectory: SeedTrajectory


def _negated_permutation(c: Matrix):
    """If c == -P for a permutation matrix P, return the permutation list
    p with P = permutation_matrix(p); else None."""
    n = c.nrows
    perm = [None] * n
    for j in range(n):
        col = c.col(j)
        nz = [i for i, x in enumerate(col) if x != 0]
        if len(nz) != 1 or col[nz[0]] != -1:
            return None
        perm[j] = nz[0]
    if sorted(perm) != list(range(n)):
        return None
    return perm


def find_t1(t0: Seed, max_depth: int = 12):
    """Breadth-first search for a mutation sequence whose endpoint carries
    c-matrix equal to minus a permutation.  Returns a witness or raises
    ``NotFound`` at the depth limit."""
    uf = t0.unfrozen
    start = run_trajectory(t0, ())
    queue = deque([start])
    seen = {(start.final.b, start.c_matrix)}
    while queue:
        traj = queue.popleft()
        perm = _negated_permutation(traj.c_matrix)
        if perm is not None and traj.seq:
            # c = -P_{sigma^{-1}} in unfrozen positions: col_{sigma k} c = -e_k
            sigma_pairs = []
            for pos, idx in enumerate(uf):
                # position `pos` maps to the position j with perm[j] == pos
                j = perm.index(pos)
                sigma_pairs.append((idx, uf[j]))
            witness = SimilarityWitness(t0, traj.final, tuple(sorted(sigma_pairs)))
            for i, j in witness.pairs:
                if t0.d[i] != t0.d[j]:
                    raise InternalConsistencyError("symmetrizers broken by the candidate permutation")
            if not any(
                w.pairs == witness.pairs for w in find_similarities(t0, traj.final)
            ):
                raise InternalConsistencyError(
                    "endpoint is not similar to the start through the detected permutation"
                )
            return T1Witness(traj.seq, witness, traj.c_matrix, traj)
        if len(traj.seq) >= max_depth:
            continue
        for k in uf:
            nxt = run_trajectory(t0, traj.seq + (k,))
            key = (nxt.final.b, nxt.c_matrix)
            if key in seen:
                continue
            seen.add(key)
            queue.append(nxt)
    raise NotFound(f"no green-to-red endpoint within depth {max_depth}")
