"""Maximum-entropy labellings under linear atomic constraints, plus the
conjunctive / exclusive-DNF / conditional queries they support.

The optimizer is a conditional-gradient (Frank-Wolfe) loop: the lp module is
the linear-minimization oracle over one shared feasible region, the line
search is bisection on the one-dimensional concave restriction, and weight is
transferred pairwise between active atoms to tame zigzagging across faces.
An active-set Newton polish on the dual closes the endgame; its candidates
count only when the oracle certifies their optimality gap. Coordinates whose
entailment interval is a point are fixed up front and dropped from the
optimization, which keeps the entropy gradient bounded on the free block.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Union

import numpy as np

from . import lp
from .constraints import ConstraintSet, LinearAtomicConstraint
from .errors import (ConditionInconsistentError, LimitExceededError,
                     SolverError, StructuralError, UnsatisfiableError)
from .model import (BAF, And, ArgLike, Atom, Formula, Labelling, Not, Or,
                    _as_argument, entropy_labelling, formula_atoms)

GAP_TOL = 1e-8
MAX_ITER = 10_000
FIX_TOL = 1e-9
GRAD_CLAMP = 1e-12
DNF_LIMIT = 20


@dataclass(frozen=True)
class ConjunctiveQuery:
    """Conjunction of literals: (name, True) is the argument, (name, False) its negation."""

    literals: tuple[tuple[str, bool], ...]

    @classmethod
    def of(cls, literals: Union[Mapping[ArgLike, bool], Iterable[tuple[ArgLike, bool]]]) -> "ConjunctiveQuery":
        pairs = literals.items() if hasattr(literals, "items") else literals
        seen: dict[str, bool] = {}
        for a, polarity in pairs:
            name = _as_argument(a).name
            if name in seen:
                raise StructuralError(f"argument {name!r} appears twice in a conjunctive query")
            seen[name] = bool(polarity)
        return cls(tuple(sorted(seen.items())))

    @classmethod
    def positive(cls, args: Iterable[ArgLike]) -> "ConjunctiveQuery":
        return cls.of([(a, True) for a in args])

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.literals)

    def all_positive(self) -> bool:
        return all(b for _, b in self.literals)

    def to_formula(self) -> Formula:
        parts = [Atom(n) if b else Not(Atom(n)) for n, b in self.literals]
        return And(*parts)

    def __str__(self):
        if not self.literals:
            return "<empty>"
        return " & ".join(n if b else "!" + n for n, b in self.literals)


@dataclass
class MaxEntResult:
    labelling: Labelling
    entropy: float
    iterations: int
    gap: float
    converged: bool


# -- conditional-gradient machinery -----------------------------------------


def _make_gradient(kind: str):
    if kind == "binary":
        def grad(v):
            vc = np.clip(v, GRAD_CLAMP, 1.0 - GRAD_CLAMP)
            return np.log((1.0 - vc) / vc)
    elif kind == "shannon":
        def grad(v):
            vc = np.clip(v, GRAD_CLAMP, None)
            return -(1.0 + np.log(vc))
    else:
        raise StructuralError(f"unknown objective kind {kind!r}")
    return grad


def _line_search_max(x, d, tmax, grad_fn, iters: int = 100) -> float:
    """Argmax of the concave restriction t -> f(x + t d) on [0, tmax]."""
    def dphi(t):
        return float(d @ grad_fn(x + t * d))

    if tmax <= 0.0:
        return 0.0
    if dphi(tmax) >= 0.0:
        return tmax
    if dphi(0.0) <= 0.0:
        return 0.0
    lo_t, hi_t = 0.0, tmax
    for _ in range(iters):
        mid = 0.5 * (lo_t + hi_t)
        if dphi(mid) > 0.0:
            lo_t = mid
        else:
            hi_t = mid
        if hi_t - lo_t <= 1e-16 * max(1.0, tmax):
            break
    return 0.5 * (lo_t + hi_t)


_ACT_TOL_LADDER = (1e-9, 1e-6, 1e-4, 1e-2, 5e-2)


def _dual_newton_polish(A, b, x, lower, upper, kind: str, act_tol: float) -> Optional[np.ndarray]:
    """Solve the entropy maximization restricted to the rows active at x.

    On the active set the optimizer has a closed form through the dual: for
    the labelling entropy x_i = sigmoid(-(A^T lam)_i), for the world entropy
    x_i = exp(-1 - (A^T lam)_i). Newton iterations on the dual residual give
    machine-precision solutions in a handful of steps. Returns the candidate
    point or None; the caller must still certify it (feasibility plus
    linearized gap), since the active set was only guessed from x.
    """
    def vet(xc):
        if np.any(xc < lower - 1e-12) or np.any(xc > upper + 1e-12):
            return None
        if A.shape[0] and np.any(A @ xc > b + 1e-9):
            return None
        return np.clip(xc, lower, upper)

    if A.shape[0]:
        act = A @ x >= b - act_tol * (1.0 + np.abs(b))
        A_act, b_act = A[act], b[act]
    else:
        A_act, b_act = A, b
    k = A_act.shape[0]
    if k == 0:
        return vet(np.full_like(x, 0.5)) if kind == "binary" else None

    lam = np.zeros(k)

    def primal(l):
        z = A_act.T @ l
        if kind == "binary":
            z = np.clip(z, -500.0, 500.0)
            return 1.0 / (1.0 + np.exp(z))
        return np.exp(np.clip(-1.0 - z, -500.0, 500.0))

    for _ in range(60):
        xc = primal(lam)
        F = A_act @ xc - b_act
        err = float(np.abs(F).max())
        if err <= 1e-12:
            break
        w = xc * (1.0 - xc) if kind == "binary" else xc
        J = -(A_act * w) @ A_act.T
        try:
            step = np.linalg.lstsq(J, -F, rcond=None)[0]
        except np.linalg.LinAlgError:
            return None
        # damped update: keep the residual from blowing up
        scale = 1.0
        for _ in range(30):
            trial = lam + scale * step
            Ft = A_act @ primal(trial) - b_act
            if float(np.abs(Ft).max()) < err:
                lam = trial
                break
            scale *= 0.5
        else:
            return None
    else:
        return None
    return vet(primal(lam))


def _conditional_gradient_maximize(state: lp.SimplexState, A, b, lower, upper, grad_fn,
                                   init_atoms, gap_tol: float, max_iter: int, kind: str):
    """Maximize a concave function over {x : rows hold, lower <= x <= upper}.

    The iterate is kept as a convex combination of feasible atoms. Each round
    asks the LP oracle for the best vertex under the linearized objective and
    then transfers weight onto it from the worst active atom (pairwise step),
    falling back to a plain step toward the vertex. The pairwise transfer is
    what stops the iterate from zigzagging across a face it has already
    identified; when the optimum is interior to a high-dimensional face even
    that crawls, so an active-set Newton polish runs periodically and its
    candidate is accepted only when the oracle certifies its gap. Returns
    (x, gap, iterations, converged).
    """
    store: dict[bytes, list] = {}
    w0 = 1.0 / len(init_atoms)
    for v in init_atoms:
        key = v.tobytes()
        if key in store:
            store[key][1] += w0
        else:
            store[key] = [v, w0]
    x = np.zeros_like(init_atoms[0])
    for v, w in store.values():
        x += w * v

    def fw_step(s, skey, g):
        nonlocal x, store
        d = s - x
        t = _line_search_max(x, d, 1.0, grad_fn)
        if t >= 1.0 - 1e-15:
            store = {skey: [s, 1.0]}
            x = s.copy()
        elif t > 0.0:
            for entry in store.values():
                entry[1] *= (1.0 - t)
            if skey in store:
                store[skey][1] += t
            else:
                store[skey] = [s, t]
            x = x + t * d

    def certified_gap(cand):
        g = grad_fn(cand)
        sol = state.minimize(-g)
        if sol.status != lp.OPTIMAL:
            raise SolverError(f"linear-minimization oracle returned {sol.status!r}")
        return float(g @ (np.clip(sol.x, lower, upper) - cand))

    def try_polish(cur):
        # active-set identification is a guess, so walk a tolerance ladder;
        # every candidate is vetted by feasibility and the oracle certificate
        seen = set()
        for tol in _ACT_TOL_LADDER:
            if A.shape[0]:
                mask = (A @ cur >= b - tol * (1.0 + np.abs(b))).tobytes()
                if mask in seen:
                    continue
                seen.add(mask)
            cand = _dual_newton_polish(A, b, cur, lower, upper, kind, tol)
            if cand is None:
                continue
            cand_gap = certified_gap(cand)
            if cand_gap <= gap_tol:
                return cand, max(cand_gap, 0.0)
        return None, None

    gap = math.inf
    for k in range(max_iter):
        g = grad_fn(x)
        sol = state.minimize(-g)
        if sol.status != lp.OPTIMAL:
            raise SolverError(f"linear-minimization oracle returned {sol.status!r}")
        s = np.clip(sol.x, lower, upper)
        gap = float(g @ (s - x))
        if gap <= gap_tol:
            return x, max(gap, 0.0), k, True

        if k % 10 == 0:
            cand, cand_gap = try_polish(x)
            if cand is not None:
                return cand, cand_gap, k + 1, True

        away_key = None
        away_score = math.inf
        for key, (v, _) in store.items():
            sc = float(g @ v)
            if sc < away_score:
                away_score, away_key = sc, key
        skey = s.tobytes()

        if skey != away_key:
            a_vec, a_w = store[away_key]
            d = s - a_vec
            t = _line_search_max(x, d, a_w, grad_fn)
            if t > 0.0:
                store[away_key][1] = a_w - t
                if store[away_key][1] <= 1e-14:
                    del store[away_key]
                if skey in store:
                    store[skey][1] += t
                else:
                    store[skey] = [s, t]
                x = x + t * d
            else:
                fw_step(s, skey, g)
        else:
            fw_step(s, skey, g)

        if (k + 1) % 128 == 0:
            # rebuild x from the combination to damp float drift
            total = sum(entry[1] for entry in store.values())
            x = np.zeros_like(x)
            for entry in store.values():
                entry[1] /= total
                x += entry[1] * entry[0]

    cand, cand_gap = try_polish(x)
    if cand is not None:
        return cand, cand_gap, max_iter, True
    return x, gap, max_iter, False


def _coordinate_ranges(A, b, lower, upper):
    """Per-coordinate min/max over the polytope plus the optimal vertices."""
    n = lower.size
    objectives = []
    for i in range(n):
        c = np.zeros(n)
        c[i] = 1.0
        objectives.append((c, "min"))
        objectives.append((c, "max"))
    sols = lp.solve_many(A, b, lower, upper, objectives)
    lows = np.empty(n)
    highs = np.empty(n)
    vertices = []
    for i in range(n):
        lo_sol, hi_sol = sols[2 * i], sols[2 * i + 1]
        if lo_sol.status == lp.INFEASIBLE or hi_sol.status == lp.INFEASIBLE:
            raise UnsatisfiableError("constraint polytope is empty")
        if lo_sol.status != lp.OPTIMAL or hi_sol.status != lp.OPTIMAL:
            raise SolverError(f"coordinate-range LP ended with status {lo_sol.status!r}/{hi_sol.status!r}")
        lows[i] = lo_sol.objective_value
        highs[i] = hi_sol.objective_value
        vertices.append(np.clip(lo_sol.x, lower, upper))
        vertices.append(np.clip(hi_sol.x, lower, upper))
    return lows, highs, vertices


def _snap(vals: np.ndarray, lower: np.ndarray, upper: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    out = vals.copy()
    snap_lo = np.isfinite(lower) & (np.abs(out - lower) <= tol)
    out[snap_lo] = lower[snap_lo]
    snap_up = np.isfinite(upper) & (np.abs(out - upper) <= tol)
    out[snap_up] = upper[snap_up]
    return out


def maxent_over_polytope(A, b, lower, upper, *, kind: str, gap_tol: float = GAP_TOL,
                         max_iter: int = MAX_ITER, fix_tol: float = FIX_TOL,
                         init: str = "centroid", init_vertex: int = 0,
                         center=None):
    """Shared driver: fix pinned coordinates, then run the conditional-gradient
    loop on the free block. Returns (x, gap, iterations, converged).

    center, when given, is the unconstrained maximizer of the objective; if it
    is feasible it becomes the single starting atom, which lets the first gap
    check terminate immediately in the common no-binding-constraint case.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)

    lows, highs, vertices = _coordinate_ranges(A, b, lower, upper)
    fixed = (highs - lows) <= fix_tol
    x_full = _snap(0.5 * (lows + highs), lower, upper)

    free = ~fixed
    n_free = int(free.sum())
    if n_free == 0:
        return x_full, 0.0, 0, True

    A_free = A[:, free]
    b_free = b - A[:, fixed] @ x_full[fixed] if fixed.any() else b.copy()
    live = np.abs(A_free).max(axis=1) > 0.0 if A_free.size else np.zeros(A.shape[0], dtype=bool)
    dead = ~live
    if np.any(b_free[dead] < -1e-6):
        raise SolverError("fixed coordinates violate a constraint row")

    A_live, b_live = A_free[live], b_free[live]
    state = lp.SimplexState(A_live, b_live, lower[free], upper[free])
    if init == "centroid":
        init_atoms = [v[free].copy() for v in vertices]
        if center is not None:
            c_free = np.asarray(center, dtype=float)[free]
            in_box = np.all(c_free >= lower[free] - 1e-12) and np.all(c_free <= upper[free] + 1e-12)
            if in_box and (not A_live.size or np.all(A_live @ c_free <= b_live + 1e-12)):
                init_atoms = [np.clip(c_free, lower[free], upper[free])]
    elif init == "vertex":
        init_atoms = [vertices[init_vertex % len(vertices)][free].copy()]
    else:
        raise StructuralError(f"unknown init mode {init!r}")

    grad_fn = _make_gradient(kind)
    x_free, gap, iters, converged = _conditional_gradient_maximize(
        state, A_live, b_live, lower[free], upper[free], grad_fn, init_atoms,
        gap_tol, max_iter, kind)

    out = x_full.copy()
    out[free] = x_free
    return out, gap, iters, converged


# -- public operations -------------------------------------------------------


def maxent_labelling(cs: ConstraintSet, baf: BAF, *, gap_tol: float = GAP_TOL,
                     max_iter: int = MAX_ITER, fix_tol: float = FIX_TOL,
                     init: str = "centroid", init_vertex: int = 0) -> MaxEntResult:
    """The unique entropy-maximizing labelling subject to the constraint set."""
    A, b = cs.as_matrix(baf)
    n = baf.n
    try:
        x, gap, iters, converged = maxent_over_polytope(
            A, b, np.zeros(n), np.ones(n), kind="binary", gap_tol=gap_tol,
            max_iter=max_iter, fix_tol=fix_tol, init=init, init_vertex=init_vertex,
            center=np.full(n, 0.5))
    except UnsatisfiableError:
        raise UnsatisfiableError("maximum entropy requires a satisfiable constraint set") from None
    L = Labelling.from_array(baf, np.clip(x, 0.0, 1.0))
    return MaxEntResult(L, entropy_labelling(L), iters, gap, converged)


def conjunctive_query(L: Labelling, q: ConjunctiveQuery) -> float:
    """Probability of a conjunction of literals under the factorized model of L."""
    out = 1.0
    for name, positive in q.literals:
        p = L[name]
        out *= p if positive else 1.0 - p
    return out


def exclusive_dnf_query(L: Labelling, f: Formula, limit: int = DNF_LIMIT) -> float:
    """Formula probability under the factorized model of L, by expanding the
    formula over all sign patterns of its arguments (mutually exclusive
    conjunctions whose probabilities add)."""
    names = sorted(formula_atoms(f))
    k = len(names)
    if k > limit:
        raise LimitExceededError(
            f"formula mentions {k} arguments; exclusive-DNF expansion limit is {limit}")
    for name in names:
        L.baf.index(name)
    pos = {name: i for i, name in enumerate(names)}
    masks = np.arange(1 << k, dtype=np.int64)

    def rec(node: Formula) -> np.ndarray:
        if isinstance(node, Atom):
            return (masks >> pos[node.name] & 1).astype(bool)
        if isinstance(node, Not):
            return ~rec(node.inner)
        if isinstance(node, And):
            out = np.ones(masks.shape, dtype=bool)
            for p in node.parts:
                out &= rec(p)
            return out
        if isinstance(node, Or):
            out = np.zeros(masks.shape, dtype=bool)
            for p in node.parts:
                out |= rec(p)
            return out
        raise StructuralError(f"not a formula node: {node!r}")

    sat = rec(f)
    weights = np.ones(masks.shape, dtype=float)
    for name, i in pos.items():
        bit = (masks >> i & 1).astype(bool)
        weights *= np.where(bit, L[name], 1.0 - L[name])
    return float(weights[sat].sum())


def conditional_query(cs: ConstraintSet, baf: BAF, condition: ConjunctiveQuery,
                      target: ConjunctiveQuery, **maxent_kw) -> float:
    """Conditional conjunctive query via the recompute workaround: force every
    conditioned argument to probability one, recompute the max-entropy
    labelling, then ask the target as a plain conjunctive query."""
    if not condition.all_positive():
        raise StructuralError("conditioning supports positive literals only")
    augmented = cs.copy()
    for name in condition.names:
        baf.index(name)
        augmented.add(LinearAtomicConstraint.of({name: 1.0}, 1.0), "condition")
        augmented.add(LinearAtomicConstraint.of({name: -1.0}, -1.0), "condition")
    try:
        res = maxent_labelling(augmented, baf, **maxent_kw)
    except UnsatisfiableError:
        raise ConditionInconsistentError(
            f"condition {condition} is inconsistent with the constraint set") from None
    return conjunctive_query(res.labelling, target)
