"""QP.

Dense convex quadratic programs. An equality constrained KKT core, and a
primal active set method on top of it for two sided inequality rows.
"""

from __future__ import annotations

import enum
import typing
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt
from loguru import logger
from scipy.optimize import linprog

from drr.errors import MaxIterError, QpInfeasibleError, SingularKktError

__all__ = (
    "QpProblem",
    "QpSolution",
    "QpStatus",
    "solve_equality_qp",
    "solve_qp",
)

FloatArray: typing.TypeAlias = npt.NDArray[np.float64]

EQUALITY_TOL: typing.Final[float] = 1e-8
"""Residual tolerance of the equality constrained core."""
INEQUALITY_TOL: typing.Final[float] = 1e-6
"""Feasibility and complementarity tolerance of the active set loop."""
PSD_FLOOR: typing.Final[float] = -1e-9
"""Smallest eigenvalue accepted for the cost matrix."""
ITERATIONS_PER_VARIABLE: typing.Final[int] = 50

_STEP_TOL: typing.Final[float] = 1e-10
_MULTIPLIER_TOL: typing.Final[float] = 1e-10
_BLOCKING_TOL: typing.Final[float] = 1e-12


def _empty(rows: int, cols: int) -> FloatArray:
    return np.zeros((rows, cols), dtype=np.float64)


class QpStatus(str, enum.Enum):
    """QP status.

    The outcome of a solve.
    """

    OPTIMAL = "optimal"
    """The solution satisfies the KKT conditions."""
    INFEASIBLE = "infeasible"
    """The constraints are inconsistent."""
    MAX_ITER = "max_iter"
    """The iteration budget was exhausted."""


@dataclass(frozen=True)
class QpProblem:
    """QP problem.

    `min 1/2 x^T P x + q^T x` subject to `A x = b` and `lo <= C x <= hi`.
    Infinite bounds are allowed.
    """

    P: FloatArray
    """The symmetric, positive semi-definite cost matrix."""

    q: FloatArray
    """The linear cost."""

    A: FloatArray = field(default_factory=lambda: _empty(0, 0))
    """The equality matrix."""

    b: FloatArray = field(default_factory=lambda: np.zeros(0))
    """The equality right hand side."""

    C: FloatArray = field(default_factory=lambda: _empty(0, 0))
    """The inequality matrix."""

    lo: FloatArray = field(default_factory=lambda: np.zeros(0))
    """The inequality lower bounds."""

    hi: FloatArray = field(default_factory=lambda: np.zeros(0))
    """The inequality upper bounds."""

    def __post_init__(self) -> None:
        P = np.atleast_2d(np.asarray(self.P, dtype=np.float64))
        n = P.shape[0]
        q = np.asarray(self.q, dtype=np.float64).reshape(n)
        A = np.asarray(self.A, dtype=np.float64).reshape(-1, n)
        b = np.asarray(self.b, dtype=np.float64).reshape(-1)
        C = np.asarray(self.C, dtype=np.float64).reshape(-1, n)
        lo = np.asarray(self.lo, dtype=np.float64).reshape(-1)
        hi = np.asarray(self.hi, dtype=np.float64).reshape(-1)

        if P.shape != (n, n):
            raise ValueError("P must be square.")
        if not np.allclose(P, P.T, rtol=0.0, atol=1e-9):
            raise ValueError("P must be symmetric.")
        if A.shape[0] != b.shape[0]:
            raise ValueError("A and b have inconsistent row counts.")
        if not (C.shape[0] == lo.shape[0] == hi.shape[0]):
            raise ValueError("C, lo and hi have inconsistent row counts.")
        if np.any(lo > hi):
            raise ValueError("Lower bounds must not exceed upper bounds.")

        for name, value in (
            ("P", P),
            ("q", q),
            ("A", A),
            ("b", b),
            ("C", C),
            ("lo", lo),
            ("hi", hi),
        ):
            object.__setattr__(self, name, value)

    @property
    def n(self) -> int:
        """The amount of variables."""
        return self.P.shape[0]

    def objective(self, x: FloatArray) -> float:
        """The cost at a point."""
        return float(0.5 * x @ self.P @ x + self.q @ x)


@dataclass(frozen=True)
class QpSolution:
    """QP solution.

    Duals follow the stationarity convention
    `P x + q + A^T eq_duals + C^T ineq_duals = 0`, so a row at its upper
    bound has a non-negative dual and a row at its lower bound a non-positive one.
    """

    x: FloatArray
    """The primal solution."""

    eq_duals: FloatArray
    """The multipliers of the equality rows."""

    ineq_duals: FloatArray
    """The multipliers of the inequality rows."""

    status: QpStatus = QpStatus.OPTIMAL
    """The solve outcome."""

    iterations: int = 0
    """The amount of active set iterations performed."""

    @property
    def is_optimal(self) -> bool:
        """Whether the solve reached an optimum."""
        return self.status is QpStatus.OPTIMAL

    def raise_for_status(self) -> None:
        """Raise if the solve did not reach an optimum.

        Raises
        ------
        QpInfeasibleError
            Raised when the problem was infeasible.
        MaxIterError
            Raised when the iteration budget was exhausted.
        """
        if self.status is QpStatus.INFEASIBLE:
            raise QpInfeasibleError("The constraints are inconsistent.")
        if self.status is QpStatus.MAX_ITER:
            raise MaxIterError(self.iterations)


def _kkt_matrix(P: FloatArray, E: FloatArray) -> FloatArray:
    n = P.shape[0]
    m = E.shape[0]
    K = np.zeros((n + m, n + m), dtype=np.float64)
    K[:n, :n] = P
    K[n:, :n] = E
    K[:n, n:] = E.T
    return K


def solve_equality_qp(
    P: npt.ArrayLike,
    q: npt.ArrayLike,
    A: npt.ArrayLike | None = None,
    b: npt.ArrayLike | None = None,
) -> QpSolution:
    """Solve an equality constrained QP through its KKT system.

    Example
    -------
    ```py
    sol = solve_equality_qp(np.eye(2), np.zeros(2), [[1.0, 0.0]], [1.0])
    sol.x  # array([1., 0.])
    ```

    Parameters
    ----------
    P
        The cost matrix, positive definite on the null space of `A`.
    q
        The linear cost.
    A
        The equality matrix, full row rank. May be omitted.
    b
        The equality right hand side.

    Returns
    -------
    QpSolution
        The minimizer and the equality multipliers.

    Raises
    ------
    SingularKktError
        Raised when the KKT matrix is rank deficient.
    """
    P_ = np.atleast_2d(np.asarray(P, dtype=np.float64))
    n = P_.shape[0]
    q_ = np.asarray(q, dtype=np.float64).reshape(n)
    A_ = (
        _empty(0, n)
        if A is None
        else np.asarray(A, dtype=np.float64).reshape(-1, n)
    )
    b_ = np.zeros(0) if b is None else np.asarray(b, dtype=np.float64).ravel()
    m = A_.shape[0]

    K = _kkt_matrix(P_, A_)
    rank = int(np.linalg.matrix_rank(K))
    if rank < n + m:
        raise SingularKktError(n + m, rank)

    solution = np.linalg.solve(K, np.concatenate([-q_, b_]))
    logger.trace("Solved a KKT system of size {}.", n + m)
    return QpSolution(
        x=solution[:n],
        eq_duals=solution[n:],
        ineq_duals=np.zeros(0),
    )


@dataclass(slots=True)
class _OneSided:
    """The inequality rows rewritten as `G x >= r`."""

    G: FloatArray
    r: FloatArray
    rows: list[int]
    signs: list[float]


def _split_rows(
    prob: QpProblem,
) -> tuple[FloatArray, FloatArray, list[int], _OneSided]:
    equal = [
        i
        for i in range(prob.C.shape[0])
        if np.isfinite(prob.lo[i]) and prob.lo[i] == prob.hi[i]
    ]
    A = np.vstack([prob.A, prob.C[equal]]) if equal else prob.A
    b = np.concatenate([prob.b, prob.lo[equal]]) if equal else prob.b

    G: list[FloatArray] = []
    r: list[float] = []
    rows: list[int] = []
    signs: list[float] = []
    for i in range(prob.C.shape[0]):
        if i in equal:
            continue
        if np.isfinite(prob.lo[i]):
            G.append(prob.C[i])
            r.append(float(prob.lo[i]))
            rows.append(i)
            signs.append(-1.0)
        if np.isfinite(prob.hi[i]):
            G.append(-prob.C[i])
            r.append(float(-prob.hi[i]))
            rows.append(i)
            signs.append(1.0)

    one_sided = _OneSided(
        G=np.array(G, dtype=np.float64).reshape(-1, prob.n),
        r=np.array(r, dtype=np.float64),
        rows=rows,
        signs=signs,
    )
    return A, b, equal, one_sided


def _feasible_point(
    n: int, A: FloatArray, b: FloatArray, G: FloatArray, r: FloatArray
) -> FloatArray | None:
    result = linprog(
        np.zeros(n),
        A_ub=-G if G.shape[0] else None,
        b_ub=-r if G.shape[0] else None,
        A_eq=A if A.shape[0] else None,
        b_eq=b if A.shape[0] else None,
        bounds=[(None, None)] * n,
        method="highs",
    )
    if not result.success:
        logger.debug("Phase one failed: {}", result.message)
        return None

    return np.asarray(result.x, dtype=np.float64)


def _solve_working_set(
    P: FloatArray, g: FloatArray, E: FloatArray
) -> tuple[FloatArray, FloatArray]:
    n = P.shape[0]
    K = _kkt_matrix(P, E)
    rhs = np.concatenate([-g, np.zeros(E.shape[0])])
    try:
        solution = np.linalg.solve(K, rhs)
    except np.linalg.LinAlgError:
        solution = np.linalg.lstsq(K, rhs, rcond=None)[0]

    return solution[:n], solution[n:]


def _infeasible(prob: QpProblem, x: FloatArray | None = None) -> QpSolution:
    return QpSolution(
        x=np.full(prob.n, np.nan) if x is None else x,
        eq_duals=np.zeros(prob.A.shape[0]),
        ineq_duals=np.zeros(prob.C.shape[0]),
        status=QpStatus.INFEASIBLE,
    )


def solve_qp(prob: QpProblem) -> QpSolution:
    """Solve a convex QP with equality and two sided inequality rows.

    Rows with equal finite bounds are treated as equalities. A feasible
    starting point is found with a linear program, then a primal active
    set loop walks to the optimum. When several constraints block a step
    at the same length, the lowest index enters the working set.

    Example
    -------
    ```py
    prob = QpProblem(P=[[1.0]], q=[-2.0], C=[[1.0]], lo=[0.0], hi=[1.0])
    solve_qp(prob).x  # array([1.])
    ```

    Parameters
    ----------
    prob
        The problem to solve.

    Returns
    -------
    QpSolution
        The solution; check [status][drr.qp.QpSolution.status] or call
        [raise_for_status][drr.qp.QpSolution.raise_for_status].

    Raises
    ------
    ValueError
        Raised when the cost matrix is not positive semi-definite.
    """
    n = prob.n
    if n and float(np.linalg.eigvalsh(prob.P).min()) < PSD_FLOOR:
        raise ValueError("The cost matrix must be positive semi-definite.")

    A, b, equal, one_sided = _split_rows(prob)
    G, r = one_sided.G, one_sided.r
    me = prob.A.shape[0]

    if G.shape[0] == 0:
        try:
            core = solve_equality_qp(prob.P, prob.q, A, b)
        except SingularKktError:
            logger.debug("Singular equality core, using the general loop.")
        else:
            ineq = np.zeros(prob.C.shape[0])
            ineq[equal] = core.eq_duals[me:]
            return QpSolution(core.x, core.eq_duals[:me], ineq)

    x = _feasible_point(n, A, b, G, r)
    if x is None:
        return _infeasible(prob)

    working: list[int] = []
    max_iter = ITERATIONS_PER_VARIABLE * max(n, 1)
    for iteration in range(1, max_iter + 1):
        E = np.vstack([A, G[working]]) if working else A
        p, y = _solve_working_set(prob.P, prob.P @ x + prob.q, E)

        scale = 1.0 + float(np.max(np.abs(x), initial=0.0))
        if float(np.max(np.abs(p), initial=0.0)) <= _STEP_TOL * scale:
            w = -y[A.shape[0] :]
            if not working or w.min() >= -_MULTIPLIER_TOL:
                logger.trace("Active set converged in {} iterations.", iteration)
                return _optimal(
                    prob, x, y, working, w, equal, one_sided, iteration
                )

            leaving = int(np.argmin(w))
            working.pop(leaving)
            continue

        alpha = 1.0
        blocking: int | None = None
        slopes = G @ p
        for i in range(G.shape[0]):
            if i in working or slopes[i] >= -_BLOCKING_TOL:
                continue
            step = max(0.0, (r[i] - G[i] @ x) / slopes[i])
            if step < alpha:
                alpha = step
                blocking = i

        x = x + alpha * p
        if blocking is not None:
            working.append(blocking)

    logger.warning("Active set did not converge in {} iterations.", max_iter)
    return QpSolution(
        x=x,
        eq_duals=np.zeros(me),
        ineq_duals=np.zeros(prob.C.shape[0]),
        status=QpStatus.MAX_ITER,
        iterations=max_iter,
    )


def _optimal(
    prob: QpProblem,
    x: FloatArray,
    y: FloatArray,
    working: list[int],
    w: FloatArray,
    equal: list[int],
    one_sided: _OneSided,
    iterations: int,
) -> QpSolution:
    me = prob.A.shape[0]
    ineq = np.zeros(prob.C.shape[0])
    for position, row in enumerate(equal):
        ineq[row] = y[me + position]
    for position, index in enumerate(working):
        ineq[one_sided.rows[index]] += one_sided.signs[index] * w[position]

    residual = np.abs(prob.C @ x - np.clip(prob.C @ x, prob.lo, prob.hi))
    if residual.size and residual.max() > INEQUALITY_TOL:
        logger.debug("Primal residual {} after convergence.", residual.max())
        return _infeasible(prob, x)

    return QpSolution(
        x=x,
        eq_duals=y[:me],
        ineq_duals=ineq,
        iterations=iterations,
    )
