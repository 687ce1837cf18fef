#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import logging
import time
from typing import Optional, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from ..models import BoxQp, QpNumericError, QpSolution, SmootherConfig, SolverStatus

logger = logging.getLogger(__name__)

_ACTIVE_TOL = 1e-9
_MAX_POLISH_ROUNDS = 25


class BoxQpSolver:
    """
    箱型制約付き凸二次計画問題の ADMM ソルバー

    min 1/2 x'Px + q'x  s.t.  l <= x <= u を x = z の分割で解く。
    係数行列 P + (sigma + rho) I は LU 分解を使い回し、25 反復ごとに
    残差のバランスから rho を調整する。rho の調整時には有効制約集合を推定して
    等式制約付き問題を直接解き（ポリッシング）、KKT 条件を満たせばその解を返す。
    そうでなければ目的関数値が最小の実行可能な反復（z は常に箱の内側）を返す。
    """

    def __init__(self, config: Optional[SmootherConfig] = None):
        self.config = config or SmootherConfig()

    def solve(self, qp: BoxQp, warm_start: Optional[np.ndarray] = None) -> QpSolution:
        cfg = self.config
        started = time.perf_counter()
        P, q, lower, upper = self._validated(qp)
        n = q.shape[0]

        x0 = np.zeros(n) if warm_start is None else np.asarray(warm_start, dtype=float).copy()
        x = np.clip(x0, lower, upper)
        z = x.copy()
        y = np.zeros(n)
        history = [qp.objective(z)]

        polished = self._polish(P, q, lower, upper, lower == upper, np.zeros(n, dtype=bool))
        if polished is not None:
            return self._solution(qp, polished, SolverStatus.SOLVED, 0, started, history, polished=True)

        rho = cfg.rho
        sigma, alpha = cfg.sigma, cfg.alpha
        eye = sp.identity(n, format="csc")
        lu = splu((P + (sigma + rho) * eye).tocsc())
        best_z, best = z, history[0]
        r_prim = r_dual = np.inf

        for it in range(1, cfg.max_iter + 1):
            x_tilde = lu.solve(sigma * x - q + rho * z - y)
            x_next = alpha * x_tilde + (1.0 - alpha) * x
            z_relaxed = alpha * x_tilde + (1.0 - alpha) * z
            z_next = np.clip(z_relaxed + y / rho, lower, upper)
            y = y + rho * (z_relaxed - z_next)
            x, z = x_next, z_next

            Px = P @ x
            r_prim = float(np.max(np.abs(x - z)))
            r_dual = float(np.max(np.abs(Px + q + y)))
            value = qp.objective(z)
            history.append(value)
            if value < best:
                best_z, best = z, value

            if r_prim <= cfg.eps_abs and r_dual <= cfg.eps_abs:
                polished = self._polish_from_iterate(P, q, lower, upper, z, y)
                if polished is not None:
                    return self._solution(qp, polished, SolverStatus.SOLVED, it, started, history,
                                          polished=True)
                return self._solution(qp, best_z, SolverStatus.SOLVED, it, started, history,
                                      residuals=(r_prim, r_dual))

            if it % cfg.adaptive_rho_interval == 0:
                new_rho = self._balanced_rho(rho, r_prim, r_dual, x, z, Px, y, q)
                if new_rho > 5.0 * rho or new_rho < rho / 5.0:
                    logger.debug(f"ADMM iteration {it}: rho {rho:.3e} -> {new_rho:.3e}")
                    rho = new_rho
                    lu = splu((P + (sigma + rho) * eye).tocsc())
                polished = self._polish_from_iterate(P, q, lower, upper, z, y)
                if polished is not None:
                    return self._solution(qp, polished, SolverStatus.SOLVED, it, started, history,
                                          polished=True)

        logger.warning(
            f"Box QP stopped after {cfg.max_iter} iterations "
            f"(primal {r_prim:.2e}, dual {r_dual:.2e}); returning the best feasible iterate"
        )
        return self._solution(qp, best_z, SolverStatus.MAX_ITERATIONS, cfg.max_iter, started, history,
                              residuals=(r_prim, r_dual))

    @staticmethod
    def _validated(qp: BoxQp) -> Tuple[sp.csc_matrix, np.ndarray, np.ndarray, np.ndarray]:
        P = sp.csc_matrix(qp.P, dtype=float)
        q = np.asarray(qp.q, dtype=float)
        lower = np.asarray(qp.lower, dtype=float)
        upper = np.asarray(qp.upper, dtype=float)
        if not (np.all(np.isfinite(P.data)) and np.all(np.isfinite(q))):
            raise QpNumericError("Quadratic or linear term contains non-finite values")
        if np.any(np.isnan(lower)) or np.any(np.isnan(upper)):
            raise QpNumericError("Bounds contain NaN")
        if np.any(lower > upper):
            raise QpNumericError("Lower bound exceeds upper bound")
        if P.shape != (q.shape[0], q.shape[0]) or lower.shape != q.shape or upper.shape != q.shape:
            raise QpNumericError("Inconsistent problem dimensions")
        return P, q, lower, upper

    @staticmethod
    def _balanced_rho(rho, r_prim, r_dual, x, z, Px, y, q) -> float:
        prim_scale = max(np.max(np.abs(x)), np.max(np.abs(z)), 1e-12)
        dual_scale = max(np.max(np.abs(Px)), np.max(np.abs(y)), np.max(np.abs(q)), 1e-12)
        ratio = (r_prim / prim_scale) / max(r_dual / dual_scale, 1e-30)
        return float(np.clip(rho * np.sqrt(ratio), 1e-6, 1e6))

    def _polish_from_iterate(self, P, q, lower, upper, z, y) -> Optional[np.ndarray]:
        at_lower = (z - lower < -y) | (lower == upper)
        at_upper = (upper - z < y) & ~at_lower
        return self._polish(P, q, lower, upper, at_lower, at_upper)

    def _polish(self, P, q, lower, upper, at_lower, at_upper) -> Optional[np.ndarray]:
        """
        有効制約集合を固定した等式制約付き問題を解き、KKT 条件を確認する

        違反した変数を有効集合に加え、符号の合わない乗数を外す操作を繰り返す。
        """
        at_lower = at_lower.copy()
        at_upper = at_upper.copy() & ~at_lower
        fixed = lower == upper
        n = q.shape[0]

        for _ in range(_MAX_POLISH_ROUNDS):
            active = at_lower | at_upper
            x = np.where(at_lower, lower, np.where(at_upper, upper, 0.0))
            if not np.all(np.isfinite(x[active])):
                return None
            free = np.flatnonzero(~active)
            if free.size:
                act = np.flatnonzero(active)
                P_ff = P[free][:, free].tocsc()
                rhs = -q[free]
                if act.size:
                    rhs = rhs - P[free][:, act] @ x[act]
                try:
                    x[free] = splu(P_ff).solve(rhs)
                except RuntimeError:
                    return None

            grad = P @ x + q
            tol = _ACTIVE_TOL * max(1.0, float(np.max(np.abs(q))) if n else 1.0)
            below = ~active & (x < lower - _ACTIVE_TOL)
            above = ~active & (x > upper + _ACTIVE_TOL)
            if below.any() or above.any():
                at_lower |= below
                at_upper |= above
                continue

            wrong_lower = at_lower & ~fixed & (grad < -tol)
            wrong_upper = at_upper & ~fixed & (grad > tol)
            if wrong_lower.any() or wrong_upper.any():
                at_lower &= ~wrong_lower
                at_upper &= ~wrong_upper
                continue

            x = np.clip(x, lower, upper)
            if projected_gradient_norm(P, q, lower, upper, x) <= self.config.eps_abs:
                return x
            return None
        return None

    def _solution(self, qp: BoxQp, x: np.ndarray, status: SolverStatus, iterations: int,
                  started: float, history, polished: bool = False,
                  residuals: Tuple[float, float] = (0.0, 0.0)) -> QpSolution:
        if polished:
            history = history + [qp.objective(x)]
        return QpSolution(
            x=x,
            status=status,
            iterations=iterations,
            primal_residual=residuals[0],
            dual_residual=residuals[1],
            polished=polished,
            solve_time=time.perf_counter() - started,
            objective_history=history,
        )


def projected_gradient_norm(P, q, lower, upper, x) -> float:
    """Infinity norm of x - clip(x - grad, lower, upper)"""
    grad = P @ x + q
    return float(np.max(np.abs(x - np.clip(x - grad, lower, upper)))) if x.size else 0.0


def solve_box_qp(qp: BoxQp, config: Optional[SmootherConfig] = None,
                 warm_start: Optional[np.ndarray] = None) -> QpSolution:
    """箱型制約付き QP を解く"""
    return BoxQpSolver(config).solve(qp, warm_start=warm_start)
