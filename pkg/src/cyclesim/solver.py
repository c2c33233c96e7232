"""Damped Newton solution of assembled systems, plus continuation sweeps.

The solver works on scaled variables and residuals (scales come with the
system), builds a forward-difference Jacobian and globalizes with Armijo
backtracking.  It duck-types the system: anything exposing residual_eval,
x0, var_scales, residual_scales, bounds and names can be solved, which the
tests use for textbook problems.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CycleError, NonFiniteResidual, SolveFailed

CONVERGED = "converged"
MAX_ITERS = "max_iters"
SINGULAR_JACOBIAN = "singular_jacobian"
LINE_SEARCH_STALL = "line_search_stall"


@dataclass
class SolverConfig:
    tol_residual: float = 1e-10    # scaled infinity-norm
    tol_step: float = 1e-12        # scaled step infinity-norm
    max_iters: int = 50
    damping: str = "armijo_backtracking"
    fd_rel_step: float = 1e-7
    max_backtracks: int = 20
    use_sparsity: bool = False

    def __post_init__(self):
        if self.tol_residual <= 0 or self.tol_step <= 0:
            raise ValueError("tolerances must be > 0")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass
class SolveResult:
    x: np.ndarray
    residual_norm: float
    iterations: int
    trace: list = field(default_factory=list)
    status: str = MAX_ITERS
    message: str = ""
    values: dict = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        return self.status == CONVERGED


class SimpleSystem:
    """Minimal stand-alone system (tests, scripting): unscaled by default."""

    def __init__(self, fn, x0, names=None, scales=None, residual_scales=None,
                 lower=None, upper=None, sparsity=None):
        self._fn = fn
        self.x0 = np.asarray(x0, dtype=float)
        n = len(self.x0)
        self.variables = None
        self.var_names = list(names) if names else [f"x{i}" for i in range(n)]
        self.residual_names = [f"r{i}" for i in range(n)]
        self.var_scales = np.asarray(scales if scales is not None else np.ones(n), dtype=float)
        self.residual_scales = np.asarray(
            residual_scales if residual_scales is not None else np.ones(n), dtype=float)
        self.lower = np.asarray(lower if lower is not None else -np.inf * np.ones(n))
        self.upper = np.asarray(upper if upper is not None else np.inf * np.ones(n))
        self.sparsity = sparsity

    @property
    def n(self):
        return len(self.x0)

    def residual_eval(self, x):
        return np.asarray(self._fn(np.asarray(x, dtype=float)), dtype=float)

    def solution_dict(self, x):
        return {nm: float(v) for nm, v in zip(self.var_names, x)}


def _names_of(system):
    if getattr(system, "variables", None):
        return [v.name for v in system.variables]
    return list(getattr(system, "var_names"))


def _check_finite(r, system, x):
    if np.all(np.isfinite(r)):
        return
    bad = int(np.argmax(~np.isfinite(r)))
    raise NonFiniteResidual(system.residual_names[bad])


def jacobian(system, x, config: SolverConfig | None = None,
             scheme: str = "forward") -> np.ndarray:
    """Finite-difference Jacobian d r_i / d x_j in physical units.

    Relative step max(fd_rel_step |x_j|, fd_rel_step).  When the system
    carries a sparsity pattern and config.use_sparsity is set, entries
    outside the dependency list are forced to zero (column j only "touches"
    residuals that list a dependency on j).
    """
    config = config or SolverConfig()
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("jacobian requested at a non-finite point")
    r0 = system.residual_eval(x)
    _check_finite(r0, system, x)
    n = len(x)
    J = np.zeros((len(r0), n))
    mask = None
    if config.use_sparsity and getattr(system, "sparsity", None):
        mask = np.zeros((len(r0), n), dtype=bool)
        for ri, vi in system.sparsity:
            mask[ri, vi] = True
    for j in range(n):
        h = config.fd_rel_step * max(abs(x[j]), 1.0)
        xp = x.copy()
        xp[j] += h
        if scheme == "central":
            xm = x.copy()
            xm[j] -= h
            rp = system.residual_eval(xp)
            rm = system.residual_eval(xm)
            _check_finite(rp, system, xp)
            _check_finite(rm, system, xm)
            col = (rp - rm) / (2.0 * h)
        else:
            rp = system.residual_eval(xp)
            _check_finite(rp, system, xp)
            col = (rp - r0) / h
        if mask is not None:
            col = np.where(mask[:, j], col, 0.0)
        J[:, j] = col
    return J


def _singular_culprit(J_scaled, system) -> str:
    names = _names_of(system)
    col_norms = np.linalg.norm(J_scaled, axis=0)
    dead = np.where(col_norms == 0.0)[0]
    if dead.size:
        return names[int(dead[0])]
    try:
        _, _, vt = np.linalg.svd(J_scaled)
        return names[int(np.argmax(np.abs(vt[-1])))]
    except np.linalg.LinAlgError:
        return names[0]


def newton_solve(system, config: SolverConfig | None = None,
                 x0=None) -> SolveResult:
    """Damped Newton iteration on the scaled system.

    Converged means the scaled residual infinity-norm fell below
    tol_residual; a tiny step that leaves the residual large reports
    line_search_stall instead.
    """
    config = config or SolverConfig()
    s = np.asarray(system.var_scales, dtype=float)
    rs = np.asarray(system.residual_scales, dtype=float)
    lo = np.asarray(system.lower, dtype=float) / s
    hi = np.asarray(system.upper, dtype=float) / s

    y = np.clip(np.asarray(x0 if x0 is not None else system.x0, dtype=float) / s, lo, hi)

    def scaled_residual(yv):
        r = system.residual_eval(yv * s)
        _check_finite(r, system, yv * s)
        return r / rs

    r = scaled_residual(y)
    norm = float(np.max(np.abs(r)))
    trace = [{"iteration": 0, "residual_norm": norm, "step_norm": 0.0, "alpha": 1.0}]
    status = MAX_ITERS
    message = ""
    iterations = 0

    for it in range(1, config.max_iters + 1):
        if norm <= config.tol_residual:
            status = CONVERGED
            break
        iterations = it
        J_phys = jacobian(system, y * s, config)
        # scale rows by residual class, columns by variable class
        J = (J_phys / rs[:, None]) * s[None, :]
        try:
            dy = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            status = SINGULAR_JACOBIAN
            message = f"singular pivot around variable {_singular_culprit(J, system)!r}"
            break
        if not np.all(np.isfinite(dy)):
            status = SINGULAR_JACOBIAN
            message = f"non-finite step around variable {_singular_culprit(J, system)!r}"
            break

        alpha = 1.0
        accepted = False
        y_new, r_new, norm_new = y, r, norm
        for _ in range(config.max_backtracks + 1):
            y_try = np.clip(y + alpha * dy, lo, hi)
            try:
                r_try = scaled_residual(y_try)
                norm_try = float(np.max(np.abs(r_try)))
            except NonFiniteResidual:
                norm_try = math.inf
            if norm_try < norm:
                y_new, r_new, norm_new = y_try, r_try, norm_try
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            status = LINE_SEARCH_STALL
            message = "no descent after 20 halvings"
            break

        step_norm = float(np.max(np.abs(y_new - y)))
        y, r, norm = y_new, r_new, norm_new
        trace.append({"iteration": it, "residual_norm": norm,
                      "step_norm": step_norm, "alpha": alpha})
        if step_norm <= config.tol_step:
            status = CONVERGED if norm <= config.tol_residual else LINE_SEARCH_STALL
            if status == LINE_SEARCH_STALL:
                message = "step below tol_step with residual above tolerance"
            break
    else:
        status = CONVERGED if norm <= config.tol_residual else MAX_ITERS

    if status == MAX_ITERS and norm <= config.tol_residual:
        status = CONVERGED

    x = y * s
    result = SolveResult(x=x, residual_norm=norm, iterations=iterations,
                         trace=trace, status=status, message=message)
    result.values = system.solution_dict(x)
    return result


# ---------------------------------------------------------------------------
# parameter sweeps with continuation


@dataclass
class SweepPoint:
    value: float
    status: str
    solution: dict | None = None
    metrics: dict | None = None
    residual_norm: float | None = None
    error: str | None = None

    @property
    def converged(self) -> bool:
        return self.status == CONVERGED


@dataclass
class SweepResult:
    param_path: str
    points: list = field(default_factory=list)

    @property
    def all_converged(self) -> bool:
        return all(p.converged for p in self.points)


def _resolve_sweep_path(model, param_path: str, free: str | None) -> str:
    """Validate the sweep target up front; returns "param" or "spec".

    Path problems abort the whole sweep (every point would fail the same
    way); only per-point solve failures are isolated in the table.
    """
    from .components import family_of

    comp_name, _, tail = param_path.partition(".")
    comp = model.component(comp_name)
    fam = family_of(comp)
    param_names = {p.name: p for p in fam.params}

    if tail in param_names and free is None:
        pdef = param_names[tail]
        if pdef.role != "operational":
            raise CycleError(
                f"sweep parameter {param_path} is {pdef.role}, not a boundary; "
                "sweep operational parameters directly or pin a spec quantity "
                "with a freed boundary (free=...)")
        return "param"
    if tail in fam.spec_targets:
        if free is None:
            raise CycleError(
                f"{param_path} pins a spec quantity; pass free='comp.param' to "
                "release a boundary in exchange")
        fcomp_name, _, fparam = free.partition(".")
        fcomp = model.component(fcomp_name)
        if fparam not in {p.name for p in family_of(fcomp).params}:
            raise CycleError(f"free={free}: no such parameter")
        return "spec"
    raise CycleError(f"{param_path}: no such parameter or spec quantity "
                     f"on family {fam.name}")


def _point_model(model, param_path, value, free, kind):
    """Model for one sweep point: either set an operational parameter
    directly, or pin a spec quantity and free a compensating boundary."""
    from .network import SpecEntry

    m = model.copy()
    comp_name, _, tail = param_path.partition(".")
    if kind == "param":
        m.component(comp_name).params[tail] = value
        return m
    fcomp_name, _, fparam = free.partition(".")
    fcomp = m.component(fcomp_name)
    old = fcomp.params.get(fparam)
    if isinstance(old, (int, float)):
        m.initial_guesses.setdefault(f"{fcomp_name}.{fparam}", float(old))
    fcomp.params[fparam] = "free"
    m.design_specs.append(SpecEntry(comp_name, tail, value, mode="always"))
    return m


def sweep(model, param_path: str, values, config: SolverConfig | None = None,
          free: str | None = None, on_point=None) -> SweepResult:
    """Solve a parameter family in order, warm-starting each point from the
    previous converged solution; a failed point is bisected toward from the
    last good value up to 4 times before being recorded as failed.

    on_point(point) is called after each point (progress reporting).
    """
    from .network import assemble

    config = config or SolverConfig()
    kind = _resolve_sweep_path(model, param_path, free)
    result = SweepResult(param_path=param_path)
    guesses: dict | None = None
    last_good: float | None = None

    def attempt(value, seed):
        m = _point_model(model, param_path, value, free, kind)
        if seed:
            m.initial_guesses.update(seed)
        system = assemble(m)
        res = newton_solve(system, config)
        if not res.converged:
            raise SolveFailed(res)
        system.check_physical(res.x)
        return res, system

    for value in values:
        error = None
        point_res = None
        point_sys = None
        try:
            point_res, point_sys = attempt(value, guesses)
        except CycleError as exc:
            # continuation: walk from the last converged value toward the target
            recovered = False
            if last_good is not None:
                lo = last_good
                for _ in range(4):
                    mid = 0.5 * (lo + value)
                    try:
                        mid_res, _ = attempt(mid, guesses)
                    except CycleError:
                        break
                    lo = mid
                    guesses = mid_res.values
                    try:
                        point_res, point_sys = attempt(value, guesses)
                        recovered = True
                        break
                    except CycleError as exc2:
                        exc = exc2
            if not recovered:
                error = str(exc)

        if point_res is not None:
            guesses = point_res.values
            last_good = value
            point = SweepPoint(
                value=value, status=CONVERGED, solution=point_res.values,
                metrics=point_sys.metrics(point_res.x).as_dict(),
                residual_norm=point_res.residual_norm)
        else:
            point = SweepPoint(value=value, status="failed", error=error)
        result.points.append(point)
        if on_point is not None:
            on_point(point)
    return result
