"""
Run Orchestrator

The :class:`RunOrchestrator` ties every component together:

1. Reads a run configuration (YAML or JSON) through
   :func:`~fbpopt.data.config.parse_config`.
2. Builds the meshes, the :class:`~fbpopt.model.problem.ProblemData` and
   the constants ledger (estimating whatever the config does not fix).
3. Builds the :class:`~fbpopt.solvers.state.StateSolver` in the weighted
   product norm and the :class:`~fbpopt.control.cost.ReducedCost` on top.
4. Exposes one method per command; each writes its CSV/JSON artifacts to
   ``out_dir`` and returns a :class:`CommandResult`.

Every JSON report embeds the resolved configuration and the ledger.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from .constants.estimates import analytic_CA, analytic_CA_parts, compute_CE, default_alpha, estimate_beta
from .constants.ledger import ConstantsLedger, compute_thresholds
from .constants.lipschitz import KINDS, measure_contraction, measure_lipschitz, sample_controls
from .constants.regularity import gagliardo_seminorm
from .control.cost import ReducedCost
from .control.optimizer import optimize
from .control.soc import check_quadratic_growth, check_stationarity, verify_soc
from .data.config import RunConfig, parse_config
from .errors import ConvergenceError, DegenerateGeometryError
from .fem.fields import ControlProfile
from .fem.mesh import IntervalMesh, SquareMesh
from .model.problem import ProblemData
from .output.formatter import field_frame, format_report, format_table
from .output.models import CheckStatus, OptResult
from .solvers.state import SolverSettings, StateSolver
from .utils.parallel import parallel_map

logger = logging.getLogger(__name__)

SURROGATE = "surrogate"
ESTIMATED = "estimated"
OVERRIDE = "override"


@dataclass
class CommandResult:
    """
    Outcome of one command.

    Attributes:
        command:   Command name.
        passed:    ``False`` when a verified property fails.
        artifacts: Files written.
        summary:   The JSON report payload.
    """

    command:   str
    passed:    bool                   = True
    artifacts: List[Path]             = field(default_factory=list)
    summary:   Dict[str, Any]         = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 3


class RunOrchestrator:
    """
    Central coordinator for one run configuration.

    The ledger, the solvers and the reduced cost are built on first use and
    shared by the commands of this instance.

    Attributes:
        config:   Resolved run configuration.
        out_dir:  Directory receiving the artifacts.
        interval: Interface mesh.
        square:   Bulk mesh.
        data:     Problem data.
    """

    # ------------------------------------------------------------------
    # Construction
    # ------------------------------------------------------------------

    def __init__(self, config: RunConfig) -> None:
        self.config = config
        self.out_dir = Path(config.out_dir)
        self.interval, self.square = self._build_meshes(config)
        self.data = config.problem_data()
        self.settings = self._build_settings(config)

        self._ledger: Optional[ConstantsLedger] = None
        self._sources: Dict[str, str] = {}
        self._state: Optional[StateSolver] = None
        self._cost: Optional[ReducedCost] = None

        self.commands: Dict[str, Callable[[], CommandResult]] = {
            "solve-state": self.solve_state,
            "solve-adjoint": self.solve_adjoint,
            "optimize": self.optimize,
            "check-gradient": self.check_gradient,
            "check-contraction": self.check_contraction,
            "check-frechet": self.check_frechet,
            "check-duality": self.check_duality,
            "verify-soc": self.verify_soc,
            "estimate-constants": self.estimate_constants,
            "report": self.report,
        }

    # ------------------------------------------------------------------
    # Factory
    # ------------------------------------------------------------------

    @classmethod
    def from_config(
        cls,
        config_path: Union[str, Path],
        out_dir: Optional[str] = None,
        seed: Optional[int] = None,
    ) -> "RunOrchestrator":
        """
        Build a :class:`RunOrchestrator` from a configuration file.

        Args:
            config_path: Path to the YAML/JSON run configuration.
            out_dir:     Overrides the config's ``out_dir``.
            seed:        Overrides the config's ``seed``.

        Raises:
            FileNotFoundError: If *config_path* does not exist.
            ConfigError:       If the file does not parse or validate.
        """
        config = parse_config(config_path)
        overrides = {k: v for k, v in (("out_dir", out_dir), ("seed", seed)) if v is not None}
        if overrides:
            config = replace(config, **overrides)
        return cls(config)

    # ------------------------------------------------------------------
    # Shared objects
    # ------------------------------------------------------------------

    @property
    def ledger(self) -> ConstantsLedger:
        if self._ledger is None:
            self._ledger, self._sources = self._build_ledger(self.config, self.data, self.interval, self.square)
        return self._ledger

    @property
    def state(self) -> StateSolver:
        if self._state is None:
            ledger = self.ledger
            self._state = StateSolver(
                self.data, self.interval, self.square, self.settings, norm_weight=ledger.lambda1, ledger=ledger
            )
        return self._state

    @property
    def cost(self) -> ReducedCost:
        if self._cost is None:
            self._cost = ReducedCost(self.state)
        return self._cost

    @property
    def radius(self) -> float:
        """Radius of the admissible ball: the config value, else the ledger's."""
        return self.config.radius if self.config.radius is not None else self.ledger.uad_radius

    @property
    def u0(self) -> ControlProfile:
        return self.data.u0_profile(self.interval)

    def rng(self) -> np.random.Generator:
        """Fresh generator seeded from the config."""
        return np.random.default_rng(self.config.seed)

    def run(self, command: str) -> CommandResult:
        """
        Execute *command*.

        Raises:
            ValueError: For an unknown command.
        """
        if command not in self.commands:
            raise ValueError(f"Unknown command '{command}'. Expected one of: {', '.join(self.commands)}.")
        logger.info("Running '%s' (out_dir=%s).", command, self.out_dir)
        return self.commands[command]()

    # ------------------------------------------------------------------
    # State and adjoint
    # ------------------------------------------------------------------

    def solve_state(self) -> CommandResult:
        u = self.u0
        pair, trace = self.state.solve_state(u)
        result = CommandResult("solve-state")
        frame = field_frame({"u": u, "gamma": pair.gamma, "gamma_d": self._target(), "y": pair.y})
        result.artifacts.append(self._table("state.csv", frame))
        result.artifacts.append(self._table("state_trace.csv", trace.to_frame()))
        payload = {
            "trace": trace.to_dict(),
            "residuals": self.state.state_residuals(pair, u),
            "slope_max": pair.slope_max,
            "state_constraint_ok": pair.satisfies_state_constraint,
            "feasibility": self.state.check_admissibility(u, self.ledger),
            "ball": self.state.check_ball(pair, self.ledger),
        }
        return self._finish(result, "state.json", payload)

    def solve_adjoint(self) -> CommandResult:
        u = self.u0
        pair, _ = self.state.solve_state(u)
        adjoint, trace = self.cost.adjoint.solve_adjoint(pair)
        gradient = self.cost.eval_gradient(u)
        result = CommandResult("solve-adjoint")
        frame = field_frame({"r": adjoint.r, "s": adjoint.s, "gradient": gradient})
        result.artifacts.append(self._table("adjoint.csv", frame))
        result.artifacts.append(self._table("adjoint_trace.csv", trace.to_frame()))
        payload = {
            "trace": trace.to_dict(),
            "residuals": self.cost.adjoint.adjoint_residuals(adjoint, pair),
            "cost": self.cost.eval_cost(u),
            "gradient_l2": self.state.l2_norm(gradient),
        }
        return self._finish(result, "adjoint.json", payload)

    # ------------------------------------------------------------------
    # Optimization
    # ------------------------------------------------------------------

    def optimize(self) -> CommandResult:
        opt = self._optimize()
        pair, _ = self.state.solve_state(opt.control)
        result = CommandResult("optimize")
        frame = field_frame({"u": opt.control, "gamma": pair.gamma, "gamma_d": self._target(), "y": pair.y})
        result.artifacts.append(self._table("control.csv", frame))
        result.artifacts.append(self._table("opt_trace.csv", opt.trace_rows()))
        return self._finish(result, "optimize.json", {"radius": self.radius, "optimizer": opt})

    def verify_soc(self) -> CommandResult:
        """Second-order check, quadratic growth and stationarity at the optimizer's control."""
        opt = self._optimize()
        u_bar, checks, radius = opt.control, self.config.checks, self.radius
        soc = verify_soc(self.cost, u_bar, radius, self.ledger, checks.n_samples, self.rng())
        growth = check_quadratic_growth(self.cost, u_bar, radius, checks.n_samples, self.config.opt_tol, self.rng())
        stationarity = check_stationarity(self.cost, u_bar, radius, checks.n_samples, self.config.opt_tol, self.rng())
        if not stationarity.passed:
            logger.warning("Sampled variational inequality fails: min value %.3e.", stationarity.min_value)

        result = CommandResult("verify-soc", passed=soc.passed)
        result.artifacts.append(self._table("soc_ratios.csv", pd.DataFrame({"ratio": soc.ratios})))
        result.artifacts.append(self._table("growth.csv", growth.rows))
        payload = {
            "radius": radius,
            "optimizer": opt,
            "soc": soc,
            "growth": growth,
            "stationarity": stationarity,
        }
        return self._finish(result, "soc.json", payload)

    # ------------------------------------------------------------------
    # Verification
    # ------------------------------------------------------------------

    def check_gradient(self) -> CommandResult:
        """Central differences of the cost against the adjoint gradient at ``u0``."""
        checks = self.config.checks
        ladder = sorted(set(checks.fd_eps) | {checks.gradient_eps}, reverse=True)
        frame = self.cost.gradient_fd_table(self.u0, self._direction(self.rng()), ladder)
        frame["order"] = _observed_order(frame["eps"].to_numpy(), frame["abs_error"].to_numpy())

        at_eps = frame.loc[np.isclose(frame["eps"], checks.gradient_eps), "rel_error"]
        rel_error = float(at_eps.iloc[0])
        passed = rel_error <= checks.gradient_rtol
        if not passed:
            logger.warning("Gradient check fails: relative error %.3e > %.1e.", rel_error, checks.gradient_rtol)

        result = CommandResult("check-gradient", passed=passed)
        result.artifacts.append(self._table("gradient_check.csv", frame))
        payload = {
            "eps": checks.gradient_eps,
            "rel_error": rel_error,
            "tolerance": checks.gradient_rtol,
            "status": CheckStatus.of(passed),
        }
        return self._finish(result, "gradient_check.json", payload)

    def check_duality(self) -> CommandResult:
        """Adjoint against sensitivity values of ``J'(u)h`` over sampled ``(u, h)``."""
        checks = self.config.checks
        rng = self.rng()
        controls = sample_controls(self.state, self.radius, checks.n_duality, rng)
        directions = [self._direction(rng) for _ in controls]
        rows = parallel_map(lambda job: self.cost.duality_gap(*job), list(zip(controls, directions)))
        for k, row in enumerate(rows):
            row["sample"] = k
            row["ok"] = row["scaled_gap"] <= checks.duality_tol
        passed = all(row["ok"] for row in rows)
        worst = max((row["scaled_gap"] for row in rows), default=0.0)
        if not passed:
            logger.warning("Duality check fails: scaled gap %.3e > %.1e.", worst, checks.duality_tol)

        result = CommandResult("check-duality", passed=passed)
        columns = ["sample", "adjoint", "sensitivity", "gap", "scaled_gap", "ok"]
        result.artifacts.append(self._table("duality.csv", pd.DataFrame(rows, columns=columns)))
        payload = {
            "n_samples": len(rows),
            "max_scaled_gap": worst,
            "tolerance": checks.duality_tol,
            "status": CheckStatus.of(passed),
        }
        return self._finish(result, "duality.json", payload)

    def check_contraction(self) -> CommandResult:
        """Sampled contraction on the invariant ball plus the decay of the state iteration."""
        ledger = self.ledger
        u = self.u0
        report = measure_contraction(self.state, u, ledger, self.config.checks.n_contraction_pairs, self.rng())
        _, trace = self.state.solve_state(u)
        trace_ratio = trace.max_ratio(floor=self.config.fp_tol)
        trace_ok = trace_ratio <= report.bound
        if not trace_ok:
            logger.warning("State iteration decays with ratio %.6g > %.6g.", trace_ratio, report.bound)

        result = CommandResult("check-contraction", passed=report.passed and trace_ok)
        ratios = pd.DataFrame({"pair": np.arange(len(report.ratios)), "ratio": report.ratios})
        result.artifacts.append(self._table("contraction.csv", ratios))
        payload = {
            "feasibility": self.state.check_admissibility(u, ledger),
            "contraction": report,
            "trace": trace.to_dict(),
            "trace_ratio_ok": trace_ok,
            "status": CheckStatus.of(result.passed),
        }
        return self._finish(result, "contraction.json", payload)

    def check_frechet(self) -> CommandResult:
        """Remainder ratios along the eps ladder, plus the derivative a-priori bounds."""
        checks = self.config.checks
        order = checks.frechet_order
        u, h = self.u0, self._direction(self.rng())
        tangent = self.cost.tangent
        frame = tangent.verify_frechet(u, h, order, checks.frechet_eps)
        frame["order"] = _observed_order(frame["eps"].to_numpy(), frame["remainder"].to_numpy())

        ratios = frame["ratio"].to_numpy()
        passed = bool(ratios.max() <= self.config.fp_tol or ratios[-1] <= 0.5 * ratios[0])
        if not passed:
            logger.warning("Remainder ratios do not decay: %.3e -> %.3e.", ratios[0], ratios[-1])

        pair, _ = self.state.solve_state(u)
        if order == 1:
            bounds = tangent.a_priori_bound(pair, tangent.first_rhs(h), self.ledger)
        else:
            bounds = tangent.second_derivative_bound(u, h, h, self.ledger)
        if not bounds["within_bounds"]:
            logger.warning("Derivative norms exceed their ledger bounds.")

        result = CommandResult("check-frechet", passed=passed)
        result.artifacts.append(self._table("frechet.csv", frame))
        payload = {"order": order, "bounds": bounds, "status": CheckStatus.of(passed)}
        return self._finish(result, "frechet.json", payload)

    # ------------------------------------------------------------------
    # Constants
    # ------------------------------------------------------------------

    def estimate_constants(self) -> CommandResult:
        """
        The ledger with its sources, the empirical Lipschitz constants and the
        regularity diagnostic of the solved interface.

        Measured ``L_Gprime``/``L_Gsecond`` are recorded in the ledger unless
        the config fixes them.
        """
        checks = self.config.checks
        overrides = self.config.constants
        reports = {
            kind: measure_lipschitz(kind, self.state, self.radius, self.ledger, checks.n_pairs, self.rng())
            for kind in KINDS
        }
        measured = {}
        if overrides.L_Gprime is None:
            measured["L_Gprime"] = reports["Gprime"].observed
            self._sources["L_Gprime"] = ESTIMATED
        if overrides.L_Gsecond is None:
            measured["L_Gsecond"] = reports["Gsecond"].observed
            self._sources["L_Gsecond"] = ESTIMATED
        self._ledger = self.ledger.with_overrides(**measured)

        pair, _ = self.state.solve_state(self.u0)
        s = 1.0 / self.ledger.q
        regularity = {
            "order": s,
            "exponent": self.data.p,
            "seminorm": gagliardo_seminorm(pair.gamma, s, self.data.p),
        }
        result = CommandResult("estimate-constants")
        rows = [report.to_dict() for report in reports.values()]
        result.artifacts.append(self._table("lipschitz.csv", pd.DataFrame(rows).drop(columns=["status"])))
        payload = {
            "C_A_parts": analytic_CA_parts(),
            "lipschitz": reports,
            "regularity": regularity,
            "feasibility": self.state.check_admissibility(self.u0, self.ledger),
        }
        return self._finish(result, "constants.json", payload)

    def report(self) -> CommandResult:
        """Run the state, adjoint, gradient, duality and constants commands into one JSON."""
        parts = [
            self.solve_state(),
            self.solve_adjoint(),
            self.check_gradient(),
            self.check_duality(),
            self.estimate_constants(),
        ]
        result = CommandResult("report", passed=all(p.passed for p in parts))
        for part in parts:
            result.artifacts.extend(part.artifacts)
        payload = {part.command: part.summary["result"] for part in parts}
        payload["status"] = CheckStatus.of(result.passed)
        return self._finish(result, "report.json", payload)

    # ------------------------------------------------------------------
    # Internal helpers
    # ------------------------------------------------------------------

    def _optimize(self) -> OptResult:
        return optimize(
            self.cost, self.u0, self.radius, self.config.opt_tol, self.config.max_opt_iter, self.ledger
        )

    def _target(self) -> ControlProfile:
        return self.data.gamma_d_curve(self.interval)

    def _direction(self, rng: np.random.Generator) -> ControlProfile:
        h = ControlProfile(self.interval, rng.standard_normal(self.interval.n_nodes))
        return h * (1.0 / self.state.l2_norm(h))

    def _table(self, name: str, rows: Any) -> Path:
        path = self.out_dir / name
        format_table(rows, path)
        return path

    def _finish(self, result: CommandResult, name: str, payload: Dict[str, Any]) -> CommandResult:
        result.summary = {
            "command": result.command,
            "status": CheckStatus.of(result.passed).value,
            "config": self.config.to_dict(),
            "ledger": self.ledger.to_dict(),
            "constant_sources": dict(self._sources),
            "result": payload,
        }
        path = self.out_dir / name
        format_report(result.summary, path)
        result.artifacts.append(path)
        return result

    # ------------------------------------------------------------------
    # Static builder helpers
    # ------------------------------------------------------------------

    @staticmethod
    def _build_meshes(config: RunConfig) -> Tuple[IntervalMesh, SquareMesh]:
        return IntervalMesh(config.n_interval), SquareMesh(config.n_square)

    @staticmethod
    def _build_settings(config: RunConfig) -> SolverSettings:
        return SolverSettings(
            fp_tol=config.fp_tol,
            res_tol=config.res_tol,
            max_iter=config.max_fp_iter,
            weight_floor=config.weight_floor,
            method=config.linear_solver,
        )

    @staticmethod
    def _build_ledger(
        config: RunConfig,
        data: ProblemData,
        interval: IntervalMesh,
        square: SquareMesh,
    ) -> Tuple[ConstantsLedger, Dict[str, str]]:
        """
        Base constants from the overrides, else from their defaults and estimators.

        Returns:
            The complete ledger and the source of every base constant
            (``override``, ``estimated`` or ``surrogate``).
        """
        overrides = config.constants
        sources: Dict[str, str] = {}

        def pick(name: str, fallback: Callable[[], float], source: str) -> float:
            value = getattr(overrides, name)
            if value is not None:
                sources[name] = OVERRIDE
                return value
            sources[name] = source
            return fallback()

        def beta() -> float:
            estimate = estimate_beta(square, data.p)
            solver = StateSolver(data, interval, square, RunOrchestrator._build_settings(config))
            try:
                pair, _ = solver.solve_state(data.u0_profile(interval))
            except (ConvergenceError, DegenerateGeometryError) as exc:
                logger.warning("beta kept at the flat estimate; the initial state did not solve: %s", exc)
                return estimate
            return max(estimate, estimate_beta(square, data.p, pair.gamma))

        ledger = ConstantsLedger(
            kappa=data.kappa,
            lam=data.lam,
            p=data.p,
            alpha=pick("alpha", lambda: default_alpha(data.kappa), SURROGATE),
            beta=pick("beta", beta, ESTIMATED),
            C_A=pick("C_A", lambda: analytic_CA(overrides.C_A_combine), SURROGATE),
            C_E=pick("C_E", lambda: compute_CE(interval, square, data.q, seed=config.seed), ESTIMATED),
            theta1=overrides.theta1,
            theta2=overrides.theta2,
            L_Gprime=overrides.L_Gprime,
            L_Gsecond=overrides.L_Gsecond,
        )
        for name in ("theta1", "theta2", "L_Gprime", "L_Gsecond"):
            if getattr(overrides, name) is not None:
                sources[name] = OVERRIDE
        ledger = compute_thresholds(ledger, data.data_norms(interval, square))
        return ledger, sources


def _observed_order(eps: np.ndarray, errors: np.ndarray) -> List[float]:
    """``log(e_k / e_{k-1}) / log(eps_k / eps_{k-1})``; NaN where undefined."""
    orders = [math.nan]
    for k in range(1, len(eps)):
        if errors[k] > 0.0 and errors[k - 1] > 0.0:
            orders.append(math.log(errors[k] / errors[k - 1]) / math.log(eps[k] / eps[k - 1]))
        else:
            orders.append(math.nan)
    return orders
