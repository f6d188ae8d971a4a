"""Command line interface: ``l1fade solve | converge | probe``."""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from l1fade import exprlang
from l1fade.analysis import convergence_sweep, max_error
from l1fade.caputo import check_alpha
from l1fade.errors import DomainError, MissingExactSolutionError
from l1fade.mesh import MeshKind
from l1fade.model import (
    BUILTIN_PROBLEMS,
    ExplicitSource,
    LaggedSource,
    LinearSource,
    ProblemSpec,
)
from l1fade.solver import perturbation_response, solve

logger = logging.getLogger("l1fade")

NUMERIC_KEYS = ("alpha", "K1", "K2", "a", "b", "T", "beta")
EXPRESSION_SLOTS = {
    "phi": ("x",),
    "varphi": ("t",),
    "psi": ("t",),
    "f": ("x", "t", "u"),
    "exact": ("x", "t"),
}
COST_EXPONENT_RANGE = (1.7, 2.3)


class ConfigError(ValueError):
    """Invalid run configuration; the message names the offending field."""


def fmt(value: float) -> str:
    """Shortest round-trip decimal form of a 64-bit float."""
    return repr(float(value))


# {{{ problem files


def read_problem_file(path: str | Path) -> dict[str, str]:
    """Read ``key = value`` lines; ``#`` starts a comment."""
    entries: dict[str, str] = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key or not value:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        if key not in NUMERIC_KEYS and key not in EXPRESSION_SLOTS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if key in entries:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        entries[key] = value
    return entries


def _number(entries: dict[str, str], key: str, default: Optional[float] = None) -> float:
    if key not in entries:
        if default is None:
            raise ConfigError(f"problem file is missing the numeric key {key!r}")
        return default
    try:
        value = float(entries[key])
    except ValueError:
        raise ConfigError(f"{key} must be a number, got {entries[key]!r}") from None
    if not math.isfinite(value):
        raise ConfigError(f"{key} must be finite, got {entries[key]!r}")
    return value


def _expression(entries: dict[str, str], key: str) -> exprlang.Expr:
    try:
        return exprlang.parse(entries[key], EXPRESSION_SLOTS[key])
    except exprlang.ExprError as exc:
        raise ConfigError(f"{key}: {exc}") from None


def problem_from_entries(
    entries: dict[str, str],
    alpha: Optional[float] = None,
    T: Optional[float] = None,
    name: str = "custom",
) -> ProblemSpec:
    """Build a problem from parsed file entries; *alpha*/*T* override the file."""
    for key in ("phi", "varphi", "psi"):
        if key not in entries:
            raise ConfigError(f"problem file is missing the expression key {key!r}")
    if alpha is None:
        alpha = _number(entries, "alpha")
    if T is None:
        T = _number(entries, "T", 1.0)

    phi = _expression(entries, "phi")
    varphi = _expression(entries, "varphi")
    psi = _expression(entries, "psi")

    if "f" in entries and "beta" in entries:
        raise ConfigError("give either an 'f' expression or a 'beta' reaction rate")
    if "beta" in entries:
        source = LinearSource(_number(entries, "beta"))
    elif "f" in entries:
        f = _expression(entries, "f")
        if "u" in exprlang.variables(f):
            source = LaggedSource(
                lambda x, t, u: exprlang.evaluate(f, {"x": x, "t": t, "u": u})
            )
        else:
            source = ExplicitSource(lambda x, t: exprlang.evaluate(f, {"x": x, "t": t}))
    else:
        raise ConfigError("problem file needs a source: 'f' or 'beta'")

    exact = None
    if "exact" in entries:
        ex = _expression(entries, "exact")
        exact = lambda x, t: exprlang.evaluate(ex, {"x": x, "t": t})  # noqa: E731

    try:
        return ProblemSpec(
            alpha=alpha,
            K1=_number(entries, "K1"),
            K2=_number(entries, "K2"),
            a=_number(entries, "a"),
            b=_number(entries, "b"),
            T=T,
            source=source,
            initial=lambda x: exprlang.evaluate(phi, {"x": x}),
            boundary_left=lambda t: exprlang.evaluate(varphi, {"t": t}),
            boundary_right=lambda t: exprlang.evaluate(psi, {"t": t}),
            exact=exact,
            name=name,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def load_problem(name_or_path: str, alpha: Optional[float], T: Optional[float]):
    if name_or_path in BUILTIN_PROBLEMS:
        if alpha is None:
            raise ConfigError(f"--alpha is required for built-in problem {name_or_path}")
        kwargs = {} if T is None else {"T": T}
        return BUILTIN_PROBLEMS[name_or_path](alpha, **kwargs)
    path = Path(name_or_path)
    if not path.is_file():
        raise ConfigError(
            f"--problem must be one of {', '.join(BUILTIN_PROBLEMS)} or a problem "
            f"file, got {name_or_path!r}"
        )
    return problem_from_entries(read_problem_file(path), alpha, T, name=path.stem)


# }}}

# {{{ configuration


@dataclass
class RunConfig:
    problem: str
    alphas: list[float] = field(default_factory=list)
    N: int = 20
    J: int = 20
    T: Optional[float] = None
    mesh: str = "quasi"
    out_dir: Path = Path(".")
    times: list[float] = field(default_factory=list)
    N_list: list[int] = field(default_factory=lambda: [10, 20, 40, 80])

    @property
    def alpha(self) -> Optional[float]:
        return self.alphas[0] if self.alphas else None

    def validate(self) -> None:
        for a in self.alphas:
            try:
                check_alpha(a)
            except DomainError as exc:
                raise ConfigError(f"alpha: {exc}") from None
        if self.N < 1:
            raise ConfigError(f"N must be a positive integer, got {self.N}")
        if self.J < 2:
            raise ConfigError(f"J must be an integer >= 2, got {self.J}")
        if self.T is not None and not (math.isfinite(self.T) and self.T > 0):
            raise ConfigError(f"T must be a positive time, got {self.T}")
        if self.mesh not in ("uniform", "quasi", "both"):
            raise ConfigError(f"mesh must be 'uniform' or 'quasi', got {self.mesh!r}")
        if not self.N_list or any(n < 1 for n in self.N_list):
            raise ConfigError(f"N-list must hold positive integers, got {self.N_list}")
        for coarse, fine in zip(self.N_list, self.N_list[1:]):
            if fine != 2 * coarse:
                raise ConfigError(f"N-list must double between entries, got {self.N_list}")

    def mesh_kinds(self) -> list[MeshKind]:
        if self.mesh == "both":
            return [MeshKind.QUASI_UNIFORM, MeshKind.UNIFORM]
        return [MeshKind(self.mesh)]


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _write_json(path: Path, payload: dict) -> None:
    _write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _problem_summary(problem: ProblemSpec) -> dict:
    return {
        "name": problem.name,
        "alpha": problem.alpha,
        "K1": problem.K1,
        "K2": problem.K2,
        "a": problem.a,
        "b": problem.b,
        "T": problem.T,
        "has_exact": problem.has_exact,
    }


# }}}

# {{{ commands


def cmd_solve(config: RunConfig) -> dict:
    """Solve once and write one profile CSV per requested time plus a summary."""
    if len(config.alphas) > 1:
        raise ConfigError("solve takes a single --alpha value")
    if config.mesh == "both":
        raise ConfigError("solve takes --mesh uniform or --mesh quasi")
    problem = load_problem(config.problem, config.alpha, config.T)
    times = config.times or [problem.T]
    for t in times:
        if not 0.0 <= t <= problem.T * (1.0 + 1.0e-12):
            raise ConfigError(f"times: {t!r} lies outside [0, {problem.T!r}]")

    start = time.perf_counter()
    history = solve(problem, config.N, config.J, config.mesh)
    wall = time.perf_counter() - start

    profiles = []
    x = history.grid.nodes
    for i, t in enumerate(times):
        t_node, u = history.profile(t)
        path = config.out_dir / f"profile_{i:03d}.csv"
        lines = [f"# t={fmt(t_node)}", "x,u"]
        lines += [f"{fmt(xj)},{fmt(uj)}" for xj, uj in zip(x, u)]
        _write_text(path, "\n".join(lines) + "\n")
        profiles.append({"requested": t, "t": t_node, "file": path.name})

    summary = {
        "command": "solve",
        "problem": _problem_summary(problem),
        "N": config.N,
        "J": config.J,
        "mesh": MeshKind(config.mesh).value,
        "profiles": profiles,
        "wall_time_s": wall,
    }
    if problem.exact is not None:
        summary["e_inf"] = max_error(history, problem.exact)
    _write_json(config.out_dir / "summary.json", summary)
    return summary


def _order_field(order: Optional[float]) -> str:
    return "" if order is None else fmt(order)


def cmd_converge(config: RunConfig) -> dict:
    """Temporal convergence tables at fixed ``J`` for each alpha and mesh kind."""
    alphas = config.alphas or [None]
    kinds = config.mesh_kinds()
    start = time.perf_counter()
    reports = {}
    for alpha in alphas:
        problem = load_problem(config.problem, alpha, config.T)
        if problem.exact is None:
            raise MissingExactSolutionError(
                f"problem {problem.name!r} has no exact solution; convergence tables "
                "need one (built-in example1/example2 or an 'exact' key)"
            )
        for kind in kinds:
            reports[problem.alpha, kind] = convergence_sweep(
                problem, config.J, config.N_list, kind
            )
    wall = time.perf_counter() - start

    files = []
    for (alpha, kind), report in reports.items():
        path = config.out_dir / f"converge_{kind.value}_alpha{fmt(alpha)}.csv"
        lines = ["N,e_inf,order"]
        lines += [f"{r.resolution},{fmt(r.e_inf)},{_order_field(r.order)}" for r in report.rows]
        _write_text(path, "\n".join(lines) + "\n")
        files.append(path.name)

    if len(kinds) == 2:
        lines = ["alpha,N,e_inf,order,e_inf_uniform,order_uniform"]
        for alpha in dict.fromkeys(a for a, _ in reports):
            quasi = reports[alpha, MeshKind.QUASI_UNIFORM].rows
            uniform = reports[alpha, MeshKind.UNIFORM].rows
            for q, u in zip(quasi, uniform):
                lines.append(
                    f"{fmt(alpha)},{q.resolution},{fmt(q.e_inf)},{_order_field(q.order)},"
                    f"{fmt(u.e_inf)},{_order_field(u.order)}"
                )
        _write_text(config.out_dir / "table.csv", "\n".join(lines) + "\n")
        files.append("table.csv")

    summary = {
        "command": "converge",
        "problem": config.problem,
        "J": config.J,
        "N_list": config.N_list,
        "mesh": [k.value for k in kinds],
        "files": files,
        "wall_time_s": wall,
    }
    _write_json(config.out_dir / "converge_summary.json", summary)
    return summary


def random_perturbation(J: int, amplitude: float, seed: int) -> np.ndarray:
    """Interior perturbation with max-norm *amplitude* and zero boundary values."""
    rho = np.zeros(J + 1)
    if amplitude == 0.0:
        return rho
    rng = np.random.default_rng(seed)
    rho[1:J] = rng.uniform(-1.0, 1.0, J - 1)
    rho[1:J] *= amplitude / np.max(np.abs(rho[1:J]))
    return rho


def probe_stability(config: RunConfig, amplitude: float = 1.0, seed: int = 0) -> dict:
    if config.mesh == "both":
        raise ConfigError("probe takes --mesh uniform or --mesh quasi")
    problem = load_problem(config.problem, config.alpha, config.T)
    rho0 = random_perturbation(config.J, amplitude, seed)
    norms = perturbation_response(problem, config.N, config.J, config.mesh, rho0)
    bound = norms[0] * (1.0 + 1.0e-12)
    passed = bool(np.all(norms <= bound))
    max_ratio = float(np.max(norms) / norms[0]) if norms[0] > 0 else 0.0

    lines = ["n,norm"] + [f"{n},{fmt(v)}" for n, v in enumerate(norms)]
    _write_text(config.out_dir / "stability.csv", "\n".join(lines) + "\n")
    report = {
        "command": "probe",
        "kind": "stability",
        "problem": _problem_summary(problem),
        "N": config.N,
        "J": config.J,
        "mesh": MeshKind(config.mesh).value,
        "seed": seed,
        "amplitude": amplitude,
        "max_ratio": max_ratio,
        "pass": passed,
    }
    _write_json(config.out_dir / "stability.json", report)
    return report


def measure_cost(
    problem: ProblemSpec,
    N_values: Sequence[int],
    J: int,
    mesh: str,
    repeats: int = 3,
) -> tuple[list[float], float]:
    """Best-of-*repeats* wall times per ``N`` and the fitted log-log slope."""
    solve(problem, min(N_values), J, mesh)  # warm up JIT caches and the allocator
    times = []
    for N in N_values:
        best = math.inf
        for _ in range(repeats):
            start = time.perf_counter()
            solve(problem, N, J, mesh)
            best = min(best, time.perf_counter() - start)
        times.append(best)
    slope = float(np.polyfit(np.log(N_values), np.log(times), 1)[0])
    return times, slope


def probe_cost(config: RunConfig, repeats: int = 3) -> dict:
    if config.mesh == "both":
        raise ConfigError("probe takes --mesh uniform or --mesh quasi")
    problem = load_problem(config.problem, config.alpha, config.T)
    N_values = [config.N, 2 * config.N, 4 * config.N]
    times, exponent = measure_cost(problem, N_values, config.J, config.mesh, repeats)
    lo, hi = COST_EXPONENT_RANGE
    report = {
        "command": "probe",
        "kind": "cost",
        "problem": _problem_summary(problem),
        "J": config.J,
        "mesh": MeshKind(config.mesh).value,
        "N": N_values,
        "wall_time_s": times,
        "exponent": exponent,
        "expected_range": [lo, hi],
        "pass": bool(lo <= exponent <= hi),
    }
    _write_json(config.out_dir / "cost.json", report)
    return report


# }}}

# {{{ argument parsing


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _common(p: argparse.ArgumentParser, N: int, J: int, mesh_choices) -> None:
    p.add_argument("--problem", required=True, help="example1|example2|example3 or a problem file")
    p.add_argument("--alpha", type=_float_list, default=[], help="fractional order in (0, 1)")
    p.add_argument("--N", type=int, default=N, help="number of time steps")
    p.add_argument("--J", type=int, default=J, help="number of space cells")
    p.add_argument("--T", type=float, default=None, help="final time (default: problem's)")
    p.add_argument("--mesh", choices=mesh_choices, default="quasi")
    p.add_argument("--out-dir", type=Path, default=Path("."))
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="l1fade",
        description="L1 / implicit finite-difference solver for time-fractional "
        "advection-diffusion-reaction equations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve and write solution profiles")
    _common(p, 20, 20, ("uniform", "quasi"))
    p.add_argument("--times", type=_float_list, default=[], help="output times, comma-separated")

    p = sub.add_parser("converge", help="temporal convergence table at fixed J")
    _common(p, 10, 100, ("uniform", "quasi", "both"))
    p.set_defaults(mesh="both")
    p.add_argument("--N-list", dest="N_list", type=_int_list, default=[10, 20, 40, 80])

    p = sub.add_parser("probe", help="stability or cost probe")
    p.add_argument("kind", choices=("stability", "cost"))
    _common(p, 400, 2000, ("uniform", "quasi"))
    p.add_argument("--amplitude", type=float, default=1.0, help="stability: max-norm of rho^0")
    p.add_argument("--seed", type=int, default=0, help="stability: RNG seed")
    p.add_argument("--repeats", type=int, default=3, help="cost: timing repeats per N")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    config = RunConfig(
        problem=args.problem,
        alphas=args.alpha,
        N=args.N,
        J=args.J,
        T=args.T,
        mesh=args.mesh,
        out_dir=args.out_dir,
        times=getattr(args, "times", []),
        N_list=getattr(args, "N_list", [10, 20, 40, 80]),
    )
    try:
        config.validate()
        if args.command == "solve":
            result = cmd_solve(config)
        elif args.command == "converge":
            result = cmd_converge(config)
        elif args.kind == "stability":
            result = probe_stability(config, args.amplitude, args.seed)
        else:
            result = probe_cost(config, args.repeats)
    except (ConfigError, MissingExactSolutionError, DomainError) as exc:
        print(f"l1fade: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"l1fade: I/O error: {exc}", file=sys.stderr)
        return 1
    except ArithmeticError as exc:
        print(f"l1fade: solver failure: {exc}", file=sys.stderr)
        return 1

    if args.command == "probe":
        verdict = "PASS" if result["pass"] else "FAIL"
        detail = (
            f"max ratio {result['max_ratio']:.6g}"
            if args.kind == "stability"
            else f"exponent {result['exponent']:.3f}"
        )
        print(f"{args.kind} probe: {verdict} ({detail})")
        return 0 if result["pass"] else 1
    return 0


if __name__ == "__main__":
    sys.exit(main())


# }}}
