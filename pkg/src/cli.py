"""
Command-line interface for the connected cruise control lab.
"""

from pathlib import Path
from typing import Dict, List, Optional, Tuple
import logging

import typer

from .config import PRESET_SCENARIOS, Config
from .controllers import CONTROLLER_NAMES
from .errors import ConfigurationError, DomainError, OrderingError, ScenarioParseError
from .ident import IdentProblem, fit_idm, ident_cost
from .mpc import safety_margin_profile
from .reporting import (
    Reporter,
    plot_energy_bars,
    plot_energy_sweep,
    plot_margin_profile,
    plot_phase,
    plot_timeseries,
)
from .simkit import (
    KINDS,
    MetricsCalculator,
    RunJob,
    RunResult,
    RunSummary,
    Scenario,
    generate_synthetic,
    load_scenario,
    run,
    run_batch,
    save_scenario,
)

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)

logger = logging.getLogger(__name__)

app = typer.Typer(help="Simulate, compare and calibrate connected cruise controllers.")

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_CONFIG = 2
EXIT_PARSE = 3
EXIT_COLLISION = 4
EXIT_FALLBACK = 5

# (controller, baseline) pairs reported by ``compare``
COMPARISONS: Tuple[Tuple[str, str], ...] = (
    ("rccc", "racc"),
    ("pacc", "racc"),
    ("pccc", "pacc"),
    ("pccc", "rccc"),
)
CONNECTED = ("rccc", "pccc")

# synthetic kind -> preset of the same traffic type
PRESET_SCENARIOS_INV = {kind: preset for preset, kind in PRESET_SCENARIOS.items()}


def exit_code_for(error: Exception) -> int:
    """Map an exception to the documented exit code."""
    if isinstance(error, (ScenarioParseError, OrderingError, FileNotFoundError)):
        return EXIT_PARSE
    if isinstance(error, (ConfigurationError, DomainError)):
        return EXIT_CONFIG
    return EXIT_UNEXPECTED


def _fail(error: Exception, action: str) -> typer.Exit:
    code = exit_code_for(error)
    if code == EXIT_UNEXPECTED:
        logger.exception(f"Unexpected error during {action}: {error}")
    else:
        logger.error(f"Error during {action}: {error}")
    return typer.Exit(code)


def _configure_logging(config: Config) -> None:
    log = config.get_logging_config()
    handlers: List[logging.Handler] = [logging.StreamHandler()]
    if log.file:
        Path(log.file).parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(log.file))
    logging.basicConfig(level=log.level.upper(), format=log.format, handlers=handlers, force=True)


def _load_config(config_file: Optional[str], preset: Optional[str]) -> Config:
    config = Config(config_file=config_file, preset=preset)
    _configure_logging(config)
    logger.info(f"Using preset {config.preset}")
    return config


def _resolve_scenario(config: Config, scenario: Optional[str], synthetic: Optional[str],
                      seed: int) -> Scenario:
    """Exactly one of ``scenario`` (CSV path) and ``synthetic`` (kind) must be set."""
    if (scenario is None) == (synthetic is None):
        raise ConfigurationError("give exactly one of --scenario and --synthetic")
    if scenario is not None:
        return load_scenario(scenario)
    if synthetic not in KINDS:
        raise ConfigurationError(f"unknown synthetic scenario {synthetic!r}, expected one of {KINDS}")
    sim = config.lab.simulation
    return generate_synthetic(
        synthetic,
        seed=seed,
        chain_len=sim.chain_len,
        idm=config.idm_params(),
        duration=sim.duration,
        dt=sim.dt,
        length=config.lab.vehicle.length,
        u_floor=config.lab.vehicle.u_min,
    )


def _connected_index(scenario: Scenario, nh: Optional[int]) -> int:
    """Connected vehicle L = n_h + 2, by default the farthest vehicle V2V reaches."""
    if nh is None:
        return max(scenario.connectivity)
    if nh < 0:
        raise ConfigurationError(f"hidden vehicle count must be non-negative, got {nh}")
    index = nh + 2
    if index > scenario.n_vehicles:
        raise ConfigurationError(
            f"{nh} hidden vehicles need {index} vehicles, scenario has {scenario.n_vehicles}"
        )
    return index


def _parse_nh(nh: Optional[str]) -> Tuple[Optional[int], bool]:
    """``--nh`` is an integer or ``sweep``."""
    if nh is None:
        return None, False
    if nh.strip().lower() == "sweep":
        return None, True
    try:
        return int(nh), False
    except ValueError:
        raise ConfigurationError(f"--nh must be an integer or 'sweep', got {nh!r}")


def _calculator(config: Config) -> MetricsCalculator:
    return MetricsCalculator(
        d_min=config.lab.mpc.d_min,
        tau_min=config.lab.mpc.tau_min,
        audit_threshold=config.lab.simulation.audit_threshold,
        estimator_warmup=config.lab.simulation.estimator_warmup,
    )


def _outcome_code(config: Config, results: List[RunResult]) -> int:
    """Collision beats solver trouble; both beat success."""
    if any(r.failed for r in results):
        return EXIT_COLLISION
    threshold = config.lab.simulation.fallback_threshold
    for r in results:
        if len(r) and r.fallback_count / len(r) > threshold:
            logger.warning(
                f"{r.controller}: {r.fallback_count} solver fallbacks in {len(r)} steps "
                f"exceed threshold {threshold:.2%}"
            )
            return EXIT_FALLBACK
    return EXIT_OK


@app.command()
def simulate(
    scenario: Optional[str] = typer.Option(None, help="Scenario CSV file"),
    synthetic: Optional[str] = typer.Option(None, help=f"Synthetic scenario kind: {', '.join(KINDS)}"),
    controller: str = typer.Option("pccc", help=f"Controller: {', '.join(CONTROLLER_NAMES)}"),
    preset: Optional[str] = typer.Option(None, help="Parameter preset: freeflow, step or congested"),
    config: Optional[str] = typer.Option(None, "--config", help="YAML configuration file"),
    nh: Optional[str] = typer.Option(None, help="Hidden vehicles between vehicle 1 and the connected vehicle"),
    seed: int = typer.Option(0, help="Seed of synthetic scenarios"),
    out: str = typer.Option("out", help="Output directory"),
):
    """Run one controller against one scenario and write result, summary and plots."""
    try:
        cfg = _load_config(config, preset)
        scen = _resolve_scenario(cfg, scenario, synthetic, seed)
        n_hidden, sweep = _parse_nh(nh)
        if sweep:
            raise ConfigurationError("--nh sweep is only available for compare")
        ctrl = cfg.build_controller(controller, _connected_index(scen, n_hidden))
        result = run(scen, ctrl, cfg.vehicle_params(), policy=cfg.range_params())
        summary = _calculator(cfg).calculate(result)

        reporter = Reporter({"out_dir": out})
        reporter.write_result(result)
        reporter.write_summary(summary, scen.dt, extra={"preset": cfg.preset, "seed": seed})
        d_min, tau_min = cfg.lab.mpc.d_min, cfg.lab.mpc.tau_min
        plot_phase(result, reporter.path("phase.svg"), cfg.range_params(), d_min, tau_min)
        plot_timeseries(result, reporter.path("timeseries.svg"), d_min, tau_min)
        if result.qp_status is not None:
            mpc = cfg.mpc_params()
            plot_margin_profile(safety_margin_profile(mpc), mpc.dt, reporter.path("margin.svg"))

        code = _outcome_code(cfg, [result])
    except typer.Exit:
        raise
    except Exception as e:
        raise _fail(e, "simulation")

    logger.info(f"{controller.upper()}: w = {summary.energy:.4f} J/kg, outputs in {out}")
    if code != EXIT_OK:
        raise typer.Exit(code)


@app.command()
def compare(
    scenario: Optional[str] = typer.Option(None, help="Scenario CSV file"),
    synthetic: Optional[str] = typer.Option(None, help=f"Synthetic scenario kind: {', '.join(KINDS)}"),
    controller: str = typer.Option(",".join(CONTROLLER_NAMES), help="Comma-separated controllers"),
    preset: Optional[str] = typer.Option(None, help="Parameter preset: freeflow, step or congested"),
    config: Optional[str] = typer.Option(None, "--config", help="YAML configuration file"),
    nh: Optional[str] = typer.Option(None, help="Hidden vehicle count or 'sweep'"),
    seed: int = typer.Option(0, help="Seed of synthetic scenarios"),
    out: str = typer.Option("out", help="Output directory"),
    workers: Optional[int] = typer.Option(None, help="Worker processes (default CCC_WORKERS)"),
):
    """Compare energy across controllers and, with --nh sweep, hidden-vehicle counts."""
    try:
        cfg = _load_config(config, preset)
        names = [name.strip().lower() for name in controller.split(",") if name.strip()]
        if len(set(names)) < 2:
            raise ConfigurationError("compare needs at least two distinct controllers")
        names = list(dict.fromkeys(names))
        scen = _resolve_scenario(cfg, scenario, synthetic, seed)
        n_hidden, sweep = _parse_nh(nh)
        main_index = _connected_index(scen, n_hidden)

        jobs: List[RunJob] = []
        for name in names:
            indices = [main_index]
            if sweep and name in CONNECTED:
                indices = list(range(3, scen.n_vehicles + 1))
                if main_index not in indices:
                    indices.append(main_index)
            for index in indices:
                jobs.append(RunJob(
                    key=(name, index - 2),
                    scenario=scen,
                    controller=cfg.build_controller(name, index),
                    plant=cfg.vehicle_params(),
                    policy=cfg.range_params(),
                ))
        results = run_batch(jobs, workers=workers or cfg.workers)

        calculator = _calculator(cfg)
        main_hidden = main_index - 2
        summaries: Dict[str, RunSummary] = {
            name: calculator.calculate(results[(name, main_hidden)]) for name in names
        }

        reporter = Reporter({"out_dir": out})
        energy = reporter.write_energy_table(summaries)
        savings = reporter.write_savings_table(summaries, COMPARISONS)
        reporter.write_comparison_text(energy, savings)
        plot_energy_bars(
            {name: s.energy for name, s in summaries.items()},
            reporter.path("energy.svg"),
            title=f"{scen.label}, preset {cfg.preset}",
        )
        for row in savings.itertuples(index=False):
            logger.info(f"{row.controller.upper()} saves {row.savings_pct:.1f}% vs {row.baseline.upper()}")

        if sweep:
            hidden = list(range(1, scen.n_vehicles - 1))
            rows = []
            series: Dict[str, List[float]] = {}
            for name in names:
                if name not in CONNECTED:
                    continue
                series[name] = []
                for h in hidden:
                    s = calculator.calculate(results[(name, h)])
                    series[name].append(s.energy)
                    rows.append({
                        "controller": name,
                        "n_hidden": h,
                        "connected_index": h + 2,
                        "energy": s.energy,
                        "failed": s.failed,
                        "estimator_accuracy": s.estimator_accuracy,
                    })
            reporter.write_sweep_table(rows)
            baselines = {name: summaries[name].energy for name in names if name not in CONNECTED}
            plot_energy_sweep(hidden, series, reporter.path("energy_sweep.svg"), baselines)

        code = _outcome_code(cfg, list(results.values()))
    except typer.Exit:
        raise
    except Exception as e:
        raise _fail(e, "comparison")

    if code != EXIT_OK:
        raise typer.Exit(code)


@app.command()
def identify(
    scenario: Optional[str] = typer.Option(None, help="Chain data CSV file"),
    synthetic: Optional[str] = typer.Option(None, help=f"Synthetic scenario kind: {', '.join(KINDS)}"),
    preset: Optional[str] = typer.Option(None, help="Preset whose IDM generates synthetic data"),
    config: Optional[str] = typer.Option(None, "--config", help="YAML configuration file"),
    seed: int = typer.Option(0, help="Seed of the multi-start search and synthetic data"),
    out: str = typer.Option("out", help="Output directory"),
    workers: Optional[int] = typer.Option(None, help="Worker processes (default CCC_WORKERS)"),
):
    """Fit IDM parameters to recorded car following."""
    try:
        cfg = _load_config(config, preset)
        scen = _resolve_scenario(cfg, scenario, synthetic, seed)
        problem = IdentProblem.from_scenario(scen, u_floor=cfg.lab.vehicle.u_min)
        ident = cfg.lab.ident
        fit = fit_idm(
            problem,
            seed=seed,
            n_starts=ident.n_starts,
            max_evaluations=ident.max_evaluations,
            mesh_tol=ident.mesh_tol,
            workers=workers or cfg.workers,
        )
        reference = ident_cost(cfg.idm_params(), problem) if synthetic is not None else None

        reporter = Reporter({"out_dir": out})
        reporter.write_idm_fragment(fit.params)
        reporter.write_fit_report(fit, reference_cost=reference)
    except typer.Exit:
        raise
    except Exception as e:
        raise _fail(e, "identification")

    logger.info(f"Identified IDM with cost {fit.cost:.4f} m, outputs in {out}")


@app.command()
def generate(
    kind: str = typer.Argument(..., help=f"Scenario kind: {', '.join(KINDS)}"),
    path: str = typer.Argument(..., help="Output CSV path"),
    preset: Optional[str] = typer.Option(None, help="Preset whose IDM drives the followers"),
    config: Optional[str] = typer.Option(None, "--config", help="YAML configuration file"),
    seed: int = typer.Option(0, help="Scenario seed"),
):
    """Write a synthetic scenario CSV with its metadata sidecar."""
    try:
        cfg = _load_config(config, preset or PRESET_SCENARIOS_INV.get(kind))
        scen = _resolve_scenario(cfg, None, kind, seed)
        save_scenario(scen, path)
    except typer.Exit:
        raise
    except Exception as e:
        raise _fail(e, "scenario generation")

    logger.info(f"Scenario written to {path}")


if __name__ == "__main__":
    app()
