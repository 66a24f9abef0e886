"""Batch verification suites behind a single command-line entry point.

Subcommands: verify-clifford, verify-identity, dispersion, evolve,
simulate, report.  Every record written carries the suite name, the
effective-configuration hash, seed, constants, backend, and the branch
choices, so outputs are self-describing; re-running a command with an
identical configuration reproduces the JSON-lines files byte for byte.

Exit codes: 0 all checks pass, 1 at least one check failed,
2 usage/configuration error, 3 numerical blow-up.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import emfield, soc, spectrum
from .clifford import DIRAC, METRIC_DIAG, mdot
from .config import ConfigError, RunConfig, load_config_file
from .grid import SpacetimeGrid, random_band_limited
from .operators import (factorization_discrepancy, factored_rhs, fock_rhs,
                        gauge_discrepancy_prediction)
from .report import read_jsonl, summarize, write_csv, write_jsonl, write_meta

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_BLOWUP = 3


def _grid_label(grid: SpacetimeGrid) -> str:
    return "x".join(str(n) for n in grid.points)


def _base_record(suite: str, cfg: RunConfig, **fields) -> dict:
    rec = {"suite": suite, "check": fields.pop("check")}
    rec.update(fields)
    rec.update(cfg.provenance())
    return rec


# -- clifford ----------------------------------------------------------------

def clifford_records(cfg: RunConfig, gammas=None) -> list[dict]:
    """All gamma-algebra identity checks as records; exact unless noted."""
    g = np.asarray(DIRAC.gammas if gammas is None else gammas, dtype=np.complex128)
    eye = np.eye(4, dtype=np.complex128)
    records = []

    for mu in range(4):
        for nu in range(4):
            anti = g[mu] @ g[nu] + g[nu] @ g[mu]
            want = (2 * METRIC_DIAG[mu] if mu == nu else 0) * eye
            resid = float(np.abs(anti - want).max())
            records.append(_base_record("verify-clifford", cfg, check="anticommutator",
                                        mu=mu, nu=nu, residual=resid, tolerance=0.0,
                                        **{"pass": resid == 0.0}))

    for mu in range(4):
        for nu in range(4):
            smn = 0.5j * (g[mu] @ g[nu] - g[nu] @ g[mu])
            snm = 0.5j * (g[nu] @ g[mu] - g[mu] @ g[nu])
            resid = float(np.abs(smn + snm).max())
            records.append(_base_record("verify-clifford", cfg, check="spin_antisymmetry",
                                        mu=mu, nu=nu, residual=resid, tolerance=0.0,
                                        **{"pass": resid == 0.0}))

    for nu in range(4):
        for mu in range(4):
            # gamma^nu gamma^mu = eta^{numu} I + 1/2 [gamma^nu, gamma^mu]
            lhs = g[nu] @ g[mu]
            rhs = (METRIC_DIAG[nu] if mu == nu else 0) * eye \
                + 0.5 * (g[nu] @ g[mu] - g[mu] @ g[nu])
            resid = float(np.abs(lhs - rhs).max())
            records.append(_base_record("verify-clifford", cfg, check="product_identity",
                                        mu=mu, nu=nu, residual=resid, tolerance=0.0,
                                        **{"pass": resid == 0.0}))

    for mu in range(4):
        target = g[mu] if mu == 0 else -g[mu]
        resid = float(np.abs(g[mu].conj().T - target).max())
        records.append(_base_record("verify-clifford", cfg, check="hermiticity",
                                    mu=mu, nu=mu, residual=resid, tolerance=0.0,
                                    **{"pass": resid == 0.0}))

    rng = np.random.default_rng(cfg.int("seed"))
    n = cfg.int("clifford.det_samples")
    worst_sq = 0.0
    worst_det = 0.0
    for _ in range(n):
        v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        sl = np.tensordot(v, g, axes=(0, 0))
        worst_sq = max(worst_sq, float(np.abs(sl @ sl - mdot(v, v) * eye).max()))
        a = complex(rng.standard_normal() + 1j * rng.standard_normal())
        det = complex(np.linalg.det(sl - a * eye))
        want = (mdot(v, v) - a * a) ** 2
        scale = max(abs(want), 1.0)
        worst_det = max(worst_det, abs(det - want) / scale)
    records.append(_base_record("verify-clifford", cfg, check="slash_square",
                                samples=n, residual=worst_sq, tolerance=1e-12,
                                **{"pass": worst_sq <= 1e-12}))
    det_tol = cfg.float("clifford.det_tolerance")
    records.append(_base_record("verify-clifford", cfg, check="slash_determinant",
                                samples=n, residual=worst_det, tolerance=det_tol,
                                **{"pass": worst_det <= det_tol}))
    return records


# -- identity ----------------------------------------------------------------

def identity_potentials(grid: SpacetimeGrid) -> list[tuple[str, emfield.PotentialSpec]]:
    """Four divergence-free potentials representable on the active axes."""
    k_wave = grid.commensurate_wavevector([1, 1])
    k_space = grid.commensurate_wavevector([0, 2])
    return [
        ("free", emfield.free()),
        ("constant_A", emfield.constant_potential([0.8, -0.3, 0.2, 0.0])),
        ("em_wave_lightlike", emfield.em_plane_wave([0.0, 0.0, 0.5, 0.0], k_wave)),
        ("em_wave_spacelike", emfield.em_plane_wave([0.0, 0.0, 0.0, 0.4], k_space)),
    ]


def gauge_violating_potential(grid: SpacetimeGrid) -> emfield.PotentialSpec:
    k = grid.commensurate_wavevector([1, 0])
    return emfield.custom_wave([0.3, 0.0, 0.0, 0.0], k)


def identity_records(cfg: RunConfig) -> list[dict]:
    consts = cfg.constants()
    grid = cfg.grid()
    backend = cfg.str("backend")
    tol = cfg.float("identity.tolerance")
    max_mode = cfg.int("identity.max_mode")
    n_fields = cfg.int("identity.n_fields")
    rng = np.random.default_rng(cfg.int("seed"))
    glabel = _grid_label(grid)
    records = []

    configured = cfg.potential()
    if configured is not None:
        sweep = [(configured.name, configured)] if emfield.is_lorenz_gauge(configured) else []
        negatives = [] if emfield.is_lorenz_gauge(configured) \
            else [(configured.name, configured)]
    else:
        sweep = identity_potentials(grid)
        negatives = [("negative-gauge", gauge_violating_potential(grid))]

    for name, pot in sweep:
        for i in range(n_fields):
            phi = random_band_limited(grid, max_mode, rng, spinor=True)
            rel, _, _ = factorization_discrepancy(phi, pot, consts, backend=backend)
            records.append(_base_record(
                "verify-identity", cfg, check="factored_vs_fock", potential=name,
                field_index=i, grid=glabel, residual=rel, tolerance=tol,
                **{"pass": rel <= tol}))

    for name, pot in negatives:
        for i in range(cfg.int("identity.gauge_fields")):
            phi = random_band_limited(grid, max_mode, rng, spinor=True)
            diff = factored_rhs(phi, pot, consts, backend=backend).values \
                - fock_rhs(phi, pot, consts, backend=backend).values
            pred = gauge_discrepancy_prediction(phi, pot, consts).values
            scale = float(np.abs(pred).max())
            resid = float(np.abs(diff - pred).max()) / scale
            records.append(_base_record(
                "verify-identity", cfg, check="gauge_discrepancy_law", potential=name,
                field_index=i, grid=glabel, residual=resid, tolerance=tol,
                **{"pass": resid <= tol}))
    return records


# -- dispersion --------------------------------------------------------------

def dispersion_records(cfg: RunConfig) -> tuple[list[dict], list[tuple]]:
    consts = cfg.constants()
    tol = cfg.float("dispersion.det_tolerance")
    n = cfg.int("dispersion.n_points")
    kmax = cfg.float("dispersion.kmax")
    eye = np.eye(4, dtype=np.complex128)
    records, rows = [], []
    for k1 in np.linspace(-kmax, kmax, n):
        roots = spectrum.dispersion_solve([k1, 0.0, 0.0], consts)
        for k0 in roots:
            k = np.array([k0, k1, 0.0, 0.0])
            det = complex(np.linalg.det(consts.hbar * DIRAC.slash(k) - consts.mc * eye))
            gap = consts.hbar ** 2 * mdot(k, k).real - consts.mass_shell
            ok = abs(det) <= tol
            records.append(_base_record(
                "dispersion", cfg, check="root_on_shell", k1=float(k1), k0=float(k0),
                residual=abs(det), tolerance=tol, **{"pass": ok}))
            rows.append((float(k1), float(k0), gap, abs(det), ok))
    return records, rows


# -- evolve ------------------------------------------------------------------

def evolve_records(cfg: RunConfig) -> tuple[list[dict], list[tuple]]:
    consts = cfg.constants()
    n_gaps = cfg.int("evolve.n_gaps")
    gap_range = cfg.float("evolve.gap_range")
    dtau = cfg.float("evolve.dtau")
    steps = cfg.int("evolve.steps")
    stat_tol = cfg.float("evolve.stationary_tol")
    freq_tol = cfg.float("evolve.frequency_tol")
    gaps = np.linspace(-gap_range, gap_range, n_gaps)
    sweep = spectrum.delta_sweep(cfg.float("evolve.k1"), gaps, consts, dtau, steps,
                                 stationary_tol=stat_tol)
    # drift bound stat_tol translates into a gap threshold via 2 sin(|D| T / 2 hbar m)
    total_tau = steps * dtau
    gap_threshold = stat_tol * consts.hbar * consts.m / total_tau
    records, rows = [], []
    for rec in sweep:
        expect_stationary = abs(rec["delta"]) <= gap_threshold
        freq_err = abs(rec["measured_frequency"] - rec["closed_form_frequency"])
        freq_ok = freq_err <= freq_tol * max(1.0, abs(rec["closed_form_frequency"]))
        ok = (rec["stationary"] == expect_stationary) and freq_ok
        records.append(_base_record(
            "evolve", cfg, check="mode_stationarity", k0=rec["k0"], k1=rec["k1"],
            delta=rec["delta"], measured_frequency=rec["measured_frequency"],
            closed_form_frequency=rec["closed_form_frequency"],
            stationary=rec["stationary"], residual=freq_err, tolerance=freq_tol,
            **{"pass": ok}))
        rows.append((rec["k0"], rec["k1"], rec["delta"], rec["measured_frequency"],
                     rec["stationary"]))
    return records, rows


# -- simulate ----------------------------------------------------------------

def _configured_control(cfg: RunConfig, consts) -> soc.ControlField:
    kind = cfg.str("simulate.control")
    if kind == "zero":
        return soc.zero_control()
    if kind == "constant":
        return soc.constant_control(np.array(cfg.floats("simulate.control_w")))
    if kind == "plane_wave":
        k = np.array(cfg.floats("simulate.control_w"))
        return soc.optimal_control_mode(k, consts)
    raise ConfigError(f"simulate.control must be zero|constant|plane_wave, got {kind!r}")


def simulate_records(cfg: RunConfig) -> tuple[list[dict], list[tuple], bool]:
    consts = cfg.constants()
    seed = cfg.int("seed")
    ds = cfg.float("simulate.ds")
    n_paths = cfg.int("simulate.n_paths")
    n_sigma = cfg.float("simulate.n_sigma")
    records = []

    diff = soc.make_diffusion(consts)
    sq_resid = float(np.abs(diff.sigma ** 2 - diff.squares).max())
    records.append(_base_record("simulate", cfg, check="diffusion_squares",
                                residual=sq_resid, tolerance=0.0,
                                **{"pass": sq_resid == 0.0}))

    for rpt in soc.run_generator_battery(consts, ds=ds, n_paths=n_paths,
                                         seed=seed, n_sigma=n_sigma):
        records.append(_base_record(
            "simulate", cfg, check="generator", function=rpt.label,
            estimate=rpt.estimate, exact=rpt.exact, residual=rpt.abs_error,
            stderr=rpt.stderr, n_sigma=n_sigma, n_paths=n_paths, ds=ds,
            tolerance=n_sigma * rpt.stderr, **{"pass": rpt.passed}))

    # straight-line motion with diffusion disabled, against a literal recursion
    w4 = np.array([0.4, -0.1, 0.25, 0.0], dtype=np.complex128)
    params = soc.EnsembleParams(n_paths=3, steps=64, ds=1.0 / 512)
    ens = soc.simulate(params, soc.constant_control(w4), None, consts, seed,
                       diffusion=soc.zero_diffusion())
    z = np.broadcast_to(params.z0, (3, 4)).copy()
    for _ in range(64):
        z = z + w4 * params.ds
    exact_line = bool(np.array_equal(ens.paths[:, -1, :], z))
    records.append(_base_record("simulate", cfg, check="straight_line_bitwise",
                                residual=0.0 if exact_line else 1.0, tolerance=0.0,
                                **{"pass": exact_line}))

    # bitwise reproducibility of a seeded ensemble
    rp = soc.EnsembleParams(n_paths=cfg.int("simulate.repro_paths"),
                            steps=cfg.int("simulate.repro_steps"), ds=ds)
    e1 = soc.simulate(rp, soc.zero_control(), None, consts, seed)
    e2 = soc.simulate(rp, soc.zero_control(), None, consts, seed)
    repro = bool(np.array_equal(e1.paths, e2.paths))
    records.append(_base_record("simulate", cfg, check="fixed_seed_bitwise",
                                residual=0.0 if repro else 1.0, tolerance=0.0,
                                **{"pass": repro}))

    # per-component Re/Im correlation pattern of the increments
    dz = e1.paths[:, 1, :] - e1.paths[:, 0, :]
    expected_sign = np.array([1.0, -1.0, -1.0, -1.0]) * consts.epsilon
    worst = 0.0
    for mu in range(4):
        re, im = dz[:, mu].real, dz[:, mu].imag
        corr = float(np.corrcoef(re, im)[0, 1])
        worst = max(worst, abs(corr - expected_sign[mu]))
    records.append(_base_record("simulate", cfg, check="reim_correlation_signs",
                                residual=worst, tolerance=1e-12,
                                **{"pass": worst <= 1e-12}))

    # diffusion-only variance: Var[Re z_mu] = Var[Im z_mu] = |sigma|^2 s / 2
    vp = soc.EnsembleParams(n_paths=cfg.int("simulate.variance_paths"),
                            steps=cfg.int("simulate.variance_steps"), ds=ds,
                            store_controls=False)
    ev = soc.simulate(vp, soc.zero_control(), None, consts, seed + 1)
    total_s = vp.steps * ds
    rel_tol = 5.0 / np.sqrt(vp.n_paths)
    worst = 0.0
    for mu in range(4):
        want = abs(diff.sigma[mu]) ** 2 * total_s / 2
        for part in (ev.paths[:, -1, mu].real, ev.paths[:, -1, mu].imag):
            got = float(np.var(part, ddof=1))
            worst = max(worst, abs(got - want) / want)
    records.append(_base_record("simulate", cfg, check="diffusion_variance",
                                residual=worst, tolerance=rel_tol,
                                **{"pass": worst <= rel_tol}))

    # action of a deterministic on-shell path: S = -m c^2 (tau_f - tau_i)
    ap = soc.EnsembleParams(n_paths=2, steps=1024, ds=1.0 / 1024)
    on_shell_w = np.zeros(4, dtype=np.complex128)
    on_shell_w[0] = consts.c
    ea = soc.simulate(ap, soc.constant_control(on_shell_w), None, consts, seed,
                      diffusion=soc.zero_diffusion())
    est = soc.accumulate_action(ea, emfield.free(), consts)
    want = -consts.m * consts.c ** 2 * 1.0
    act_resid = abs(est.mean - want)
    records.append(_base_record("simulate", cfg, check="action_constant_onshell",
                                mean=est.mean, residual=act_resid, tolerance=0.0,
                                **{"pass": act_resid == 0.0}))

    # user-configured ensemble (blow-up detection hooks in here)
    uc = _configured_control(cfg, consts)
    up = soc.EnsembleParams(n_paths=cfg.int("simulate.repro_paths"),
                            steps=cfg.int("simulate.repro_steps"), ds=ds)
    ue = soc.simulate(up, uc, None, consts, seed + 2)
    n_trunc = int(np.count_nonzero(ue.truncated))
    records.append(_base_record("simulate", cfg, check="configured_ensemble",
                                control=uc.label, n_paths=up.n_paths, steps=up.steps,
                                truncated_paths=n_trunc, residual=float(n_trunc),
                                tolerance=0.0, **{"pass": n_trunc == 0}))

    rows = []
    if cfg.bool("simulate.dump_paths"):
        n_dump = min(cfg.int("simulate.dump_max_paths"), ue.n_paths)
        for p in range(n_dump):
            for s in range(ue.steps + 1):
                z = ue.paths[p, s]
                rows.append((p, s, s * ds,
                             z[0].real, z[0].imag, z[1].real, z[1].imag,
                             z[2].real, z[2].imag, z[3].real, z[3].imag))
    return records, rows, n_trunc > 0


# -- command wrappers ---------------------------------------------------------

def _write_suite(out: Path, name: str, records: list[dict], started: float,
                 csvs: dict[str, tuple[list[str], list[tuple]]] | None = None) -> None:
    write_jsonl(out / f"{name}.jsonl", records)
    for fname, (header, rows) in (csvs or {}).items():
        write_csv(out / fname, header, rows)
    write_meta(out / f"{name}_meta.json", name, elapsed=time.time() - started,
               extra={"records": len(records)})


def _exit_for(records: list[dict]) -> int:
    return EXIT_PASS if all(r.get("pass", False) for r in records) else EXIT_FAIL


def cmd_verify_clifford(cfg: RunConfig, out: Path, corrupt: bool = False) -> int:
    started = time.time()
    gammas = None
    if corrupt:  # negative-control mode: damage one entry and watch checks fail
        gammas = np.array(DIRAC.gammas)
        gammas[1, 0, 3] += 0.5
    records = clifford_records(cfg, gammas=gammas)
    _write_suite(out, "clifford", records, started)
    return _exit_for(records)


def cmd_verify_identity(cfg: RunConfig, out: Path) -> int:
    started = time.time()
    from .operators import OperatorError
    try:
        records = identity_records(cfg)
    except OperatorError as exc:  # configured potential unusable on this grid
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    _write_suite(out, "identity", records, started)
    return _exit_for(records)


def cmd_dispersion(cfg: RunConfig, out: Path) -> int:
    started = time.time()
    records, rows = dispersion_records(cfg)
    _write_suite(out, "dispersion", records, started,
                 csvs={"dispersion.csv": (["k1", "k0", "delta", "det_abs", "pass"], rows)})
    return _exit_for(records)


def cmd_evolve(cfg: RunConfig, out: Path) -> int:
    started = time.time()
    records, rows = evolve_records(cfg)
    _write_suite(out, "evolve", records, started,
                 csvs={"evolve_sweep.csv":
                       (["k0", "k1", "delta", "measured_frequency", "stationary"], rows)})
    return _exit_for(records)


def cmd_simulate(cfg: RunConfig, out: Path) -> int:
    started = time.time()
    records, rows, blew_up = simulate_records(cfg)
    csvs = {}
    if rows:
        header = ["path", "step", "s"]
        for mu in range(4):
            header += [f"z{mu}_re", f"z{mu}_im"]
        csvs["paths.csv"] = (header, rows)
    _write_suite(out, "simulate", records, started, csvs=csvs)
    if blew_up:
        return EXIT_BLOWUP
    return _exit_for(records)


def cmd_report(cfg: RunConfig, out: Path) -> int:
    started = time.time()
    files = sorted(p for p in out.glob("*.jsonl") if p.name != "summary.jsonl")
    if not files:
        print(f"report: no suite outputs found in {out}", file=sys.stderr)
        return EXIT_CONFIG
    all_records = []
    for path in files:
        all_records.extend(read_jsonl(path))
    by_suite = summarize(all_records)
    summary_records = []
    total_failed = 0
    for suite in sorted(by_suite):
        counts = by_suite[suite]
        total_failed += counts["failed"]
        summary_records.append({"suite": suite, **counts,
                                "pass": counts["failed"] == 0})
    write_jsonl(out / "summary.jsonl", summary_records)
    write_meta(out / "summary_meta.json", "report", elapsed=time.time() - started,
               extra={"sources": [p.name for p in files]})
    width = max(len(s) for s in by_suite)
    print(f"{'suite':<{width}}  total  passed  failed")
    for rec in summary_records:
        print(f"{rec['suite']:<{width}}  {rec['total']:>5}  {rec['passed']:>6}  {rec['failed']:>6}")
    print(f"overall: {'PASS' if total_failed == 0 else 'FAIL'} "
          f"({len(all_records)} records, {total_failed} failures)")
    return EXIT_PASS if total_failed == 0 else EXIT_FAIL


# -- argument parsing ---------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="diracsoc",
        description="verification suites for the stochastic-optimal-control "
                    "formulation of relativistic spin-1/2 dynamics")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("verify-clifford", "verify-identity", "dispersion", "evolve",
                 "simulate", "report"):
        p = sub.add_parser(name)
        p.add_argument("--config", type=str, default=None, help="path to a key=value config file")
        p.add_argument("--out", type=str, default="diracsoc-out", help="output directory")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--backend", choices=("spectral", "fd4"), default=None)
        p.add_argument("--epsilon", choices=("+1", "-1"), default=None)
        if name == "verify-clifford":
            p.add_argument("--corrupt-gamma", action="store_true", help=argparse.SUPPRESS)
    return parser


_COMMANDS = {
    "verify-clifford": cmd_verify_clifford,
    "verify-identity": cmd_verify_identity,
    "dispersion": cmd_dispersion,
    "evolve": cmd_evolve,
    "simulate": cmd_simulate,
    "report": cmd_report,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        file_map = load_config_file(args.config) if args.config else {}
        overrides = {}
        if args.seed is not None:
            overrides["seed"] = str(args.seed)
        if args.backend is not None:
            overrides["backend"] = args.backend
        if args.epsilon is not None:
            overrides["constants.epsilon"] = str(int(args.epsilon))
        cfg = RunConfig.from_sources(file_map, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    command = _COMMANDS[args.command]
    if args.command == "verify-clifford":
        code = command(cfg, out, corrupt=args.corrupt_gamma)
    else:
        code = command(cfg, out)
    if args.command != "report" and code != EXIT_CONFIG:
        status = {EXIT_PASS: "PASS", EXIT_FAIL: "FAIL", EXIT_BLOWUP: "BLOW-UP"}[code]
        print(f"{args.command}: {status} (outputs in {out})")
    return code


if __name__ == "__main__":
    sys.exit(main())
