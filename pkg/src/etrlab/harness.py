"""Config-driven Monte-Carlo experiments and report rendering.

Every trial owns a stream derived from (master_seed, cell index, trial
index), so reruns of a config are bit-identical regardless of worker
count: trials are merged by key before anything is written.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import comb

import numpy as np

from . import svgplot
from .config import ExperimentConfig
from .dictionaries import EffectiveSensing, build_dictionary, build_sensing, compose, mutual_coherence
from .errors import ConfigError, EnumerationTooLarge, IoFailure, SuiteFailure
from .etr import BatteryStats, classify_regime, inflation_ratio, sample_threshold
from .geometry import gamma_exact, geometry_report, perturbation_check
from .numerics import TOL
from .rng import RandomStream
from .solvers import SolverConfig, run_battery, solve
from .sparsity import effective_sparsity, plant, observe, representation_complexity

SUCCESS_REL_ERROR = 1e-4


@dataclass(frozen=True)
class ReportBundle:
    records_csv: str
    summary_md: str
    figures: tuple = ()


def recovery_success(alpha_hat: np.ndarray, alpha_star: np.ndarray) -> tuple[bool, bool, float]:
    """(success, support_match, rel_error); success needs both conditions."""
    star_norm = float(np.linalg.norm(alpha_star))
    rel = float(np.linalg.norm(alpha_hat - alpha_star)) / max(star_norm, 1e-300)
    truth_supp = set(np.flatnonzero(np.abs(alpha_star) > TOL.zero_tau * star_norm))
    hat_norm = float(np.linalg.norm(alpha_hat))
    hat_supp = set(np.flatnonzero(np.abs(alpha_hat) > TOL.zero_tau * max(hat_norm, 1.0)))
    match = hat_supp == truth_supp
    return match and rel <= SUCCESS_REL_ERROR, match, rel


def isotonic_fit(values: list[float]) -> list[float]:
    """Pool-adjacent-violators: closest non-decreasing sequence (L2)."""
    level = [float(v) for v in values]
    weight = [1.0] * len(values)
    out: list[tuple[float, float]] = []
    for lv, w in zip(level, weight):
        out.append((lv, w))
        while len(out) > 1 and out[-2][0] > out[-1][0]:
            (l1, w1), (l2, w2) = out[-2], out[-1]
            out[-2:] = [((l1 * w1 + l2 * w2) / (w1 + w2), w1 + w2)]
    fitted = []
    for lv, w in out:
        fitted.extend([lv] * int(round(w)))
    return fitted


def _run_tasks(tasks, workers: int):
    """tasks: list of (sort_key, callable); returns results in key order."""
    if workers <= 1:
        results = [(key, fn()) for key, fn in tasks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [(key, pool.submit(fn)) for key, fn in tasks]
        results = [(key, f.result()) for key, f in futures]
    results.sort(key=lambda kv: kv[0])
    return [r for _, r in results]


def _fmt_value(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def write_records_csv(path, records: list[dict]) -> None:
    if not records:
        raise IoFailure("no records to write")
    columns = list(records[0].keys())
    try:
        with open(path, "w") as fh:
            fh.write(",".join(columns) + "\n")
            for rec in records:
                fh.write(",".join(_fmt_value(rec[c]) for c in columns) + "\n")
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


def render_report(records: list[dict], cfg: ExperimentConfig, name: str,
                  summary_lines: list[str], figures: tuple = ()) -> ReportBundle:
    """Write records.csv + summary.md (+ figures already on disk)."""
    out = cfg.output_dir
    os.makedirs(out, exist_ok=True)
    csv_path = os.path.join(out, f"{name}_records.csv")
    md_path = os.path.join(out, f"{name}_summary.md")
    write_records_csv(csv_path, records)
    lines = [
        f"# {name} report",
        "",
        f"- experiment: {cfg.experiment}",
        f"- master_seed: {cfg.master_seed}",
        f"- logarithms: natural (base e) throughout",
        f"- reproduce: `etr-lab {cfg.experiment.replace('uncertainty-principle', 'verify').replace('perturbation', 'verify').replace('regime-map', 'regime')} "
        f"--seed {cfg.master_seed} --out {cfg.output_dir}`",
        "",
    ]
    lines.extend(summary_lines)
    try:
        with open(md_path, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    return ReportBundle(records_csv=csv_path, summary_md=md_path, figures=figures)


def _solver_configs(cfg: ExperimentConfig, k: int) -> dict:
    return {
        "l0-exhaustive": SolverConfig("l0-exhaustive", epsilon=cfg.epsilon, max_sparsity=k),
        "omp": SolverConfig("omp", epsilon=cfg.epsilon, max_sparsity=max(k, 1)),
        "basis-pursuit": SolverConfig(
            "basis-pursuit", epsilon=cfg.epsilon,
            max_iterations=cfg.max_iterations, convergence_tol=cfg.convergence_tol,
        ),
    }


# ---------------------------------------------------------------------------
# phase transition


def run_phase_transition(cfg: ExperimentConfig) -> ReportBundle:
    if cfg.experiment != "phase":
        raise ConfigError("config is not a phase experiment")
    m_sweep = cfg.m_sweep or tuple(range(4, 49, 4))
    psi = build_dictionary(cfg.basis, cfg.d, seed=cfg.master_seed)
    base = RandomStream(cfg.master_seed)

    def one_trial(ci, m, t):
        stream = base.split(ci).split(t)
        phi = build_sensing(cfg.sensing, m, cfg.d, seed=stream.split(0).as_seed())
        inst = plant(psi, cfg.k, stream.split(1))
        obs = observe(inst.x, phi, cfg.epsilon, stream.split(2))
        a = compose(phi, psi)
        rows = []
        for solver in cfg.solvers:
            scfg = _solver_configs(cfg, cfg.k)[solver]
            try:
                res = solve(solver, a, obs.y, scfg, psi=psi.psi, truth=inst)
                ok, match, rel = recovery_success(res.alpha_hat, inst.alpha_star)
                rows.append({
                    "experiment": "phase", "m": m, "k": cfg.k, "n": cfg.n,
                    "solver": solver, "trial": t, "success": ok,
                    "support_match": match, "rel_error": rel,
                    "cost_total": res.cost.total, "converged": res.converged,
                    "error": "",
                })
            except Exception as exc:
                rows.append({
                    "experiment": "phase", "m": m, "k": cfg.k, "n": cfg.n,
                    "solver": solver, "trial": t, "success": False,
                    "support_match": False, "rel_error": float("inf"),
                    "cost_total": 0, "converged": False,
                    "error": f"{type(exc).__name__}",
                })
        return rows

    tasks = []
    for ci, m in enumerate(m_sweep):
        for t in range(cfg.trials_per_cell):
            tasks.append(((ci, t), (lambda m=m, ci=ci, t=t: one_trial(ci, m, t))))
    records = [row for rows in _run_tasks(tasks, cfg.effective_workers) for row in rows]

    threshold = sample_threshold(cfg.k, cfg.n, cfg.thresholds.sample_c0)
    lines = [f"budget threshold m* = ceil(c0 * k * (ln(n/k)+1)) = {threshold}", ""]
    lines.append("| m | solver | success rate |")
    lines.append("|---|--------|--------------|")
    series: dict = {}
    for solver in cfg.solvers:
        rates = []
        for m in m_sweep:
            cell = [r for r in records if r["solver"] == solver and r["m"] == m]
            rate = sum(r["success"] for r in cell) / len(cell)
            rates.append(rate)
            lines.append(f"| {m} | {solver} | {rate:.3f} |")
        series[solver] = list(zip(m_sweep, rates))
        smooth = isotonic_fit(rates)
        crossing = next((m for m, r in zip(m_sweep, smooth) if r >= 0.5), None)
        lines.append("")
        lines.append(f"isotonic 50% crossing for {solver}: m = {crossing}")
        lines.append("")
    figures = ()
    if "svg" in cfg.formats:
        fig = os.path.join(cfg.output_dir, "phase_success.svg")
        os.makedirs(cfg.output_dir, exist_ok=True)
        svgplot.line_plot(fig, series, "m", "success rate", "recovery success vs measurements")
        figures = (fig,)
    return render_report(records, cfg, "phase", lines, figures)


# ---------------------------------------------------------------------------
# representation mismatch


def run_mismatch(cfg: ExperimentConfig) -> ReportBundle:
    if cfg.experiment != "mismatch":
        raise ConfigError("config is not a mismatch experiment")
    d, k = cfg.d, cfg.k
    m = cfg.m or d // 2
    identity = build_dictionary("identity", d)
    base = RandomStream(cfg.master_seed)

    def census_trial(t):
        stream = base.split(t)
        psi_star = build_dictionary("random-orthonormal", d, seed=stream.split(0).as_seed())
        inst = plant(psi_star, k, stream.split(1))
        keff = effective_sparsity(inst.x, identity)
        return {
            "experiment": "mismatch", "phase": "census", "arm": "-", "m": 0,
            "k": k, "d": d, "trial": t, "k_eff": keff,
            "success": False, "rel_error": 0.0,
        }

    def recovery_trial(t):
        stream = base.split(10_000 + t)
        psi_star = build_dictionary("random-orthonormal", d, seed=stream.split(0).as_seed())
        inst = plant(psi_star, k, stream.split(1))
        phi = build_sensing(cfg.sensing, m, d, seed=stream.split(2).as_seed())
        obs = observe(inst.x, phi, cfg.epsilon, stream.split(3))
        scfg = _solver_configs(cfg, k)["basis-pursuit"]
        rows = []
        matched = solve("basis-pursuit", compose(phi, psi_star), obs.y, scfg,
                        psi=psi_star.psi, truth=inst)
        ok, _, rel = recovery_success(matched.alpha_hat, inst.alpha_star)
        rows.append({
            "experiment": "mismatch", "phase": "recovery", "arm": "matched",
            "m": m, "k": k, "d": d, "trial": t,
            "k_eff": effective_sparsity(inst.x, identity),
            "success": ok, "rel_error": rel,
        })
        mism = solve("basis-pursuit", EffectiveSensing(phi.phi, False), obs.y, scfg,
                     psi=identity.psi, truth=inst)
        ok2, _, rel2 = recovery_success(mism.alpha_hat, inst.x)
        rows.append({
            "experiment": "mismatch", "phase": "recovery", "arm": "mismatched",
            "m": m, "k": k, "d": d, "trial": t,
            "k_eff": rows[0]["k_eff"], "success": ok2, "rel_error": rel2,
        })
        return rows

    tasks = [((0, t), (lambda t=t: [census_trial(t)])) for t in range(cfg.trials_per_cell)]
    tasks += [((1, t), (lambda t=t: recovery_trial(t))) for t in range(cfg.recovery_trials)]
    records = [row for rows in _run_tasks(tasks, cfg.effective_workers) for row in rows]

    census = [r for r in records if r["phase"] == "census"]
    dense = sum(1 for r in census if r["k_eff"] == d) / len(census)
    matched = [r for r in records if r["arm"] == "matched"]
    mismatched = [r for r in records if r["arm"] == "mismatched"]
    rate_m = sum(r["success"] for r in matched) / len(matched)
    rate_x = sum(r["success"] for r in mismatched) / len(mismatched)
    keff_mode = max(set(r["k_eff"] for r in census), key=[r["k_eff"] for r in census].count)
    predicted = inflation_ratio(k, keff_mode, d)
    lines = [
        f"k_eff = d in {dense:.4f} of {len(census)} census trials (tau = {TOL.zero_tau})",
        f"matched-representation success at m = {m}: {rate_m:.3f}",
        f"mismatched-representation success at m = {m}: {rate_x:.3f}",
        f"modal k_eff = {keff_mode}; predicted measurement inflation "
        f"= {predicted:.6f} (regularized k_eff(ln(d/k_eff)+1) / k(ln(d/k)+1))",
        f"reference budgets: matched m* = {sample_threshold(k, d)}, "
        f"mismatched m* = {sample_threshold(keff_mode, d)}",
    ]
    return render_report(records, cfg, "mismatch", lines)


# ---------------------------------------------------------------------------
# verification suites


def _subgroup_indicator(d: int) -> np.ndarray:
    # indicator of the bit-prefix subgroup {0 .. 2^s - 1} with s = ceil(log2(d)/2)
    bits = d.bit_length() - 1
    size = 1 << ((bits + 1) // 2)
    x = np.zeros(d)
    x[:size] = 1.0
    return x


def run_verification_suite(cfg: ExperimentConfig) -> ReportBundle:
    if cfg.experiment not in ("uncertainty-principle", "perturbation"):
        raise ConfigError("config is not a verification experiment")
    return (_run_uncertainty_suite if cfg.experiment == "uncertainty-principle"
            else _run_perturbation_suite)(cfg)


def _run_uncertainty_suite(cfg: ExperimentConfig) -> ReportBundle:
    d_sweep = cfg.d_sweep or (4, 16, 64)
    base = RandomStream(cfg.master_seed)
    records, violations, lines = [], [], []
    for di, d in enumerate(d_sweep):
        ident = build_dictionary("identity", d)
        hada = build_dictionary("hadamard", d)
        mu = mutual_coherence(ident, hada)
        floor = 1.0 / mu ** 2
        slacks = []
        for t in range(cfg.trials_per_cell):
            x = base.split(di).split(t).gaussians(d)
            k1 = representation_complexity(x, ident).k_psi
            k2 = representation_complexity(x, hada).k_psi
            product = k1 * k2
            violated = product < floor - 1e-9
            records.append({
                "experiment": "uncertainty-principle", "d": d, "trial": t,
                "case": "random", "k1": k1, "k2": k2, "product": product,
                "floor": floor, "violation": violated,
            })
            slacks.append(product - floor)
            if violated:
                violations.append(
                    f"d={d} trial={t} seed={cfg.master_seed}: {product} < {floor}"
                )
        x = _subgroup_indicator(d)
        k1 = representation_complexity(x, ident).k_psi
        k2 = representation_complexity(x, hada).k_psi
        records.append({
            "experiment": "uncertainty-principle", "d": d, "trial": -1,
            "case": "subgroup-extremal", "k1": k1, "k2": k2,
            "product": k1 * k2, "floor": floor,
            "violation": k1 * k2 != round(floor),
        })
        if k1 * k2 != round(floor):
            violations.append(f"d={d} subgroup extremal: product {k1 * k2} != {round(floor)}")
        lines.append(
            f"d = {d}: mu = {mu:.6f}, floor = {floor:.1f}, violations = "
            f"{sum(1 for r in records if r['d'] == d and r['violation'])}, "
            f"min slack = {min(slacks):.3f}, extremal product = {k1 * k2}"
        )
    lines.append(f"total violations: {len(violations)} (must be 0)")
    bundle = render_report(records, cfg, "uncertainty_principle", lines)
    if violations:
        raise SuiteFailure(violations)
    return bundle


def _run_perturbation_suite(cfg: ExperimentConfig) -> ReportBundle:
    d, n, k = cfg.d, cfg.n, cfg.k
    if comb(n, min(2 * k, n)) > 10 ** 5:
        raise EnumerationTooLarge("perturbation suite needs exhaustive gamma_2k")
    base = RandomStream(cfg.master_seed)
    records, violations, slacks = [], [], []

    def one(t):
        stream = base.split(t)
        phi = build_sensing(cfg.sensing, d, n, seed=stream.split(0).as_seed())
        a = EffectiveSensing(phi.phi, False)
        g = gamma_exact(a, min(2 * k, n))
        row = {"experiment": "perturbation", "trial": t, "m": d, "n": n, "k": k,
               "gamma_2k": g, "holds": True, "slack": 0.0, "degenerate": False}
        if g <= TOL.gamma_zero:
            row["degenerate"] = True
            return row
        psi = build_dictionary("identity", n)
        z1 = plant(psi, k, stream.split(1)).alpha_star
        z2 = plant(psi, k, stream.split(2)).alpha_star
        holds, slack = perturbation_check(a, z1, z2, g)
        row["holds"], row["slack"] = holds, slack
        return row

    tasks = [((t,), (lambda t=t: one(t))) for t in range(cfg.trials_per_cell)]
    for row in _run_tasks(tasks, cfg.effective_workers):
        records.append(row)
        if not row["degenerate"]:
            slacks.append(row["slack"])
            if not row["holds"]:
                violations.append(
                    f"trial={row['trial']} seed={cfg.master_seed}: slack {row['slack']}"
                )
    lines = [
        f"instances: {len(records)} ({sum(r['degenerate'] for r in records)} degenerate skipped)",
        f"violations: {len(violations)} (must be 0)",
        f"slack range: [{min(slacks):.6g}, {max(slacks):.6g}]" if slacks else "no valid slacks",
    ]
    bundle = render_report(records, cfg, "perturbation", lines)
    if violations:
        raise SuiteFailure(violations)
    return bundle


# ---------------------------------------------------------------------------
# regime map


REGIME_COLORS = {
    "non-unique": "#e6194b",
    "opaque": "#f58231",
    "indeterminate": "#cccccc",
    "stable": "#3cb44b",
}


def run_regime_map(cfg: ExperimentConfig) -> ReportBundle:
    if cfg.experiment != "regime-map":
        raise ConfigError("config is not a regime-map experiment")
    k_sweep = cfg.k_sweep or (1, 2, 3)
    m_sweep = cfg.m_sweep or (2, 4, 6, 8, 12, 16)
    psi = build_dictionary(cfg.basis, cfg.d, seed=cfg.master_seed)
    base = RandomStream(cfg.master_seed)

    def one_cell(mi, ki, m, k):
        cell = base.split(mi * 1000 + ki)
        phi = build_sensing(cfg.sensing, m, cfg.d, seed=cell.split(0).as_seed())
        a = compose(phi, psi)
        r = min(2 * k, cfg.n)
        try:
            geom = geometry_report(a, r, mode="exact")
        except EnumerationTooLarge:
            geom = geometry_report(a, r, mode="sampled", trials=200, stream=cell.split(1))
        successes = {name: 0 for name in ("l0-exhaustive", "omp", "basis-pursuit")}
        for t in range(cfg.trials_per_cell):
            ts = cell.split(10 + t)
            inst = plant(psi, k, ts.split(0))
            obs = observe(inst.x, phi, cfg.epsilon, ts.split(1))
            for entry in run_battery(a, obs.y, truth=inst,
                                     configs=_solver_configs(cfg, k), psi=psi.psi):
                if entry.result is None:
                    continue
                ok, _, _ = recovery_success(entry.result.alpha_hat, inst.alpha_star)
                successes[entry.solver] += ok
        stats = BatteryStats(
            trials=cfg.trials_per_cell,
            success_rate={s: successes[s] / cfg.trials_per_cell for s in successes},
        )
        label = classify_regime(geom, m, cfg.n, k, stats, cfg.thresholds)
        return {
            "experiment": "regime-map", "m": m, "k": k, "d": cfg.d, "n": cfg.n,
            "gamma_2k": geom.gamma_exact if geom.gamma_exact is not None else geom.gamma_upper,
            "gamma_method": geom.method,
            "l0_rate": stats.success_rate["l0-exhaustive"],
            "omp_rate": stats.success_rate["omp"],
            "bp_rate": stats.success_rate["basis-pursuit"],
            "regime": label.label, "evidence": label.evidence.replace(",", ";"),
        }

    tasks = []
    for mi, m in enumerate(m_sweep):
        for ki, k in enumerate(k_sweep):
            tasks.append(((mi, ki), (lambda mi=mi, ki=ki, m=m, k=k: one_cell(mi, ki, m, k))))
    records = _run_tasks(tasks, cfg.effective_workers)

    lines = ["| m \\ k | " + " | ".join(str(k) for k in k_sweep) + " |",
             "|---" * (len(k_sweep) + 1) + "|"]
    for m in m_sweep:
        row = [next(r["regime"] for r in records if r["m"] == m and r["k"] == k)
               for k in k_sweep]
        lines.append(f"| {m} | " + " | ".join(row) + " |")
    lines.append("")
    lines.append("classifier thresholds: " + repr(cfg.thresholds))
    figures = ()
    if "svg" in cfg.formats:
        os.makedirs(cfg.output_dir, exist_ok=True)
        fig = os.path.join(cfg.output_dir, "regime_map.svg")
        grid = {(r["k"], r["m"]): r["regime"] for r in records}
        svgplot.heat_map(fig, grid, list(k_sweep), list(m_sweep), "k", "m",
                         "discovery regimes", colors=REGIME_COLORS)
        figures = (fig,)
    return render_report(records, cfg, "regime_map", lines, figures)


RUNNERS = {
    "phase": run_phase_transition,
    "mismatch": run_mismatch,
    "uncertainty-principle": run_verification_suite,
    "perturbation": run_verification_suite,
    "regime-map": run_regime_map,
}


def run_experiment(cfg: ExperimentConfig) -> ReportBundle:
    return RUNNERS[cfg.experiment](cfg)
