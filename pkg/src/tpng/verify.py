"""Consolidated verification run: exhaustive weight checks, pathwise identities and statistical batteries."""
from __future__ import annotations

import time

import numpy as np

from . import colored, core, stats as st, weights
from .rng import RandomStream, derive_seed

LEVELS = {
    # diagrams per identity check, colored diagrams, Burke replicas, vertex draws per configuration
    "quick": dict(diagrams=20, colored=20, burke=20, draws=20_000),
    "default": dict(diagrams=100, colored=100, burke=50, draws=100_000),
    "full": dict(diagrams=1000, colored=200, burke=100, draws=100_000),
}


def vertex_law_check(n: int = 2, t: float = 0.3, draws: int = 100_000, seed: int = 0,
                     level: float = st.DEFAULT_LEVEL) -> dict:
    """Empirical outcome frequencies of sample_vertex against evaluated weights, for every two-outcome input."""
    results = []
    for i in range(1 << n):
        for j in range(1 << n):
            outs = weights.row_outcomes(i, j, n)
            if len(outs) == 1:
                continue
            stream = RandomStream(seed, ("vertex-law", str(n), str(i), str(j)))
            hits = {(o.k, o.l): 0 for o in outs}
            other = 0
            for _ in range(draws):
                o = weights.sample_vertex(i, j, n, t, stream)
                key = (o.k, o.l)
                if key in hits:
                    hits[key] += 1
                else:
                    other += 1
            expected = [weights.ln_weight(weights.VertexConfig(i, j, o.k, o.l, n)).evaluate(t) for o in outs]
            res = st.chi_square_gof([hits[(o.k, o.l)] for o in outs], expected, level=level)
            results.append({"i": weights.to_tuple(i, n), "j": weights.to_tuple(j, n), "p_value": res.p_value,
                            "unexpected_outcomes": other})
    combined = st.bonferroni([st.TestResult(0.0, r["p_value"], draws, "pass") for r in results], level)
    ok = combined.passed and all(r["unexpected_outcomes"] == 0 for r in results)
    return {"check": "vertex_law", "n": n, "t": t, "pass": ok, "rows": results, "bonferroni_p": combined.p_value}


def identity_check(diagrams: int, seed: int = 0, ts=(0.0, 0.3, 0.5, 0.9)) -> dict:
    """Height versus alpha/beta counts, the squared-height identity, and per-path balance."""
    worst_v = 0.0
    bad = []
    rng = np.random.default_rng(derive_seed(seed, "identity-queries"))
    for t in ts:
        side = 12.0 if t < 0.9 else 6.0
        for r in range(diagrams):
            d = core.simulate(core.SimConfig(t=t, width=side, height=side, seed=derive_seed(seed, "identity", repr(t), r)))
            x, y = rng.uniform(0.0, side, 2)
            if core.height(d, x, y) != core.height_via_alpha_beta(d, x, y):
                bad.append({"t": t, "replica": r, "x": x, "y": y, "what": "height"})
            s = rng.uniform(0.5, 2.0)
            worst_v = max(worst_v, abs(core.check_v_identity(d, s, x / s, y / s)))
            paths = core.decompose_paths(d)
            if any(p.n_alpha - p.n_beta != 1 for p in paths):
                bad.append({"t": t, "replica": r, "what": "path balance"})
    ok = not bad and worst_v <= 1e-9
    return {"check": "pathwise_identities", "pass": ok, "max_v_residual": worst_v, "counterexamples": bad[:20]}


def lis_check(diagrams: int, seed: int = 0) -> dict:
    bad = []
    for r in range(diagrams):
        stream = RandomStream(derive_seed(seed, "lis", r), ("points",))
        side = float(stream.uniform() * 30 + 1)
        cfg = core.SimConfig(t=0.0, width=side, height=side, seed=derive_seed(seed, "lis-sim", r))
        nuc, _, _ = core.resolve_inputs(cfg)
        h = core.sweep_counts(core.SimConfig(t=0.0, width=side, height=side, nucleations=nuc)).height
        if h != core.lis_oracle(nuc):
            bad.append({"replica": r, "sweep": h, "lis": core.lis_oracle(nuc)})
    return {"check": "lis_equivalence", "pass": not bad, "counterexamples": bad[:20]}


def t_one_check(diagrams: int, seed: int = 0) -> dict:
    bad = []
    rng = np.random.default_rng(derive_seed(seed, "t1"))
    for r in range(diagrams):
        d = core.simulate(core.SimConfig(t=1.0, width=15, height=15, seed=derive_seed(seed, "t1", r)))
        for x, y in rng.uniform(0, 15, (5, 2)):
            want = int(np.count_nonzero((d.nucleations.xs <= x) & (d.nucleations.ys <= y)))
            if core.height(d, x, y) != want:
                bad.append({"replica": r, "x": x, "y": y})
    return {"check": "t_equals_one", "pass": not bad, "counterexamples": bad[:20]}


def coupling_check(diagrams: int, seed: int = 0) -> dict:
    viol = []
    for t in (0.5, 0.9):
        for r in range(diagrams):
            nt, n0 = core.couple_with_png(core.SimConfig(t=t, width=30, height=30, seed=derive_seed(seed, "png", repr(t), r)))
            if nt < n0:
                viol.append({"t": t, "replica": r, "N_t": nt, "N_0": n0})
    return {"check": "png_coupling", "pass": not viol, "counterexamples": viol[:20]}


def colored_check(diagrams: int, seed: int = 0) -> dict:
    bad = []
    for r in range(diagrams):
        d = colored.simulate_colored(12, 0.5, derive_seed(seed, "colored", r))
        rep = colored.verify_superadditivity(d)
        if not rep.passed:
            bad.extend(rep.violations)
        if r < 10 and any(w == weights.Weight.ZERO for w in colored.logged_weights(d)):
            bad.append({"replica": r, "what": "zero-weight vertex"})
    return {"check": "superadditivity", "pass": not bad, "counterexamples": bad[:20]}


def attractivity_check(diagrams: int, seed: int = 0) -> dict:
    bad = []
    for r in range(diagrams):
        rs = RandomStream(derive_seed(seed, "attract", r), ("boundary",))
        cfg = core.SimConfig(t=0.5, width=10, height=10, seed=derive_seed(seed, "attract-sim", r), sinks=0.5)
        base = np.sort(rs.uniform(4) * 10)
        extra = np.sort(rs.uniform(3) * 10)
        tr = colored.couple_add_sources(base, extra, cfg)
        if tr.not_contained.max() > 0 or tr.augmented_height < tr.base_height:
            bad.append({"replica": r, "what": "sources"})
        cfg2 = core.SimConfig(t=0.5, width=10, height=10, seed=derive_seed(seed, "attract-sim2", r), sources=1.0)
        tr2 = colored.couple_add_sinks(np.sort(rs.uniform(3) * 10), np.sort(rs.uniform(3) * 10), cfg2)
        if np.any(tr2.augmented < tr2.base - tr2.extra_so_far) or tr2.augmented_height < tr2.base_height:
            bad.append({"replica": r, "what": "sinks"})
    return {"check": "attractivity", "pass": not bad, "counterexamples": bad[:20]}


def weights_checks() -> list[dict]:
    out = [weights.verify_stochastic(n).to_json() for n in range(1, 6)]
    for n in range(1, 5):
        for m in range(1, n + 1):
            out.append(weights.verify_color_ignorance(n, m).to_json())
        for p in weights.all_interval_partitions(n):
            out.append(weights.verify_mod2_erasure(n, p).to_json())
    return out


def run_all_verifications(level: str = "default", seed: int = 0) -> dict:
    from .stationary import burke_battery

    if level not in LEVELS:
        raise ValueError(f"unknown level {level!r}; choose from {sorted(LEVELS)}")
    cfg = LEVELS[level]
    sections = []
    timings = {}

    def run(name, fn):
        t0 = time.perf_counter()
        res = fn()
        timings[name] = time.perf_counter() - t0
        sections.extend(res if isinstance(res, list) else [res])

    run("weights", weights_checks)
    run("vertex_law", lambda: vertex_law_check(draws=cfg["draws"], seed=seed))
    run("identities", lambda: identity_check(cfg["diagrams"] // 4 or 1, seed))
    run("lis", lambda: lis_check(cfg["diagrams"], seed))
    run("t_one", lambda: t_one_check(cfg["diagrams"], seed))
    run("png_coupling", lambda: coupling_check(cfg["diagrams"], seed))
    run("colored", lambda: colored_check(cfg["colored"], seed))
    run("attractivity", lambda: attractivity_check(cfg["diagrams"], seed))

    def burke():
        b = burke_battery(1.0, 0.5, 100.0 if level != "quick" else 50.0, cfg["burke"], derive_seed(seed, "verify-burke"))
        return {"check": "burke", "pass": b.passed, **b.to_json()}

    run("burke", burke)
    failures = [s.get("check") for s in sections if not s.get("pass")]
    return {"level": level, "pass": not failures, "failures": failures, "sections": sections,
            "seconds": timings}
