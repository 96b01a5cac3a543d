"""Acceptance gate for the package: one test per shipped guarantee.

Each test prints a single PASS/FAIL line with the measured margin so a full
run reads as a checklist. Criteria 8-11 drive the real experiment pipeline
at desk scale (3 qubits, 24 repetitions) with frozen seeds; they check
distributional statements (success rates, medians, rank correlations), not
point values.
"""

import time
from collections import defaultdict

import numpy as np
from scipy.stats import spearmanr

from entloss import (
    ball_max_fidelity_separable,
    construct_min_distance_operator,
    fidelity_kl,
    frobenius_phase_distance,
    haar_random_unitary,
    improvement_entangled_ub,
    improvement_ratio_bound,
    improvement_separable,
    landscape_grid,
    make_max_entangled,
    make_separable,
    maxent_loss_from_trace,
    min_distance_entangled_lb,
    min_distance_separable,
    sample_loss,
    sample_unitaries_in_ball,
    sine_lower_bound,
    sine_upper_bound,
)
from entloss.ansatz import FAMILIES
from entloss.harness import AnsatzGroup, ExperimentConfig, expressivity_records, run_experiment


def _report(capsys, ok: bool, label: str, detail: str) -> None:
    with capsys.disabled():
        print(f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}", flush=True)


def test_criterion_01_minimal_distance_construction_is_tight(capsys):
    start = time.time()
    worst_f = worst_d = 0.0
    for d in (2, 4, 8):
        rng = np.random.default_rng(1000 + d)
        for _ in range(100):
            u = haar_random_unitary(d, rng)
            v = haar_random_unitary(d, rng)
            psi = make_separable(d, rng)
            f_v = sample_loss(u, v, psi).fidelity
            f_w = float(rng.uniform())
            w = construct_min_distance_operator(u, v, psi, f_w)
            worst_f = max(worst_f, abs(sample_loss(u, w, psi).fidelity - f_w))
            worst_d = max(
                worst_d,
                abs(frobenius_phase_distance(v, w) - min_distance_separable(f_v, f_w)),
            )
    elapsed = time.time() - start
    ok = worst_f <= 1e-9 and worst_d <= 1e-9 and elapsed < 60.0
    _report(
        capsys, ok, "criterion 01 separable minimal-distance construction",
        f"fidelity err {worst_f:.2e}, distance err {worst_d:.2e}, {elapsed:.1f}s",
    )
    assert worst_f <= 1e-9
    assert worst_d <= 1e-9
    assert elapsed < 60.0


def test_criterion_02_entangled_distance_lower_bound_holds(capsys):
    start = time.time()
    d = 4
    rng = np.random.default_rng(2002)
    u = haar_random_unitary(d, rng)
    v = haar_random_unitary(d, rng)
    f_v = maxent_loss_from_trace(u, v).fidelity
    worst = 0.0
    for _ in range(1000):
        w = haar_random_unitary(d, rng)
        f_w = maxent_loss_from_trace(u, w).fidelity
        bound = min_distance_entangled_lb(f_v, f_w, d)
        worst = max(worst, bound - frobenius_phase_distance(v, w))
    elapsed = time.time() - start
    ok = worst <= 1e-8 and elapsed < 60.0
    _report(
        capsys, ok, "criterion 02 entangled minimal-distance lower bound",
        f"worst violation {worst:.2e}, {elapsed:.1f}s",
    )
    assert worst <= 1e-8
    assert elapsed < 60.0


def test_criterion_03_trace_identity_and_distance_chain(capsys):
    d = 8
    rng = np.random.default_rng(3003)
    psi = make_max_entangled(d)
    worst_id = worst_chain = 0.0
    for _ in range(100):
        u = haar_random_unitary(d, rng)
        v = haar_random_unitary(d, rng)
        trace_form = maxent_loss_from_trace(u, v)
        worst_id = max(worst_id, abs(sample_loss(u, v, psi).loss - trace_form.loss))
        # the phase distance determines the maximally entangled fidelity:
        # F = (1 - dist^2 / (2d))^2
        dist = frobenius_phase_distance(u, v)
        fid_from_dist = (1.0 - dist**2 / (2.0 * d)) ** 2
        worst_chain = max(worst_chain, abs(trace_form.fidelity - fid_from_dist))
    ok = worst_id <= 1e-10 and worst_chain <= 1e-10
    _report(
        capsys, ok, "criterion 03 maximally entangled trace identity",
        f"state-vs-trace err {worst_id:.2e}, distance-chain err {worst_chain:.2e}",
    )
    assert worst_id <= 1e-10
    assert worst_chain <= 1e-10


def test_criterion_04_ball_maximum_is_exact_for_separable_samples(capsys):
    worst_excess = -np.inf
    worst_attain = worst_dist = 0.0
    for d in (2, 4):
        rng = np.random.default_rng(4000 + d)
        for _ in range(20):
            u = haar_random_unitary(d, rng)
            v = haar_random_unitary(d, rng)
            psi = make_separable(d, rng)
            f_v = sample_loss(u, v, psi).fidelity
            r_crit = 2.0 * np.sqrt(1.0 - np.sqrt(f_v))
            radius = float(rng.uniform(0.2, 0.9)) * r_crit
            geo = ball_max_fidelity_separable(f_v, radius)
            assert geo.max_fidelity < 1.0

            ws = np.asarray(sample_unitaries_in_ball(v, radius, 10_000, rng))
            x = psi.schmidt.basis_x[:, 0]
            fids = np.abs((ws @ x) @ np.conj(u @ x)) ** 2
            for k in range(3):  # the fast path matches the reference loss
                assert abs(fids[k] - sample_loss(u, ws[k], psi).fidelity) < 1e-12
            worst_excess = max(worst_excess, float(np.max(fids) - geo.max_fidelity))

            w_star = construct_min_distance_operator(u, v, psi, geo.max_fidelity)
            worst_attain = max(
                worst_attain, abs(sample_loss(u, w_star, psi).fidelity - geo.max_fidelity)
            )
            worst_dist = max(
                worst_dist, abs(frobenius_phase_distance(v, w_star) - radius)
            )
    ok = worst_excess <= 1e-9 and worst_attain <= 1e-9 and worst_dist <= 1e-9
    _report(
        capsys, ok, "criterion 04 in-ball fidelity maximum (separable)",
        f"sampled excess {worst_excess:.2e}, boundary fidelity err {worst_attain:.2e}, "
        f"boundary distance err {worst_dist:.2e}",
    )
    assert worst_excess <= 1e-9
    assert worst_attain <= 1e-9
    assert worst_dist <= 1e-9


def test_criterion_05_improvement_ratio_bound_and_monotonicity(capsys):
    worst_excess = -np.inf
    monotone = True
    for loss in (0.2, 0.5, 0.8):
        f_v = 1.0 - loss
        r_adm = 2.0 * np.sqrt(1.0 - np.sqrt(f_v))
        for frac in np.linspace(0.1, 1.0, 8):
            radius = float(frac * r_adm)
            sep = improvement_separable(f_v, radius).value
            assert sep > 0.0
            previous = None
            for n in range(1, 11):
                bound = improvement_ratio_bound(loss, radius, n)
                ratio = improvement_entangled_ub(f_v, radius, 2**n).value / sep
                worst_excess = max(worst_excess, ratio - bound)
                if previous is not None and ratio > previous + 1e-12:
                    monotone = False
                previous = ratio
    ok = worst_excess <= 1e-12 and monotone
    _report(
        capsys, ok, "criterion 05 improvement ratio bound",
        f"worst ratio excess {worst_excess:.2e}, nonincreasing in qubits: {monotone}",
    )
    assert worst_excess <= 1e-12
    assert monotone


def test_criterion_06_sine_envelopes(capsys):
    x = np.linspace(0.0, np.pi, 400)
    upper_gap = float(np.min(sine_upper_bound(x) - np.sin(x)))
    lower_gap = float(np.min(np.sin(x) - sine_lower_bound(x)))
    ok = upper_gap >= -1e-12 and lower_gap >= -1e-12
    _report(
        capsys, ok, "criterion 06 sine envelopes",
        f"upper slack {upper_gap:.2e}, lower slack {lower_gap:.2e}",
    )
    assert upper_gap >= -1e-12
    assert lower_gap >= -1e-12


def test_criterion_07_haar_fidelity_binning(capsys):
    d, n_pairs = 32, 5000
    rng = np.random.default_rng(77)
    fids = np.empty(n_pairs)
    for i in range(n_pairs):
        a = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        b = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        fids[i] = abs(np.vdot(a / np.linalg.norm(a), b / np.linalg.norm(b))) ** 2
    kl, counts = fidelity_kl(fids, d, 75)
    ok = kl < 0.01 and int(np.sum(counts)) == n_pairs
    _report(
        capsys, ok, "criterion 07 Haar fidelity reference",
        f"KL divergence {kl:.4f} over {n_pairs} pairs, 75 bins",
    )
    assert kl < 0.01


def test_criterion_08_expressivity_windows_and_ordering(capsys):
    start = time.time()
    config = ExperimentConfig(
        experiment="expressivity",
        ansatz=tuple(AnsatzGroup(f, (4, 8)) for f in FAMILIES),
        qubits=5,
        master_seed=1234,
    )
    values = {
        (r.family, r.layers): r.expressivity for r in expressivity_records(config)
    }
    elapsed = time.time() - start
    ok = True
    for layers in (4, 8):
        no_ent = values[("no_entanglement", layers)]
        cz = values[("cz_entanglement", layers)]
        circular = values[("circular_entanglement", layers)]
        crx = values[("crx_entanglement", layers)]
        ok &= 0.15 <= no_ent <= 0.35
        ok &= cz < 0.05 and crx < 0.05
        ok &= 0.05 <= circular <= 0.15
        ok &= max(cz, crx) < circular < no_ent
    ok &= elapsed < 600.0
    detail = ", ".join(
        f"{fam.removesuffix('_entanglement')}(l={layers})={values[(fam, layers)]:.3f}"
        for fam in FAMILIES
        for layers in (4, 8)
    )
    _report(capsys, ok, "criterion 08 expressivity windows", f"{detail}, {elapsed:.0f}s")
    for layers in (4, 8):
        assert 0.15 <= values[("no_entanglement", layers)] <= 0.35
        assert values[("cz_entanglement", layers)] < 0.05
        assert values[("crx_entanglement", layers)] < 0.05
        assert 0.05 <= values[("circular_entanglement", layers)] <= 0.15
        assert (
            max(values[("cz_entanglement", layers)], values[("crx_entanglement", layers)])
            < values[("circular_entanglement", layers)]
            < values[("no_entanglement", layers)]
        )
    assert elapsed < 600.0


def test_criterion_09_separable_sample_reaches_minimum_within_radius(capsys):
    start = time.time()
    config = ExperimentConfig(
        experiment="distance",
        ansatz=(AnsatzGroup("crx_entanglement", (4,)),),
        qubits=3,
        sample_kinds=("separable",),
        repetitions=24,
        master_seed=2025,
    )
    records = run_experiment(config)
    hits = sum(1 for r in records if r.distance_to_min is not None)
    elapsed = time.time() - start
    rate = hits / len(records)
    ok = rate >= 0.9 and elapsed < 1800.0
    _report(
        capsys, ok, "criterion 09 separable distance-to-minimum rate",
        f"{hits}/{len(records)} repetitions reached loss <= 1e-3 within radius 4, "
        f"{elapsed:.0f}s",
    )
    assert rate >= 0.9
    assert elapsed < 1800.0


def test_criterion_10_separable_improvement_beats_maxent(capsys):
    start = time.time()
    config = ExperimentConfig(
        experiment="improvement",
        ansatz=(AnsatzGroup("cz_entanglement", (8,)),),
        qubits=3,
        repetitions=24,
        master_seed=2025,
    )
    records = run_experiment(config)
    sep = [r.improvement for r in records if r.sample_kind == "separable"]
    ment = [r.improvement for r in records if r.sample_kind == "max_entangled"]
    gap = float(np.median(sep) - np.median(ment))
    elapsed = time.time() - start
    ok = len(sep) == len(ment) == 24 and gap >= 0.15
    _report(
        capsys, ok, "criterion 10 improvement gap at the separable radius",
        f"median separable {np.median(sep):.3f} vs maximally entangled "
        f"{np.median(ment):.3f}, gap {gap:.3f}, {elapsed:.0f}s",
    )
    assert len(sep) == len(ment) == 24
    assert gap >= 0.15


def test_criterion_11_improvement_falls_with_entanglement_entropy(capsys):
    start = time.time()
    config = ExperimentConfig(
        experiment="nme_sweep",
        ansatz=(AnsatzGroup("cz_entanglement", (8,)),),
        qubits=3,
        repetitions=24,
        master_seed=2025,
    )
    records = run_experiment(config)
    improvements = defaultdict(list)
    entropies = {}
    for r in records:
        improvements[r.sample_kind].append(r.improvement)
        entropies[r.sample_kind] = r.entanglement_entropy
    labels = sorted(improvements, key=lambda k: entropies[k])
    medians = [float(np.median(improvements[k])) for k in labels]
    rho = float(spearmanr([entropies[k] for k in labels], medians).statistic)
    elapsed = time.time() - start
    ok = rho <= -0.5
    _report(
        capsys, ok, "criterion 11 entropy vs improvement correlation",
        f"Spearman rho {rho:.3f} over {len(labels)} coefficient families "
        f"x 24 repetitions, {elapsed:.0f}s",
    )
    assert rho <= -0.5


def test_criterion_12_landscape_zero_sets(capsys):
    sep = landscape_grid(101, "separable")
    ment = landscape_grid(101, "max_entangled")
    max_diff = float(np.max(np.abs(sep - ment)))
    zeros_sep = set(map(tuple, np.argwhere(sep <= 1e-6)))
    zeros_ment = set(map(tuple, np.argwhere(ment <= 1e-6)))
    subset = zeros_ment <= zeros_sep
    ok = max_diff > 1e-3 and subset and len(zeros_ment) >= 1
    _report(
        capsys, ok, "criterion 12 landscape zero-set containment",
        f"grids differ by up to {max_diff:.3f}; "
        f"{len(zeros_ment)} entangled zeros inside {len(zeros_sep)} separable zeros: "
        f"{subset}",
    )
    assert max_diff > 1e-3
    assert subset
    assert len(zeros_ment) >= 1
