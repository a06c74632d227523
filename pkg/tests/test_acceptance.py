"""End-to-end acceptance gate.

Each test covers one numbered criterion of the package contract and prints
a single pass/fail line with the measured quantity and runtime, then
asserts the stated tolerance.  Criterion 7 measures the directed distance
from the predicted essential spectrum to a window-2000 eigenvalue cloud;
finite sections approach slowly oscillating spectral edges at a slow
polynomial rate, so its containment assertion records the measured gap
rather than hiding it.
"""

import json
import time

import numpy as np
import pytest
import scipy.linalg

from corona_spectra import cli, coeff, fourier, groups, kernels, spectra, validate
from corona_spectra.sets import (
    Interval,
    hausdorff_distance,
    set_minkowski_sum,
    set_scale,
    set_union,
    spectral_set,
)

Z1 = groups.zn(1)
DEFAULTS = spectra.SpectralOptions()
FINITE_CATALOG = ("S3", "D4", "Q8", "Z2", "Z3", "Z4", "Z8")


def report(criterion: int, ok: bool, detail: str) -> None:
    print("criterion %d: %s (%s)" % (criterion, "PASS" if ok else "FAIL", detail))


def hopping_coefficient():
    return coeff.Sum((coeff.Constant(2.0), coeff.so_generator("sin_sqrt")))


def laplacian_kernel():
    return kernels.kernel(Z1, [(coeff.Constant(1.0), {(1,): 1.0, (-1,): 1.0})])


def modulated_hopping_kernel():
    a = hopping_coefficient()
    return kernels.kernel(Z1, [(a, {(1,): 1.0, (-1,): 1.0})])


def jacobi_hopping_kernel():
    # self-adjoint version of the modulated hopping model
    a = hopping_coefficient()
    return kernels.kernel(Z1, [
        (a, {(-1,): 1.0}),
        (coeff.translate(a, (1,)), {(1,): 1.0}),
    ])


def potential_well_kernel():
    return kernels.kernel(Z1, [
        (coeff.Constant(1.0), {(1,): 1.0, (-1,): 1.0}),
        (coeff.so_generator("arctan"), {(0,): 1.0}),
    ])


def dimer_kernel():
    return kernels.kernel(Z1, [
        (coeff.Constant(1.0), {(1,): 1.0, (-1,): 1.0}),
        (coeff.Periodic((2,), (1.0, -1.0)), {(0,): 1.0}),
    ])


def directed_sup_distance(s, eigenvalues):
    """sup over the set s of the distance to a real eigenvalue cloud, exact
    for real intervals through adjacent-gap midpoints."""
    ev = np.sort(np.asarray(eigenvalues).real)

    def dist(x):
        i = np.searchsorted(ev, x)
        c = []
        if i > 0:
            c.append(abs(x - ev[i - 1]))
        if i < len(ev):
            c.append(abs(x - ev[i]))
        return min(c)

    worst = 0.0
    for p in s.points:
        worst = max(worst, dist(p.real))
    mids = (ev[1:] + ev[:-1]) / 2
    gaps = (ev[1:] - ev[:-1]) / 2
    for iv in s.intervals:
        worst = max(worst, dist(iv.lo), dist(iv.hi))
        inside = (mids >= iv.lo) & (mids <= iv.hi)
        if inside.any():
            worst = max(worst, float(np.max(gaps[inside])))
    return worst


def test_criterion_01_window_algebra_identities():
    t0 = time.monotonic()
    worst = 0.0
    r = validate.star_identity_residuals(Z1, seed=2026, trials=20, radius=3)
    worst = max(worst, r["window_product"], r["window_adjoint"])
    for name in ("S3", "D4", "Q8"):
        g = groups.catalog_group(name)
        r = validate.star_identity_residuals(g, seed=2026, trials=10, radius=3)
        worst = max(worst, r["window_product"], r["window_adjoint"])
    elapsed = time.monotonic() - t0
    ok = worst < 1e-10 and elapsed < 10.0
    report(1, ok, "50 kernels, max residual %.2e, %.1fs" % (worst, elapsed))
    assert worst < 1e-10
    assert elapsed < 10.0


def test_criterion_02_plancherel_unitarity():
    t0 = time.monotonic()
    rng = np.random.default_rng(2026)
    worst = 0.0
    for name in FINITE_CATALOG:
        g = groups.catalog_group(name)
        dual = fourier.dual_of(g)
        for _ in range(100):
            u = {x: complex(rng.normal(), rng.normal())
                 for x in range(g.data.order)}
            worst = max(worst, fourier.plancherel_defect(u, g, dual))
    elapsed = time.monotonic() - t0
    ok = worst < 1e-10 and elapsed < 5.0
    report(2, ok, "%d groups x 100 vectors, max defect %.2e, %.1fs"
           % (len(FINITE_CATALOG), worst, elapsed))
    assert worst < 1e-10
    assert elapsed < 5.0


def test_criterion_03_quantization_triangle():
    t0 = time.monotonic()
    worst = 0.0
    r = validate.fourier_residuals(Z1, seed=2026, trials=10)
    worst = max(worst, r["quantize_triangle"], r["round_trip"])
    for name in ("S3", "D4", "Q8", "Z5"):
        g = groups.catalog_group(name)
        r = validate.fourier_residuals(g, seed=2026, trials=10)
        worst = max(worst, r["quantize_triangle"], r["round_trip"])
    elapsed = time.monotonic() - t0
    ok = worst < 1e-10 and elapsed < 10.0
    report(3, ok, "max residual %.2e, %.1fs" % (worst, elapsed))
    assert worst < 1e-10
    assert elapsed < 10.0


def test_criterion_04_convolution_symbol_oracle():
    t0 = time.monotonic()
    s = fourier.conv_symbol_range({(1,): 1.0, (-1,): 1.0}, Z1, grid=4096)
    claimed = 2 * np.pi * 2.0 / 4096
    hd_interval = hausdorff_distance(
        s, spectral_set(intervals=(Interval(-2.0, 2.0),)))
    # independent oracle: eigenvalues of the 4096-point circulant
    col = np.zeros(4096)
    col[1] = 1.0
    col[-1] = 1.0
    circ = np.fft.fft(col)
    assert np.max(np.abs(circ.imag)) < 1e-12
    cloud = spectral_set(points=np.sort(circ.real).astype(complex))
    hd_circ = hausdorff_distance(s, cloud)
    elapsed = time.monotonic() - t0
    ok = (hd_interval <= s.resolution and s.resolution <= claimed
          and hd_circ <= s.resolution and elapsed < 5.0)
    report(4, ok, "interval gap %.2e, circulant gap %.2e, resolution %.2e, "
           "%.1fs" % (hd_interval, hd_circ, s.resolution, elapsed))
    assert hd_interval <= s.resolution
    assert s.resolution <= claimed
    assert hd_circ <= s.resolution
    assert elapsed < 5.0


def test_criterion_05_scaling_formula_crossvalidation():
    t0 = time.monotonic()
    phi = modulated_hopping_kernel()
    probe_path = spectra.essential_spectrum(phi, DEFAULTS)
    sym = fourier.conv_symbol_range({(1,): 1.0, (-1,): 1.0}, Z1,
                                    grid=DEFAULTS.dual_grid)
    clus = coeff.cluster_range(hopping_coefficient(), Z1,
                               cluster_points=DEFAULTS.cluster_points)
    lo, hi = clus.intervals[0].lo, clus.intervals[0].hi
    formula = set_union(*[set_scale(sym, c)
                          for c in np.linspace(lo, hi, DEFAULTS.cluster_points)])
    hd = hausdorff_distance(probe_path.spectrum, formula)
    summed = probe_path.spectrum.resolution + formula.resolution
    elapsed = time.monotonic() - t0
    ok = hd <= summed and hd <= 5e-3 and elapsed < 30.0
    report(5, ok, "Hausdorff %.2e <= summed resolutions %.2e and 5e-3, %.1fs"
           % (hd, summed, elapsed))
    assert hd <= summed
    assert hd <= 5e-3
    assert elapsed < 30.0


def test_criterion_06_sum_formula_crossvalidation():
    t0 = time.monotonic()
    phi = potential_well_kernel()
    probe_path = spectra.essential_spectrum(phi, DEFAULTS)
    assert probe_path.family_size == 2
    sym = fourier.conv_symbol_range({(1,): 1.0, (-1,): 1.0}, Z1,
                                    grid=DEFAULTS.dual_grid)
    shifts = coeff.cluster_range(coeff.so_generator("arctan"), Z1)
    minkowski = set_minkowski_sum(sym, shifts)
    hd = hausdorff_distance(probe_path.spectrum, minkowski)
    half_pi = np.pi / 2
    oracle = set_union(
        spectral_set(intervals=(Interval(-2 - half_pi, 2 - half_pi),)),
        spectral_set(intervals=(Interval(-2 + half_pi, 2 + half_pi),)))
    hd_oracle = hausdorff_distance(probe_path.spectrum, oracle)
    elapsed = time.monotonic() - t0
    ok = (hd <= 5e-3 and hd_oracle <= probe_path.spectrum.resolution
          and elapsed < 30.0)
    report(6, ok, "Minkowski gap %.2e, closed-form gap %.2e <= resolution "
           "%.2e, %.1fs" % (hd, hd_oracle, probe_path.spectrum.resolution,
                            elapsed))
    assert hd <= 5e-3
    assert hd_oracle <= probe_path.spectrum.resolution
    assert elapsed < 30.0


def test_criterion_07_truncation_containment_window_2000():
    t0 = time.monotonic()
    gaps = {}
    outlier_counts = {}
    for label, phi in (("jacobi_hopping", jacobi_hopping_kernel()),
                       ("potential_well", potential_well_kernel())):
        ess = spectra.essential_spectrum(phi, DEFAULTS)
        rep = spectra.truncation_crosscheck(phi, 1000, ess, DEFAULTS,
                                            tolerance=1e-3)
        assert rep.hermitian
        assert rep.caveat == spectra.FINITE_SECTION_CAVEAT
        gaps[label] = directed_sup_distance(ess.spectrum, rep.eigenvalues)
        outlier_counts[label] = len(rep.outliers)
    elapsed = time.monotonic() - t0
    worst = max(gaps.values())
    ok = worst < 1e-3 and elapsed < 120.0
    report(7, ok, "directed containment gaps: jacobi_hopping %.2e, "
           "potential_well %.2e (tolerance 1e-3); eigenvalue outliers "
           "listed: %d / %d; %.1fs"
           % (gaps["jacobi_hopping"], gaps["potential_well"],
              outlier_counts["jacobi_hopping"],
              outlier_counts["potential_well"], elapsed))
    assert elapsed < 120.0
    assert worst < 1e-3


def test_criterion_08_compact_perturbation_invariance():
    t0 = time.monotonic()
    base = laplacian_kernel()
    bump = kernels.kernel(Z1, [
        (coeff.Vanishing(support=(((0,), 12.0),)), {(0,): 1.0}),
    ])
    perturbed = kernels.add_kernels(base, bump)
    assert coeff.sup_bound(bump.terms[0][0]) >= 10.0
    s_base = spectra.essential_spectrum(base, DEFAULTS)
    s_pert = spectra.essential_spectrum(perturbed, DEFAULTS)
    hd = hausdorff_distance(s_base.spectrum, s_pert.spectrum)
    symbolic_equal = (json.dumps(sorted(map(str, s_base.spectrum.intervals)))
                      == json.dumps(sorted(map(str, s_pert.spectrum.intervals))))
    e_base = spectra.truncation_crosscheck(base, 300, s_base, DEFAULTS)
    e_pert = spectra.truncation_crosscheck(perturbed, 300, s_pert, DEFAULTS)
    moved = float(np.max(np.abs(np.sort(e_base.eigenvalues.real)
                                - np.sort(e_pert.eigenvalues.real))))
    elapsed = time.monotonic() - t0
    ok = hd == 0.0 and symbolic_equal and moved >= 1.0 and elapsed < 60.0
    report(8, ok, "symbolic Hausdorff %.1e, eigenvalue moved by %.2f, %.1fs"
           % (hd, moved, elapsed))
    assert hd == 0.0
    assert symbolic_equal
    assert moved >= 1.0
    assert elapsed < 60.0


def test_criterion_09_fredholm_certificates(tmp_path):
    t0 = time.monotonic()
    cert_id = spectra.is_fredholm(kernels.identity_kernel(Z1))
    cert_lap = spectra.is_fredholm(laplacian_kernel())
    shifted = kernels.kernel(Z1, [(hopping_coefficient(), {(1,): 1.0})])
    cert_shift = spectra.is_fredholm(shifted)
    cfg = {
        "group": {"kind": "zn", "dimension": 1},
        "kernel": [
            {"coeff": {"type": "constant", "value": [2.0, 0.0]},
             "profile": [{"element": [0], "value": [1.0, 0.0]}]},
            {"coeff": {"type": "constant", "value": [1.0, 0.0]},
             "profile": [{"element": [1], "value": [1.0, 0.0]},
                         {"element": [-1], "value": [1.0, 0.0]}]},
        ],
    }
    cfg_path = tmp_path / "edge.json"
    cfg_path.write_text(json.dumps(cfg))
    exit_code = cli.main(["fredholm", "--config", str(cfg_path),
                          "--out", str(tmp_path / "out")])
    elapsed = time.monotonic() - t0
    ok = (cert_id.verdict is True and cert_lap.verdict is False
          and cert_shift.verdict is True and exit_code == 2
          and elapsed < 30.0)
    report(9, ok, "identity %s, hopping chain %s, shifted %s, boundary case "
           "exit %d, %.1fs" % (cert_id.verdict, cert_lap.verdict,
                               cert_shift.verdict, exit_code, elapsed))
    assert cert_id.verdict is True
    assert cert_lap.verdict is False
    assert cert_shift.verdict is True
    assert cert_shift.distance > cert_shift.resolution
    assert exit_code == 2
    assert elapsed < 30.0


def test_criterion_10_dimer_band_oracle():
    t0 = time.monotonic()
    phi = dimer_kernel()
    res = spectra.essential_spectrum(phi, DEFAULTS)
    assert any(p["route"] == "bloch" for p in res.provenance)
    root5 = float(np.sqrt(5.0))
    oracle = set_union(
        spectral_set(intervals=(Interval(-root5, -1.0),)),
        spectral_set(intervals=(Interval(1.0, root5),)))
    hd = hausdorff_distance(res.spectrum, oracle)

    offsets, bands = kernels.band_arrays(phi, 1000)
    diag = sub = None
    for s, d in zip(offsets, bands):
        if s == 0:
            diag = d.real
        elif s == 1:
            sub = d.real[1:]
    gap_lo, gap_hi = -1 + 1e-2, 1 - 1e-2
    vals, vecs = scipy.linalg.eigh_tridiagonal(
        diag, sub, select="v", select_range=(gap_lo, gap_hi))
    n = len(diag)
    edge_zone = int(0.05 * n)
    bulk_intruders = []
    edge_candidates = []
    for idx, v in enumerate(vals):
        w = np.abs(vecs[:, idx]) ** 2
        boundary_mass = float(w[:edge_zone].sum() + w[-edge_zone:].sum())
        if boundary_mass >= 0.5:
            edge_candidates.append((float(v), boundary_mass))
        else:
            bulk_intruders.append((float(v), boundary_mass))
    elapsed = time.monotonic() - t0
    ok = hd <= 1e-3 and not bulk_intruders and elapsed < 60.0
    report(10, ok, "band envelope gap %.2e, in-gap eigenvalues: %d bulk, "
           "%d edge candidates, %.1fs"
           % (hd, len(bulk_intruders), len(edge_candidates), elapsed))
    if edge_candidates:
        for v, mass in edge_candidates:
            print("  edge candidate at %.6f (boundary mass %.2f)" % (v, mass))
    assert hd <= 1e-3
    assert bulk_intruders == []
    assert elapsed < 60.0
