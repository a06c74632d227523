"""Spectral routes, Fredholm certificates, pseudospectra, truncations."""

import numpy as np
import pytest
import scipy.linalg

from corona_spectra import coeff, groups, kernels, spectra
from corona_spectra.errors import EigenSolverError, UnsupportedLimitKernel
from corona_spectra.sets import (
    Interval,
    distance_to_point,
    hausdorff_distance,
    spectral_set,
)

Z1 = groups.zn(1)
OPTS = spectra.SpectralOptions()


def laplacian():
    return kernels.kernel(Z1, [(coeff.Constant(1.0), {(1,): 1.0, (-1,): 1.0})])


def test_eig_dense_sorting_and_hermitian_detection():
    rng = np.random.default_rng(4)
    h = rng.normal(size=(12, 12)) + 1j * rng.normal(size=(12, 12))
    h = h + h.conj().T
    vals = spectra.eig_dense(h)
    assert np.max(np.abs(vals.imag)) < 1e-12
    assert np.all(np.diff(vals.real) >= -1e-12)
    with pytest.raises(EigenSolverError):
        spectra.eig_dense(np.zeros((2, 3)))


def test_route_selection():
    s, route = spectra.asymptotic_spectrum(laplacian(), OPTS)
    assert route == "symbol_range"
    g = groups.catalog_group("S3")
    phi = kernels.kernel(g, [(coeff.Constant(1.0), {1: 1.0, 2: 1.0})])
    s, route = spectra.asymptotic_spectrum(phi, OPTS)
    assert route == "dense_finite"
    dimer = kernels.kernel(Z1, [
        (coeff.Constant(1.0), {(1,): 1.0, (-1,): 1.0}),
        (coeff.Periodic((2,), (1.0, -1.0)), {(0,): 1.0}),
    ])
    s, route = spectra.asymptotic_spectrum(dimer, OPTS)
    assert route == "bloch"


def test_asymptotic_spectrum_rejects_surviving_oscillation():
    phi = kernels.kernel(Z1, [(coeff.so_generator("arctan"), {(0,): 1.0})])
    with pytest.raises(UnsupportedLimitKernel):
        spectra.asymptotic_spectrum(phi, OPTS)


def test_dense_finite_route_matches_direct_eigenvalues():
    g = groups.catalog_group("D4")
    tbl = coeff.FiniteTable(tuple(float(i % 3) for i in range(8)))
    phi = kernels.kernel(g, [(tbl, {1: 1.0, 7: 1.0}), (coeff.Constant(0.5), {0: 1.0})])
    s, route = spectra.asymptotic_spectrum(phi, OPTS)
    assert route == "dense_finite"
    ref = spectra.eig_dense(kernels.schrodinger_matrix(phi, 0, margin=0).matrix)
    cloud = spectral_set(points=ref)
    assert hausdorff_distance(s, cloud) < 1e-12


def test_bloch_dimer_closed_form():
    dimer = kernels.kernel(Z1, [
        (coeff.Constant(1.0), {(1,): 1.0, (-1,): 1.0}),
        (coeff.Periodic((2,), (1.0, -1.0)), {(0,): 1.0}),
    ])
    s = spectra.bloch_spectrum(dimer, OPTS)
    # band functions are +-sqrt(1 + 4 cos^2 theta)
    ivs = sorted((iv.lo, iv.hi) for iv in s.intervals)
    assert abs(ivs[0][0] + np.sqrt(5.0)) < 1e-12
    assert abs(ivs[0][1] + 1.0) < 1e-12
    assert abs(ivs[1][0] - 1.0) < 1e-12
    assert abs(ivs[1][1] - np.sqrt(5.0)) < 1e-12


def test_bloch_reduces_to_symbol_range_for_constant_kernels():
    phi = laplacian()
    s1 = spectra.bloch_spectrum(phi, OPTS)
    s2, _ = spectra.asymptotic_spectrum(phi, OPTS)
    assert hausdorff_distance(s1, s2) < 1e-12


def test_essential_spectrum_provenance_and_dedup():
    phi = kernels.kernel(Z1, [
        (coeff.Constant(1.0), {(1,): 1.0, (-1,): 1.0}),
        (coeff.Periodic((2,), (0.5, 0.5)), {(0,): 1.0}),
    ])
    res = spectra.essential_spectrum(phi, OPTS)
    # the two residue probes see identical limit kernels: deduplicated
    assert res.family_size == 2
    assert res.unique_kernels == 1
    assert sum(1 for p in res.provenance if p["deduplicated"]) == 1
    oracle = spectral_set(intervals=(Interval(-1.5, 2.5),))
    assert hausdorff_distance(res.spectrum, oracle) < 1e-12


def test_essential_spectrum_coverage_gap_shrinks():
    a = coeff.Sum((coeff.Constant(2.0), coeff.so_generator("sin_sqrt")))
    phi = kernels.kernel(Z1, [(a, {(1,): 1.0, (-1,): 1.0})])
    coarse = spectra.essential_spectrum(
        phi, spectra.SpectralOptions(cluster_points=17))
    fine = spectra.essential_spectrum(
        phi, spectra.SpectralOptions(cluster_points=129))
    assert fine.coverage_gap < coarse.coverage_gap
    assert fine.coverage_gap > 0.0


def test_fredholm_three_verdicts():
    ident = kernels.identity_kernel(Z1)
    cert = spectra.is_fredholm(ident)
    assert cert.verdict is True
    assert cert.distance > cert.resolution

    cert = spectra.is_fredholm(laplacian())
    assert cert.verdict is False
    assert cert.depth > cert.resolution
    assert cert.witnesses

    # symbol range [0, 4] touches the origin: within resolution
    edge = kernels.kernel(Z1, [(coeff.Constant(1.0),
                                {(0,): 2.0, (1,): 1.0, (-1,): 1.0})])
    cert = spectra.is_fredholm(edge)
    assert cert.verdict is None
    assert cert.inconclusive


def test_fredholm_spectral_parameter_shift():
    cert = spectra.is_fredholm(laplacian(), z=5.0 + 0j)
    assert cert.verdict is True
    cert = spectra.is_fredholm(laplacian(), z=1.0 + 0j)
    assert cert.verdict is False


def test_pseudospectrum_normal_shortcut():
    ev = np.array([0.0, 1.0, 3.0])
    out = spectra.pseudospectrum(np.diag(ev), 0.25, grid=40)
    assert out["method"] == "normal_eigenvalue_distance"
    xs, ys = np.asarray(out["x"]), np.asarray(out["y"])
    smin = np.asarray(out["sigma_min"])
    # for a normal matrix sigma_min(z - H) is the eigenvalue distance
    for i in (0, 13, 29):
        for j in (4, 21, 38):
            z = xs[j] + 1j * ys[i]
            ref = np.min(np.abs(z - ev))
            assert abs(smin[i, j] - ref) < 1e-12
            assert bool(out["mask"][i, j]) == (ref <= 0.25)


def test_pseudospectrum_svd_agreement_nonnormal():
    rng = np.random.default_rng(8)
    m = np.triu(rng.normal(size=(9, 9)) + 1j * rng.normal(size=(9, 9)), k=0)
    out = spectra.pseudospectrum(m, 0.1, grid=12)
    assert out["method"] == "dense_svd"
    xs, ys = np.asarray(out["x"]), np.asarray(out["y"])
    smin = np.asarray(out["sigma_min"])
    for i in (2, 7):
        for j in (3, 9):
            z = xs[j] + 1j * ys[i]
            ref = scipy.linalg.svdvals(z * np.eye(9) - m)[-1]
            assert abs(smin[i, j] - ref) < 1e-10


def test_pseudospectrum_triangular_iteration_matches_svd():
    rng = np.random.default_rng(19)
    n = 180
    m = np.diag(rng.normal(size=n).astype(complex))
    m += np.diag(rng.normal(size=n - 1), k=1) * 0.6
    out = spectra.pseudospectrum(m, 0.05, grid=8)
    assert out["method"] == "schur_inverse_iteration"
    xs, ys = np.asarray(out["x"]), np.asarray(out["y"])
    smin = np.asarray(out["sigma_min"])
    # inverse iteration gives an estimate; accuracy is limited by the gap
    # between the two smallest singular values, so compare loosely
    for i in (1, 6):
        for j in (2, 5):
            z = xs[j] + 1j * ys[i]
            ref = scipy.linalg.svdvals(z * np.eye(n) - m)[-1]
            assert abs(smin[i, j] - ref) <= 2e-3 * max(1.0, ref)


def test_truncation_crosscheck_banded_matches_dense():
    a = coeff.Sum((coeff.Constant(2.0), coeff.so_generator("sin_sqrt")))
    phi = kernels.kernel(Z1, [
        (a, {(-1,): 1.0}),
        (coeff.translate(a, (1,)), {(1,): 1.0}),
    ])
    ess = spectra.essential_spectrum(phi, OPTS)
    rep = spectra.truncation_crosscheck(phi, 40, ess, OPTS)
    ref = spectra.eig_dense(kernels.schrodinger_matrix(phi, 40).matrix,
                            hermitian=True)
    assert np.max(np.abs(rep.eigenvalues - ref)) < 1e-10
    assert rep.hermitian
    assert rep.caveat == spectra.FINITE_SECTION_CAVEAT


def test_truncation_crosscheck_laplacian_contained():
    phi = laplacian()
    ess = spectra.essential_spectrum(phi, OPTS)
    rep = spectra.truncation_crosscheck(phi, 300, ess, OPTS)
    assert rep.max_distance < 1e-12
    assert rep.contained_fraction == 1.0
    assert rep.outliers == []


def test_truncation_crosscheck_advisory_for_nonselfadjoint():
    a = coeff.Sum((coeff.Constant(2.0), coeff.so_generator("sin_sqrt")))
    phi = kernels.kernel(Z1, [(a, {(1,): 1.0})])
    ess = spectra.essential_spectrum(phi, OPTS)
    rep = spectra.truncation_crosscheck(phi, 30, ess, OPTS)
    assert not rep.hermitian
    assert rep.advisory is not None
    assert "pseudospectrum" in rep.advisory["note"]


def test_window_cap_guard_on_dense_route():
    g2 = groups.zn(2)
    phi = kernels.kernel(g2, [(coeff.Constant(1.0),
                               {(1, 0): 1.0, (-1, 0): 1.0,
                                (0, 1): 1.0, (0, -1): 1.0})])
    small = spectra.SpectralOptions(dual_grid=256)
    ess = spectra.essential_spectrum(phi, small)
    assert hausdorff_distance(ess.spectrum,
                              spectral_set(intervals=(Interval(-4.0, 4.0),))) \
        <= ess.spectrum.resolution
    with pytest.raises(EigenSolverError):
        spectra.truncation_crosscheck(phi, 60, ess, small)
