import math

import numpy as np
import pytest

from bottindex import harness as hs
from bottindex import indices as ix
from bottindex import matcore as mc
from bottindex import models as md
from bottindex.errors import GaplessAtMu, NotTranslationInvariant, UnknownSuite


# --- momentum-space oracle ---------------------------------------------------

@pytest.mark.parametrize("L, q", [(8, 2), (12, 3), (16, 4), (12, 6), (10, 5)])
def test_bloch_spectrum_matches_real_space(L, q):
    spec, params = md.LatticeSpec(L, L), md.ModelParams(1, q)
    E = np.linalg.eigvalsh(md.build_hofstadter(spec, params))
    assert np.abs(E - hs.bloch_spectrum(spec, params)).max() < 1e-10


def test_bloch_spectrum_non_square_torus():
    spec, params = md.LatticeSpec(5, 12), md.ModelParams(2, 3)
    E = np.linalg.eigvalsh(md.build_hofstadter(spec, params))
    assert np.abs(E - hs.bloch_spectrum(spec, params)).max() < 1e-10


def test_fhs_trivial_gap():
    spec, params = md.LatticeSpec(8, 8), md.ModelParams(0, 1)
    assert hs.fhs_chern_oracle(spec, params, -10.0) == 0
    assert hs.fhs_chern_oracle(spec, params, 10.0) == 0


def _gap_chern(L, q):
    spec, params = md.LatticeSpec(L, L), md.ModelParams(1, q)
    H = md.build_hofstadter(spec, params)
    return [(r, hs.fhs_chern_oracle(spec, params, mu)) for r, mu, _ in md.band_gap_centers(H, q)]


def test_fhs_diophantine_values():
    # for flux 1/q the Chern number of filling r solves r = q s + t with |t| <= q/2,
    # up to a global orientation sign
    for L, q in ((12, 3), (16, 4), (24, 6), (15, 5)):
        got = _gap_chern(L, q)
        sign = -1 if got[0][1] < 0 else 1
        for r, c in got:
            t = r if r <= q / 2 else r - q
            assert c == sign * t, (q, r, c)


def test_fhs_sum_over_gaps_cancels():
    # the full spectrum carries no Chern number
    spec, params = md.LatticeSpec(12, 12), md.ModelParams(1, 3)
    H = md.build_hofstadter(spec, params)
    top = np.linalg.eigvalsh(H).max() + 1
    assert hs.fhs_chern_oracle(spec, params, top) == 0
    band = [c for _, c in _gap_chern(12, 3)]
    # band Chern numbers are successive differences and sum to zero
    per_band = [band[0], band[1] - band[0], -band[1]]
    assert sum(per_band) == 0


def test_fhs_independent_of_grid_size():
    spec, params = md.LatticeSpec(16, 16), md.ModelParams(1, 4)
    H = md.build_hofstadter(spec, params)
    _, mu, _ = md.band_gap_centers(H, 4)[0]
    c1 = hs.fhs_chern_oracle(spec, params, mu)
    c2 = hs.fhs_chern_oracle(md.LatticeSpec(8, 8), params, mu)
    c3 = hs.fhs_chern_oracle(md.LatticeSpec(24, 24), params, mu)
    assert c1 == c2 == c3 and abs(c1) == 1
    # without refinement the 8 x 2 zone of the small torus is too coarse
    assert hs.fhs_chern_oracle(md.LatticeSpec(8, 8), params, mu, min_points=1) == 0


def test_fhs_errors():
    with pytest.raises(NotTranslationInvariant):
        hs.fhs_chern_oracle(md.LatticeSpec(8, 8), md.ModelParams(1, 4, disorder_W=1.0), 0.0)
    with pytest.raises(NotTranslationInvariant):
        hs.fhs_chern_oracle(md.LatticeSpec(8, 8, "open"), md.ModelParams(1, 4), -2.0)
    with pytest.raises(GaplessAtMu):
        # inside the lowest band
        hs.fhs_chern_oracle(md.LatticeSpec(8, 8), md.ModelParams(1, 4), -2.7)


def test_windowed_trace_tracks_oracle():
    # the central-window commutator trace agrees with the oracle in sign and
    # approaches it in magnitude
    inst = hs.Instance(16, 1, 4, 1, 8.0)
    ev = hs.cached_instance(inst)
    assert np.sign(ev.windowed_chern.real) == ev.fhs
    assert abs(ev.windowed_chern.real - ev.fhs) < 0.3


# --- random ensembles -------------------------------------------------------

def test_ensemble_validation():
    with pytest.raises(ValueError):
        hs.EnsembleSpec(n_trials=0)
    with pytest.raises(ValueError):
        hs.EnsembleSpec(scale=0)


def test_random_pair_is_deterministic_and_small():
    ens = hs.EnsembleSpec(seed=42, scale=0.1, dim=8)
    U1, V1 = hs.random_admissible_pair(ens, 3)
    U2, V2 = hs.random_admissible_pair(ens, 3)
    assert np.array_equal(U1, U2) and np.array_equal(V1, V2)
    assert mc.unitarity_defect(U1) < 1e-12
    c = mc.operator_norm(U1 @ V1 - V1 @ U1)
    assert c <= 2 * 0.1 ** 2 + 1e-3
    U3, _ = hs.random_admissible_pair(ens, 4)
    assert not np.array_equal(U1, U3)


def test_random_pair_tiny_scale_is_near_identity():
    U, V = hs.random_admissible_pair(hs.EnsembleSpec(scale=1e-300, dim=4))
    assert np.allclose(U, np.eye(4)) and np.allclose(V, np.eye(4))


def test_random_hermitian_norm(rng):
    H = hs.random_hermitian(rng, 6, 0.37)
    assert mc.operator_norm(H) == pytest.approx(0.37)


def test_golden_pair_helper():
    U, V = hs.golden_pair()
    assert ix.bott_index(U, V).value == -1


# --- suites -------------------------------------------------------------------

SMALL = hs.EnsembleSpec(n_trials=6, seed=3)


@pytest.mark.parametrize("name", [n for n in hs.SUITE_NAMES if n != "bott-chern"])
def test_suites_pass(name):
    v = hs.run_suite(name, SMALL)
    assert v.failures == 0, [r for r in v.details if not r.passed]
    assert v.failures == sum(not r.passed for r in v.details)
    assert [r.trial for r in v.details] == list(range(v.trials))


def test_bott_chern_suite_reports_disagreement():
    v = hs.run_suite("bott-chern", SMALL)
    # the finite commutator trace is zero, so no instance with a nonzero
    # oracle value can pass
    assert v.failures == v.trials
    for r in v.details:
        assert abs(r.values["chern_trace"]) < 1e-10
        assert r.values["fhs"] != 0


def test_integrality_suite_golden_records():
    v = hs.run_suite("integrality", SMALL)
    assert [r.values["bott"] for r in v.details[:2]] == [-1, 1]
    assert v.worst_defect < 1e-10


def test_homotopy_suite_with_zero_generators():
    U, V = hs.golden_pair()
    rep = ix.homotopy_scan(U, V, np.zeros((3, 3)), np.zeros((3, 3)))
    assert rep.constant


def test_appendix_b_suite_hundred_trials():
    v = hs.run_suite("appendixB", hs.EnsembleSpec(n_trials=100, seed=9))
    assert v.failures == 0
    assert all(r.values["bott"] == 0 for r in v.details[1:])


def test_suite_reproducible():
    a = hs.run_suite("loglaw", SMALL)
    b = hs.run_suite("loglaw", SMALL)
    assert hs.verdict_lines(a) == hs.verdict_lines(b)


def test_suite_parallel_matches_serial():
    a = hs.run_suite("appendixC", SMALL, workers=1)
    b = hs.run_suite("appendixC", SMALL, workers=3)
    assert hs.verdict_lines(a) == hs.verdict_lines(b)


def test_unknown_suite():
    with pytest.raises(UnknownSuite):
        hs.run_suite("nope")
    with pytest.raises(KeyError):
        hs.run_suite("nope")


def test_manifest_covers_every_result():
    assert set(hs.SUITE_MANIFEST.values()) == set(hs.SUITE_NAMES)
    assert len(hs.SUITE_NAMES) == 10
    for name, suite in hs.SUITES.items():
        assert suite.result


def test_verdict_lines_and_table():
    v = hs.run_suite("invertible", hs.EnsembleSpec(n_trials=2))
    lines = hs.verdict_lines(v)
    assert len(lines) == 3 and '"summary": true' in lines[-1]
    table = hs.summary_table([v])
    assert "invertible" in table and "PASS" in table


def test_failure_records_infinite_defect():
    v = hs.SuiteVerdict.from_records("x", [hs.TrialRecord(1, "", False, math.inf),
                                           hs.TrialRecord(0, "", True, 0.5)])
    assert v.failures == 1 and v.worst_defect == math.inf
    assert [r.trial for r in v.details] == [0, 1]
    assert '"worst_defect": "inf"' in hs.verdict_lines(v)[-1]
